//! Direct evaluators of the closed-form curvature identities at the level of
//! pointwise structural data `(φ, f, W, V, h)` and the curvature constants
//! `(c₁, c₂)`, together with a synthesizer of admissible data from a linear
//! model. The evaluators are pure algebra; the oracles they are tested
//! against live in `product` (ambient curvature) and `hypersurface`
//! (finite differences on actual immersions).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{GeomError, Result};
use crate::hypersurface::{AdaptedFrame, StructuralData};
use crate::linalg::{gram_schmidt, wedge_apply, Metric, Vector};
use crate::product::EPS;
use crate::spaceform::complex_structure;

/// Pointwise structural data plus curvature constants, ready for identity
/// evaluation. `metric` is the identity for synthesized samples and the
/// induced metric for immersed points.
#[derive(Debug, Clone)]
pub struct StructuralSample {
    pub dim: usize,
    pub metric: Metric,
    pub sd: StructuralData,
    pub c: [f64; 2],
    /// Linear-model ambient data behind a synthesized sample (tangent basis
    /// columns, unit normal, ambient J and F); `None` for immersed points.
    pub model: Option<LinearModel>,
}

#[derive(Debug, Clone)]
pub struct LinearModel {
    pub basis: DMatrix<f64>,
    pub nu: Vector,
    pub j: DMatrix<f64>,
    pub f: DMatrix<f64>,
}

impl StructuralSample {
    pub fn immersed(metric: Metric, sd: StructuralData, c1: f64, c2: f64) -> Self {
        StructuralSample {
            dim: sd.dim(),
            metric,
            sd,
            c: [c1, c2],
            model: None,
        }
    }
}

/// Build admissible structural data from the linear model: `ℝ^(2n)` with the
/// standard complex structure, `F = diag(+I_{2n₁}, −I_{2n₂})`, and a given
/// unit normal; the tangent space is `ν⊥` with an orthonormal basis.
pub fn synth_with_normal(
    nu_ambient: &Vector,
    n1: usize,
    n2: usize,
    c1: f64,
    c2: f64,
) -> Result<StructuralSample> {
    if n1 < 1 || n2 < 1 {
        return Err(GeomError::usage("factor dimensions must be >= 1"));
    }
    let n = n1 + n2;
    let dim_amb = 2 * n;
    if nu_ambient.len() != dim_amb {
        return Err(GeomError::usage("normal has wrong ambient dimension"));
    }
    let norm = nu_ambient.norm();
    if norm < 1e-12 {
        return Err(GeomError::degeneracy("normal vector is numerically zero"));
    }
    let nu = nu_ambient / norm;

    let mut j = DMatrix::zeros(dim_amb, dim_amb);
    j.view_mut((0, 0), (2 * n1, 2 * n1))
        .copy_from(&complex_structure(n1));
    j.view_mut((2 * n1, 2 * n1), (2 * n2, 2 * n2))
        .copy_from(&complex_structure(n2));
    let mut f_amb = DMatrix::identity(dim_amb, dim_amb);
    for k in 2 * n1..dim_amb {
        f_amb[(k, k)] = -1.0;
    }

    // orthonormal basis of ν⊥: greedy Gram–Schmidt over ν followed by the
    // standard basis, dropping the one dependent direction
    let g_amb = Metric::identity(dim_amb);
    let mut cols: Vec<Vector> = vec![nu.clone()];
    for k in 0..dim_amb {
        let mut e = Vector::zeros(dim_amb);
        e[k] = 1.0;
        let mut trial = cols.clone();
        trial.push(e);
        if let Ok(ortho) = gram_schmidt(&trial, &g_amb) {
            cols = ortho;
            if cols.len() == dim_amb {
                break;
            }
        }
    }
    if cols.len() != dim_amb {
        return Err(GeomError::degeneracy("failed to complete tangent basis"));
    }
    let dim = dim_amb - 1;
    let mut basis = DMatrix::zeros(dim_amb, dim);
    for (i, col) in cols[1..].iter().enumerate() {
        basis.set_column(i, col);
    }

    let bt = basis.transpose();
    let phi = &bt * &j * &basis;
    let f = &bt * &f_amb * &basis;
    let v = &bt * (&f_amb * &nu);
    let w = &bt * (-(&j * &nu));
    let h = (&f_amb * &nu).dot(&nu);

    Ok(StructuralSample {
        dim,
        metric: Metric::identity(dim),
        sd: StructuralData { phi, w, f, v, h },
        c: [c1, c2],
        model: Some(LinearModel {
            basis,
            nu,
            j,
            f: f_amb,
        }),
    })
}

/// Random admissible sample: random unit normal, curvature constants drawn
/// uniformly from [−1, 1].
pub fn synth_structural(seed: u64, n1: usize, n2: usize) -> Result<StructuralSample> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let dim_amb = 2 * (n1 + n2);
    let nu = Vector::from_fn(dim_amb, |_, _| rng.gen_range(-1.0f64..1.0));
    let c1 = rng.gen_range(-1.0f64..1.0);
    let c2 = rng.gen_range(-1.0f64..1.0);
    synth_with_normal(&nu, n1, n2, c1, c2)
}

/// Closed-form Codazzi right side:
/// `d∇A(Y,X) = Σᵢ (cᵢ/2)[2εᵢLᵢ((Y∧X)V) + LᵢφLᵢ((Y∧X)LᵢW)
///   + (3εᵢ⟨(Y∧X)V, LᵢW⟩ + 2⟨X, LᵢφLᵢY⟩)LᵢW]`.
pub fn codazzi_rhs(ss: &StructuralSample, y: &Vector, x: &Vector) -> Result<Vector> {
    if x.len() != ss.dim || y.len() != ss.dim {
        return Err(GeomError::usage("codazzi arguments have wrong dimension"));
    }
    let g = &ss.metric;
    let sd = &ss.sd;
    let mut out = Vector::zeros(ss.dim);
    for i in 0..2 {
        let li = sd.l(i);
        let lw = &li * &sd.w;
        let lpl = &li * &sd.phi * &li;
        let t1 = &li * wedge_apply(y, x, &sd.v, g)? * (2.0 * EPS[i]);
        let t2 = &lpl * wedge_apply(y, x, &lw, g)?;
        let coeff = 3.0 * EPS[i] * g.inner(&wedge_apply(y, x, &sd.v, g)?, &lw)
            + 2.0 * g.inner(x, &(&lpl * y));
        out += (t1 + t2 + &lw * coeff) * (ss.c[i] / 2.0);
    }
    Ok(out)
}

/// Specialization of the Codazzi right side to planes containing `W`:
/// `d∇A(W,X) = Σᵢ (cᵢ/2)[(7εᵢ+h)⟨X,V⟩LᵢW + ⟨X,LᵢW⟩(εᵢ−h)V − (1+εᵢh)LᵢφLᵢX]`.
pub fn codazzi_rhs_w(ss: &StructuralSample, x: &Vector) -> Result<Vector> {
    if x.len() != ss.dim {
        return Err(GeomError::usage("argument has wrong dimension"));
    }
    let g = &ss.metric;
    let sd = &ss.sd;
    let h = sd.h;
    let mut out = Vector::zeros(ss.dim);
    for i in 0..2 {
        let li = sd.l(i);
        let lw = &li * &sd.w;
        let lpl = &li * &sd.phi * &li;
        let term = &lw * ((7.0 * EPS[i] + h) * g.inner(x, &sd.v))
            + &sd.v * (g.inner(x, &lw) * (EPS[i] - h))
            - &lpl * x * (1.0 + EPS[i] * h);
        out += term * (ss.c[i] / 2.0);
    }
    Ok(out)
}

/// Closed form of the Codazzi operator on the plane `(W, V)`:
/// `Σᵢ 4cᵢ(1−h²)[(εᵢ+h)W − φV]`. Nonzero wherever `V ≠ 0` and
/// `(c₁, c₂) ≠ 0` — the mechanism obstructing a parallel shape operator.
pub fn codazzi_wv_closed_form(ss: &StructuralSample) -> Vector {
    let sd = &ss.sd;
    let h = sd.h;
    let phi_v = &sd.phi * &sd.v;
    let mut out = Vector::zeros(ss.dim);
    for i in 0..2 {
        out += (&sd.w * (EPS[i] + h) - &phi_v) * (4.0 * ss.c[i] * (1.0 - h * h));
    }
    out
}

/// Mean-curvature gradient of a totally umbilical hypersurface:
/// `∇H = 4(Σᵢ cᵢ(εᵢ+h)) V`.
pub fn mean_curvature_gradient_closed_form(ss: &StructuralSample) -> Vector {
    let scalar: f64 = (0..2).map(|i| ss.c[i] * (EPS[i] + ss.sd.h)).sum();
    &ss.sd.v * (4.0 * scalar)
}

/// Which adapted-frame component display of the Codazzi operator to
/// evaluate: `d∇A(W, eⱼ)`, `d∇A(W, φeⱼ)`, or `d∇A(eⱼ, φe_l)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameDisplay {
    We,
    WPhiE,
    EPhiE,
}

/// Component-by-component expansion of the Codazzi right side in an adapted
/// frame `{W, e_j, φe_j}`. Indices are zero-based; `l` is only used by
/// `EPhiE`.
pub fn frame_codazzi_rhs(
    ss: &StructuralSample,
    frame: &AdaptedFrame,
    which: FrameDisplay,
    j: usize,
    l: usize,
) -> Result<Vector> {
    frame_codazzi_impl(ss, frame, which, j, l, false)
}

/// Variant of the `We` display with the opposite sign on the
/// `(1−εᵢh)⟨φeⱼ,V⟩⟨V,φe_k⟩` coefficient (reading that middle factor as
/// `⟨φV,e_k⟩`). Kept as a report-only comparison row; it does not match the
/// Codazzi right side.
pub fn frame_codazzi_we_alt(
    ss: &StructuralSample,
    frame: &AdaptedFrame,
    j: usize,
) -> Result<Vector> {
    frame_codazzi_impl(ss, frame, FrameDisplay::We, j, 0, true)
}

fn frame_codazzi_impl(
    ss: &StructuralSample,
    frame: &AdaptedFrame,
    which: FrameDisplay,
    j: usize,
    l: usize,
    alt_sign: bool,
) -> Result<Vector> {
    let pairs = frame.e.len();
    if j >= pairs || (which == FrameDisplay::EPhiE && l >= pairs) {
        return Err(GeomError::usage("frame index out of range"));
    }
    let g = &ss.metric;
    let sd = &ss.sd;
    let h = sd.h;
    let v = &sd.v;
    let w = &frame.w;
    let ip = |a: &Vector, b: &Vector| g.inner(a, b);
    let mut out = Vector::zeros(ss.dim);

    match which {
        FrameDisplay::We => {
            let ej = &frame.e[j];
            let pej = &frame.phi_e[j];
            for i in 0..2 {
                let (ci, e) = (ss.c[i], EPS[i]);
                let li = sd.l(i);
                let lpl = &li * &sd.phi * &li;
                let plpl = &sd.phi * &lpl;
                out += w * (4.0 * ci * (e + h) * ip(ej, v));
                let mid_sign = if alt_sign { -1.0 } else { 1.0 };
                for k in 0..pairs {
                    let ek = &frame.e[k];
                    let pek = &frame.phi_e[k];
                    let ce = (7.0 + e * h) * ip(ej, v) * ip(v, pek)
                        + (1.0 - e * h) * ip(pej, v) * ip(v, ek)
                        - (1.0 + e * h) * ip(&(&lpl * ej), ek);
                    let cpe = -(7.0 + e * h) * ip(ej, v) * ip(v, ek)
                        + mid_sign * (1.0 - e * h) * ip(pej, v) * ip(v, pek)
                        + (1.0 + e * h) * ip(&(&plpl * ej), ek);
                    out += ek * (ci / 2.0 * ce) + pek * (ci / 2.0 * cpe);
                }
            }
        }
        FrameDisplay::WPhiE => {
            let ej = &frame.e[j];
            let pej = &frame.phi_e[j];
            for i in 0..2 {
                let (ci, e) = (ss.c[i], EPS[i]);
                let li = sd.l(i);
                let lpl = &li * &sd.phi * &li;
                out += w * (4.0 * ci * (e + h) * ip(v, pej));
                for k in 0..pairs {
                    let ek = &frame.e[k];
                    let pek = &frame.phi_e[k];
                    let ce = (7.0 + e * h) * ip(v, pej) * ip(v, pek)
                        - (1.0 - e * h) * ip(v, ej) * ip(v, ek)
                        - (1.0 + e * h) * ip(&(&lpl * pej), ek);
                    let cpe = -(7.0 + e * h) * ip(pej, v) * ip(v, ek)
                        - (1.0 - e * h) * ip(ej, v) * ip(v, pek)
                        - (1.0 + e * h) * ip(&(&lpl * pej), pek);
                    out += ek * (ci / 2.0 * ce) + pek * (ci / 2.0 * cpe);
                }
            }
        }
        FrameDisplay::EPhiE => {
            let ej = &frame.e[j];
            let pej = &frame.phi_e[j];
            let el = &frame.e[l];
            let pel = &frame.phi_e[l];
            for i in 0..2 {
                let (ci, e) = (ss.c[i], EPS[i]);
                let li = sd.l(i);
                let lpl = &li * &sd.phi * &li;
                let cw = (3.0 + e * h) * (ip(v, pel) * ip(v, pej) + ip(v, el) * ip(v, ej))
                    - (1.0 + e * h) * ip(&(&lpl * pel), ej);
                out += w * (ci * cw);
                // the repeated quadratic block in the k-sums
                let q = 3.0 * (ip(v, pej) * ip(v, pel) + ip(v, ej) * ip(v, el))
                    - 2.0 * ip(&(&lpl * pel), ej);
                for k in 0..pairs {
                    let ek = &frame.e[k];
                    let pek = &frame.phi_e[k];
                    let ce = 2.0 * e * (ip(v, pel) * ip(&(&li * ej), ek) - ip(v, ej) * ip(&(&li * pel), ek))
                        - e * (ip(v, el) * ip(&(&lpl * ej), ek) + ip(v, pej) * ip(&(&lpl * pel), ek))
                        + e * ip(v, pek) * q;
                    let cpe = 2.0 * e
                        * (ip(v, pel) * ip(&(&li * ej), pek) - ip(v, ej) * ip(&(&li * pel), pek))
                        - e * (ip(v, el) * ip(&(&lpl * ej), pek) + ip(v, pej) * ip(&(&lpl * pel), pek))
                        - e * ip(v, ek) * q;
                    out += ek * (ci / 2.0 * ce) + pek * (ci / 2.0 * cpe);
                }
            }
        }
    }
    Ok(out)
}

/// The two frame expressions for the `W`-derivative of the umbilic factor,
/// whose sum must cancel. The skew/symmetric trace terms
/// `⟨LᵢφLᵢeⱼ,eⱼ⟩` and `⟨φLᵢφLᵢφeⱼ,eⱼ⟩` are evaluated, not assumed zero.
/// Returns `|expr₁ + expr₂|`.
pub fn frame_cancellation(
    ss: &StructuralSample,
    frame: &AdaptedFrame,
    j: usize,
) -> Result<f64> {
    if j >= frame.e.len() {
        return Err(GeomError::usage("frame index out of range"));
    }
    let g = &ss.metric;
    let sd = &ss.sd;
    let h = sd.h;
    let v = &sd.v;
    let ej = &frame.e[j];
    let pej = &frame.phi_e[j];
    let ip = |a: &Vector, b: &Vector| g.inner(a, b);
    let mut sum = 0.0;
    for i in 0..2 {
        let (ci, e) = (ss.c[i], EPS[i]);
        let li = sd.l(i);
        let lpl = &li * &sd.phi * &li;
        let plplp = &sd.phi * &lpl * &sd.phi;
        let expr1 = ci / 2.0
            * ((7.0 + e * h) * ip(ej, v) * ip(v, pej)
                + (1.0 - e * h) * ip(pej, v) * ip(v, ej)
                - (1.0 + e * h) * ip(&(&lpl * ej), ej));
        let expr2 = ci / 2.0
            * (-(7.0 + e * h) * ip(pej, v) * ip(v, ej)
                - (1.0 - e * h) * ip(ej, v) * ip(v, pej)
                + (1.0 + e * h) * ip(&(&plplp * ej), ej));
        sum += expr1 + expr2;
    }
    Ok(sum.abs())
}

/// Curvature right side (tangential part) in the grouped display form:
/// `Σᵢ (cᵢ/2){(LᵢX∧LᵢY)LᵢZ + (φLᵢX∧φLᵢY)LᵢZ + ⟨V,Z⟩[…] + […]∧W LᵢZ
///   + 2(…)(φLᵢZ − ⟨V,Z⟩W)} + (AX∧AY)Z`,
/// reading the ambiguous wedge term as
/// `((⟨V,X⟩φLᵢY − ⟨V,Y⟩φLᵢX) ∧ W) LᵢZ`. Report-only: compared against the
/// definition-level oracle, not asserted to vanish.
pub fn gauss_rhs_display(
    ss: &StructuralSample,
    a: &DMatrix<f64>,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<Vector> {
    let g = &ss.metric;
    let sd = &ss.sd;
    let v = &sd.v;
    let w = &sd.w;
    let ip = |p: &Vector, q: &Vector| g.inner(p, q);
    let mut out = Vector::zeros(ss.dim);
    for i in 0..2 {
        let (ci, e) = (ss.c[i], EPS[i]);
        let li = sd.l(i);
        let (lx, ly, lz) = (&li * x, &li * y, &li * z);
        let (plx, ply, plz) = (&sd.phi * &lx, &sd.phi * &ly, &sd.phi * &lz);
        let t1 = wedge_apply(&lx, &ly, &lz, g)?;
        let t2 = wedge_apply(&plx, &ply, &lz, g)?;
        let bracket = &lx * ip(v, y) - &ly * ip(v, x)
            + (&plx - w * ip(v, x)) * ip(&ly, w)
            - (&ply - w * ip(v, y)) * ip(&lx, w);
        let t3 = bracket * ip(v, z);
        let wedge_arg = &ply * ip(v, x) - &plx * ip(v, y);
        let t4 = wedge_apply(&wedge_arg, w, &lz, g)?;
        let scal = ip(&lx, &(&ply - w * ip(v, y))) + e * ip(&ly, w) * ip(v, x);
        let t5 = (&plz - w * ip(v, z)) * (2.0 * scal);
        out += (t1 + t2 + t3 + t4 + t5) * (ci / 2.0);
    }
    out += wedge_apply(&(a * x), &(a * y), z, g)?;
    Ok(out)
}

/// Curvature right side in fully expanded form, with
/// `pᵢX = φLᵢX − εᵢ⟨V,X⟩W`:
/// `Σᵢ (cᵢ/2){(LᵢX∧LᵢY)LᵢZ + (pᵢX∧pᵢY)LᵢZ
///   + ⟨V,Z⟩[⟨V,Y⟩LᵢX − ⟨V,X⟩LᵢY + εᵢ⟨LᵢY,W⟩pᵢX − εᵢ⟨LᵢX,W⟩pᵢY]
///   + 2(⟨LᵢX,pᵢY⟩ + εᵢ⟨LᵢY,W⟩⟨V,X⟩)pᵢZ} + (AX∧AY)Z`.
/// Matches the definition-level tangential-curvature oracle to roundoff.
pub fn gauss_rhs_expanded(
    ss: &StructuralSample,
    a: &DMatrix<f64>,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<Vector> {
    let g = &ss.metric;
    let sd = &ss.sd;
    let v = &sd.v;
    let w = &sd.w;
    let ip = |p: &Vector, q: &Vector| g.inner(p, q);
    let mut out = Vector::zeros(ss.dim);
    for i in 0..2 {
        let (ci, e) = (ss.c[i], EPS[i]);
        let li = sd.l(i);
        let (lx, ly, lz) = (&li * x, &li * y, &li * z);
        let p = |u: &Vector, lu: &Vector| -> Vector { &sd.phi * lu - w * (e * ip(v, u)) };
        let (px, py, pz) = (p(x, &lx), p(y, &ly), p(z, &lz));
        let t1 = wedge_apply(&lx, &ly, &lz, g)?;
        let t2 = wedge_apply(&px, &py, &lz, g)?;
        let bracket = &lx * ip(v, y) - &ly * ip(v, x) + &px * (e * ip(&ly, w))
            - &py * (e * ip(&lx, w));
        let t3 = bracket * ip(v, z);
        let t5 = &pz * (2.0 * (ip(&lx, &py) + e * ip(&ly, w) * ip(v, x)));
        out += (t1 + t2 + t3 + t5) * (ci / 2.0);
    }
    out += wedge_apply(&(a * x), &(a * y), z, g)?;
    Ok(out)
}

/// Homogeneous obstruction system `{Σᵢcᵢ(εᵢ+h) = 0, Σᵢcᵢ = 0}` in the
/// unknowns `(c₁, c₂)`: the determinant is `2` for every `h`, so the only
/// solution is `c₁ = c₂ = 0`.
pub fn obstruction_system_determinant(h: f64) -> f64 {
    let m = DMatrix::from_row_slice(2, 2, &[EPS[0] + h, EPS[1] + h, 1.0, 1.0]);
    m.determinant()
}

/// Named residuals of the full pointwise identity set for the structural
/// tensors (compatibility of `φ`, `f`, `W`, `V`, `h`).
pub fn structure_identity_residuals(
    metric: &Metric,
    sd: &StructuralData,
) -> Vec<(&'static str, f64)> {
    let g = metric;
    let dim = sd.dim();
    let gm = g.matrix();
    let id = DMatrix::identity(dim, dim);
    let gv = gm * &sd.v;
    let gw = gm * &sd.w;
    let mut rows = Vec::new();

    rows.push(("v_w_orthogonal", g.inner(&sd.v, &sd.w).abs()));
    rows.push(("w_unit", (g.inner(&sd.w, &sd.w) - 1.0).abs()));
    rows.push(("phi_w_zero", g.norm(&(&sd.phi * &sd.w))));
    // φ² = −I + W⟨·,W⟩
    let phi2 = &sd.phi * &sd.phi;
    rows.push((
        "phi_squared",
        (&phi2 + &id - &sd.w * gw.transpose()).amax(),
    ));
    // φ skew-adjoint
    let gphi = gm * &sd.phi;
    rows.push(("phi_skew", (&gphi + gphi.transpose()).amax()));
    // f self-adjoint
    let gf = gm * &sd.f;
    rows.push(("f_symmetric", (&gf - gf.transpose()).amax()));
    rows.push((
        "f_v_eigen",
        (&sd.f * &sd.v + &sd.v * sd.h).norm(),
    ));
    rows.push((
        "h_v_unit",
        (sd.h * sd.h + g.inner(&sd.v, &sd.v) - 1.0).abs(),
    ));
    // fφ + V⟨·,W⟩ = φf − W⟨·,V⟩
    let lhs = &sd.f * &sd.phi + &sd.v * gw.transpose();
    let rhs = &sd.phi * &sd.f - &sd.w * gv.transpose();
    rows.push(("f_phi_commutation", (lhs - rhs).amax()));
    rows.push((
        "f_w_decomposition",
        (&sd.f * &sd.w - &sd.w * sd.h + &sd.phi * &sd.v).norm(),
    ));
    // f² = I − V⟨·,V⟩
    let f2 = &sd.f * &sd.f;
    rows.push((
        "f_squared",
        (&f2 - &id + &sd.v * gv.transpose()).amax(),
    ));
    // ⟨fX,fY⟩ = ⟨X,Y⟩ − ⟨V,X⟩⟨V,Y⟩
    let pullback = sd.f.transpose() * gm * &sd.f;
    rows.push((
        "f_metric_pullback",
        (&pullback - gm + &gv * gv.transpose()).amax(),
    ));
    for i in 0..2 {
        let li = sd.l(i);
        let lw = &li * &sd.w;
        let r1 = (&li * &sd.phi * &lw - &sd.v * (EPS[i] - sd.h)).norm();
        let r2 = (g.inner(&lw, &sd.w) - (1.0 + EPS[i] * sd.h)).abs();
        let r3 = (&li * &sd.v - &sd.v * (1.0 - EPS[i] * sd.h)).norm();
        let r4 = g.inner(&sd.v, &lw).abs();
        let names: [&'static str; 8] = [
            "l1_phi_l1_w",
            "l1_w_inner",
            "l1_v_eigen",
            "v_l1_w_orthogonal",
            "l2_phi_l2_w",
            "l2_w_inner",
            "l2_v_eigen",
            "v_l2_w_orthogonal",
        ];
        rows.push((names[4 * i], r1));
        rows.push((names[4 * i + 1], r2));
        rows.push((names[4 * i + 2], r3));
        rows.push((names[4 * i + 3], r4));
    }
    rows
}

/// Frame-dependent identities `⟨LᵢW, φe_k⟩ = −εᵢ⟨V, e_k⟩` and
/// `⟨LᵢW, e_k⟩ = εᵢ⟨V, φe_k⟩`; returns the worst residual over the frame.
pub fn frame_projection_residual(
    ss: &StructuralSample,
    frame: &AdaptedFrame,
) -> f64 {
    let g = &ss.metric;
    let sd = &ss.sd;
    let mut worst: f64 = 0.0;
    for i in 0..2 {
        let lw = sd.l(i) * &sd.w;
        for k in 0..frame.e.len() {
            let r1 = g.inner(&lw, &frame.phi_e[k]) + EPS[i] * g.inner(&sd.v, &frame.e[k]);
            let r2 = g.inner(&lw, &frame.e[k]) - EPS[i] * g.inner(&sd.v, &frame.phi_e[k]);
            worst = worst.max(r1.abs()).max(r2.abs());
        }
    }
    worst
}

/// Tangential part of the formal ambient curvature of a synthesized linear
/// model, in tangent coordinates — the independent oracle for the identity
/// evaluators on synthesized samples.
pub fn model_tangential_curvature(
    ss: &StructuralSample,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<Vector> {
    let model = ss
        .model
        .as_ref()
        .ok_or_else(|| GeomError::usage("sample carries no linear model"))?;
    let (xa, ya, za) = (&model.basis * x, &model.basis * y, &model.basis * z);
    let r = model_curvature(ss, model, &xa, &ya, &za);
    Ok(model.basis.transpose() * r)
}

/// Tangential part of the formal ambient curvature applied to `(Y, X, ν)` —
/// the oracle for the Codazzi right side.
pub fn model_codazzi_oracle(ss: &StructuralSample, y: &Vector, x: &Vector) -> Result<Vector> {
    let model = ss
        .model
        .as_ref()
        .ok_or_else(|| GeomError::usage("sample carries no linear model"))?;
    let (xa, ya) = (&model.basis * x, &model.basis * y);
    let r = model_curvature(ss, model, &ya, &xa, &model.nu);
    Ok(model.basis.transpose() * r)
}

fn model_curvature(
    ss: &StructuralSample,
    model: &LinearModel,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Vector {
    let dim = x.len();
    let id = DMatrix::identity(dim, dim);
    let mut out = Vector::zeros(dim);
    for i in 0..2 {
        let li = &id + &model.f * EPS[i];
        let (lx, ly, lz) = (&li * x, &li * y, &li * z);
        let (jlx, jly) = (&model.j * &lx, &model.j * &ly);
        let w1 = &lx * ly.dot(&lz) - &ly * lx.dot(&lz);
        let w2 = &jlx * jly.dot(&lz) - &jly * jlx.dot(&lz);
        let w3 = (&model.j * &lz) * (2.0 * lx.dot(&jly));
        out += (w1 + w2 + w3) * (ss.c[i] / 2.0);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypersurface::adapted_frame;
    use crate::linalg::rel_residual;

    fn frame_of(ss: &StructuralSample, seed: u64) -> AdaptedFrame {
        adapted_frame(&ss.sd, &ss.metric, seed).unwrap()
    }

    #[test]
    fn synth_special_normals() {
        // ν in factor 1 → V = 0, h = 1
        let mut nu = Vector::zeros(4);
        nu[0] = 1.0;
        let ss = synth_with_normal(&nu, 1, 1, 0.3, -0.2).unwrap();
        assert!(ss.metric.norm(&ss.sd.v) < 1e-13);
        assert!((ss.sd.h - 1.0).abs() < 1e-13);
        // balanced normal → h = 0, |V| = 1
        let nu = Vector::from_vec(vec![1.0, 0.0, 1.0, 0.0]) / 2f64.sqrt();
        let ss = synth_with_normal(&nu, 1, 1, 0.3, -0.2).unwrap();
        assert!(ss.sd.h.abs() < 1e-13);
        assert!((ss.metric.norm(&ss.sd.v) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn synth_satisfies_structure_identities() {
        for seed in 0..50 {
            for (n1, n2) in [(1usize, 1usize), (1, 2)] {
                let ss = synth_structural(seed, n1, n2).unwrap();
                for (name, res) in structure_identity_residuals(&ss.metric, &ss.sd) {
                    assert!(res <= 1e-13, "seed {seed} ({n1},{n2}): {name} = {res:e}");
                }
            }
        }
    }

    #[test]
    fn codazzi_rhs_matches_model_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for seed in 0..50 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let x = Vector::from_fn(ss.dim, |_, _| rng.gen_range(-1.0f64..1.0));
            let y = Vector::from_fn(ss.dim, |_, _| rng.gen_range(-1.0f64..1.0));
            let closed = codazzi_rhs(&ss, &y, &x).unwrap();
            let oracle = model_codazzi_oracle(&ss, &y, &x).unwrap();
            assert!(
                rel_residual(&closed, &oracle) < 1e-12,
                "seed {seed}: {:e}",
                rel_residual(&closed, &oracle)
            );
        }
    }

    #[test]
    fn codazzi_rhs_antisymmetric_and_flat_zero() {
        let ss = synth_structural(3, 1, 1).unwrap();
        let x = Vector::from_vec(vec![0.4, -0.2, 0.9]);
        let y = Vector::from_vec(vec![1.1, 0.5, -0.3]);
        let a = codazzi_rhs(&ss, &y, &x).unwrap();
        let b = codazzi_rhs(&ss, &x, &y).unwrap();
        assert!((a.clone() + b).norm() < 1e-12 * a.norm().max(1.0));
        assert!(codazzi_rhs(&ss, &x, &x).unwrap().norm() < 1e-13);
        let mut flat = ss.clone();
        flat.c = [0.0, 0.0];
        assert!(codazzi_rhs(&flat, &y, &x).unwrap().norm() == 0.0);
    }

    #[test]
    fn w_specialization_matches_general_form() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        for seed in 0..100 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let x = Vector::from_fn(ss.dim, |_, _| rng.gen_range(-1.0f64..1.0));
            let full = codazzi_rhs(&ss, &ss.sd.w.clone(), &x).unwrap();
            let special = codazzi_rhs_w(&ss, &x).unwrap();
            assert!(rel_residual(&full, &special) < 1e-12);
        }
        // X = W → both vanish
        let ss = synth_structural(0, 1, 1).unwrap();
        assert!(codazzi_rhs_w(&ss, &ss.sd.w.clone()).unwrap().norm() < 1e-12);
    }

    #[test]
    fn w_specialization_with_v_zero() {
        // V = 0: only the −Σ(cᵢ/2)(1+εᵢh)LᵢφLᵢX term survives
        let mut nu = Vector::zeros(4);
        nu[1] = 1.0;
        let ss = synth_with_normal(&nu, 1, 1, 0.7, -0.4).unwrap();
        let x = Vector::from_vec(vec![0.3, -0.8, 0.2]);
        let got = codazzi_rhs_w(&ss, &x).unwrap();
        let mut want = Vector::zeros(3);
        for i in 0..2 {
            let li = ss.sd.l(i);
            want -= &li * &ss.sd.phi * &li * &x * (ss.c[i] / 2.0 * (1.0 + EPS[i] * ss.sd.h));
        }
        assert!((got - want).norm() < 1e-13);
    }

    #[test]
    fn wv_closed_form_matches_codazzi() {
        for seed in 0..100 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            if ss.metric.norm(&ss.sd.v) < 1e-10 {
                continue;
            }
            let full = codazzi_rhs(&ss, &ss.sd.w.clone(), &ss.sd.v.clone()).unwrap();
            let closed = codazzi_wv_closed_form(&ss);
            assert!(rel_residual(&full, &closed) < 1e-11, "seed {seed}");
        }
    }

    #[test]
    fn wv_closed_form_hand_cases() {
        // h = 0, c₂ = −c₁ → 8c₁W
        let nu = Vector::from_vec(vec![1.0, 0.0, 1.0, 0.0]) / 2f64.sqrt();
        let ss = synth_with_normal(&nu, 1, 1, 0.25, -0.25).unwrap();
        let got = codazzi_wv_closed_form(&ss);
        let want = &ss.sd.w * (8.0 * 0.25);
        assert!((got - want).norm() < 1e-12);
        // h² = 1 → 0
        let mut nu = Vector::zeros(4);
        nu[0] = 1.0;
        let ss = synth_with_normal(&nu, 1, 1, 0.5, 0.5).unwrap();
        assert!(codazzi_wv_closed_form(&ss).norm() < 1e-14);
    }

    #[test]
    fn frame_displays_match_codazzi() {
        for seed in 0..200 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let frame = frame_of(&ss, seed.wrapping_add(1));
            for j in 0..frame.e.len() {
                let d1 = frame_codazzi_rhs(&ss, &frame, FrameDisplay::We, j, 0).unwrap();
                let o1 = codazzi_rhs(&ss, &frame.w.clone(), &frame.e[j].clone()).unwrap();
                assert!(rel_residual(&d1, &o1) < 1e-10, "We seed {seed} j {j}: {:e}", rel_residual(&d1, &o1));
                let d2 = frame_codazzi_rhs(&ss, &frame, FrameDisplay::WPhiE, j, 0).unwrap();
                let o2 = codazzi_rhs(&ss, &frame.w.clone(), &frame.phi_e[j].clone()).unwrap();
                assert!(rel_residual(&d2, &o2) < 1e-10, "WPhiE seed {seed} j {j}");
                for l in 0..frame.e.len() {
                    let d3 = frame_codazzi_rhs(&ss, &frame, FrameDisplay::EPhiE, j, l).unwrap();
                    let o3 = codazzi_rhs(&ss, &frame.e[j].clone(), &frame.phi_e[l].clone()).unwrap();
                    assert!(rel_residual(&d3, &o3) < 1e-10, "EPhiE seed {seed} j {j} l {l}: {:e}", rel_residual(&d3, &o3));
                }
            }
        }
    }

    #[test]
    fn we_display_w_component() {
        // ⟨d∇A(W,eⱼ), W⟩ = Σᵢ 4cᵢ(εᵢ+h)⟨eⱼ,V⟩
        for seed in 0..50 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let frame = frame_of(&ss, seed + 7);
            for j in 0..frame.e.len() {
                let d = codazzi_rhs(&ss, &frame.w.clone(), &frame.e[j].clone()).unwrap();
                let got = ss.metric.inner(&d, &frame.w);
                let want: f64 = (0..2)
                    .map(|i| 4.0 * ss.c[i] * (EPS[i] + ss.sd.h) * ss.metric.inner(&frame.e[j], &ss.sd.v))
                    .sum();
                assert!((got - want).abs() < 1e-11, "seed {seed} j {j}");
            }
        }
    }

    #[test]
    fn we_alt_variant_differs_when_v_generic() {
        let mut found = false;
        for seed in 0..50 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let frame = frame_of(&ss, seed + 3);
            let base = frame_codazzi_rhs(&ss, &frame, FrameDisplay::We, 0, 0).unwrap();
            let alt = frame_codazzi_we_alt(&ss, &frame, 0).unwrap();
            if (base - alt).norm() > 1e-6 {
                found = true;
                break;
            }
        }
        assert!(found, "alternate sign reading never differed");
    }

    #[test]
    fn cancellation_and_traces() {
        for seed in 0..200 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let frame = frame_of(&ss, seed + 5);
            for j in 0..frame.e.len() {
                assert!(frame_cancellation(&ss, &frame, j).unwrap() <= 1e-11);
                // skew/symmetric trace terms vanish on their own
                for i in 0..2 {
                    let li = ss.sd.l(i);
                    let lpl = &li * &ss.sd.phi * &li;
                    let tr = ss.metric.inner(&(&lpl * &frame.e[j]), &frame.e[j]);
                    assert!(tr.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn gradient_formula_cases() {
        // V = 0 → 0
        let mut nu = Vector::zeros(4);
        nu[2] = 1.0;
        let ss = synth_with_normal(&nu, 1, 1, 0.3, 0.8).unwrap();
        assert!(mean_curvature_gradient_closed_form(&ss).norm() == 0.0);
        // c₁ = c₂ = c → 8chV
        for seed in 0..20 {
            let mut ss = synth_structural(seed, 1, 1).unwrap();
            ss.c = [0.3, 0.3];
            let got = mean_curvature_gradient_closed_form(&ss);
            let want = &ss.sd.v * (8.0 * 0.3 * ss.sd.h);
            assert!((got - want).norm() < 1e-13);
        }
        // frame components match Σᵢ4cᵢ(εᵢ+h)⟨V,eⱼ⟩
        for seed in 0..50 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let frame = frame_of(&ss, seed + 9);
            let grad = mean_curvature_gradient_closed_form(&ss);
            for j in 0..frame.e.len() {
                let got = ss.metric.inner(&grad, &frame.e[j]);
                let want: f64 = (0..2)
                    .map(|i| 4.0 * ss.c[i] * (EPS[i] + ss.sd.h) * ss.metric.inner(&ss.sd.v, &frame.e[j]))
                    .sum();
                assert!((got - want).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn gauss_expanded_matches_model_oracle() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        for seed in 0..100 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let rv = |rng: &mut ChaCha20Rng| Vector::from_fn(ss.dim, |_, _| rng.gen_range(-1.0f64..1.0));
            let (x, y, z) = (rv(&mut rng), rv(&mut rng), rv(&mut rng));
            let a = DMatrix::zeros(ss.dim, ss.dim);
            let got = gauss_rhs_expanded(&ss, &a, &x, &y, &z).unwrap();
            let oracle = model_tangential_curvature(&ss, &x, &y, &z).unwrap();
            assert!(
                rel_residual(&got, &oracle) < 1e-12,
                "seed {seed}: {:e}",
                rel_residual(&got, &oracle)
            );
        }
    }

    #[test]
    fn gauss_display_trivial_cases() {
        let ss = synth_structural(4, 1, 1).unwrap();
        let mut flat = ss.clone();
        flat.c = [0.0, 0.0];
        let x = Vector::from_vec(vec![1.0, 0.2, -0.4]);
        let y = Vector::from_vec(vec![0.5, -1.0, 0.3]);
        let z = Vector::from_vec(vec![-0.2, 0.8, 1.1]);
        let zero_a = DMatrix::zeros(3, 3);
        assert!(gauss_rhs_display(&flat, &zero_a, &x, &y, &z).unwrap().norm() == 0.0);
        let id_a = DMatrix::identity(3, 3);
        let got = gauss_rhs_display(&flat, &id_a, &x, &y, &z).unwrap();
        let want = wedge_apply(&x, &y, &z, &flat.metric).unwrap();
        assert!((got - want).norm() < 1e-14);
    }

    #[test]
    fn obstruction_system_always_regular() {
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        for _ in 0..100 {
            let h = rng.gen_range(-1.0f64..1.0);
            assert!((obstruction_system_determinant(h) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn frame_projection_identities() {
        for seed in 0..100 {
            let ss = synth_structural(seed, 1, 2).unwrap();
            let frame = frame_of(&ss, seed + 13);
            assert!(frame_projection_residual(&ss, &frame) < 1e-10);
        }
    }

    #[test]
    fn dimension_mismatch_is_usage_error() {
        let ss = synth_structural(1, 1, 1).unwrap();
        let bad = Vector::zeros(5);
        assert!(matches!(
            codazzi_rhs(&ss, &bad, &bad).unwrap_err(),
            GeomError::Usage(_)
        ));
    }
}
