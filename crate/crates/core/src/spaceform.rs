//! Chart models of the complex space forms: flat complex space, the
//! projective model in a single inhomogeneous chart, and the hyperbolic
//! unit-ball model. Each provides the metric, the chart complex structure,
//! Christoffel symbols, and two independent curvature evaluators (the
//! closed-form space-form tensor and a finite-difference Riemann tensor).

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{GeomError, Result};
use crate::fd::{self, Gamma};
use crate::linalg::{wedge_apply, Metric, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceFormKind {
    Euclidean,
    Projective,
    Hyperbolic,
}

/// A complex space form of complex dimension `n` and holomorphic sectional
/// curvature `16c`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpaceFormSpec {
    pub kind: SpaceFormKind,
    pub n: usize,
    pub c: f64,
}

impl SpaceFormSpec {
    pub fn new(kind: SpaceFormKind, n: usize, c: f64) -> Result<Self> {
        if n < 1 {
            return Err(GeomError::usage("complex dimension must be >= 1"));
        }
        let ok = match kind {
            SpaceFormKind::Euclidean => c == 0.0,
            SpaceFormKind::Projective => c > 0.0,
            SpaceFormKind::Hyperbolic => c < 0.0,
        };
        if !ok {
            return Err(GeomError::usage(format!(
                "curvature parameter c = {c} inconsistent with kind {kind:?}"
            )));
        }
        Ok(SpaceFormSpec { kind, n, c })
    }

    /// Real chart dimension `2n`.
    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    /// Is `p` inside the chart domain, with room for a stencil of `margin`?
    pub fn contains(&self, coords: &Vector, margin: f64) -> bool {
        if coords.len() != self.real_dim() || !coords.iter().all(|x| x.is_finite()) {
            return false;
        }
        match self.kind {
            SpaceFormKind::Hyperbolic => coords.norm() < 1.0 - margin,
            _ => true,
        }
    }

    fn check_point(&self, coords: &Vector, margin: f64) -> Result<()> {
        if !self.contains(coords, margin) {
            return Err(GeomError::domain(format!(
                "point outside chart domain of {:?} (margin {margin:.1e})",
                self.kind
            )));
        }
        Ok(())
    }

    /// Draw a chart point from the model's sampling region: a bounded box for
    /// the projective chart, the 0.8-ball for the hyperbolic model.
    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vector {
        let d = self.real_dim();
        match self.kind {
            SpaceFormKind::Hyperbolic => loop {
                let v = Vector::from_fn(d, |_, _| rng.gen_range(-0.8..0.8));
                if v.norm() <= 0.8 {
                    return v;
                }
            },
            _ => Vector::from_fn(d, |_, _| rng.gen_range(-2.0..2.0)),
        }
    }
}

/// Metric, complex structure, and Christoffel symbols at a chart point.
#[derive(Debug, Clone)]
pub struct FactorStructure {
    pub g: Metric,
    pub j: DMatrix<f64>,
    pub gamma: Gamma,
}

/// Chart multiplication by i in real coordinates `(x₁,y₁,…,xₙ,yₙ)`:
/// block-diagonal rotation `[[0,-1],[1,0]]` per complex coordinate.
pub fn complex_structure(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for a in 0..n {
        j[(2 * a, 2 * a + 1)] = -1.0;
        j[(2 * a + 1, 2 * a)] = 1.0;
    }
    j
}

/// Hermitian chart metric `h_{ab̄}` of the reference models with holomorphic
/// sectional curvature ±4, scaled by `1/(4|c|)`, expressed as a real
/// `2n × 2n` matrix.
pub fn metric_at(spec: &SpaceFormSpec, coords: &Vector) -> Result<DMatrix<f64>> {
    spec.check_point(coords, 0.0)?;
    let n = spec.n;
    let d = 2 * n;
    if spec.kind == SpaceFormKind::Euclidean {
        return Ok(DMatrix::identity(d, d));
    }
    let z: Vec<Complex64> = (0..n)
        .map(|a| Complex64::new(coords[2 * a], coords[2 * a + 1]))
        .collect();
    let r2: f64 = z.iter().map(|w| w.norm_sqr()).sum();
    let scale = 1.0 / (4.0 * spec.c.abs());
    // h_{ab̄} = δ_{ab}/(1 ± r²) ∓ z̄_a z_b/(1 ± r²)², sign per model
    let (sigma, outer_sign) = match spec.kind {
        SpaceFormKind::Projective => (1.0 + r2, -1.0),
        SpaceFormKind::Hyperbolic => (1.0 - r2, 1.0),
        SpaceFormKind::Euclidean => unreachable!(),
    };
    let mut g = DMatrix::zeros(d, d);
    for a in 0..n {
        for b in 0..n {
            let diag = if a == b {
                Complex64::new(1.0 / sigma, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            let h = scale * (diag + outer_sign * z[a].conj() * z[b] / (sigma * sigma));
            // real components: g(∂x_a,∂x_b) = Re h, g(∂x_a,∂y_b) = Im h,
            // g(∂y_a,∂x_b) = −Im h, g(∂y_a,∂y_b) = Re h
            g[(2 * a, 2 * b)] = h.re;
            g[(2 * a, 2 * b + 1)] = h.im;
            g[(2 * a + 1, 2 * b)] = -h.im;
            g[(2 * a + 1, 2 * b + 1)] = h.re;
        }
    }
    // Hermitian symmetry of h makes g symmetric; clean roundoff
    let g = (&g + g.transpose()) * 0.5;
    Ok(g)
}

/// ∂_i g at a chart point: closed-form for n = 1 (conformal factor),
/// finite differences with Richardson for n ≥ 2.
fn metric_derivs(spec: &SpaceFormSpec, coords: &Vector, step: f64) -> Result<Vec<DMatrix<f64>>> {
    let d = spec.real_dim();
    if spec.kind == SpaceFormKind::Euclidean {
        return Ok(vec![DMatrix::zeros(d, d); d]);
    }
    if spec.n == 1 {
        // g = λ I₂ with λ = s/σ², σ = 1 ± r²; ∂_i λ = ∓ 4 s p_i / σ³
        let s = 1.0 / (4.0 * spec.c.abs());
        let sign = if spec.kind == SpaceFormKind::Projective {
            1.0
        } else {
            -1.0
        };
        let r2 = coords.norm_squared();
        let sigma = 1.0 + sign * r2;
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let dlam = -4.0 * s * sign * coords[i] / (sigma * sigma * sigma);
            out.push(DMatrix::identity(d, d) * dlam);
        }
        Ok(out)
    } else {
        spec.check_point(coords, 2.0 * step)?;
        let mut out = Vec::with_capacity(d);
        for i in 0..d {
            let mut dir = Vector::zeros(d);
            dir[i] = 1.0;
            let dg = fd::deriv_matrix(|t| metric_at(spec, &(coords + &dir * t)), step)?;
            out.push(dg);
        }
        Ok(out)
    }
}

/// Christoffel symbols `Γ^k_{ij} = ½ g^{kl}(∂_i g_{jl} + ∂_j g_{il} − ∂_l g_{ij})`.
pub fn christoffel_at(spec: &SpaceFormSpec, coords: &Vector, step: f64) -> Result<Gamma> {
    let d = spec.real_dim();
    let g = metric_at(spec, coords)?;
    let ginv = g
        .clone()
        .cholesky()
        .ok_or_else(|| GeomError::degeneracy("chart metric not positive definite"))?
        .inverse();
    let dg = metric_derivs(spec, coords, step)?;
    let mut gamma = vec![DMatrix::zeros(d, d); d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma[k][(i, j)] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// Full pointwise package: metric, chart complex structure, Christoffels.
pub fn factor_structure_at(spec: &SpaceFormSpec, coords: &Vector) -> Result<FactorStructure> {
    let g = Metric::new(metric_at(spec, coords)?)?;
    Ok(FactorStructure {
        g,
        j: complex_structure(spec.n),
        gamma: christoffel_at(spec, coords, fd::DEFAULT_STEP)?,
    })
}

/// Closed-form space-form curvature tensor:
/// `R(X,Y)Z = 4c (X∧Y + JX∧JY + 2⟨X,JY⟩ J) Z`.
pub fn curvature_formula(
    spec: &SpaceFormSpec,
    coords: &Vector,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<Vector> {
    let d = spec.real_dim();
    if x.len() != d || y.len() != d || z.len() != d {
        return Err(GeomError::usage("curvature arguments must have dim 2n"));
    }
    let g = Metric::new(metric_at(spec, coords)?)?;
    let j = complex_structure(spec.n);
    let jx = &j * x;
    let jy = &j * y;
    let jz = &j * z;
    let term = wedge_apply(x, y, z, &g)?
        + wedge_apply(&jx, &jy, z, &g)?
        + jz * (2.0 * g.inner(x, &jy));
    Ok(term * (4.0 * spec.c))
}

fn check_step(step: f64) -> Result<()> {
    if !(fd::MIN_STEP..=fd::MAX_STEP).contains(&step) {
        return Err(GeomError::usage(format!(
            "fd step {step:.1e} outside [{:.0e}, {:.0e}]",
            fd::MIN_STEP,
            fd::MAX_STEP
        )));
    }
    Ok(())
}

/// Finite-difference Riemann tensor built from the Christoffel field; the
/// independent oracle for `curvature_formula`.
pub fn curvature_fd(
    spec: &SpaceFormSpec,
    coords: &Vector,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    step: f64,
) -> Result<Vector> {
    check_step(step)?;
    spec.check_point(coords, 2.0 * step)?;
    fd::riemann_fd(
        |q| christoffel_at(spec, q, step),
        coords,
        x,
        y,
        z,
        step,
    )
}

/// Max over coordinate directions X and basis vectors Y of
/// `‖∇_X(JY) − J ∇_X Y‖` computed with the Christoffel symbols. Zero for a
/// Kähler chart structure.
pub fn kahler_residual(spec: &SpaceFormSpec, coords: &Vector, step: f64) -> Result<f64> {
    check_step(step)?;
    spec.check_point(coords, 2.0 * step)?;
    let gamma = christoffel_at(spec, coords, step)?;
    let j = complex_structure(spec.n);
    let d = spec.real_dim();
    let mut worst: f64 = 0.0;
    for i in 0..d {
        // C_i[(k,m)] = Γ^k_{im}; J is coordinate-constant, so the covariant
        // derivative mismatch is the commutator [C_i, J]
        let mut ci = DMatrix::zeros(d, d);
        for k in 0..d {
            for m in 0..d {
                ci[(k, m)] = gamma[k][(i, m)];
            }
        }
        let comm = &ci * &j - &j * &ci;
        worst = worst.max(comm.amax());
    }
    Ok(worst)
}

/// Holomorphic sectional curvature of the plane {X, JX}:
/// `K = ⟨R(X,JX)JX, X⟩ / (|X|²|JX|² − ⟨X,JX⟩²)`, the numerator ordering that
/// makes the curved models come out at `16c` under this module's sign
/// conventions.
pub fn hol_sec_curvature(spec: &SpaceFormSpec, coords: &Vector, x: &Vector) -> Result<f64> {
    if x.norm() < 1e-12 {
        return Err(GeomError::degeneracy("direction vector too small"));
    }
    let g = Metric::new(metric_at(spec, coords)?)?;
    let j = complex_structure(spec.n);
    let jx = &j * x;
    let r = curvature_formula(spec, coords, x, &jx, &jx)?;
    let num = g.inner(&r, x);
    let den = g.inner(x, x) * g.inner(&jx, &jx) - g.inner(x, &jx).powi(2);
    Ok(num / den)
}
