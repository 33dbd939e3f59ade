//! The ambient product of two complex space forms: block metric, complex
//! structure `J = (J₁, J₂)`, almost product structure `F = π₁ − π₂`, the
//! auxiliary operators `L̄ᵢ = I + εᵢF`, and the product curvature tensor with
//! its independent block-sum oracle.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{GeomError, Result};
use crate::fd::{self, Gamma};
use crate::linalg::{wedge_apply, Metric, Vector};
use crate::spaceform::{
    self, christoffel_at, complex_structure, metric_at, SpaceFormKind, SpaceFormSpec,
};

pub const EPS: [f64; 2] = [1.0, -1.0];

/// Product configuration; factor 1 coordinates come first in the block layout.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ProductSpec {
    pub factor1: SpaceFormSpec,
    pub factor2: SpaceFormSpec,
}

impl ProductSpec {
    pub fn new(factor1: SpaceFormSpec, factor2: SpaceFormSpec) -> Result<Self> {
        // total real dimension 2(n₁+n₂) ≥ 4 holds since each nᵢ ≥ 1
        Ok(ProductSpec { factor1, factor2 })
    }

    pub fn n_total(&self) -> usize {
        self.factor1.n + self.factor2.n
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n_total()
    }

    pub fn c(&self, i: usize) -> f64 {
        match i {
            0 => self.factor1.c,
            1 => self.factor2.c,
            _ => panic!("factor index out of range"),
        }
    }

    pub fn split(&self, v: &Vector) -> (Vector, Vector) {
        let d1 = self.factor1.real_dim();
        (v.rows(0, d1).into_owned(), v.rows(d1, self.factor2.real_dim()).into_owned())
    }

    pub fn join(&self, v1: &Vector, v2: &Vector) -> Vector {
        let mut out = Vector::zeros(self.real_dim());
        out.rows_mut(0, v1.len()).copy_from(v1);
        out.rows_mut(v1.len(), v2.len()).copy_from(v2);
        out
    }

    pub fn contains(&self, q: &Vector, margin: f64) -> bool {
        let (p1, p2) = self.split(q);
        self.factor1.contains(&p1, margin) && self.factor2.contains(&p2, margin)
    }

    pub fn sample_point<R: Rng>(&self, rng: &mut R) -> Vector {
        let p1 = self.factor1.sample_point(rng);
        let p2 = self.factor2.sample_point(rng);
        self.join(&p1, &p2)
    }

    /// Block-diagonal matrix of F = π₁ − π₂.
    pub fn f_matrix(&self) -> DMatrix<f64> {
        let d = self.real_dim();
        let d1 = self.factor1.real_dim();
        DMatrix::from_fn(d, d, |i, j| {
            if i != j {
                0.0
            } else if i < d1 {
                1.0
            } else {
                -1.0
            }
        })
    }

    pub fn j_matrix(&self) -> DMatrix<f64> {
        let d = self.real_dim();
        let d1 = self.factor1.real_dim();
        let mut j = DMatrix::zeros(d, d);
        j.view_mut((0, 0), (d1, d1))
            .copy_from(&complex_structure(self.factor1.n));
        let d2 = self.factor2.real_dim();
        j.view_mut((d1, d1), (d2, d2))
            .copy_from(&complex_structure(self.factor2.n));
        j
    }
}

/// Pointwise ambient package for the product.
#[derive(Debug, Clone)]
pub struct AmbientStructure {
    pub g: Metric,
    pub j: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub lbar: [DMatrix<f64>; 2],
    pub gamma: Gamma,
}

/// Product metric (block diagonal) at a product point.
pub fn product_metric_at(spec: &ProductSpec, q: &Vector) -> Result<DMatrix<f64>> {
    let (p1, p2) = spec.split(q);
    let g1 = metric_at(&spec.factor1, &p1)?;
    let g2 = metric_at(&spec.factor2, &p2)?;
    let d = spec.real_dim();
    let d1 = spec.factor1.real_dim();
    let mut g = DMatrix::zeros(d, d);
    g.view_mut((0, 0), (d1, d1)).copy_from(&g1);
    g.view_mut((d1, d1), (g2.nrows(), g2.ncols())).copy_from(&g2);
    Ok(g)
}

/// Block Christoffel symbols of the product connection.
pub fn product_christoffel_at(spec: &ProductSpec, q: &Vector, step: f64) -> Result<Gamma> {
    let (p1, p2) = spec.split(q);
    let gm1 = christoffel_at(&spec.factor1, &p1, step)?;
    let gm2 = christoffel_at(&spec.factor2, &p2, step)?;
    let d = spec.real_dim();
    let d1 = spec.factor1.real_dim();
    let mut gamma = vec![DMatrix::zeros(d, d); d];
    for k in 0..d1 {
        gamma[k].view_mut((0, 0), (d1, d1)).copy_from(&gm1[k]);
    }
    let d2 = spec.factor2.real_dim();
    for k in 0..d2 {
        gamma[d1 + k]
            .view_mut((d1, d1), (d2, d2))
            .copy_from(&gm2[k]);
    }
    Ok(gamma)
}

pub fn ambient_structure_at(spec: &ProductSpec, q: &Vector) -> Result<AmbientStructure> {
    let g = Metric::new(product_metric_at(spec, q)?)?;
    let f = spec.f_matrix();
    let d = spec.real_dim();
    let id = DMatrix::identity(d, d);
    let lbar = [&id + &f * EPS[0], &id + &f * EPS[1]];
    Ok(AmbientStructure {
        g,
        j: spec.j_matrix(),
        f,
        lbar,
        gamma: product_christoffel_at(spec, q, fd::DEFAULT_STEP)?,
    })
}

/// Product curvature tensor:
/// `R̄(X,Y)Z = Σᵢ (cᵢ/2)[L̄ᵢX ∧ L̄ᵢY + JL̄ᵢX ∧ JL̄ᵢY + 2⟨L̄ᵢX, JL̄ᵢY⟩J] L̄ᵢZ`.
pub fn curvature_product_formula(
    spec: &ProductSpec,
    amb: &AmbientStructure,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<Vector> {
    let d = spec.real_dim();
    if x.len() != d || y.len() != d || z.len() != d {
        return Err(GeomError::usage("curvature arguments must have dim 2(n1+n2)"));
    }
    let mut out = Vector::zeros(d);
    for i in 0..2 {
        let ci = spec.c(i);
        if ci == 0.0 {
            continue;
        }
        let lx = &amb.lbar[i] * x;
        let ly = &amb.lbar[i] * y;
        let lz = &amb.lbar[i] * z;
        let jlx = &amb.j * &lx;
        let jly = &amb.j * &ly;
        let jlz = &amb.j * &lz;
        let term = wedge_apply(&lx, &ly, &lz, &amb.g)?
            + wedge_apply(&jlx, &jly, &lz, &amb.g)?
            + jlz * (2.0 * amb.g.inner(&lx, &jly));
        out += term * (ci / 2.0);
    }
    Ok(out)
}

/// Independent oracle: factor-wise space-form curvature of the projected
/// components, summed blockwise.
pub fn curvature_block_sum(
    spec: &ProductSpec,
    q: &Vector,
    x: &Vector,
    y: &Vector,
    z: &Vector,
) -> Result<Vector> {
    let d = spec.real_dim();
    if x.len() != d || y.len() != d || z.len() != d {
        return Err(GeomError::usage("curvature arguments must have dim 2(n1+n2)"));
    }
    let (p1, p2) = spec.split(q);
    let (x1, x2) = spec.split(x);
    let (y1, y2) = spec.split(y);
    let (z1, z2) = spec.split(z);
    let r1 = spaceform::curvature_formula(&spec.factor1, &p1, &x1, &y1, &z1)?;
    let r2 = spaceform::curvature_formula(&spec.factor2, &p2, &x2, &y2, &z2)?;
    Ok(spec.join(&r1, &r2))
}

/// Finite-difference Riemann tensor of the block metric; ties the curvature
/// displays to the actual product geometry.
pub fn curvature_product_fd(
    spec: &ProductSpec,
    q: &Vector,
    x: &Vector,
    y: &Vector,
    z: &Vector,
    step: f64,
) -> Result<Vector> {
    if !spec.contains(q, 2.0 * step) {
        return Err(GeomError::domain("product point too close to chart boundary"));
    }
    fd::riemann_fd(
        |p| product_christoffel_at(spec, p, step),
        q,
        x,
        y,
        z,
        step,
    )
}

/// Parse the model-spec grammar `kind(n[,c=value]) x kind(n[,c=value])`,
/// e.g. `cp(1,c=0.0625)xcp(1,c=0.0625)` or `eu(1)xch(2,c=-0.0625)`.
/// Whitespace-insensitive.
pub fn parse_product_spec(s: &str) -> Result<ProductSpec> {
    let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    // split on the 'x' between the two factor specs: it is the one following ')'
    let split_at = compact
        .find(")x")
        .ok_or_else(|| GeomError::usage(format!("cannot split model spec '{s}' into two factors")))?;
    let (left, right) = compact.split_at(split_at + 1);
    let right = &right[1..];
    let f1 = parse_factor(left)?;
    let f2 = parse_factor(right)?;
    ProductSpec::new(f1, f2)
}

pub fn parse_factor(s: &str) -> Result<SpaceFormSpec> {
    let err = || GeomError::usage(format!("malformed factor spec '{s}'"));
    let open = s.find('(').ok_or_else(err)?;
    if !s.ends_with(')') {
        return Err(err());
    }
    let kind = match &s[..open] {
        "eu" => SpaceFormKind::Euclidean,
        "cp" => SpaceFormKind::Projective,
        "ch" => SpaceFormKind::Hyperbolic,
        other => {
            return Err(GeomError::usage(format!(
                "unknown space form kind '{other}' (expected eu, cp, or ch)"
            )))
        }
    };
    let inner = &s[open + 1..s.len() - 1];
    let mut n: Option<usize> = None;
    let mut c: Option<f64> = None;
    for part in inner.split(',') {
        if part.is_empty() {
            continue;
        }
        if let Some(v) = part.strip_prefix("c=") {
            c = Some(v.parse().map_err(|_| err())?);
        } else {
            n = Some(part.parse().map_err(|_| err())?);
        }
    }
    let n = n.ok_or_else(err)?;
    let c = c.unwrap_or(0.0);
    SpaceFormSpec::new(kind, n, c)
}
