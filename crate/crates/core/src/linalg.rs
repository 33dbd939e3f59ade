//! Fixed-small-dimension real linear algebra with a supplied metric.
//!
//! Everything here is metric-aware: inner products, the wedge operator
//! `(X ∧ Y)Z = g(Y,Z)X − g(X,Z)Y`, Gram–Schmidt orthonormalization, and a
//! g-Frobenius distance between endomorphisms. The wedge sign convention is
//! fixed globally; see `conventions()` in the report module.

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};

pub type Vector = DVector<f64>;
pub type Endomorphism = DMatrix<f64>;

const SYMMETRY_TOL: f64 = 1e-12;
const GS_PIVOT_TOL: f64 = 1e-10;

/// Symmetric positive definite metric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl Metric {
    /// Validates symmetry (1e-12, relative to the largest entry) and positive
    /// definiteness (Cholesky factorization must succeed).
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(GeomError::usage("metric matrix must be square"));
        }
        let scale = entries.amax().max(1.0);
        let asym = (&entries - entries.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(GeomError::usage(format!(
                "metric matrix not symmetric (asymmetry {asym:.3e})"
            )));
        }
        if !entries.iter().all(|x| x.is_finite()) {
            return Err(GeomError::usage("metric matrix has non-finite entries"));
        }
        let chol = nalgebra::Cholesky::new(entries.clone())
            .ok_or_else(|| GeomError::degeneracy("metric matrix not positive definite"))?;
        let inverse = chol.inverse();
        Ok(Metric { entries, inverse })
    }

    pub fn identity(dim: usize) -> Self {
        Metric {
            entries: DMatrix::identity(dim, dim),
            inverse: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// g(x, y)
    pub fn inner(&self, x: &Vector, y: &Vector) -> f64 {
        (x.transpose() * &self.entries * y)[(0, 0)]
    }

    pub fn norm(&self, x: &Vector) -> f64 {
        self.inner(x, x).max(0.0).sqrt()
    }
}

fn check_dims(g: &Metric, vs: &[&Vector]) -> Result<()> {
    for v in vs {
        if v.len() != g.dim() {
            return Err(GeomError::usage(format!(
                "dimension mismatch: vector has dim {}, metric has dim {}",
                v.len(),
                g.dim()
            )));
        }
    }
    Ok(())
}

/// `(X ∧ Y)Z = g(Y,Z) X − g(X,Z) Y`.
pub fn wedge_apply(x: &Vector, y: &Vector, z: &Vector, g: &Metric) -> Result<Vector> {
    check_dims(g, &[x, y, z])?;
    Ok(x * g.inner(y, z) - y * g.inner(x, z))
}

/// Modified Gram–Schmidt with respect to `g`. The first output vector is a
/// positive multiple of the first input vector.
pub fn gram_schmidt(basis: &[Vector], g: &Metric) -> Result<Vec<Vector>> {
    let refs: Vec<&Vector> = basis.iter().collect();
    check_dims(g, &refs)?;
    let mut out: Vec<Vector> = Vec::with_capacity(basis.len());
    for v in basis {
        let input_norm = g.norm(v);
        let mut w = v.clone();
        for u in &out {
            w -= u * g.inner(u, &w);
        }
        let pivot = g.norm(&w);
        if pivot < GS_PIVOT_TOL * input_norm.max(1e-300) {
            return Err(GeomError::degeneracy(format!(
                "near-dependent basis vector (pivot {pivot:.3e})"
            )));
        }
        out.push(w / pivot);
    }
    Ok(out)
}

/// g-Frobenius distance between endomorphisms:
/// `sqrt(tr(g⁻¹ (P−Q)ᵀ g (P−Q)))`. Zero iff P = Q.
pub fn op_distance(p: &Endomorphism, q: &Endomorphism, g: &Metric) -> Result<f64> {
    if p.nrows() != g.dim() || p.shape() != q.shape() || p.nrows() != p.ncols() {
        return Err(GeomError::usage("operator dimensions must match the metric"));
    }
    let m = p - q;
    let sq = g.inverse() * m.transpose() * g.matrix() * &m;
    Ok(sq.trace().max(0.0).sqrt())
}

/// Relative residual between two vectors: `‖a − b‖ / max(‖a‖, ‖b‖, 1)`.
pub fn rel_residual(a: &Vector, b: &Vector) -> f64 {
    let denom = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() / denom
}
