//! Numerical geometry engine for real hypersurfaces in products of two
//! complex space forms, with a verification harness that checks every
//! closed-form curvature identity against an independent oracle
//! (finite differences or a synthesized linear model).
//!
//! Sign conventions (fixed throughout, echoed in every report):
//! wedge `(X∧Y)Z = g(Y,Z)X − g(X,Z)Y`; curvature
//! `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y]Z`; holomorphic sectional
//! curvature `⟨R(X,JX)JX,X⟩` normalized by the plane area; Codazzi operator
//! `d∇A(Y,X) = (∇_X A)Y − (∇_Y A)X`, the tangential part of `R̄(Y,X)ν`.

pub mod error;
pub mod fd;
pub mod hypersurface;
pub mod identity;
pub mod linalg;
pub mod product;
pub mod report;
pub mod spaceform;
pub mod suites;

pub use error::{GeomError, Result};
