//! Computational Dunkl harmonic analysis.
//!
//! Reflection groups and root systems, exact Dunkl-operator calculus on
//! rational polynomials, the weighted measure μ_κ with its quadrature engine,
//! explicit ℤ₂^d Dunkl heat kernels, Littlewood–Paley–Stein square functions,
//! Calderón–Zygmund decomposition, and verification suites that measure and
//! assert the inequalities tying all of it together.

pub mod czdecomp;
pub mod dunklcalc;
pub mod error;
pub mod heatkernel;
pub mod linalg;
pub mod measure;
pub mod poly;
pub mod report;
pub mod rootsys;
pub mod scalar;
pub mod special;
pub mod squarefns;
pub mod testfn;
pub mod verifier;

pub use error::{Error, Result};

/// Floating scalar used by the numerical side of the crate.
pub type Real = f64;
/// Exact scalar used by the rational calculus.
pub type Rational = num::BigRational;
/// Polynomial on the exact path.
pub type RatPoly = poly::MultiPoly<Rational>;
/// Polynomial on the float path.
pub type FloatPoly = poly::MultiPoly<Real>;
/// Point in ℝ^d.
pub type Point = Vec<Real>;
