//! Smooth test functions with analytic gradients.
//!
//! Numerical Dunkl operators need the difference quotient
//! (f(x) − f(r_α x))/⟨α,x⟩, which cancels catastrophically near the
//! reflecting hyperplane. Every test function here therefore carries an
//! analytic gradient so the quotient can be replaced by its limit
//! ⟨α,∇f(x)⟩ inside a small collar.

use crate::error::{Error, Result};
use crate::linalg::{dot_f64, norm_sq_f64};
use crate::poly::MultiPoly;
use crate::rootsys::RootSystem;
use statrs::function::gamma::gamma;
use std::sync::Arc;

/// Width of the hyperplane collar, relative to 1 + |x|.
pub const HYPERPLANE_COLLAR: f64 = 1e-6;

type ValueFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type GradFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct SmoothFn {
    pub dim: usize,
    value: Arc<ValueFn>,
    grad: Arc<GradFn>,
}

impl std::fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SmoothFn(dim={})", self.dim)
    }
}

impl SmoothFn {
    pub fn new(
        dim: usize,
        value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        SmoothFn {
            dim,
            value: Arc::new(value),
            grad: Arc::new(grad),
        }
    }

    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    /// p(x)·exp(−|x|²/scale²).
    pub fn poly_gaussian(p: MultiPoly<f64>, scale: f64) -> Self {
        assert!(scale > 0.0);
        let dim = p.dim;
        let grads: Vec<MultiPoly<f64>> = (0..dim).map(|j| p.partial(j)).collect();
        let pv = p.clone();
        let inv_s2 = 1.0 / (scale * scale);
        let value = move |x: &[f64]| pv.eval_f64(x) * (-norm_sq_f64(x) * inv_s2).exp();
        let pg = p;
        let grad = move |x: &[f64]| {
            let e = (-norm_sq_f64(x) * inv_s2).exp();
            let pval = pg.eval_f64(x);
            (0..dim)
                .map(|j| e * (grads[j].eval_f64(x) - 2.0 * x[j] * inv_s2 * pval))
                .collect()
        };
        SmoothFn::new(dim, value, grad)
    }

    /// Cubic bump (1 − |x−c|²/s²)³ supported on the closed ball B(c,s).
    pub fn bump(center: Vec<f64>, scale: f64) -> Self {
        assert!(scale > 0.0);
        let dim = center.len();
        let c = center.clone();
        let inv_s2 = 1.0 / (scale * scale);
        let value = move |x: &[f64]| {
            let u: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * inv_s2;
            if u >= 1.0 {
                0.0
            } else {
                (1.0 - u).powi(3)
            }
        };
        let cg = center;
        let grad = move |x: &[f64]| {
            let u: f64 = x.iter().zip(&cg).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * inv_s2;
            if u >= 1.0 {
                vec![0.0; dim]
            } else {
                let common = -6.0 * (1.0 - u) * (1.0 - u) * inv_s2;
                x.iter().zip(&cg).map(|(a, b)| common * (a - b)).collect()
            }
        };
        SmoothFn::new(dim, value, grad)
    }

    /// Bump normalized to unit Lebesgue mass: approximate identity at
    /// `center` as `width` → 0.
    pub fn spike(center: Vec<f64>, width: f64) -> Self {
        let dim = center.len();
        // ∫_{B(0,1)} (1−|y|²)³ dy = π^{d/2}·3!/Γ(d/2+4)
        let mass_unit = std::f64::consts::PI.powf(dim as f64 / 2.0) * 6.0 / gamma(dim as f64 / 2.0 + 4.0);
        let norm = 1.0 / (mass_unit * width.powi(dim as i32));
        let b = SmoothFn::bump(center, width);
        let bv = b.clone();
        SmoothFn::new(
            dim,
            move |x: &[f64]| norm * bv.value(x),
            move |x: &[f64]| b.gradient(x).into_iter().map(|g| norm * g).collect(),
        )
    }

    /// Parse a polynomial expression and attach a Gaussian window:
    /// `poly_window("x1^2 - 2*x2", 2, 3.0)` is (x₁²−2x₂)e^{−|x|²/9}.
    pub fn poly_window(expr: &str, dim: usize, scale: f64) -> Result<Self> {
        if scale <= 0.0 {
            return Err(Error::InvalidArgument("window scale must be positive".into()));
        }
        let p = MultiPoly::<f64>::parse(expr, dim)?;
        Ok(SmoothFn::poly_gaussian(p, scale))
    }

    /// Guarded difference quotient (f(x) − f(r_α x))/⟨α,x⟩, replaced by its
    /// limit ⟨α,∇f(x)⟩ inside the hyperplane collar.
    pub fn reflection_quotient(&self, x: &[f64], alpha: &[f64]) -> f64 {
        let ax = dot_f64(alpha, x);
        if ax.abs() < HYPERPLANE_COLLAR * (1.0 + norm_sq_f64(x).sqrt()) {
            dot_f64(alpha, &self.gradient(x))
        } else {
            // with |α|² = 2 the reflection is x ↦ x − ⟨α,x⟩α
            let rx: Vec<f64> = x.iter().zip(alpha).map(|(xi, ai)| xi - ax * ai).collect();
            (self.value(x) - self.value(&rx)) / ax
        }
    }

    /// D_ξ f(x) for the rational Dunkl operator attached to `rs`.
    pub fn dunkl_derivative(&self, x: &[f64], xi: &[f64], rs: &RootSystem) -> f64 {
        let mut s = dot_f64(xi, &self.gradient(x));
        for root in &rs.positive {
            if root.kappa == 0.0 {
                continue;
            }
            s += root.kappa * dot_f64(&root.alpha, xi) * self.reflection_quotient(x, &root.alpha);
        }
        s
    }

    pub fn dunkl_gradient(&self, x: &[f64], rs: &RootSystem) -> Vec<f64> {
        let g = self.gradient(x);
        let mut out = g.clone();
        for root in &rs.positive {
            if root.kappa == 0.0 {
                continue;
            }
            let q = root.kappa * self.reflection_quotient(x, &root.alpha);
            for j in 0..self.dim {
                out[j] += q * root.alpha[j];
            }
        }
        out
    }

    /// Carré du champ Γ(f,g)(x) = ⟨∇f,∇g⟩ + Σ_α κ_α·q_α(f)·q_α(g),
    /// with q_α the guarded reflection quotient.
    pub fn gamma_pair(&self, other: &SmoothFn, x: &[f64], rs: &RootSystem) -> f64 {
        let mut s = dot_f64(&self.gradient(x), &other.gradient(x));
        for root in &rs.positive {
            if root.kappa == 0.0 {
                continue;
            }
            s += root.kappa
                * self.reflection_quotient(x, &root.alpha)
                * other.reflection_quotient(x, &root.alpha);
        }
        s
    }

    pub fn gamma(&self, x: &[f64], rs: &RootSystem) -> f64 {
        self.gamma_pair(self, x, rs)
    }
}
