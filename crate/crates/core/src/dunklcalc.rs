//! Dunkl-operator calculus on polynomials: D_ξ, ∇_κ, Δ_κ, Γ, and the finite
//! exponential heat sum used as an exact oracle for the semigroup.
//!
//! The calculus is written over a generic scalar and instantiated on the
//! exact rational path (rational reflection matrices and multiplicities) and
//! on the float path. Roots enter only through a direction vector `dir ∝ α`
//! together with |dir|²: every operator term depends on α either through
//! scale-invariant ratios like ⟨α,ξ⟩/⟨α,x⟩ or through 1/⟨α,x⟩² =
//! (|dir|²/2)/⟨dir,x⟩², both rational in the direction data.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::poly::MultiPoly;
use crate::rootsys::RootSystem;
use crate::scalar::Scalar;

/// Degree and dimension caps for exact operations; sparse rational
/// arithmetic stays desk-scale below these.
pub const EXACT_DEGREE_CAP: u32 = 12;
pub const EXACT_DIM_CAP: usize = 4;

/// Root data in the coefficient scalar of the calculus.
#[derive(Clone, Debug)]
pub struct CalcRoot<T> {
    pub dir: Vec<T>,
    /// |dir|²/2, i.e. the factor converting 1/⟨dir,x⟩² to 1/⟨α,x⟩².
    pub half_norm_sq: T,
    pub kappa: T,
    pub reflection: Mat<T>,
}

#[derive(Clone, Debug)]
pub struct CalcSystem<T> {
    pub dim: usize,
    pub roots: Vec<CalcRoot<T>>,
}

impl CalcSystem<num::BigRational> {
    /// Exact rational calculus; requires every root to carry rational data.
    pub fn exact(rs: &RootSystem) -> Result<Self> {
        if !rs.positive.is_empty() && !rs.is_exact() {
            return Err(Error::InvalidArgument(format!(
                "root system `{}` has no exact rational representation; use the float path",
                rs.name
            )));
        }
        let roots = rs
            .positive
            .iter()
            .map(|r| {
                let e = r.exact.as_ref().unwrap();
                CalcRoot {
                    dir: e.dir.clone(),
                    half_norm_sq: e.norm_sq.clone() / num::BigRational::from_i64(2),
                    kappa: e.kappa.clone(),
                    reflection: e.reflection.clone(),
                }
            })
            .collect();
        Ok(CalcSystem {
            dim: rs.dim,
            roots,
        })
    }
}

impl CalcSystem<f64> {
    /// Float mirror; uses the normalized roots themselves (|α|² = 2).
    pub fn float(rs: &RootSystem) -> Self {
        let roots = rs
            .positive
            .iter()
            .map(|r| CalcRoot {
                dir: r.alpha.clone(),
                half_norm_sq: 1.0,
                kappa: r.kappa,
                reflection: Mat::reflection(&r.alpha),
            })
            .collect();
        CalcSystem {
            dim: rs.dim,
            roots,
        }
    }
}

impl<T: Scalar> CalcSystem<T> {
    fn check_caps(&self, p: &MultiPoly<T>) -> Result<()> {
        if p.dim != self.dim {
            return Err(Error::InvalidArgument(
                "polynomial dimension mismatch".into(),
            ));
        }
        if T::is_exact() && (p.degree() > EXACT_DEGREE_CAP || self.dim > EXACT_DIM_CAP) {
            return Err(Error::InvalidArgument(format!(
                "exact calculus capped at degree {EXACT_DEGREE_CAP}, dimension {EXACT_DIM_CAP}"
            )));
        }
        Ok(())
    }

    pub fn chi(&self) -> T {
        let mut s = T::zero();
        for r in &self.roots {
            s += r.kappa.clone();
        }
        s
    }

    /// (p − p∘r_α)/⟨dir,x⟩, an exact polynomial quotient.
    ///
    /// On the float path `dir` is the normalized root α itself, so this is
    /// the textbook divided difference; on the exact path it is the
    /// dir-normalized form (the √(2/|dir|²) scale cancels everywhere it is
    /// consumed).
    pub fn divided_difference(&self, p: &MultiPoly<T>, root: &CalcRoot<T>) -> Result<MultiPoly<T>> {
        self.check_caps(p)?;
        let diff = p.sub(&p.compose_linear(&root.reflection));
        diff.divide_by_linear(&root.dir)
    }

    /// D_ξ p = ∂_ξ p + Σ_{α∈R₊} κ_α ⟨α,ξ⟩ (p − p∘r_α)/⟨α,x⟩.
    pub fn dunkl_derivative(&self, p: &MultiPoly<T>, xi: &[T]) -> Result<MultiPoly<T>> {
        self.check_caps(p)?;
        let mut out = p.directional(xi);
        for root in &self.roots {
            if root.kappa.is_negligible() {
                continue;
            }
            let mut proj = T::zero();
            for (d, x) in root.dir.iter().zip(xi) {
                proj += d.clone() * x.clone();
            }
            if proj.is_negligible() {
                continue;
            }
            let dd = self.divided_difference(p, root)?;
            out = out.add(&dd.scale(&(root.kappa.clone() * proj)));
        }
        Ok(out)
    }

    pub fn dunkl_partial(&self, p: &MultiPoly<T>, j: usize) -> Result<MultiPoly<T>> {
        let mut xi = vec![T::zero(); self.dim];
        xi[j] = T::one();
        self.dunkl_derivative(p, &xi)
    }

    /// Dunkl gradient ∇_κ p = (D_1 p, …, D_d p).
    pub fn dunkl_gradient(&self, p: &MultiPoly<T>) -> Result<Vec<MultiPoly<T>>> {
        (0..self.dim).map(|j| self.dunkl_partial(p, j)).collect()
    }

    /// Δ_κ p = Σ_j D_j² p, cross-checked against the expanded form
    /// Δp + 2 Σ_α κ_α (⟨α,∇p⟩/⟨α,x⟩ − (p − p∘r_α)/⟨α,x⟩²).
    pub fn dunkl_laplacian(&self, p: &MultiPoly<T>) -> Result<MultiPoly<T>> {
        self.check_caps(p)?;
        let composed = self.dunkl_laplacian_composed(p)?;
        let expanded = self.dunkl_laplacian_expanded(p)?;
        let same = if T::is_exact() {
            composed == expanded
        } else {
            let diff = composed.sub(&expanded);
            let scale = composed
                .terms()
                .map(|(_, c)| c.to_f64().abs())
                .fold(1.0, f64::max);
            let ok = diff.terms().all(|(_, c)| c.to_f64().abs() <= 1e-10 * scale);
            ok
        };
        if !same {
            return Err(Error::Inconsistency(
                "composed and expanded Dunkl Laplacians disagree".into(),
            ));
        }
        Ok(composed)
    }

    pub fn dunkl_laplacian_composed(&self, p: &MultiPoly<T>) -> Result<MultiPoly<T>> {
        let mut out = MultiPoly::zero(self.dim);
        for j in 0..self.dim {
            let dj = self.dunkl_partial(p, j)?;
            out = out.add(&self.dunkl_partial(&dj, j)?);
        }
        Ok(out)
    }

    pub fn dunkl_laplacian_expanded(&self, p: &MultiPoly<T>) -> Result<MultiPoly<T>> {
        // classical Laplacian
        let mut out = MultiPoly::zero(self.dim);
        for j in 0..self.dim {
            out = out.add(&p.partial(j).partial(j));
        }
        for root in &self.roots {
            if root.kappa.is_negligible() {
                continue;
            }
            // ⟨dir,∇p⟩·⟨dir,x⟩ − (|dir|²/2)(p − p∘r), divisible by ⟨dir,x⟩²
            let grad_dir = p.directional(&root.dir);
            let mut linear = MultiPoly::zero(self.dim);
            for (j, c) in root.dir.iter().enumerate() {
                linear = linear.add(&MultiPoly::var(self.dim, j).scale(c));
            }
            let diff = p.sub(&p.compose_linear(&root.reflection));
            let numer = grad_dir
                .mul(&linear)
                .sub(&diff.scale(&root.half_norm_sq));
            let term = numer
                .divide_by_linear(&root.dir)?
                .divide_by_linear(&root.dir)?;
            out = out.add(&term.scale(&(T::from_i64(2) * root.kappa.clone())));
        }
        Ok(out)
    }
}

/// Γ(f,g) split into its gradient and reflection-difference parts.
#[derive(Clone, Debug)]
pub struct GammaValue<T> {
    pub gradient: MultiPoly<T>,
    pub difference: MultiPoly<T>,
    pub total: MultiPoly<T>,
}

impl<T: Scalar> CalcSystem<T> {
    /// Γ(f,g) = ⟨∇f,∇g⟩ + Σ_α κ_α (f−f∘r_α)(g−g∘r_α)/⟨α,x⟩².
    pub fn gamma_form(&self, f: &MultiPoly<T>, g: &MultiPoly<T>) -> Result<GammaValue<T>> {
        self.check_caps(f)?;
        self.check_caps(g)?;
        let mut gradient = MultiPoly::zero(self.dim);
        for j in 0..self.dim {
            gradient = gradient.add(&f.partial(j).mul(&g.partial(j)));
        }
        let mut difference = MultiPoly::zero(self.dim);
        for root in &self.roots {
            if root.kappa.is_negligible() {
                continue;
            }
            let df = f.sub(&f.compose_linear(&root.reflection));
            let dg = g.sub(&g.compose_linear(&root.reflection));
            let term = df
                .mul(&dg)
                .divide_by_linear(&root.dir)?
                .divide_by_linear(&root.dir)?;
            difference =
                difference.add(&term.scale(&(root.kappa.clone() * root.half_norm_sq.clone())));
        }
        let total = gradient.add(&difference);
        Ok(GammaValue {
            gradient,
            difference,
            total,
        })
    }

    /// e^{tΔ_κ} p as the finite sum Σ_m t^m Δ_κ^m p / m!; exact when t is.
    pub fn heat_poly(&self, p: &MultiPoly<T>, t: &T) -> Result<MultiPoly<T>> {
        self.check_caps(p)?;
        if t.to_f64() < 0.0 {
            return Err(Error::InvalidArgument("heat time must be nonnegative".into()));
        }
        let mut out = p.clone();
        let mut iterate = p.clone();
        let mut factor = T::one();
        let mut m = 1i64;
        loop {
            iterate = self.dunkl_laplacian_composed(&iterate)?;
            if iterate.is_zero() {
                break;
            }
            factor = factor * t.clone() / T::from_i64(m);
            out = out.add(&iterate.scale(&factor));
            m += 1;
        }
        Ok(out)
    }
}

/// Reynolds operator: average p∘g over the group elements; the result is
/// exactly G-invariant when the matrices and coefficients are exact.
pub fn reynolds<T: Scalar>(p: &MultiPoly<T>, elements: &[Mat<T>]) -> MultiPoly<T> {
    let mut sum = MultiPoly::zero(p.dim);
    for g in elements {
        sum = sum.add(&p.compose_linear(g));
    }
    sum.scale(&(T::one() / T::from_i64(elements.len() as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::ReflectionGroup;
    use num::BigRational;
    use num_traits::Zero;

    type R = BigRational;
    type RP = MultiPoly<R>;

    fn z2_exact(kappa: &str) -> CalcSystem<R> {
        let rs = RootSystem::preset(&format!("z2^1:kappa={kappa}")).unwrap();
        CalcSystem::exact(&rs).unwrap()
    }

    fn rat(s: &str) -> R {
        R::parse_literal(s).unwrap()
    }

    #[test]
    fn divided_difference_examples() {
        let sys = z2_exact("1");
        let x2 = RP::parse("x1^2", 1).unwrap();
        assert!(sys.divided_difference(&x2, &sys.roots[0]).unwrap().is_zero());
        // exact path, dir = e1: (x −(−x))/x = 2
        let x = RP::parse("x1", 1).unwrap();
        assert_eq!(
            sys.divided_difference(&x, &sys.roots[0]).unwrap(),
            RP::parse("2", 1).unwrap()
        );
        // symmetric polynomial under A1
        let rs = RootSystem::from_str_spec("dim 2\nroot 1 -1 kappa 1\n", "a1".into()).unwrap();
        let sys = CalcSystem::exact(&rs).unwrap();
        let p = RP::parse("x1*x2", 2).unwrap();
        assert!(sys.divided_difference(&p, &sys.roots[0]).unwrap().is_zero());
    }

    #[test]
    fn dunkl_derivative_examples() {
        for kappa in ["0", "1", "1/2", "7/3"] {
            let sys = z2_exact(kappa);
            let k = rat(kappa);
            // D(x) = 1 + 2κ
            let x = RP::parse("x1", 1).unwrap();
            let d = sys.dunkl_partial(&x, 0).unwrap();
            let expect = RP::constant(1, R::from_i64(1) + R::from_i64(2) * k);
            assert_eq!(d, expect, "kappa={kappa}");
            // D(x²) = 2x regardless of κ
            let x2 = RP::parse("x1^2", 1).unwrap();
            assert_eq!(sys.dunkl_partial(&x2, 0).unwrap(), RP::parse("2*x1", 1).unwrap());
        }
    }

    #[test]
    fn laplacian_routes_agree_and_match_hand_value() {
        let sys = z2_exact("5/4");
        let x2 = RP::parse("x1^2", 1).unwrap();
        let lap = sys.dunkl_laplacian(&x2).unwrap();
        // Δ_κ x² = 2(1+2κ)
        assert_eq!(lap, RP::constant(1, rat("2") * (rat("1") + rat("2") * rat("5/4"))));
        // annihilates constants
        let c = RP::parse("42", 1).unwrap();
        assert!(sys.dunkl_laplacian(&c).unwrap().is_zero());
        // κ=0 reduces to the classical Laplacian
        let rs = RootSystem::preset("z2^2:kappa=0,0").unwrap();
        let sys2 = CalcSystem::exact(&rs).unwrap();
        let p = RP::parse("x1^2 + x2^2", 2).unwrap();
        assert_eq!(sys2.dunkl_laplacian(&p).unwrap(), RP::parse("4", 2).unwrap());
    }

    #[test]
    fn gamma_examples() {
        let sys = z2_exact("3/2");
        let x = RP::parse("x1", 1).unwrap();
        let g = sys.gamma_form(&x, &x).unwrap();
        // Γ(x) = 1 + 2κ
        assert_eq!(g.total, RP::constant(1, rat("1") + rat("2") * rat("3/2")));
        assert_eq!(g.gradient, RP::parse("1", 1).unwrap());
        // constants
        let c = RP::parse("7", 1).unwrap();
        assert!(sys.gamma_form(&c, &c).unwrap().total.is_zero());
        // κ=0: Γ(f) = |∇f|²
        let sys0 = z2_exact("0");
        let p = RP::parse("x1^3", 1).unwrap();
        let g0 = sys0.gamma_form(&p, &p).unwrap();
        assert!(g0.difference.is_zero());
        assert_eq!(g0.total, RP::parse("9*x1^4", 1).unwrap());
    }

    #[test]
    fn gamma_defining_identity() {
        // 2Γ(f,g) = Δκ(fg) − fΔκg − gΔκf for arbitrary f,g
        let rs = RootSystem::preset("z2^2:kappa=1,1/2").unwrap();
        let sys = CalcSystem::exact(&rs).unwrap();
        let f = RP::parse("x1^2*x2 - 3*x2", 2).unwrap();
        let g = RP::parse("x1*x2^2 + x1", 2).unwrap();
        let gamma = sys.gamma_form(&f, &g).unwrap();
        let lhs = gamma.total.scale(&R::from_i64(2));
        let rhs = sys
            .dunkl_laplacian(&f.mul(&g))
            .unwrap()
            .sub(&f.mul(&sys.dunkl_laplacian(&g).unwrap()))
            .sub(&g.mul(&sys.dunkl_laplacian(&f).unwrap()));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn heat_poly_examples() {
        let sys = z2_exact("2");
        let x2 = RP::parse("x1^2", 1).unwrap();
        let t = rat("1/3");
        let h = sys.heat_poly(&x2, &t).unwrap();
        // x² + 2(1+2κ)t
        let expect = x2.add(&RP::constant(
            1,
            rat("2") * (rat("1") + rat("2") * rat("2")) * t.clone(),
        ));
        assert_eq!(h, expect);
        // identity at t = 0
        assert_eq!(sys.heat_poly(&x2, &R::zero()).unwrap(), x2);
        // κ=0 harmonic polynomial is heat-invariant
        let sys0 = z2_exact("0");
        let x = RP::parse("x1", 1).unwrap();
        assert_eq!(sys0.heat_poly(&x, &rat("5")).unwrap(), x);
    }

    #[test]
    fn heat_poly_semigroup_law() {
        let rs = RootSystem::preset("z2^2:kappa=1,2").unwrap();
        let sys = CalcSystem::exact(&rs).unwrap();
        let p = RP::parse("x1^4*x2^2 - x1*x2 + 3", 2).unwrap();
        let s = rat("1/2");
        let t = rat("1/5");
        let both = sys
            .heat_poly(&sys.heat_poly(&p, &s).unwrap(), &t)
            .unwrap();
        let once = sys.heat_poly(&p, &(s + t)).unwrap();
        assert_eq!(both, once);
    }

    #[test]
    fn reynolds_makes_invariants() {
        let rs = RootSystem::preset("b:2,kappa=1,1/2").unwrap();
        let group = ReflectionGroup::generate(&rs).unwrap();
        let p = RP::parse("x1^3 + x1*x2", 2).unwrap();
        let q = reynolds(&p, group.exact_elements.as_ref().unwrap());
        for g in group.exact_elements.as_ref().unwrap() {
            assert_eq!(q.compose_linear(g), q);
        }
    }

    #[test]
    fn float_path_mirrors_exact() {
        let rs = RootSystem::preset("z2^2:kappa=1,1/2").unwrap();
        let exact = CalcSystem::exact(&rs).unwrap();
        let float = CalcSystem::float(&rs);
        let p = RP::parse("x1^3*x2 - 2*x2^2", 2).unwrap();
        let pf = p.to_float();
        let le = exact.dunkl_laplacian(&p).unwrap().to_float();
        let lf = float.dunkl_laplacian(&pf).unwrap();
        let diff = le.sub(&lf);
        for (_, c) in diff.terms() {
            assert!(c.abs() < 1e-10);
        }
    }

    #[test]
    fn exact_caps_enforced() {
        let sys = z2_exact("1");
        let big = RP::parse("x1^13", 1).unwrap();
        assert!(sys.dunkl_laplacian(&big).is_err());
    }
}
