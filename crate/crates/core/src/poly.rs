//! Sparse multivariate polynomials over a generic coefficient scalar.
//!
//! The exact path instantiates `MultiPoly<BigRational>`; the float path
//! mirrors it with `MultiPoly<f64>` (coefficients below the chop threshold
//! are dropped on normalization).

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// Exponent multi-index; `terms` never stores a zero coefficient.
pub type Exponents = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiPoly<T> {
    pub dim: usize,
    terms: BTreeMap<Exponents, T>,
}

impl<T: Scalar> MultiPoly<T> {
    pub fn zero(dim: usize) -> Self {
        MultiPoly {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: T) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn var(dim: usize, j: usize) -> Self {
        assert!(j < dim);
        let mut e = vec![0; dim];
        e[j] = 1;
        let mut p = Self::zero(dim);
        p.add_term(e, T::one());
        p
    }

    pub fn monomial(dim: usize, exps: Exponents, c: T) -> Self {
        assert_eq!(exps.len(), dim);
        let mut p = Self::zero(dim);
        p.add_term(exps, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, exps: Exponents, c: T) {
        if c.is_negligible() {
            return;
        }
        let entry = self.terms.entry(exps);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_negligible() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// ∂/∂x_j.
    pub fn partial(&self, j: usize) -> Self {
        assert!(j < self.dim);
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[j] -= 1;
            out.add_term(ne, c.clone() * T::from_i64(e[j] as i64));
        }
        out
    }

    /// Directional derivative ∂_ξ = Σ ξ_j ∂_j.
    pub fn directional(&self, xi: &[T]) -> Self {
        assert_eq!(xi.len(), self.dim);
        let mut out = Self::zero(self.dim);
        for (j, c) in xi.iter().enumerate() {
            if c.is_negligible() {
                continue;
            }
            out = out.add(&self.partial(j).scale(c));
        }
        out
    }

    pub fn eval(&self, x: &[T]) -> T {
        assert_eq!(x.len(), self.dim);
        let mut acc = T::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (j, &ej) in e.iter().enumerate() {
                for _ in 0..ej {
                    t = t * x[j].clone();
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in &self.terms {
            let mut t = c.to_f64();
            for (j, &ej) in e.iter().enumerate() {
                t *= x[j].powi(ej as i32);
            }
            acc += t;
        }
        acc
    }

    pub fn to_float(&self) -> MultiPoly<f64> {
        let mut out = MultiPoly::zero(self.dim);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.to_f64());
        }
        out
    }

    /// p(Mx): substitute x_i ↦ Σ_j M_ij x_j.
    pub fn compose_linear(&self, m: &Mat<T>) -> Self {
        assert_eq!(m.dim, self.dim);
        let d = self.dim;
        // linear images of each variable
        let images: Vec<MultiPoly<T>> = (0..d)
            .map(|i| {
                let mut p = Self::zero(d);
                for j in 0..d {
                    let c = m.at(i, j).clone();
                    if !c.is_negligible() {
                        let mut e = vec![0; d];
                        e[j] = 1;
                        p.add_term(e, c);
                    }
                }
                p
            })
            .collect();
        // cached powers of the images
        let max_e: Vec<u32> = (0..d)
            .map(|j| self.terms.keys().map(|e| e[j]).max().unwrap_or(0))
            .collect();
        let mut powers: Vec<Vec<MultiPoly<T>>> = Vec::with_capacity(d);
        for j in 0..d {
            let mut ps = vec![Self::constant(d, T::one())];
            for k in 1..=max_e[j] as usize {
                let next = ps[k - 1].mul(&images[j]);
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = Self::zero(d);
        for (e, c) in &self.terms {
            let mut t = Self::constant(d, c.clone());
            for (j, &ej) in e.iter().enumerate() {
                if ej > 0 {
                    t = t.mul(&powers[j][ej as usize]);
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Exact division by the linear form ℓ(x) = Σ c_j x_j.
    ///
    /// Fails with an internal-consistency error if the remainder is nonzero
    /// (exact path) or above `1e-10` relative to the input scale (float path).
    pub fn divide_by_linear(&self, form: &[T]) -> Result<Self> {
        assert_eq!(form.len(), self.dim);
        let j0 = form
            .iter()
            .position(|c| !c.is_negligible())
            .ok_or_else(|| Error::InvalidArgument("zero linear form".into()))?;
        let pivot = form[j0].clone();
        let input_scale = self
            .terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max);
        let mut rem = self.clone();
        let mut quo = Self::zero(self.dim);
        loop {
            // leading term under lex order with x_{j0} major
            let lead = rem
                .terms
                .iter()
                .max_by(|(ea, _), (eb, _)| {
                    ea[j0].cmp(&eb[j0]).then_with(|| ea.cmp(eb))
                })
                .map(|(e, c)| (e.clone(), c.clone()));
            let (e, c) = match lead {
                None => break,
                Some((e, _)) if e[j0] == 0 => break,
                Some(x) => x,
            };
            let mut qe = e.clone();
            qe[j0] -= 1;
            let qc = c / pivot.clone();
            // rem -= q_term * form
            for (j, fj) in form.iter().enumerate() {
                if fj.is_negligible() {
                    continue;
                }
                let mut te = qe.clone();
                te[j] += 1;
                rem.add_term(te, -(qc.clone() * fj.clone()));
            }
            quo.add_term(qe, qc);
        }
        let rem_scale = rem
            .terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max);
        let ok = if T::is_exact() {
            rem.is_zero()
        } else {
            rem_scale <= 1e-10 * input_scale.max(1.0)
        };
        if !ok {
            return Err(Error::Inconsistency(format!(
                "nonzero remainder (scale {rem_scale:.3e}) in exact division by a linear form"
            )));
        }
        Ok(quo)
    }

    /// Parse the literal format `3/2*x1^2*x2 - x3`.
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Ok(Self::zero(dim));
        }
        let mut out = Self::zero(dim);
        let mut term = String::new();
        let mut sign = 1i64;
        let chars: Vec<char> = compact.chars().collect();
        let mut i = 0;
        let flush = |out: &mut Self, term: &str, sign: i64| -> Result<()> {
            if term.is_empty() {
                if sign != 1 {
                    return Err(Error::Config("dangling sign in polynomial literal".into()));
                }
                return Ok(());
            }
            let mut coeff = T::from_i64(sign);
            let mut exps = vec![0u32; dim];
            for factor in term.split('*') {
                if factor.is_empty() {
                    return Err(Error::Config("empty factor in polynomial literal".into()));
                }
                if let Some(rest) = factor.strip_prefix('x') {
                    let (vs, es) = match rest.split_once('^') {
                        Some((v, e)) => (v, Some(e)),
                        None => (rest, None),
                    };
                    let vi: usize = vs
                        .parse()
                        .map_err(|_| Error::Config(format!("bad variable `{factor}`")))?;
                    if vi == 0 || vi > dim {
                        return Err(Error::Config(format!(
                            "variable x{vi} out of range for dimension {dim}"
                        )));
                    }
                    let e: u32 = match es {
                        Some(e) => e
                            .parse()
                            .map_err(|_| Error::Config(format!("bad exponent in `{factor}`")))?,
                        None => 1,
                    };
                    exps[vi - 1] += e;
                } else {
                    let c = T::parse_literal(factor).ok_or_else(|| {
                        Error::Config(format!("bad coefficient `{factor}`"))
                    })?;
                    coeff = coeff * c;
                }
            }
            out.add_term(exps, coeff);
            Ok(())
        };
        while i < chars.len() {
            match chars[i] {
                '+' if i > 0 => {
                    flush(&mut out, &term, sign)?;
                    term.clear();
                    sign = 1;
                }
                '-' if i > 0 && !matches!(chars[i - 1], '*' | '^' | '/') => {
                    flush(&mut out, &term, sign)?;
                    term.clear();
                    sign = -1;
                }
                '+' => {
                    sign = 1;
                }
                '-' => {
                    sign = -1;
                }
                c => term.push(c),
            }
            i += 1;
        }
        flush(&mut out, &term, sign)?;
        Ok(out)
    }
}

impl<T: Scalar> fmt::Display for MultiPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{:?}", c)?;
            for (j, &ej) in e.iter().enumerate() {
                if ej == 1 {
                    write!(f, "*x{}", j + 1)?;
                } else if ej > 1 {
                    write!(f, "*x{}^{}", j + 1, ej)?;
                }
            }
        }
        Ok(())
    }
}

/// Random polynomial with small integer coefficients; used by the property
/// and verification suites.
pub fn random_poly<T: Scalar, R: rand::Rng>(
    dim: usize,
    max_degree: u32,
    n_terms: usize,
    rng: &mut R,
) -> MultiPoly<T> {
    let mut p = MultiPoly::zero(dim);
    for _ in 0..n_terms {
        let mut exps = vec![0u32; dim];
        let deg = rng.gen_range(0..=max_degree);
        for _ in 0..deg {
            let j = rng.gen_range(0..dim);
            exps[j] += 1;
        }
        let num = rng.gen_range(-9i64..=9);
        let den = rng.gen_range(1i64..=4);
        p.add_term(exps, T::from_ratio(num, den));
    }
    p
}
