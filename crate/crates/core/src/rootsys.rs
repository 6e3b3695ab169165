//! Root systems, reflection groups, orbit distance, and the weight w_κ.
//!
//! A root system is stored through its positive subsystem, each root
//! normalized to |α|² = 2. Systems whose reflection matrices are rational
//! (ℤ₂^d, A_{d−1}, B_d and rational custom systems) additionally carry an
//! exact rational representation used by the exact polynomial calculus: the
//! root direction is kept as a rational vector proportional to α, which is
//! enough because every quantity in the calculus depends on α only through
//! scale-invariant ratios or through |α|² = 2.

use crate::error::{Error, Result};
use crate::linalg::{dist_f64, dot_f64, norm_sq_f64, Mat};
use crate::scalar::Scalar;
use num::BigRational;
use num_traits::Zero;
use std::path::Path;
use std::sync::Arc;

/// Dedup tolerance for group closure over floats (max-entry matrix distance).
pub const GROUP_DEDUP_TOL: f64 = 1e-9;
/// Cap on group closure; the largest intended group is B₄ at 384 elements.
pub const GROUP_ELEMENT_CAP: usize = 10_000;
/// Tolerance for root predicates on float coordinates.
pub const ROOT_TOL: f64 = 1e-9;

/// Exact rational data for a positive root with a rational reflection matrix.
#[derive(Clone, Debug)]
pub struct ExactRoot {
    /// Rational vector proportional to α.
    pub dir: Vec<BigRational>,
    /// |dir|²; the normalization scalar to α is √(2/|dir|²).
    pub norm_sq: BigRational,
    pub kappa: BigRational,
    pub reflection: Mat<BigRational>,
}

#[derive(Clone, Debug)]
pub struct PositiveRoot {
    /// Root vector normalized to |α|² = 2.
    pub alpha: Vec<f64>,
    pub kappa: f64,
    pub exact: Option<ExactRoot>,
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub dim: usize,
    pub positive: Vec<PositiveRoot>,
    pub name: String,
}

impl RootSystem {
    /// Build from positive-root directions (any scale) and multiplicities.
    ///
    /// `dirs` may be rational; rational directions keep an exact
    /// representation alongside the normalized float one.
    pub fn new(
        dim: usize,
        dirs: Vec<(Vec<f64>, Option<Vec<BigRational>>)>,
        kappas: Vec<(f64, Option<BigRational>)>,
        name: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if dirs.len() != kappas.len() {
            return Err(Error::InvalidArgument(
                "one multiplicity per positive root required".into(),
            ));
        }
        let mut positive = Vec::with_capacity(dirs.len());
        for ((dir, exact_dir), (kf, kr)) in dirs.into_iter().zip(kappas) {
            if dir.len() != dim {
                return Err(Error::InvalidArgument("root has wrong dimension".into()));
            }
            let ns = norm_sq_f64(&dir);
            if ns < ROOT_TOL {
                return Err(Error::InvalidArgument("zero root vector".into()));
            }
            if kf < 0.0 {
                return Err(Error::InvalidArgument("multiplicity must be nonnegative".into()));
            }
            let scale = (2.0 / ns).sqrt();
            let alpha: Vec<f64> = dir.iter().map(|c| c * scale).collect();
            let exact = match (exact_dir, kr) {
                (Some(v), Some(k)) => {
                    let mut norm_sq = BigRational::zero();
                    for c in &v {
                        norm_sq += c * c;
                    }
                    let reflection = Mat::reflection(&v);
                    Some(ExactRoot {
                        dir: v,
                        norm_sq,
                        kappa: k,
                        reflection,
                    })
                }
                _ => None,
            };
            positive.push(PositiveRoot {
                alpha,
                kappa: kf,
                exact,
            });
        }
        let rs = RootSystem {
            dim,
            positive,
            name: name.into(),
        };
        rs.validate()?;
        Ok(rs)
    }

    /// Full root list: the positive subsystem and its negatives.
    pub fn roots(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(2 * self.positive.len());
        for r in &self.positive {
            out.push(r.alpha.clone());
            out.push(r.alpha.iter().map(|c| -c).collect());
        }
        out
    }

    fn validate(&self) -> Result<()> {
        let all = self.roots();
        for r in &self.positive {
            let ns = norm_sq_f64(&r.alpha);
            if (ns - 2.0).abs() > ROOT_TOL {
                return Err(Error::InvalidArgument(format!(
                    "root not normalized to |α|² = 2 (got {ns})"
                )));
            }
        }
        // ℝα ∩ R = {α, −α}: no two positive roots parallel.
        for i in 0..self.positive.len() {
            for j in (i + 1)..self.positive.len() {
                let a = &self.positive[i].alpha;
                let b = &self.positive[j].alpha;
                if dot_f64(a, b).abs() > 2.0 - ROOT_TOL {
                    return Err(Error::InvalidArgument(
                        "parallel roots in positive subsystem".into(),
                    ));
                }
            }
        }
        // r_α(R) = R as a set and κ invariance under each generator.
        let kappa_of = |v: &[f64]| -> Option<f64> {
            for r in &self.positive {
                if dist_f64(v, &r.alpha) < ROOT_TOL {
                    return Some(r.kappa);
                }
                let neg: Vec<f64> = r.alpha.iter().map(|c| -c).collect();
                if dist_f64(v, &neg) < ROOT_TOL {
                    return Some(r.kappa);
                }
            }
            None
        };
        for r in &self.positive {
            for beta in &all {
                let image = reflect(&r.alpha, beta)?;
                let kb = kappa_of(beta).ok_or_else(|| {
                    Error::Inconsistency("root lookup failed".into())
                })?;
                match kappa_of(&image) {
                    None => {
                        return Err(Error::InvalidArgument(
                            "root system not closed under its own reflections".into(),
                        ))
                    }
                    Some(ki) if (ki - kb).abs() > ROOT_TOL => {
                        return Err(Error::InvalidArgument(
                            "multiplicity function is not G-invariant".into(),
                        ))
                    }
                    _ => {}
                }
            }
        }
        Ok(())
    }

    /// All positive roots carry exact rational data.
    pub fn is_exact(&self) -> bool {
        !self.positive.is_empty() && self.positive.iter().all(|r| r.exact.is_some())
    }

    pub fn chi(&self) -> f64 {
        self.positive.iter().map(|r| r.kappa).sum()
    }

    pub fn chi_exact(&self) -> Option<BigRational> {
        let mut s = BigRational::zero();
        for r in &self.positive {
            s += &r.exact.as_ref()?.kappa;
        }
        Some(s)
    }

    pub fn d_kappa(&self) -> f64 {
        self.dim as f64 + 2.0 * self.chi()
    }

    /// w(x) = ∏_{α∈R₊} |⟨α,x⟩|^{2κ_α}.
    pub fn weight(&self, x: &[f64]) -> f64 {
        let mut w = 1.0;
        for r in &self.positive {
            if r.kappa == 0.0 {
                continue;
            }
            w *= dot_f64(&r.alpha, x).abs().powf(2.0 * r.kappa);
        }
        w
    }

    /// Parse a preset string:
    /// `trivial:d=<n>`, `z2^<n>[:kappa=<list>]`, `z2^d:d=<n>[,kappa=<list>]`,
    /// `a:<n>[,kappa=<k>]`, `b:<n>[,kappa=<k_short>,<k_long>]`.
    pub fn preset(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (head, rest) = match spec.split_once(':') {
            Some((h, r)) => (h, r),
            None => (spec, ""),
        };
        let mut dim: Option<usize> = None;
        let mut kappas: Vec<(f64, Option<BigRational>)> = Vec::new();
        // `z2^3` carries the dimension in the head.
        let head_lc = head.to_ascii_lowercase();
        let family = if let Some(dstr) = head_lc.strip_prefix("z2^") {
            if dstr != "d" {
                dim = Some(dstr.parse().map_err(|_| bad_preset(spec))?);
            }
            "z2"
        } else {
            head_lc.as_str()
        };
        for part in rest.split(',').filter(|s| !s.is_empty()) {
            if let Some(v) = part.strip_prefix("d=") {
                dim = Some(v.parse().map_err(|_| bad_preset(spec))?);
            } else if let Some(v) = part.strip_prefix("kappa=") {
                kappas.push(parse_kappa(v)?);
            } else if dim.is_none() && family != "z2" {
                // `a:2` / `b:2`: bare rank right after the colon
                dim = Some(part.parse().map_err(|_| bad_preset(spec))?);
            } else {
                // continuation of the kappa list
                kappas.push(parse_kappa(part)?);
            }
        }
        match family {
            "trivial" => {
                let d = dim.ok_or_else(|| bad_preset(spec))?;
                RootSystem::new(d, vec![], vec![], format!("trivial:d={d}"))
            }
            "z2" => {
                let d = dim.ok_or_else(|| bad_preset(spec))?;
                let ks = broadcast_kappas(kappas, d, spec)?;
                let dirs = (0..d)
                    .map(|j| {
                        let mut v = vec![0.0; d];
                        v[j] = 1.0;
                        let mut e = vec![BigRational::zero(); d];
                        e[j] = BigRational::from_i64(1);
                        (v, Some(e))
                    })
                    .collect();
                RootSystem::new(d, dirs, ks, format!("z2^{d}"))
            }
            "a" => {
                let n = dim.ok_or_else(|| bad_preset(spec))?;
                let d = n + 1;
                let k = single_kappa(kappas, spec)?;
                let mut dirs = Vec::new();
                for i in 0..d {
                    for j in (i + 1)..d {
                        let mut v = vec![0.0; d];
                        v[i] = 1.0;
                        v[j] = -1.0;
                        let mut e = vec![BigRational::zero(); d];
                        e[i] = BigRational::from_i64(1);
                        e[j] = BigRational::from_i64(-1);
                        dirs.push((v, Some(e)));
                    }
                }
                let ks = vec![k; dirs.len()];
                RootSystem::new(d, dirs, ks, format!("a:{n}"))
            }
            "b" => {
                let d = dim.ok_or_else(|| bad_preset(spec))?;
                let (k_short, k_long) = match kappas.len() {
                    0 => (
                        (1.0, Some(BigRational::from_i64(1))),
                        (1.0, Some(BigRational::from_i64(1))),
                    ),
                    1 => (kappas[0].clone(), kappas[0].clone()),
                    2 => (kappas[0].clone(), kappas[1].clone()),
                    _ => return Err(bad_preset(spec)),
                };
                let mut dirs = Vec::new();
                let mut ks = Vec::new();
                // short roots ±√2 e_j (after normalization), rational dir e_j
                for j in 0..d {
                    let mut v = vec![0.0; d];
                    v[j] = 1.0;
                    let mut e = vec![BigRational::zero(); d];
                    e[j] = BigRational::from_i64(1);
                    dirs.push((v, Some(e)));
                    ks.push(k_short.clone());
                }
                // long roots e_i ± e_j
                for i in 0..d {
                    for j in (i + 1)..d {
                        for sign in [1i64, -1] {
                            let mut v = vec![0.0; d];
                            v[i] = 1.0;
                            v[j] = sign as f64;
                            let mut e = vec![BigRational::zero(); d];
                            e[i] = BigRational::from_i64(1);
                            e[j] = BigRational::from_i64(sign);
                            dirs.push((v, Some(e)));
                            ks.push(k_long.clone());
                        }
                    }
                }
                RootSystem::new(d, dirs, ks, format!("b:{d}"))
            }
            _ => Err(bad_preset(spec)),
        }
    }

    /// Load a custom system from a text file:
    /// ```text
    /// # comment
    /// dim 2
    /// root 1 -1 kappa 1/2
    /// root 1 1 kappa 1/2
    /// ```
    /// Roots list one representative per ± pair and are rescaled to |α|² = 2.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_str_spec(&text, path.as_ref().display().to_string())
    }

    pub fn from_str_spec(text: &str, name: String) -> Result<Self> {
        let mut dim: Option<usize> = None;
        let mut dirs = Vec::new();
        let mut kappas = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("dim") => {
                    dim = Some(tok.next().and_then(|s| s.parse().ok()).ok_or_else(|| {
                        Error::Config(format!("line {}: bad dim", lineno + 1))
                    })?);
                }
                Some("root") => {
                    let d = dim.ok_or_else(|| {
                        Error::Config(format!("line {}: dim must come before roots", lineno + 1))
                    })?;
                    let toks: Vec<&str> = tok.collect();
                    let kpos = toks.iter().position(|t| *t == "kappa").ok_or_else(|| {
                        Error::Config(format!("line {}: missing kappa", lineno + 1))
                    })?;
                    if kpos != d || toks.len() != d + 2 {
                        return Err(Error::Config(format!(
                            "line {}: expected {} coordinates and one kappa",
                            lineno + 1,
                            d
                        )));
                    }
                    let mut v = Vec::with_capacity(d);
                    let mut e: Option<Vec<BigRational>> = Some(Vec::with_capacity(d));
                    for t in &toks[..d] {
                        let (f, r) = parse_coord(t).map_err(|_| {
                            Error::Config(format!("line {}: bad coordinate {t}", lineno + 1))
                        })?;
                        v.push(f);
                        match (&mut e, r) {
                            (Some(ev), Some(rv)) => ev.push(rv),
                            _ => e = None,
                        }
                    }
                    dirs.push((v, e));
                    kappas.push(parse_kappa(toks[d + 1])?);
                }
                _ => {
                    return Err(Error::Config(format!(
                        "line {}: unrecognized directive",
                        lineno + 1
                    )))
                }
            }
        }
        let d = dim.ok_or_else(|| Error::Config("missing dim".into()))?;
        RootSystem::new(d, dirs, kappas, name)
    }
}

fn bad_preset(spec: &str) -> Error {
    Error::Config(format!("unrecognized root-system preset `{spec}`"))
}

fn broadcast_kappas(
    kappas: Vec<(f64, Option<BigRational>)>,
    d: usize,
    spec: &str,
) -> Result<Vec<(f64, Option<BigRational>)>> {
    match kappas.len() {
        0 => Ok(vec![(1.0, Some(BigRational::from_i64(1))); d]),
        1 => Ok(vec![kappas[0].clone(); d]),
        n if n == d => Ok(kappas),
        _ => Err(bad_preset(spec)),
    }
}

fn single_kappa(
    kappas: Vec<(f64, Option<BigRational>)>,
    spec: &str,
) -> Result<(f64, Option<BigRational>)> {
    match kappas.len() {
        0 => Ok((1.0, Some(BigRational::from_i64(1)))),
        1 => Ok(kappas[0].clone()),
        _ => Err(bad_preset(spec)),
    }
}

/// Parse a multiplicity: rational (`1/2`, `2`) or decimal (`0.5`, kept exact
/// when the decimal is finite).
pub fn parse_kappa(s: &str) -> Result<(f64, Option<BigRational>)> {
    let (f, r) = parse_coord(s)
        .map_err(|_| Error::Config(format!("bad multiplicity literal `{s}`")))?;
    if f < 0.0 {
        return Err(Error::InvalidArgument(
            "multiplicity must be nonnegative".into(),
        ));
    }
    Ok((f, r))
}

/// Parse a coordinate returning both a float and, when representable, an
/// exact rational (covers `3`, `3/2` and finite decimals like `-0.25`).
fn parse_coord(s: &str) -> std::result::Result<(f64, Option<BigRational>), ()> {
    let s = s.trim();
    if let Some(r) = BigRational::parse_literal(s) {
        return Ok((r.to_f64(), Some(r)));
    }
    let f: f64 = s.parse().map_err(|_| ())?;
    // finite decimal -> exact rational
    let rat = if let Some((int, frac)) = s.split_once('.') {
        let digits: String = format!("{}{}", int, frac);
        digits.parse::<num::BigInt>().ok().map(|n| {
            let den = num::BigInt::from(10u32).pow(frac.len() as u32);
            BigRational::new(n, den)
        })
    } else {
        None
    };
    Ok((f, rat))
}

/// r_α x = x − 2 ⟨α,x⟩/|α|² α.
pub fn reflect(alpha: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    let ns = norm_sq_f64(alpha);
    if ns < ROOT_TOL * ROOT_TOL {
        return Err(Error::InvalidArgument("zero root vector".into()));
    }
    let c = 2.0 * dot_f64(alpha, x) / ns;
    Ok(x.iter().zip(alpha).map(|(xi, ai)| xi - c * ai).collect())
}

#[derive(Clone, Debug)]
pub struct ReflectionGroup {
    pub dim: usize,
    pub elements: Vec<Mat<f64>>,
    /// For each element, a word in generator (positive-root) indices.
    pub provenance: Vec<Vec<usize>>,
    /// Rational matrices, present iff the root system is exact.
    pub exact_elements: Option<Vec<Mat<BigRational>>>,
}

impl ReflectionGroup {
    pub fn generate(rs: &RootSystem) -> Result<Self> {
        let gens: Vec<Mat<f64>> = rs
            .positive
            .iter()
            .map(|r| Mat::reflection(&r.alpha))
            .collect();
        let (elements, provenance) = close_group(rs.dim, &gens, GROUP_ELEMENT_CAP, |a, b| {
            a.max_entry_distance(b) < GROUP_DEDUP_TOL
        })?;
        for g in &elements {
            if !g.is_orthogonal(GROUP_DEDUP_TOL) {
                return Err(Error::Inconsistency(
                    "non-orthogonal element in reflection group".into(),
                ));
            }
        }
        let exact_elements = if rs.is_exact() {
            let egens: Vec<Mat<BigRational>> = rs
                .positive
                .iter()
                .map(|r| r.exact.as_ref().unwrap().reflection.clone())
                .collect();
            let (ee, _) = close_group(rs.dim, &egens, GROUP_ELEMENT_CAP, |a, b| a == b)?;
            if ee.len() != elements.len() {
                return Err(Error::Inconsistency(format!(
                    "exact and float group closures disagree: {} vs {}",
                    ee.len(),
                    elements.len()
                )));
            }
            Some(ee)
        } else {
            None
        };
        Ok(ReflectionGroup {
            dim: rs.dim,
            elements,
            provenance,
            exact_elements,
        })
    }

    /// Trivial group {I}; used for κ-free directions.
    pub fn trivial(dim: usize) -> Self {
        ReflectionGroup {
            dim,
            elements: vec![Mat::identity(dim)],
            provenance: vec![vec![]],
            exact_elements: Some(vec![Mat::identity(dim)]),
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Orbit distance ρ(x,y) = min_{g∈G} |x − gy|.
    pub fn rho(&self, x: &[f64], y: &[f64]) -> f64 {
        self.elements
            .iter()
            .map(|g| dist_f64(x, &g.apply(y)))
            .fold(f64::INFINITY, f64::min)
    }

    /// The orbit G(x), deduplicated.
    pub fn orbit(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for g in &self.elements {
            let gx = g.apply(x);
            if !out.iter().any(|p| dist_f64(p, &gx) < GROUP_DEDUP_TOL) {
                out.push(gx);
            }
        }
        out
    }
}

fn close_group<T: Scalar, F>(
    dim: usize,
    gens: &[Mat<T>],
    cap: usize,
    same: F,
) -> Result<(Vec<Mat<T>>, Vec<Vec<usize>>)>
where
    F: Fn(&Mat<T>, &Mat<T>) -> bool,
{
    let mut elements = vec![Mat::identity(dim)];
    let mut words: Vec<Vec<usize>> = vec![vec![]];
    let mut frontier: Vec<usize> = vec![0];
    while let Some(idx) = frontier.pop() {
        let base = elements[idx].clone();
        let word = words[idx].clone();
        for (gi, g) in gens.iter().enumerate() {
            let prod = g.mul(&base);
            if elements.iter().any(|e| same(e, &prod)) {
                continue;
            }
            if elements.len() >= cap {
                return Err(Error::GroupNotFinite { cap });
            }
            let mut w = word.clone();
            w.insert(0, gi);
            elements.push(prod);
            words.push(w);
            frontier.push(elements.len() - 1);
        }
    }
    Ok((elements, words))
}

/// The weight density w_κ with its derived scalars χ and d_κ.
#[derive(Clone, Debug)]
pub struct WeightedDensity {
    pub rs: Arc<RootSystem>,
    pub chi: f64,
    pub d_kappa: f64,
}

impl WeightedDensity {
    pub fn new(rs: Arc<RootSystem>) -> Self {
        let chi = rs.chi();
        let d_kappa = rs.d_kappa();
        WeightedDensity { rs, chi, d_kappa }
    }

    pub fn weight(&self, x: &[f64]) -> f64 {
        self.rs.weight(x)
    }

    pub fn dim(&self) -> usize {
        self.rs.dim
    }
}
