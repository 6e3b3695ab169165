//! The weighted measure μ_κ = w_κ·Lebesgue: adaptive Gauss–Legendre
//! integration with the weight folded into the integrand, ball volumes,
//! doubling probes, and the integration-by-parts residual.
//!
//! Error accounting is a two-level refinement difference per accepted box,
//! summed; tolerances elsewhere in the crate are stated relative to this
//! estimate. Summation is compensated and runs in a fixed order so results
//! are bit-reproducible run to run.

use crate::error::{Error, Result};
use crate::linalg::dist_f64;
use crate::rootsys::WeightedDensity;
use crate::testfn::SmoothFn;
use rand::Rng;
use rand::SeedableRng;
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

#[derive(Clone, Debug)]
pub enum Scheme {
    /// Tensor Gauss–Legendre on adaptively bisected boxes.
    GaussLegendre { order: usize },
    /// Plain Monte Carlo fallback (d ≥ 4) with a reported 1σ interval.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub scheme: Scheme,
    pub max_depth: usize,
    /// Relative refinement tolerance per box.
    pub tol: f64,
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid {
            scheme: Scheme::GaussLegendre { order: 16 },
            max_depth: 36,
            tol: 1e-10,
        }
    }
}

impl QuadratureGrid {
    pub fn with_tol(tol: f64) -> Self {
        QuadratureGrid {
            tol,
            ..Default::default()
        }
    }

    /// Coarser settings for sweep-heavy suites.
    pub fn sweep() -> Self {
        QuadratureGrid {
            scheme: Scheme::GaussLegendre { order: 12 },
            max_depth: 24,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Domain {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    /// Full space for integrands dominated by a Gaussian envelope centered
    /// at `center` with standard-length `sigma`; truncated to the box where
    /// the envelope exceeds ~1e-16 of its peak.
    FullSpace { center: Vec<f64>, sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegralResult {
    pub value: f64,
    pub error: f64,
}

impl IntegralResult {
    pub fn combine(self, other: IntegralResult) -> IntegralResult {
        IntegralResult {
            value: self.value + other.value,
            error: self.error + other.error,
        }
    }
}

/// Gauss–Legendre nodes and weights on [−1,1], cached per order.
pub fn gl_nodes(order: usize) -> std::sync::Arc<Vec<(f64, f64)>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<Vec<(f64, f64)>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(order)
        .or_insert_with(|| std::sync::Arc::new(compute_gl_nodes(order)))
        .clone()
}

fn compute_gl_nodes(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 2);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        // Newton iteration from the Chebyshev initial guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_and_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    out
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Compensated (Neumaier) accumulator.
#[derive(Clone, Copy, Default)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

struct BoxIntegrator<'a> {
    f: &'a dyn Fn(&[f64]) -> f64,
    order: usize,
    tol: f64,
    max_depth: usize,
    value: Accumulator,
    error: Accumulator,
    failure: Option<Error>,
}

impl<'a> BoxIntegrator<'a> {
    fn gl_box(&mut self, lo: &[f64], hi: &[f64]) -> f64 {
        let d = lo.len();
        let nodes = gl_nodes(self.order);
        let mut acc = Accumulator::default();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        loop {
            let mut w = 1.0;
            for j in 0..d {
                let (t, wj) = nodes[idx[j]];
                x[j] = 0.5 * (lo[j] + hi[j]) + 0.5 * (hi[j] - lo[j]) * t;
                w *= 0.5 * (hi[j] - lo[j]) * wj;
            }
            let v = (self.f)(&x);
            if !v.is_finite() && self.failure.is_none() {
                self.failure = Some(Error::Evaluation {
                    node: x.clone(),
                    message: "non-finite integrand value".into(),
                });
            }
            acc.add(w * v);
            // advance the tensor index
            let mut j = 0;
            loop {
                if j == d {
                    return acc.total();
                }
                idx[j] += 1;
                if idx[j] < nodes.len() {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }

    fn adaptive(&mut self, lo: &[f64], hi: &[f64], coarse: f64, depth: usize, scale: f64) {
        if self.failure.is_some() {
            return;
        }
        // two-level difference: coarse value vs sum over bisected children
        let d = lo.len();
        let mut children_sum = 0.0;
        let mut children: Vec<(Vec<f64>, Vec<f64>, f64)> = Vec::with_capacity(1 << d);
        let mut mids = vec![0.0; d];
        for j in 0..d {
            mids[j] = 0.5 * (lo[j] + hi[j]);
        }
        for mask in 0..(1usize << d) {
            let mut clo = lo.to_vec();
            let mut chi = hi.to_vec();
            for j in 0..d {
                if mask & (1 << j) == 0 {
                    chi[j] = mids[j];
                } else {
                    clo[j] = mids[j];
                }
            }
            let v = self.gl_box(&clo, &chi);
            children_sum += v;
            children.push((clo, chi, v));
        }
        let diff = (children_sum - coarse).abs();
        if diff <= self.tol * (children_sum.abs() + scale) || depth >= self.max_depth {
            for (_, _, v) in &children {
                self.value.add(*v);
            }
            self.error.add(diff);
            return;
        }
        for (clo, chi, v) in children {
            self.adaptive(&clo, &chi, v, depth + 1, scale);
        }
    }
}

/// ∫ f dμ_κ over `domain`; the weight w_κ is applied internally.
pub fn integrate(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    domain: &Domain,
    grid: &QuadratureGrid,
    density: &WeightedDensity,
) -> Result<IntegralResult> {
    let weighted = move |x: &[f64]| f(x) * density.weight(x);
    match domain {
        Domain::Box { lo, hi } => integrate_box_raw(&weighted, lo, hi, grid),
        Domain::Ball { center, radius } => {
            if *radius <= 0.0 {
                return Err(Error::InvalidArgument("ball radius must be positive".into()));
            }
            integrate_ball_raw(&weighted, center, *radius, grid)
        }
        Domain::FullSpace { center, sigma } => {
            if *sigma <= 0.0 {
                return Err(Error::InvalidArgument("window scale must be positive".into()));
            }
            // envelope below 1e-16 of peak outside ±8.6σ; widen slightly for
            // polynomial weight growth and fold the tail into the error bar
            let half = 10.0 * sigma;
            let lo: Vec<f64> = center.iter().map(|c| c - half).collect();
            let hi: Vec<f64> = center.iter().map(|c| c + half).collect();
            let mut r = integrate_box_raw(&weighted, &lo, &hi, grid)?;
            r.error += 1e-13 * r.value.abs();
            Ok(r)
        }
    }
}

fn integrate_box_raw(
    f: &dyn Fn(&[f64]) -> f64,
    lo: &[f64],
    hi: &[f64],
    grid: &QuadratureGrid,
) -> Result<IntegralResult> {
    match grid.scheme {
        Scheme::GaussLegendre { order } => {
            let mut it = BoxIntegrator {
                f,
                order,
                tol: grid.tol,
                max_depth: grid.max_depth,
                value: Accumulator::default(),
                error: Accumulator::default(),
                failure: None,
            };
            // pre-split at coordinate hyperplanes the box straddles; the
            // common Z2 weights are non-smooth exactly there
            let mut boxes = vec![(lo.to_vec(), hi.to_vec())];
            for j in 0..lo.len() {
                let mut next = Vec::new();
                for (blo, bhi) in boxes {
                    if blo[j] < 0.0 && bhi[j] > 0.0 {
                        let mut m1 = bhi.clone();
                        m1[j] = 0.0;
                        let mut m2 = blo.clone();
                        m2[j] = 0.0;
                        next.push((blo, m1));
                        next.push((m2, bhi));
                    } else {
                        next.push((blo, bhi));
                    }
                }
                boxes = next;
            }
            let mut scale = 0.0f64;
            for (blo, bhi) in &boxes {
                let coarse = it.gl_box(blo, bhi);
                scale = scale.max(coarse.abs());
            }
            let scale = scale.max(f64::MIN_POSITIVE);
            for (blo, bhi) in &boxes {
                let coarse = it.gl_box(blo, bhi);
                it.adaptive(blo, bhi, coarse, 0, scale);
            }
            if let Some(e) = it.failure {
                return Err(e);
            }
            Ok(IntegralResult {
                value: it.value.total(),
                error: it.error.total().abs(),
            })
        }
        Scheme::MonteCarlo { samples, seed } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = lo.len();
            let vol: f64 = (0..d).map(|j| hi[j] - lo[j]).product();
            let mut sum = Accumulator::default();
            let mut sumsq = Accumulator::default();
            let mut x = vec![0.0; d];
            for _ in 0..samples {
                for j in 0..d {
                    x[j] = rng.gen_range(lo[j]..hi[j]);
                }
                let v = f(&x);
                if !v.is_finite() {
                    return Err(Error::Evaluation {
                        node: x.clone(),
                        message: "non-finite integrand value".into(),
                    });
                }
                sum.add(v);
                sumsq.add(v * v);
            }
            let n = samples as f64;
            let mean = sum.total() / n;
            let var = (sumsq.total() / n - mean * mean).max(0.0);
            Ok(IntegralResult {
                value: vol * mean,
                error: vol * (var / n).sqrt(),
            })
        }
    }
}

fn integrate_ball_raw(
    f: &dyn Fn(&[f64]) -> f64,
    center: &[f64],
    radius: f64,
    grid: &QuadratureGrid,
) -> Result<IntegralResult> {
    let d = center.len();
    match d {
        1 => integrate_box_raw(f, &[center[0] - radius], &[center[0] + radius], grid),
        2 => {
            // polar transform around the center
            let c = center.to_vec();
            let g = move |u: &[f64]| {
                let (r, th) = (u[0], u[1]);
                let x = [c[0] + r * th.cos(), c[1] + r * th.sin()];
                f(&x) * r
            };
            integrate_box_raw(&g, &[0.0, 0.0], &[radius, 2.0 * std::f64::consts::PI], grid)
        }
        3 => {
            let c = center.to_vec();
            let g = move |u: &[f64]| {
                let (r, th, ph) = (u[0], u[1], u[2]);
                let x = [
                    c[0] + r * ph.sin() * th.cos(),
                    c[1] + r * ph.sin() * th.sin(),
                    c[2] + r * ph.cos(),
                ];
                f(&x) * r * r * ph.sin()
            };
            integrate_box_raw(
                &g,
                &[0.0, 0.0, 0.0],
                &[radius, 2.0 * std::f64::consts::PI, std::f64::consts::PI],
                grid,
            )
        }
        _ => {
            // Monte Carlo fallback over the bounding box with ball indicator
            let (samples, seed) = match grid.scheme {
                Scheme::MonteCarlo { samples, seed } => (samples, seed),
                _ => (400_000, 0),
            };
            let c = center.to_vec();
            let ind = move |x: &[f64]| {
                if dist_f64(x, &c) < radius {
                    f(x)
                } else {
                    0.0
                }
            };
            let lo: Vec<f64> = center.iter().map(|ci| ci - radius).collect();
            let hi: Vec<f64> = center.iter().map(|ci| ci + radius).collect();
            integrate_box_raw(
                &ind,
                &lo,
                &hi,
                &QuadratureGrid {
                    scheme: Scheme::MonteCarlo { samples, seed },
                    ..grid.clone()
                },
            )
        }
    }
}

#[derive(Clone, Debug)]
pub struct BallVolumeResult {
    pub center: Vec<f64>,
    pub radius: f64,
    pub value: f64,
    pub error: f64,
}

/// μ_κ(B(x,r)).
pub fn ball_volume(
    x: &[f64],
    r: f64,
    density: &WeightedDensity,
    grid: &QuadratureGrid,
) -> Result<BallVolumeResult> {
    if r <= 0.0 {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    let one = |_: &[f64]| 1.0;
    let res = integrate(
        &one,
        &Domain::Ball {
            center: x.to_vec(),
            radius: r,
        },
        grid,
        density,
    )?;
    Ok(BallVolumeResult {
        center: x.to_vec(),
        radius: r,
        value: res.value,
        error: res.error,
    })
}

#[derive(Clone, Debug)]
pub struct DoublingProbe {
    pub ratio: f64,
    /// log μ(B(x,R))/μ(B(x,r)) divided by log(R/r).
    pub slope: f64,
    pub small: BallVolumeResult,
    pub large: BallVolumeResult,
}

/// Volume-comparison probe for 0 < r ≤ R.
pub fn doubling_probe(
    x: &[f64],
    r: f64,
    big_r: f64,
    density: &WeightedDensity,
    grid: &QuadratureGrid,
) -> Result<DoublingProbe> {
    if !(0.0 < r && r <= big_r) {
        return Err(Error::InvalidArgument("need 0 < r <= R".into()));
    }
    let small = ball_volume(x, r, density, grid)?;
    let large = ball_volume(x, big_r, density, grid)?;
    let ratio = large.value / small.value;
    let slope = if big_r > r {
        ratio.ln() / (big_r / r).ln()
    } else {
        f64::NAN
    };
    Ok(DoublingProbe {
        ratio,
        slope,
        small,
        large,
    })
}

/// |∫ v·D_ξu dμ + ∫ u·D_ξv dμ| over a box covering supp v.
///
/// Both Dunkl derivatives are evaluated through [`SmoothFn::dunkl_derivative`]
/// (analytic gradients, guarded difference quotients near hyperplanes).
pub fn integration_by_parts_residual(
    u: &SmoothFn,
    v: &SmoothFn,
    xi: &[f64],
    density: &WeightedDensity,
    domain: &Domain,
    grid: &QuadratureGrid,
) -> Result<(f64, f64)> {
    let rs = &density.rs;
    let f1 = move |x: &[f64]| v.value(x) * u.dunkl_derivative(x, xi, rs);
    let f2 = move |x: &[f64]| u.value(x) * v.dunkl_derivative(x, xi, rs);
    let i1 = integrate(&f1, domain, grid, density)?;
    let i2 = integrate(&f2, domain, grid, density)?;
    let scale = i1.value.abs().max(i2.value.abs()).max(1e-30);
    Ok(((i1.value + i2.value).abs(), scale))
}
