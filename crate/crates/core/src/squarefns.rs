//! Vertical and horizontal Littlewood–Paley square functions for the Dunkl
//! heat semigroup, with superlevel-set measures for weak-type profiles.
//!
//! The time integral ∫₀^∞ … dt is evaluated on a logarithmic Gauss grid
//! over a finite window; the contribution of the last decade is reported as
//! a tail estimate so truncation is visible, never silent.

use crate::error::{Error, Result};
use crate::heatkernel::HeatKernel;
use crate::linalg::dot_f64;
use crate::measure::{gl_nodes, integrate, Accumulator, Domain, IntegralResult, QuadratureGrid};
use crate::rootsys::WeightedDensity;
use crate::testfn::SmoothFn;

/// Logarithmic Gauss quadrature in time.
#[derive(Clone, Debug)]
pub struct TimeQuadrature {
    pub t_min: f64,
    pub t_max: f64,
    pub nodes_per_decade: usize,
}

impl Default for TimeQuadrature {
    fn default() -> Self {
        TimeQuadrature {
            t_min: 1e-6,
            t_max: 1e4,
            nodes_per_decade: 16,
        }
    }
}

impl TimeQuadrature {
    pub fn new(t_min: f64, t_max: f64, nodes_per_decade: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || nodes_per_decade < 2 {
            return Err(Error::InvalidArgument(format!(
                "bad time window [{t_min}, {t_max}] x {nodes_per_decade}"
            )));
        }
        Ok(TimeQuadrature {
            t_min,
            t_max,
            nodes_per_decade,
        })
    }

    /// Nodes and weights such that Σ w·F(t) ≈ ∫ F(t) dt over the window;
    /// one Gauss panel per decade in log t.
    pub fn nodes(&self) -> Vec<(f64, f64)> {
        let u_lo = self.t_min.ln();
        let u_hi = self.t_max.ln();
        let decade = std::f64::consts::LN_10;
        let n_panels = ((u_hi - u_lo) / decade).ceil().max(1.0) as usize;
        let gl = gl_nodes(self.nodes_per_decade);
        let mut out = Vec::with_capacity(n_panels * self.nodes_per_decade);
        for p in 0..n_panels {
            let a = u_lo + (u_hi - u_lo) * p as f64 / n_panels as f64;
            let b = u_lo + (u_hi - u_lo) * (p + 1) as f64 / n_panels as f64;
            for &(xi, wi) in gl.iter() {
                let u = 0.5 * (a + b) + 0.5 * (b - a) * xi;
                let t = u.exp();
                out.push((t, 0.5 * (b - a) * wi * t));
            }
        }
        out
    }
}

/// Which quadratic form of u(·,t) enters the vertical square function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GradientMode {
    /// Carré du champ Γ(u) (gradient part + reflection-difference part).
    Gamma,
    /// |∇_κ u|², the full Dunkl gradient.
    DunklGradient,
    /// |∇u|², the classical gradient part only.
    Gradient,
}

/// Initial data for the semigroup flow u(·,t) = P_t f.
#[derive(Clone, Debug)]
pub enum InitialData {
    /// Generic smooth data; `reach` bounds the support radius (or effective
    /// decay radius) used to size quadrature boxes.
    Smooth { f: SmoothFn, reach: f64 },
    /// f = h_s(center, ·): the flow is the closed-form kernel at time t + s.
    Kernel { s: f64, center: Vec<f64> },
}

/// The pieces of u(·,t) = P_t f needed by the square functions at one x.
#[derive(Clone, Debug)]
pub struct AppliedJet {
    pub value: f64,
    pub gradient: Vec<f64>,
    /// (u − u∘σ_j)/x_j per coordinate, regularized.
    pub quotients: Vec<f64>,
    pub laplacian: f64,
}

impl AppliedJet {
    /// Γ(u)(x) for the Z₂^d system with per-axis multiplicities `kappas`.
    pub fn gamma(&self, kappas: &[f64]) -> f64 {
        let mut s = dot_f64(&self.gradient, &self.gradient);
        for (j, &k) in kappas.iter().enumerate() {
            s += 0.5 * k * self.quotients[j] * self.quotients[j];
        }
        s
    }

    /// |∇_κ u|²(x): D_j u = ∂_j u + κ_j·(u − u∘σ_j)/x_j on the axis system.
    pub fn dunkl_gradient_sq(&self, kappas: &[f64]) -> f64 {
        kappas
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let d = self.gradient[j] + k * self.quotients[j];
                d * d
            })
            .sum()
    }

    pub fn mode_value(&self, mode: GradientMode, kappas: &[f64]) -> f64 {
        match mode {
            GradientMode::Gamma => self.gamma(kappas),
            GradientMode::DunklGradient => self.dunkl_gradient_sq(kappas),
            GradientMode::Gradient => dot_f64(&self.gradient, &self.gradient),
        }
    }
}

/// Evaluate u(·,t) = P_t f and its first-order data at x.
pub fn applied_jet(
    kernel: &HeatKernel,
    data: &InitialData,
    t: f64,
    x: &[f64],
    grid: &QuadratureGrid,
) -> Result<AppliedJet> {
    match data {
        InitialData::Kernel { s, center } => {
            let j = kernel.jet(t + s, x, center)?;
            Ok(AppliedJet {
                value: j.value,
                gradient: j.gradient,
                quotients: j.quotients,
                laplacian: j.laplacian,
            })
        }
        InitialData::Smooth { f, reach } => {
            let d = kernel.dim();
            let kmax = kernel.kappas.iter().cloned().fold(0.0, f64::max);
            let spread = (16.0 + 6.0 * kmax) * t.sqrt().max(t) + reach;
            let lo: Vec<f64> = x.iter().map(|xi| -(xi.abs() + spread)).collect();
            let hi: Vec<f64> = x.iter().map(|xi| xi.abs() + spread).collect();
            let dom = Domain::Box { lo, hi };
            let density = WeightedDensity::new(kernel.rs.clone());
            let comp = |pick: &(dyn Fn(&crate::heatkernel::KernelJet) -> f64 + Sync)| -> Result<f64> {
                let g = |y: &[f64]| match kernel.jet(t, x, y) {
                    Ok(j) => pick(&j) * f.value(y),
                    Err(_) => f64::NAN,
                };
                Ok(integrate(&g, &dom, grid, &density)?.value)
            };
            let value = comp(&|j| j.value)?;
            let laplacian = comp(&|j| j.laplacian)?;
            let mut gradient = Vec::with_capacity(d);
            let mut quotients = Vec::with_capacity(d);
            for jdx in 0..d {
                gradient.push(comp(&|j| j.gradient[jdx])?);
                quotients.push(comp(&|j| j.quotients[jdx])?);
            }
            Ok(AppliedJet {
                value,
                gradient,
                quotients,
                laplacian,
            })
        }
    }
}

/// A pointwise square-function sample g(f)(x)².
#[derive(Clone, Copy, Debug)]
pub struct SquareSample {
    pub square: f64,
    /// Contribution of the last decade of the time window: a truncation
    /// indicator, not an error bound.
    pub tail_estimate: f64,
}

impl SquareSample {
    pub fn value(&self) -> f64 {
        self.square.max(0.0).sqrt()
    }
}

/// Vertical square function
/// g(f)(x)² = ∫₀^∞ Q(P_t f)(x) dt with Q per [`GradientMode`].
pub fn vertical_square_function(
    kernel: &HeatKernel,
    data: &InitialData,
    x: &[f64],
    mode: GradientMode,
    tq: &TimeQuadrature,
    grid: &QuadratureGrid,
) -> Result<SquareSample> {
    accumulate(kernel, data, x, tq, grid, &|t, jet: &AppliedJet| {
        let _ = t;
        jet.mode_value(mode, &kernel.kappas)
    })
}

/// Horizontal square function
/// g(f)(x)² = ∫₀^∞ t·|∂_t P_t f(x)|² dt.
pub fn horizontal_square_function(
    kernel: &HeatKernel,
    data: &InitialData,
    x: &[f64],
    tq: &TimeQuadrature,
    grid: &QuadratureGrid,
) -> Result<SquareSample> {
    accumulate(kernel, data, x, tq, grid, &|t, jet: &AppliedJet| {
        t * jet.laplacian * jet.laplacian
    })
}

fn accumulate(
    kernel: &HeatKernel,
    data: &InitialData,
    x: &[f64],
    tq: &TimeQuadrature,
    grid: &QuadratureGrid,
    integrand: &dyn Fn(f64, &AppliedJet) -> f64,
) -> Result<SquareSample> {
    let nodes = tq.nodes();
    let mut total = Accumulator::default();
    let mut tail = Accumulator::default();
    let last_decade = tq.t_max / 10.0;
    for &(t, w) in &nodes {
        let jet = applied_jet(kernel, data, t, x, grid)?;
        let v = integrand(t, &jet);
        if !v.is_finite() {
            return Err(Error::Evaluation {
                node: x.to_vec(),
                message: format!("non-finite square-function integrand at t={t}"),
            });
        }
        total.add(w * v);
        if t >= last_decade {
            tail.add(w * v);
        }
    }
    Ok(SquareSample {
        square: total.total(),
        tail_estimate: tail.total(),
    })
}

/// Inner/outer bracketing of μ{x ∈ box : g(x) > λ} on a uniform cell grid.
#[derive(Clone, Debug)]
pub struct SuperlevelMeasure {
    pub inner: f64,
    pub outer: f64,
    /// Set when the bracket is too wide (outer − inner > 20% of outer) to
    /// trust the level-set measure at this resolution.
    pub resolution_warning: bool,
}

pub fn superlevel_measure(
    g: &dyn Fn(&[f64]) -> Result<f64>,
    lambda: f64,
    lo: &[f64],
    hi: &[f64],
    cells_per_dim: usize,
    density: &WeightedDensity,
    grid: &QuadratureGrid,
) -> Result<SuperlevelMeasure> {
    let d = lo.len();
    if lambda <= 0.0 || cells_per_dim == 0 {
        return Err(Error::InvalidArgument(
            "superlevel_measure needs lambda > 0 and at least one cell".into(),
        ));
    }
    let mut inner = Accumulator::default();
    let mut outer = Accumulator::default();
    let mut idx = vec![0usize; d];
    loop {
        let mut clo = vec![0.0; d];
        let mut chi = vec![0.0; d];
        for j in 0..d {
            let w = (hi[j] - lo[j]) / cells_per_dim as f64;
            clo[j] = lo[j] + idx[j] as f64 * w;
            chi[j] = clo[j] + w;
        }
        // sample g at the center and all corners of the cell
        let mut above = 0usize;
        let mut samples = 0usize;
        let center: Vec<f64> = (0..d).map(|j| 0.5 * (clo[j] + chi[j])).collect();
        for mask in 0..(1usize << d) + 1 {
            let p: Vec<f64> = if mask == 1 << d {
                center.clone()
            } else {
                (0..d)
                    .map(|j| if mask & (1 << j) != 0 { chi[j] } else { clo[j] })
                    .collect()
            };
            samples += 1;
            if g(&p)? > lambda {
                above += 1;
            }
        }
        if above > 0 {
            let cell_mu = integrate(
                &|_: &[f64]| 1.0,
                &Domain::Box {
                    lo: clo.clone(),
                    hi: chi.clone(),
                },
                grid,
                density,
            )?
            .value;
            outer.add(cell_mu);
            if above == samples {
                inner.add(cell_mu);
            }
        }
        // advance
        let mut j = 0;
        loop {
            if j == d {
                let inner = inner.total();
                let outer = outer.total();
                let resolution_warning = outer > 0.0 && (outer - inner) > 0.2 * outer;
                return Ok(SuperlevelMeasure {
                    inner,
                    outer,
                    resolution_warning,
                });
            }
            idx[j] += 1;
            if idx[j] < cells_per_dim {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// ∫ g(f)²(x) dμ(x) over a box, for the L² energy identities.
pub fn square_function_energy(
    kernel: &HeatKernel,
    data: &InitialData,
    mode: Option<GradientMode>,
    half_width: f64,
    tq: &TimeQuadrature,
    outer_grid: &QuadratureGrid,
    inner_grid: &QuadratureGrid,
) -> Result<IntegralResult> {
    let d = kernel.dim();
    let density = WeightedDensity::new(kernel.rs.clone());
    let f = |x: &[f64]| -> f64 {
        let sample = match mode {
            Some(m) => vertical_square_function(kernel, data, x, m, tq, inner_grid),
            None => horizontal_square_function(kernel, data, x, tq, inner_grid),
        };
        match sample {
            Ok(s) => s.square,
            Err(_) => f64::NAN,
        }
    };
    integrate(
        &f,
        &Domain::Box {
            lo: vec![-half_width; d],
            hi: vec![half_width; d],
        },
        outer_grid,
        &density,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::RootSystem;
    use std::sync::Arc;

    fn kernel(preset: &str) -> HeatKernel {
        HeatKernel::new(Arc::new(RootSystem::preset(preset).unwrap())).unwrap()
    }

    #[test]
    fn time_quadrature_matches_closed_forms() {
        let tq = TimeQuadrature::default();
        let nodes = tq.nodes();
        // ∫ e^{−t} dt over the window
        let s: f64 = nodes.iter().map(|&(t, w)| w * (-t).exp()).sum();
        let expect = (-1e-6f64).exp() - (-1e4f64).exp();
        assert!((s - expect).abs() < 1e-12, "{s} vs {expect}");
        // ∫ t^{0.3} dt over the window
        let s: f64 = nodes.iter().map(|&(t, w)| w * t.powf(0.3)).sum();
        let expect = (1e4f64.powf(1.3) - 1e-6f64.powf(1.3)) / 1.3;
        assert!((s - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn energy_identity_vertical_gamma() {
        // ∫ g_Γ(f)² dμ = ½‖f‖²_{L²(μ)} with f = h_s(c,·),
        // ‖f‖² = h_{2s}(c,c) by the semigroup law
        let k = kernel("z2^1:kappa=0.7");
        let s = 0.5;
        let data = InitialData::Kernel {
            s,
            center: vec![0.3],
        };
        let norm_sq = k.value(2.0 * s, &[0.3], &[0.3]).unwrap();
        let energy = square_function_energy(
            &k,
            &data,
            Some(GradientMode::Gamma),
            40.0,
            &TimeQuadrature::default(),
            &QuadratureGrid {
                scheme: crate::measure::Scheme::GaussLegendre { order: 12 },
                max_depth: 14,
                tol: 1e-6,
            },
            &QuadratureGrid::sweep(),
        )
        .unwrap();
        let expect = 0.5 * norm_sq;
        assert!(
            (energy.value - expect).abs() < 0.01 * expect,
            "{} vs {expect}",
            energy.value
        );
    }

    #[test]
    fn energy_identity_horizontal() {
        // ∫ g_t(f)² dμ = ¼‖f‖²
        let k = kernel("z2^1:kappa=0.7");
        let s = 0.5;
        let data = InitialData::Kernel {
            s,
            center: vec![0.3],
        };
        let norm_sq = k.value(2.0 * s, &[0.3], &[0.3]).unwrap();
        let energy = square_function_energy(
            &k,
            &data,
            None,
            40.0,
            &TimeQuadrature::default(),
            &QuadratureGrid {
                scheme: crate::measure::Scheme::GaussLegendre { order: 12 },
                max_depth: 14,
                tol: 1e-6,
            },
            &QuadratureGrid::sweep(),
        )
        .unwrap();
        let expect = 0.25 * norm_sq;
        assert!(
            (energy.value - expect).abs() < 0.01 * expect,
            "{} vs {expect}",
            energy.value
        );
    }

    #[test]
    fn pointwise_domination_between_modes() {
        // |∇u|² ≤ Γ(u) and |∇_κu|² ≤ (1+2χ)Γ(u) pointwise, hence the same
        // ordering holds for the square functions
        let k = kernel("z2^1:kappa=0.9");
        let chi = 0.9;
        let data = InitialData::Kernel {
            s: 0.2,
            center: vec![0.7],
        };
        let tq = TimeQuadrature::new(1e-4, 1e2, 10).unwrap();
        let grid = QuadratureGrid::sweep();
        for x in [[0.0], [0.4], [-1.3], [2.0]] {
            let g_grad =
                vertical_square_function(&k, &data, &x, GradientMode::Gradient, &tq, &grid)
                    .unwrap()
                    .square;
            let g_gamma = vertical_square_function(&k, &data, &x, GradientMode::Gamma, &tq, &grid)
                .unwrap()
                .square;
            let g_dunkl =
                vertical_square_function(&k, &data, &x, GradientMode::DunklGradient, &tq, &grid)
                    .unwrap()
                    .square;
            assert!(g_grad <= g_gamma * (1.0 + 1e-12));
            assert!(g_dunkl <= (1.0 + 2.0 * chi) * g_gamma * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sublinearity_of_vertical_square_function() {
        let k = kernel("z2^1:kappa=1/2");
        let f1 = SmoothFn::bump(vec![0.5], 0.8);
        let f2 = SmoothFn::bump(vec![-0.7], 0.6);
        let fa = f1.clone();
        let fb = f2.clone();
        let fc = f1.clone();
        let fd = f2.clone();
        let sum = SmoothFn::new(
            1,
            move |x: &[f64]| fa.value(x) + fb.value(x),
            move |x: &[f64]| {
                let g1 = fc.gradient(x);
                let g2 = fd.gradient(x);
                g1.iter().zip(&g2).map(|(a, b)| a + b).collect()
            },
        );
        let tq = TimeQuadrature::new(1e-3, 1e1, 8).unwrap();
        let grid = QuadratureGrid::sweep();
        let d1 = InitialData::Smooth {
            f: SmoothFn::bump(vec![0.5], 0.8),
            reach: 1.5,
        };
        let d2 = InitialData::Smooth { f: f2, reach: 1.5 };
        let ds = InitialData::Smooth { f: sum, reach: 1.5 };
        for x in [[0.2], [-0.4]] {
            let ga = vertical_square_function(&k, &d1, &x, GradientMode::Gamma, &tq, &grid)
                .unwrap()
                .value();
            let gb = vertical_square_function(&k, &d2, &x, GradientMode::Gamma, &tq, &grid)
                .unwrap()
                .value();
            let gs = vertical_square_function(&k, &ds, &x, GradientMode::Gamma, &tq, &grid)
                .unwrap()
                .value();
            assert!(gs <= ga + gb + 1e-9, "{gs} vs {ga}+{gb}");
        }
    }

    #[test]
    fn monotone_in_time_window() {
        let k = kernel("z2^1:kappa=0.7");
        let data = InitialData::Kernel {
            s: 0.3,
            center: vec![0.1],
        };
        let grid = QuadratureGrid::sweep();
        let short = TimeQuadrature::new(1e-4, 1e1, 8).unwrap();
        let long = TimeQuadrature::new(1e-4, 1e3, 8).unwrap();
        let a = vertical_square_function(&k, &data, &[0.6], GradientMode::Gamma, &short, &grid)
            .unwrap()
            .square;
        let b = vertical_square_function(&k, &data, &[0.6], GradientMode::Gamma, &long, &grid)
            .unwrap()
            .square;
        assert!(b >= a - 1e-15);
        assert!(b - a >= 0.0);
    }

    #[test]
    fn superlevel_bracketing_on_known_function() {
        // g(x) = e^{−x²}: {g > λ} = (−√(−ln λ), √(−ln λ)), Lebesgue density
        let density = WeightedDensity::new(Arc::new(RootSystem::preset("trivial:d=1").unwrap()));
        let g = |x: &[f64]| -> Result<f64> { Ok((-x[0] * x[0]).exp()) };
        let lambda = 0.5f64;
        let exact = 2.0 * (-(lambda.ln())).sqrt();
        let m = superlevel_measure(
            &g,
            lambda,
            &[-3.0],
            &[3.0],
            240,
            &density,
            &QuadratureGrid::sweep(),
        )
        .unwrap();
        assert!(m.inner <= exact + 1e-12 && exact <= m.outer + 1e-12);
        assert!(!m.resolution_warning, "bracket [{}, {}]", m.inner, m.outer);
        assert!((m.outer - m.inner) < 0.05 * exact);
        // a deliberately coarse grid must raise the warning
        let coarse = superlevel_measure(
            &g,
            lambda,
            &[-3.0],
            &[3.0],
            3,
            &density,
            &QuadratureGrid::sweep(),
        )
        .unwrap();
        assert!(coarse.resolution_warning);
    }
}
