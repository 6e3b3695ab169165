//! Scaled confluent-hypergeometric primitives for the rank-one Dunkl kernel.
//!
//! The one-dimensional Z₂ Dunkl kernel is E_κ(z) = e^z·₁F₁(κ; 2κ+1; −2z).
//! Everything downstream (heat kernels and their derivatives) is expressed
//! through the exponentially scaled family F_j(z) = e^{−|z|}·E_κ^{(j)}(z),
//! which stays O(1) for all z and pairs with the reduced Gaussian
//! e^{−(|x|−|y|)²/4t} without overflow or catastrophic cancellation.
//!
//! The single numerical primitive is s_kummer(a,b,w) = e^{−w}M(a,b,w) for
//! w ≥ 0, evaluated by its positive-term Taylor series for moderate w and
//! by the large-w asymptotic expansion beyond. Kummer's transformation
//! M(a,b,−w) = e^{−w}M(b−a,b,w) moves every required evaluation onto the
//! non-negative axis, so the series never alternates.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Switch point between the Taylor series and the asymptotic expansion of
/// s_kummer. At this w the asymptotic tail truncates below 1e−20 relative
/// while the series still needs only ~w + O(√w) positive terms, so the two
/// routes overlap with plenty of margin for cross-validation.
pub const KUMMER_CROSSOVER: f64 = 60.0;

/// Taylor window for the hyperplane-regularized combinations: inside
/// |z| ≤ this the entire-function series are used verbatim.
pub const TAYLOR_WINDOW: f64 = 2.0;

/// Rising factorial (a)_j.
pub fn pochhammer(a: f64, j: usize) -> f64 {
    let mut p = 1.0;
    for i in 0..j {
        p *= a + i as f64;
    }
    p
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..k {
        b = b * (n - i) as f64 / (i + 1) as f64;
    }
    b
}

/// e^{−w}·M(a,b,w) for w ≥ 0, a ≥ 0, b > 0, accurate to ~1e−13 relative.
pub fn s_kummer(a: f64, b: f64, w: f64) -> Result<f64> {
    if !(w >= 0.0) || a < 0.0 || b <= 0.0 {
        return Err(Error::Domain(format!(
            "s_kummer needs w>=0, a>=0, b>0; got a={a}, b={b}, w={w}"
        )));
    }
    if a == 0.0 {
        return Ok((-w).exp());
    }
    if w < KUMMER_CROSSOVER {
        Ok(s_kummer_series(a, b, w))
    } else {
        Ok(s_kummer_asymptotic(a, b, w))
    }
}

pub(crate) fn s_kummer_series(a: f64, b: f64, w: f64) -> f64 {
    // all terms positive: condition number 1, no cancellation
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut n = 0usize;
    loop {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * w / (nf + 1.0);
        sum += term;
        n += 1;
        if term < 1e-18 * sum || n > 2_000 + 2 * w as usize {
            break;
        }
    }
    (-w).exp() * sum
}

pub(crate) fn s_kummer_asymptotic(a: f64, b: f64, w: f64) -> f64 {
    // DLMF 13.7.2: M(a,b,w) ~ Γ(b)/Γ(a)·e^w·w^{a−b}·Σ_s (b−a)_s(1−a)_s/(s!·w^s)
    //            + Γ(b)/Γ(b−a)·(−w)^{−a}·Σ_s (a)_s(a−b+1)_s/(s!·(−w)^s)
    // after the e^{−w} scaling the dominant branch loses its exponential and
    // the recessive branch keeps e^{−w}; at w ≥ 60 the latter contributes
    // below 1e−25 relative but is retained (real part) for completeness.
    let lead = (ln_gamma(b) - ln_gamma(a)).exp() * w.powf(a - b);
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev = f64::INFINITY;
    for s in 0..200 {
        let sf = s as f64;
        term *= (b - a + sf) * (1.0 - a + sf) / ((sf + 1.0) * w);
        if term.abs() >= prev {
            break; // asymptotic series started diverging
        }
        prev = term.abs();
        sum += term;
        if term.abs() < 1e-20 * sum.abs() {
            break;
        }
    }
    let mut out = lead * sum;
    // recessive branch, only meaningful when b−a avoids the poles of Γ
    let ba = b - a;
    if ba > 0.0 {
        let rec_lead =
            (ln_gamma(b) - ln_gamma(ba)).exp() * w.powf(-a) * (std::f64::consts::PI * a).cos();
        let mut rterm = 1.0f64;
        let mut rsum = 1.0f64;
        for s in 0..40 {
            let sf = s as f64;
            rterm *= (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * (-w));
            rsum += rterm;
            if rterm.abs() < 1e-20 * rsum.abs() {
                break;
            }
        }
        out += rec_lead * rsum * (-w).exp();
    }
    out
}

/// F_j(z) = e^{−|z|}·E_κ^{(j)}(z) for j = 0..=4.
///
/// Via Kummer's transformation and the contiguous-derivative relation
/// M^{(i)}(a,b,w) = ((a)_i/(b)_i)·M(a+i,b+i,w), both signs of z reduce to
/// s_kummer evaluations at the non-negative argument 2|z|.
pub fn scaled_e_derivs(z: f64, kappa: f64) -> Result<[f64; 5]> {
    if kappa < 0.0 {
        return Err(Error::Domain(format!("kappa must be >= 0, got {kappa}")));
    }
    let b = 2.0 * kappa + 1.0;
    let w = 2.0 * z.abs();
    let mut out = [0.0; 5];
    // cache the s_kummer ladder once; index i shifts both parameters
    let mut s = [0.0; 5];
    if z >= 0.0 {
        for (i, si) in s.iter_mut().enumerate() {
            *si = s_kummer(kappa + 1.0 + i as f64, b + i as f64, w)?;
        }
        for (j, oj) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..=j {
                let sign = if (j - i) % 2 == 0 { 1.0 } else { -1.0 };
                acc += binomial(j, i)
                    * sign
                    * 2f64.powi(i as i32)
                    * pochhammer(kappa + 1.0, i)
                    / pochhammer(b, i)
                    * s[i];
            }
            *oj = acc;
        }
    } else {
        for (i, si) in s.iter_mut().enumerate() {
            *si = s_kummer(kappa + i as f64, b + i as f64, w)?;
        }
        for (j, oj) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for i in 0..=j {
                acc += binomial(j, i) * (-2f64).powi(i as i32) * pochhammer(kappa, i)
                    / pochhammer(b, i)
                    * s[i];
            }
            *oj = acc;
        }
    }
    Ok(out)
}

/// Taylor coefficients c_0..c_n of E_κ(z) = Σ c_m z^m around z = 0.
pub fn e_taylor(kappa: f64, n: usize) -> Vec<f64> {
    // E = e^z · Σ_k m_k z^k with m_k = (κ)_k/(2κ+1)_k · (−2)^k/k!
    let b = 2.0 * kappa + 1.0;
    let mut m = vec![0.0f64; n + 1];
    m[0] = 1.0;
    for k in 0..n {
        let kf = k as f64;
        m[k + 1] = m[k] * (kappa + kf) / (b + kf) * (-2.0) / (kf + 1.0);
    }
    let mut inv_fact = vec![1.0f64; n + 1];
    for k in 1..=n {
        inv_fact[k] = inv_fact[k - 1] / k as f64;
    }
    (0..=n)
        .map(|i| (0..=i).map(|k| m[k] * inv_fact[i - k]).sum())
        .collect()
}

/// e^{−|z|}·[T, T′, T″] where T(z) = E′(z)/z − B(z)/z² and B is the odd
/// part of E.
///
/// T is the entire even function appearing in the hyperplane-regularized
/// form of the 1-D Dunkl Laplacian: for f(x) = G(x)E(z) with G even,
/// f′/x − (f − f(−x))/(2x²) = G·[−E/(2t) + (y/2t)²·T(z)].
pub fn scaled_t_jet(z: f64, kappa: f64) -> Result<[f64; 3]> {
    if z.abs() <= TAYLOR_WINDOW {
        // entire-series route: T = Σ_{n≥2} g_n z^{n−2} with g_n = n·c_n for
        // n even and (n−1)·c_n for n odd
        let c = e_taylor(kappa, 48);
        let mut t = [0.0f64; 3];
        for n in (2..c.len()).rev() {
            let g = if n % 2 == 0 {
                n as f64 * c[n]
            } else {
                (n - 1) as f64 * c[n]
            };
            let p = (n - 2) as f64;
            t[0] = t[0] * z + g;
            t[1] = t[1] * z + g * p;
            t[2] = t[2] * z + g * p * (p - 1.0);
        }
        // Horner above left each entry at degree offset 0; shift T′ and T″
        // down by the powers they lost to differentiation
        if z != 0.0 {
            t[1] /= z;
            t[2] /= z * z;
        } else {
            let g3 = 2.0 * c[3];
            let g4 = 4.0 * c[4];
            t[1] = g3;
            t[2] = 2.0 * g4;
        }
        let e = (-z.abs()).exp();
        Ok([t[0] * e, t[1] * e, t[2] * e])
    } else {
        // direct combination of scaled derivatives at ±z; safe because
        // |z| > TAYLOR_WINDOW keeps the z powers from amplifying roundoff
        let fp = scaled_e_derivs(z, kappa)?;
        let fm = scaled_e_derivs(-z, kappa)?;
        let b0 = 0.5 * (fp[0] - fm[0]);
        let b1 = 0.5 * (fp[1] + fm[1]);
        let b2 = 0.5 * (fp[2] - fm[2]);
        let z2 = z * z;
        let t0 = fp[1] / z - b0 / z2;
        let t1 = fp[2] / z - fp[1] / z2 - b1 / z2 + 2.0 * b0 / (z2 * z);
        let t2 = fp[3] / z - 2.0 * fp[2] / z2 + 2.0 * fp[1] / (z2 * z) - b2 / z2
            + 4.0 * b1 / (z2 * z)
            - 6.0 * b0 / (z2 * z2);
        Ok([t0, t1, t2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kappa_zero_is_exponential() {
        // E_0(z) = e^z, so every scaled derivative is 1 for z ≥ 0 and
        // e^{2z} for z < 0
        for z in [0.0, 0.3, 5.0, 40.0, 200.0] {
            let f = scaled_e_derivs(z, 0.0).unwrap();
            for fj in f {
                assert!((fj - 1.0).abs() < 1e-13, "z={z}: {fj}");
            }
        }
        for z in [-0.3f64, -5.0, -40.0] {
            let f = scaled_e_derivs(z, 0.0).unwrap();
            for fj in f {
                assert!((fj - (2.0 * z).exp()).abs() < 1e-13 * (2.0 * z).exp().max(1e-30));
            }
        }
        assert!((s_kummer(0.0, 1.0, 7.0).unwrap() - (-7.0f64).exp()).abs() < 1e-18);
    }

    #[test]
    fn kappa_one_closed_form() {
        // M(1,3,w) = 2(e^w − 1 − w)/w² gives
        // F_0(z≥0) = (e^{−2z} − 1 + 2z)/(2z²),
        // F_0(z<0) = (1 − e^{2z} + 2z·e^{2z})/(2z²)
        for z in [0.5f64, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0, 1e4] {
            let f = scaled_e_derivs(z, 1.0).unwrap()[0];
            let expect = ((-2.0 * z).exp() - 1.0 + 2.0 * z) / (2.0 * z * z);
            assert!(
                (f - expect).abs() < 1e-12 * expect.abs(),
                "z={z}: {f} vs {expect}"
            );
        }
        for z in [-0.5f64, -2.0, -10.0, -100.0] {
            let f = scaled_e_derivs(z, 1.0).unwrap()[0];
            let expect = (1.0 - (2.0 * z).exp() + 2.0 * z * (2.0 * z).exp()) / (2.0 * z * z);
            assert!(
                (f - expect).abs() < 1e-12 * expect.abs(),
                "z={z}: {f} vs {expect}"
            );
        }
    }

    #[test]
    fn dunkl_eigen_identity() {
        // E_κ′(z) = E_κ(z) − κ(E_κ(z) − E_κ(−z))/z
        for kappa in [0.3f64, 0.7, 1.5] {
            for z in [0.5f64, -0.5, 2.0, -2.0, 8.0, -8.0, 25.0, -25.0] {
                let fp = scaled_e_derivs(z, kappa).unwrap();
                let fm = scaled_e_derivs(-z, kappa).unwrap();
                let scale = z.abs().exp();
                let e = fp[0] * scale;
                let ep = fp[1] * scale;
                let er = fm[0] * scale;
                let rhs = e - kappa * (e - er) / z;
                assert!(
                    (ep - rhs).abs() < 1e-11 * e.abs().max(1.0),
                    "kappa={kappa} z={z}: {ep} vs {rhs}"
                );
            }
        }
    }

    #[test]
    fn series_asymptotic_crossover_agreement() {
        for kappa in [0.25f64, 0.5, 1.0, 2.5] {
            let b = 2.0 * kappa + 1.0;
            for i in 0..5 {
                let a = kappa + 1.0 + i as f64;
                for w in [55.0f64, 58.0, 60.0, 64.0, 70.0, 80.0] {
                    let s = s_kummer_series(a, b + i as f64, w);
                    let asy = s_kummer_asymptotic(a, b + i as f64, w);
                    assert!(
                        (s - asy).abs() < 1e-12 * s.abs(),
                        "a={a} w={w}: {s} vs {asy}"
                    );
                }
            }
        }
    }

    #[test]
    fn derivative_ladder_matches_finite_differences() {
        // dF_j/dz = F_{j+1} − sign(z)·F_j
        for kappa in [0.4f64, 1.2] {
            for z in [0.7f64, -0.7, 3.0, -3.0, 20.0, -20.0] {
                for j in 0..4 {
                    let h = 1e-4 * (1.0 + z.abs());
                    let f2 = scaled_e_derivs(z + h, kappa).unwrap()[j];
                    let f1 = scaled_e_derivs(z - h, kappa).unwrap()[j];
                    let f2h = scaled_e_derivs(z + 2.0 * h, kappa).unwrap()[j];
                    let f1h = scaled_e_derivs(z - 2.0 * h, kappa).unwrap()[j];
                    let fd = (8.0 * (f2 - f1) - (f2h - f1h)) / (12.0 * h);
                    let f = scaled_e_derivs(z, kappa).unwrap();
                    let expect = f[j + 1] - z.signum() * f[j];
                    assert!(
                        (fd - expect).abs() < 1e-9 * (1.0 + expect.abs()),
                        "kappa={kappa} z={z} j={j}: {fd} vs {expect}"
                    );
                }
            }
        }
    }

    #[test]
    fn taylor_matches_direct_evaluation() {
        for kappa in [0.0f64, 0.6, 1.7] {
            let c = e_taylor(kappa, 48);
            for z in [-1.0f64, -0.3, 0.0, 0.2, 0.9, 1.8] {
                let mut series = 0.0;
                for ci in c.iter().rev() {
                    series = series * z + ci;
                }
                let direct = scaled_e_derivs(z, kappa).unwrap()[0] * z.abs().exp();
                assert!(
                    (series - direct).abs() < 1e-13 * direct.abs().max(1.0),
                    "kappa={kappa} z={z}: {series} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn t_jet_consistency_across_window() {
        // Taylor route vs direct-combination route around |z| = TAYLOR_WINDOW,
        // plus finite-difference checks of T′ and T″
        for kappa in [0.5f64, 1.3] {
            for z in [1.9f64, -1.9, 2.1, -2.1] {
                let zin = z.clamp(-TAYLOR_WINDOW, TAYLOR_WINDOW) * 0.999;
                let _ = zin;
                let tj = scaled_t_jet(z, kappa).unwrap();
                // recompute T directly from unscaled E parts
                let fp = scaled_e_derivs(z, kappa).unwrap();
                let fm = scaled_e_derivs(-z, kappa).unwrap();
                let b0 = 0.5 * (fp[0] - fm[0]);
                let direct = fp[1] / z - b0 / (z * z);
                assert!(
                    (tj[0] - direct).abs() < 1e-11 * direct.abs().max(1e-3),
                    "kappa={kappa} z={z}: {} vs {direct}",
                    tj[0]
                );
                // FD of the scaled T: d/dz(e^{−|z|}T) = e^{−|z|}(T′ − sgn(z)T)
                let h = 1e-4;
                let tp = scaled_t_jet(z + h, kappa).unwrap()[0];
                let tm = scaled_t_jet(z - h, kappa).unwrap()[0];
                let fd = (tp - tm) / (2.0 * h);
                let expect = tj[1] - z.signum() * tj[0];
                assert!(
                    (fd - expect).abs() < 1e-6 * (1.0 + expect.abs()),
                    "kappa={kappa} z={z}: T' fd {fd} vs {expect}"
                );
                let fd2 = (tp - 2.0 * tj[0] + tm) / (h * h);
                let expect2 = tj[2] - 2.0 * z.signum() * tj[1] + tj[0];
                assert!(
                    (fd2 - expect2).abs() < 1e-4 * (1.0 + expect2.abs()),
                    "kappa={kappa} z={z}: T'' fd {fd2} vs {expect2}"
                );
            }
        }
    }
}
