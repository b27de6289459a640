//! Periodic trapezoid and Gauss–Legendre rules with a posteriori error
//! estimates from sample doubling.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `∫_0^{2π} f` by the `m`-point trapezoid rule.
pub fn trapezoid_periodic<F: FnMut(f64) -> f64>(m: usize, mut f: F) -> f64 {
    let h = TAU / m as f64;
    (0..m).map(|i| f(h * i as f64)).sum::<f64>() * h
}

/// Refinement history of a doubling quadrature.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Refinement {
    /// Sample counts visited, coarse to fine.
    pub samples: Vec<usize>,
    pub values: Vec<f64>,
    /// `|I_k − I_{k−1}| / |I_{k−1} − I_{k−2}|` for consecutive levels.
    pub richardson_ratios: Vec<f64>,
}

/// Outcome of [`periodic_adaptive`].
#[derive(Clone, Debug)]
pub struct Adaptive {
    pub value: f64,
    /// Difference to the previous level plus a rounding floor; dominates the
    /// true error once the rule is in its spectral regime.
    pub error: f64,
    pub refinement: Refinement,
}

/// Trapezoid rule on `[0, 2π)` doubling from `m0` until two successive levels
/// agree to `tol`. Nested levels reuse the coarse samples.
pub fn periodic_adaptive<F>(m0: usize, max_samples: usize, tol: f64, mut f: F) -> Result<Adaptive>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut m = m0.max(4);
    let mut sum = 0.0;
    let mut abs_sum = 0.0;
    for i in 0..m {
        let v = f(TAU * i as f64 / m as f64)?;
        sum += v;
        abs_sum += v.abs();
    }
    let mut refinement = Refinement::default();
    let mut prev = sum * TAU / m as f64;
    refinement.samples.push(m);
    refinement.values.push(prev);
    loop {
        // odd points of the doubled grid
        let h = TAU / (2 * m) as f64;
        for i in 0..m {
            let v = f(h * (2 * i + 1) as f64)?;
            sum += v;
            abs_sum += v.abs();
        }
        m *= 2;
        let value = sum * TAU / m as f64;
        let change = (value - prev).abs();
        let k = refinement.values.len();
        if k >= 2 {
            let before = (refinement.values[k - 1] - refinement.values[k - 2]).abs();
            refinement
                .richardson_ratios
                .push(if before > 0.0 { change / before } else { 0.0 });
        }
        refinement.samples.push(m);
        refinement.values.push(value);
        let floor = 64.0 * f64::EPSILON * abs_sum * TAU / m as f64;
        if change <= tol.max(floor) {
            return Ok(Adaptive {
                value,
                error: change + floor,
                refinement,
            });
        }
        if m >= max_samples {
            return Err(Error::NotConverged {
                samples: m,
                last_change: change,
            });
        }
        prev = value;
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "Gauss–Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `∫_0^1 ∫_0^{2π} f(s, t) dt ds` with Gauss–Legendre in `s` and the
/// trapezoid rule in `t`, doubling both until successive values agree.
pub fn rectangle_adaptive<F>(tol: f64, max_level: usize, f: F) -> Result<Adaptive>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    use rayon::prelude::*;

    let mut ns = 12;
    let mut mt = 32;
    let mut refinement = Refinement::default();
    let mut prev: Option<f64> = None;
    for _ in 0..max_level {
        let (nodes, weights) = gauss_legendre(ns);
        let h = TAU / mt as f64;
        let rows: Result<Vec<(f64, f64)>> = nodes
            .par_iter()
            .zip(weights.par_iter())
            .map(|(x, w)| {
                let s = 0.5 * (x + 1.0);
                let mut row = 0.0;
                let mut abs_row = 0.0;
                for j in 0..mt {
                    let v = f(s, h * j as f64)?;
                    row += v;
                    abs_row += v.abs();
                }
                Ok((0.5 * w * row * h, 0.5 * w * abs_row * h))
            })
            .collect();
        let rows = rows?;
        let value: f64 = rows.iter().map(|r| r.0).sum();
        let abs_value: f64 = rows.iter().map(|r| r.1).sum();
        let k = refinement.values.len();
        refinement.samples.push(ns * mt);
        refinement.values.push(value);
        if let Some(p) = prev {
            let change = (value - p).abs();
            if k >= 2 {
                let before = (refinement.values[k - 1] - refinement.values[k - 2]).abs();
                refinement
                    .richardson_ratios
                    .push(if before > 0.0 { change / before } else { 0.0 });
            }
            let floor = 64.0 * f64::EPSILON * abs_value;
            if change <= tol.max(floor) {
                return Ok(Adaptive {
                    value,
                    error: change + floor,
                    refinement,
                });
            }
        }
        prev = Some(value);
        ns *= 2;
        mt *= 2;
    }
    let n = refinement.values.len();
    Err(Error::NotConverged {
        samples: ns * mt / 4,
        last_change: (refinement.values[n - 1] - refinement.values[n - 2]).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for p in 0..14 {
            let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p)).sum();
            assert!((q - exact).abs() < 1e-14, "p={p}");
        }
    }

    #[test]
    fn high_order_legendre_weights_sum_to_two() {
        for n in [16, 48, 96, 192] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn trapezoid_is_spectral_for_analytic_periodic() {
        // ∫ 1/(2 + cos t) = 2π/√3
        let exact = TAU / 3f64.sqrt();
        let coarse = trapezoid_periodic(8, |t| 1.0 / (2.0 + t.cos()));
        let fine = trapezoid_periodic(32, |t| 1.0 / (2.0 + t.cos()));
        assert!((coarse - exact).abs() < 1e-3);
        assert!((fine - exact).abs() < 1e-14);
    }

    #[test]
    fn adaptive_reports_a_bound() {
        let exact = TAU / (1.0f64 - 0.81).sqrt();
        let r = periodic_adaptive(8, 1 << 16, 1e-13, |t| Ok(1.0 / (1.0 - 0.9 * t.cos()))).unwrap();
        assert!((r.value - exact).abs() <= r.error);
        assert!(r.refinement.samples.len() >= 3);
        assert!(r.refinement.richardson_ratios.iter().all(|x| *x < 1.0));
    }

    #[test]
    fn adaptive_gives_up() {
        let r = periodic_adaptive(8, 64, 1e-15, |t| Ok(1.0 / (1.0 - 0.999 * t.cos())));
        assert!(matches!(r, Err(Error::NotConverged { .. })));
    }

    #[test]
    fn rectangle_rule() {
        // ∫_0^1 ∫_0^{2π} s² (1 + cos t) = 2π/3
        let r = rectangle_adaptive(1e-13, 6, |s, t| Ok(s * s * (1.0 + t.cos()))).unwrap();
        assert!((r.value - TAU / 3.0).abs() < 1e-13);
    }
}
