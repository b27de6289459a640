//! ω-quasi-plurisubharmonic functions and the projective hull.
//!
//! A function `u` on `CP^n` is ω-qpsh when `dd^C u + ω ≥ 0`. For
//! `u = log‖σ‖^{1/ℓ}` Poincaré–Lelong gives `dd^C u + ω = Z/ℓ`, which is zero
//! off the divisor. The hull side estimates the best constant
//! `C_d(x) = sup_σ (‖σ(x)‖ / sup_Γ ‖σ‖)^{1/d}` by ascent on the coefficient
//! sphere; finite search only ever bounds it from below.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::ParamCurve;
use crate::ensemble::{complex_gaussian, seeded_rng};
use crate::error::{Error, Result};
use crate::fs::{fs_potential_levi, norm, HomogeneousSection, MonomialTable, ProjPoint, C64};

/// Logarithm of a section's norm scaled by `weight`, plus a shift:
/// `weight · log‖σ‖ + shift`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionLog {
    pub section: HomogeneousSection,
    pub weight: f64,
    pub shift: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum QpshFunction {
    Constant(f64),
    Log(SectionLog),
    /// Pointwise maximum of shifted section logarithms.
    Max(Vec<SectionLog>),
}

impl QpshFunction {
    /// `log‖σ‖^{1/ℓ}`.
    pub fn section_log(section: HomogeneousSection) -> Self {
        let weight = 1.0 / section.degree() as f64;
        QpshFunction::Log(SectionLog {
            section,
            weight,
            shift: 0.0,
        })
    }

    fn pieces(&self) -> &[SectionLog] {
        match self {
            QpshFunction::Constant(_) => &[],
            QpshFunction::Log(p) => std::slice::from_ref(p),
            QpshFunction::Max(ps) => ps,
        }
    }

    /// `u(x)`; `−∞` on the divisor of a section logarithm.
    pub fn value(&self, z: &[C64]) -> f64 {
        match self {
            QpshFunction::Constant(c) => *c,
            _ => self
                .pieces()
                .iter()
                .map(|p| p.value(z))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

impl SectionLog {
    pub fn value(&self, z: &[C64]) -> f64 {
        let d = self.section.degree() as i32;
        let v = self.section.eval_unchecked(z).norm() / norm(z).powi(d);
        self.weight * v.ln() + self.shift
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DefectOptions {
    pub step: f64,
    pub clearance: f64,
}

impl Default for DefectOptions {
    fn default() -> Self {
        Self {
            step: 1e-4,
            clearance: 1e-8,
        }
    }
}

struct Chart {
    axis: usize,
    w: Vec<C64>,
}

impl Chart {
    fn at(z: &[C64]) -> Self {
        let axis = (0..z.len())
            .max_by(|&a, &b| z[a].norm().total_cmp(&z[b].norm()))
            .expect("nonempty point");
        let w = (0..z.len()).filter(|&j| j != axis).map(|j| z[j] / z[axis]).collect();
        Self { axis, w }
    }

    fn lift(&self, w: &[C64]) -> Vec<C64> {
        let mut z = Vec::with_capacity(w.len() + 1);
        z.extend_from_slice(&w[..self.axis]);
        z.push(C64::new(1.0, 0.0));
        z.extend_from_slice(&w[self.axis..]);
        z
    }

    fn coordinate(&self, k: usize) -> usize {
        if k < self.axis {
            k
        } else {
            k + 1
        }
    }
}

/// `∂u/∂w_k` in the chart for one section logarithm.
fn piece_gradient(piece: &SectionLog, chart: &Chart, w: &[C64]) -> Vec<C64> {
    let z = chart.lift(w);
    let (s, g) = piece.section.eval_grad_unchecked(&z);
    let q = 1.0 + w.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let d = piece.section.degree() as f64;
    (0..w.len())
        .map(|k| piece.weight * (0.5 * g[chart.coordinate(k)] / s - 0.5 * d * w[k].conj() / q))
        .collect()
}

fn min_eigenvalue(m: &[Vec<C64>]) -> f64 {
    let n = m.len();
    let a = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j] + m[j][i].conj()));
    a.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `∂G_k/∂w̄_l` for the exact chart gradient `G`, by centered differences.
fn gradient_jacobian(piece: &SectionLog, chart: &Chart, h: f64) -> Vec<Vec<C64>> {
    let w = &chart.w;
    let n = w.len();
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; n];
    for l in 0..n {
        let shifted = |delta: C64| {
            let mut p = w.clone();
            p[l] += delta;
            piece_gradient(piece, chart, &p)
        };
        let xp = shifted(C64::new(h, 0.0));
        let xm = shifted(C64::new(-h, 0.0));
        let yp = shifted(C64::new(0.0, h));
        let ym = shifted(C64::new(0.0, -h));
        for k in 0..n {
            let dx = (xp[k] - xm[k]) / (2.0 * h);
            let dy = (yp[k] - ym[k]) / (2.0 * h);
            out[k][l] = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
        }
    }
    out
}

fn piece_defect(piece: &SectionLog, chart: &Chart, opts: &DefectOptions) -> f64 {
    let w = &chart.w;
    let n = w.len();
    let z = chart.lift(w);
    let (s, g) = piece.section.eval_grad_unchecked(&z);
    // step shrinks near the divisor, where u has a log singularity
    let reach = s.norm() / norm(&g).max(f64::MIN_POSITIVE);
    let scale = 1.0 + norm(w);
    let h = (opts.step * scale).min(1e-2 * reach);
    // one Richardson step on the centered differences cancels the h² term
    let coarse = gradient_jacobian(piece, chart, h);
    let fine = gradient_jacobian(piece, chart, 0.5 * h);
    let mut levi = fs_potential_levi(w);
    for k in 0..n {
        for l in 0..n {
            levi[k][l] += (4.0 * fine[k][l] - coarse[k][l]) / 3.0;
        }
    }
    min_eigenvalue(&levi)
}

/// Smallest eigenvalue of the Levi matrix of `u + ½ log(1 + |w|²)` in the
/// affine chart centered on the largest coordinate of `x`. Nonnegative
/// exactly when `dd^C u + ω ≥ 0` at `x`.
pub fn qpsh_defect(u: &QpshFunction, x: &ProjPoint, opts: &DefectOptions) -> Result<f64> {
    let z = x.coords();
    for p in u.pieces() {
        if p.section.dimension() + 1 != z.len() {
            return Err(Error::DimensionMismatch {
                expected: p.section.dimension() + 1,
                found: z.len(),
            });
        }
        let unit = p.section.unit();
        let v = unit.eval_unchecked(z).norm() / norm(z).powi(p.section.degree() as i32);
        if !(v > opts.clearance) {
            return Err(Error::SingularPoint { norm: v });
        }
    }
    let chart = Chart::at(z);
    match u {
        QpshFunction::Constant(_) => Ok(min_eigenvalue(&fs_potential_levi(&chart.w))),
        _ => {
            let values: Vec<f64> = u.pieces().iter().map(|p| p.value(z)).collect();
            let top = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let tie = 1e-9 * (1.0 + top.abs());
            Ok(u.pieces()
                .iter()
                .zip(&values)
                .filter(|(_, &v)| v >= top - tie)
                .map(|(p, _)| piece_defect(p, &chart, opts))
                .fold(f64::INFINITY, f64::min))
        }
    }
}

/// Outcome of the hull membership test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Member,
    NonMember,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HullOptions {
    /// Curve samples per component for `sup_Γ`.
    pub samples: usize,
    pub starts: usize,
    /// Ascent iterations per smoothing level.
    pub steps: usize,
    /// Exponents of the power means that smooth `sup_Γ`.
    pub smoothing: Vec<f64>,
    pub seed: u64,
    /// Member when the running maximum moves less than this (relative)
    /// over the top third of degrees.
    pub stable_tol: f64,
    /// Non-member when `log C_d` grows faster than this per degree.
    pub growth_slope: f64,
    /// Constants at or above this count as unbounded.
    pub cap: f64,
}

impl Default for HullOptions {
    fn default() -> Self {
        Self {
            samples: 512,
            starts: 8,
            steps: 40,
            smoothing: vec![2.0, 8.0, 32.0, 128.0],
            seed: 0,
            stable_tol: 0.01,
            growth_slope: 0.05,
            cap: 1e3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeConstant {
    pub degree: u32,
    pub constant: f64,
    pub running_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullEstimate {
    pub point: ProjPoint,
    pub by_degree: Vec<DegreeConstant>,
    pub verdict: Verdict,
    /// `log` of the largest constant found.
    pub lambda_estimate: f64,
}

/// Monomial values at the target point and along the curve, all on unit
/// representatives.
struct HullProblem<'a> {
    curve: &'a ParamCurve,
    degree: u32,
    len: usize,
    at_x: Vec<C64>,
    on_curve: Vec<C64>,
    rows: usize,
}

impl<'a> HullProblem<'a> {
    fn new(curve: &'a ParamCurve, x: &[C64], degree: u32, samples: usize) -> Self {
        let table = MonomialTable::new(curve.dimension(), degree);
        let unit = |z: &[C64]| -> Vec<C64> {
            let n = norm(z);
            z.iter().map(|c| c / n).collect()
        };
        let at_x = table.values(&unit(x));
        let mut on_curve = Vec::new();
        let mut rows = 0;
        for comp in curve.components() {
            for i in 0..samples {
                let z = comp.point(TAU * i as f64 / samples as f64);
                on_curve.extend(table.values(&unit(&z)));
                rows += 1;
            }
        }
        Self {
            curve,
            degree,
            len: table.len(),
            at_x,
            on_curve,
            rows,
        }
    }

    fn row(&self, i: usize) -> &[C64] {
        &self.on_curve[i * self.len..(i + 1) * self.len]
    }

    /// Smoothed objective `log|σ(x)| − log M_p(|σ|_Γ)` and its complex gradient.
    fn objective(&self, c: &[C64], p: f64, with_grad: bool) -> (f64, Vec<C64>) {
        let lx: C64 = c.iter().zip(&self.at_x).map(|(a, m)| a * m).sum();
        let vals: Vec<C64> = (0..self.rows)
            .map(|i| c.iter().zip(self.row(i)).map(|(a, m)| a * m).sum())
            .collect();
        let logs: Vec<f64> = vals.iter().map(|v| p * v.norm().ln()).collect();
        let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = logs.iter().map(|l| (l - top).exp()).sum();
        let lse = top + total.ln() - (self.rows as f64).ln();
        let f = lx.norm().ln() - lse / p;
        if !with_grad || !f.is_finite() {
            return (f, Vec::new());
        }
        let mut g: Vec<C64> = self.at_x.iter().map(|m| (m / lx).conj()).collect();
        for (i, v) in vals.iter().enumerate() {
            let w = (logs[i] - top).exp() / total;
            if w == 0.0 {
                continue;
            }
            for (gk, m) in g.iter_mut().zip(self.row(i)) {
                *gk -= w * (m / v).conj();
            }
        }
        (f, g)
    }

    fn ascend(&self, mut c: Vec<C64>, smoothing: &[f64], steps: usize) -> Vec<C64> {
        for &p in smoothing {
            let mut eta = 0.5;
            let (mut f, mut g) = self.objective(&c, p, true);
            if !f.is_finite() {
                return c;
            }
            for _ in 0..steps {
                // project off the complex line through c
                let cg: C64 = c.iter().zip(&g).map(|(a, b)| a.conj() * b).sum();
                g.iter_mut().zip(&c).for_each(|(gk, ck)| *gk -= cg * ck);
                let gn = norm(&g);
                if gn < 1e-14 {
                    break;
                }
                let mut accepted = false;
                for _ in 0..30 {
                    let trial: Vec<C64> = c.iter().zip(&g).map(|(a, b)| a + eta * b / gn).collect();
                    let tn = norm(&trial);
                    let trial: Vec<C64> = trial.iter().map(|a| a / tn).collect();
                    let (ft, gt) = self.objective(&trial, p, true);
                    if ft.is_finite() && ft > f {
                        c = trial;
                        f = ft;
                        g = gt;
                        accepted = true;
                        eta = (2.0 * eta).min(1.0);
                        break;
                    }
                    eta *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
        }
        c
    }

    /// `sup_Γ ‖σ‖` from `2m` samples plus golden-section refinement around
    /// the largest samples.
    fn sup_on_curve(&self, section: &HomogeneousSection, samples: usize) -> f64 {
        let d = self.degree as i32;
        let m = 2 * samples;
        let mut best = 0.0f64;
        for comp in self.curve.components() {
            let f = |t: f64| {
                let z = comp.point(t);
                section.eval_unchecked(&z).norm() / norm(&z).powi(d)
            };
            let vals: Vec<f64> = (0..m).map(|i| f(TAU * i as f64 / m as f64)).collect();
            let top = vals.iter().cloned().fold(0.0, f64::max);
            best = best.max(top);
            let h = TAU / m as f64;
            for i in 0..m {
                let (a, b, c) = (vals[(i + m - 1) % m], vals[i], vals[(i + 1) % m]);
                if b >= a && b >= c && b >= 0.99 * top {
                    let t0 = h * i as f64;
                    best = best.max(golden_max(t0 - h, t0 + h, &f));
                }
            }
        }
        best
    }
}

fn golden_max<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, f: &F) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..50 {
        if f1 > f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    f1.max(f2)
}

/// `(‖σ(x)‖ / sup_Γ ‖σ‖)^{1/d}` with the refined supremum, capped.
fn section_constant(problem: &HullProblem, section: &HomogeneousSection, x: &[C64], opts: &HullOptions) -> f64 {
    let d = problem.degree as i32;
    let at_x = section.eval_unchecked(x).norm() / norm(x).powi(d);
    let sup = problem.sup_on_curve(section, opts.samples);
    if !(sup > 1e-10 * at_x) {
        return opts.cap;
    }
    (at_x / sup).powf(1.0 / problem.degree as f64).min(opts.cap)
}

fn stream_seed(seed: u64, point: usize) -> u64 {
    seed ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Best constant at one degree: the peak section `⟨z, x̄⟩^d` and `starts`
/// random sections, each improved by ascent.
fn degree_constant(curve: &ParamCurve, x: &[C64], degree: u32, opts: &HullOptions, point_index: usize) -> f64 {
    let n = curve.dimension();
    let problem = HullProblem::new(curve, x, degree, opts.samples);
    let table = MonomialTable::new(n, degree);
    let xn = norm(x);
    let peak = HomogeneousSection::linear(&x.iter().map(|c| (c / xn).conj()).collect::<Vec<_>>())
        .and_then(|s| s.power(degree))
        .expect("point is nonzero");
    let mut starts = vec![peak.unit().coefficients().to_vec()];
    for k in 0..opts.starts {
        let mut rng = seeded_rng(stream_seed(opts.seed, point_index), ((degree as u64) << 32) | k as u64);
        let c: Vec<C64> = (0..table.len()).map(|_| complex_gaussian(&mut rng)).collect();
        let cn = norm(&c);
        starts.push(c.iter().map(|a| a / cn).collect());
    }
    starts
        .into_par_iter()
        .map(|c| {
            let c = problem.ascend(c, &opts.smoothing, opts.steps);
            let s = HomogeneousSection::new(n, degree, c).expect("unit coefficients");
            section_constant(&problem, &s, x, opts)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max)
}

fn verdict(by_degree: &[DegreeConstant], opts: &HullOptions) -> Verdict {
    if by_degree.iter().any(|d| d.constant >= opts.cap) {
        return Verdict::NonMember;
    }
    if by_degree.len() >= 2 {
        let n = by_degree.len() as f64;
        let xs: Vec<f64> = by_degree.iter().map(|d| d.degree as f64).collect();
        let ys: Vec<f64> = by_degree.iter().map(|d| d.running_max.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        if sxx > 0.0 && sxy / sxx > opts.growth_slope {
            return Verdict::NonMember;
        }
    }
    if by_degree.len() >= 3 {
        let k = by_degree.len().div_ceil(3).max(2);
        let tail = &by_degree[by_degree.len() - k..];
        let lo = tail.first().map(|d| d.running_max).unwrap_or(0.0);
        let hi = tail.last().map(|d| d.running_max).unwrap_or(0.0);
        if hi - lo < opts.stable_tol * lo {
            return Verdict::Member;
        }
    }
    Verdict::Undetermined
}

fn estimate(
    curve: &ParamCurve,
    x: &ProjPoint,
    degrees: &[u32],
    opts: &HullOptions,
    point_index: usize,
) -> HullEstimate {
    let mut running = 0.0f64;
    let by_degree: Vec<DegreeConstant> = degrees
        .iter()
        .map(|&d| {
            let c = degree_constant(curve, x.coords(), d, opts, point_index);
            running = running.max(c);
            DegreeConstant {
                degree: d,
                constant: c,
                running_max: running,
            }
        })
        .collect();
    HullEstimate {
        point: x.clone(),
        verdict: verdict(&by_degree, opts),
        lambda_estimate: running.ln(),
        by_degree,
    }
}

fn check_degrees(degrees: &[u32]) -> Result<()> {
    if degrees.contains(&0) {
        return Err(Error::Invalid("degrees must be positive".into()));
    }
    if degrees.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("degrees must be strictly increasing".into()));
    }
    Ok(())
}

/// Best-constant estimates `C_d(x)` for each degree, the running maximum
/// and a membership verdict.
pub fn best_constant(curve: &ParamCurve, x: &ProjPoint, degrees: &[u32], opts: &HullOptions) -> Result<HullEstimate> {
    if x.dimension() != curve.dimension() {
        return Err(Error::DimensionMismatch {
            expected: curve.dimension(),
            found: x.dimension(),
        });
    }
    if curve.is_empty() {
        return Err(Error::Invalid("the hull of an empty curve is empty".into()));
    }
    check_degrees(degrees)?;
    Ok(estimate(curve, x, degrees, opts, 0))
}

/// [`best_constant`] over a batch of points; seeds depend on the point's
/// index so the result does not depend on scheduling.
pub fn hull_field(
    curve: &ParamCurve,
    points: &[ProjPoint],
    degrees: &[u32],
    opts: &HullOptions,
) -> Result<Vec<HullEstimate>> {
    check_degrees(degrees)?;
    for p in points {
        if p.dimension() != curve.dimension() {
            return Err(Error::DimensionMismatch {
                expected: curve.dimension(),
                found: p.dimension(),
            });
        }
    }
    if curve.is_empty() && !points.is_empty() {
        return Err(Error::Invalid("the hull of an empty curve is empty".into()));
    }
    Ok(points
        .par_iter()
        .enumerate()
        .map(|(i, p)| estimate(curve, p, degrees, opts, i))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{random_section, Weighting};
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn section_logs_have_zero_defect() {
        let mut rng = seeded_rng(11, 0);
        for _ in 0..200 {
            let n = rng.gen_range(1..4);
            let d = rng.gen_range(1..5);
            let s = random_section(n, d, Weighting::Gaussian, &mut rng).unwrap();
            let z: Vec<C64> = (0..=n).map(|_| complex_gaussian(&mut rng)).collect();
            let x = ProjPoint::new(z).unwrap();
            let defect = qpsh_defect(&QpshFunction::section_log(s), &x, &DefectOptions::default()).unwrap();
            assert!((-1e-5..1e-5).contains(&defect), "{defect}");
        }
    }

    #[test]
    fn constant_defect_is_fs_eigenvalue() {
        let x = ProjPoint::new(vec![c(1.0, 0.0), c(0.5, 0.5)]).unwrap();
        let d = qpsh_defect(&QpshFunction::Constant(0.0), &x, &DefectOptions::default()).unwrap();
        let q: f64 = 1.5;
        assert!((d - 0.5 / (q * q)).abs() < 1e-14);
    }

    #[test]
    fn doubled_weight_violates() {
        // 2 log‖z1‖ has dd^C u + ω = −ω off the divisor
        let s = HomogeneousSection::coordinate(1, 1);
        let u = QpshFunction::Log(SectionLog {
            section: s,
            weight: 2.0,
            shift: 0.0,
        });
        for r in [0.3f64, 1.0, 2.5] {
            let x = ProjPoint::new(vec![c(1.0, 0.0), c(r, 0.0)]).unwrap();
            let d = qpsh_defect(&u, &x, &DefectOptions::default()).unwrap();
            let w = r.min(1.0 / r);
            let q = 1.0 + w * w;
            assert!((d + 0.5 / (q * q)).abs() < 1e-6, "{d}");
        }
    }

    #[test]
    fn max_of_logs_and_singular_points() {
        let u = QpshFunction::Max(vec![
            SectionLog {
                section: HomogeneousSection::coordinate(2, 1),
                weight: 1.0,
                shift: 0.0,
            },
            SectionLog {
                section: HomogeneousSection::coordinate(2, 2),
                weight: 1.0,
                shift: 0.3,
            },
        ]);
        let x = ProjPoint::new(vec![c(1.0, 0.0), c(0.2, 0.1), c(0.4, -0.3)]).unwrap();
        assert!(qpsh_defect(&u, &x, &DefectOptions::default()).unwrap() >= -1e-5);
        let on = ProjPoint::new(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.4, -0.3)]).unwrap();
        assert!(matches!(
            qpsh_defect(&u, &on, &DefectOptions::default()),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn calibration_on_the_curve() {
        let g = ParamCurve::circle_in_line(1, 1.0, 1).unwrap();
        let x = ProjPoint::new(g.components()[0].point(0.9)).unwrap();
        let h = best_constant(&g, &x, &[4], &HullOptions::default()).unwrap();
        assert!((h.by_degree[0].constant - 1.0).abs() < 1e-3, "{h:?}");
    }

    #[test]
    fn circle_center_constant() {
        let g = ParamCurve::circle_in_line(1, 1.0, 1).unwrap();
        let x = ProjPoint::from_real(&[1.0, 0.0]).unwrap();
        let h = best_constant(&g, &x, &[1, 2, 3, 4], &HullOptions::default()).unwrap();
        for d in &h.by_degree {
            assert!((d.constant - 2f64.sqrt()).abs() < 1e-3, "{h:?}");
        }
        assert_eq!(h.verdict, Verdict::Member);
    }

    #[test]
    fn off_line_point_is_not_in_hull() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let x = ProjPoint::new(vec![c(1.0, 0.0), c(0.2, 0.0), c(0.5, 0.0)]).unwrap();
        let h = best_constant(&g, &x, &[1, 2, 3], &HullOptions::default()).unwrap();
        assert_eq!(h.verdict, Verdict::NonMember);
    }

    #[test]
    fn empty_field() {
        let g = ParamCurve::circle_in_line(1, 1.0, 1).unwrap();
        assert!(hull_field(&g, &[], &[1, 2], &HullOptions::default())
            .unwrap()
            .is_empty());
        assert!(hull_field(&g, &[], &[2, 1], &HullOptions::default()).is_err());
    }
}
