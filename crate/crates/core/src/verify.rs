//! The cross-validation battery behind `projlink verify`.
//!
//! Every check is seeded and reports only computed quantities, so two runs
//! with the same options serialize to identical bytes.

use std::f64::consts::SQRT_2;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criterion::{cross_validate_equivalences, estimate_minimal_mass, CriterionOptions, WindingObjective};
use crate::curves::{chain_boundary_check, cone_chain, HoloChain, ParamCurve};
use crate::ensemble::{complex_gaussian, random_curve, random_section, section_ensemble, seeded_rng, Weighting};
use crate::error::{Error, Result};
use crate::fs::{dc_from_parts, norm, HomogeneousSection, ProjPoint, C64};
use crate::invariants::{
    affine_relation, necessity_check, projective_linking, reduced_winding, uniqueness_criterion, winding_number,
    Divisor, IntersectionOptions, QuadratureOptions,
};
use crate::io::{bundled, parse_chain, parse_curve};
use crate::qpsh::{best_constant, qpsh_defect, DefectOptions, HullOptions, QpshFunction};
use crate::quadrature::trapezoid_periodic;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Run the reduced battery.
    pub quick: bool,
    pub seed: u64,
    /// Sections drawn for the necessity check.
    pub ensemble: usize,
    /// Largest section degree in the necessity ensemble.
    pub max_degree: u32,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            quick: false,
            seed: 0,
            ensemble: 500,
            max_degree: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// The quantity compared against `threshold`; absent when the check
    /// could not be computed.
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn at_most(name: &str, measured: f64, threshold: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: measured <= threshold,
            measured: Some(measured),
            threshold: Some(threshold),
            detail,
        }
    }

    fn at_least(name: &str, measured: f64, threshold: f64, detail: String) -> Self {
        Self {
            name: name.into(),
            passed: measured >= threshold,
            measured: Some(measured),
            threshold: Some(threshold),
            detail,
        }
    }

    fn failed(name: &str, err: &Error) -> Self {
        Self {
            name: name.into(),
            passed: false,
            measured: None,
            threshold: None,
            detail: format!("{}: {err}", err.kind()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }
}

fn run_check(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::failed(name, &e))
}

fn circle() -> ParamCurve {
    parse_curve(bundled::CIRCLE).expect("bundled circle parses")
}

fn disk() -> HoloChain {
    parse_chain(bundled::DISK).expect("bundled disk parses")
}

/// A random curve and a section whose divisor clears it, both from stream
/// `index`.
fn random_pair(
    seed: u64,
    index: u64,
    degrees: std::ops::RangeInclusive<u32>,
) -> Result<(ParamCurve, HomogeneousSection)> {
    let mut rng = seeded_rng(seed, index);
    let curve = random_curve(2, 2, &mut rng)?;
    for _ in 0..32 {
        let d = rng.gen_range(degrees.clone());
        let s = random_section(2, d, Weighting::Gaussian, &mut rng)?;
        match winding_number(&curve, &s, &QuadratureOptions::default()) {
            Ok(_) => return Ok((curve, s)),
            Err(e) if e.is_graze() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Invalid("no admissible section in 32 draws".into()))
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn circle_winding() -> Result<Check> {
    let g = circle();
    let o = QuadratureOptions::default();
    let through = winding_number(&g, &HomogeneousSection::coordinate(2, 1), &o)?.value;
    let missing = winding_number(&g, &HomogeneousSection::coordinate(2, 0), &o)?.value;
    Ok(Check::at_most(
        "circle_winding",
        max_abs([through - 0.5, missing + 0.5]),
        1e-6,
        format!("through the disk {through:.12}, missing the disk {missing:.12}"),
    ))
}

fn winding_equals_linking(seed: u64, count: usize) -> Result<Check> {
    let qo = QuadratureOptions::default();
    let io = IntersectionOptions::default();
    let gaps: Vec<Result<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let (curve, s) = random_pair(seed, i, 1..=3)?;
            let chain = cone_chain(&curve, None, seed ^ i)?;
            let wind = winding_number(&curve, &s, &qo)?.value;
            let link = projective_linking(&curve, &Divisor::new(s), &chain, &qo, &io)?.value;
            Ok(wind - link)
        })
        .collect();
    let gaps = gaps.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Check::at_most(
        "winding_equals_linking",
        max_abs(gaps),
        1e-5,
        format!("{count} random curve/section pairs"),
    ))
}

fn chain_independence(seed: u64, count: usize) -> Result<Check> {
    let qo = QuadratureOptions::default();
    let io = IntersectionOptions::default();
    let gaps: Vec<Result<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let (curve, s) = random_pair(seed.wrapping_add(1), i, 1..=3)?;
            let a = cone_chain(&curve, None, 2 * i)?;
            let b = cone_chain(&curve, None, 2 * i + 1)?;
            let z = Divisor::new(s);
            let la = projective_linking(&curve, &z, &a, &qo, &io)?.value;
            let lb = projective_linking(&curve, &z, &b, &qo, &io)?.value;
            Ok(la - lb)
        })
        .collect();
    let gaps = gaps.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Check::at_most(
        "chain_independence",
        max_abs(gaps),
        1e-6,
        format!("{count} curves, two cone apexes each"),
    ))
}

fn necessity(seed: u64, count: usize, max_degree: u32) -> Result<Check> {
    let g = circle();
    let qo = QuadratureOptions::default();
    let ens = section_ensemble(2, 1..=max_degree, count, Weighting::Gaussian, seed)?;
    let r = necessity_check(&g, &disk(), &ens, 1e-5, &qo)?;
    let attained = reduced_winding(&g, &HomogeneousSection::coordinate(2, 0), &qo)?.value;
    let gap = (attained + r.mass).abs();
    let mut c = Check::at_least(
        "necessity",
        r.min_reduced_winding,
        -r.mass - 1e-5,
        format!(
            "mass {:.12}, ensemble minimum {:.9} ({} skipped), missing line attains {attained:.12}",
            r.mass, r.min_reduced_winding, r.skipped
        ),
    );
    c.passed &= gap <= 1e-3;
    Ok(c)
}

fn minimal_mass(quick: bool) -> Result<Check> {
    let opts = if quick {
        CriterionOptions {
            degrees: vec![1, 2],
            restarts: 8,
            ..Default::default()
        }
    } else {
        CriterionOptions::default()
    };
    let cases: Vec<(f64, u32)> = if quick {
        vec![(1.0, 1)]
    } else {
        vec![(0.5, 1), (1.0, 1), (2.0, 1), (1.0, 2)]
    };
    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (r, m) in cases {
        let g = ParamCurve::circle_in_line(2, r, m)?;
        let est = estimate_minimal_mass(&g, &opts)?.minimal_mass_estimate;
        let expect = m as f64 * r * r / (1.0 + r * r);
        worst = worst.max((est - expect).abs());
        detail.push(format!("r={r} m={m}: {est:.6} vs {expect:.6}"));
    }
    Ok(Check::at_most("minimal_mass", worst, 2e-2, detail.join("; ")))
}

fn uniqueness(seed: u64) -> Result<Check> {
    let io = IntersectionOptions::default();
    let mut ens = vec![Divisor::new(HomogeneousSection::coordinate(2, 0))];
    ens.extend(
        section_ensemble(2, 1..=3, 12, Weighting::Gaussian, seed)?
            .into_iter()
            .map(Divisor::new),
    );
    let bare = uniqueness_criterion(&disk(), &ens, &io)?.value;
    let both = parse_chain(bundled::DISK_PLUS_LINE)?;
    let with_line = uniqueness_criterion(&both, &ens, &io)?.value;
    let mut c = Check::at_most(
        "uniqueness",
        bare.abs(),
        0.0,
        format!("disk {bare}, disk plus line {with_line}"),
    );
    c.passed &= with_line >= 1.0 - 1e-6;
    Ok(c)
}

fn affine(seed: u64, count: usize) -> Result<Check> {
    let qo = QuadratureOptions::default();
    let rows: Vec<Result<f64>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut k = i;
            loop {
                let (curve, s) = random_pair(seed.wrapping_add(2), k, 1..=3)?;
                match affine_relation(&curve, &s, &qo) {
                    Ok(r) => return Ok(r.residual),
                    // the curve met the hyperplane at infinity
                    Err(e) if e.is_graze() => k += count as u64,
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();
    let res = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Check::at_most(
        "affine_relation",
        max_abs(res),
        1e-5,
        format!("{count} random pairs, affine linking integral"),
    ))
}

fn defect(seed: u64, count: usize) -> Result<Check> {
    let opts = DefectOptions::default();
    let mins: Vec<Result<(f64, usize)>> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeded_rng(seed.wrapping_add(3), i);
            let d = rng.gen_range(1..=4);
            let s = random_section(2, d, Weighting::Gaussian, &mut rng)?;
            let x = ProjPoint::new((0..3).map(|_| complex_gaussian(&mut rng)).collect())?;
            match qpsh_defect(&QpshFunction::section_log(s), &x, &opts) {
                Ok(v) => Ok((v, 0)),
                Err(Error::SingularPoint { .. }) => Ok((f64::INFINITY, 1)),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut min = f64::INFINITY;
    let mut skipped = 0;
    for m in mins {
        let (v, s) = m?;
        min = min.min(v);
        skipped += s;
    }
    Ok(Check::at_least(
        "qpsh_defect",
        min,
        -1e-5,
        format!("{count} section-logarithm/point pairs, {skipped} on a divisor"),
    ))
}

fn hull(quick: bool) -> Result<Check> {
    let opts = HullOptions::default();
    let g = ParamCurve::circle_in_line(1, 1.0, 1)?;
    let n = if quick { 3 } else { 8 };
    let mut worst = 0.0f64;
    for i in 0..n {
        let t = 0.37 + std::f64::consts::TAU * i as f64 / n as f64;
        let x = ProjPoint::new(g.components()[0].point(t))?;
        let c = best_constant(&g, &x, &[4], &opts)?.by_degree[0].constant;
        worst = worst.max((c - 1.0).abs());
    }
    let degrees: Vec<u32> = if quick { (1..=4).collect() } else { (1..=8).collect() };
    let center = best_constant(&g, &ProjPoint::from_real(&[1.0, 0.0])?, &degrees, &opts)?;
    let top = center.by_degree.last().map_or(0.0, |d| d.running_max);
    let rel = (top - SQRT_2).abs() / SQRT_2;
    let mut c = Check::at_most(
        "hull_calibration",
        worst,
        1e-3,
        format!("{n} curve points at degree 4; centre constant {top:.6} (relative gap {rel:.2e})"),
    );
    c.passed &= rel <= 0.02;
    Ok(c)
}

fn orientation(seed: u64, count: usize) -> Result<Check> {
    let qo = QuadratureOptions::default();
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let (curve, s) = random_pair(seed.wrapping_add(4), i, 1..=3)?;
        let a = winding_number(&curve, &s, &qo)?.value;
        let b = winding_number(&curve.reversed(), &s, &qo)?.value;
        worst = worst.max((a + b).abs());
    }
    Ok(Check::at_most(
        "orientation_antisymmetry",
        worst,
        1e-9,
        format!("{count} random pairs"),
    ))
}

fn multiplicity(seed: u64, count: usize) -> Result<Check> {
    let qo = QuadratureOptions::default();
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let (curve, s) = random_pair(seed.wrapping_add(5), i, 1..=3)?;
        let a = winding_number(&curve, &s, &qo)?.value;
        let b = winding_number(&curve.scaled_multiplicities(3)?, &s, &qo)?.value;
        worst = worst.max((3.0 * a - b).abs());
    }
    Ok(Check::at_most(
        "multiplicity_linearity",
        worst,
        1e-9,
        format!("{count} random pairs, multiplicity 3"),
    ))
}

fn reduced_invariance(seed: u64, count: usize) -> Result<Check> {
    let qo = QuadratureOptions::default();
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let (curve, s) = random_pair(seed.wrapping_add(6), i, 1..=2)?;
        let base = reduced_winding(&curve, &s, &qo)?.value;
        let scaled = reduced_winding(&curve, &s.scaled(C64::new(-3.5, 0.25))?, &qo)?.value;
        let power = reduced_winding(&curve, &s.power(3)?, &qo)?.value;
        worst = worst.max((base - scaled).abs()).max((base - power).abs());
    }
    Ok(Check::at_most(
        "scaling_power_invariance",
        worst,
        1e-9,
        format!("{count} random pairs, scale and cube"),
    ))
}

fn gradient(seed: u64, count: usize) -> Result<Check> {
    let g = ParamCurve::circle_in_line(2, 0.8, 1)?;
    let mut rng = seeded_rng(seed.wrapping_add(7), 0);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let d = rng.gen_range(1..=2);
        let obj = WindingObjective::new(&g, d, 64)?;
        let c: Vec<C64> = (0..obj.len()).map(|_| complex_gaussian(&mut rng)).collect();
        for eps in [0.0, 0.3] {
            let (_, grad) = obj.surrogate(&c, eps);
            let h = 1e-6;
            for a in 0..obj.len() {
                for dir in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let mut p = c.clone();
                    p[a] += h * dir;
                    let mut m = c.clone();
                    m[a] -= h * dir;
                    let fd = (obj.surrogate(&p, eps).0 - obj.surrogate(&m, eps).0) / (2.0 * h);
                    let an = if dir.re == 1.0 { grad[a].re } else { grad[a].im };
                    worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
                }
            }
        }
    }
    Ok(Check::at_most(
        "gradient_vs_differences",
        worst,
        1e-5,
        format!("{count} random coefficient vectors"),
    ))
}

/// Trapezoid errors on an analytic integrand fall geometrically: each
/// doubling above the rounding floor must gain at least a factor 8, and 256
/// samples must reach 1e−12. The divisor of `z_0² + 0.9 z_1² + 0.5 z_0 z_2`
/// meets the line of the circle at `|w| ≈ 1.05`, so the rate is about
/// `1.5^{−m}`.
fn spectral() -> Result<Check> {
    let g = ParamCurve::circle_in_line(2, 0.7, 1)?;
    let one = C64::new(1.0, 0.0);
    let s = HomogeneousSection::from_terms(
        2,
        2,
        &[
            (one, vec![2, 0, 0]),
            (0.9 * one, vec![0, 2, 0]),
            (0.5 * one, vec![1, 0, 1]),
        ],
    )?;
    let comp = &g.components()[0];
    let d = s.degree() as f64;
    let f = |t: f64| {
        let (z, v) = comp.point_and_derivative(t);
        let n = norm(&z);
        let zh: Vec<C64> = z.iter().map(|c| c / n).collect();
        let vh: Vec<C64> = v.iter().map(|c| c / n).collect();
        let (val, der) = s.eval_along(&zh, &vh);
        dc_from_parts(val, der, &zh, &vh, d)
    };
    let reference = trapezoid_periodic(4096, f);
    let errs: Vec<f64> = [16usize, 32, 64, 128, 256]
        .iter()
        .map(|&m| (trapezoid_periodic(m, f) - reference).abs())
        .collect();
    let mut worst_ratio = 0.0f64;
    for w in errs.windows(2) {
        if w[0] > 1e-12 {
            worst_ratio = worst_ratio.max(w[1] / w[0]);
        }
    }
    let mut c = Check::at_most(
        "spectral_convergence",
        worst_ratio,
        0.125,
        format!(
            "errors at 16..256 samples: {}",
            errs.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(" ")
        ),
    );
    c.passed &= errs[errs.len() - 1] <= 1e-12;
    Ok(c)
}

/// Runs the full battery, or the reduced one when `quick` is set.
pub fn verify_suite(opts: &VerifyOptions) -> VerifyReport {
    let seed = opts.seed;
    let q = opts.quick;
    let pick = |full: usize, quick: usize| if q { quick } else { full };
    let checks = vec![
        run_check("circle_winding", circle_winding),
        run_check("winding_equals_linking", || winding_equals_linking(seed, pick(50, 8))),
        run_check("chain_independence", || chain_independence(seed, pick(20, 4))),
        run_check("necessity", || {
            necessity(
                seed,
                if q { opts.ensemble.min(100) } else { opts.ensemble },
                opts.max_degree,
            )
        }),
        run_check("minimal_mass", || minimal_mass(q)),
        run_check("uniqueness", || uniqueness(seed)),
        run_check("affine_relation", || affine(seed, pick(20, 5))),
        run_check("qpsh_defect", || defect(seed, pick(10_000, 1_000))),
        run_check("hull_calibration", || hull(q)),
        run_check("orientation_antisymmetry", || orientation(seed, pick(10, 3))),
        run_check("multiplicity_linearity", || multiplicity(seed, pick(10, 3))),
        run_check("scaling_power_invariance", || reduced_invariance(seed, pick(10, 3))),
        run_check("gradient_vs_differences", || gradient(seed, pick(10, 3))),
        run_check("spectral_convergence", spectral),
    ];
    VerifyReport::from_checks(checks)
}

/// Checks a user-supplied curve against a holomorphic chain it should bound:
/// the boundary matches, the mass bound holds over a random ensemble, and
/// the three forms of the reduced invariant agree.
pub fn verify_pair(
    curve: &ParamCurve,
    chain: &HoloChain,
    opts: &VerifyOptions,
    qopts: &QuadratureOptions,
    iopts: &IntersectionOptions,
) -> VerifyReport {
    let boundary = chain_boundary_check(chain, curve, 1e-6);
    let mut checks = vec![Check {
        name: "chain_boundary".into(),
        passed: boundary.matched,
        measured: Some(boundary.max_hausdorff),
        threshold: Some(1e-6),
        detail: format!("{} mismatches", boundary.mismatches.len()),
    }];
    if boundary.matched {
        checks.push(run_check("necessity", || {
            let ens = section_ensemble(
                curve.dimension(),
                1..=opts.max_degree,
                opts.ensemble,
                Weighting::Gaussian,
                opts.seed,
            )?;
            let r = necessity_check(curve, chain, &ens, 1e-5, qopts)?;
            Ok(Check::at_least(
                "necessity",
                r.min_reduced_winding,
                -r.mass - 1e-5,
                format!("mass {:.12}, {} skipped", r.mass, r.skipped),
            ))
        }));
    }
    checks.push(run_check("equivalences", || {
        let n = if opts.quick { 6 } else { 24 };
        let ens = section_ensemble(
            curve.dimension(),
            1..=3,
            n,
            Weighting::Gaussian,
            opts.seed.wrapping_add(1),
        )?;
        let r = cross_validate_equivalences(curve, &ens, opts.seed, qopts, iopts)?;
        Ok(Check::at_most(
            "equivalences",
            r.max_discrepancy,
            1e-6,
            format!("{} sections, {} skipped", r.entries.len(), r.skipped),
        ))
    }));
    VerifyReport::from_checks(checks)
}
