//! Winding and linking numbers of curves against divisors, chain masses and
//! the consistency checks relating them.
//!
//! The projective winding number `∫_Γ d^C log‖σ‖` is a curve integral; the
//! projective linking number `N•Z − ℓ ∫_N ω` needs a cobounding chain and a
//! root count. By Poincaré–Lelong they agree, which the test suite checks
//! rather than assumes.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curves::{chain_boundary_check, HoloChain, ParamChain2, ParamCurve, SurfacePatch};
use crate::error::{Error, Result};
use crate::fs::{dc_from_parts, norm, HomogeneousSection, C64};
use crate::quadrature::{periodic_adaptive, rectangle_adaptive, Refinement};

/// The divisor `Z = Div(σ)` of a section, of degree `ℓ = deg σ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Divisor {
    section: HomogeneousSection,
}

impl Divisor {
    pub fn new(section: HomogeneousSection) -> Self {
        Self { section }
    }

    pub fn section(&self) -> &HomogeneousSection {
        &self.section
    }

    pub fn degree(&self) -> u32 {
        self.section.degree()
    }
}

/// One root of `σ ∘ F` on a chain piece.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub piece: usize,
    /// Root in the piece's chart coordinates.
    pub chart: [f64; 2],
    pub sign: i32,
    pub multiplicity: i64,
    /// `|det J| / (|f_u0| |f_u1|)`, 1 for a conformal crossing.
    pub conditioning: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Doubling history, one entry per curve component or chain piece.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub quadrature: Vec<Refinement>,
    /// Smallest FS norm of the unit-coefficient section on the curve samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub intersections: Vec<Intersection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intersection_count: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_area: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A computed invariant with an a posteriori error bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub value: f64,
    pub error: f64,
    pub diagnostics: Diagnostics,
}

impl InvariantReport {
    fn scaled(mut self, factor: f64) -> Self {
        self.value *= factor;
        self.error *= factor.abs();
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureOptions {
    /// Minimum FS norm of the unit-coefficient section along the curve.
    pub clearance: f64,
    pub tol: f64,
    pub max_samples: usize,
    /// Tolerance of the tensor-product rule for chain areas.
    pub area_tol: f64,
    pub area_max_level: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            clearance: 1e-8,
            tol: 1e-11,
            max_samples: 1 << 18,
            area_tol: 1e-10,
            area_max_level: 7,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntersectionOptions {
    /// Newton seeds per chart axis.
    pub grid: usize,
    /// Roots closer than this in chart coordinates are merged.
    pub dedup: f64,
    /// Roots with conditioning below this are refused.
    pub transversality: f64,
    /// Grid doublings tried before giving up on the argument-principle count.
    pub refinements: usize,
}

impl Default for IntersectionOptions {
    fn default() -> Self {
        Self {
            grid: 64,
            dedup: 1e-7,
            transversality: 1e-6,
            refinements: 2,
        }
    }
}

fn check_dimension(curve_dim: usize, section: &HomogeneousSection) -> Result<()> {
    if section.dimension() != curve_dim {
        return Err(Error::DimensionMismatch {
            expected: curve_dim,
            found: section.dimension(),
        });
    }
    Ok(())
}

fn clearance_samples(curve: &ParamCurve, section: &HomogeneousSection) -> usize {
    let k = curve.components().iter().map(|c| c.max_frequency()).max().unwrap_or(1) as usize;
    (16 * k.max(1) * section.degree() as usize).clamp(256, 4096)
}

/// Smallest FS norm of `σ / |c|` over `m` samples per component, with the
/// component and parameter where it occurs.
pub fn curve_clearance(curve: &ParamCurve, section: &HomogeneousSection, m: usize) -> (f64, usize, f64) {
    let unit = section.unit();
    let d = section.degree() as i32;
    let mut best = (f64::INFINITY, 0, 0.0);
    for (ci, comp) in curve.components().iter().enumerate() {
        for i in 0..m {
            let t = TAU * i as f64 / m as f64;
            let z = comp.point(t);
            let v = unit.eval_unchecked(&z).norm() / norm(&z).powi(d);
            if v < best.0 {
                best = (v, ci, t);
            }
        }
    }
    best
}

/// Fails with `ZeroOnCurve` unless the divisor stays `clearance` away from Γ.
pub fn require_clearance(curve: &ParamCurve, section: &HomogeneousSection, clearance: f64) -> Result<f64> {
    let (min, component, t) = curve_clearance(curve, section, clearance_samples(curve, section));
    if !(min > clearance) {
        return Err(Error::ZeroOnCurve {
            component,
            t,
            min_norm: min,
        });
    }
    Ok(min)
}

/// `Wind(Γ, σ) = ∫_Γ d^C log‖σ‖`.
pub fn winding_number(
    curve: &ParamCurve,
    section: &HomogeneousSection,
    opts: &QuadratureOptions,
) -> Result<InvariantReport> {
    check_dimension(curve.dimension(), section)?;
    let clearance = require_clearance(curve, section, opts.clearance)?;
    let d = section.degree() as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut quadrature = Vec::new();
    for comp in curve.components() {
        let m0 = (8 * comp.max_frequency() as usize * section.degree() as usize)
            .next_power_of_two()
            .max(32);
        let res = periodic_adaptive(m0, opts.max_samples, opts.tol, |t| {
            let (z, v) = comp.point_and_derivative(t);
            let n = norm(&z);
            let zh: Vec<C64> = z.iter().map(|c| c / n).collect();
            let vh: Vec<C64> = v.iter().map(|c| c / n).collect();
            let (val, der) = section.eval_along(&zh, &vh);
            if val.norm() == 0.0 {
                return Err(Error::SingularPoint { norm: 0.0 });
            }
            Ok(dc_from_parts(val, der, &zh, &vh, d))
        })?;
        let mult = comp.multiplicity() as f64;
        value += mult * res.value;
        error += mult * res.error;
        quadrature.push(res.refinement);
    }
    Ok(InvariantReport {
        value,
        error,
        diagnostics: Diagnostics {
            quadrature,
            clearance: Some(clearance),
            ..Default::default()
        },
    })
}

/// `Wind(Γ, σ) / deg σ`.
pub fn reduced_winding(
    curve: &ParamCurve,
    section: &HomogeneousSection,
    opts: &QuadratureOptions,
) -> Result<InvariantReport> {
    let l = section.degree() as f64;
    Ok(winding_number(curve, section, opts)?.scaled(1.0 / l))
}

/// Signed root count of `σ ∘ F` on a chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionCount {
    pub count: i64,
    pub roots: Vec<Intersection>,
}

struct PieceCount {
    signed: i64,
    roots: Vec<Intersection>,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `f`, `∂f/∂u0`, `∂f/∂u1` and the scale `|c| ‖F‖^d` at a chart point.
fn chart_eval(patch: &SurfacePatch, section: &HomogeneousSection, u: [f64; 2]) -> (C64, C64, C64, f64) {
    let jet = patch.chart_jet(u);
    let (f, g) = section.eval_grad_unchecked(&jet.z);
    let scale = section.coefficient_norm() * norm(&jet.z).powi(section.degree() as i32);
    (f, dot(&g, &jet.d_s), dot(&g, &jet.d_t), scale)
}

fn newton(patch: &SurfacePatch, section: &HomogeneousSection, seed: [f64; 2]) -> Option<[f64; 2]> {
    let cap = 0.25 * patch.chart_scale();
    let mut u = seed;
    for _ in 0..60 {
        let (f, f0, f1, scale) = chart_eval(patch, section, u);
        let det = (f0.conj() * f1).im;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let mut d0 = -(f1.im * f.re - f1.re * f.im) / det;
        let mut d1 = -(-f0.im * f.re + f0.re * f.im) / det;
        let len = d0.hypot(d1);
        if len > cap {
            d0 *= cap / len;
            d1 *= cap / len;
        }
        u = patch.chart_normalize([u[0] + d0, u[1] + d1])?;
        if len < 1e-14 * patch.chart_scale() {
            let (f, ..) = chart_eval(patch, section, u);
            return (f.norm() <= 1e-10 * scale).then_some(u);
        }
    }
    let (f, _, _, scale) = chart_eval(patch, section, u);
    (f.norm() <= 1e-10 * scale).then_some(u)
}

/// Winding number of `t ↦ σ(F(s, t))` around zero.
fn edge_winding(patch: &SurfacePatch, section: &HomogeneousSection, s: f64) -> Result<i64> {
    let mut m = 256;
    loop {
        let vals: Vec<C64> = (0..=m)
            .map(|i| section.eval_unchecked(&patch.jet(s, TAU * i as f64 / m as f64).z))
            .collect();
        let mut total = 0.0;
        let mut coarse = false;
        for w in vals.windows(2) {
            if w[0].norm() == 0.0 || w[1].norm() == 0.0 {
                return Err(Error::SingularPoint { norm: 0.0 });
            }
            let step = (w[1] / w[0]).arg();
            if step.abs() > PI / 4.0 {
                coarse = true;
                break;
            }
            total += step;
        }
        if !coarse {
            return Ok((total / TAU).round() as i64);
        }
        if m >= 1 << 16 {
            return Err(Error::NotConverged {
                samples: m,
                last_change: f64::NAN,
            });
        }
        m *= 2;
    }
}

fn count_patch(
    index: usize,
    patch: &SurfacePatch,
    section: &HomogeneousSection,
    opts: &IntersectionOptions,
) -> Result<PieceCount> {
    // a piece inside the divisor has no isolated roots
    let mut peak = 0.0f64;
    for i in 0..=16 {
        for j in 0..16 {
            let s = i as f64 / 16.0;
            let jet = patch.jet(s, TAU * j as f64 / 16.0);
            let v = section.eval_unchecked(&jet.z).norm()
                / (section.coefficient_norm() * norm(&jet.z).powi(section.degree() as i32));
            peak = peak.max(v);
        }
    }
    if peak < 1e-12 {
        return Err(Error::NonTransversal {
            piece: index,
            u0: 0.5,
            u1: 0.0,
            reason: "the divisor contains the piece".into(),
        });
    }

    let outer = edge_winding(patch, section, 1.0)?;
    let inner = if patch.inner_edge_degenerate() {
        0
    } else {
        edge_winding(patch, section, 0.0)?
    };
    let expected = outer - inner;

    let mut grid = opts.grid;
    for attempt in 0..=opts.refinements {
        let seeds = patch.chart_seeds(grid);
        let found: Vec<Option<[f64; 2]>> = seeds.par_iter().map(|&u| newton(patch, section, u)).collect();
        let mut roots: Vec<[f64; 2]> = Vec::new();
        for u in found.into_iter().flatten() {
            if !roots.iter().any(|r| patch.chart_distance(*r, u) < opts.dedup) {
                roots.push(u);
            }
        }
        roots.sort_by(|a, b| a.partial_cmp(b).expect("finite chart coordinates"));
        let mut out = Vec::with_capacity(roots.len());
        let mut signed = 0i64;
        for u in roots {
            let (_, f0, f1, _) = chart_eval(patch, section, u);
            let det = (f0.conj() * f1).im;
            let cond = if f0.norm() * f1.norm() > 0.0 {
                det.abs() / (f0.norm() * f1.norm())
            } else {
                0.0
            };
            if !(cond >= opts.transversality) {
                return Err(Error::NonTransversal {
                    piece: index,
                    u0: u[0],
                    u1: u[1],
                    reason: format!("Jacobian conditioning {cond:.3e}"),
                });
            }
            let sign = if det > 0.0 { 1 } else { -1 };
            signed += sign as i64;
            out.push(Intersection {
                piece: index,
                chart: u,
                sign,
                multiplicity: 1,
                conditioning: cond,
            });
        }
        if signed == expected {
            return Ok(PieceCount { signed, roots: out });
        }
        if attempt == opts.refinements {
            return Err(Error::SeedExhaustion {
                piece: index,
                found: signed,
                expected,
            });
        }
        grid *= 2;
    }
    unreachable!("loop returns on its last attempt")
}

fn count_pieces<'a, I>(pieces: I, divisor: &Divisor, opts: &IntersectionOptions) -> Result<IntersectionCount>
where
    I: Iterator<Item = (&'a SurfacePatch, i64)>,
{
    let mut count = 0;
    let mut roots = Vec::new();
    for (k, (patch, mult)) in pieces.enumerate() {
        let pc = count_patch(k, patch, divisor.section(), opts)?;
        count += mult * pc.signed;
        roots.extend(pc.roots.into_iter().map(|mut r| {
            r.multiplicity = mult;
            r
        }));
    }
    Ok(IntersectionCount { count, roots })
}

/// `N • Z`: Newton roots of `σ ∘ F` from a seed grid, each signed by the
/// orientation of its Jacobian, cross-checked per piece against the
/// argument principle on the piece's boundary.
pub fn intersection_count(
    chain: &ParamChain2,
    divisor: &Divisor,
    opts: &IntersectionOptions,
) -> Result<IntersectionCount> {
    check_dimension(chain.dimension(), divisor.section())?;
    count_pieces(chain.pieces().iter().map(|p| (&p.patch, p.multiplicity)), divisor, opts)
}

/// `T • Z` for a holomorphic chain.
pub fn holo_intersection_count(
    chain: &HoloChain,
    divisor: &Divisor,
    opts: &IntersectionOptions,
) -> Result<IntersectionCount> {
    check_dimension(chain.dimension(), divisor.section())?;
    let patches: Vec<(SurfacePatch, i64)> = chain
        .pieces()
        .iter()
        .map(|p| (SurfacePatch::Holo(p.clone()), p.multiplicity() as i64))
        .collect();
    count_pieces(patches.iter().map(|(p, m)| (p, *m)), divisor, opts)
}

/// `∫_N ω` counted with multiplicities.
pub fn chain_area(chain: &ParamChain2, opts: &QuadratureOptions) -> Result<InvariantReport> {
    patches_area(chain.pieces().iter().map(|p| (&p.patch, p.multiplicity)), opts)
}

fn patches_area<'a, I>(pieces: I, opts: &QuadratureOptions) -> Result<InvariantReport>
where
    I: Iterator<Item = (&'a SurfacePatch, i64)>,
{
    let mut value = 0.0;
    let mut error = 0.0;
    let mut quadrature = Vec::new();
    for (patch, mult) in pieces {
        let res = rectangle_adaptive(opts.area_tol, opts.area_max_level, |s, t| Ok(patch.omega_density(s, t)))?;
        value += mult as f64 * res.value;
        error += mult.unsigned_abs() as f64 * res.error;
        quadrature.push(res.refinement);
    }
    Ok(InvariantReport {
        value,
        error,
        diagnostics: Diagnostics {
            quadrature,
            ..Default::default()
        },
    })
}

/// `Link(Γ, Z) = N • Z − ℓ ∫_N ω`.
pub fn projective_linking(
    curve: &ParamCurve,
    divisor: &Divisor,
    chain: &ParamChain2,
    qopts: &QuadratureOptions,
    iopts: &IntersectionOptions,
) -> Result<InvariantReport> {
    check_dimension(curve.dimension(), divisor.section())?;
    if chain.boundary() != curve {
        ParamChain2::new(chain.pieces().to_vec(), curve.clone())?;
    }
    let clearance = require_clearance(curve, divisor.section(), qopts.clearance)?;
    let count = intersection_count(chain, divisor, iopts)?;
    let area = chain_area(chain, qopts)?;
    let l = divisor.degree() as f64;
    Ok(InvariantReport {
        value: count.count as f64 - l * area.value,
        error: l * area.error,
        diagnostics: Diagnostics {
            quadrature: area.diagnostics.quadrature,
            clearance: Some(clearance),
            intersections: count.roots,
            intersection_count: Some(count.count),
            chain_area: Some(area.value),
            notes: Vec::new(),
        },
    })
}

pub fn reduced_linking(
    curve: &ParamCurve,
    divisor: &Divisor,
    chain: &ParamChain2,
    qopts: &QuadratureOptions,
    iopts: &IntersectionOptions,
) -> Result<InvariantReport> {
    let l = divisor.degree() as f64;
    Ok(projective_linking(curve, divisor, chain, qopts, iopts)?.scaled(1.0 / l))
}

/// Tolerance for the integrality of affine linking numbers.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Classical linking number of `Γ` with `Div(p)` in the affine chart
/// `{z_0 ≠ 0}`, where `p = σ / z_0^ℓ`: the winding of `p ∘ γ` about zero.
pub fn affine_linking(curve: &ParamCurve, section: &HomogeneousSection, opts: &QuadratureOptions) -> Result<i64> {
    check_dimension(curve.dimension(), section)?;
    require_clearance(curve, section, opts.clearance)?;
    let l = section.degree() as f64;
    let mut total = 0i64;
    for (ci, comp) in curve.components().iter().enumerate() {
        let (min0, t0) = (0..1024)
            .map(|i| {
                let t = TAU * i as f64 / 1024.0;
                let z = comp.point(t);
                (z[0].norm() / norm(&z), t)
            })
            .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a });
        if !(min0 > opts.clearance) {
            return Err(Error::Invalid(format!(
                "component {ci} meets the hyperplane at infinity near t = {t0:.6}"
            )));
        }
        let m0 = (8 * comp.max_frequency() as usize * section.degree() as usize)
            .next_power_of_two()
            .max(32);
        let res = periodic_adaptive(m0, opts.max_samples, opts.tol, |t| {
            let (z, v) = comp.point_and_derivative(t);
            let (val, der) = section.eval_along(&z, &v);
            Ok(((der / val).im - l * (v[0] / z[0]).im) / TAU)
        })?;
        let rounded = res.value.round();
        if (res.value - rounded).abs() > INTEGRALITY_TOL {
            return Err(Error::NonIntegral {
                value: res.value,
                tol: INTEGRALITY_TOL,
            });
        }
        total += comp.multiplicity() as i64 * rounded as i64;
    }
    Ok(total)
}

/// Terms of the relation `Link(Γ, Z) − ℓ Link(Γ, H_∞) = Link_aff(Γ, Z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineRelation {
    pub projective: f64,
    pub at_infinity: f64,
    pub affine: i64,
    pub residual: f64,
}

pub fn affine_relation(
    curve: &ParamCurve,
    section: &HomogeneousSection,
    opts: &QuadratureOptions,
) -> Result<AffineRelation> {
    let projective = winding_number(curve, section, opts)?.value;
    let h = HomogeneousSection::coordinate(curve.dimension(), 0);
    let at_infinity = winding_number(curve, &h, opts)?.value;
    let affine = affine_linking(curve, section, opts)?;
    let l = section.degree() as f64;
    Ok(AffineRelation {
        projective,
        at_infinity,
        affine,
        residual: projective - l * at_infinity - affine as f64,
    })
}

/// Mass `M(T) = Σ n_k ∫_{V_k} ω` of a positive holomorphic chain.
pub fn chain_mass(chain: &HoloChain, opts: &QuadratureOptions) -> Result<InvariantReport> {
    let patches: Vec<(SurfacePatch, i64)> = chain
        .pieces()
        .iter()
        .map(|p| (SurfacePatch::Holo(p.clone()), p.multiplicity() as i64))
        .collect();
    patches_area(patches.iter().map(|(p, m)| (p, *m)), opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub mass: f64,
    pub min_reduced_winding: f64,
    /// Index into the ensemble of the minimizing section.
    pub argmin: Option<usize>,
    /// `min_reduced_winding + mass`; nonnegative when the bound holds.
    pub slack: f64,
    pub holds: bool,
    /// Sections skipped because their divisor meets or grazes the curve.
    pub skipped: usize,
}

/// Checks `Wind~(Γ, σ) ≥ −M(T)` over an ensemble, given `∂T = Γ`.
pub fn necessity_check(
    curve: &ParamCurve,
    chain: &HoloChain,
    ensemble: &[HomogeneousSection],
    tol: f64,
    opts: &QuadratureOptions,
) -> Result<NecessityReport> {
    let boundary = chain_boundary_check(chain, curve, 1e-6);
    if !boundary.matched {
        return Err(Error::BoundaryMismatch(format!("{:?}", boundary.mismatches)));
    }
    let mass = chain_mass(chain, opts)?.value;
    let values: Vec<Result<f64>> = ensemble
        .par_iter()
        .map(|s| reduced_winding(curve, s, opts).map(|r| r.value))
        .collect();
    let mut min = f64::INFINITY;
    let mut argmin = None;
    let mut skipped = 0;
    for (i, v) in values.into_iter().enumerate() {
        match v {
            Ok(v) if v < min => {
                min = v;
                argmin = Some(i);
            }
            Ok(_) => {}
            Err(e) if e.is_graze() => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(NecessityReport {
        mass,
        min_reduced_winding: min,
        argmin,
        slack: min + mass,
        holds: min >= -mass - tol,
        skipped,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    /// `min_Z T•Z / deg Z` over the ensemble.
    pub value: f64,
    pub argmin: Option<usize>,
    pub per_divisor: Vec<f64>,
    /// A positive minimum does not certify a positive infimum.
    pub inconclusive: bool,
}

pub fn uniqueness_criterion(
    chain: &HoloChain,
    ensemble: &[Divisor],
    opts: &IntersectionOptions,
) -> Result<UniquenessReport> {
    // the boundary circles must avoid every divisor
    for (k, piece) in chain.pieces().iter().enumerate() {
        let mut radii = vec![piece.domain().outer()];
        if piece.domain().inner() > 0.0 {
            radii.push(piece.domain().inner());
        }
        for z in ensemble {
            let unit = z.section().unit();
            let d = z.degree() as i32;
            for &r in &radii {
                for i in 0..512 {
                    let t = TAU * i as f64 / 512.0;
                    let p = piece.circle_point(r, t);
                    let v = unit.eval_unchecked(&p).norm() / norm(&p).powi(d);
                    if !(v > 1e-8) {
                        return Err(Error::ZeroOnCurve {
                            component: k,
                            t,
                            min_norm: v,
                        });
                    }
                }
            }
        }
    }
    let per: Vec<Result<f64>> = ensemble
        .par_iter()
        .map(|z| holo_intersection_count(chain, z, opts).map(|c| c.count as f64 / z.degree() as f64))
        .collect();
    let per_divisor = per.into_iter().collect::<Result<Vec<f64>>>()?;
    let (value, argmin) =
        per_divisor.iter().enumerate().fold(
            (f64::INFINITY, None),
            |acc, (i, &v)| if v < acc.0 { (v, Some(i)) } else { acc },
        );
    Ok(UniquenessReport {
        value,
        argmin,
        inconclusive: value > 0.0,
        per_divisor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{basis, cone_chain, HoloPiece};
    use crate::fs::ProjPoint;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disk() -> HoloChain {
        HoloChain::new(
            2,
            vec![HoloPiece::linear_disk(&basis(2, 0), &basis(2, 1), 1.0, 1).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn circle_winding_in_p1() {
        let g = ParamCurve::circle_in_line(1, 1.0, 1).unwrap();
        let o = QuadratureOptions::default();
        let w1 = winding_number(&g, &HomogeneousSection::coordinate(1, 1), &o).unwrap();
        assert!((w1.value - 0.5).abs() < 1e-12, "{w1:?}");
        let w0 = winding_number(&g, &HomogeneousSection::coordinate(1, 0), &o).unwrap();
        assert!((w0.value + 0.5).abs() < 1e-12);
    }

    #[test]
    fn radius_r_winding() {
        let o = QuadratureOptions::default();
        for r in [0.5f64, 2.0] {
            let g = ParamCurve::circle_in_line(2, r, 1).unwrap();
            let w = winding_number(&g, &HomogeneousSection::coordinate(2, 0), &o).unwrap();
            assert!((w.value + r * r / (1.0 + r * r)).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_on_curve_is_refused() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let o = QuadratureOptions::default();
        let through = HomogeneousSection::linear(&[c(-1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!(matches!(
            winding_number(&g, &through, &o),
            Err(Error::ZeroOnCurve { .. })
        ));
        // z2 vanishes on the whole line containing the circle
        assert!(matches!(
            winding_number(&g, &HomogeneousSection::coordinate(2, 2), &o),
            Err(Error::ZeroOnCurve { .. })
        ));
    }

    #[test]
    fn intersections_on_disk() {
        let t = disk();
        let o = IntersectionOptions::default();
        let half = Divisor::new(HomogeneousSection::linear(&[c(-0.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap());
        let n = holo_intersection_count(&t, &half, &o).unwrap();
        assert_eq!(n.count, 1);
        assert!((n.roots[0].chart[0] - 0.5).abs() < 1e-12 && n.roots[0].chart[1].abs() < 1e-12);

        let rev = HoloChain::new(
            2,
            vec![HoloPiece::linear_disk(&basis(2, 0), &basis(2, 1), 1.0, 1)
                .unwrap()
                .with_reversed(true)],
        )
        .unwrap();
        assert_eq!(holo_intersection_count(&rev, &half, &o).unwrap().count, -1);

        let missing = Divisor::new(HomogeneousSection::coordinate(2, 0));
        assert_eq!(holo_intersection_count(&t, &missing, &o).unwrap().count, 0);
    }

    #[test]
    fn piece_inside_divisor_is_non_transversal() {
        let o = IntersectionOptions::default();
        let z2 = Divisor::new(HomogeneousSection::coordinate(2, 2));
        assert!(matches!(
            holo_intersection_count(&disk(), &z2, &o),
            Err(Error::NonTransversal { .. })
        ));
    }

    #[test]
    fn tangential_root_is_non_transversal() {
        // z1² − (1/4) z0² has a double root... use z1² on the disk: double zero at w = 0
        let o = IntersectionOptions::default();
        let sq = Divisor::new(HomogeneousSection::coordinate(2, 1).power(2).unwrap());
        let r = holo_intersection_count(&disk(), &sq, &o);
        assert!(
            matches!(r, Err(Error::NonTransversal { .. }) | Err(Error::SeedExhaustion { .. })),
            "{r:?}"
        );
    }

    #[test]
    fn linking_matches_winding_on_circle() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let n = disk().to_param_chain(&g).unwrap();
        let qo = QuadratureOptions::default();
        let io = IntersectionOptions::default();
        let a = c(0.3, -0.2);
        let s = HomogeneousSection::linear(&[-a, c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let link = projective_linking(&g, &Divisor::new(s.clone()), &n, &qo, &io).unwrap();
        assert!((link.value - 0.5).abs() < 1e-9);
        let wind = winding_number(&g, &s, &qo).unwrap();
        assert!((link.value - wind.value).abs() < 1e-9);

        let z0 = HomogeneousSection::coordinate(2, 0);
        let link = projective_linking(&g, &Divisor::new(z0), &n, &qo, &io).unwrap();
        assert!((link.value + 0.5).abs() < 1e-9);
    }

    #[test]
    fn linking_through_cone_with_random_apex() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let qo = QuadratureOptions::default();
        let io = IntersectionOptions::default();
        let s = HomogeneousSection::linear(&[c(0.2, 0.1), c(1.0, 0.0), c(0.7, -0.4)]).unwrap();
        let wind = winding_number(&g, &s, &qo).unwrap().value;
        for seed in [1, 2] {
            let n = cone_chain(&g, None, seed).unwrap();
            let link = projective_linking(&g, &Divisor::new(s.clone()), &n, &qo, &io).unwrap();
            assert!((link.value - wind).abs() < 1e-8, "{} vs {wind}", link.value);
        }
    }

    #[test]
    fn reduced_values_of_squares() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let qo = QuadratureOptions::default();
        let z0sq = HomogeneousSection::coordinate(2, 0).power(2).unwrap();
        assert!((reduced_winding(&g, &z0sq, &qo).unwrap().value + 0.5).abs() < 1e-10);
        assert!((winding_number(&g, &z0sq, &qo).unwrap().value + 1.0).abs() < 1e-10);
    }

    #[test]
    fn affine_linking_circle() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let qo = QuadratureOptions::default();
        let inside = HomogeneousSection::linear(&[c(-0.4, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(affine_linking(&g, &inside, &qo).unwrap(), 1);
        let outside = HomogeneousSection::linear(&[c(-1.5, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(affine_linking(&g, &outside, &qo).unwrap(), 0);
        let rel = affine_relation(&g, &inside, &qo).unwrap();
        assert!(rel.residual.abs() < 1e-9);
        assert!((rel.at_infinity + 0.5).abs() < 1e-10);
    }

    #[test]
    fn masses() {
        let qo = QuadratureOptions::default();
        assert!((chain_mass(&disk(), &qo).unwrap().value - 0.5).abs() < 1e-10);
        let line = HoloChain::full_line(&basis(2, 0), &basis(2, 1), 1).unwrap();
        assert!((chain_mass(&line, &qo).unwrap().value - 1.0).abs() < 1e-10);
        let triple = HoloChain::new(
            2,
            vec![HoloPiece::linear_disk(&basis(2, 0), &basis(2, 1), 1.0, 3).unwrap()],
        )
        .unwrap();
        assert!((chain_mass(&triple, &qo).unwrap().value - 1.5).abs() < 1e-10);
        let conic = HoloChain::new(
            2,
            vec![HoloPiece::new(
                2,
                vec![basis(2, 0), basis(2, 1), basis(2, 2)],
                crate::curves::PieceDomain::Disk { radius: 1.0 },
                1,
            )
            .unwrap()],
        )
        .unwrap();
        assert!((chain_mass(&conic, &qo).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn uniqueness_on_disk_and_line() {
        let io = IntersectionOptions::default();
        let ens = vec![
            Divisor::new(HomogeneousSection::linear(&[c(-0.3, 0.0), c(1.0, 0.0), c(0.0, 0.0)]).unwrap()),
            Divisor::new(HomogeneousSection::coordinate(2, 0)),
        ];
        let r = uniqueness_criterion(&disk(), &ens, &io).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(!r.inconclusive);
        let line = HoloChain::full_line(&basis(2, 0), &basis(2, 2), 1).unwrap();
        let t = disk().plus(&line).unwrap();
        let r = uniqueness_criterion(&t, &ens, &io).unwrap();
        assert!(r.value >= 1.0);
    }

    #[test]
    fn necessity_on_circle() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let qo = QuadratureOptions::default();
        let ens = crate::ensemble::section_ensemble(2, 1..=3, 40, crate::ensemble::Weighting::Gaussian, 1).unwrap();
        let r = necessity_check(&g, &disk(), &ens, 1e-6, &qo).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.min_reduced_winding >= -0.5 - 1e-6);
        let _ = ProjPoint::from_real(&[1.0, 0.0, 0.0]).unwrap();
    }
}
