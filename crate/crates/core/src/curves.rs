//! Closed curves, cobounding 2-chains and holomorphic chain pieces.
//!
//! A curve component is a trigonometric polynomial `γ(t) = Σ a_k e^{ikt}` with
//! values in `C^{n+1} \ {0}`, oriented by increasing `t`. Chains are
//! parameterized over `[0, 1] × [0, 2π)` with orientation `ds ∧ dt`, so the
//! edge `s = 1` traversed in increasing `t` is the positively oriented
//! boundary.

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::fs::{fs_distance, norm, omega_density, ProjPoint, SurfaceJet, TangentVector, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Resolution used when validating embeddedness and disjointness.
pub const EMBED_SAMPLES: usize = 256;
pub const EMBED_RESOLUTION: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FourierTerm {
    pub k: i32,
    pub coeff: Vec<C64>,
}

/// One closed component with a positive multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveComponent {
    dimension: usize,
    terms: Vec<FourierTerm>,
    multiplicity: u32,
}

impl CurveComponent {
    pub fn new(dimension: usize, terms: Vec<FourierTerm>, multiplicity: u32) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::Invalid("component multiplicity must be positive".into()));
        }
        if terms.is_empty() {
            return Err(Error::Invalid("component has no Fourier terms".into()));
        }
        for term in &terms {
            if term.coeff.len() != dimension + 1 {
                return Err(Error::DimensionMismatch {
                    expected: dimension + 1,
                    found: term.coeff.len(),
                });
            }
            if term.coeff.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
                return Err(Error::Invalid(format!(
                    "non-finite Fourier coefficient at k = {}",
                    term.k
                )));
            }
        }
        let mut merged: Vec<FourierTerm> = Vec::new();
        for term in terms {
            match merged.iter_mut().find(|m| m.k == term.k) {
                Some(m) => m.coeff.iter_mut().zip(&term.coeff).for_each(|(a, b)| *a += b),
                None => merged.push(term),
            }
        }
        merged.sort_by_key(|t| t.k);
        let comp = Self {
            dimension,
            terms: merged,
            multiplicity,
        };
        let (min_norm, at) = comp.min_norm(4 * EMBED_SAMPLES);
        if !(min_norm > 1e-12) {
            return Err(Error::Invalid(format!(
                "curve passes through the origin of C^{} near t = {at:.6}",
                dimension + 1
            )));
        }
        comp.check_embedded()?;
        Ok(comp)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn terms(&self) -> &[FourierTerm] {
        &self.terms
    }

    pub fn max_frequency(&self) -> u32 {
        self.terms.iter().map(|t| t.k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn point(&self, t: f64) -> Vec<C64> {
        let mut z = vec![ZERO; self.dimension + 1];
        for term in &self.terms {
            let e = C64::from_polar(1.0, term.k as f64 * t);
            z.iter_mut().zip(&term.coeff).for_each(|(zi, a)| *zi += a * e);
        }
        z
    }

    /// `γ(t)` and the exact derivative `γ'(t) = Σ i k a_k e^{ikt}`.
    pub fn point_and_derivative(&self, t: f64) -> (Vec<C64>, Vec<C64>) {
        let mut z = vec![ZERO; self.dimension + 1];
        let mut v = vec![ZERO; self.dimension + 1];
        for term in &self.terms {
            let e = C64::from_polar(1.0, term.k as f64 * t);
            let ik = C64::new(0.0, term.k as f64);
            for j in 0..=self.dimension {
                let a = term.coeff[j] * e;
                z[j] += a;
                v[j] += ik * a;
            }
        }
        (z, v)
    }

    pub fn min_norm(&self, samples: usize) -> (f64, f64) {
        (0..samples)
            .map(|i| {
                let t = TAU * i as f64 / samples as f64;
                (norm(&self.point(t)), t)
            })
            .fold((f64::INFINITY, 0.0), |acc, x| if x.0 < acc.0 { x } else { acc })
    }

    fn check_embedded(&self) -> Result<()> {
        let pts: Vec<Vec<C64>> = (0..EMBED_SAMPLES)
            .map(|i| self.point(TAU * i as f64 / EMBED_SAMPLES as f64))
            .collect();
        for i in 0..EMBED_SAMPLES {
            for j in i + 2..EMBED_SAMPLES {
                if i == 0 && j == EMBED_SAMPLES - 1 {
                    continue;
                }
                if fs_distance(&pts[i], &pts[j]) < EMBED_RESOLUTION {
                    return Err(Error::Invalid(format!(
                        "curve is not embedded: samples t = {:.6} and t = {:.6} coincide",
                        TAU * i as f64 / EMBED_SAMPLES as f64,
                        TAU * j as f64 / EMBED_SAMPLES as f64
                    )));
                }
            }
        }
        Ok(())
    }

    /// Same set traversed backwards: `t ↦ −t`.
    pub fn reversed(&self) -> Self {
        let mut terms: Vec<FourierTerm> = self
            .terms
            .iter()
            .map(|t| FourierTerm {
                k: -t.k,
                coeff: t.coeff.clone(),
            })
            .collect();
        terms.sort_by_key(|t| t.k);
        Self {
            dimension: self.dimension,
            terms,
            multiplicity: self.multiplicity,
        }
    }

    pub fn with_multiplicity(&self, multiplicity: u32) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::Invalid("component multiplicity must be positive".into()));
        }
        Ok(Self {
            multiplicity,
            ..self.clone()
        })
    }
}

/// An oriented closed curve `Γ = Σ m_k Γ_k` in `CP^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCurve {
    dimension: usize,
    components: Vec<CurveComponent>,
}

impl ParamCurve {
    pub fn new(dimension: usize, components: Vec<CurveComponent>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Invalid("projective dimension must be positive".into()));
        }
        for c in &components {
            if c.dimension != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: c.dimension,
                });
            }
        }
        let sampled: Vec<Vec<Vec<C64>>> = components
            .iter()
            .map(|c| {
                (0..EMBED_SAMPLES)
                    .map(|i| c.point(TAU * i as f64 / EMBED_SAMPLES as f64))
                    .collect()
            })
            .collect();
        for a in 0..components.len() {
            for b in a + 1..components.len() {
                for p in &sampled[a] {
                    for q in &sampled[b] {
                        if fs_distance(p, q) < EMBED_RESOLUTION {
                            return Err(Error::Invalid(format!(
                                "components {a} and {b} intersect at sampling resolution"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { dimension, components })
    }

    /// `t ↦ (1, r e^{it}, 0, …, 0)`: a circle of radius `r` in the affine
    /// chart of the line `{z_2 = … = z_n = 0}`.
    pub fn circle_in_line(dimension: usize, radius: f64, multiplicity: u32) -> Result<Self> {
        let mut a0 = vec![ZERO; dimension + 1];
        a0[0] = C64::new(1.0, 0.0);
        let mut a1 = vec![ZERO; dimension + 1];
        a1[1] = C64::new(radius, 0.0);
        let comp = CurveComponent::new(
            dimension,
            vec![FourierTerm { k: 0, coeff: a0 }, FourierTerm { k: 1, coeff: a1 }],
            multiplicity,
        )?;
        Self::new(dimension, vec![comp])
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn components(&self) -> &[CurveComponent] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn reversed(&self) -> Self {
        Self {
            dimension: self.dimension,
            components: self.components.iter().map(CurveComponent::reversed).collect(),
        }
    }

    /// Every multiplicity multiplied by `factor`.
    pub fn scaled_multiplicities(&self, factor: u32) -> Result<Self> {
        Ok(Self {
            dimension: self.dimension,
            components: self
                .components
                .iter()
                .map(|c| c.with_multiplicity(c.multiplicity * factor))
                .collect::<Result<_>>()?,
        })
    }
}

/// One sample of a curve.
#[derive(Clone, Debug)]
pub struct CurveSample {
    pub component: usize,
    pub t: f64,
    pub point: ProjPoint,
    pub tangent: TangentVector,
    pub multiplicity: u32,
}

/// `m` equispaced samples per component with exact derivatives.
pub fn sample_curve(curve: &ParamCurve, m: usize) -> Result<Vec<CurveSample>> {
    if m < 8 {
        return Err(Error::Invalid(format!("sample count must be at least 8, got {m}")));
    }
    let mut out = Vec::with_capacity(m * curve.components.len());
    for (ci, comp) in curve.components.iter().enumerate() {
        for i in 0..m {
            let t = TAU * i as f64 / m as f64;
            let (z, v) = comp.point_and_derivative(t);
            out.push(CurveSample {
                component: ci,
                t,
                point: ProjPoint::new(z.clone())?,
                tangent: TangentVector::new(z, v)?,
                multiplicity: comp.multiplicity,
            });
        }
    }
    Ok(out)
}

/// Domain of a holomorphic piece in the disk coordinate `w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceDomain {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

impl PieceDomain {
    pub fn inner(&self) -> f64 {
        match *self {
            PieceDomain::Disk { .. } => 0.0,
            PieceDomain::Annulus { inner, .. } => inner,
        }
    }

    pub fn outer(&self) -> f64 {
        match *self {
            PieceDomain::Disk { radius } => radius,
            PieceDomain::Annulus { outer, .. } => outer,
        }
    }
}

/// A holomorphic map `w ↦ Σ_j c_j w^j` from a disk or annulus into
/// `C^{n+1} \ {0}`, counted with a positive multiplicity.
///
/// With `reversed` set the piece is composed with `w ↦ w̄`, which flips its
/// orientation; such a piece is anti-holomorphic and only useful for
/// exercising orientation handling.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloPiece {
    dimension: usize,
    coeffs: Vec<Vec<C64>>,
    domain: PieceDomain,
    multiplicity: u32,
    reversed: bool,
}

impl HoloPiece {
    pub fn new(dimension: usize, coeffs: Vec<Vec<C64>>, domain: PieceDomain, multiplicity: u32) -> Result<Self> {
        if multiplicity == 0 {
            return Err(Error::Invalid("piece multiplicity must be positive".into()));
        }
        if coeffs.is_empty() {
            return Err(Error::Invalid("piece map has no coefficients".into()));
        }
        for c in &coeffs {
            if c.len() != dimension + 1 {
                return Err(Error::DimensionMismatch {
                    expected: dimension + 1,
                    found: c.len(),
                });
            }
        }
        match domain {
            PieceDomain::Disk { radius } if radius > 0.0 && radius.is_finite() => {}
            PieceDomain::Annulus { inner, outer } if inner > 0.0 && outer > inner && outer.is_finite() => {}
            _ => return Err(Error::Invalid(format!("invalid piece domain {domain:?}"))),
        }
        let piece = Self {
            dimension,
            coeffs,
            domain,
            multiplicity,
            reversed: false,
        };
        let (jets, _) = piece.grid_min_norm(64);
        if !(jets > 1e-12) {
            return Err(Error::Invalid("holomorphic piece passes through the origin".into()));
        }
        Ok(piece)
    }

    /// Unit disk in the affine line through `p` and `q`: `w ↦ p + w q`.
    pub fn linear_disk(p: &[C64], q: &[C64], radius: f64, multiplicity: u32) -> Result<Self> {
        Self::new(
            p.len() - 1,
            vec![p.to_vec(), q.to_vec()],
            PieceDomain::Disk { radius },
            multiplicity,
        )
    }

    pub fn with_reversed(mut self, reversed: bool) -> Self {
        self.reversed = reversed;
        self
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn multiplicity(&self) -> u32 {
        self.multiplicity
    }

    pub fn domain(&self) -> PieceDomain {
        self.domain
    }

    pub fn coefficients(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    /// `φ(w)` and `φ'(w)` by Horner's rule.
    pub fn map(&self, w: C64) -> (Vec<C64>, Vec<C64>) {
        let n = self.dimension + 1;
        let mut z = vec![ZERO; n];
        let mut dz = vec![ZERO; n];
        for c in self.coeffs.iter().rev() {
            for j in 0..n {
                dz[j] = dz[j] * w + z[j];
                z[j] = z[j] * w + c[j];
            }
        }
        (z, dz)
    }

    fn grid_min_norm(&self, g: usize) -> (f64, [f64; 2]) {
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=g {
            for j in 0..g {
                let s = i as f64 / g as f64;
                let t = TAU * j as f64 / g as f64;
                let n = norm(&self.jet(s, t).z);
                if n < best.0 {
                    best = (n, [s, t]);
                }
            }
        }
        best
    }

    fn radius_at(&self, s: f64) -> f64 {
        let (a, b) = (self.domain.inner(), self.domain.outer());
        a + s * (b - a)
    }

    pub fn jet(&self, s: f64, t: f64) -> SurfaceJet {
        let sign = if self.reversed { -1.0 } else { 1.0 };
        let r = self.radius_at(s);
        let e = C64::from_polar(1.0, sign * t);
        let (z, dz) = self.map(r * e);
        let dr = self.domain.outer() - self.domain.inner();
        SurfaceJet {
            d_s: dz.iter().map(|d| d * dr * e).collect(),
            d_t: dz.iter().map(|d| d * C64::new(0.0, sign * r) * e).collect(),
            z,
        }
    }

    /// Point on a boundary circle of radius `r`, in the piece's orientation.
    pub fn circle_point(&self, r: f64, t: f64) -> Vec<C64> {
        let sign = if self.reversed { -1.0 } else { 1.0 };
        self.map(C64::from_polar(r, sign * t)).0
    }

    /// Jet in the Cartesian chart `w = x + i y` (or `x − i y` when reversed).
    pub fn chart_jet(&self, x: f64, y: f64) -> SurfaceJet {
        let sign = if self.reversed { -1.0 } else { 1.0 };
        let (z, dz) = self.map(C64::new(x, sign * y));
        SurfaceJet {
            d_t: dz.iter().map(|d| d * C64::new(0.0, sign)).collect(),
            d_s: dz,
            z,
        }
    }
}

/// A parameterized real surface piece of a 2-chain.
#[derive(Clone, Debug)]
pub enum SurfacePatch {
    /// `F(s, t) = (1 − s) p + s γ(t)` in homogeneous coordinates.
    Cone { apex: Vec<C64>, curve: CurveComponent },
    /// A holomorphic (or reversed) polynomial disk or annulus.
    Holo(HoloPiece),
}

impl SurfacePatch {
    pub fn jet(&self, s: f64, t: f64) -> SurfaceJet {
        match self {
            SurfacePatch::Cone { apex, curve } => {
                let (g, dg) = curve.point_and_derivative(t);
                SurfaceJet {
                    z: apex.iter().zip(&g).map(|(p, q)| (1.0 - s) * p + s * q).collect(),
                    d_s: apex.iter().zip(&g).map(|(p, q)| q - p).collect(),
                    d_t: dg.iter().map(|d| s * d).collect(),
                }
            }
            SurfacePatch::Holo(piece) => piece.jet(s, t),
        }
    }

    /// Density of `F*ω` against `ds ∧ dt`.
    pub fn omega_density(&self, s: f64, t: f64) -> f64 {
        let j = self.jet(s, t);
        omega_density(&j.z, &j.d_s, &j.d_t)
    }

    /// Jet in the chart used for root finding. For cones the chart is
    /// `(s, t)` itself; for holomorphic pieces it is the Cartesian disk
    /// coordinate, which stays regular at the center.
    pub fn chart_jet(&self, u: [f64; 2]) -> SurfaceJet {
        match self {
            SurfacePatch::Cone { .. } => self.jet(u[0], u[1]),
            SurfacePatch::Holo(piece) => piece.chart_jet(u[0], u[1]),
        }
    }

    pub(crate) fn chart_seeds(&self, g: usize) -> Vec<[f64; 2]> {
        match self {
            SurfacePatch::Cone { .. } => (0..g)
                .flat_map(|i| (0..g).map(move |j| [(i as f64 + 0.5) / g as f64, TAU * (j as f64 + 0.5) / g as f64]))
                .collect(),
            SurfacePatch::Holo(piece) => {
                let (a, b) = (piece.domain.inner(), piece.domain.outer());
                (0..g)
                    .flat_map(|i| (0..g).map(move |j| (i, j)))
                    .filter_map(|(i, j)| {
                        let x = -b + 2.0 * b * (i as f64 + 0.5) / g as f64;
                        let y = -b + 2.0 * b * (j as f64 + 0.5) / g as f64;
                        let r = x.hypot(y);
                        (r > a && r < b).then_some([x, y])
                    })
                    .collect()
            }
        }
    }

    /// Wrap periodic coordinates; `None` when outside the open domain.
    pub(crate) fn chart_normalize(&self, u: [f64; 2]) -> Option<[f64; 2]> {
        match self {
            SurfacePatch::Cone { .. } => (u[0] > 0.0 && u[0] < 1.0).then(|| [u[0], u[1].rem_euclid(TAU)]),
            SurfacePatch::Holo(piece) => {
                let r = u[0].hypot(u[1]);
                let a = piece.domain.inner();
                ((r > a || a == 0.0) && r < piece.domain.outer()).then_some(u)
            }
        }
    }

    pub(crate) fn chart_distance(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        match self {
            SurfacePatch::Cone { .. } => {
                let dt = (a[1] - b[1]).rem_euclid(TAU);
                (a[0] - b[0]).hypot(dt.min(TAU - dt))
            }
            SurfacePatch::Holo(_) => (a[0] - b[0]).hypot(a[1] - b[1]),
        }
    }

    /// Typical size of the chart, used to cap Newton steps.
    pub(crate) fn chart_scale(&self) -> f64 {
        match self {
            SurfacePatch::Cone { .. } => 1.0,
            SurfacePatch::Holo(piece) => piece.domain.outer(),
        }
    }

    /// Whether the edge `s = 0` collapses to a single point.
    pub fn inner_edge_degenerate(&self) -> bool {
        match self {
            SurfacePatch::Cone { .. } => true,
            SurfacePatch::Holo(piece) => matches!(piece.domain, PieceDomain::Disk { .. }),
        }
    }

    /// Minimum of `‖F‖` on a `g × g` grid and where it occurs.
    pub fn grid_min_norm(&self, g: usize) -> (f64, [f64; 2]) {
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in 0..=g {
            for j in 0..g {
                let s = i as f64 / g as f64;
                let t = TAU * j as f64 / g as f64;
                let n = norm(&self.jet(s, t).z);
                if n < best.0 {
                    best = (n, [s, t]);
                }
            }
        }
        best
    }
}

#[derive(Clone, Debug)]
pub struct ChainPiece {
    pub patch: SurfacePatch,
    pub multiplicity: i64,
}

/// An oriented 2-chain `N` with `∂N = Γ`, one piece per boundary component.
#[derive(Clone, Debug)]
pub struct ParamChain2 {
    pieces: Vec<ChainPiece>,
    boundary: ParamCurve,
}

/// Pointwise tolerance (FS radians) for `F(1, t) = γ(t)`.
pub const BOUNDARY_TOL: f64 = 1e-9;

impl ParamChain2 {
    /// Validates `F(1, t) = γ_k(t)` pointwise, `F(0, ·)` a single point and
    /// matching multiplicities.
    pub fn new(pieces: Vec<ChainPiece>, boundary: ParamCurve) -> Result<Self> {
        if pieces.len() != boundary.components.len() {
            return Err(Error::BoundaryMismatch(format!(
                "{} pieces for {} boundary components",
                pieces.len(),
                boundary.components.len()
            )));
        }
        for (k, (piece, comp)) in pieces.iter().zip(&boundary.components).enumerate() {
            if piece.multiplicity != comp.multiplicity as i64 {
                return Err(Error::BoundaryMismatch(format!(
                    "piece {k} has multiplicity {} but its component has {}",
                    piece.multiplicity, comp.multiplicity
                )));
            }
            let origin = piece.patch.jet(0.0, 0.0).z;
            for i in 0..64 {
                let t = TAU * i as f64 / 64.0;
                let top = piece.patch.jet(1.0, t).z;
                let d = fs_distance(&top, &comp.point(t));
                if !(d <= BOUNDARY_TOL) {
                    return Err(Error::BoundaryMismatch(format!(
                        "piece {k}: F(1, {t:.4}) is {d:.3e} away from the curve"
                    )));
                }
                let bottom = piece.patch.jet(0.0, t).z;
                if !(fs_distance(&bottom, &origin) <= BOUNDARY_TOL) {
                    return Err(Error::BoundaryMismatch(format!(
                        "piece {k}: F(0, ·) is not a single point"
                    )));
                }
            }
            let (n, at) = piece.patch.grid_min_norm(64);
            if !(n > 1e-12) {
                return Err(Error::Invalid(format!(
                    "piece {k} hits the origin near (s, t) = ({:.4}, {:.4})",
                    at[0], at[1]
                )));
            }
        }
        Ok(Self { pieces, boundary })
    }

    pub fn pieces(&self) -> &[ChainPiece] {
        &self.pieces
    }

    pub fn boundary(&self) -> &ParamCurve {
        &self.boundary
    }

    pub fn dimension(&self) -> usize {
        self.boundary.dimension
    }
}

/// Grid resolution for the apex nonvanishing guard.
pub const APEX_GRID: usize = 256;
const APEX_RETRIES: usize = 64;

fn cone_min_norm(apex: &[C64], samples: &[Vec<C64>]) -> (f64, usize, usize) {
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..=APEX_GRID {
        let s = i as f64 / APEX_GRID as f64;
        for (j, g) in samples.iter().enumerate() {
            let n = apex
                .iter()
                .zip(g)
                .map(|(p, q)| ((1.0 - s) * p + s * q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            if n < best.0 {
                best = (n, i, j);
            }
        }
    }
    best
}

/// Homogeneous cone over `Γ` with the given apex, or an apex picked by
/// seeded random search so that `min ‖F‖ ≥ 0.1 · min ‖γ‖` on a 256×256 grid.
pub fn cone_chain(curve: &ParamCurve, apex: Option<&ProjPoint>, seed: u64) -> Result<ParamChain2> {
    if curve.is_empty() {
        return Err(Error::Invalid("cannot build a cone over an empty curve".into()));
    }
    let n = curve.dimension + 1;
    if let Some(p) = apex {
        if p.coords().len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.coords().len(),
            });
        }
    }
    let samples: Vec<Vec<Vec<C64>>> = curve
        .components
        .iter()
        .map(|c| {
            (0..APEX_GRID)
                .map(|j| c.point(TAU * j as f64 / APEX_GRID as f64))
                .collect()
        })
        .collect();
    let gamma_min = samples.iter().flatten().map(|z| norm(z)).fold(f64::INFINITY, f64::min);
    let gamma_mean =
        samples.iter().flatten().map(|z| norm(z)).sum::<f64>() / samples.iter().map(Vec::len).sum::<usize>() as f64;
    let bound = 0.1 * gamma_min;

    let check = |p: &[C64]| -> std::result::Result<(), Error> {
        for (k, s) in samples.iter().enumerate() {
            let (m, i, j) = cone_min_norm(p, s);
            if !(m >= bound) {
                return Err(Error::ApexRejected {
                    component: k,
                    s: i as f64 / APEX_GRID as f64,
                    t: TAU * j as f64 / APEX_GRID as f64,
                    norm: m,
                });
            }
        }
        Ok(())
    };

    let apex_coords: Vec<C64> = match apex {
        Some(p) => {
            check(p.coords())?;
            p.coords().to_vec()
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut last = None;
            let mut found = None;
            for _ in 0..APEX_RETRIES {
                let mut p: Vec<C64> = (0..n)
                    .map(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                    .collect();
                let pn = norm(&p);
                p.iter_mut().for_each(|c| *c *= gamma_mean / pn);
                match check(&p) {
                    Ok(()) => {
                        found = Some(p);
                        break;
                    }
                    Err(e) => last = Some(e),
                }
            }
            match found {
                Some(p) => p,
                None => return Err(last.expect("at least one apex candidate was tried")),
            }
        }
    };

    let pieces = curve
        .components
        .iter()
        .map(|c| ChainPiece {
            patch: SurfacePatch::Cone {
                apex: apex_coords.clone(),
                curve: c.clone(),
            },
            multiplicity: c.multiplicity as i64,
        })
        .collect();
    ParamChain2::new(pieces, curve.clone())
}

/// A positive holomorphic 1-chain `T = Σ n_k [V_k]` given by polynomial pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct HoloChain {
    dimension: usize,
    pieces: Vec<HoloPiece>,
}

impl HoloChain {
    pub fn new(dimension: usize, pieces: Vec<HoloPiece>) -> Result<Self> {
        for p in &pieces {
            if p.dimension != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: p.dimension,
                });
            }
        }
        Ok(Self { dimension, pieces })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn pieces(&self) -> &[HoloPiece] {
        &self.pieces
    }

    /// The sum of two chains.
    pub fn plus(&self, other: &HoloChain) -> Result<Self> {
        let mut pieces = self.pieces.clone();
        pieces.extend(other.pieces.iter().cloned());
        Self::new(self.dimension, pieces)
    }

    /// The projective line through `p` and `q` as two glued unit disks.
    pub fn full_line(p: &[C64], q: &[C64], multiplicity: u32) -> Result<Self> {
        let a = HoloPiece::linear_disk(p, q, 1.0, multiplicity)?;
        let b = HoloPiece::linear_disk(q, p, 1.0, multiplicity)?;
        Self::new(p.len() - 1, vec![a, b])
    }

    /// View as a cobounding chain of `curve` (disk pieces only, one per
    /// component, boundary matching pointwise).
    pub fn to_param_chain(&self, curve: &ParamCurve) -> Result<ParamChain2> {
        let pieces = self
            .pieces
            .iter()
            .map(|p| ChainPiece {
                patch: SurfacePatch::Holo(p.clone()),
                multiplicity: p.multiplicity as i64,
            })
            .collect();
        ParamChain2::new(pieces, curve.clone())
    }
}

/// Kinds of disagreement between `∂T` and `Γ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MismatchKind {
    /// Same set, opposite net orientation.
    Orientation,
    /// Same set and orientation sign, wrong weight.
    Multiplicity,
    /// A curve component with no boundary circle on it.
    Missing,
    /// A boundary circle that is not part of the curve.
    Extra,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryMismatch {
    pub kind: MismatchKind,
    pub component: Option<usize>,
    pub expected: i64,
    pub found: i64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BoundaryReport {
    pub matched: bool,
    /// Largest Hausdorff distance among matched circle pairs (FS radians).
    pub max_hausdorff: f64,
    pub mismatches: Vec<BoundaryMismatch>,
}

#[derive(Clone, Copy)]
enum LoopRef<'a> {
    Piece(&'a HoloPiece, f64),
    Component(&'a CurveComponent),
}

impl LoopRef<'_> {
    fn point(&self, t: f64) -> Vec<C64> {
        match self {
            LoopRef::Piece(p, r) => p.circle_point(*r, t),
            LoopRef::Component(c) => c.point(t),
        }
    }
}

const LOOP_SAMPLES: usize = 512;

struct SampledLoop<'a> {
    source: LoopRef<'a>,
    points: Vec<Vec<C64>>,
    spacing: f64,
}

impl<'a> SampledLoop<'a> {
    fn new(source: LoopRef<'a>) -> Self {
        let points: Vec<Vec<C64>> = (0..LOOP_SAMPLES)
            .map(|i| source.point(TAU * i as f64 / LOOP_SAMPLES as f64))
            .collect();
        let spacing = (0..LOOP_SAMPLES)
            .map(|i| fs_distance(&points[i], &points[(i + 1) % LOOP_SAMPLES]))
            .fold(0.0, f64::max);
        Self {
            source,
            points,
            spacing,
        }
    }
}

/// Directed Hausdorff distance from `a` to `b`, refined by golden-section
/// search around the nearest sample, plus the covering degree of `a`
/// relative to `b` read off the nearest-index walk.
fn directed_match(a: &SampledLoop, b: &SampledLoop, tol: f64) -> Option<(f64, i64)> {
    let m = LOOP_SAMPLES;
    let coarse_cut = tol + 2.0 * b.spacing + 1e-12;
    let mut nearest = Vec::with_capacity(m);
    let mut worst = 0.0f64;
    for p in &a.points {
        let (j, d) = b
            .points
            .iter()
            .enumerate()
            .map(|(j, q)| (j, fs_distance(p, q)))
            .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        if d > coarse_cut {
            return None;
        }
        let h = TAU / m as f64;
        let t0 = h * j as f64;
        let refined = golden_min(t0 - h, t0 + h, |t| fs_distance(p, &b.source.point(t)));
        worst = worst.max(refined.min(d));
        nearest.push(j as i64);
    }
    let mut walk = 0i64;
    for i in 0..m {
        let mut step = nearest[(i + 1) % m] - nearest[i];
        let half = m as i64 / 2;
        if step > half {
            step -= m as i64;
        } else if step < -half {
            step += m as i64;
        }
        walk += step;
    }
    let degree = (walk as f64 / m as f64).round() as i64;
    Some((worst, degree))
}

fn golden_min<F: Fn(f64) -> f64>(mut lo: f64, mut hi: f64, f: F) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..60 {
        if f1 < f2 {
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
    f1.min(f2)
}

fn loops_match(a: &SampledLoop, b: &SampledLoop, tol: f64) -> Option<(f64, i64)> {
    let (dab, deg) = directed_match(a, b, tol)?;
    let (dba, _) = directed_match(b, a, tol)?;
    let h = dab.max(dba);
    (h <= tol).then_some((h, deg))
}

/// Compare the oriented boundary of `T` (with multiplicities, seams between
/// pieces cancelled) against `Γ`, up to Hausdorff distance `tol`.
pub fn chain_boundary_check(chain: &HoloChain, curve: &ParamCurve, tol: f64) -> BoundaryReport {
    struct Cluster<'a> {
        rep: SampledLoop<'a>,
        weight: i64,
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut max_h = 0.0f64;
    for piece in &chain.pieces {
        let m = piece.multiplicity as i64;
        let mut loops = vec![(piece.domain.outer(), m)];
        if let PieceDomain::Annulus { inner, .. } = piece.domain {
            loops.push((inner, -m));
        }
        for (r, w) in loops {
            let sl = SampledLoop::new(LoopRef::Piece(piece, r));
            let mut placed = false;
            for c in clusters.iter_mut() {
                if let Some((h, deg)) = loops_match(&sl, &c.rep, tol) {
                    max_h = max_h.max(h);
                    c.weight += w * deg;
                    placed = true;
                    break;
                }
            }
            if !placed {
                clusters.push(Cluster { rep: sl, weight: w });
            }
        }
    }

    let mut mismatches = Vec::new();
    let mut used = vec![false; clusters.len()];
    for (ci, comp) in curve.components.iter().enumerate() {
        let sl = SampledLoop::new(LoopRef::Component(comp));
        let expected = comp.multiplicity as i64;
        let hit = clusters
            .iter()
            .enumerate()
            .find_map(|(k, c)| loops_match(&sl, &c.rep, tol).map(|(h, deg)| (k, h, deg)));
        match hit {
            None => mismatches.push(BoundaryMismatch {
                kind: MismatchKind::Missing,
                component: Some(ci),
                expected,
                found: 0,
            }),
            Some((k, h, deg)) => {
                used[k] = true;
                max_h = max_h.max(h);
                // weight of T's boundary measured in the component's orientation
                let found = clusters[k].weight * deg;
                if found != expected {
                    let kind = if found == -expected {
                        MismatchKind::Orientation
                    } else {
                        MismatchKind::Multiplicity
                    };
                    mismatches.push(BoundaryMismatch {
                        kind,
                        component: Some(ci),
                        expected,
                        found,
                    });
                }
            }
        }
    }
    for (k, c) in clusters.iter().enumerate() {
        if !used[k] && c.weight != 0 {
            mismatches.push(BoundaryMismatch {
                kind: MismatchKind::Extra,
                component: None,
                expected: 0,
                found: c.weight,
            });
        }
    }
    BoundaryReport {
        matched: mismatches.is_empty(),
        max_hausdorff: max_h,
        mismatches,
    }
}

/// Unit vector in direction `index` of `C^{n+1}`.
pub fn basis(dimension: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dimension + 1];
    v[index] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::quadrature::gauss_legendre;
    use rand::Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn unit_disk_line() -> HoloChain {
        let piece = HoloPiece::linear_disk(&basis(2, 0), &basis(2, 1), 1.0, 1).unwrap();
        HoloChain::new(2, vec![piece]).unwrap()
    }

    #[test]
    fn sample_circle() {
        let g = ParamCurve::circle_in_line(1, 1.0, 1).unwrap();
        let s = sample_curve(&g, 8).unwrap();
        assert_eq!(s.len(), 8);
        let q = &s[2];
        assert!((q.t - PI / 2.0).abs() < 1e-15);
        assert!((q.tangent.vector[1] - c(0.0, 1.0) * C64::from_polar(1.0, q.t)).norm() < 1e-15);
        assert!(q.tangent.vector[0].norm() < 1e-15);
        assert!(sample_curve(&g, 4).is_err());
    }

    #[test]
    fn sample_multiplicity_and_empty() {
        let g = ParamCurve::circle_in_line(2, 1.0, 2).unwrap();
        assert!(sample_curve(&g, 16).unwrap().iter().all(|s| s.multiplicity == 2));
        let empty = ParamCurve::new(2, vec![]).unwrap();
        assert!(sample_curve(&empty, 16).unwrap().is_empty());
    }

    #[test]
    fn derivative_converges_at_second_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let terms: Vec<FourierTerm> = (-2..=2)
            .map(|k| FourierTerm {
                k,
                coeff: (0..3)
                    .map(|j| {
                        let base = if k == 0 && j == 0 { 3.0 } else { 0.0 };
                        c(base + rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))
                    })
                    .collect(),
            })
            .collect();
        let comp = CurveComponent::new(2, terms, 1).unwrap();
        let t = 0.37;
        let (_, exact) = comp.point_and_derivative(t);
        let err = |h: f64| {
            let a = comp.point(t + h);
            let b = comp.point(t - h);
            norm(
                &exact
                    .iter()
                    .zip(a.iter().zip(&b))
                    .map(|(e, (p, q))| e - (p - q) / (2.0 * h))
                    .collect::<Vec<_>>(),
            )
        };
        let (e1, e2) = (err(1e-4), err(5e-5));
        let order = (e1 / e2).ln() / 2f64.ln();
        assert!(order >= 1.9, "order {order}");
    }

    #[test]
    fn non_embedded_and_degenerate_components_rejected() {
        let double = CurveComponent::new(
            1,
            vec![
                FourierTerm {
                    k: 0,
                    coeff: basis(1, 0),
                },
                FourierTerm {
                    k: 2,
                    coeff: basis(1, 1),
                },
            ],
            1,
        );
        assert!(double.is_err());
        let through_origin = CurveComponent::new(
            1,
            vec![
                FourierTerm {
                    k: 0,
                    coeff: vec![c(1.0, 0.0), c(0.0, 0.0)],
                },
                FourierTerm {
                    k: 1,
                    coeff: vec![c(1.0, 0.0), c(0.0, 0.0)],
                },
            ],
            1,
        );
        assert!(through_origin.is_err());
    }

    #[test]
    fn overlapping_components_rejected() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let comp = g.components()[0].clone();
        assert!(ParamCurve::new(2, vec![comp.clone(), comp.reversed()]).is_err());
    }

    #[test]
    fn explicit_cone_over_line_circle() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let apex = ProjPoint::new(basis(2, 0)).unwrap();
        let n = cone_chain(&g, Some(&apex), 0).unwrap();
        let jet = n.pieces()[0].patch.jet(0.3, 1.1);
        let expect = [c(1.0, 0.0), 0.3 * C64::from_polar(1.0, 1.1), c(0.0, 0.0)];
        assert!(jet.z.iter().zip(&expect).all(|(a, b)| (a - b).norm() < 1e-15));
    }

    #[test]
    fn cone_boundary_restriction_is_exact() {
        let g = ParamCurve::circle_in_line(3, 0.7, 1).unwrap();
        let n = cone_chain(&g, None, 17).unwrap();
        for i in 0..100 {
            let t = TAU * i as f64 / 100.0;
            let top = n.pieces()[0].patch.jet(1.0, t).z;
            let gam = g.components()[0].point(t);
            assert!(top.iter().zip(&gam).all(|(a, b)| (a - b).norm() <= 1e-14));
        }
    }

    #[test]
    fn cone_grid_guard() {
        let g = ParamCurve::circle_in_line(2, 1.3, 1).unwrap();
        let n = cone_chain(&g, None, 3).unwrap();
        let (m, _) = n.pieces()[0].patch.grid_min_norm(256);
        let gmin = g.components()[0].min_norm(1024).0;
        assert!(m >= 0.1 * gmin);
    }

    #[test]
    fn apex_on_curve_accepted_antipodal_rejected() {
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let on = ProjPoint::new(g.components()[0].point(0.0)).unwrap();
        assert!(cone_chain(&g, Some(&on), 0).is_ok());
        let anti = ProjPoint::new(g.components()[0].point(0.0).iter().map(|x| -x).collect()).unwrap();
        match cone_chain(&g, Some(&anti), 0) {
            Err(Error::ApexRejected { s, t, .. }) => {
                assert!((s - 0.5).abs() < 1e-12);
                assert!(t.abs() < 1e-12);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn cone_over_empty_curve_fails() {
        let empty = ParamCurve::new(2, vec![]).unwrap();
        assert!(cone_chain(&empty, None, 0).is_err());
    }

    /// ∫_N dα = ∫_Γ α for α = Re(P(z, z̄) dz_0) with random polynomial P.
    #[test]
    fn cone_satisfies_stokes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let terms: Vec<FourierTerm> = (-1..=2)
            .map(|k| FourierTerm {
                k,
                coeff: (0..3)
                    .map(|j| {
                        let base = if k == 0 && j == 0 { 2.0 } else { 0.0 };
                        c(base + rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4))
                    })
                    .collect(),
            })
            .collect();
        let g = ParamCurve::new(2, vec![CurveComponent::new(2, terms, 1).unwrap()]).unwrap();
        let n = cone_chain(&g, None, 5).unwrap();
        let patch = &n.pieces()[0].patch;
        for _ in 0..5 {
            // P = a·z_1 z̄_2 + b·z_0 z̄_1 + e·z_2
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let b = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let e = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let p = |z: &[C64]| a * z[1] * z[2].conj() + b * z[0] * z[1].conj() + e * z[2];
            // holomorphic and antiholomorphic partials
            let dp = |z: &[C64]| -> (Vec<C64>, Vec<C64>) {
                (
                    vec![b * z[1].conj(), a * z[2].conj(), e],
                    vec![c(0.0, 0.0), b * z[0], a * z[1]],
                )
            };
            let boundary = crate::quadrature::trapezoid_periodic(256, |t| {
                let (z, v) = g.components()[0].point_and_derivative(t);
                (p(&z) * v[0]).re
            });
            let (x, w) = gauss_legendre(40);
            let mut interior = 0.0;
            for (xi, wi) in x.iter().zip(&w) {
                let s = 0.5 * (xi + 1.0);
                interior += 0.5
                    * wi
                    * crate::quadrature::trapezoid_periodic(256, |t| {
                        let j = patch.jet(s, t);
                        let (hol, anti) = dp(&j.z);
                        let mut acc = c(0.0, 0.0);
                        for k in 0..3 {
                            acc += hol[k] * (j.d_s[k] * j.d_t[0] - j.d_t[k] * j.d_s[0]);
                            acc += anti[k] * (j.d_s[k].conj() * j.d_t[0] - j.d_t[k].conj() * j.d_s[0]);
                        }
                        acc.re
                    });
            }
            assert!((interior - boundary).abs() < 1e-6, "{interior} vs {boundary}");
        }
    }

    #[test]
    fn holo_disk_boundary_matches_circle() {
        let t = unit_disk_line();
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let r = chain_boundary_check(&t, &g, 1e-6);
        assert!(r.matched, "{r:?}");
        assert!(r.max_hausdorff < 1e-9);
    }

    #[test]
    fn holo_boundary_orientation_mismatch() {
        let t = unit_disk_line();
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap().reversed();
        let r = chain_boundary_check(&t, &g, 1e-6);
        assert!(!r.matched);
        assert_eq!(r.mismatches[0].kind, MismatchKind::Orientation);
    }

    #[test]
    fn holo_boundary_multiplicity_mismatch() {
        let piece = HoloPiece::linear_disk(&basis(2, 0), &basis(2, 1), 1.0, 2).unwrap();
        let t = HoloChain::new(2, vec![piece]).unwrap();
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        let r = chain_boundary_check(&t, &g, 1e-6);
        assert_eq!(r.mismatches.len(), 1);
        assert_eq!(r.mismatches[0].kind, MismatchKind::Multiplicity);
        assert_eq!(r.mismatches[0].found, 2);
    }

    #[test]
    fn full_line_has_no_boundary() {
        let line = HoloChain::full_line(&basis(2, 0), &basis(2, 2), 1).unwrap();
        let empty = ParamCurve::new(2, vec![]).unwrap();
        assert!(chain_boundary_check(&line, &empty, 1e-6).matched);
        let t = unit_disk_line().plus(&line).unwrap();
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        assert!(chain_boundary_check(&t, &g, 1e-6).matched);
    }

    #[test]
    fn missing_and_extra_circles() {
        let t = unit_disk_line();
        let g = ParamCurve::circle_in_line(2, 0.5, 1).unwrap();
        let r = chain_boundary_check(&t, &g, 1e-6);
        let kinds: Vec<_> = r.mismatches.iter().map(|m| m.kind).collect();
        assert!(kinds.contains(&MismatchKind::Missing));
        assert!(kinds.contains(&MismatchKind::Extra));
    }

    #[test]
    fn annulus_inner_boundary_counts_negatively() {
        let ann = HoloPiece::new(
            2,
            vec![basis(2, 0), basis(2, 1)],
            PieceDomain::Annulus { inner: 0.5, outer: 1.0 },
            1,
        )
        .unwrap();
        let inner = HoloPiece::linear_disk(&basis(2, 0), &basis(2, 1), 0.5, 1).unwrap();
        let t = HoloChain::new(2, vec![ann, inner]).unwrap();
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        assert!(chain_boundary_check(&t, &g, 1e-6).matched);
    }

    #[test]
    fn param_chain_rejects_wrong_boundary() {
        let t = unit_disk_line();
        let g = ParamCurve::circle_in_line(2, 0.9, 1).unwrap();
        assert!(matches!(t.to_param_chain(&g), Err(Error::BoundaryMismatch(_))));
        let g = ParamCurve::circle_in_line(2, 1.0, 1).unwrap();
        assert!(t.to_param_chain(&g).is_ok());
    }
}
