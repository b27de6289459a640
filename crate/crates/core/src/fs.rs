//! Homogeneous-coordinate geometry of `CP^n` with the Fubini–Study metric.
//!
//! Points are nonzero vectors in `C^{n+1}` up to scale, sections of `O(d)` are
//! homogeneous polynomials of degree `d` stored in a monomial basis, and the
//! two differential forms every integral in the crate reduces to live here:
//!
//! * the Kähler form `ω = (i/2π) ∂∂̄ log‖z‖²`, normalized so a projective line
//!   has area one, and
//! * the 1-form `d^C log‖σ‖` with `d^C = (i/2π)(∂̄ − ∂)`.
//!
//! In homogeneous coordinates, for a real function `u` and a tangent vector
//! `v`, `d^C u(v) = (1/π) Im(Σ_j ∂u/∂z_j · v_j)`. With
//! `log‖σ‖ = log|σ(z)| − (d/2) log‖z‖²` this gives
//!
//! ```text
//! d^C log‖σ‖(v) = (1/2π) Im( ∇σ(z)·v / σ(z) − d ⟨v, z⟩ / ‖z‖² )
//! ```
//!
//! The sign is pinned by the unit circle in `CP^1`: integrating the form for
//! `σ = z₁` around `(1, e^{it})` gives `+1/2` (one enclosed zero minus the
//! disk area `1/2`). `tests::dc_sign_on_unit_circle` guards it.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

pub(crate) fn norm_sqr(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

pub(crate) fn norm(z: &[C64]) -> f64 {
    norm_sqr(z).sqrt()
}

/// Hermitian product `⟨a, b⟩ = Σ a_j conj(b_j)`.
pub(crate) fn hdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

/// Fubini–Study geodesic distance between the lines spanned by `z` and `w`,
/// in radians (diameter of `CP^n` is π/2).
pub fn fs_distance(z: &[C64], w: &[C64]) -> f64 {
    let nz = norm(z);
    let nw = norm(w);
    let c: C64 = hdot(w, z) / (nz * nw);
    let perp = w
        .iter()
        .zip(z)
        .map(|(wi, zi)| (wi / nw - c * zi / nz).norm_sqr())
        .sum::<f64>()
        .sqrt();
    perp.atan2(c.norm())
}

/// A point of `CP^n`, stored as a homogeneous representative.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjPoint {
    homogeneous: Vec<C64>,
    normalized: bool,
}

impl ProjPoint {
    pub fn new(homogeneous: Vec<C64>) -> Result<Self> {
        if homogeneous.len() < 2 {
            return Err(Error::Invalid(
                "a projective point needs at least two homogeneous coordinates".into(),
            ));
        }
        let n = norm(&homogeneous);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Invalid(
                "homogeneous coordinates must be finite and not all zero".into(),
            ));
        }
        Ok(Self {
            homogeneous,
            normalized: false,
        })
    }

    /// Point `[1 : w_1 : … : w_n]` of the standard affine chart.
    pub fn affine(w: &[C64]) -> Self {
        let mut z = Vec::with_capacity(w.len() + 1);
        z.push(C64::new(1.0, 0.0));
        z.extend_from_slice(w);
        Self {
            homogeneous: z,
            normalized: false,
        }
    }

    pub fn from_real(coords: &[f64]) -> Result<Self> {
        Self::new(coords.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dimension(&self) -> usize {
        self.homogeneous.len() - 1
    }

    pub fn coords(&self) -> &[C64] {
        &self.homogeneous
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Representative of unit Euclidean norm.
    pub fn normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let n = norm(&self.homogeneous);
        Self {
            homogeneous: self.homogeneous.iter().map(|c| c / n).collect(),
            normalized: true,
        }
    }

    pub fn distance(&self, other: &ProjPoint) -> f64 {
        fs_distance(&self.homogeneous, &other.homogeneous)
    }

    /// Same line in `C^{n+1}` up to `tol` in the Fubini–Study metric.
    pub fn equivalent(&self, other: &ProjPoint, tol: f64) -> bool {
        self.homogeneous.len() == other.homogeneous.len() && self.distance(other) <= tol
    }
}

impl PartialEq for ProjPoint {
    fn eq(&self, other: &Self) -> bool {
        self.equivalent(other, 1e-12)
    }
}

/// Exponent vectors of all monomials of degree `d` in `n + 1` variables.
///
/// Order: lexicographic with the exponent of `z_0` descending first, then
/// `z_1`, and so on. For `n = 1, d = 2` this is `z0², z0 z1, z1²`; for
/// `n = 2, d = 1` it is `z0, z1, z2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialTable {
    vars: usize,
    degree: u32,
    exps: Vec<u32>,
}

impl MonomialTable {
    pub fn new(dimension: usize, degree: u32) -> Self {
        let vars = dimension + 1;
        let mut exps = Vec::with_capacity(vars * binomial(dimension + degree as usize, degree as usize));
        let mut current = vec![0u32; vars];
        fill_exponents(&mut exps, &mut current, 0, degree);
        Self { vars, degree, exps }
    }

    pub fn len(&self) -> usize {
        self.exps.len() / self.vars
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn exponent(&self, index: usize) -> &[u32] {
        &self.exps[index * self.vars..(index + 1) * self.vars]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.exps.chunks_exact(self.vars)
    }

    /// Index of the monomial with the given exponents.
    pub fn position(&self, exponent: &[u32]) -> Option<usize> {
        self.iter().position(|e| e == exponent)
    }

    fn powers(&self, z: &[C64]) -> Vec<C64> {
        // pw[j * (d + 1) + e] = z_j^e
        let stride = self.degree as usize + 1;
        let mut pw = vec![C64::new(1.0, 0.0); self.vars * stride];
        for (j, zj) in z.iter().enumerate() {
            for e in 1..stride {
                pw[j * stride + e] = pw[j * stride + e - 1] * zj;
            }
        }
        pw
    }

    /// Values of every monomial at `z`.
    pub fn values(&self, z: &[C64]) -> Vec<C64> {
        let stride = self.degree as usize + 1;
        let pw = self.powers(z);
        self.iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(j, &k)| pw[j * stride + k as usize])
                    .product()
            })
            .collect()
    }

    /// Values of every monomial at `z` together with their derivatives along `v`.
    pub fn values_and_derivatives(&self, z: &[C64], v: &[C64]) -> (Vec<C64>, Vec<C64>) {
        let stride = self.degree as usize + 1;
        let pw = self.powers(z);
        let mut vals = Vec::with_capacity(self.len());
        let mut ders = Vec::with_capacity(self.len());
        for e in self.iter() {
            let mut val = C64::new(1.0, 0.0);
            for (j, &k) in e.iter().enumerate() {
                val *= pw[j * stride + k as usize];
            }
            let mut der = C64::new(0.0, 0.0);
            for (j, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut term = v[j] * k as f64 * pw[j * stride + k as usize - 1];
                for (i, &ki) in e.iter().enumerate() {
                    if i != j {
                        term *= pw[i * stride + ki as usize];
                    }
                }
                der += term;
            }
            vals.push(val);
            ders.push(der);
        }
        (vals, ders)
    }
}

fn fill_exponents(out: &mut Vec<u32>, current: &mut [u32], var: usize, remaining: u32) {
    if var + 1 == current.len() {
        current[var] = remaining;
        out.extend_from_slice(current);
        return;
    }
    for k in (0..=remaining).rev() {
        current[var] = k;
        fill_exponents(out, current, var + 1, remaining - k);
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// A section of `O(d)` over `CP^n`: a homogeneous polynomial of degree `d`
/// in `n + 1` variables, coefficients in [`MonomialTable`] order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SectionFile", into = "SectionFile")]
pub struct HomogeneousSection {
    dimension: usize,
    table: MonomialTable,
    coeffs: Vec<C64>,
}

impl HomogeneousSection {
    pub fn new(dimension: usize, degree: u32, coeffs: Vec<C64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Invalid("section degree must be positive".into()));
        }
        if dimension == 0 {
            return Err(Error::Invalid("projective dimension must be positive".into()));
        }
        let table = MonomialTable::new(dimension, degree);
        if coeffs.len() != table.len() {
            return Err(Error::Invalid(format!(
                "degree {degree} section on CP^{dimension} needs {} coefficients, got {}",
                table.len(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Invalid("coefficients must be finite".into()));
        }
        if coeffs.iter().all(|c| c.norm_sqr() == 0.0) {
            return Err(Error::Invalid("section coefficients are identically zero".into()));
        }
        Ok(Self {
            dimension,
            table,
            coeffs,
        })
    }

    /// Build from `(coefficient, exponent)` pairs; unspecified monomials are zero.
    pub fn from_terms(dimension: usize, degree: u32, terms: &[(C64, Vec<u32>)]) -> Result<Self> {
        let table = MonomialTable::new(dimension, degree);
        let mut coeffs = vec![C64::new(0.0, 0.0); table.len()];
        for (c, e) in terms {
            let pos = table.position(e).ok_or_else(|| {
                Error::Invalid(format!(
                    "exponent {e:?} is not a degree-{degree} monomial in {} variables",
                    dimension + 1
                ))
            })?;
            coeffs[pos] += c;
        }
        Self::new(dimension, degree, coeffs)
    }

    /// The coordinate function `z_index` as a section of `O(1)`.
    pub fn coordinate(dimension: usize, index: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); dimension + 1];
        coeffs[index] = C64::new(1.0, 0.0);
        Self::new(dimension, 1, coeffs).expect("coordinate section is valid")
    }

    /// The linear form `Σ a_j z_j`.
    pub fn linear(coeffs: &[C64]) -> Result<Self> {
        Self::new(coeffs.len() - 1, 1, coeffs.to_vec())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn degree(&self) -> u32 {
        self.table.degree()
    }

    pub fn coefficients(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn table(&self) -> &MonomialTable {
        &self.table
    }

    pub fn coefficient_norm(&self) -> f64 {
        norm(&self.coeffs)
    }

    pub fn scaled(&self, c: C64) -> Result<Self> {
        Self::new(
            self.dimension,
            self.degree(),
            self.coeffs.iter().map(|a| a * c).collect(),
        )
    }

    /// Same section with coefficient vector of unit norm.
    pub fn unit(&self) -> Self {
        let n = self.coefficient_norm();
        Self {
            dimension: self.dimension,
            table: self.table.clone(),
            coeffs: self.coeffs.iter().map(|a| a / n).collect(),
        }
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                found: other.dimension,
            });
        }
        let degree = self.degree() + other.degree();
        let table = MonomialTable::new(self.dimension, degree);
        let mut coeffs = vec![C64::new(0.0, 0.0); table.len()];
        let mut sum = vec![0u32; self.dimension + 1];
        for (a, ea) in self.coeffs.iter().zip(self.table.iter()) {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for (b, eb) in other.coeffs.iter().zip(other.table.iter()) {
                if b.norm_sqr() == 0.0 {
                    continue;
                }
                for (k, s) in sum.iter_mut().enumerate() {
                    *s = ea[k] + eb[k];
                }
                let pos = table.position(&sum).expect("product exponent in table");
                coeffs[pos] += a * b;
            }
        }
        Self::new(self.dimension, degree, coeffs)
    }

    pub fn power(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("power must be positive".into()));
        }
        let mut out = self.clone();
        for _ in 1..k {
            out = out.product(self)?;
        }
        Ok(out)
    }

    fn check_point(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dimension + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.dimension + 1,
                found: z.len(),
            });
        }
        Ok(())
    }

    /// `σ(z) = Σ_α c_α z^α`.
    pub fn evaluate(&self, z: &[C64]) -> Result<C64> {
        self.check_point(z)?;
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: &[C64]) -> C64 {
        self.table.values(z).iter().zip(&self.coeffs).map(|(m, c)| m * c).sum()
    }

    /// Value and holomorphic gradient `(∂σ/∂z_j)_j` from one shared power table.
    pub fn evaluate_with_gradient(&self, z: &[C64]) -> Result<(C64, Vec<C64>)> {
        self.check_point(z)?;
        Ok(self.eval_grad_unchecked(z))
    }

    pub(crate) fn eval_grad_unchecked(&self, z: &[C64]) -> (C64, Vec<C64>) {
        let vars = self.dimension + 1;
        let stride = self.degree() as usize + 1;
        let pw = self.table.powers(z);
        let mut value = C64::new(0.0, 0.0);
        let mut grad = vec![C64::new(0.0, 0.0); vars];
        for (c, e) in self.coeffs.iter().zip(self.table.iter()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let mut mono = *c;
            for (j, &k) in e.iter().enumerate() {
                mono *= pw[j * stride + k as usize];
            }
            value += mono;
            for j in 0..vars {
                let k = e[j] as usize;
                if k == 0 {
                    continue;
                }
                let mut term = c * k as f64 * pw[j * stride + k - 1];
                for (i, &ki) in e.iter().enumerate() {
                    if i != j {
                        term *= pw[i * stride + ki as usize];
                    }
                }
                grad[j] += term;
            }
        }
        (value, grad)
    }

    /// Derivative of `t ↦ σ(z(t))` given `z` and `ż`.
    pub(crate) fn eval_along(&self, z: &[C64], v: &[C64]) -> (C64, C64) {
        let (val, grad) = self.eval_grad_unchecked(z);
        let der = grad.iter().zip(v).map(|(g, vi)| g * vi).sum();
        (val, der)
    }
}

/// Interchange form of a section: degree plus real and imaginary parts of
/// the coefficients in monomial order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionFile {
    pub dimension: usize,
    pub degree: u32,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl TryFrom<SectionFile> for HomogeneousSection {
    type Error = Error;

    fn try_from(f: SectionFile) -> Result<Self> {
        if f.re.len() != f.im.len() {
            return Err(Error::Invalid(format!(
                "re has {} entries but im has {}",
                f.re.len(),
                f.im.len()
            )));
        }
        if f.re.iter().chain(&f.im).any(|x| !x.is_finite()) {
            return Err(Error::Invalid("non-finite coefficient".into()));
        }
        let coeffs = f.re.iter().zip(&f.im).map(|(&a, &b)| C64::new(a, b)).collect();
        HomogeneousSection::new(f.dimension, f.degree, coeffs)
    }
}

impl From<HomogeneousSection> for SectionFile {
    fn from(s: HomogeneousSection) -> Self {
        Self {
            dimension: s.dimension,
            degree: s.degree(),
            re: s.coeffs.iter().map(|c| c.re).collect(),
            im: s.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

impl fmt::Display for HomogeneousSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, e) in self.coeffs.iter().zip(self.table.iter()) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.4}{:+.4}i)", c.re, c.im)?;
            for (j, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "·z{j}")?,
                    _ => write!(f, "·z{j}^{k}")?,
                }
            }
        }
        Ok(())
    }
}

/// Value of the Fubini–Study norm `‖σ(x)‖ = |σ(z)| / ‖z‖^d`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct FsNorm(pub f64);

impl FsNorm {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Pointwise FS norm; independent of the representative of `x`.
pub fn fs_norm(section: &HomogeneousSection, x: &ProjPoint) -> Result<FsNorm> {
    fs_norm_at(section, x.coords())
}

pub fn fs_norm_at(section: &HomogeneousSection, z: &[C64]) -> Result<FsNorm> {
    section.check_point(z)?;
    let n = norm(z);
    if !(n > 0.0) {
        return Err(Error::Invalid("zero vector is not a projective point".into()));
    }
    let unit: Vec<C64> = z.iter().map(|c| c / n).collect();
    Ok(FsNorm(section.eval_unchecked(&unit).norm()))
}

/// A tangent vector to `CP^n`, carried as a homogeneous base `z` with a
/// derivative `v` of some lift of a curve through `[z]`.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub base: Vec<C64>,
    pub vector: Vec<C64>,
}

impl TangentVector {
    pub fn new(base: Vec<C64>, vector: Vec<C64>) -> Result<Self> {
        if base.len() != vector.len() {
            return Err(Error::DimensionMismatch {
                expected: base.len(),
                found: vector.len(),
            });
        }
        if !(norm(&base) > 0.0) {
            return Err(Error::Invalid("tangent base point is the zero vector".into()));
        }
        Ok(Self { base, vector })
    }

    pub fn negated(&self) -> Self {
        Self {
            base: self.base.clone(),
            vector: self.vector.iter().map(|v| -v).collect(),
        }
    }
}

/// Value of `d^C log‖σ‖` on a tangent vector.
pub fn dc_log_norm_pullback(section: &HomogeneousSection, tangent: &TangentVector) -> Result<f64> {
    section.check_point(&tangent.base)?;
    dc_log_norm_unchecked(section, &tangent.base, &tangent.vector)
}

pub(crate) fn dc_log_norm_unchecked(section: &HomogeneousSection, z: &[C64], v: &[C64]) -> Result<f64> {
    let n = norm(z);
    let zh: Vec<C64> = z.iter().map(|c| c / n).collect();
    let vh: Vec<C64> = v.iter().map(|c| c / n).collect();
    let (val, der) = section.eval_along(&zh, &vh);
    if val.norm() == 0.0 || !val.norm().is_finite() {
        return Err(Error::SingularPoint { norm: val.norm() });
    }
    let d = section.degree() as f64;
    Ok(dc_from_parts(val, der, &zh, &vh, d))
}

/// `(1/2π) Im(σ'/σ − d ⟨v,z⟩/‖z‖²)` for unit `z`.
#[inline]
pub(crate) fn dc_from_parts(val: C64, der: C64, z_unit: &[C64], v: &[C64], degree: f64) -> f64 {
    ((der / val).im - degree * hdot(v, z_unit).im) / (2.0 * PI)
}

/// Point of a parameterized surface in `C^{n+1}` with its two partials.
#[derive(Clone, Debug)]
pub struct SurfaceJet {
    pub z: Vec<C64>,
    pub d_s: Vec<C64>,
    pub d_t: Vec<C64>,
}

/// Density of `F*ω` with respect to `ds ∧ dt` at a surface jet.
///
/// `ω(X, Y) = −(1/π) Im⟨X⊥, Y⊥⟩ / ‖z‖²`, where `⊥` projects off the line
/// through `z`. Integrating over the unit disk of an affine line gives 1/2,
/// over the whole line 1.
pub fn omega_density(z: &[C64], zs: &[C64], zt: &[C64]) -> f64 {
    let n2 = norm_sqr(z);
    let cs = hdot(zs, z) / n2;
    let ct = hdot(zt, z) / n2;
    let mut h = C64::new(0.0, 0.0);
    for j in 0..z.len() {
        let xs = zs[j] - cs * z[j];
        let xt = zt[j] - ct * z[j];
        h += xs * xt.conj();
    }
    -h.im / (PI * n2)
}

/// Pullback density of `ω` for an arbitrary smooth map into `C^{n+1} \ {0}`.
pub fn fs_area_pullback<F>(map: F, s: f64, t: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> SurfaceJet,
{
    let jet = map(s, t);
    if !(norm(&jet.z) > 0.0) {
        return Err(Error::Invalid(format!(
            "surface hits the origin at (s, t) = ({s}, {t})"
        )));
    }
    Ok(omega_density(&jet.z, &jet.d_s, &jet.d_t))
}

/// Complex Levi matrix of the FS potential `½ log(1 + |w|²)` in an affine chart:
/// `m[j][k] = ∂²/∂w_j∂w̄_k`, acting as `ξ ↦ Σ m[j][k] ξ_j conj(ξ_k)`.
pub fn fs_potential_levi(w: &[C64]) -> Vec<Vec<C64>> {
    let q = 1.0 + norm_sqr(w);
    let n = w.len();
    let mut m = vec![vec![C64::new(0.0, 0.0); n]; n];
    for j in 0..n {
        for k in 0..n {
            let delta = if j == k { 1.0 / q } else { 0.0 };
            m[j][k] = 0.5 * (C64::new(delta, 0.0) - w[j].conj() * w[k] / (q * q));
        }
    }
    m
}
