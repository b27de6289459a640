//! Seeded random sections.
//!
//! Every draw takes its own ChaCha stream derived from `(seed, index)`, so a
//! parallel sweep produces the same sections as a serial one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curves::{CurveComponent, FourierTerm, ParamCurve};
use crate::error::{Error, Result};
use crate::fs::{norm, HomogeneousSection, MonomialTable, C64};

/// Coefficient distribution for random sections.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// Independent standard complex Gaussians in the monomial basis.
    #[default]
    Gaussian,
    /// Gaussians scaled by `sqrt(d! / α!)`; the law is unitarily invariant.
    Bombieri,
}

pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn complex_gaussian<R: Rng>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn multinomial_sqrt(degree: u32, exponent: &[u32]) -> f64 {
    let lf = |k: u32| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
    let log = lf(degree) - exponent.iter().map(|&k| lf(k)).sum::<f64>();
    (0.5 * log).exp()
}

pub fn random_section<R: Rng>(
    dimension: usize,
    degree: u32,
    weighting: Weighting,
    rng: &mut R,
) -> Result<HomogeneousSection> {
    let table = MonomialTable::new(dimension, degree);
    let coeffs = table
        .iter()
        .map(|e| {
            let g = complex_gaussian(rng);
            match weighting {
                Weighting::Gaussian => g,
                Weighting::Bombieri => g * multinomial_sqrt(degree, e),
            }
        })
        .collect();
    HomogeneousSection::new(dimension, degree, coeffs)
}

/// `count` sections with degrees drawn uniformly from `degrees`.
pub fn section_ensemble(
    dimension: usize,
    degrees: std::ops::RangeInclusive<u32>,
    count: usize,
    weighting: Weighting,
    seed: u64,
) -> Result<Vec<HomogeneousSection>> {
    (0..count)
        .map(|i| {
            let mut rng = seeded_rng(seed, i as u64);
            let d = rng.gen_range(degrees.clone());
            random_section(dimension, d, weighting, &mut rng)
        })
        .collect()
}

/// A random closed curve with one component: Gaussian Fourier coefficients
/// for `|k| ≤ max_frequency`, the constant term dominant so that `γ` stays
/// well away from the origin. Draws whose relative minimum norm falls below
/// `0.05` are redrawn.
pub fn random_curve<R: Rng>(dimension: usize, max_frequency: u32, rng: &mut R) -> Result<ParamCurve> {
    let kmax = max_frequency.max(1) as i32;
    for _ in 0..64 {
        let mut terms = Vec::new();
        let mut total = 0.0;
        for k in -kmax..=kmax {
            let scale = if k == 0 { 1.0 } else { 0.6 / (k.unsigned_abs() as f64) };
            let coeff: Vec<C64> = (0..=dimension).map(|_| complex_gaussian(rng) * scale).collect();
            total += norm(&coeff);
            terms.push(FourierTerm { k, coeff });
        }
        let comp = match CurveComponent::new(dimension, terms, 1) {
            Ok(c) => c,
            Err(Error::Invalid(_)) => continue,
            Err(e) => return Err(e),
        };
        if comp.min_norm(512).0 < 0.05 * total {
            continue;
        }
        match ParamCurve::new(dimension, vec![comp]) {
            Ok(c) => return Ok(c),
            Err(Error::Invalid(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::Invalid("no admissible random curve in 64 draws".into()))
}
