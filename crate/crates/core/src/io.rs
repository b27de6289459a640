//! File formats and result records.
//!
//! Curves, chains and sections are JSON documents; loading goes through
//! `serde_path_to_error` so a malformed file reports the path of the first
//! offending field. Records are written with sorted keys and shortest
//! round-trip floats, which makes them byte-stable across runs.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::curves::{CurveComponent, FourierTerm, HoloChain, HoloPiece, ParamCurve, PieceDomain};
use crate::error::{Error, Result};
use crate::fs::{HomogeneousSection, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub k: i32,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    pub multiplicity: u32,
    pub fourier: Vec<TermFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveFile {
    pub dimension: usize,
    pub components: Vec<ComponentFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerFile {
    pub power: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainFile {
    Disk { radius: f64 },
    Annulus { inner: f64, outer: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceFile {
    pub multiplicity: u32,
    pub domain: DomainFile,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub reversed: bool,
    pub coefficients: Vec<PowerFile>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub dimension: usize,
    pub pieces: Vec<PieceFile>,
}

fn complex_vector(re: &[f64], im: &[f64], what: &str) -> Result<Vec<C64>> {
    if re.len() != im.len() {
        return Err(Error::Schema {
            path: what.to_string(),
            message: format!("re has {} entries but im has {}", re.len(), im.len()),
        });
    }
    Ok(re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
}

impl CurveFile {
    pub fn to_curve(&self) -> Result<ParamCurve> {
        let mut comps = Vec::with_capacity(self.components.len());
        for (i, c) in self.components.iter().enumerate() {
            let mut terms = Vec::with_capacity(c.fourier.len());
            for (j, t) in c.fourier.iter().enumerate() {
                let coeff = complex_vector(&t.re, &t.im, &format!("components[{i}].fourier[{j}]"))?;
                terms.push(FourierTerm { k: t.k, coeff });
            }
            comps.push(CurveComponent::new(self.dimension, terms, c.multiplicity)?);
        }
        ParamCurve::new(self.dimension, comps)
    }

    pub fn from_curve(curve: &ParamCurve) -> Self {
        let components = curve
            .components()
            .iter()
            .map(|c| ComponentFile {
                multiplicity: c.multiplicity(),
                fourier: c
                    .terms()
                    .iter()
                    .map(|t| TermFile {
                        k: t.k,
                        re: t.coeff.iter().map(|z| z.re).collect(),
                        im: t.coeff.iter().map(|z| z.im).collect(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            dimension: curve.dimension(),
            components,
        }
    }
}

impl ChainFile {
    pub fn to_chain(&self) -> Result<HoloChain> {
        let mut pieces = Vec::with_capacity(self.pieces.len());
        for (i, p) in self.pieces.iter().enumerate() {
            let top = p.coefficients.iter().map(|c| c.power).max().unwrap_or(0);
            let mut coeffs = vec![vec![C64::new(0.0, 0.0); self.dimension + 1]; top + 1];
            for (j, c) in p.coefficients.iter().enumerate() {
                let v = complex_vector(&c.re, &c.im, &format!("pieces[{i}].coefficients[{j}]"))?;
                if v.len() != self.dimension + 1 {
                    return Err(Error::DimensionMismatch {
                        expected: self.dimension + 1,
                        found: v.len(),
                    });
                }
                coeffs[c.power].iter_mut().zip(&v).for_each(|(a, b)| *a += b);
            }
            let domain = match p.domain {
                DomainFile::Disk { radius } => PieceDomain::Disk { radius },
                DomainFile::Annulus { inner, outer } => PieceDomain::Annulus { inner, outer },
            };
            pieces.push(HoloPiece::new(self.dimension, coeffs, domain, p.multiplicity)?.with_reversed(p.reversed));
        }
        HoloChain::new(self.dimension, pieces)
    }

    pub fn from_chain(chain: &HoloChain) -> Self {
        let pieces = chain
            .pieces()
            .iter()
            .map(|p| PieceFile {
                multiplicity: p.multiplicity(),
                domain: match p.domain() {
                    PieceDomain::Disk { radius } => DomainFile::Disk { radius },
                    PieceDomain::Annulus { inner, outer } => DomainFile::Annulus { inner, outer },
                },
                reversed: p.is_reversed(),
                coefficients: p
                    .coefficients()
                    .iter()
                    .enumerate()
                    .map(|(power, c)| PowerFile {
                        power,
                        re: c.iter().map(|z| z.re).collect(),
                        im: c.iter().map(|z| z.im).collect(),
                    })
                    .collect(),
            })
            .collect();
        Self {
            dimension: chain.dimension(),
            pieces,
        }
    }
}

/// Deserializes `text`, reporting failures with the JSON path of the
/// offending field.
pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::Schema {
            path: if path == "." { "$".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.display().to_string(),
            source,
        })?;
    }
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn parse_curve(text: &str) -> Result<ParamCurve> {
    parse_json::<CurveFile>(text)?.to_curve()
}

pub fn parse_chain(text: &str) -> Result<HoloChain> {
    parse_json::<ChainFile>(text)?.to_chain()
}

pub fn parse_section(text: &str) -> Result<HomogeneousSection> {
    parse_json(text)
}

pub fn load_curve(path: &Path) -> Result<ParamCurve> {
    parse_curve(&read_text(path)?)
}

pub fn load_chain(path: &Path) -> Result<HoloChain> {
    parse_chain(&read_text(path)?)
}

pub fn load_section(path: &Path) -> Result<HomogeneousSection> {
    parse_section(&read_text(path)?)
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("records serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

/// SHA-256 over the compact canonical JSON of `inputs`, hex encoded.
pub fn digest<T: Serialize>(inputs: &T) -> String {
    let v = serde_json::to_value(inputs).expect("inputs serialize");
    let bytes = serde_json::to_vec(&v).expect("values serialize");
    Sha256::digest(&bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for Failure {
    fn from(e: &Error) -> Self {
        Self {
            kind: e.kind().to_string(),
            message: e.to_string(),
        }
    }
}

/// The persisted outcome of one computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub invariant: String,
    pub value: Option<f64>,
    pub error: Option<f64>,
    pub inputs_digest: String,
    pub diagnostics: serde_json::Value,
}

impl Record {
    pub fn new<I: Serialize, D: Serialize>(
        invariant: &str,
        value: Option<f64>,
        error: Option<f64>,
        inputs: &I,
        diagnostics: &D,
    ) -> Self {
        Self {
            invariant: invariant.into(),
            value: value.filter(|v| v.is_finite()),
            error: error.filter(|v| v.is_finite()),
            inputs_digest: digest(inputs),
            diagnostics: serde_json::to_value(diagnostics).expect("diagnostics serialize"),
        }
    }

    pub fn failure<I: Serialize>(invariant: &str, inputs: &I, err: &Error) -> Self {
        Self {
            invariant: invariant.into(),
            value: None,
            error: None,
            inputs_digest: digest(inputs),
            diagnostics: serde_json::json!({ "failure": Failure::from(err) }),
        }
    }

    pub fn failed(&self) -> Option<Failure> {
        self.diagnostics
            .get("failure")
            .and_then(|f| serde_json::from_value(f.clone()).ok())
    }
}

/// Rows of flat structs as CSV with a header line.
pub fn csv_string<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// A heat map of `values` on an `nx × ny` grid (row-major, `y` increasing
/// upwards), blue for the minimum and red for the maximum. Non-finite cells
/// are drawn grey.
pub fn heat_map_svg(nx: usize, ny: usize, values: &[f64], title: &str) -> String {
    let cell = 12usize;
    let (w, h) = (nx * cell, ny * cell);
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let lo = finite.clone().fold(f64::INFINITY, f64::min);
    let hi = finite.fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{}" viewBox="0 0 {w} {}">"#,
        h + 20,
        h + 20
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j * nx + i];
            let fill = if v.is_finite() {
                let a = (v - lo) / span;
                let r = (255.0 * a).round() as u8;
                let b = (255.0 * (1.0 - a)).round() as u8;
                format!("#{r:02x}40{b:02x}")
            } else {
                "#808080".to_string()
            };
            let y = (ny - 1 - j) * cell;
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{y}" width="{cell}" height="{cell}" fill="{fill}"/>"#,
                i * cell
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="2" y="{}" font-family="monospace" font-size="11">min {lo:.4} max {hi:.4}</text>"#,
        h + 14
    );
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bundled example inputs.
pub mod bundled {
    pub const CIRCLE: &str = include_str!("../../../data/circle.json");
    pub const CIRCLE_REVERSED: &str = include_str!("../../../data/circle_reversed.json");
    pub const CIRCLE_MULT2: &str = include_str!("../../../data/circle_mult2.json");
    pub const CONIC_BOUNDARY: &str = include_str!("../../../data/conic_boundary.json");
    pub const DISK: &str = include_str!("../../../data/disk.json");
    pub const DISK_PLUS_LINE: &str = include_str!("../../../data/disk_plus_line.json");
    pub const CONIC_DISK: &str = include_str!("../../../data/conic_disk.json");
    pub const SECTION_Z0: &str = include_str!("../../../data/z0.json");
    pub const SECTION_Z1: &str = include_str!("../../../data/z1.json");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::chain_boundary_check;

    #[test]
    fn bundled_inputs_parse() {
        let circle = parse_curve(bundled::CIRCLE).unwrap();
        assert_eq!(circle, ParamCurve::circle_in_line(2, 1.0, 1).unwrap());
        assert_eq!(parse_curve(bundled::CIRCLE_REVERSED).unwrap(), circle.reversed());
        assert_eq!(
            parse_curve(bundled::CIRCLE_MULT2).unwrap(),
            ParamCurve::circle_in_line(2, 1.0, 2).unwrap()
        );
        let disk = parse_chain(bundled::DISK).unwrap();
        assert!(chain_boundary_check(&disk, &circle, 1e-6).matched);
        let conic = parse_curve(bundled::CONIC_BOUNDARY).unwrap();
        let cdisk = parse_chain(bundled::CONIC_DISK).unwrap();
        assert!(chain_boundary_check(&cdisk, &conic, 1e-6).matched);
        let both = parse_chain(bundled::DISK_PLUS_LINE).unwrap();
        assert_eq!(both.pieces().len(), 3);
        assert_eq!(
            parse_section(bundled::SECTION_Z0).unwrap(),
            HomogeneousSection::coordinate(2, 0)
        );
        assert_eq!(
            parse_section(bundled::SECTION_Z1).unwrap(),
            HomogeneousSection::coordinate(2, 1)
        );
    }

    #[test]
    fn schema_errors_carry_paths() {
        let bad = r#"{"dimension": 2, "components": [{"multiplicity": 1, "fourier": [{"k": 0, "re": [1, 0, "x"], "im": [0, 0, 0]}]}]}"#;
        match parse_curve(bad) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "components[0].fourier[0].re[2]"),
            other => panic!("{other:?}"),
        }
        match parse_curve(r#"{"dimension": 2}"#) {
            Err(Error::Schema { path, message }) => {
                assert_eq!(path, "$");
                assert!(message.contains("components"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let extra = r#"{"dimension": 1, "degree": 1, "re": [1, 0], "im": [0, 0], "colour": 3}"#;
        assert!(matches!(parse_section(extra), Err(Error::Schema { .. })));
    }

    #[test]
    fn files_round_trip() {
        let circle = parse_curve(bundled::CONIC_BOUNDARY).unwrap();
        let text = serde_json::to_string(&CurveFile::from_curve(&circle)).unwrap();
        assert_eq!(parse_curve(&text).unwrap(), circle);
        let chain = parse_chain(bundled::DISK_PLUS_LINE).unwrap();
        let text = serde_json::to_string(&ChainFile::from_chain(&chain)).unwrap();
        assert_eq!(parse_chain(&text).unwrap(), chain);
    }

    #[test]
    fn digest_ignores_key_order() {
        let a = serde_json::json!({"x": 1, "y": [1.5, 2]});
        let b: serde_json::Value = serde_json::from_str(r#"{"y": [1.5, 2], "x": 1}"#).unwrap();
        assert_eq!(digest(&a), digest(&b));
        assert_eq!(digest(&a).len(), 64);
        assert_ne!(digest(&a), digest(&serde_json::json!({"x": 2, "y": [1.5, 2]})));
    }

    #[test]
    fn heat_map_shape() {
        let svg = heat_map_svg(3, 2, &[0.0, 1.0, 2.0, 3.0, f64::NAN, 5.0], "t<1>");
        assert_eq!(svg.matches("<rect").count(), 6);
        assert!(svg.contains("#808080"));
        assert!(svg.contains("t&lt;1&gt;"));
    }
}
