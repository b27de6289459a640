//! Job configuration and the command runner behind the `projlink` binary.
//!
//! A [`JobConfig`] names one command, its input files and every numeric
//! knob. [`run`] loads and validates the inputs, performs the computation,
//! writes a JSON record (plus CSV or SVG where it makes sense) under the
//! output directory and returns the exit status.
//!
//! Exit codes: 0 on success, 1 when the inputs are invalid, 2 when the
//! numerics fail or a verification check does not pass.

use std::env;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::criterion::{check_boundary_criterion, estimate_minimal_mass, BoundaryVerdict, CriterionOptions};
use crate::curves::{chain_boundary_check, cone_chain, HoloChain, ParamCurve};
use crate::error::{Error, Result};
use crate::fs::{HomogeneousSection, ProjPoint, C64};
use crate::invariants::{
    affine_relation, chain_mass, projective_linking, winding_number, Divisor, IntersectionOptions, QuadratureOptions,
};
use crate::io::{self, ChainFile, CurveFile, Record};
use crate::qpsh::{hull_field, qpsh_defect, DefectOptions, HullEstimate, HullOptions, QpshFunction, Verdict};
use crate::verify::{verify_pair, verify_suite, VerifyOptions, VerifyReport};

/// Environment variable holding the default worker thread count.
pub const THREADS_ENV: &str = "PROJLINK_THREADS";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Wind,
    Link,
    AffineLink,
    Mass,
    Defect,
    Hull,
    Criterion,
    #[default]
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Wind => "wind",
            Command::Link => "link",
            Command::AffineLink => "affine-link",
            Command::Mass => "mass",
            Command::Defect => "defect",
            Command::Hull => "hull",
            Command::Criterion => "criterion",
            Command::Verify => "verify",
        }
    }

    /// The `invariant` field of the command's records.
    pub fn invariant(self) -> &'static str {
        match self {
            Command::Wind => "projective_winding",
            Command::Link => "projective_linking",
            Command::AffineLink => "affine_linking",
            Command::Mass => "mass",
            Command::Defect => "qpsh_defect",
            Command::Hull => "hull_constant",
            Command::Criterion => "minimal_mass",
            Command::Verify => "verify",
        }
    }
}

/// Settings of the `hull` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HullJob {
    pub degrees: Vec<u32>,
    /// Points per side of a square grid in the affine chart `z_0 = 1`;
    /// `0` evaluates the single configured point.
    pub grid: usize,
    /// Half-width of the grid.
    pub extent: f64,
    /// Affine coordinate the grid varies; the others stay zero.
    pub axis: usize,
    /// Also render the grid as an SVG heat map.
    pub svg: bool,
    pub options: HullOptions,
}

impl Default for HullJob {
    fn default() -> Self {
        Self {
            degrees: (1..=8).collect(),
            grid: 0,
            extent: 1.5,
            axis: 1,
            svg: false,
            options: HullOptions::default(),
        }
    }
}

/// Everything one invocation needs. Every field has a default, and the
/// struct round-trips through JSON unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JobConfig {
    pub command: Command,
    pub curve: Option<PathBuf>,
    pub section: Option<PathBuf>,
    pub chain: Option<PathBuf>,
    /// Evaluation point for `defect` and single-point `hull`.
    pub point: Option<Vec<C64>>,
    /// Cone apex for `link` without a chain file; random when absent.
    pub apex: Option<Vec<C64>>,
    /// Seed for random apexes.
    pub seed: u64,
    /// Proposed mass bound checked by `criterion`.
    pub lambda: Option<f64>,
    pub quadrature: QuadratureOptions,
    pub intersection: IntersectionOptions,
    pub defect: DefectOptions,
    pub hull: HullJob,
    pub criterion: CriterionOptions,
    pub verify: VerifyOptions,
    /// Directory receiving `<command>.json` and any CSV/SVG output.
    pub output: PathBuf,
    /// Worker threads; falls back to `PROJLINK_THREADS`, then all cores.
    pub threads: Option<usize>,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            command: Command::default(),
            curve: None,
            section: None,
            chain: None,
            point: None,
            apex: None,
            seed: 0,
            lambda: None,
            quadrature: QuadratureOptions::default(),
            intersection: IntersectionOptions::default(),
            defect: DefectOptions::default(),
            hull: HullJob::default(),
            criterion: CriterionOptions::default(),
            verify: VerifyOptions::default(),
            output: PathBuf::from("projlink-out"),
            threads: None,
        }
    }
}

impl JobConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            ..Default::default()
        }
    }

    pub fn record_path(&self) -> PathBuf {
        self.output.join(format!("{}.json", self.command.name()))
    }

    /// The knobs that influence the result: paths, output location and
    /// thread count are dropped.
    fn knobs(&self) -> JobConfig {
        JobConfig {
            curve: None,
            section: None,
            chain: None,
            output: PathBuf::new(),
            threads: None,
            ..self.clone()
        }
    }
}

/// Result of [`run`].
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
    pub record: Record,
    /// Files written, record first.
    pub artifacts: Vec<PathBuf>,
}

#[derive(Serialize)]
struct DigestInputs<'a> {
    config: JobConfig,
    curve: Option<CurveFile>,
    section: Option<&'a HomogeneousSection>,
    chain: Option<ChainFile>,
}

struct Inputs {
    curve: Option<ParamCurve>,
    section: Option<HomogeneousSection>,
    chain: Option<HoloChain>,
}

impl Inputs {
    fn load(config: &JobConfig) -> Result<Self> {
        Ok(Self {
            curve: config.curve.as_deref().map(io::load_curve).transpose()?,
            section: config.section.as_deref().map(io::load_section).transpose()?,
            chain: config.chain.as_deref().map(io::load_chain).transpose()?,
        })
    }

    fn digest_inputs(&self, config: &JobConfig) -> DigestInputs<'_> {
        DigestInputs {
            config: config.knobs(),
            curve: self.curve.as_ref().map(CurveFile::from_curve),
            section: self.section.as_ref(),
            chain: self.chain.as_ref().map(ChainFile::from_chain),
        }
    }

    fn curve(&self) -> Result<&ParamCurve> {
        self.curve.as_ref().ok_or_else(|| missing("curve"))
    }

    fn section(&self) -> Result<&HomogeneousSection> {
        self.section.as_ref().ok_or_else(|| missing("section"))
    }

    fn chain(&self) -> Result<&HoloChain> {
        self.chain.as_ref().ok_or_else(|| missing("chain"))
    }
}

fn missing(what: &str) -> Error {
    Error::Invalid(format!("this command needs a {what} file (--{what})"))
}

fn point(config: &JobConfig) -> Result<ProjPoint> {
    let p = config
        .point
        .clone()
        .ok_or_else(|| Error::Invalid("this command needs an evaluation point (--point)".into()))?;
    ProjPoint::new(p)
}

/// Thread count from the config or the environment.
pub fn thread_count(config: &JobConfig) -> Option<usize> {
    config
        .threads
        .or_else(|| env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&n| n > 0)
}

/// Executes the configured command. Never panics on bad input; failures
/// are reported through the exit code and a failure record.
pub fn run(config: &JobConfig) -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(config).unwrap_or(0))
        .build();
    match pool {
        Ok(pool) => pool.install(|| run_inner(config)),
        Err(_) => run_inner(config),
    }
}

struct Success {
    record: Record,
    summary: String,
    /// Additional files (CSV, SVG) and their contents.
    extra: Vec<(PathBuf, String)>,
    passed: bool,
}

fn run_inner(config: &JobConfig) -> Outcome {
    let name = config.command.name();
    let inputs = match Inputs::load(config) {
        Ok(i) => i,
        Err(e) => {
            let empty = Inputs {
                curve: None,
                section: None,
                chain: None,
            };
            return failure(config, &empty, e);
        }
    };
    let result = match config.command {
        Command::Wind => wind(config, &inputs),
        Command::Link => link(config, &inputs),
        Command::AffineLink => affine(config, &inputs),
        Command::Mass => mass(config, &inputs),
        Command::Defect => defect(config, &inputs),
        Command::Hull => hull(config, &inputs),
        Command::Criterion => criterion(config, &inputs),
        Command::Verify => verify(config, &inputs),
    };
    let ok = match result {
        Ok(ok) => ok,
        Err(e) => return failure(config, &inputs, e),
    };
    let mut artifacts = Vec::new();
    let record_path = config.record_path();
    if let Err(e) = io::write_text(&record_path, &io::to_canonical_json(&ok.record)) {
        return failure(config, &inputs, e);
    }
    artifacts.push(record_path);
    for (path, text) in ok.extra {
        if let Err(e) = io::write_text(&path, &text) {
            return failure(config, &inputs, e);
        }
        artifacts.push(path);
    }
    Outcome {
        exit_code: if ok.passed { 0 } else { 2 },
        summary: format!("{name}: {}", ok.summary),
        record: ok.record,
        artifacts,
    }
}

fn failure(config: &JobConfig, inputs: &Inputs, err: Error) -> Outcome {
    let record = Record::failure(config.command.invariant(), &inputs.digest_inputs(config), &err);
    let path = config.record_path();
    let artifacts = match io::write_text(&path, &io::to_canonical_json(&record)) {
        Ok(()) => vec![path],
        Err(_) => Vec::new(),
    };
    Outcome {
        exit_code: if err.is_numerical() { 2 } else { 1 },
        summary: format!("{}: error [{}] {err}", config.command.name(), err.kind()),
        record,
        artifacts,
    }
}

fn done(record: Record, summary: String) -> Success {
    Success {
        record,
        summary,
        extra: Vec::new(),
        passed: true,
    }
}

fn wind(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let r = winding_number(inputs.curve()?, inputs.section()?, &config.quadrature)?;
    let record = Record::new(
        "projective_winding",
        Some(r.value),
        Some(r.error),
        &inputs.digest_inputs(config),
        &r.diagnostics,
    );
    Ok(done(record, format!("{:.12} ± {:.1e}", r.value, r.error)))
}

fn link(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let curve = inputs.curve()?;
    let (chain, kind) = match &inputs.chain {
        Some(c) => (c.to_param_chain(curve)?, "holomorphic"),
        None => {
            let apex = config.apex.clone().map(ProjPoint::new).transpose()?;
            (cone_chain(curve, apex.as_ref(), config.seed)?, "cone")
        }
    };
    let divisor = Divisor::new(inputs.section()?.clone());
    let r = projective_linking(curve, &divisor, &chain, &config.quadrature, &config.intersection)?;
    let mut diag = serde_json::to_value(&r.diagnostics).expect("diagnostics serialize");
    diag["chain"] = kind.into();
    let record = Record::new(
        "projective_linking",
        Some(r.value),
        Some(r.error),
        &inputs.digest_inputs(config),
        &diag,
    );
    Ok(done(
        record,
        format!(
            "{:.12} ± {:.1e} ({} intersections, {kind} chain)",
            r.value,
            r.error,
            r.diagnostics.intersection_count.unwrap_or(0)
        ),
    ))
}

fn affine(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let r = affine_relation(inputs.curve()?, inputs.section()?, &config.quadrature)?;
    let record = Record::new(
        "affine_linking",
        Some(r.affine as f64),
        Some(0.0),
        &inputs.digest_inputs(config),
        &r,
    );
    Ok(done(
        record,
        format!(
            "{} (projective {:.9}, at infinity {:.9}, residual {:.1e})",
            r.affine, r.projective, r.at_infinity, r.residual
        ),
    ))
}

fn mass(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let chain = inputs.chain()?;
    let r = chain_mass(chain, &config.quadrature)?;
    let mut diag = serde_json::to_value(&r.diagnostics).expect("diagnostics serialize");
    if let Some(curve) = &inputs.curve {
        let b = chain_boundary_check(chain, curve, 1e-6);
        diag["boundary"] = serde_json::to_value(&b).expect("report serializes");
    }
    let record = Record::new(
        "mass",
        Some(r.value),
        Some(r.error),
        &inputs.digest_inputs(config),
        &diag,
    );
    Ok(done(record, format!("{:.12} ± {:.1e}", r.value, r.error)))
}

fn defect(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let x = point(config)?;
    let u = QpshFunction::section_log(inputs.section()?.clone());
    let v = qpsh_defect(&u, &x, &config.defect)?;
    let record = Record::new(
        "qpsh_defect",
        Some(v),
        None,
        &inputs.digest_inputs(config),
        &serde_json::json!({ "point": x, "step": config.defect.step }),
    );
    Ok(done(record, format!("smallest eigenvalue of dd^C u + ω: {v:.3e}")))
}

#[derive(Serialize)]
struct HullRow {
    index: usize,
    x: f64,
    y: f64,
    lambda_estimate: f64,
    constant: f64,
    verdict: Verdict,
}

fn grid_points(job: &HullJob, dimension: usize) -> Result<Vec<(f64, f64, ProjPoint)>> {
    if job.axis == 0 || job.axis > dimension {
        return Err(Error::Invalid(format!(
            "hull axis {} is not an affine coordinate of CP^{dimension}",
            job.axis
        )));
    }
    if !(job.extent > 0.0) {
        return Err(Error::Invalid("hull extent must be positive".into()));
    }
    let n = job.grid;
    let coord = |i: usize| {
        if n == 1 {
            0.0
        } else {
            -job.extent + 2.0 * job.extent * i as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (coord(i), coord(j));
            let mut w = vec![C64::new(0.0, 0.0); dimension];
            w[job.axis - 1] = C64::new(x, y);
            out.push((x, y, ProjPoint::affine(&w)));
        }
    }
    Ok(out)
}

fn hull(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let curve = inputs.curve()?;
    let job = &config.hull;
    let points: Vec<(f64, f64, ProjPoint)> = if job.grid == 0 {
        let p = point(config)?;
        let z = p.coords();
        let (x, y) = if z.len() > job.axis && z[0].norm() > 0.0 {
            let w = z[job.axis] / z[0];
            (w.re, w.im)
        } else {
            (f64::NAN, f64::NAN)
        };
        vec![(x, y, p)]
    } else {
        grid_points(job, curve.dimension())?
    };
    let pts: Vec<ProjPoint> = points.iter().map(|p| p.2.clone()).collect();
    let est = hull_field(curve, &pts, &job.degrees, &job.options)?;
    let rows: Vec<HullRow> = points
        .iter()
        .zip(&est)
        .enumerate()
        .map(|(index, ((x, y, _), e))| HullRow {
            index,
            x: *x,
            y: *y,
            lambda_estimate: e.lambda_estimate,
            constant: e.by_degree.last().map_or(f64::NAN, |d| d.running_max),
            verdict: e.verdict,
        })
        .collect();
    let count = |v: Verdict| est.iter().filter(|e| e.verdict == v).count();
    let (members, non, undetermined) = (
        count(Verdict::Member),
        count(Verdict::NonMember),
        count(Verdict::Undetermined),
    );
    let mut extra = vec![(config.output.join("hull.csv"), io::csv_string(&rows)?)];
    if job.svg && job.grid > 0 {
        let values: Vec<f64> = est.iter().map(|e| e.lambda_estimate).collect();
        let svg = io::heat_map_svg(job.grid, job.grid, &values, "log of the best constant");
        extra.push((config.output.join("hull.svg"), svg));
    }
    let (value, summary) = match est.as_slice() {
        [single] => (
            Some(single.by_degree.last().map_or(f64::NAN, |d| d.running_max)),
            single_summary(single),
        ),
        _ => (
            None,
            format!(
                "{} points: {members} member, {non} non-member, {undetermined} undetermined",
                est.len()
            ),
        ),
    };
    let diag = serde_json::json!({
        "points": est,
        "members": members,
        "non_members": non,
        "undetermined": undetermined,
    });
    let record = Record::new("hull_constant", value, None, &inputs.digest_inputs(config), &diag);
    Ok(Success {
        record,
        summary,
        extra,
        passed: true,
    })
}

fn single_summary(e: &HullEstimate) -> String {
    let c = e.by_degree.last().map_or(f64::NAN, |d| d.running_max);
    let verdict = match e.verdict {
        Verdict::Member => "member",
        Verdict::NonMember => "non-member",
        Verdict::Undetermined => "undetermined",
    };
    format!(
        "best constant {c:.6} over degrees ≤ {}, {verdict}",
        e.by_degree.last().map_or(0, |d| d.degree)
    )
}

#[derive(Serialize)]
struct SweepRow {
    degree: u32,
    infimum: f64,
    witness_clearance: f64,
    rejected_starts: usize,
}

fn criterion(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let curve = inputs.curve()?;
    let r = estimate_minimal_mass(curve, &config.criterion)?;
    let mut diag = serde_json::to_value(&r).expect("result serializes");
    let mut summary = format!(
        "minimal mass estimate {:.9} (inf reduced winding {:.9})",
        r.minimal_mass_estimate, r.inf_reduced_winding
    );
    if let Some(lambda) = config.lambda {
        let v = check_boundary_criterion(lambda, &r, 1e-6);
        summary.push_str(match v {
            BoundaryVerdict::Pass => ", bound holds",
            BoundaryVerdict::Fail { .. } => ", bound violated",
        });
        diag["boundary_verdict"] = serde_json::to_value(&v).expect("verdict serializes");
    }
    let rows: Vec<SweepRow> = r
        .degree_sweep
        .iter()
        .map(|s| SweepRow {
            degree: s.degree,
            infimum: s.infimum,
            witness_clearance: s.witness_clearance,
            rejected_starts: s.rejected_starts,
        })
        .collect();
    let record = Record::new(
        "minimal_mass",
        Some(r.minimal_mass_estimate),
        None,
        &inputs.digest_inputs(config),
        &diag,
    );
    Ok(Success {
        record,
        summary,
        extra: vec![(config.output.join("criterion.csv"), io::csv_string(&rows)?)],
        passed: true,
    })
}

fn verify(config: &JobConfig, inputs: &Inputs) -> Result<Success> {
    let report: VerifyReport = match (&inputs.curve, &inputs.chain) {
        (Some(curve), Some(chain)) => {
            verify_pair(curve, chain, &config.verify, &config.quadrature, &config.intersection)
        }
        (None, None) => verify_suite(&config.verify),
        _ => {
            return Err(Error::Invalid(
                "verify takes both --curve and --chain, or neither for the bundled suite".into(),
            ))
        }
    };
    let passed = report.checks.iter().filter(|c| c.passed).count();
    let total = report.checks.len();
    let mut summary = format!("{passed}/{total} checks passed");
    for c in report.checks.iter().filter(|c| !c.passed) {
        summary.push_str(&format!("\n  FAIL {}: {}", c.name, c.detail));
    }
    let record = Record::new(
        "verify",
        Some((total - passed) as f64),
        None,
        &inputs.digest_inputs(config),
        &report,
    );
    Ok(Success {
        record,
        summary,
        extra: Vec::new(),
        passed: report.passed,
    })
}

/// Reads a config file; unknown keys are schema errors.
pub fn load_config(path: &Path) -> Result<JobConfig> {
    io::parse_json(&io::read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
    }

    #[test]
    fn config_round_trips() {
        let mut c = JobConfig::new(Command::Hull);
        c.curve = Some(data("circle.json"));
        c.point = Some(vec![C64::new(1.0, 0.0), C64::new(0.25, -0.5), C64::new(0.0, 0.0)]);
        c.lambda = Some(0.5);
        c.hull.grid = 5;
        let text = serde_json::to_string_pretty(&c).unwrap();
        let back: JobConfig = io::parse_json(&text).unwrap();
        assert_eq!(back, c);
        let d: JobConfig = io::parse_json("{}").unwrap();
        assert_eq!(d, JobConfig::default());
    }

    #[test]
    fn wind_writes_a_record() {
        let dir = std::env::temp_dir().join(format!("projlink-cli-{}", std::process::id()));
        let mut c = JobConfig::new(Command::Wind);
        c.curve = Some(data("circle.json"));
        c.section = Some(data("z0.json"));
        c.output = dir.clone();
        let out = run(&c);
        assert_eq!(out.exit_code, 0, "{}", out.summary);
        assert!((out.record.value.unwrap() + 0.5).abs() < 1e-12);
        let text = std::fs::read_to_string(c.record_path()).unwrap();
        let rec: Record = serde_json::from_str(&text).unwrap();
        assert_eq!(rec, out.record);
        std::fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn exit_codes() {
        let dir = std::env::temp_dir().join(format!("projlink-exit-{}", std::process::id()));
        let mut c = JobConfig::new(Command::Wind);
        c.curve = Some(data("circle.json"));
        c.output = dir.clone();
        assert_eq!(run(&c).exit_code, 1);
        let bad = dir.join("bad_section.json");
        io::write_text(
            &bad,
            r#"{"dimension": 2, "degree": 1, "re": [-1, 1, 0], "im": [0, 0, 0]}"#,
        )
        .unwrap();
        c.section = Some(bad);
        let out = run(&c);
        assert_eq!(out.exit_code, 2, "{}", out.summary);
        assert_eq!(out.record.failed().unwrap().kind, "ZeroOnCurve");
        std::fs::remove_dir_all(dir).ok();
    }
}
