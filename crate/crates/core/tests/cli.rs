use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn projlink(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_projlink"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    projlink(&all)
}

fn record(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn wind_on_the_circle() {
    let dir = tempfile::tempdir().unwrap();
    let curve = data("circle.json");
    let section = data("z0.json");
    let out = run_in(
        dir.path(),
        &[
            "wind",
            "--curve",
            curve.to_str().unwrap(),
            "--section",
            section.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = record(dir.path().join("wind.json"));
    assert_eq!(r["invariant"], "projective_winding");
    assert!((r["value"].as_f64().unwrap() + 0.5).abs() < 1e-9);
    assert!(r["inputs_digest"].as_str().unwrap().len() == 64);
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dimension": 2, "components": [{"multiplicity": 1, "fourier": [{"k": 0, "re": [1, 0], "im": [0, 0, 0]}]}]}"#).unwrap();
    let section = data("z0.json");
    let out = run_in(
        dir.path(),
        &[
            "wind",
            "--curve",
            bad.to_str().unwrap(),
            "--section",
            section.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(projlink(&["wind", "--no-such-flag"]).status.code(), Some(1));
}

#[test]
fn divisor_on_the_curve_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let section = dir.path().join("through.json");
    // z0 − z1 vanishes at t = 0 on the unit circle
    std::fs::write(
        &section,
        r#"{"dimension": 2, "degree": 1, "re": [1, -1, 0], "im": [0, 0, 0]}"#,
    )
    .unwrap();
    let curve = data("circle.json");
    let out = run_in(
        dir.path(),
        &[
            "wind",
            "--curve",
            curve.to_str().unwrap(),
            "--section",
            section.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    let r = record(dir.path().join("wind.json"));
    assert_eq!(r["diagnostics"]["failure"]["kind"], "ZeroOnCurve");
    assert!(r["value"].is_null());
}

#[test]
fn verify_pair_passes() {
    let dir = tempfile::tempdir().unwrap();
    let curve = data("circle.json");
    let chain = data("disk.json");
    let out = run_in(
        dir.path(),
        &[
            "verify",
            "--quick",
            "--curve",
            curve.to_str().unwrap(),
            "--chain",
            chain.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn quick_verify_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_in(a.path(), &["verify", "--quick", "--seed", "3"]);
    let rb = run_in(b.path(), &["verify", "--quick", "--seed", "3"]);
    assert_eq!(ra.status.code(), Some(0));
    assert_eq!(ra.stdout, rb.stdout);
    let ja = std::fs::read(a.path().join("verify.json")).unwrap();
    let jb = std::fs::read(b.path().join("verify.json")).unwrap();
    assert_eq!(ja, jb);
}

#[test]
fn printed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let curve = data("circle.json");
    let chain = data("disk.json");
    let section = data("z1.json");
    let args = [
        "link",
        "--curve",
        curve.to_str().unwrap(),
        "--chain",
        chain.to_str().unwrap(),
        "--section",
        section.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ];
    let mut printing = args.to_vec();
    printing.push("--print-config");
    let printed = projlink(&printing);
    assert_eq!(printed.status.code(), Some(0));
    let cfg = dir.path().join("job.json");
    std::fs::write(&cfg, &printed.stdout).unwrap();

    assert_eq!(projlink(&args).status.code(), Some(0));
    let direct = std::fs::read(dir.path().join("link.json")).unwrap();
    std::fs::remove_file(dir.path().join("link.json")).unwrap();
    let from_config = projlink(&["link", "--config", cfg.to_str().unwrap()]);
    assert_eq!(from_config.status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("link.json")).unwrap(), direct);

    let r = record(dir.path().join("link.json"));
    assert!((r["value"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn hull_grid_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let curve = data("circle.json");
    let out = run_in(
        dir.path(),
        &[
            "hull",
            "--curve",
            curve.to_str().unwrap(),
            "--grid",
            "3",
            "--degrees",
            "1..=2",
            "--restarts",
            "2",
            "--svg",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("hull.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 9);
    let svg = std::fs::read_to_string(dir.path().join("hull.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<rect").count(), 9);
}
