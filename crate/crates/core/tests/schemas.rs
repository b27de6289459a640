use std::path::{Path, PathBuf};

use jsonschema::JSONSchema;
use serde_json::Value;

use projlink::cli::{run, Command, JobConfig};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn load(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn schema(name: &str) -> JSONSchema {
    let v = load(&root().join("schemas").join(format!("{name}.schema.json")));
    JSONSchema::compile(&v).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn assert_valid(schema: &JSONSchema, v: &Value, what: &str) {
    if let Err(errors) = schema.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{what}: {}", msgs.join("; "));
    }
}

/// Runs `command` on bundled inputs and returns the record it wrote.
fn record(command: Command, set: impl FnOnce(&mut JobConfig)) -> Value {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = JobConfig::new(command);
    cfg.output = dir.path().to_path_buf();
    set(&mut cfg);
    let out = run(&cfg);
    assert!(out.exit_code == 0 || out.exit_code == 2, "{}", out.summary);
    load(&cfg.record_path())
}

fn data(name: &str) -> Option<PathBuf> {
    Some(root().join("data").join(name))
}

fn bundled_records() -> Vec<(&'static str, Value)> {
    vec![
        (
            "wind_circle_z0",
            record(Command::Wind, |c| {
                c.curve = data("circle.json");
                c.section = data("z0.json");
            }),
        ),
        (
            "link_circle_disk_z1",
            record(Command::Link, |c| {
                c.curve = data("circle.json");
                c.chain = data("disk.json");
                c.section = data("z1.json");
            }),
        ),
        (
            "affine_link_circle_z1",
            record(Command::AffineLink, |c| {
                c.curve = data("circle.json");
                c.section = data("z1.json");
            }),
        ),
        (
            "mass_conic_disk",
            record(Command::Mass, |c| {
                c.curve = data("conic_boundary.json");
                c.chain = data("conic_disk.json");
            }),
        ),
        (
            "defect_z1",
            record(Command::Defect, |c| {
                c.section = data("z1.json");
                c.point = Some(vec![1.0.into(), 0.5.into(), 0.0.into()]);
            }),
        ),
    ]
}

#[test]
fn bundled_inputs_validate() {
    let pairs = [
        (
            "curve",
            &["circle", "circle_reversed", "circle_mult2", "conic_boundary"][..],
        ),
        ("chain", &["disk", "disk_plus_line", "conic_disk"][..]),
        ("section", &["z0", "z1"][..]),
    ];
    for (kind, files) in pairs {
        let s = schema(kind);
        for f in files {
            assert_valid(&s, &load(&root().join("data").join(format!("{f}.json"))), f);
        }
    }
}

#[test]
fn schemas_reject_what_the_parsers_reject() {
    let curve = schema("curve");
    let extra = serde_json::json!({"dimension": 1, "components": [], "colour": "red"});
    assert!(!curve.is_valid(&extra));
    assert!(projlink::io::parse_curve(&extra.to_string()).is_err());
    let section = schema("section");
    let missing = serde_json::json!({"dimension": 2, "degree": 1, "re": [1, 0, 0]});
    assert!(!section.is_valid(&missing));
    assert!(projlink::io::parse_section(&missing.to_string()).is_err());
}

#[test]
fn emitted_records_validate() {
    let s = schema("record");
    for (name, r) in bundled_records() {
        assert_valid(&s, &r, name);
    }
    let failed = record(Command::Wind, |c| {
        c.curve = data("circle.json");
        c.section = data("z1.json");
        c.point = None;
        c.quadrature.clearance = 0.9;
    });
    assert!(failed["diagnostics"]["failure"].is_object());
    assert_valid(&s, &failed, "failure record");
}

/// Every `default` in the config schema agrees with `JobConfig::default()`.
fn check_defaults(schema: &Value, value: &Value, path: &str, seen: &mut usize) {
    if let Some(d) = schema.get("default") {
        if let Err(e) = close(d, value, 0.0, path) {
            panic!("schema default differs: {e}");
        }
        *seen += 1;
    }
    if let Some(props) = schema.get("properties").and_then(Value::as_object) {
        for (k, sub) in props {
            let v = value.get(k).unwrap_or(&Value::Null);
            check_defaults(sub, v, &format!("{path}.{k}"), seen);
        }
    }
}

#[test]
fn config_schema_matches_defaults() {
    let s = schema("job_config");
    let cfg = serde_json::to_value(JobConfig::default()).unwrap();
    assert_valid(&s, &cfg, "default config");
    let raw = load(&root().join("schemas/job_config.schema.json"));
    let mut seen = 0;
    check_defaults(&raw, &cfg, "$", &mut seen);
    assert!(seen >= 20, "only {seen} defaults listed");
}

/// Same keys and strings, numbers within `tol`.
fn close(a: &Value, b: &Value, tol: f64, path: &str) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs())) {
                Ok(())
            } else {
                Err(format!("{path}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => x
            .iter()
            .zip(y)
            .enumerate()
            .try_for_each(|(i, (p, q))| close(p, q, tol, &format!("{path}[{i}]"))),
        (Value::Object(x), Value::Object(y)) if x.len() == y.len() => x.iter().try_for_each(|(k, p)| match y.get(k) {
            Some(q) => close(p, q, tol, &format!("{path}.{k}")),
            None => Err(format!("{path}.{k}: missing")),
        }),
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: {a} vs {b}")),
    }
}

#[test]
fn records_match_golden_files() {
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let bless = std::env::var_os("PROJLINK_BLESS").is_some();
    for (name, r) in bundled_records() {
        let path = golden.join(format!("{name}.json"));
        if bless {
            std::fs::create_dir_all(&golden).unwrap();
            std::fs::write(&path, projlink::io::to_canonical_json(&r)).unwrap();
            continue;
        }
        let expected = load(&path);
        if let Err(e) = close(&r, &expected, 1e-9, name) {
            panic!("{e}");
        }
    }
}
