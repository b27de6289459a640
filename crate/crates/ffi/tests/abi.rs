use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use projlink_ffi::*;

fn data(name: &str) -> CString {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    CString::new(std::fs::read_to_string(p).unwrap()).unwrap()
}

fn last_error() -> String {
    let p = pl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Handles {
    curve: *mut PlCurve,
    z0: *mut PlSection,
    z1: *mut PlSection,
    disk: *mut PlChain,
}

impl Handles {
    fn new() -> Self {
        let mut h = Handles {
            curve: ptr::null_mut(),
            z0: ptr::null_mut(),
            z1: ptr::null_mut(),
            disk: ptr::null_mut(),
        };
        unsafe {
            assert_eq!(
                pl_curve_from_json(data("circle.json").as_ptr(), &mut h.curve),
                PlStatus::Ok
            );
            assert_eq!(pl_section_from_json(data("z0.json").as_ptr(), &mut h.z0), PlStatus::Ok);
            let (re, im) = ([0.0, 1.0, 0.0], [0.0; 3]);
            assert_eq!(
                pl_section_new(2, 1, re.as_ptr(), im.as_ptr(), 3, &mut h.z1),
                PlStatus::Ok
            );
            assert_eq!(
                pl_chain_from_json(data("disk.json").as_ptr(), &mut h.disk),
                PlStatus::Ok
            );
        }
        h
    }
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            pl_curve_free(self.curve);
            pl_section_free(self.z0);
            pl_section_free(self.z1);
            pl_chain_free(self.disk);
        }
    }
}

#[test]
fn invariants_through_the_abi() {
    let h = Handles::new();
    unsafe {
        let (mut w, mut err) = (0.0, 0.0);
        assert_eq!(pl_winding_number(h.curve, h.z0, &mut w, &mut err), PlStatus::Ok);
        assert!((w + 0.5).abs() < 1e-9 && err < 1e-9);
        assert_eq!(pl_winding_number(h.curve, h.z1, &mut w, ptr::null_mut()), PlStatus::Ok);
        assert!((w - 0.5).abs() < 1e-9);

        let mut link = 0.0;
        assert_eq!(pl_projective_linking(h.curve, h.z1, h.disk, 0, &mut link), PlStatus::Ok);
        assert!((link - 0.5).abs() < 1e-9);
        assert_eq!(
            pl_projective_linking(h.curve, h.z1, ptr::null(), 7, &mut link),
            PlStatus::Ok
        );
        assert!((link - 0.5).abs() < 1e-9);

        let mut aff = 0i64;
        assert_eq!(pl_affine_linking(h.curve, h.z1, &mut aff), PlStatus::Ok);
        assert_eq!(aff, 1);

        let mut mass = 0.0;
        assert_eq!(pl_chain_mass(h.disk, &mut mass), PlStatus::Ok);
        assert!((mass - 0.5).abs() < 1e-9);

        let mut est = 0.0;
        assert_eq!(pl_estimate_minimal_mass(h.curve, 2, 4, 0, &mut est), PlStatus::Ok);
        assert!((est - 0.5).abs() < 1e-6);

        let (re, im) = ([1.0, 0.0, 0.0], [0.0; 3]);
        let mut c = 0.0;
        assert_eq!(
            pl_best_constant(h.curve, re.as_ptr(), im.as_ptr(), 3, 3, &mut c),
            PlStatus::Ok
        );
        assert!((c - std::f64::consts::SQRT_2).abs() < 0.03);
    }
}

#[test]
fn failures_set_codes_and_messages() {
    let h = Handles::new();
    unsafe {
        let mut curve = ptr::null_mut();
        let bad = CString::new("{\"dimension\": 2}").unwrap();
        assert_eq!(pl_curve_from_json(bad.as_ptr(), &mut curve), PlStatus::InvalidInput);
        assert!(curve.is_null());
        assert!(last_error().contains("Schema"), "{}", last_error());

        let mut w = 42.0;
        assert_eq!(
            pl_winding_number(h.curve, ptr::null(), &mut w, ptr::null_mut()),
            PlStatus::NullPointer
        );
        assert_eq!(w, 42.0);

        // z0 − z1 meets the circle at t = 0
        let (re, im) = ([1.0, -1.0, 0.0], [0.0; 3]);
        let mut s = ptr::null_mut();
        assert_eq!(pl_section_new(2, 1, re.as_ptr(), im.as_ptr(), 3, &mut s), PlStatus::Ok);
        assert_eq!(
            pl_winding_number(h.curve, s, &mut w, ptr::null_mut()),
            PlStatus::Numerical
        );
        assert!(last_error().contains("ZeroOnCurve"));
        pl_section_free(s);

        assert_eq!(
            pl_section_new(2, 1, re.as_ptr(), im.as_ptr(), 2, &mut s),
            PlStatus::InvalidInput
        );
        let invalid = [0xffu8, 0];
        assert_eq!(
            pl_curve_from_json(invalid.as_ptr().cast(), &mut curve),
            PlStatus::InvalidUtf8
        );
    }
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/projlink.h")).unwrap();
    let src = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|s| s.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for f in exports {
        assert!(
            header.contains(&format!(" {f}(")) || header.contains(&format!("*{f}(")),
            "{f} missing from header"
        );
    }
}

/// Directory holding `libprojlink_ffi.a` for the profile under test.
fn lib_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_example_compiles_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("wind");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(manifest.join("examples/wind.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(lib_dir().join("libprojlink_ffi.a"))
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("a C compiler is installed");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Wind = -0.500000000000"), "{text}");
}
