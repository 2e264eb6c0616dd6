use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ssbound_ffi::*;

const TWO_QUBIT: &str = "[model]\nkind = \"two_qubit\"\neps_c = 0.8\ngamma_c = 0.2\n\n[budget]\nlinear = 100\n";

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let p = ssb_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn two_qubit_round_trip() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(
            ssb_model_from_config(cstr(TWO_QUBIT).as_ptr(), &mut model),
            SsbStatus::Ok
        );
        assert!(ssb_last_error().is_null());
        assert_eq!(ssb_model_num_sites(model), 2);

        let mut budget = std::mem::zeroed::<SsbBudget>();
        assert_eq!(ssb_model_default_budget(model, &mut budget), SsbStatus::Ok);
        assert_eq!((budget.linear, budget.safety_net), (100, 1));

        let mut problem = ptr::null_mut();
        assert_eq!(ssb_problem_assemble(model, &budget, &mut problem), SsbStatus::Ok);
        assert!(ssb_problem_num_variables(problem) > 0);
        assert_eq!(ssb_problem_num_equalities(problem), 6);

        let mut interval = std::mem::zeroed::<SsbInterval>();
        assert_eq!(ssb_problem_certify(problem, 0.0, &mut interval), SsbStatus::Ok);
        let (mut lo, mut hi, mut dim) = (0.0, 0.0, 0usize);
        assert_eq!(ssb_model_exact(model, &mut lo, &mut hi, &mut dim), SsbStatus::Ok);
        assert_eq!(dim, 1);
        assert!((interval.lb.value - lo).abs() < 1e-6 && (interval.ub.value - hi).abs() < 1e-6);
        assert!(interval.trivial_lb < interval.lb.value && interval.ub.value < interval.trivial_ub);
        assert!(interval.lb.status <= 1 && interval.ub.status <= 1);

        let dir = std::env::temp_dir().join(format!("ssbound-ffi-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.dat-s");
        let c_path = cstr(path.to_str().unwrap());
        assert_eq!(ssb_problem_export_sdpa(problem, c_path.as_ptr()), SsbStatus::Ok);
        assert!(path.exists());
        std::fs::remove_dir_all(&dir).unwrap();

        assert_eq!(ssb_model_set_observable(model, cstr("Z1").as_ptr()), SsbStatus::Ok);
        let mut z = ptr::null_mut();
        assert_eq!(ssb_problem_assemble(model, &budget, &mut z), SsbStatus::Ok);
        let mut zi = std::mem::zeroed::<SsbInterval>();
        assert_eq!(ssb_problem_certify(z, 0.0, &mut zi), SsbStatus::Ok);
        assert!((zi.ub.value - zi.lb.value).abs() < 1e-6);
        assert!(zi.lb.value > -1.0 && zi.ub.value < 1.0);

        ssb_problem_free(z);
        ssb_problem_free(problem);
        ssb_model_free(model);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut model = ptr::null_mut();
        let bad = cstr("[model]\nkind = \"moebius\"\n");
        assert_eq!(ssb_model_from_config(bad.as_ptr(), &mut model), SsbStatus::ConfigError);
        assert!(model.is_null());
        assert!(last_error().contains("line 2"), "{}", last_error());

        assert_eq!(ssb_model_from_config(ptr::null(), &mut model), SsbStatus::NullPointer);
        assert_eq!(
            ssb_model_from_config(cstr(TWO_QUBIT).as_ptr(), ptr::null_mut()),
            SsbStatus::NullPointer
        );
        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(
            ssb_model_from_config(invalid.as_ptr().cast(), &mut model),
            SsbStatus::InvalidUtf8
        );

        assert_eq!(
            ssb_model_from_config(cstr(TWO_QUBIT).as_ptr(), &mut model),
            SsbStatus::Ok
        );
        assert_eq!(
            ssb_model_set_observable(model, cstr("Q9").as_ptr()),
            SsbStatus::InvalidArgument
        );
        assert!(!last_error().is_empty());

        // Unbounded without box rows and with an open cycle.
        let budget = SsbBudget {
            linear: 2,
            moment_matrix: 0,
            reduced: 0,
            all_subsets: 0,
            symmetry: 0,
            safety_net: 0,
        };
        let mut problem = ptr::null_mut();
        assert_eq!(ssb_problem_assemble(model, &budget, &mut problem), SsbStatus::Ok);
        let mut interval = std::mem::zeroed::<SsbInterval>();
        assert_eq!(
            ssb_problem_certify(problem, 0.0, &mut interval),
            SsbStatus::SolverFailure
        );
        assert!(interval.lb.status > 1 || interval.ub.status > 1);
        assert!(interval.lb.value.is_nan() || interval.ub.value.is_nan());

        assert_eq!(
            ssb_problem_certify(ptr::null(), 0.0, &mut interval),
            SsbStatus::NullPointer
        );
        assert_eq!(ssb_model_num_sites(ptr::null()), 0);
        ssb_problem_free(ptr::null_mut());
        ssb_model_free(ptr::null_mut());
        ssb_problem_free(problem);
        ssb_model_free(model);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(ssb_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/ssbound.h")
}

#[test]
fn header_lists_functions_and_status_codes() {
    let text = std::fs::read_to_string(header()).unwrap();
    let source = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("src/lib.rs")).unwrap();
    let exported: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() >= 12);
    for f in exported {
        assert!(text.contains(&format!("{f}(")), "{f} missing from header");
    }
    for (name, code) in [
        ("SSB_STATUS_OK", SsbStatus::Ok),
        ("SSB_STATUS_NULL_POINTER", SsbStatus::NullPointer),
        ("SSB_STATUS_INVALID_UTF8", SsbStatus::InvalidUtf8),
        ("SSB_STATUS_CONFIG_ERROR", SsbStatus::ConfigError),
        ("SSB_STATUS_INVALID_ARGUMENT", SsbStatus::InvalidArgument),
        ("SSB_STATUS_ASSEMBLY_ERROR", SsbStatus::AssemblyError),
        ("SSB_STATUS_SOLVER_FAILURE", SsbStatus::SolverFailure),
        ("SSB_STATUS_IO_ERROR", SsbStatus::IoError),
        ("SSB_STATUS_PANIC", SsbStatus::Panic),
    ] {
        assert!(text.contains(&format!("{name} = {}", code as i32)), "{name}");
    }
    assert!(text.contains("typedef struct SsbModel SsbModel;"));
    assert!(text.contains("typedef struct SsbProblem SsbProblem;"));
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "ssbound.h"

int main(void) {
    const char *cfg = "[model]\nkind = \"two_qubit\"\n\n[budget]\nlinear = 50\n";
    SsbModel *model = NULL;
    if (ssb_model_from_config(cfg, &model) != SSB_STATUS_OK) return 10;
    SsbBudget budget;
    if (ssb_model_default_budget(model, &budget) != SSB_STATUS_OK) return 11;
    SsbProblem *problem = NULL;
    if (ssb_problem_assemble(model, &budget, &problem) != SSB_STATUS_OK) return 12;
    SsbInterval iv;
    if (ssb_problem_certify(problem, 0.0, &iv) != SSB_STATUS_OK) return 13;
    double lo, hi;
    size_t dim;
    if (ssb_model_exact(model, &lo, &hi, &dim) != SSB_STATUS_OK) return 14;
    if (fabs(iv.lb.value - lo) > 1e-6 || fabs(iv.ub.value - hi) > 1e-6) return 15;
    if (ssb_model_from_config("[model", &model) != SSB_STATUS_CONFIG_ERROR) return 16;
    if (ssb_last_error() == NULL) return 17;
    printf("%.9f %.9f\n", iv.lb.value, iv.ub.value);
    ssb_problem_free(problem);
    ssb_model_free(model);
    return 0;
}
"#;

/// Directory holding the built `libssbound_ffi.so`.
fn library_dir() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let profile = exe.parent()?.parent()?;
    profile
        .join("libssbound_ffi.so")
        .exists()
        .then(|| profile.to_path_buf())
}

#[test]
fn c_program_links_against_shared_library() {
    let Some(lib) = library_dir() else {
        eprintln!("skipped: shared library not found next to the test binary");
        return;
    };
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipped: no C compiler");
        return;
    }
    let dir = std::env::temp_dir().join(format!("ssbound-ffi-c-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let exe = dir.join("main");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg(format!("-I{}", header().parent().unwrap().display()))
        .arg(format!("-L{}", lib.display()))
        .arg(format!("-Wl,-rpath,{}", lib.display()))
        .args(["-lssbound_ffi", "-lm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let values: Vec<f64> = String::from_utf8(run.stdout)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(values.len(), 2);
    assert!((values[0] - values[1]).abs() < 1e-6);
    std::fs::remove_dir_all(&dir).unwrap();
}
