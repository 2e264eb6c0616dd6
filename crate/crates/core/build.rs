//! Links the reference LAPACK and BLAS used by the SDP cones.
//!
//! `SSBOUND_LAPACK_DIR` / `SSBOUND_BLAS_DIR` override the search paths;
//! `SSBOUND_LAPACK_LINK=dylib` links shared libraries instead of archives.

use std::env;
use std::path::Path;

const DEFAULT_LAPACK_DIRS: [&str; 2] = ["/usr/lib/x86_64-linux-gnu/lapack", "/usr/lib/aarch64-linux-gnu/lapack"];
const DEFAULT_BLAS_DIRS: [&str; 2] = ["/usr/lib/x86_64-linux-gnu/blas", "/usr/lib/aarch64-linux-gnu/blas"];

fn search(var: &str, defaults: &[&str]) {
    println!("cargo:rerun-if-env-changed={var}");
    if let Ok(dir) = env::var(var) {
        println!("cargo:rustc-link-search=native={dir}");
        return;
    }
    for dir in defaults {
        if Path::new(dir).is_dir() {
            println!("cargo:rustc-link-search=native={dir}");
        }
    }
}

fn main() {
    println!("cargo:rerun-if-changed=build.rs");
    println!("cargo:rerun-if-env-changed=SSBOUND_LAPACK_LINK");
    search("SSBOUND_LAPACK_DIR", &DEFAULT_LAPACK_DIRS);
    search("SSBOUND_BLAS_DIR", &DEFAULT_BLAS_DIRS);
    let kind = env::var("SSBOUND_LAPACK_LINK").unwrap_or_else(|_| "static".into());
    println!("cargo:rustc-link-lib={kind}=lapack");
    println!("cargo:rustc-link-lib={kind}=blas");
    println!("cargo:rustc-link-lib=dylib=gfortran");
}
