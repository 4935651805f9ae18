use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gse_tail_ffi::*;

const SIGMA: [f64; 9] = [1.33, -0.067, 2.63, -0.067, 0.25, -0.50, 2.63, -0.50, 5.76];
const MU: [f64; 3] = [1.3, 0.8, 3.2];

fn spec(root: GseRoot) -> GseSpec {
    GseSpec {
        n: 3,
        family: GseFamily::Normal,
        dof: 0.0,
        skew: GseSkew::Half,
        skew_dof: 0.0,
        root,
        mu: MU.as_ptr(),
        sigma: SIGMA.as_ptr(),
        gamma: ptr::null(),
    }
}

fn last_error() -> String {
    let p = gse_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn table_scenario_through_the_c_api() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { gse_distribution_new(&spec(GseRoot::Cholesky), &mut h) }, GseStatus::Ok);
    assert_eq!(unsafe { gse_distribution_dim(h) }, 3);
    let q = [0.8, 0.9, 0.95];
    let mut cov = [0.0; 9];
    assert_eq!(unsafe { gse_mtcov(h, q.as_ptr(), cov.as_mut_ptr()) }, GseStatus::Ok);
    let expected = [0.2908, -0.0146, 0.5751, -0.0146, 0.0400, -0.0875, 0.5751, -0.0875, 1.2243];
    for (a, b) in cov.iter().zip(expected) {
        assert!((a - b).abs() < 1e-3, "{cov:?}");
    }
    let mut corr = [0.0; 9];
    assert_eq!(unsafe { gse_mtcorr(h, q.as_ptr(), corr.as_mut_ptr()) }, GseStatus::Ok);
    assert_eq!(corr[0], 1.0);
    let mut mean = [0.0; 3];
    assert_eq!(unsafe { gse_mtce(h, q.as_ptr(), mean.as_mut_ptr()) }, GseStatus::Ok);
    let mut var = 0.0;
    assert_eq!(unsafe { gse_marginal_var(h, 0, 0.5, &mut var) }, GseStatus::Ok);
    assert!((var - 1.3).abs() < 1e-12);
    let mut dens = 0.0;
    assert_eq!(unsafe { gse_pdf(h, MU.as_ptr(), &mut dens) }, GseStatus::Ok);
    assert!(dens > 0.0);
    unsafe { gse_distribution_free(h) };
}

#[test]
fn errors_set_status_and_message() {
    let mut h = ptr::null_mut();
    let bad_sigma = [1.0, 2.0, 0.0, 2.0, 1.0, 0.0, 0.0, 0.0, 1.0];
    let mut s = spec(GseRoot::Symmetric);
    s.sigma = bad_sigma.as_ptr();
    assert_eq!(unsafe { gse_distribution_new(&s, &mut h) }, GseStatus::NotPositiveDefinite);
    assert!(h.is_null());
    assert!(last_error().contains("sigma"), "{}", last_error());

    assert_eq!(unsafe { gse_distribution_new(ptr::null(), &mut h) }, GseStatus::NullPointer);
    assert_eq!(last_error(), "spec is null");

    let mut s = spec(GseRoot::Symmetric);
    s.family = GseFamily::StudentT;
    s.dof = 4.0;
    assert_eq!(unsafe { gse_distribution_new(&s, &mut h) }, GseStatus::Ok);
    let q = [0.8, 0.9, 0.95];
    let mut out = [0.0; 9];
    assert_eq!(unsafe { gse_mtcov(h, q.as_ptr(), out.as_mut_ptr()) }, GseStatus::Parameter);
    assert!(last_error().contains("m > 4"), "{}", last_error());
    let mut tv = 0.0;
    assert_eq!(unsafe { gse_tv(h, 0.5, &mut tv) }, GseStatus::Dimension);
    assert_eq!(unsafe { gse_mtcov(ptr::null(), q.as_ptr(), out.as_mut_ptr()) }, GseStatus::NullPointer);
    unsafe { gse_distribution_free(h) };
    unsafe { gse_distribution_free(ptr::null_mut()) };
}

#[test]
fn univariate_tail_variance() {
    let (mu, sigma) = ([0.0], [1.0]);
    let s = GseSpec { n: 1, mu: mu.as_ptr(), sigma: sigma.as_ptr(), ..spec(GseRoot::Symmetric) };
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { gse_distribution_new(&s, &mut h) }, GseStatus::Ok);
    let mut tv = 0.0;
    assert_eq!(unsafe { gse_tv(h, 0.5, &mut tv) }, GseStatus::Ok);
    assert!((tv - (1.0 - 2.0 / std::f64::consts::PI)).abs() < 1e-9);
    unsafe { gse_distribution_free(h) };
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(gse_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include").join("gse_tail.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).expect("generated header");
    for f in [
        "gse_distribution_new",
        "gse_distribution_free",
        "gse_pdf",
        "gse_marginal_var",
        "gse_mtce",
        "gse_mtcov",
        "gse_mtcorr",
        "gse_tv",
        "gse_last_error",
        "typedef struct GseHandle GseHandle",
        "GSE_STATUS_OK = 0",
    ] {
        assert!(text.contains(f), "header lacks {f}");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "gse_tail.h"

int main(void) {
    double mu[2] = {0.0, 0.0};
    double sigma[4] = {1.0, 0.0, 0.0, 1.0};
    GseSpec spec = {2, GSE_FAMILY_NORMAL, 0.0, GSE_SKEW_HALF, 0.0, GSE_ROOT_SYMMETRIC, mu, sigma, NULL};
    GseHandle *h = NULL;
    if (gse_distribution_new(&spec, &h) != GSE_STATUS_OK) return 1;
    double q[2] = {0.5, 0.5};
    double cov[4];
    if (gse_mtcov(h, q, cov) != GSE_STATUS_OK) return 2;
    double want = 1.0 - 2.0 / 3.14159265358979323846;
    if (fabs(cov[0] - want) > 1e-7 || fabs(cov[1]) > 1e-7) return 3;
    sigma[1] = 5.0;
    GseHandle *bad = NULL;
    if (gse_distribution_new(&spec, &bad) == GSE_STATUS_OK) return 4;
    printf("%s\n", gse_last_error());
    gse_distribution_free(h);
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libgse_tail_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let dir = std::env::temp_dir().join(format!("gse_tail_ffi_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let bin = dir.join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert!(String::from_utf8_lossy(&out.stdout).contains("not symmetric positive definite"));
    let _ = std::fs::remove_dir_all(&dir);
}
