use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use metric_lens_ffi::*;

fn last_error() -> String {
    let p = ml_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn path_space(n: usize) -> *mut MlSpace {
    let us: Vec<usize> = (0..n - 1).collect();
    let vs: Vec<usize> = (1..n).collect();
    let ws = vec![1.0; n - 1];
    let mut s = ptr::null_mut();
    let st = unsafe { ml_space_from_edges(n, us.as_ptr(), vs.as_ptr(), ws.as_ptr(), n - 1, &mut s) };
    assert_eq!(st, MlStatus::Ok);
    s
}

#[test]
fn matrix_round_trip_and_errors() {
    let d = [0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ml_space_from_matrix(d.as_ptr(), 3, 1e-9, &mut s) }, MlStatus::Ok);
    assert_eq!(unsafe { ml_space_len(s) }, 3);
    let mut v = 0.0;
    assert_eq!(unsafe { ml_space_distance(s, 0, 2, &mut v) }, MlStatus::Ok);
    assert_eq!(v, 2.0);
    assert_eq!(unsafe { ml_space_distance(s, 0, 3, &mut v) }, MlStatus::IndexOutOfRange);
    assert!(last_error().contains('3'));
    let mut defect = -1.0;
    assert_eq!(unsafe { ml_geodesicity_defect(s, &mut defect) }, MlStatus::Ok);
    // adjacent points have no midpoint: best candidate is off by 1/2
    assert_eq!(defect, 0.5);
    unsafe { ml_space_free(s) };

    let bad = [0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ml_space_from_matrix(bad.as_ptr(), 3, 1e-9, &mut s) }, MlStatus::InvalidMetric);
    assert!(s.is_null());
    assert_eq!(unsafe { ml_space_from_matrix(ptr::null(), 3, 1e-9, &mut s) }, MlStatus::NullPointer);
    assert_eq!(unsafe { ml_space_len(ptr::null()) }, 0);
    unsafe { ml_space_free(ptr::null_mut()) };
}

#[test]
fn disconnected_graph_is_rejected() {
    let (us, vs, ws) = ([0usize], [1usize], [1.0]);
    let mut s = ptr::null_mut();
    let st = unsafe { ml_space_from_edges(3, us.as_ptr(), vs.as_ptr(), ws.as_ptr(), 1, &mut s) };
    assert_eq!(st, MlStatus::InvalidGraph);
}

#[test]
fn generated_tree_is_certified() {
    let spec = CString::new(r#"{"kind": "random_tree", "n": 30, "seed": 4}"#).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { ml_space_generate(spec.as_ptr(), &mut s) }, MlStatus::Ok);
    let (mut is_tree, mut d4) = (false, -1.0);
    assert_eq!(unsafe { ml_certify_tree(s, 1e-9, &mut is_tree, &mut d4) }, MlStatus::Ok);
    assert!(is_tree);
    assert_eq!(d4, 0.0);
    let (mut delta, mut exact) = (-1.0, false);
    assert_eq!(unsafe { ml_four_point_delta(s, 1_000_000, 1, &mut delta, &mut exact) }, MlStatus::Ok);
    assert!(exact && delta == 0.0);
    assert_eq!(unsafe { ml_space_thinness(s, 1_000_000, 1, 0, &mut delta, &mut exact) }, MlStatus::Ok);
    assert_eq!(delta, 0.0);
    unsafe { ml_space_free(s) };

    let junk = CString::new(r#"{"kind": "moebius"}"#).unwrap();
    assert_eq!(unsafe { ml_space_generate(junk.as_ptr(), &mut s) }, MlStatus::InvalidSpec);
    assert!(!last_error().is_empty());
}

#[test]
fn tripod_and_lens_queries_on_a_path() {
    let s = path_space(9);
    let mut a = [0.0; 3];
    assert_eq!(unsafe { ml_tripod_lengths(s, 0, 8, 4, a.as_mut_ptr()) }, MlStatus::Ok);
    assert_eq!(a, [4.0, 4.0, 0.0]);

    let mut rep = MlLensReport::default();
    assert_eq!(unsafe { ml_lens_report(s, 0, 5.0, 8, 5.0, &mut rep) }, MlStatus::Ok);
    // {3, 4, 5}
    assert_eq!(rep.intersection_size, 3);
    assert!(rep.is_ball);
    assert_eq!(rep.gap_add, 0.0);
    assert_eq!(unsafe { ml_lens_report(s, 0, 1.0, 8, 1.0, &mut rep) }, MlStatus::EmptyIntersection);

    let mut w = MlHypWitness::default();
    assert_eq!(unsafe { ml_hyp_witness(s, 0, 5.0, 8, 5.0, &mut w) }, MlStatus::Ok);
    assert_eq!(w.z, 4);

    let mut sum = MlScanSummary::default();
    assert_eq!(unsafe { ml_diamond_scan(s, ptr::null(), &mut sum) }, MlStatus::Ok);
    assert!(sum.exhaustive && sum.pairs_scanned > 0);
    assert!(sum.sup_gap_add <= sum.quantization_allowance);

    let opts = MlScanOptions { pair_budget: 10, seed: 3, restrict_far: false, witnesses: true };
    assert_eq!(unsafe { ml_diamond_scan(s, &opts, &mut sum) }, MlStatus::Ok);
    assert!(!sum.exhaustive);

    let mut check = MlBoundCheck::default();
    assert_eq!(unsafe { ml_lens_diameter_check(s, 0, 8, 0.5, 1.0, 1.0, &mut check) }, MlStatus::Ok);
    assert!(check.pass);
    assert_eq!(check.bound, 4.0);

    let field = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
    assert_eq!(unsafe { ml_check_lipschitz(s, field.as_ptr(), 1.0) }, MlStatus::Ok);
    assert_ne!(unsafe { ml_check_lipschitz(s, field.as_ptr(), 0.5) }, MlStatus::Ok);
    unsafe { ml_space_free(s) };
}

#[test]
fn planar_lens_closed_form() {
    let (mut closed, mut sampled) = (0.0, 0.0);
    assert_eq!(unsafe { ml_euclidean_lens_diameter(1.0, 0.1, 20_000, 1, &mut closed, &mut sampled) }, MlStatus::Ok);
    // 2 sqrt(2 r1 h + h^2)
    let oracle = 2.0 * (2.0f64 * 0.1 + 0.01).sqrt();
    assert!((closed - oracle).abs() < 1e-12);
    assert!((sampled - closed).abs() / closed < 0.02);
    assert_eq!(
        unsafe { ml_euclidean_lens_diameter(1.0, -1.0, 10, 1, &mut closed, &mut sampled) },
        MlStatus::ParameterOutOfRange
    );
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(ml_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let lib = target_dir().join("libmetric_lens_ffi.a");
    let header_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    if !lib.exists() || !header_dir.join("metric_lens.h").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping C smoke test: toolchain, header or static library unavailable");
        return;
    }
    let dir = std::env::temp_dir().join(format!("metric-lens-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "metric_lens.h"
int main(void) {
    double d[9] = {0, 1, 2, 1, 0, 1, 2, 1, 0};
    MlSpace *s = NULL;
    if (ml_space_from_matrix(d, 3, 1e-9, &s) != ML_STATUS_OK) return 1;
    double v = 0;
    if (ml_space_distance(s, 0, 2, &v) != ML_STATUS_OK || v != 2.0) return 2;
    if (ml_space_distance(s, 0, 7, &v) != ML_STATUS_INDEX_OUT_OF_RANGE) return 3;
    if (ml_last_error_message() == NULL) return 4;
    MlLensReport r;
    if (ml_lens_report(s, 0, 1.0, 2, 1.0, &r) != ML_STATUS_OK || r.intersection_size != 1) return 5;
    ml_space_free(s);
    printf("%s\n", ml_version());
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "smoke binary exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), env!("CARGO_PKG_VERSION"));
    let _ = std::fs::remove_dir_all(&dir);
}
