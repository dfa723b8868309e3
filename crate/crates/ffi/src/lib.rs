//! C ABI over `metric_lens`.
//!
//! Spaces live behind the opaque `MlSpace` handle, created by one of the
//! `ml_space_*` constructors and released with `ml_space_free`. Every
//! fallible call returns an `MlStatus`; on failure `ml_last_error_message`
//! describes the most recent error on the calling thread. Panics never
//! cross the boundary and are reported as `ML_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use metric_lens::calculus::loops::ScalarField;
use metric_lens::gallery::{euclidean_lens_diameter, generate, GeneratorSpec};
use metric_lens::hyperbolicity::{certify_tree, four_point_delta, space_thinness, tripod_lengths, GeodesicMode};
use metric_lens::lens::{diamond_scan, hyp_distortion_witness, lens_diameter_check, LensIndex, ScanConfig};
use metric_lens::space::{geodesicity_defect, metric_from_graph, validate_flat, Ball, GraphSpec};
use metric_lens::{Error, FiniteMetricSpace};

/// Opaque handle to a validated finite metric space.
pub struct MlSpace {
    inner: FiniteMetricSpace,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidMetric = 3,
    InvalidGraph = 4,
    IndexOutOfRange = 5,
    ParameterOutOfRange = 6,
    EmptyIntersection = 7,
    InvalidSpec = 8,
    GeodesicCapExceeded = 9,
    InvalidInput = 10,
    Panic = 11,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MlStatus {
    match e {
        Error::NotSquare { .. }
        | Error::EmptySpace
        | Error::InvalidMetric(_)
        | Error::NegativeTripod { .. }
        | Error::PerturbationBrokeMetric(_) => MlStatus::InvalidMetric,
        Error::DisconnectedGraph { .. } | Error::InvalidGraph(_) => MlStatus::InvalidGraph,
        Error::IndexOutOfRange { .. } => MlStatus::IndexOutOfRange,
        Error::ParameterOutOfRange { .. } => MlStatus::ParameterOutOfRange,
        Error::EmptyIntersection => MlStatus::EmptyIntersection,
        Error::InvalidSpec(_) => MlStatus::InvalidSpec,
        Error::GeodesicEnumerationCapExceeded { .. } => MlStatus::GeodesicCapExceeded,
        _ => MlStatus::InvalidInput,
    }
}

struct Fail(MlStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(MlStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MlStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            MlStatus::Panic
        }
    }
}

unsafe fn space_ref<'a>(space: *const MlSpace) -> Result<&'a FiniteMetricSpace, Fail> {
    space.as_ref().map(|s| &s.inner).ok_or_else(|| null("space"))
}

unsafe fn write<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn boxed(space: FiniteMetricSpace) -> *mut MlSpace {
    Box::into_raw(Box::new(MlSpace { inner: space }))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ml_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ml_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a space from a row-major `n × n` distance matrix.
///
/// # Safety
/// `data` must point to `n * n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_space_from_matrix(data: *const f64, n: usize, tol_metric: f64, out: *mut *mut MlSpace) -> MlStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let len = n.checked_mul(n).ok_or_else(|| Fail(MlStatus::InvalidInput, "matrix size overflows".into()))?;
        let flat = std::slice::from_raw_parts(data, len).to_vec();
        let space = validate_flat(n, flat, tol_metric)?;
        out.write(boxed(space));
        Ok(())
    })
}

/// Shortest-path metric of an undirected weighted graph with `m` edges
/// `(us[k], vs[k], weights[k])`.
///
/// # Safety
/// `us`, `vs` and `weights` must point to `m` readable entries each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_space_from_edges(
    vertex_count: usize,
    us: *const usize,
    vs: *const usize,
    weights: *const f64,
    m: usize,
    out: *mut *mut MlSpace,
) -> MlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let edges = if m == 0 {
            Vec::new()
        } else {
            if us.is_null() || vs.is_null() || weights.is_null() {
                return Err(null("edge arrays"));
            }
            let (u, v, w) = (
                std::slice::from_raw_parts(us, m),
                std::slice::from_raw_parts(vs, m),
                std::slice::from_raw_parts(weights, m),
            );
            (0..m).map(|k| (u[k], v[k], w[k])).collect()
        };
        out.write(boxed(metric_from_graph(&GraphSpec::new(vertex_count, edges))?));
        Ok(())
    })
}

/// Builds a space from a JSON generator spec such as
/// `{"kind": "random_tree", "n": 50, "seed": 7}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_space_generate(spec_json: *const c_char, out: *mut *mut MlSpace) -> MlStatus {
    guard(|| {
        if spec_json.is_null() {
            return Err(null("spec_json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(spec_json).to_str().map_err(|e| Fail(MlStatus::InvalidUtf8, e.to_string()))?;
        let spec: GeneratorSpec = serde_json::from_str(text).map_err(|e| Fail(MlStatus::InvalidSpec, e.to_string()))?;
        out.write(boxed(generate(&spec)?));
        Ok(())
    })
}

/// Releases a space. NULL is ignored.
///
/// # Safety
/// `space` must come from an `ml_space_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ml_space_free(space: *mut MlSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Number of points, or 0 for NULL.
///
/// # Safety
/// `space` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ml_space_len(space: *const MlSpace) -> usize {
    space.as_ref().map_or(0, |s| s.inner.len())
}

/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_space_distance(space: *const MlSpace, i: usize, j: usize, out: *mut f64) -> MlStatus {
    guard(|| {
        let s = space_ref(space)?;
        s.check_index(i)?;
        s.check_index(j)?;
        write(out, s.dist(i, j), "out")
    })
}

/// The edge-length quantum used as the discrete pass/fail allowance.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_space_quantum(space: *const MlSpace, out: *mut f64) -> MlStatus {
    guard(|| write(out, space_ref(space)?.quantum(), "out"))
}

/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_geodesicity_defect(space: *const MlSpace, out: *mut f64) -> MlStatus {
    guard(|| write(out, geodesicity_defect(space_ref(space)?), "out"))
}

/// Tripod lengths `(a₁, a₂, a₃)` of a triangle.
///
/// # Safety
/// `space` must be a live handle; `out` must point to 3 writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ml_tripod_lengths(space: *const MlSpace, x1: usize, x2: usize, x3: usize, out: *mut f64) -> MlStatus {
    guard(|| {
        let a = tripod_lengths(space_ref(space)?, x1, x2, x3)?;
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(a.as_ptr(), out, 3);
        Ok(())
    })
}

/// Four-point δ over all quadruples, or `budget` sampled ones when there are more.
///
/// # Safety
/// `space` must be a live handle; `delta` and `exact` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_four_point_delta(
    space: *const MlSpace,
    budget: usize,
    seed: u64,
    delta: *mut f64,
    exact: *mut bool,
) -> MlStatus {
    guard(|| {
        let r = four_point_delta(space_ref(space)?, budget, seed);
        write(delta, r.delta, "delta")?;
        write(exact, r.exact, "exact")
    })
}

/// Thin-triangle δ. `exhaustive_cap = 0` uses canonical geodesics; otherwise
/// every geodesic choice up to that many per vertex pair.
///
/// # Safety
/// `space` must be a live handle; `delta` and `exact` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_space_thinness(
    space: *const MlSpace,
    budget: usize,
    seed: u64,
    exhaustive_cap: usize,
    delta: *mut f64,
    exact: *mut bool,
) -> MlStatus {
    guard(|| {
        let mode = if exhaustive_cap == 0 { GeodesicMode::Canonical } else { GeodesicMode::Exhaustive { cap: exhaustive_cap } };
        let r = space_thinness(space_ref(space)?, budget, seed, mode)?;
        write(delta, r.delta, "delta")?;
        write(exact, r.exact, "exact")
    })
}

/// # Safety
/// `space` must be a live handle; `is_tree` and `delta4` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_certify_tree(space: *const MlSpace, tol: f64, is_tree: *mut bool, delta4: *mut f64) -> MlStatus {
    guard(|| {
        let c = certify_tree(space_ref(space)?, tol);
        write(is_tree, c.is_tree, "is_tree")?;
        write(delta4, c.delta4, "delta4")
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MlHypWitness {
    pub z: usize,
    pub nu: f64,
    pub target: f64,
    pub z_offset: f64,
    pub inner_excess: f64,
    pub outer_delta_needed: f64,
    pub inner_ok: bool,
    pub degenerate: bool,
    pub swapped: bool,
}

/// Constructive witness for `B(x, r) ∩ B(y, s)`.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_hyp_witness(
    space: *const MlSpace,
    x: usize,
    r: f64,
    y: usize,
    s: f64,
    out: *mut MlHypWitness,
) -> MlStatus {
    guard(|| {
        let w = hyp_distortion_witness(space_ref(space)?, x, r, y, s)?;
        write(
            out,
            MlHypWitness {
                z: w.z,
                nu: w.nu,
                target: w.target,
                z_offset: w.z_offset,
                inner_excess: w.inner_excess,
                outer_delta_needed: w.outer_delta_needed,
                inner_ok: w.inner_ok,
                degenerate: w.degenerate,
                swapped: w.swapped,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MlLensReport {
    pub intersection_size: usize,
    pub inner_center: usize,
    pub inner_radius: f64,
    pub outer_center: usize,
    pub outer_radius: f64,
    /// Outer radius over inner radius; `INFINITY` when only the inner radius is 0.
    pub lambda_mult: f64,
    pub gap_add: f64,
    pub is_ball: bool,
}

/// Best inner and outer balls of `B(x, r) ∩ B(y, s)`.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_lens_report(
    space: *const MlSpace,
    x: usize,
    r: f64,
    y: usize,
    s: f64,
    out: *mut MlLensReport,
) -> MlStatus {
    guard(|| {
        let sp = space_ref(space)?;
        let rep = LensIndex::new(sp).report(Ball::new(x, r), Ball::new(y, s), false)?;
        write(
            out,
            MlLensReport {
                intersection_size: rep.intersection.len(),
                inner_center: rep.inner.center,
                inner_radius: rep.inner.radius,
                outer_center: rep.outer.center,
                outer_radius: rep.outer.radius,
                lambda_mult: rep.lambda_mult,
                gap_add: rep.gap_add,
                is_ball: rep.is_ball,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MlScanOptions {
    /// 0 scans every ball pair.
    pub pair_budget: usize,
    pub seed: u64,
    pub restrict_far: bool,
    pub witnesses: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MlScanSummary {
    pub pairs_considered: u64,
    pub pairs_filtered: u64,
    pub pairs_empty: u64,
    pub pairs_scanned: u64,
    pub exact_balls: u64,
    pub sup_lambda_mult: f64,
    pub sup_gap_add: f64,
    pub quantization_allowance: f64,
    /// Only meaningful when witnesses were requested.
    pub witness_inner_failures: u64,
    pub witness_max_outer_delta: f64,
    pub exhaustive: bool,
}

/// Distortion scan over ball pairs at every realized radius. `options` may be
/// NULL for an exhaustive scan with the far-pair restriction.
///
/// # Safety
/// `space` must be a live handle; `options` NULL or readable; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ml_diamond_scan(space: *const MlSpace, options: *const MlScanOptions, out: *mut MlScanSummary) -> MlStatus {
    guard(|| {
        let sp = space_ref(space)?;
        let mut cfg = ScanConfig::default();
        if let Some(o) = options.as_ref() {
            cfg.pair_budget = (o.pair_budget > 0).then_some(o.pair_budget);
            cfg.seed = o.seed;
            cfg.restrict_far = o.restrict_far;
            cfg.witnesses = o.witnesses;
        }
        let p = diamond_scan(sp, &cfg);
        let w = p.witness_summary.clone().unwrap_or_default();
        write(
            out,
            MlScanSummary {
                pairs_considered: p.pairs_considered,
                pairs_filtered: p.pairs_filtered,
                pairs_empty: p.pairs_empty,
                pairs_scanned: p.pairs_scanned,
                exact_balls: p.exact_balls,
                sup_lambda_mult: p.sup_lambda_mult,
                sup_gap_add: p.sup_gap_add,
                quantization_allowance: p.quantization_allowance,
                witness_inner_failures: w.inner_failures,
                witness_max_outer_delta: w.max_outer_delta_needed,
                exhaustive: p.exhaustive,
            },
            "out",
        )
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct MlBoundCheck {
    pub diam: f64,
    pub bound: f64,
    pub allowance: f64,
    pub pass: bool,
}

/// `diam(B(x, t·d + h) ∩ B(y, (1-t)·d + h)) <= 4λh` within one quantum.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_lens_diameter_check(
    space: *const MlSpace,
    x: usize,
    y: usize,
    t: f64,
    h: f64,
    lambda: f64,
    out: *mut MlBoundCheck,
) -> MlStatus {
    guard(|| {
        let c = lens_diameter_check(space_ref(space)?, x, y, t, h, lambda)?;
        write(out, MlBoundCheck { diam: c.diam, bound: c.bound, allowance: c.allowance, pass: c.pass }, "out")
    })
}

/// Closed-form and sampled diameter of the planar lens with parameters `(r1, h)`.
///
/// # Safety
/// `closed_form` and `sampled` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ml_euclidean_lens_diameter(
    r1: f64,
    h: f64,
    samples: usize,
    seed: u64,
    closed_form: *mut f64,
    sampled: *mut f64,
) -> MlStatus {
    guard(|| {
        let l = euclidean_lens_diameter(r1, h, samples, seed)?;
        write(closed_form, l.closed_form, "closed_form")?;
        write(sampled, l.sampled, "sampled")
    })
}

/// Checks that `values` (one per point) is `lip`-Lipschitz on the space.
///
/// # Safety
/// `space` must be a live handle; `values` must point to `ml_space_len(space)` doubles.
#[no_mangle]
pub unsafe extern "C" fn ml_check_lipschitz(space: *const MlSpace, values: *const f64, lip: f64) -> MlStatus {
    guard(|| {
        let sp = space_ref(space)?;
        if values.is_null() {
            return Err(null("values"));
        }
        let v = std::slice::from_raw_parts(values, sp.len()).to_vec();
        ScalarField::new(sp, v, lip)?;
        Ok(())
    })
}
