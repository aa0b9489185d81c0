//! C interface to `dpc-core`.
//!
//! Point sets and clustering results are opaque heap handles created by
//! `dpc_points_*` / `dpc_cluster` and released with the matching `_free`
//! function. Every fallible call returns a [`DpcStatus`]; on failure a
//! message for the calling thread is available from
//! [`dpc_last_error_message`]. Point ids crossing the interface are 1-based.
//!
//! The header `include/dpc.h` is generated from this file at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use dpc_core::datagen::{generate, GenKind, GenSpec};
use dpc_core::io::{dedup, read_points, write_decision_graph, write_labels, write_points};
use dpc_core::pipeline::{run_dpc, with_threads, DpcResult, NOISE};
use dpc_core::{DpcError, DpcParams, PointSet, Strategy};

/// Status code returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NonFinite = 4,
    EmptyInput = 5,
    UnknownStrategy = 6,
    Io = 7,
    Parse = 8,
    ThreadPool = 9,
    /// An output buffer is shorter than the data to be copied.
    BufferTooSmall = 10,
    /// A Rust panic was caught at the boundary.
    Panic = 11,
}

/// Values accepted by the `strategy` argument of [`dpc_cluster`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpcStrategy {
    Priority = 0,
    Fenwick = 1,
    Incomplete = 2,
    BruteForce = 3,
}

/// Values accepted by the `kind` argument of [`dpc_points_generate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpcGenKind {
    Uniform = 0,
    Simden = 1,
    Varden = 2,
}

/// An immutable point set.
pub struct DpcPoints {
    inner: PointSet,
}

/// The outcome of one clustering run.
pub struct DpcClustering {
    inner: DpcResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: DpcStatus,
    msg: String,
}

impl Failure {
    fn new(status: DpcStatus, msg: impl Into<String>) -> Self {
        Failure {
            status,
            msg: msg.into(),
        }
    }

    fn null(arg: &str) -> Self {
        Failure::new(DpcStatus::NullPointer, format!("`{arg}` is null"))
    }
}

impl From<DpcError> for Failure {
    fn from(e: DpcError) -> Self {
        let status = match &e {
            DpcError::DimensionMismatch { .. } => DpcStatus::DimensionMismatch,
            DpcError::EmptyInput => DpcStatus::EmptyInput,
            DpcError::InvalidParams(_) => DpcStatus::InvalidArgument,
            DpcError::NonFinite { .. } => DpcStatus::NonFinite,
            DpcError::UnknownStrategy(_) => DpcStatus::UnknownStrategy,
            DpcError::Parse { .. } => DpcStatus::Parse,
            DpcError::Io { .. } => DpcStatus::Io,
            DpcError::ThreadPool(_) => DpcStatus::ThreadPool,
        };
        Failure::new(status, e.to_string())
    }
}

fn set_last_error(msg: Option<String>) {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = msg.map(|m| CString::new(m.replace('\0', " ")).expect("nul bytes removed"));
    });
}

/// Runs `f`, recording its error message (or a caught panic) for the
/// current thread.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DpcStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure::new(DpcStatus::Panic, format!("panic: {msg}")))
    });
    match outcome {
        Ok(()) => {
            set_last_error(None);
            DpcStatus::Ok
        }
        Err(f) => {
            set_last_error(Some(f.msg));
            f.status
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, arg: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure::null(arg))
}

unsafe fn path_arg(p: *const c_char, arg: &str) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(Failure::null(arg));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(DpcStatus::InvalidArgument, format!("`{arg}` is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies `src` into the caller's buffer of `len` elements.
unsafe fn copy_out<T: Copy>(src: impl ExactSizeIterator<Item = T>, out: *mut T, len: usize) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::null("out"));
    }
    if len < src.len() {
        return Err(Failure::new(
            DpcStatus::BufferTooSmall,
            format!("buffer holds {len} elements, {} needed", src.len()),
        ));
    }
    let dst = std::slice::from_raw_parts_mut(out, src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d = s;
    }
    Ok(())
}

fn strategy_from(code: u32) -> Result<Strategy, Failure> {
    Ok(match code {
        0 => Strategy::Priority,
        1 => Strategy::Fenwick,
        2 => Strategy::Incomplete,
        3 => Strategy::BruteForce,
        other => return Err(Failure::new(DpcStatus::UnknownStrategy, format!("unknown strategy code {other}"))),
    })
}

fn kind_from(code: u32) -> Result<GenKind, Failure> {
    Ok(match code {
        0 => GenKind::Uniform,
        1 => GenKind::Simden,
        2 => GenKind::Varden,
        other => return Err(Failure::new(DpcStatus::InvalidArgument, format!("unknown dataset kind code {other}"))),
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dpc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message describing the last failed call on this thread, or NULL if the
/// last call succeeded. Valid until the next call into the library from the
/// same thread.
#[no_mangle]
pub extern "C" fn dpc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Static name of a status code, e.g. `"buffer_too_small"`.
#[no_mangle]
pub extern "C" fn dpc_status_name(status: DpcStatus) -> *const c_char {
    let s: &'static str = match status {
        DpcStatus::Ok => "ok\0",
        DpcStatus::NullPointer => "null_pointer\0",
        DpcStatus::InvalidArgument => "invalid_argument\0",
        DpcStatus::DimensionMismatch => "dimension_mismatch\0",
        DpcStatus::NonFinite => "non_finite\0",
        DpcStatus::EmptyInput => "empty_input\0",
        DpcStatus::UnknownStrategy => "unknown_strategy\0",
        DpcStatus::Io => "io\0",
        DpcStatus::Parse => "parse\0",
        DpcStatus::ThreadPool => "thread_pool\0",
        DpcStatus::BufferTooSmall => "buffer_too_small\0",
        DpcStatus::Panic => "panic\0",
    };
    s.as_ptr().cast()
}

/// Creates a point set from `n * d` row-major coordinates, which are copied.
///
/// # Safety
/// `coords` must point to `n * d` readable doubles and `out` to writable
/// storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_new(coords: *const f64, n: usize, d: usize, out: *mut *mut DpcPoints) -> DpcStatus {
    guard(|| {
        if coords.is_null() {
            return Err(Failure::null("coords"));
        }
        let len = n
            .checked_mul(d)
            .ok_or_else(|| Failure::new(DpcStatus::InvalidArgument, "n * d overflows"))?;
        let data = std::slice::from_raw_parts(coords, len).to_vec();
        let inner = PointSet::new(data, d)?;
        store(out, DpcPoints { inner })
    })
}

/// Reads a CSV or binary point file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_read(path: *const c_char, out: *mut *mut DpcPoints) -> DpcStatus {
    guard(|| {
        let inner = read_points(path_arg(path, "path")?)?;
        store(out, DpcPoints { inner })
    })
}

/// Generates a synthetic set with the default cluster count and domain.
/// `kind` is a [`DpcGenKind`] value.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_generate(
    kind: u32,
    n: usize,
    d: usize,
    seed: u64,
    out: *mut *mut DpcPoints,
) -> DpcStatus {
    guard(|| {
        let inner = generate(&GenSpec::new(kind_from(kind)?, n, d, seed))?;
        store(out, DpcPoints { inner })
    })
}

/// New handle holding `points` without exact duplicate rows.
///
/// # Safety
/// `points` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_dedup(points: *const DpcPoints, out: *mut *mut DpcPoints) -> DpcStatus {
    guard(|| {
        let p = as_ref(points, "points")?;
        store(out, DpcPoints { inner: dedup(&p.inner) })
    })
}

/// Number of points, 0 for NULL.
///
/// # Safety
/// `points` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_len(points: *const DpcPoints) -> usize {
    points.as_ref().map_or(0, |p| p.inner.len())
}

/// Dimension, 0 for NULL.
///
/// # Safety
/// `points` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_dim(points: *const DpcPoints) -> usize {
    points.as_ref().map_or(0, |p| p.inner.dim())
}

/// Copies the row-major coordinates into `out`, which holds `len` doubles.
///
/// # Safety
/// `points` must be a live handle and `out` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_coords(points: *const DpcPoints, out: *mut f64, len: usize) -> DpcStatus {
    guard(|| {
        let p = as_ref(points, "points")?;
        copy_out(p.inner.coords().iter().copied(), out, len)
    })
}

/// Writes the points as CSV.
///
/// # Safety
/// `points` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_write(points: *const DpcPoints, path: *const c_char) -> DpcStatus {
    guard(|| {
        let p = as_ref(points, "points")?;
        write_points(path_arg(path, "path")?, &p.inner)?;
        Ok(())
    })
}

/// # Safety
/// `points` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpc_points_free(points: *mut DpcPoints) {
    if !points.is_null() {
        drop(Box::from_raw(points));
    }
}

/// Clusters `points`. `strategy` is a [`DpcStrategy`] value and `threads`
/// the worker count, 0 meaning one per core.
///
/// # Safety
/// `points` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dpc_cluster(
    points: *const DpcPoints,
    d_cut: f64,
    rho_min: f64,
    delta_min: f64,
    strategy: u32,
    threads: usize,
    out: *mut *mut DpcClustering,
) -> DpcStatus {
    guard(|| {
        let p = as_ref(points, "points")?;
        if out.is_null() {
            return Err(Failure::null("out"));
        }
        let strategy = strategy_from(strategy)?;
        let params = DpcParams::new(d_cut, rho_min, delta_min)?;
        let inner = with_threads(threads, || run_dpc(&p.inner, &params, strategy))??;
        store(out, DpcClustering { inner })
    })
}

/// Number of clustered points, 0 for NULL.
///
/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_len(c: *const DpcClustering) -> usize {
    c.as_ref().map_or(0, |c| c.inner.len())
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_num_clusters(c: *const DpcClustering) -> usize {
    c.as_ref().map_or(0, |c| c.inner.num_clusters())
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_num_noise(c: *const DpcClustering) -> usize {
    c.as_ref().map_or(0, |c| c.inner.num_noise())
}

/// Cluster label per point: the 1-based id of the smallest member of its
/// cluster, or -1 for noise.
///
/// # Safety
/// `c` must be a live handle and `out` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_labels(c: *const DpcClustering, out: *mut i64, len: usize) -> DpcStatus {
    guard(|| copy_out(as_ref(c, "c")?.inner.labels.iter().copied(), out, len))
}

/// Density of each point.
///
/// # Safety
/// `c` must be a live handle and `out` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_densities(c: *const DpcClustering, out: *mut u64, len: usize) -> DpcStatus {
    guard(|| copy_out(as_ref(c, "c")?.inner.rho.iter().copied(), out, len))
}

/// 1-based id of each point's dependent point, or -1 when it has none
/// (noise and the highest-priority point).
///
/// # Safety
/// `c` must be a live handle and `out` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_dependents(c: *const DpcClustering, out: *mut i64, len: usize) -> DpcStatus {
    guard(|| {
        let lambda = &as_ref(c, "c")?.inner.lambda;
        copy_out(lambda.iter().map(|l| l.map_or(NOISE, |id| id as i64 + 1)), out, len)
    })
}

/// Dependent distance of each point, `INFINITY` where there is no
/// dependent point.
///
/// # Safety
/// `c` must be a live handle and `out` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_deltas(c: *const DpcClustering, out: *mut f64, len: usize) -> DpcStatus {
    guard(|| copy_out(as_ref(c, "c")?.inner.delta.iter().copied(), out, len))
}

/// 1-based center ids in ascending order; `len` must be at least
/// [`dpc_clustering_num_clusters`].
///
/// # Safety
/// `c` must be a live handle and `out` writable for `len` elements.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_centers(c: *const DpcClustering, out: *mut u64, len: usize) -> DpcStatus {
    guard(|| {
        let centers = &as_ref(c, "c")?.inner.centers;
        copy_out(centers.iter().map(|&id| id as u64 + 1), out, len)
    })
}

/// Writes the `id,label` file.
///
/// # Safety
/// `c` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_write_labels(c: *const DpcClustering, path: *const c_char) -> DpcStatus {
    guard(|| {
        let c = as_ref(c, "c")?;
        write_labels(path_arg(path, "path")?, &c.inner)?;
        Ok(())
    })
}

/// Writes the `id,rho,delta` decision graph.
///
/// # Safety
/// `c` must be a live handle and `path` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_write_decision_graph(c: *const DpcClustering, path: *const c_char) -> DpcStatus {
    guard(|| {
        let c = as_ref(c, "c")?;
        write_decision_graph(path_arg(path, "path")?, &c.inner)?;
        Ok(())
    })
}

/// # Safety
/// `c` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dpc_clustering_free(c: *mut DpcClustering) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}
