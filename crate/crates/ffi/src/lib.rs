//! C ABI over the `cbtr` library.
//!
//! Datasets and reconstruction results are opaque handles owned by the
//! caller and released with the matching `*_free` function. Every fallible
//! call returns a [`CbtrStatus`]; on failure, [`cbtr_last_error`] gives a
//! message for the current thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cbtr::error::{Error, IngestError, MetricsError, NpcError, ReconstructError, SynthError};
use cbtr::ingest::parse_ais_csv;
use cbtr::metrics::evaluate;
use cbtr::synth::{generate_fleet, SynthConfig};
use cbtr::{run_cbtr_with_threads, CbtrConfig, Reconstruction, TrackDataset};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbtrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidConfig = 5,
    EmptyDataset = 6,
    MissingLabels = 7,
    OutOfRange = 8,
    BufferTooSmall = 9,
    Synth = 10,
    Internal = 11,
}

/// Loaded, time-sorted point set.
pub struct CbtrDataset {
    inner: TrackDataset,
}

/// Output of one reconstruction run.
pub struct CbtrRun {
    inner: Reconstruction,
}

/// Reconstruction constants; see `cbtr_config_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbtrConfigC {
    pub window_s: i64,
    pub moving_speed_sum: f64,
    pub time_weight_moving: f64,
    pub time_weight_steady: f64,
    pub angle_time_weight: f64,
    pub cos_moving_min: f64,
    pub cos_steady_min: f64,
    pub n_abnormal: usize,
    pub turn_rescue_dist_m: f64,
    pub turn_rescue_cos_min: f64,
}

impl From<CbtrConfig> for CbtrConfigC {
    fn from(c: CbtrConfig) -> Self {
        Self {
            window_s: c.window_s,
            moving_speed_sum: c.moving_speed_sum,
            time_weight_moving: c.time_weight_moving,
            time_weight_steady: c.time_weight_steady,
            angle_time_weight: c.angle_time_weight,
            cos_moving_min: c.cos_moving_min,
            cos_steady_min: c.cos_steady_min,
            n_abnormal: c.n_abnormal,
            turn_rescue_dist_m: c.turn_rescue_dist_m,
            turn_rescue_cos_min: c.turn_rescue_cos_min,
        }
    }
}

impl From<CbtrConfigC> for CbtrConfig {
    fn from(c: CbtrConfigC) -> Self {
        Self {
            window_s: c.window_s,
            moving_speed_sum: c.moving_speed_sum,
            time_weight_moving: c.time_weight_moving,
            time_weight_steady: c.time_weight_steady,
            angle_time_weight: c.angle_time_weight,
            cos_moving_min: c.cos_moving_min,
            cos_steady_min: c.cos_steady_min,
            n_abnormal: c.n_abnormal,
            turn_rescue_dist_m: c.turn_rescue_dist_m,
            turn_rescue_cos_min: c.turn_rescue_cos_min,
        }
    }
}

/// Scores of a run against the dataset's vessel ids.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CbtrEval {
    pub correct_neighbor_rate: f64,
    pub jumps: usize,
    pub merges: usize,
    pub n_clusters_predicted: usize,
    pub n_vessels_true: usize,
    pub n_vessels_estimated: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).expect("nul bytes removed"));
}

fn fail(status: CbtrStatus, msg: impl Into<String>) -> CbtrStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> CbtrStatus {
    match e {
        Error::Ingest(IngestError::Io(_)) | Error::Io { .. } => CbtrStatus::Io,
        Error::Ingest(IngestError::Empty) => CbtrStatus::EmptyDataset,
        Error::Ingest(_) => CbtrStatus::Parse,
        Error::Config(_) => CbtrStatus::InvalidConfig,
        Error::Reconstruct(ReconstructError::EmptyDataset) => CbtrStatus::EmptyDataset,
        Error::Reconstruct(ReconstructError::Config(_)) => CbtrStatus::InvalidConfig,
        Error::Npc(NpcError::Config(_)) => CbtrStatus::InvalidConfig,
        Error::Metrics(MetricsError::MissingVid(_)) => CbtrStatus::MissingLabels,
        Error::Synth(SynthError::Config(_)) => CbtrStatus::InvalidConfig,
        Error::Synth(_) => CbtrStatus::Synth,
        _ => CbtrStatus::Internal,
    }
}

/// Runs `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), CbtrStatus>) -> CbtrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            CbtrStatus::Ok
        }
        Ok(Err(status)) => status,
        Err(_) => fail(CbtrStatus::Internal, "internal panic"),
    }
}

fn lift<T>(r: Result<T, impl Into<Error>>) -> Result<T, CbtrStatus> {
    r.map_err(|e| {
        let e = e.into();
        fail(status_of(&e), e.to_string())
    })
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, CbtrStatus> {
    p.as_ref().ok_or_else(|| fail(CbtrStatus::NullPointer, format!("{what} is null")))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), CbtrStatus> {
    if p.is_null() {
        Err(fail(CbtrStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn index_in(i: usize, len: usize) -> Result<(), CbtrStatus> {
    if i < len {
        Ok(())
    } else {
        Err(fail(CbtrStatus::OutOfRange, format!("index {i} out of range for {len} points")))
    }
}

fn boxed_dataset(ds: TrackDataset) -> *mut CbtrDataset {
    Box::into_raw(Box::new(CbtrDataset { inner: ds }))
}

/// Message describing the last failure on this thread, or an empty string.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn cbtr_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Writes the default reconstruction constants to `out`.
///
/// # Safety
/// `out` must be null or point to writable memory for one `CbtrConfigC`.
#[no_mangle]
pub unsafe extern "C" fn cbtr_config_default(out: *mut CbtrConfigC) -> CbtrStatus {
    guard(|| {
        check_out(out, "out")?;
        out.write(CbtrConfig::default().into());
        Ok(())
    })
}

/// Parses a CSV file. With `require_labels` the `vid` column is mandatory.
///
/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_dataset_from_csv_path(
    path: *const c_char,
    require_labels: bool,
    out: *mut *mut CbtrDataset,
) -> CbtrStatus {
    guard(|| {
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        if path.is_null() {
            return Err(fail(CbtrStatus::NullPointer, "path is null"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| fail(CbtrStatus::InvalidUtf8, "path is not UTF-8"))?;
        let file = std::fs::File::open(path).map_err(|e| fail(CbtrStatus::Io, format!("{path}: {e}")))?;
        let ds = lift(parse_ais_csv(std::io::BufReader::new(file), require_labels))?;
        out.write(boxed_dataset(ds));
        Ok(())
    })
}

/// Parses CSV text held in memory.
///
/// # Safety
/// `data` must point to `len` readable bytes; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_dataset_from_csv_buffer(
    data: *const u8,
    len: usize,
    require_labels: bool,
    out: *mut *mut CbtrDataset,
) -> CbtrStatus {
    guard(|| {
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        if data.is_null() {
            return Err(fail(CbtrStatus::NullPointer, "data is null"));
        }
        let bytes = std::slice::from_raw_parts(data, len);
        let ds = lift(parse_ais_csv(bytes, require_labels))?;
        out.write(boxed_dataset(ds));
        Ok(())
    })
}

/// Generates the 20-vessel reference fleet for `seed`, with vessel ids.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_dataset_synth_s1(seed: u64, out: *mut *mut CbtrDataset) -> CbtrStatus {
    guard(|| {
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        let ds = lift(generate_fleet(&SynthConfig::scenario_s1(seed)))?;
        out.write(boxed_dataset(ds));
        Ok(())
    })
}

/// Number of points, or 0 for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn cbtr_dataset_len(ds: *const CbtrDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.inner.len())
}

/// Latitude scaling factor of the dataset, or NaN for a null handle.
///
/// # Safety
/// `ds` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn cbtr_dataset_alpha(ds: *const CbtrDataset) -> f64 {
    ds.as_ref().map_or(f64::NAN, |d| d.inner.alpha())
}

/// # Safety
/// `ds` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cbtr_dataset_free(ds: *mut CbtrDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Reconstructs trajectories. A null `config` uses the defaults; `threads`
/// of 0 uses every core.
///
/// # Safety
/// `ds` must be a live dataset handle, `config` null or readable, `out`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run(
    ds: *const CbtrDataset,
    config: *const CbtrConfigC,
    threads: usize,
    out: *mut *mut CbtrRun,
) -> CbtrStatus {
    guard(|| {
        check_out(out, "out")?;
        out.write(ptr::null_mut());
        let ds = deref(ds, "dataset")?;
        let cfg: CbtrConfig = config.as_ref().map_or_else(CbtrConfig::default, |c| (*c).into());
        let threads = if threads == 0 {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        } else {
            threads
        };
        let run = lift(run_cbtr_with_threads(&ds.inner, &cfg, threads))?;
        out.write(Box::into_raw(Box::new(CbtrRun { inner: run })));
        Ok(())
    })
}

/// Number of clusters, or 0 for a null handle.
///
/// # Safety
/// `run` must be null or a live run handle.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run_n_clusters(run: *const CbtrRun) -> usize {
    run.as_ref().map_or(0, |r| r.inner.assignment.n_clusters())
}

/// Copies the cluster id of every point into `buf`, which must hold at
/// least as many entries as the dataset has points.
///
/// # Safety
/// `run` must be a live run handle and `buf` must point to `len` writable
/// `size_t` slots.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run_cluster_ids(run: *const CbtrRun, buf: *mut usize, len: usize) -> CbtrStatus {
    guard(|| {
        let run = deref(run, "run")?;
        check_out(buf, "buf")?;
        let ids = &run.inner.assignment.cluster_of;
        if len < ids.len() {
            return Err(fail(
                CbtrStatus::BufferTooSmall,
                format!("buffer holds {len} entries, need {}", ids.len()),
            ));
        }
        ptr::copy_nonoverlapping(ids.as_ptr(), buf, ids.len());
        Ok(())
    })
}

/// Writes the best next point of point `i` to `out`, or -1 when it has none.
///
/// # Safety
/// `run` must be a live run handle, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run_link_target(run: *const CbtrRun, i: usize, out: *mut i64) -> CbtrStatus {
    guard(|| {
        let run = deref(run, "run")?;
        check_out(out, "out")?;
        index_in(i, run.inner.links.len())?;
        out.write(run.inner.links.get(i).map_or(-1, |l| l.target as i64));
        Ok(())
    })
}

/// Writes whether point `i` ends a trajectory.
///
/// # Safety
/// `run` must be a live run handle, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run_is_endpoint(run: *const CbtrRun, i: usize, out: *mut bool) -> CbtrStatus {
    guard(|| {
        let run = deref(run, "run")?;
        check_out(out, "out")?;
        index_in(i, run.inner.assignment.len())?;
        out.write(run.inner.assignment.endpoints.contains(&i));
        Ok(())
    })
}

/// Scores `run` against the vessel ids of `ds`, the dataset it was
/// computed from.
///
/// # Safety
/// `run` and `ds` must be live handles, `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run_evaluate(
    run: *const CbtrRun,
    ds: *const CbtrDataset,
    out: *mut CbtrEval,
) -> CbtrStatus {
    guard(|| {
        let run = deref(run, "run")?;
        let ds = deref(ds, "dataset")?;
        check_out(out, "out")?;
        let truth = ds
            .inner
            .truth()
            .ok_or_else(|| fail(CbtrStatus::MissingLabels, "dataset has no vessel ids"))?;
        let r = lift(evaluate(&run.inner.assignment, &run.inner.links.targets(), &truth, 0.0))?;
        out.write(CbtrEval {
            correct_neighbor_rate: r.correct_neighbor_rate,
            jumps: r.jumps,
            merges: r.merges,
            n_clusters_predicted: r.n_clusters_predicted,
            n_vessels_true: r.n_vessels_true,
            n_vessels_estimated: r.n_vessels_estimated,
        });
        Ok(())
    })
}

/// # Safety
/// `run` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cbtr_run_free(run: *mut CbtrRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}
