//! C ABI over `kinsim-core`.
//!
//! Libraries and analyses are opaque handles created by `*_build` /
//! `*_run` and released with the matching `*_free`. Every fallible call
//! returns a [`KinsimStatus`]; on failure [`kinsim_last_error_message`]
//! describes the error for the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::ptr;

use kinsim_core::analysis::{cubic_fit, AnalysisError, FigureTables, RegressionError, RunAnalysis};
use kinsim_core::demography::{DemographyError, LibraryConfig, LibraryRun};
use kinsim_core::runner::{self, persist, ConfigLayer, PipelineConfig, Preset, RunnerError};
use kinsim_core::socialnet::{compass_distance, NetworkCaps};
use kinsim_core::AnalysisOptions;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KinsimStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    GrowthFailure = 4,
    Io = 5,
    SchemaMismatch = 6,
    ManifestMissing = 7,
    DegenerateInput = 8,
    Internal = 9,
}

/// Library parameters. See [`kinsim_library_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KinsimLibraryConfig {
    pub runs: usize,
    pub fertility_min: f64,
    pub fertility_max: f64,
    pub target_size: usize,
    pub generations: u32,
    pub master_seed: u64,
    pub buffer: f64,
    pub retry_growth: f64,
}

/// Analysis parameters. `pair_sample == 0` regresses on every pair.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct KinsimAnalysisOptions {
    pub relative_cap: usize,
    pub total_cap: usize,
    pub delta_bucket: f64,
    pub pair_sample: usize,
    pub bands: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KinsimRunInfo {
    pub run_id: usize,
    pub kappa_target: f64,
    pub kappa_realized: f64,
    pub seed: u64,
    pub n_final: usize,
    pub cohort_size: usize,
    pub attempts: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KinsimFig9Row {
    pub run_id: usize,
    pub kappa_target: f64,
    pub adj_r2_kinship: f64,
    pub adj_r2_similarity: f64,
    pub n_pairs: usize,
    pub effective_degree_kin: u32,
    pub effective_degree_sim: u32,
}

/// Coefficients of `1, x, x^2, x^3` in the caller's units.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct KinsimCubicFit {
    pub coefficients: [f64; 4],
    pub n: usize,
    pub r2: f64,
    pub adj_r2: f64,
    pub effective_degree: u32,
}

/// A simulated population library.
pub struct KinsimLibrary {
    config: LibraryConfig,
    runs: Vec<LibraryRun>,
}

/// Per-run summaries and figure tables of one library.
pub struct KinsimAnalysis {
    runs: Vec<RunAnalysis>,
    tables: FigureTables,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn fail(status: KinsimStatus, message: impl Into<String>) -> KinsimStatus {
    set_error(message);
    status
}

fn status_of_demography(e: &DemographyError) -> KinsimStatus {
    match e {
        DemographyError::GrowthFailure { .. } => KinsimStatus::GrowthFailure,
        DemographyError::Run { source, .. } => status_of_demography(source),
        DemographyError::InsufficientPopulation { .. } => KinsimStatus::GrowthFailure,
        DemographyError::InvalidConfig(_) => KinsimStatus::InvalidArgument,
    }
}

fn status_of_analysis(e: &AnalysisError) -> KinsimStatus {
    match e {
        AnalysisError::Regression { .. } => KinsimStatus::DegenerateInput,
        _ => KinsimStatus::InvalidArgument,
    }
}

fn status_of_runner(e: &RunnerError) -> KinsimStatus {
    match e {
        RunnerError::Io { .. } => KinsimStatus::Io,
        RunnerError::ManifestMissing(_) => KinsimStatus::ManifestMissing,
        RunnerError::SchemaMismatch { .. } => KinsimStatus::SchemaMismatch,
        RunnerError::Config(_) => KinsimStatus::InvalidArgument,
        RunnerError::Demography(d) => status_of_demography(d),
        RunnerError::Analysis(a) => status_of_analysis(a),
        RunnerError::Pool(_) => KinsimStatus::Internal,
    }
}

/// Runs `body`, converting panics into `Internal`.
fn guard(body: impl FnOnce() -> KinsimStatus) -> KinsimStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => {
            if status == KinsimStatus::Ok {
                LAST_ERROR.with(|e| *e.borrow_mut() = None);
            }
            status
        }
        Err(panic) => {
            let what = panic
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| panic.downcast_ref::<&str>().copied())
                .unwrap_or("unknown panic");
            fail(KinsimStatus::Internal, format!("internal error: {what}"))
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, KinsimStatus> {
    if p.is_null() {
        return Err(fail(KinsimStatus::NullPointer, format!("{what} is null")));
    }
    match CStr::from_ptr(p).to_str() {
        Ok(s) => Ok(PathBuf::from(s)),
        Err(_) => Err(fail(KinsimStatus::InvalidArgument, format!("{what} is not UTF-8"))),
    }
}

fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, KinsimStatus> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(|pool| pool.install(job))
        .map_err(|e| fail(KinsimStatus::Internal, e.to_string()))
}

impl From<&KinsimLibraryConfig> for LibraryConfig {
    fn from(c: &KinsimLibraryConfig) -> Self {
        LibraryConfig {
            runs: c.runs,
            fertility_min: c.fertility_min,
            fertility_max: c.fertility_max,
            target_size: c.target_size,
            generations: c.generations,
            master_seed: c.master_seed,
            buffer: c.buffer,
            retry_growth: c.retry_growth,
        }
    }
}

impl From<&KinsimAnalysisOptions> for AnalysisOptions {
    fn from(o: &KinsimAnalysisOptions) -> Self {
        AnalysisOptions {
            caps: NetworkCaps {
                relative_cap: o.relative_cap,
                total_cap: o.total_cap,
            },
            delta_bucket: o.delta_bucket,
            pair_sample: (o.pair_sample > 0).then_some(o.pair_sample),
            bands: o.bands,
            ..AnalysisOptions::default()
        }
    }
}

/// Fills `out` with the full-library defaults (400 runs of 2000 agents).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_library_config_default(out: *mut KinsimLibraryConfig) -> KinsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(KinsimStatus::NullPointer, "out is null");
        }
        let d = LibraryConfig::default();
        *out = KinsimLibraryConfig {
            runs: d.runs,
            fertility_min: d.fertility_min,
            fertility_max: d.fertility_max,
            target_size: d.target_size,
            generations: d.generations,
            master_seed: d.master_seed,
            buffer: d.buffer,
            retry_growth: d.retry_growth,
        };
        KinsimStatus::Ok
    })
}

/// Fills `out` with the default analysis options (caps 50/60, 10 degree trait
/// buckets, all pairs, five bands).
///
/// # Safety
/// `out` must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_options_default(out: *mut KinsimAnalysisOptions) -> KinsimStatus {
    guard(|| {
        if out.is_null() {
            return fail(KinsimStatus::NullPointer, "out is null");
        }
        let d = AnalysisOptions::default();
        *out = KinsimAnalysisOptions {
            relative_cap: d.caps.relative_cap,
            total_cap: d.caps.total_cap,
            delta_bucket: d.delta_bucket,
            pair_sample: d.pair_sample.unwrap_or(0),
            bands: d.bands,
        };
        KinsimStatus::Ok
    })
}

/// Simulates a library on `workers` threads (0 = all cores).
///
/// # Safety
/// `config` must be null or point to a valid config; `out` must be null or
/// valid for writes. On success `*out` owns a handle for
/// [`kinsim_library_free`].
#[no_mangle]
pub unsafe extern "C" fn kinsim_library_build(
    config: *const KinsimLibraryConfig,
    workers: usize,
    out: *mut *mut KinsimLibrary,
) -> KinsimStatus {
    guard(|| {
        if config.is_null() || out.is_null() {
            return fail(KinsimStatus::NullPointer, "config and out must be non-null");
        }
        *out = ptr::null_mut();
        let config = LibraryConfig::from(&*config);
        let built = match with_workers(workers, || kinsim_core::demography::build_library(&config)) {
            Ok(b) => b,
            Err(status) => return status,
        };
        match built {
            Ok(runs) => {
                *out = Box::into_raw(Box::new(KinsimLibrary { config, runs }));
                KinsimStatus::Ok
            }
            Err(e) => fail(status_of_demography(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `library` must be null or a handle from [`kinsim_library_build`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn kinsim_library_free(library: *mut KinsimLibrary) {
    if !library.is_null() {
        drop(Box::from_raw(library));
    }
}

/// Number of runs, or 0 for a null handle.
///
/// # Safety
/// `library` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kinsim_library_len(library: *const KinsimLibrary) -> usize {
    library.as_ref().map_or(0, |l| l.runs.len())
}

/// # Safety
/// `library` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_library_run_info(
    library: *const KinsimLibrary,
    index: usize,
    out: *mut KinsimRunInfo,
) -> KinsimStatus {
    guard(|| {
        let (Some(lib), false) = (library.as_ref(), out.is_null()) else {
            return fail(KinsimStatus::NullPointer, "library and out must be non-null");
        };
        let Some(run) = lib.runs.get(index) else {
            return fail(KinsimStatus::OutOfRange, format!("run {index} of {}", lib.runs.len()));
        };
        *out = KinsimRunInfo {
            run_id: run.run_id,
            kappa_target: run.kappa_target,
            kappa_realized: run.kappa_realized,
            seed: run.seed,
            n_final: run.n_final,
            cohort_size: run.cohort.len(),
            attempts: run.history.attempts,
        };
        KinsimStatus::Ok
    })
}

/// Copies the row-major shared great-great-grandparent matrix of one run
/// into `out`, which must hold `cohort_size * cohort_size` bytes.
///
/// # Safety
/// `library` must be null or a live handle; `out` null or valid for `len`
/// byte writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_library_relatedness(
    library: *const KinsimLibrary,
    index: usize,
    out: *mut u8,
    len: usize,
) -> KinsimStatus {
    guard(|| {
        let (Some(lib), false) = (library.as_ref(), out.is_null()) else {
            return fail(KinsimStatus::NullPointer, "library and out must be non-null");
        };
        let Some(run) = lib.runs.get(index) else {
            return fail(KinsimStatus::OutOfRange, format!("run {index} of {}", lib.runs.len()));
        };
        let n = run.cohort.len();
        if len < n * n {
            return fail(KinsimStatus::OutOfRange, format!("buffer of {len} bytes, need {}", n * n));
        }
        let r = kinsim_core::kinship::relatedness_matrix(&run.cohort, &run.history);
        let out = std::slice::from_raw_parts_mut(out, n * n);
        for i in 0..n {
            out[i * n..(i + 1) * n].copy_from_slice(r.row(i));
        }
        KinsimStatus::Ok
    })
}

/// Analyses every run of `library` and builds the figure tables.
///
/// # Safety
/// `library` must be a live handle, `options` null (defaults) or valid, and
/// `out` valid for writes. On success `*out` owns a handle for
/// [`kinsim_analysis_free`].
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_run(
    library: *const KinsimLibrary,
    options: *const KinsimAnalysisOptions,
    workers: usize,
    out: *mut *mut KinsimAnalysis,
) -> KinsimStatus {
    guard(|| {
        let (Some(lib), false) = (library.as_ref(), out.is_null()) else {
            return fail(KinsimStatus::NullPointer, "library and out must be non-null");
        };
        *out = ptr::null_mut();
        let options = options.as_ref().map_or_else(AnalysisOptions::default, AnalysisOptions::from);
        if let Err(e) = options.validate() {
            return fail(status_of_analysis(&e), e.to_string());
        }
        let runs = match runner::analyze_library(&lib.runs, &options, workers) {
            Ok(r) => r,
            Err(e) => return fail(status_of_runner(&e), e.to_string()),
        };
        let range = (lib.config.fertility_min, lib.config.fertility_max);
        match FigureTables::build(&runs, &options, range) {
            Ok(tables) => {
                *out = Box::into_raw(Box::new(KinsimAnalysis { runs, tables }));
                KinsimStatus::Ok
            }
            Err(e) => fail(status_of_analysis(&e), e.to_string()),
        }
    })
}

/// # Safety
/// `analysis` must be null or a handle from [`kinsim_analysis_run`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_free(analysis: *mut KinsimAnalysis) {
    if !analysis.is_null() {
        drop(Box::from_raw(analysis));
    }
}

/// # Safety
/// `analysis` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_len(analysis: *const KinsimAnalysis) -> usize {
    analysis.as_ref().map_or(0, |a| a.runs.len())
}

/// # Safety
/// `analysis` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_mean_shared_gggp(
    analysis: *const KinsimAnalysis,
    index: usize,
    out: *mut f64,
) -> KinsimStatus {
    guard(|| {
        let (Some(a), false) = (analysis.as_ref(), out.is_null()) else {
            return fail(KinsimStatus::NullPointer, "analysis and out must be non-null");
        };
        match a.runs.get(index) {
            Some(run) => {
                *out = run.mean_shared_gggp();
                KinsimStatus::Ok
            }
            None => fail(KinsimStatus::OutOfRange, format!("run {index} of {}", a.runs.len())),
        }
    })
}

/// # Safety
/// `analysis` must be null or a live handle; `out` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_fig9_row(
    analysis: *const KinsimAnalysis,
    index: usize,
    out: *mut KinsimFig9Row,
) -> KinsimStatus {
    guard(|| {
        let (Some(a), false) = (analysis.as_ref(), out.is_null()) else {
            return fail(KinsimStatus::NullPointer, "analysis and out must be non-null");
        };
        let Some(row) = a.tables.fig9.get(index) else {
            return fail(KinsimStatus::OutOfRange, format!("row {index} of {}", a.tables.fig9.len()));
        };
        *out = KinsimFig9Row {
            run_id: row.run_id,
            kappa_target: row.kappa_target,
            adj_r2_kinship: row.adj_r2_kinship,
            adj_r2_similarity: row.adj_r2_similarity,
            n_pairs: row.n_pairs,
            effective_degree_kin: row.effective_degree_kin as u32,
            effective_degree_sim: row.effective_degree_sim as u32,
        };
        KinsimStatus::Ok
    })
}

/// Writes fig5.csv .. fig9.csv into `dir`, creating it if needed.
///
/// # Safety
/// `analysis` must be a live handle and `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn kinsim_analysis_write_tables(
    analysis: *const KinsimAnalysis,
    dir: *const c_char,
) -> KinsimStatus {
    guard(|| {
        let Some(a) = analysis.as_ref() else {
            return fail(KinsimStatus::NullPointer, "analysis is null");
        };
        let dir = match path_arg(dir, "dir") {
            Ok(d) => d,
            Err(status) => return status,
        };
        for (name, contents) in a.tables.csv_files() {
            if let Err(e) = persist::write_file(&dir.join(name), &contents) {
                return fail(status_of_runner(&e), e.to_string());
            }
        }
        KinsimStatus::Ok
    })
}

/// Runs `kinsim all`: generate into `out_dir`, then analyse. `preset` is 0
/// for the full library and 1 for the desk preset; `config_path` may be null.
///
/// # Safety
/// `out_dir` must be a NUL-terminated string; `config_path` null or one.
#[no_mangle]
pub unsafe extern "C" fn kinsim_run_all(
    preset: u32,
    config_path: *const c_char,
    seed: u64,
    workers: usize,
    out_dir: *const c_char,
) -> KinsimStatus {
    guard(|| {
        let preset = match preset {
            0 => Preset::Full,
            1 => Preset::Desk,
            other => return fail(KinsimStatus::InvalidArgument, format!("unknown preset {other}")),
        };
        let out = match path_arg(out_dir, "out_dir") {
            Ok(p) => p,
            Err(status) => return status,
        };
        let file = if config_path.is_null() {
            None
        } else {
            match path_arg(config_path, "config_path") {
                Ok(p) => Some(p),
                Err(status) => return status,
            }
        };
        let flags = ConfigLayer {
            seed: Some(seed),
            workers: (workers > 0).then_some(workers),
            out: Some(out),
            ..ConfigLayer::default()
        };
        let result = PipelineConfig::resolve(Some(preset), file.as_deref().map(Path::new), &flags)
            .and_then(|config| runner::cmd_all(&config));
        match result {
            Ok(_) => KinsimStatus::Ok,
            Err(e) => fail(status_of_runner(&e), e.to_string()),
        }
    })
}

/// Circular distance between two compass readings in degrees, in [0, 180].
#[no_mangle]
pub extern "C" fn kinsim_compass_distance(a: f64, b: f64) -> f64 {
    compass_distance(a, b)
}

/// Least-squares cubic of `ys` on `xs` with adjusted R².
///
/// # Safety
/// `xs` and `ys` must be valid for `n` reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn kinsim_cubic_fit(
    xs: *const f64,
    ys: *const f64,
    n: usize,
    out: *mut KinsimCubicFit,
) -> KinsimStatus {
    guard(|| {
        if xs.is_null() || ys.is_null() || out.is_null() {
            return fail(KinsimStatus::NullPointer, "xs, ys and out must be non-null");
        }
        let (xs, ys) = (std::slice::from_raw_parts(xs, n), std::slice::from_raw_parts(ys, n));
        match cubic_fit(xs, ys) {
            Ok(fit) => {
                *out = KinsimCubicFit {
                    coefficients: fit.coefficients,
                    n: fit.n,
                    r2: fit.r2,
                    adj_r2: fit.adj_r2,
                    effective_degree: fit.effective_degree as u32,
                };
                KinsimStatus::Ok
            }
            Err(RegressionError::DegenerateInput(why)) => fail(KinsimStatus::DegenerateInput, why),
        }
    })
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn kinsim_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn kinsim_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
