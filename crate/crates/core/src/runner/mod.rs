//! Orchestration: library generation, persistence, analysis and the
//! figure tables.

pub mod cli;
pub mod config;
pub mod persist;

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{summarize_run, AnalysisError, FigureTables, RunAnalysis, RunInput, RunMatrices};
use crate::demography::{simulate_run, DemographyError, LibraryRun};
pub use config::{ConfigLayer, PipelineConfig, Preset};
pub use persist::{RunManifest, RunRecord};

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest not found at {0}; run `kinsim generate` first")]
    ManifestMissing(PathBuf),
    #[error("{path}: schema mismatch: {reason}")]
    SchemaMismatch { path: PathBuf, reason: String },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Demography(#[from] DemographyError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T, RunnerError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| RunnerError::Pool(e.to_string()))?;
    Ok(pool.install(job))
}

fn record_of(run: &LibraryRun, generations: u32) -> RunRecord {
    RunRecord {
        run_id: run.run_id,
        kappa_target: run.kappa_target,
        kappa_realized: run.kappa_realized,
        seed: run.seed,
        n_final: run.n_final,
        generations,
        cohort_size: run.cohort.len(),
        attempts: run.history.attempts,
    }
}

/// Simulates and writes every run, then the manifest.
pub fn cmd_generate(config: &PipelineConfig) -> Result<RunManifest, RunnerError> {
    config.validate()?;
    let started = Instant::now();
    let out = &config.out;
    std::fs::create_dir_all(out).map_err(|source| RunnerError::Io {
        path: out.clone(),
        source,
    })?;
    let lib = &config.library;
    let records = with_pool(config.workers, || {
        (0..lib.runs)
            .into_par_iter()
            .map(|j| {
                let run = simulate_run(lib, j)?;
                let record = record_of(&run, lib.generations);
                persist::write_run(out, &record, &run.history, &run.cohort)?;
                Ok(record)
            })
            .collect::<Result<Vec<_>, RunnerError>>()
    })??;
    let mut manifest = RunManifest::new(config, records);
    manifest.timing.generate_seconds = Some(started.elapsed().as_secs_f64());
    persist::write_manifest(out, &manifest)?;
    Ok(manifest)
}

/// Analyses a library in memory, in run order.
pub fn analyze_library(
    runs: &[LibraryRun],
    options: &crate::analysis::AnalysisOptions,
    workers: usize,
) -> Result<Vec<RunAnalysis>, RunnerError> {
    with_pool(workers, || {
        runs.par_iter()
            .map(|run| {
                let input = RunInput {
                    run_id: run.run_id,
                    kappa_target: run.kappa_target,
                    kappa_realized: run.kappa_realized,
                    seed: run.seed,
                    history: &run.history,
                    cohort: &run.cohort,
                };
                crate::analysis::analyze_run(&input, options)
            })
            .collect::<Result<Vec<_>, AnalysisError>>()
    })?
    .map_err(RunnerError::from)
}

/// Reads a generated library, writes the figure tables and returns them.
///
/// Library parameters come from the manifest; analysis options, workers
/// and dump settings from `config`.
pub fn cmd_analyze(config: &PipelineConfig) -> Result<FigureTables, RunnerError> {
    config.validate()?;
    let started = Instant::now();
    let out = &config.out;
    let mut manifest = persist::read_manifest(out)?;
    let options = &config.analysis;
    let summaries = with_pool(config.workers, || {
        manifest
            .runs
            .par_iter()
            .map(|record| {
                let (history, cohort) = persist::read_run(out, record)?;
                let input = RunInput {
                    run_id: record.run_id,
                    kappa_target: record.kappa_target,
                    kappa_realized: record.kappa_realized,
                    seed: record.seed,
                    history: &history,
                    cohort: &cohort,
                };
                let matrices = RunMatrices::build(&input, options)?;
                if config.dump_matrices {
                    persist::dump_matrices(out, record.run_id, &cohort, &matrices)?;
                }
                Ok(summarize_run(&input, &matrices, options)?)
            })
            .collect::<Result<Vec<_>, RunnerError>>()
    })??;

    let lib = &manifest.config.library;
    let tables = FigureTables::build(&summaries, options, (lib.fertility_min, lib.fertility_max))?;
    for (name, contents) in tables.csv_files() {
        persist::write_file(&out.join(name), &contents)?;
    }
    persist::write_file(&out.join("diagnostics.csv"), &persist::diagnostics_csv(&summaries))?;
    manifest.timing.analyze_seconds = Some(started.elapsed().as_secs_f64());
    persist::write_manifest(out, &manifest)?;
    Ok(tables)
}

pub fn cmd_all(config: &PipelineConfig) -> Result<FigureTables, RunnerError> {
    cmd_generate(config)?;
    cmd_analyze(config)
}
