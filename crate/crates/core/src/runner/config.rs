//! Pipeline configuration: presets, TOML config files and CLI overrides.
//!
//! Resolution order, lowest to highest: preset defaults, config file, flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::RunnerError;
use crate::analysis::AnalysisOptions;
use crate::demography::LibraryConfig;
use crate::socialnet::NetworkCaps;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// 60 runs of 500 agents, regressions on a 200k pair sample.
    Desk,
    /// 400 runs of 2000 agents, regressions on every pair.
    #[default]
    Full,
}

/// A partial configuration. Every field is optional so layers can be merged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub runs: Option<usize>,
    pub pop_size: Option<usize>,
    pub generations: Option<u32>,
    pub fertility_min: Option<f64>,
    pub fertility_max: Option<f64>,
    pub buffer: Option<f64>,
    pub retry_growth: Option<f64>,
    pub seed: Option<u64>,
    pub relative_cap: Option<usize>,
    pub total_cap: Option<usize>,
    pub delta_bucket: Option<f64>,
    /// 0 means every pair.
    pub pair_sample: Option<usize>,
    pub bands: Option<usize>,
    pub surface_high: Option<(f64, f64)>,
    pub surface_low: Option<(f64, f64)>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub dump_matrices: Option<bool>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> Result<Self, RunnerError> {
        let text = std::fs::read_to_string(path).map_err(|source| RunnerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub preset: Preset,
    pub library: LibraryConfig,
    pub analysis: AnalysisOptions,
    pub workers: usize,
    pub out: PathBuf,
    pub dump_matrices: bool,
}

impl PipelineConfig {
    pub fn preset(preset: Preset) -> Self {
        let full = Self {
            preset,
            library: LibraryConfig::default(),
            analysis: AnalysisOptions::default(),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            out: PathBuf::from("kinsim-out"),
            dump_matrices: false,
        };
        match preset {
            Preset::Full => full,
            Preset::Desk => Self {
                library: LibraryConfig {
                    runs: 60,
                    target_size: 500,
                    ..full.library
                },
                analysis: AnalysisOptions {
                    pair_sample: Some(200_000),
                    ..full.analysis
                },
                ..full
            },
        }
    }

    pub fn apply(&mut self, layer: &ConfigLayer) {
        let lib = &mut self.library;
        let an = &mut self.analysis;
        macro_rules! set {
            ($field:ident => $target:expr) => {
                if let Some(v) = layer.$field.clone() {
                    $target = v;
                }
            };
        }
        set!(runs => lib.runs);
        set!(pop_size => lib.target_size);
        set!(generations => lib.generations);
        set!(fertility_min => lib.fertility_min);
        set!(fertility_max => lib.fertility_max);
        set!(buffer => lib.buffer);
        set!(retry_growth => lib.retry_growth);
        set!(seed => lib.master_seed);
        set!(relative_cap => an.caps.relative_cap);
        set!(total_cap => an.caps.total_cap);
        set!(delta_bucket => an.delta_bucket);
        set!(bands => an.bands);
        set!(surface_high => an.surface_high);
        set!(surface_low => an.surface_low);
        set!(workers => self.workers);
        set!(out => self.out);
        set!(dump_matrices => self.dump_matrices);
        if let Some(k) = layer.pair_sample {
            an.pair_sample = (k > 0).then_some(k);
        }
    }

    /// Preset, then file, then flag overrides.
    pub fn resolve(
        preset: Option<Preset>,
        file: Option<&Path>,
        flags: &ConfigLayer,
    ) -> Result<Self, RunnerError> {
        let mut config = Self::preset(preset.unwrap_or_default());
        if let Some(path) = file {
            config.apply(&ConfigLayer::from_file(path)?);
        }
        config.apply(flags);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), RunnerError> {
        self.library
            .validate()
            .map_err(|e| RunnerError::Config(e.to_string()))?;
        self.analysis
            .validate()
            .map_err(|e| RunnerError::Config(e.to_string()))?;
        if self.workers == 0 {
            return Err(RunnerError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn caps(&self) -> NetworkCaps {
        self.analysis.caps
    }
}
