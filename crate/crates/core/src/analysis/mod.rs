//! Per-run statistics and the figure tables built from them.
//!
//! Each run is reduced to a [`RunAnalysis`]: exact integer pair censuses and
//! contact sums plus the two regression fits. Tables are then folded from
//! those summaries in run order, so results do not depend on how runs were
//! scheduled.

pub mod regression;
pub mod tables;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::demography::{Cohort, PopulationHistory};
use crate::graph::{shared_contacts, Adjacency, SharedContactMatrix};
use crate::kinship::{kin_network, CohortAncestry, RelatednessMatrix, PRIMARY_KIN_THRESHOLD};
use crate::seed::{stream_rng, Stream};
use crate::socialnet::{
    assign_traits, build_standard_network, double_first_cousins, NetworkCaps, NetworkError, StandardNetwork,
    TraitMap,
};

pub use regression::{cubic_fit, RegressionError, RegressionFit};
pub use tables::{FigureTables, Fig5Row, Fig6Row, Fig7Row, Fig8Row, Fig9Row};

/// Shared great-great-grandparent counts run from 0 to 16.
pub const R_VALUES: usize = 17;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("no runs fall in the fertility band [{lo}, {hi}]")]
    EmptyBand { lo: f64, hi: f64 },
    #[error("run {run}: {source}")]
    Regression {
        run: usize,
        #[source]
        source: RegressionError,
    },
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("invalid analysis options: {0}")]
    InvalidOptions(String),
    #[error("the library is empty")]
    EmptyLibrary,
}

/// A closed-open fertility interval `[lo, hi)`; `closed` makes it `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FertilityBand {
    pub lo: f64,
    pub hi: f64,
    pub closed: bool,
}

impl FertilityBand {
    pub fn contains(&self, kappa: f64) -> bool {
        kappa >= self.lo && (kappa < self.hi || (self.closed && kappa == self.hi))
    }

    /// `count` equal bands partitioning `[min, max]`; the last is closed.
    pub fn partition(min: f64, max: f64, count: usize) -> Vec<FertilityBand> {
        let width = (max - min) / count as f64;
        (0..count)
            .map(|k| FertilityBand {
                lo: min + k as f64 * width,
                hi: if k + 1 == count { max } else { min + (k + 1) as f64 * width },
                closed: k + 1 == count,
            })
            .collect()
    }

    /// `[lo, hi]` intersected with `[min, max]`.
    pub fn clamped(lo: f64, hi: f64, min: f64, max: f64) -> FertilityBand {
        FertilityBand {
            lo: lo.max(min),
            hi: hi.min(max),
            closed: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub caps: NetworkCaps,
    pub delta_bucket: f64,
    /// Pairs used for the regressions; `None` uses every unordered pair.
    pub pair_sample: Option<usize>,
    pub bands: usize,
    /// Unclamped bounds of the high and low panels of the surface table.
    pub surface_high: (f64, f64),
    pub surface_low: (f64, f64),
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            caps: NetworkCaps::default(),
            delta_bucket: 10.0,
            pair_sample: None,
            bands: 5,
            surface_high: (4.5, 5.5),
            surface_low: (2.0, 3.0),
        }
    }
}

impl AnalysisOptions {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        self.caps.validate()?;
        if !(self.delta_bucket > 0.0 && self.delta_bucket <= 180.0) {
            return Err(AnalysisError::InvalidOptions("delta bucket must be in (0, 180]".into()));
        }
        if self.bands == 0 {
            return Err(AnalysisError::InvalidOptions("at least one fertility band is required".into()));
        }
        if self.pair_sample == Some(0) {
            return Err(AnalysisError::InvalidOptions("pair sample must be positive".into()));
        }
        Ok(())
    }

    pub fn delta_buckets(&self) -> usize {
        (180.0 / self.delta_bucket).ceil() as usize
    }

    pub fn bucket_of(&self, delta: f64) -> usize {
        ((delta / self.delta_bucket) as usize).min(self.delta_buckets() - 1)
    }
}

/// One run as handed to the analysis.
#[derive(Clone, Copy, Debug)]
pub struct RunInput<'a> {
    pub run_id: usize,
    pub kappa_target: f64,
    pub kappa_realized: f64,
    pub seed: u64,
    pub history: &'a PopulationHistory,
    pub cohort: &'a Cohort,
}

/// Every matrix built for one run.
pub struct RunMatrices {
    pub ancestry: CohortAncestry,
    pub relatedness: RelatednessMatrix,
    pub kin: Adjacency,
    pub kin_contacts: SharedContactMatrix,
    pub traits: TraitMap,
    pub network: StandardNetwork,
    pub network_contacts: SharedContactMatrix,
}

impl RunMatrices {
    pub fn build(input: &RunInput<'_>, options: &AnalysisOptions) -> Result<Self, AnalysisError> {
        let ancestry = CohortAncestry::new(input.cohort, input.history);
        let relatedness = RelatednessMatrix::from_ancestry(&ancestry);
        let kin = kin_network(&relatedness, PRIMARY_KIN_THRESHOLD);
        let kin_contacts = shared_contacts(&kin);
        let traits = assign_traits(ancestry.len(), &mut stream_rng(input.seed, Stream::Traits));
        let network = build_standard_network(
            &ancestry,
            &traits,
            options.caps,
            &mut stream_rng(input.seed, Stream::Cousins),
        )?;
        let network_contacts = shared_contacts(&network.adjacency);
        Ok(Self {
            ancestry,
            relatedness,
            kin,
            kin_contacts,
            traits,
            network,
            network_contacts,
        })
    }

    pub fn len(&self) -> usize {
        self.ancestry.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ancestry.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictivePower {
    pub kinship: RegressionFit,
    pub similarity: RegressionFit,
    pub n_pairs: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub double_first_cousin_pairs: usize,
    pub sibling_edges: usize,
    pub cousin_edges: usize,
    pub friend_edges: usize,
    pub mean_degree: f64,
    pub max_degree: usize,
    pub max_relative_degree: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunAnalysis {
    pub run_id: usize,
    pub kappa_target: f64,
    pub kappa_realized: f64,
    pub cohort_size: usize,
    /// Unordered pairs per shared great-great-grandparent count.
    pub relatedness_pairs: [u64; R_VALUES],
    /// Sum of kin-network shared contacts per shared count.
    pub kin_contact_sums: [u64; R_VALUES],
    /// `surface_sums[bucket][r]` of standardized-network shared contacts.
    pub surface_sums: Vec<[u64; R_VALUES]>,
    pub surface_pairs: Vec<[u64; R_VALUES]>,
    pub power: PredictivePower,
    pub diagnostics: RunDiagnostics,
}

impl RunAnalysis {
    pub fn pair_count(&self) -> u64 {
        self.relatedness_pairs.iter().sum()
    }

    pub fn mean_shared_gggp(&self) -> f64 {
        let total: u64 = self.relatedness_pairs.iter().enumerate().map(|(v, &c)| v as u64 * c).sum();
        total as f64 / self.pair_count() as f64
    }

    /// Fraction of a member's alters sharing `v` great-great-grandparents,
    /// averaged over members.
    pub fn relatedness_fraction(&self, v: usize) -> f64 {
        self.relatedness_pairs[v] as f64 / self.pair_count() as f64
    }
}

/// Sorted sample of unordered pairs, or all of them.
fn regression_pairs(n: usize, sample: Option<usize>, seed: u64) -> Vec<(u32, u32)> {
    let total = n * n.saturating_sub(1) / 2;
    match sample {
        Some(k) if k < total => {
            let mut picks = index::sample(&mut stream_rng(seed, Stream::PairSample), total, k).into_vec();
            picks.sort_unstable();
            let mut out = Vec::with_capacity(k);
            let (mut i, mut row_start) = (0usize, 0usize);
            for p in picks {
                while p >= row_start + (n - 1 - i) {
                    row_start += n - 1 - i;
                    i += 1;
                }
                out.push((i as u32, (i + 1 + p - row_start) as u32));
            }
            out
        }
        _ => (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i as u32, j as u32)))
            .collect(),
    }
}

/// Regressions of standardized-network shared contacts on relatedness and
/// on trait distance.
pub fn predictive_power(
    matrices: &RunMatrices,
    pair_sample: Option<usize>,
    seed: u64,
) -> Result<PredictivePower, RegressionError> {
    let pairs = regression_pairs(matrices.len(), pair_sample, seed);
    let mut xs = Vec::with_capacity(pairs.len());
    let mut ys = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (i, j) = (i as usize, j as usize);
        xs.push(f64::from(matrices.relatedness.get(i, j)));
        ys.push(f64::from(matrices.network_contacts.get(i, j)));
    }
    let kinship = cubic_fit(&xs, &ys)?;
    for (x, &(i, j)) in xs.iter_mut().zip(&pairs) {
        *x = matrices.traits.distance(i as usize, j as usize);
    }
    let similarity = cubic_fit(&xs, &ys)?;
    Ok(PredictivePower {
        kinship,
        similarity,
        n_pairs: pairs.len(),
    })
}

/// Reduces one run's matrices to its summary.
pub fn summarize_run(
    input: &RunInput<'_>,
    matrices: &RunMatrices,
    options: &AnalysisOptions,
) -> Result<RunAnalysis, AnalysisError> {
    let n = matrices.len();
    let buckets = options.delta_buckets();
    let mut relatedness_pairs = [0u64; R_VALUES];
    let mut kin_contact_sums = [0u64; R_VALUES];
    let mut surface_sums = vec![[0u64; R_VALUES]; buckets];
    let mut surface_pairs = vec![[0u64; R_VALUES]; buckets];
    for i in 0..n {
        let r_row = matrices.relatedness.row(i);
        let c_row = matrices.kin_contacts.row(i);
        let ct_row = matrices.network_contacts.row(i);
        for j in (i + 1)..n {
            let v = r_row[j] as usize;
            relatedness_pairs[v] += 1;
            kin_contact_sums[v] += u64::from(c_row[j]);
            let b = options.bucket_of(matrices.traits.distance(i, j));
            surface_sums[b][v] += u64::from(ct_row[j]);
            surface_pairs[b][v] += 1;
        }
    }
    let power = predictive_power(matrices, options.pair_sample, input.seed).map_err(|source| {
        AnalysisError::Regression {
            run: input.run_id,
            source,
        }
    })?;
    let net = &matrices.network;
    let diagnostics = RunDiagnostics {
        double_first_cousin_pairs: double_first_cousins(&matrices.ancestry).len(),
        sibling_edges: net.count(crate::socialnet::EdgeKind::Sibling),
        cousin_edges: net.count(crate::socialnet::EdgeKind::Cousin),
        friend_edges: net.count(crate::socialnet::EdgeKind::Friend),
        mean_degree: net.mean_degree(),
        max_degree: (0..n).map(|i| net.adjacency.degree(i)).max().unwrap_or(0),
        max_relative_degree: net.relative_degree.iter().copied().max().unwrap_or(0),
    };
    Ok(RunAnalysis {
        run_id: input.run_id,
        kappa_target: input.kappa_target,
        kappa_realized: input.kappa_realized,
        cohort_size: n,
        relatedness_pairs,
        kin_contact_sums,
        surface_sums,
        surface_pairs,
        power,
        diagnostics,
    })
}

pub fn analyze_run(input: &RunInput<'_>, options: &AnalysisOptions) -> Result<RunAnalysis, AnalysisError> {
    let matrices = RunMatrices::build(input, options)?;
    summarize_run(input, &matrices, options)
}
