//! Figure tables and their CSV encodings.

use std::fmt::Write as _;

use super::{AnalysisError, AnalysisOptions, FertilityBand, RunAnalysis, R_VALUES};

pub const FIG5_HEADER: &str = "band_lo,band_hi,shared_gggp,fraction";
pub const FIG6_HEADER: &str = "run_id,kappa_target,kappa_realized,mean_shared_gggp";
pub const FIG7_HEADER: &str = "band_lo,band_hi,shared_gggp,mean_shared_contacts,n_pairs";
pub const FIG8_HEADER: &str = "delta_lo,delta_hi,shared_gggp,mean_shared_contacts,n_pairs";
pub const FIG9_HEADER: &str =
    "run_id,kappa_target,adj_r2_kinship,adj_r2_similarity,n_pairs,effective_degree_kin,effective_degree_sim";

/// Written in place of a mean for cells without pairs.
pub const NULL_CELL: &str = "NA";

#[derive(Clone, Debug, PartialEq)]
pub struct Fig5Row {
    pub band: FertilityBand,
    pub shared_gggp: usize,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig6Row {
    pub run_id: usize,
    pub kappa_target: f64,
    pub kappa_realized: f64,
    pub mean_shared_gggp: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig7Row {
    pub band: FertilityBand,
    pub shared_gggp: usize,
    pub mean_shared_contacts: f64,
    pub n_pairs: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig8Row {
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub shared_gggp: usize,
    pub mean_shared_contacts: Option<f64>,
    pub n_pairs: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Fig9Row {
    pub run_id: usize,
    pub kappa_target: f64,
    pub adj_r2_kinship: f64,
    pub adj_r2_similarity: f64,
    pub n_pairs: usize,
    pub effective_degree_kin: usize,
    pub effective_degree_sim: usize,
}

fn members<'a>(runs: &'a [RunAnalysis], band: &FertilityBand) -> Result<Vec<&'a RunAnalysis>, AnalysisError> {
    let inside: Vec<_> = runs.iter().filter(|r| band.contains(r.kappa_target)).collect();
    if inside.is_empty() {
        return Err(AnalysisError::EmptyBand {
            lo: band.lo,
            hi: band.hi,
        });
    }
    Ok(inside)
}

/// Relatedness histogram per band.
pub fn relatedness_histogram(runs: &[RunAnalysis], bands: &[FertilityBand]) -> Result<Vec<Fig5Row>, AnalysisError> {
    let mut rows = Vec::with_capacity(bands.len() * R_VALUES);
    for band in bands {
        let inside = members(runs, band)?;
        for v in 0..R_VALUES {
            let fraction = inside.iter().map(|r| r.relatedness_fraction(v)).sum::<f64>() / inside.len() as f64;
            rows.push(Fig5Row {
                band: *band,
                shared_gggp: v,
                fraction,
            });
        }
    }
    Ok(rows)
}

pub fn mean_relatedness_by_fertility(runs: &[RunAnalysis]) -> Vec<Fig6Row> {
    runs.iter()
        .map(|r| Fig6Row {
            run_id: r.run_id,
            kappa_target: r.kappa_target,
            kappa_realized: r.kappa_realized,
            mean_shared_gggp: r.mean_shared_gggp(),
        })
        .collect()
}

/// Pooled mean kin-network shared contacts per relatedness value and band.
pub fn contacts_by_relatedness(runs: &[RunAnalysis], bands: &[FertilityBand]) -> Result<Vec<Fig7Row>, AnalysisError> {
    let mut rows = Vec::new();
    for band in bands {
        let inside = members(runs, band)?;
        for v in 0..R_VALUES {
            let n_pairs: u64 = inside.iter().map(|r| r.relatedness_pairs[v]).sum();
            if n_pairs == 0 {
                continue;
            }
            let sum: u64 = inside.iter().map(|r| r.kin_contact_sums[v]).sum();
            rows.push(Fig7Row {
                band: *band,
                shared_gggp: v,
                mean_shared_contacts: sum as f64 / n_pairs as f64,
                n_pairs,
            });
        }
    }
    Ok(rows)
}

/// Pooled mean standardized-network shared contacts per (trait distance
/// bucket, relatedness) cell for one band.
pub fn interaction_surface(
    runs: &[RunAnalysis],
    band: &FertilityBand,
    options: &AnalysisOptions,
) -> Result<Vec<Fig8Row>, AnalysisError> {
    let inside = members(runs, band)?;
    let buckets = options.delta_buckets();
    let mut rows = Vec::with_capacity(buckets * R_VALUES);
    for b in 0..buckets {
        let delta_lo = b as f64 * options.delta_bucket;
        let delta_hi = ((b + 1) as f64 * options.delta_bucket).min(180.0);
        for v in 0..R_VALUES {
            let n_pairs: u64 = inside.iter().map(|r| r.surface_pairs[b][v]).sum();
            let sum: u64 = inside.iter().map(|r| r.surface_sums[b][v]).sum();
            rows.push(Fig8Row {
                delta_lo,
                delta_hi,
                shared_gggp: v,
                mean_shared_contacts: (n_pairs > 0).then(|| sum as f64 / n_pairs as f64),
                n_pairs,
            });
        }
    }
    Ok(rows)
}

pub fn predictive_power_table(runs: &[RunAnalysis]) -> Vec<Fig9Row> {
    runs.iter()
        .map(|r| Fig9Row {
            run_id: r.run_id,
            kappa_target: r.kappa_target,
            adj_r2_kinship: r.power.kinship.adj_r2,
            adj_r2_similarity: r.power.similarity.adj_r2,
            n_pairs: r.power.n_pairs,
            effective_degree_kin: r.power.kinship.effective_degree,
            effective_degree_sim: r.power.similarity.effective_degree,
        })
        .collect()
}

/// Pooled mean over all buckets of a surface table, per relatedness value.
pub fn pooled_over_buckets(rows: &[Fig8Row], v: usize) -> Option<f64> {
    let (sum, n) = rows
        .iter()
        .filter(|r| r.shared_gggp == v)
        .fold((0.0, 0u64), |(s, n), r| {
            (s + r.mean_shared_contacts.unwrap_or(0.0) * r.n_pairs as f64, n + r.n_pairs)
        });
    (n > 0).then(|| sum / n as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureTables {
    pub bands: Vec<FertilityBand>,
    pub fig5: Vec<Fig5Row>,
    pub fig6: Vec<Fig6Row>,
    pub fig7: Vec<Fig7Row>,
    pub surface_high_band: FertilityBand,
    pub surface_low_band: FertilityBand,
    pub fig8_high: Vec<Fig8Row>,
    pub fig8_low: Vec<Fig8Row>,
    pub fig9: Vec<Fig9Row>,
}

impl FigureTables {
    /// `runs` must be in run order; `fertility_range` is the library's range.
    pub fn build(
        runs: &[RunAnalysis],
        options: &AnalysisOptions,
        fertility_range: (f64, f64),
    ) -> Result<Self, AnalysisError> {
        if runs.is_empty() {
            return Err(AnalysisError::EmptyLibrary);
        }
        options.validate()?;
        let (min, max) = fertility_range;
        let bands = FertilityBand::partition(min, max, options.bands);
        let high = FertilityBand::clamped(options.surface_high.0, options.surface_high.1, min, max);
        let low = FertilityBand::clamped(options.surface_low.0, options.surface_low.1, min, max);
        Ok(Self {
            fig5: relatedness_histogram(runs, &bands)?,
            fig6: mean_relatedness_by_fertility(runs),
            fig7: contacts_by_relatedness(runs, &bands)?,
            fig8_high: interaction_surface(runs, &high, options)?,
            fig8_low: interaction_surface(runs, &low, options)?,
            fig9: predictive_power_table(runs),
            bands,
            surface_high_band: high,
            surface_low_band: low,
        })
    }

    pub fn fig7_mean(&self, band: usize, v: usize) -> Option<f64> {
        let band = self.bands[band];
        self.fig7
            .iter()
            .find(|r| r.band == band && r.shared_gggp == v)
            .map(|r| r.mean_shared_contacts)
    }

    /// `(file name, contents)` for every table.
    pub fn csv_files(&self) -> Vec<(&'static str, String)> {
        vec![
            ("fig5.csv", fig5_csv(&self.fig5)),
            ("fig6.csv", fig6_csv(&self.fig6)),
            ("fig7.csv", fig7_csv(&self.fig7)),
            ("fig8_high.csv", fig8_csv(&self.fig8_high)),
            ("fig8_low.csv", fig8_csv(&self.fig8_low)),
            ("fig9.csv", fig9_csv(&self.fig9)),
        ]
    }
}

fn table(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

pub fn fig5_csv(rows: &[Fig5Row]) -> String {
    table(
        FIG5_HEADER,
        rows.iter()
            .map(|r| format!("{},{},{},{}", r.band.lo, r.band.hi, r.shared_gggp, r.fraction)),
    )
}

pub fn fig6_csv(rows: &[Fig6Row]) -> String {
    table(
        FIG6_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{}",
                r.run_id, r.kappa_target, r.kappa_realized, r.mean_shared_gggp
            )
        }),
    )
}

pub fn fig7_csv(rows: &[Fig7Row]) -> String {
    table(
        FIG7_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                r.band.lo, r.band.hi, r.shared_gggp, r.mean_shared_contacts, r.n_pairs
            )
        }),
    )
}

pub fn fig8_csv(rows: &[Fig8Row]) -> String {
    table(
        FIG8_HEADER,
        rows.iter().map(|r| {
            let mut line = format!("{},{},{},", r.delta_lo, r.delta_hi, r.shared_gggp);
            match r.mean_shared_contacts {
                Some(m) => write!(line, "{m}").unwrap(),
                None => line.push_str(NULL_CELL),
            }
            write!(line, ",{}", r.n_pairs).unwrap();
            line
        }),
    )
}

pub fn fig9_csv(rows: &[Fig9Row]) -> String {
    table(
        FIG9_HEADER,
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                r.run_id,
                r.kappa_target,
                r.adj_r2_kinship,
                r.adj_r2_similarity,
                r.n_pairs,
                r.effective_degree_kin,
                r.effective_degree_sim
            )
        }),
    )
}
