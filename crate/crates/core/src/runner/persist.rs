//! On-disk layout of a library.
//!
//! ```text
//! OUT/manifest.json
//! OUT/runs/run_0000/history.csv   every agent of the history
//! OUT/runs/run_0000/cohort.csv    the truncated final cohort, same schema
//! OUT/runs/run_0000/run.json
//! OUT/fig5.csv .. fig9.csv, diagnostics.csv
//! ```
//!
//! Agent tables end with a `#end,<rows>` sentinel so a truncated file is
//! detected instead of analysed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::PipelineConfig;
use super::RunnerError;
use crate::analysis::{RunAnalysis, RunMatrices};
use crate::demography::{Agent, AgentId, Cohort, Gender, PopulationHistory};

pub const AGENT_HEADER: &str = "id,generation,gender,mother_id,father_id";
pub const SENTINEL: &str = "#end";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIAGNOSTICS_HEADER: &str = "run_id,kappa_target,double_first_cousin_pairs,sibling_edges,cousin_edges,friend_edges,mean_degree,max_degree,max_relative_degree";

/// Per-run record, also written as `run.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: usize,
    pub kappa_target: f64,
    pub kappa_realized: f64,
    pub seed: u64,
    pub n_final: usize,
    pub generations: u32,
    pub cohort_size: usize,
    pub attempts: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generate_seconds: Option<f64>,
    pub analyze_seconds: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: PipelineConfig,
    pub master_seed: u64,
    pub runs: Vec<RunRecord>,
    pub timing: Timing,
}

impl RunManifest {
    pub fn new(config: &PipelineConfig, runs: Vec<RunRecord>) -> Self {
        Self {
            tool: "kinsim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            master_seed: config.library.master_seed,
            runs,
            timing: Timing::default(),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunnerError + '_ {
    move |source| RunnerError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn mismatch(path: &Path, reason: impl Into<String>) -> RunnerError {
    RunnerError::SchemaMismatch {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), RunnerError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, contents).map_err(io_err(path))
}

pub fn run_dir(out: &Path, run_id: usize) -> PathBuf {
    out.join("runs").join(format!("run_{run_id:04}"))
}

fn parent_code(p: Option<AgentId>) -> i64 {
    p.map_or(-1, |id| i64::from(id.0))
}

pub fn agents_csv<'a>(agents: impl Iterator<Item = &'a Agent>) -> String {
    let mut out = String::from(AGENT_HEADER);
    out.push('\n');
    let mut rows = 0usize;
    for a in agents {
        writeln!(
            out,
            "{},{},{},{},{}",
            a.id,
            a.generation,
            a.gender.code(),
            parent_code(a.mother),
            parent_code(a.father)
        )
        .unwrap();
        rows += 1;
    }
    writeln!(out, "{SENTINEL},{rows}").unwrap();
    out
}

pub fn parse_agents(path: &Path, text: &str) -> Result<Vec<Agent>, RunnerError> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == AGENT_HEADER => {}
        Some(h) => return Err(mismatch(path, format!("unexpected header {h:?}, expected {AGENT_HEADER:?}"))),
        None => return Err(mismatch(path, "empty file")),
    }
    let mut agents = Vec::new();
    let mut terminated = false;
    for (lineno, line) in lines.enumerate() {
        if terminated {
            return Err(mismatch(path, format!("data after the end marker at line {}", lineno + 2)));
        }
        if let Some(count) = line.strip_prefix(SENTINEL) {
            let count: usize = count
                .strip_prefix(',')
                .and_then(|c| c.parse().ok())
                .ok_or_else(|| mismatch(path, "malformed end marker"))?;
            if count != agents.len() {
                return Err(mismatch(
                    path,
                    format!("end marker announces {count} rows but {} were read", agents.len()),
                ));
            }
            terminated = true;
            continue;
        }
        let bad = || mismatch(path, format!("malformed row at line {}: {line:?}", lineno + 2));
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(bad());
        }
        let id: u32 = fields[0].parse().map_err(|_| bad())?;
        let generation: u32 = fields[1].parse().map_err(|_| bad())?;
        let gender = fields[2].parse().ok().and_then(Gender::from_code).ok_or_else(bad)?;
        let parent = |s: &str| -> Result<Option<AgentId>, RunnerError> {
            match s.parse::<i64>().map_err(|_| bad())? {
                -1 => Ok(None),
                v if v >= 0 && v <= i64::from(u32::MAX) => Ok(Some(AgentId(v as u32))),
                _ => Err(bad()),
            }
        };
        agents.push(Agent {
            id: AgentId(id),
            generation,
            gender,
            mother: parent(fields[3])?,
            father: parent(fields[4])?,
        });
    }
    if !terminated {
        return Err(mismatch(path, "missing end marker (file truncated?)"));
    }
    Ok(agents)
}

fn read_text(path: &Path) -> Result<String, RunnerError> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_run(
    out: &Path,
    record: &RunRecord,
    history: &PopulationHistory,
    cohort: &Cohort,
) -> Result<(), RunnerError> {
    let dir = run_dir(out, record.run_id);
    write_file(&dir.join("history.csv"), &agents_csv(history.agents.iter()))?;
    write_file(
        &dir.join("cohort.csv"),
        &agents_csv(cohort.members.iter().map(|&id| history.agent(id))),
    )?;
    let json = serde_json::to_string_pretty(record).expect("run record serializes");
    write_file(&dir.join("run.json"), &(json + "\n"))
}

/// Reads one run back and checks it against the manifest entry.
pub fn read_run(out: &Path, expected: &RunRecord) -> Result<(PopulationHistory, Cohort), RunnerError> {
    let dir = run_dir(out, expected.run_id);
    let record_path = dir.join("run.json");
    let record: RunRecord = serde_json::from_str(&read_text(&record_path)?)
        .map_err(|e| mismatch(&record_path, e.to_string()))?;
    if &record != expected {
        return Err(mismatch(&record_path, "does not match the manifest entry"));
    }

    let history_path = dir.join("history.csv");
    let agents = parse_agents(&history_path, &read_text(&history_path)?)?;
    let mut history = PopulationHistory::from_agents(agents, record.kappa_target, record.seed)
        .map_err(|e| mismatch(&history_path, e.to_string()))?;
    history.attempts = record.attempts;
    if history.generations != record.generations {
        return Err(mismatch(&history_path, "generation count differs from run.json"));
    }

    let cohort_path = dir.join("cohort.csv");
    let rows = parse_agents(&cohort_path, &read_text(&cohort_path)?)?;
    let mut members = Vec::with_capacity(rows.len());
    for row in rows {
        match history.agents.get(row.id.index()) {
            Some(a) if *a == row && a.generation == history.generations => members.push(row.id),
            _ => return Err(mismatch(&cohort_path, format!("agent {} is not in the final generation", row.id))),
        }
    }
    if members.len() != record.cohort_size || !members.windows(2).all(|w| w[0] < w[1]) {
        return Err(mismatch(&cohort_path, "cohort size or ordering differs from run.json"));
    }
    Ok((history, Cohort { members }))
}

pub fn write_manifest(out: &Path, manifest: &RunManifest) -> Result<(), RunnerError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_file(&out.join(MANIFEST_FILE), &(json + "\n"))
}

pub fn read_manifest(out: &Path) -> Result<RunManifest, RunnerError> {
    let path = out.join(MANIFEST_FILE);
    if !path.is_file() {
        return Err(RunnerError::ManifestMissing(path));
    }
    let manifest: RunManifest =
        serde_json::from_str(&read_text(&path)?).map_err(|e| mismatch(&path, e.to_string()))?;
    if manifest.runs.len() != manifest.config.library.runs
        || manifest.runs.iter().enumerate().any(|(k, r)| r.run_id != k)
    {
        return Err(mismatch(&path, "run list is incomplete"));
    }
    Ok(manifest)
}

pub fn diagnostics_csv(runs: &[RunAnalysis]) -> String {
    let mut out = String::from(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in runs {
        let d = &r.diagnostics;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.run_id,
            r.kappa_target,
            d.double_first_cousin_pairs,
            d.sibling_edges,
            d.cousin_edges,
            d.friend_edges,
            d.mean_degree,
            d.max_degree,
            d.max_relative_degree
        )
        .unwrap();
    }
    out
}

/// Coordinate-list dumps (`i,j,value`, upper triangle, non-zero entries,
/// agent ids) of r, a and c, the standardized network's edges, contacts and
/// traits.
pub fn dump_matrices(out: &Path, run_id: usize, cohort: &Cohort, m: &RunMatrices) -> Result<(), RunnerError> {
    let dir = run_dir(out, run_id);
    let ids = &cohort.members;
    let n = m.len();
    let coo = |value: &dyn Fn(usize, usize) -> u32| {
        let mut s = String::from("i,j,value\n");
        for i in 0..n {
            for j in (i + 1)..n {
                let v = value(i, j);
                if v != 0 {
                    writeln!(s, "{},{},{v}", ids[i], ids[j]).unwrap();
                }
            }
        }
        s
    };
    write_file(&dir.join("r.csv"), &coo(&|i, j| u32::from(m.relatedness.get(i, j))))?;
    write_file(&dir.join("a.csv"), &coo(&|i, j| u32::from(m.kin.has_edge(i, j))))?;
    write_file(&dir.join("c.csv"), &coo(&|i, j| u32::from(m.kin_contacts.get(i, j))))?;
    write_file(
        &dir.join("c_standard.csv"),
        &coo(&|i, j| u32::from(m.network_contacts.get(i, j))),
    )?;

    let mut edges = String::from("i,j,provenance\n");
    for &(i, j, kind) in &m.network.edges {
        writeln!(edges, "{},{},{}", ids[i], ids[j], kind.as_str()).unwrap();
    }
    write_file(&dir.join("network_edges.csv"), &edges)?;
    let mut nodes = String::from("id,phi_degrees\n");
    for (i, phi) in m.traits.0.iter().enumerate() {
        writeln!(nodes, "{},{phi}", ids[i]).unwrap();
    }
    write_file(&dir.join("network_nodes.csv"), &nodes)
}
