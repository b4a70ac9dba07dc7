//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.
//!
//! `KINSIM_FIG7_FACTOR` overrides the required top/bottom slope ratio of the
//! relatedness-contacts curve (default 3).

mod common;

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{adjacency_of, brute_common_neighbors, exact_polyfit, random_dataset, random_dense_graph, relative_error};
use kinsim_core::analysis::{cubic_fit, FertilityBand, RunInput, RunMatrices};
use kinsim_core::demography::build_library;
use kinsim_core::graph::{shared_contacts, Adjacency};
use kinsim_core::kinship::{ancestor_slots, multiset_intersection};
use kinsim_core::runner::{PipelineConfig, Preset};
use kinsim_core::seed::rng_from_seed;
use rand::Rng;
use tempfile::TempDir;

const FIGS: [&str; 6] = ["fig5.csv", "fig6.csv", "fig7.csv", "fig8_high.csv", "fig8_low.csv", "fig9.csv"];
const SEED: &str = "7";

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

type Table = Vec<HashMap<String, String>>;

fn read_table(path: &Path) -> Table {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap_or_default().split(',').map(String::from).collect();
    lines
        .map(|line| header.iter().cloned().zip(line.split(',').map(String::from)).collect())
        .collect()
}

fn num(row: &HashMap<String, String>, key: &str) -> f64 {
    row[key].parse().unwrap_or(f64::NAN)
}

fn kinsim(args: &[&str]) -> (bool, Duration, String) {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_kinsim"))
        .args(args)
        .output()
        .expect("kinsim binary runs");
    (
        out.status.success(),
        started.elapsed(),
        String::from_utf8_lossy(&out.stderr).trim().to_string(),
    )
}

fn band_mean(fig6: &Table, lo: f64, hi: f64) -> f64 {
    let values: Vec<f64> = fig6
        .iter()
        .filter(|r| (lo..=hi).contains(&num(r, "kappa_target")))
        .map(|r| num(r, "mean_shared_gggp"))
        .collect();
    common::mean(&values)
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    (lo..=hi).contains(&v)
}

fn fig6_endpoints(full: &Path, full_time: Duration, desk: &Path, desk_time: Duration) -> Outcome {
    let f = read_table(&full.join("fig6.csv"));
    let d = read_table(&desk.join("fig6.csv"));
    let (ft, fb) = (band_mean(&f, 4.75, 5.0), band_mean(&f, 2.5, 2.75));
    let (dt, db) = (band_mean(&d, 4.75, 5.0), band_mean(&d, 2.5, 2.75));
    let checks = [
        within(ft, 3.0, 5.0),
        within(fb, 0.25, 0.9),
        within(dt, 2.5, 5.5),
        within(db, 0.15, 1.2),
        full_time < Duration::from_secs(30 * 60),
        desk_time < Duration::from_secs(2 * 60),
    ];
    Outcome {
        name: "fig6-endpoints",
        pass: checks.iter().all(|&c| c),
        detail: format!(
            "full top {ft:.3} in [3.0,5.0]: {}, bottom {fb:.3} in [0.25,0.9]: {}; desk top {dt:.3} in [2.5,5.5]: {}, \
             bottom {db:.3} in [0.15,1.2]: {}; runtime full {:.0}s < 1800s: {}, desk {:.1}s < 120s: {}",
            checks[0],
            checks[1],
            checks[2],
            checks[3],
            full_time.as_secs_f64(),
            checks[4],
            desk_time.as_secs_f64(),
            checks[5]
        ),
    }
}

fn fig7_shape(full: &Path) -> Outcome {
    let factor: f64 = std::env::var("KINSIM_FIG7_FACTOR")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(3.0);
    let rows = read_table(&full.join("fig7.csv"));
    let mut band_los: Vec<f64> = rows.iter().map(|r| num(r, "band_lo")).collect();
    band_los.sort_by(f64::total_cmp);
    band_los.dedup();
    let (bottom, top) = (band_los[0], band_los[band_los.len() - 1]);
    let at = |band: f64, v: usize| {
        rows.iter()
            .find(|r| num(r, "band_lo") == band && r["shared_gggp"] == v.to_string())
            .map(|r| num(r, "mean_shared_contacts"))
    };
    let top_curve: Vec<Option<f64>> = [0, 2, 4, 8, 16].iter().map(|&v| at(top, v)).collect();
    let monotone = top_curve.iter().all(Option::is_some)
        && top_curve.windows(2).all(|w| w[0].unwrap() <= w[1].unwrap());
    let slope = |band| Some(at(band, 16)? - at(band, 0)?);
    let (st, sb) = (slope(top), slope(bottom));
    let steep = matches!((st, sb), (Some(t), Some(b)) if t >= factor * b);
    let shown: Vec<String> = top_curve
        .iter()
        .map(|c| c.map_or("missing".into(), |v| format!("{v:.2}")))
        .collect();
    Outcome {
        name: "fig7-shape",
        pass: monotone && steep,
        detail: format!(
            "top band c at r=0,2,4,8,16 [{}] non-decreasing: {monotone}; top slope {:.2} >= {factor} x bottom slope {:.2}: {steep}",
            shown.join(", "),
            st.unwrap_or(f64::NAN),
            sb.unwrap_or(f64::NAN)
        ),
    }
}

fn fig9_crossover(full: &Path) -> Outcome {
    let rows = read_table(&full.join("fig9.csv"));
    let bands = FertilityBand::partition(2.5, 5.0, 5);
    let mut diffs = Vec::new();
    let mut shown = Vec::new();
    for band in &bands {
        let inside: Vec<_> = rows.iter().filter(|r| band.contains(num(r, "kappa_target"))).collect();
        let kin = common::mean(&inside.iter().map(|r| num(r, "adj_r2_kinship")).collect::<Vec<_>>());
        let sim = common::mean(&inside.iter().map(|r| num(r, "adj_r2_similarity")).collect::<Vec<_>>());
        diffs.push(kin - sim);
        shown.push(format!("[{:.1},{:.1}] kin {kin:.3} sim {sim:.3}", band.lo, band.hi));
    }
    let high = diffs[diffs.len() - 1] > 0.0;
    let low = diffs[0] < 0.0;
    let changes = diffs.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count();
    Outcome {
        name: "fig9-crossover",
        pass: high && low && changes == 1,
        detail: format!(
            "{}; kin > sim at high fertility: {high}, sim > kin at low fertility: {low}, sign changes {changes} == 1",
            shown.join("; ")
        ),
    }
}

fn fig8_step(full: &Path) -> Outcome {
    let rows = read_table(&full.join("fig8_low.csv"));
    let pooled = |v: usize| {
        let (mut sum, mut n) = (0.0, 0.0);
        for r in rows.iter().filter(|r| r["shared_gggp"] == v.to_string()) {
            let pairs = num(r, "n_pairs");
            if pairs > 0.0 {
                sum += num(r, "mean_shared_contacts") * pairs;
                n += pairs;
            }
        }
        sum / n
    };
    let (c2, c4, c8) = (pooled(2), pooled(4), pooled(8));
    let step = c8 - c4;
    let pass = step > 0.0 && step > c4 - c2;
    Outcome {
        name: "fig8-step",
        pass,
        detail: format!("low band c(8)-c(4) = {step:.3} > 0 and > c(4)-c(2) = {:.3}", c4 - c2),
    }
}

fn oracle_equivalence() -> Outcome {
    let mut rng = rng_from_seed(2024);
    let mut graph_mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=50);
        let p = rng.random_range(0.0..0.6);
        let dense = random_dense_graph(&mut rng, n, p);
        let want = brute_common_neighbors(&dense);
        let got = shared_contacts(&adjacency_of(&dense));
        let same = (0..n).all(|i| (0..n).all(|j| u32::from(got.get(i, j)) == want[i][j]));
        graph_mismatches += usize::from(!same);
    }
    let mut worst = 0.0_f64;
    for seed in 1000..1050 {
        let (xs, ys) = random_dataset(seed);
        let fit = cubic_fit(&xs, &ys).expect("well-posed dataset");
        let (want, _) = exact_polyfit(&xs, &ys, 3);
        for k in 0..4 {
            worst = worst.max(relative_error(fit.coefficients[k], want[k]));
        }
    }
    Outcome {
        name: "oracle-equivalence",
        pass: graph_mismatches == 0 && worst < 1e-6,
        detail: format!(
            "shared contacts: {graph_mismatches} of 1000 graphs differ; cubic fit: worst relative coefficient error {worst:.2e} < 1e-6"
        ),
    }
}

fn symmetric_without_loops(adj: &Adjacency) -> bool {
    (0..adj.len()).all(|i| !adj.has_edge(i, i) && adj.neighbors(i).iter().all(|&j| adj.has_edge(j as usize, i)))
}

fn structural_invariants() -> Outcome {
    let mut config = PipelineConfig::preset(Preset::Desk);
    config.library.master_seed = SEED.parse().unwrap();
    let caps = config.analysis.caps;
    let library = build_library(&config.library).expect("desk library builds");
    let mut violations: HashMap<&str, usize> = HashMap::new();
    let mut flag = |what: &'static str, ok: bool| {
        if !ok {
            *violations.entry(what).or_default() += 1;
        }
    };
    let (mut couples, mut sibling_pairs) = (0usize, 0usize);
    for run in &library {
        let h = &run.history;
        for c in h.couples.iter().flatten() {
            couples += 1;
            let shared = multiset_intersection(&ancestor_slots(h, c.wife, 2).sorted(), &ancestor_slots(h, c.husband, 2).sorted());
            flag("couple shares a grandparent", shared == 0);
        }
        let input = RunInput {
            run_id: run.run_id,
            kappa_target: run.kappa_target,
            kappa_realized: run.kappa_realized,
            seed: run.seed,
            history: h,
            cohort: &run.cohort,
        };
        let m = RunMatrices::build(&input, &config.analysis).expect("run matrices build");
        let ids = &run.cohort.members;
        let n = m.len();
        let mut relatives = vec![0usize; n];
        for &(i, j, kind) in &m.network.edges {
            if kind.is_relative() {
                relatives[i] += 1;
                relatives[j] += 1;
            }
        }
        for i in 0..n {
            flag("relative degree above cap", relatives[i] <= caps.relative_cap);
            flag("total degree above cap", m.network.adjacency.degree(i) <= caps.total_cap);
            flag("relatedness diagonal", m.relatedness.get(i, i) == 0);
            let parents_i = h.agent(ids[i]).parents();
            for j in (i + 1)..n {
                if parents_i.is_some() && parents_i == h.agent(ids[j]).parents() {
                    sibling_pairs += 1;
                    flag("sibling pair without r = 16", m.relatedness.get(i, j) == 16);
                }
                flag("relatedness asymmetric", m.relatedness.get(i, j) == m.relatedness.get(j, i));
                let delta = m.traits.distance(i, j);
                flag("trait distance outside [0, 180]", (0.0..=180.0).contains(&delta));
            }
        }
        flag("kin network asymmetric or looped", symmetric_without_loops(&m.kin));
        flag("standard network asymmetric or looped", symmetric_without_loops(&m.network.adjacency));
    }
    let total: usize = violations.values().sum();
    let mut listed: Vec<String> = violations.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    listed.sort();
    Outcome {
        name: "structural-invariants",
        pass: total == 0,
        detail: format!(
            "{} runs, {couples} couples, {sibling_pairs} sibling pairs checked; {total} violations{}",
            library.len(),
            if listed.is_empty() { String::new() } else { format!(" ({})", listed.join(", ")) }
        ),
    }
}

fn determinism(one: &Path, eight: &Path) -> Outcome {
    let differing: Vec<&str> = FIGS
        .iter()
        .copied()
        .filter(|name| fs::read(one.join(name)).ok() != fs::read(eight.join(name)).ok())
        .collect();
    Outcome {
        name: "determinism",
        pass: differing.is_empty(),
        detail: if differing.is_empty() {
            "fig5-fig9 CSVs byte-identical for --workers 1 and --workers 8".into()
        } else {
            format!("differing files: {}", differing.join(", "))
        },
    }
}

fn failed(name: &'static str, why: String) -> Outcome {
    Outcome {
        name,
        pass: false,
        detail: why,
    }
}

fn main() {
    let scratch = TempDir::new().expect("temporary directory");
    let dir = |name: &str| scratch.path().join(name);
    let (desk1, desk8, full) = (dir("desk-w1"), dir("desk-w8"), dir("full"));

    let desk = |out: &Path, workers: &str| {
        kinsim(&["all", "--preset", "desk", "--seed", SEED, "--workers", workers, "--out", out.to_str().unwrap()])
    };
    let (ok1, desk_time, err1) = desk(&desk1, "1");
    let (ok8, _, err8) = desk(&desk8, "8");
    let (okf, full_time, errf) = kinsim(&["all", "--preset", "full", "--seed", SEED, "--out", full.to_str().unwrap()]);

    let mut outcomes = Vec::new();
    outcomes.push(match (okf, ok1) {
        (true, true) => fig6_endpoints(&full, full_time, &desk1, desk_time),
        _ => failed("fig6-endpoints", format!("pipeline failed: {errf} {err1}")),
    });
    for (name, check) in [
        ("fig7-shape", fig7_shape as fn(&Path) -> Outcome),
        ("fig9-crossover", fig9_crossover),
        ("fig8-step", fig8_step),
    ] {
        outcomes.push(if okf { check(&full) } else { failed(name, format!("full pipeline failed: {errf}")) });
    }
    outcomes.push(oracle_equivalence());
    outcomes.push(structural_invariants());
    outcomes.push(match (ok1, ok8) {
        (true, true) => determinism(&desk1, &desk8),
        _ => failed("determinism", format!("pipeline failed: {err1} {err8}")),
    });

    for o in &outcomes {
        println!("{} {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    let failures = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failures} failed", outcomes.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
