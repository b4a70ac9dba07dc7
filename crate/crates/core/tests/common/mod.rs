//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use kinsim_core::analysis::RunAnalysis;
use kinsim_core::demography::{build_library, LibraryConfig, LibraryRun};
use kinsim_core::graph::Adjacency;
use kinsim_core::runner::analyze_library;
use kinsim_core::AnalysisOptions;
use num::bigint::BigInt;
use num::{BigRational, ToPrimitive, Zero};
use kinsim_core::seed::rng_from_seed;
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Dense boolean adjacency from a random G(n, p) draw.
pub fn random_dense_graph(rng: &mut impl Rng, n: usize, p: f64) -> Vec<Vec<bool>> {
    let mut m = vec![vec![false; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random_bool(p) {
                m[i][j] = true;
                m[j][i] = true;
            }
        }
    }
    m
}

pub fn adjacency_of(dense: &[Vec<bool>]) -> Adjacency {
    let n = dense.len();
    let edges = (0..n).flat_map(|i| ((i + 1)..n).filter(move |&j| dense[i][j]).map(move |j| (i, j)));
    Adjacency::from_edges(n, edges)
}

/// `c[i][j] = sum_k a[i][k] * a[j][k]`, straight from the definition.
pub fn brute_common_neighbors(dense: &[Vec<bool>]) -> Vec<Vec<u32>> {
    let n = dense.len();
    let mut c = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            c[i][j] = (0..n).filter(|&k| dense[i][k] && dense[j][k]).count() as u32;
        }
    }
    c
}

/// Least-squares polynomial of the given degree by exact rational
/// normal equations. Returns the coefficients (low order first) and r².
pub fn exact_polyfit(xs: &[f64], ys: &[f64], degree: usize) -> (Vec<f64>, f64) {
    let p = degree + 1;
    let rat = |v: f64| BigRational::from_float(v).expect("finite input");
    let xr: Vec<BigRational> = xs.iter().map(|&x| rat(x)).collect();
    let yr: Vec<BigRational> = ys.iter().map(|&y| rat(y)).collect();

    let mut powers: Vec<Vec<BigRational>> = Vec::with_capacity(xr.len());
    for x in &xr {
        let mut row = vec![BigRational::from_integer(BigInt::from(1))];
        for k in 1..p {
            let next = &row[k - 1] * x;
            row.push(next);
        }
        powers.push(row);
    }
    let mut a = vec![vec![BigRational::zero(); p + 1]; p];
    for (row, y) in powers.iter().zip(&yr) {
        for r in 0..p {
            for c in 0..p {
                a[r][c] += &row[r] * &row[c];
            }
            a[r][p] += &row[r] * y;
        }
    }
    for col in 0..p {
        let pivot = (col..p).find(|&r| !a[r][col].is_zero()).expect("nonsingular normal matrix");
        a.swap(col, pivot);
        for r in 0..p {
            if r != col && !a[r][col].is_zero() {
                let f = &a[r][col] / &a[col][col];
                for c in col..=p {
                    let delta = &f * &a[col][c];
                    a[r][c] -= delta;
                }
            }
        }
    }
    let beta: Vec<BigRational> = (0..p).map(|r| &a[r][p] / &a[r][r]).collect();

    let n = BigRational::from_integer(BigInt::from(yr.len()));
    let mean = yr.iter().fold(BigRational::zero(), |acc, y| acc + y) / &n;
    let mut sse = BigRational::zero();
    let mut sst = BigRational::zero();
    for (row, y) in powers.iter().zip(&yr) {
        let fitted = row.iter().zip(&beta).fold(BigRational::zero(), |acc, (x, b)| acc + x * b);
        let e = y - fitted;
        sse += &e * &e;
        let d = y - &mean;
        sst += &d * &d;
    }
    let r2 = BigRational::from_integer(BigInt::from(1)) - sse / sst;
    let to_f = |v: &BigRational| v.to_f64().unwrap();
    (beta.iter().map(to_f).collect(), to_f(&r2))
}

/// Noisy cubic data over one of a few predictor ranges, sometimes with
/// integer-valued predictors.
pub fn random_dataset(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = rng_from_seed(seed);
    let n = rng.random_range(20..400);
    let coef: Vec<f64> = (0..4)
        .map(|_| rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { -1.0 } else { 1.0 })
        .collect();
    let (lo, hi): (f64, f64) = [(0.0, 16.0), (-5.0, 5.0), (0.0, 180.0)][rng.random_range(0..3)];
    let noise = Normal::new(0.0, 0.05 * (hi - lo).abs().powi(3)).unwrap();
    let integer_x = rng.random_bool(0.3);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for _ in 0..n {
        let mut x: f64 = rng.random_range(lo..hi);
        if integer_x {
            x = x.round();
        }
        let y = coef[0] + coef[1] * x + coef[2] * x * x + coef[3] * x * x * x + noise.sample(&mut rng);
        xs.push(x);
        ys.push(y);
    }
    (xs, ys)
}

pub fn relative_error(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        ((got - want) / want).abs()
    }
}

pub fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

/// Average ranks, ties sharing the mean rank.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[order[k]] = rank;
        }
        i = j + 1;
    }
    out
}

pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}

pub fn library(runs: usize, target_size: usize, master_seed: u64) -> (LibraryConfig, Vec<LibraryRun>) {
    let config = LibraryConfig {
        runs,
        target_size,
        master_seed,
        ..LibraryConfig::default()
    };
    let lib = build_library(&config).expect("library builds");
    (config, lib)
}

pub fn analyzed(lib: &[LibraryRun], options: &AnalysisOptions) -> Vec<RunAnalysis> {
    analyze_library(lib, options, 1).expect("analysis succeeds")
}
