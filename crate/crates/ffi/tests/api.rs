use std::ffi::{CStr, CString};
use std::ptr;

use kinsim_ffi::*;
use tempfile::TempDir;

fn small_config() -> KinsimLibraryConfig {
    let mut config = unsafe {
        let mut c = std::mem::zeroed();
        assert_eq!(kinsim_library_config_default(&mut c), KinsimStatus::Ok);
        c
    };
    config.runs = 5;
    config.target_size = 120;
    config.master_seed = 11;
    config
}

fn last_error() -> String {
    let p = kinsim_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn build_analyse_and_read_back() {
    let config = small_config();
    let mut lib = ptr::null_mut();
    unsafe {
        assert_eq!(kinsim_library_build(&config, 1, &mut lib), KinsimStatus::Ok);
        assert_eq!(kinsim_library_len(lib), 5);

        let mut info = KinsimRunInfo::default();
        assert_eq!(kinsim_library_run_info(lib, 3, &mut info), KinsimStatus::Ok);
        assert_eq!(info.run_id, 3);
        assert_eq!(info.cohort_size, 120);
        assert!(info.n_final >= 120);
        assert_eq!(kinsim_library_run_info(lib, 5, &mut info), KinsimStatus::OutOfRange);

        let n = 120;
        let mut r = vec![0u8; n * n];
        assert_eq!(kinsim_library_relatedness(lib, 0, r.as_mut_ptr(), r.len()), KinsimStatus::Ok);
        for i in 0..n {
            assert_eq!(r[i * n + i], 0);
            for j in 0..n {
                assert_eq!(r[i * n + j], r[j * n + i]);
                assert!(r[i * n + j] <= 16 && r[i * n + j] % 2 == 0);
            }
        }
        assert_eq!(kinsim_library_relatedness(lib, 0, r.as_mut_ptr(), 10), KinsimStatus::OutOfRange);

        let mut analysis = ptr::null_mut();
        assert_eq!(kinsim_analysis_run(lib, ptr::null(), 2, &mut analysis), KinsimStatus::Ok, "{}", last_error());
        assert_eq!(kinsim_analysis_len(analysis), 5);
        let mut mean = 0.0;
        assert_eq!(kinsim_analysis_mean_shared_gggp(analysis, 0, &mut mean), KinsimStatus::Ok);
        let pairs = (n * (n - 1) / 2) as f64;
        let want: f64 = (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).map(|(i, j)| f64::from(r[i * n + j])).sum::<f64>() / pairs;
        assert!((mean - want).abs() < 1e-12);

        let mut row = KinsimFig9Row::default();
        assert_eq!(kinsim_analysis_fig9_row(analysis, 1, &mut row), KinsimStatus::Ok);
        assert_eq!(row.run_id, 1);
        assert_eq!(row.n_pairs, n * (n - 1) / 2);
        assert!(row.adj_r2_kinship <= 1.0 && row.adj_r2_similarity <= 1.0);

        let dir = TempDir::new().unwrap();
        let path = CString::new(dir.path().join("tables").to_str().unwrap()).unwrap();
        assert_eq!(kinsim_analysis_write_tables(analysis, path.as_ptr()), KinsimStatus::Ok);
        for name in ["fig5.csv", "fig6.csv", "fig7.csv", "fig8_high.csv", "fig8_low.csv", "fig9.csv"] {
            assert!(dir.path().join("tables").join(name).is_file(), "{name}");
        }

        kinsim_analysis_free(analysis);
        kinsim_library_free(lib);
    }
}

#[test]
fn null_and_invalid_arguments_are_reported() {
    unsafe {
        let mut lib = ptr::null_mut();
        assert_eq!(kinsim_library_build(ptr::null(), 1, &mut lib), KinsimStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut config = small_config();
        config.fertility_min = 6.0;
        assert_eq!(kinsim_library_build(&config, 1, &mut lib), KinsimStatus::InvalidArgument);
        assert!(lib.is_null());
        assert!(last_error().contains("fertility"));

        let mut config = small_config();
        config.runs = 1;
        config.fertility_min = 0.1;
        config.fertility_max = 0.2;
        assert_eq!(kinsim_library_build(&config, 1, &mut lib), KinsimStatus::GrowthFailure);

        assert_eq!(kinsim_library_len(ptr::null()), 0);
        kinsim_library_free(ptr::null_mut());
        kinsim_analysis_free(ptr::null_mut());
        assert_eq!(kinsim_analysis_write_tables(ptr::null(), ptr::null()), KinsimStatus::NullPointer);
        assert_eq!(kinsim_run_all(7, ptr::null(), 1, 1, c"out".as_ptr()), KinsimStatus::InvalidArgument);
    }
}

#[test]
fn successful_calls_clear_the_error() {
    unsafe {
        assert_eq!(kinsim_library_config_default(ptr::null_mut()), KinsimStatus::NullPointer);
        assert!(!kinsim_last_error_message().is_null());
        let mut options = std::mem::zeroed();
        assert_eq!(kinsim_analysis_options_default(&mut options), KinsimStatus::Ok);
        assert!(kinsim_last_error_message().is_null());
        assert_eq!(options.pair_sample, 0);
        assert_eq!(options.relative_cap, 50);
        assert_eq!(options.total_cap, 60);
    }
}

#[test]
fn cubic_fit_and_compass_distance() {
    let xs: Vec<f64> = (0..25).map(f64::from).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 2.0 + 0.5 * x - 0.1 * x * x + 0.01 * x * x * x).collect();
    let mut fit = KinsimCubicFit::default();
    unsafe {
        assert_eq!(kinsim_cubic_fit(xs.as_ptr(), ys.as_ptr(), xs.len(), &mut fit), KinsimStatus::Ok);
        assert_eq!(kinsim_cubic_fit(xs.as_ptr(), ys.as_ptr(), 3, &mut fit), KinsimStatus::DegenerateInput);
    }
    let want = [2.0, 0.5, -0.1, 0.01];
    let mut fit = KinsimCubicFit::default();
    unsafe { kinsim_cubic_fit(xs.as_ptr(), ys.as_ptr(), xs.len(), &mut fit) };
    for (got, want) in fit.coefficients.iter().zip(want) {
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
    assert!((fit.r2 - 1.0).abs() < 1e-12);
    assert_eq!(fit.n, 25);
    assert_eq!(kinsim_compass_distance(350.0, 10.0), 20.0);
    assert_eq!(kinsim_compass_distance(0.0, 180.0), 180.0);
}

#[test]
fn run_all_writes_a_complete_output_tree() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("small.toml");
    std::fs::write(&cfg, "runs = 5\npop_size = 100\n").unwrap();
    let cfg = CString::new(cfg.to_str().unwrap()).unwrap();
    let out = dir.path().join("out");
    let out_c = CString::new(out.to_str().unwrap()).unwrap();
    let status = unsafe { kinsim_run_all(1, cfg.as_ptr(), 5, 1, out_c.as_ptr()) };
    assert_eq!(status, KinsimStatus::Ok, "{}", last_error());
    assert!(out.join("manifest.json").is_file());
    assert!(out.join("fig9.csv").is_file());
    assert!(out.join("runs/run_0002/history.csv").is_file());
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(kinsim_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
