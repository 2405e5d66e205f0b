use dunkl_lab::experiment::sandwich::log_grid;
use dunkl_lab::experiment::{
    emit_report, fit_constants, run_aux_m, run_decompose, run_experiment, run_fp, run_sandwich, scale_sweep,
    ExperimentConfig, ExperimentKind,
};
use dunkl_lab::Execution;
use proptest::prelude::*;

const CONSTANT: &str = r#"
seed = 7

[system]
k = 1.0

[potential]
family = "constant"
value = 4.0

[spectral]
h = 0.05
half_width = 8.0
"#;

fn constant_config() -> ExperimentConfig {
    ExperimentConfig::from_toml_str(CONSTANT).unwrap()
}

#[test]
fn sweep_spans_sixteenth_to_sixteen() {
    let s = scale_sweep();
    assert_eq!(s.len(), 17);
    assert!((s[0] - 1.0 / 16.0).abs() < 1e-15);
    assert!((s[8] - 1.0).abs() < 1e-15);
    assert!((s[16] - 16.0).abs() < 1e-12);
    assert!(s.windows(2).all(|w| (w[1] / w[0] - 4f64.powf(0.25)).abs() < 1e-12));
}

#[test]
fn fit_recovers_exact_halving() {
    // N(λ) = λ/2 and M(μ) = ⌊μ⌋: the lower bound needs s ≤ 1/2, the upper
    // bound holds at s = 1 with C₂ = 1/2
    let sweep = scale_sweep();
    let lambdas: Vec<f64> = (1..=10).map(|i| 10.0 * i as f64).collect();
    let n: Vec<usize> = lambdas.iter().map(|l| (l / 2.0) as usize).collect();
    let m: Vec<Vec<usize>> = lambdas.iter().map(|l| sweep.iter().map(|s| (s * l).floor() as usize).collect()).collect();
    let fit = fit_constants(&n, &m, &sweep);
    assert!((fit.c1.unwrap() - 2.0).abs() < 1e-12);
    assert!((fit.c3.unwrap() - 1.0).abs() < 1e-12);
    assert!((fit.c2.unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn fit_without_rows_is_empty() {
    let fit = fit_constants(&[], &[], &scale_sweep());
    assert!(fit.c1.is_none() && fit.c2.is_none() && fit.c3.is_none());
}

#[test]
fn fit_rejects_zero_counts_against_positive_n() {
    let sweep = [0.5, 1.0];
    let fit = fit_constants(&[3], &[vec![0, 0]], &sweep);
    assert!(fit.c2.is_none() && fit.c3.is_none());
    assert!((fit.c1.unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn log_grid_pins_endpoints() {
    let g = log_grid(10.0, 200.0, 24);
    assert_eq!(g.len(), 24);
    assert_eq!(g[0], 10.0);
    assert_eq!(g[23], 200.0);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #[test]
    fn fitted_constants_satisfy_the_sandwich(
        rows in proptest::collection::vec((1usize..200, 0.2f64..5.0), 1..12)
    ) {
        // M(μ) = ⌊μ⌋ and N(λ) = ⌊a λ⌋ on λ = row index + offset
        let sweep = scale_sweep();
        let lambdas: Vec<f64> = rows.iter().map(|r| r.0 as f64).collect();
        let a = rows[0].1;
        let n: Vec<usize> = lambdas.iter().map(|l| (a * l).floor() as usize).collect();
        let m: Vec<Vec<usize>> = lambdas.iter().map(|l| sweep.iter().map(|s| (s * l).floor() as usize).collect()).collect();
        let fit = fit_constants(&n, &m, &sweep);
        if let Some(c1) = fit.c1 {
            let j = sweep.iter().position(|s| (1.0 / s - c1).abs() < 1e-12).unwrap();
            prop_assert!(n.iter().zip(&m).all(|(ni, mi)| mi[j] <= *ni));
        }
        if let (Some(c2), Some(c3)) = (fit.c2, fit.c3) {
            prop_assert!(c3 >= 1.0 - 1e-12);
            let j = sweep.iter().position(|s| (1.0 / s - c3).abs() < 1e-12).unwrap();
            prop_assert!(n.iter().zip(&m).all(|(ni, mi)| *ni as f64 <= c2 * mi[j] as f64 + 1e-9));
        }
    }
}

#[test]
fn empty_sandwich_writes_header_only() {
    let mut cfg = constant_config();
    cfg.spectral.lambda_points = 0;
    let setup = cfg.setup(Execution::Sequential).unwrap();
    let out = run_sandwich(&setup, &cfg).unwrap();
    assert!(out.rows.is_empty());
    let dir = tempfile::tempdir().unwrap();
    emit_report(&out.report, dir.path(), false).unwrap();
    let text = std::fs::read_to_string(dir.path().join("sandwich.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("lambda,N,M"));
}

#[test]
fn constant_potential_m_is_root_c() {
    let cfg = constant_config();
    let setup = cfg.setup(Execution::default()).unwrap();
    let report = run_aux_m(&setup, &cfg).unwrap();
    assert!(report.passed(), "{:?}", report.failures());
    let m0: f64 = report.value("m_origin").unwrap().parse().unwrap();
    assert!((m0 - 2.0).abs() <= 2.0 * setup.aux.tolerance());
}

#[test]
fn constant_potential_gives_uniform_cubes() {
    let cfg = constant_config();
    let setup = cfg.setup(Execution::default()).unwrap();
    let report = run_decompose(&setup, &cfg).unwrap();
    assert!(report.passed(), "{:?}", report.failures());
    let sides = report.table("decomposition").unwrap().numbers("d").unwrap();
    // c = 4: 2^⌊log₂ 1/2⌋ = 1/2
    assert!(!sides.is_empty() && sides.iter().all(|d| *d == 0.5));
}

#[test]
fn constant_potential_fp_ratio_at_most_one() {
    let cfg = constant_config();
    let setup = cfg.setup(Execution::default()).unwrap();
    let (report, summary) = run_fp(&setup, &cfg).unwrap();
    assert!(report.passed(), "{:?}", report.failures());
    assert!(summary.sup <= 1.0 + 1e-9 && summary.sup_doubled <= 1.0 + 1e-9);
}

#[test]
fn reports_are_byte_identical_across_runs_and_modes() {
    let cfg = constant_config();
    let mut outputs = Vec::new();
    for exec in [Execution::Sequential, Execution::Parallel, Execution::Parallel] {
        let setup = cfg.setup(exec).unwrap();
        let dir = tempfile::tempdir().unwrap();
        for kind in [ExperimentKind::AuxM, ExperimentKind::Decompose] {
            emit_report(&run_experiment(kind, &setup, &cfg).unwrap(), dir.path(), true).unwrap();
        }
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        outputs.push(files);
    }
    assert!(outputs[0].iter().any(|(n, _)| n == "aux_m.csv"));
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = constant_config();
    let text = cfg.to_toml_string().unwrap();
    assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
}

#[test]
fn unknown_config_keys_are_rejected() {
    assert!(ExperimentConfig::from_toml_str("colour = 3").is_err());
    assert!(ExperimentConfig::from_toml_str("[spectral]\nlambda_max = -1.0").is_err());
}
