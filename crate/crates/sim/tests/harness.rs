use hbdris_core::channel::linear_to_db;
use hbdris_sim::experiment::{ExperimentResult, Metadata, Series, Unit};
use hbdris_sim::figures::Figure;
use hbdris_sim::output::{csv_string, parse_csv, round_sig};
use hbdris_sim::{run_scenario, RunConfig};
use proptest::prelude::*;

fn config(text: &str) -> RunConfig {
    RunConfig::from_json(text).unwrap()
}

#[test]
fn single_run_is_reproducible() {
    let cfg = config(
        r#"{"scenario": {"mc_runs": 1, "seed": 11},
            "architectures": ["ApBd", "ScScBd", "DiagPassive"],
            "sweep": {"variable": "m", "values": [16, 32]}}"#,
    );
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a.series, b.series);
    assert_eq!(a.metadata.config_hash, b.metadata.config_hash);
    let other = run_scenario(&cfg.with_override("seed=12").unwrap()).unwrap();
    assert_ne!(a.series, other.series);
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = config(
        r#"{"scenario": {"mc_runs": 24},
            "architectures": ["FcScBd", {"preset": "DiagPassive", "phases": "random"}],
            "metric": {"sum_rate": {"user_powers_dbm": [20, 17]}},
            "sweep": {"variable": "m", "values": [16]}}"#,
    );
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_scenario(&cfg).unwrap())
    };
    assert_eq!(run_with(1).series, run_with(3).series);
}

#[test]
fn reflect_budget_sweep_is_monotone() {
    let mut cfg = Figure::Fig6.config();
    cfg.metric = hbdris_sim::Metric::SnrDb;
    let result = run_scenario(&cfg).unwrap();
    for s in &result.series {
        for w in s.raw_mean.windows(2) {
            assert!(
                w[1] >= w[0] * (1.0 - 1e-12),
                "{}: {:?}",
                s.label,
                s.raw_mean
            );
        }
    }
}

#[test]
fn fully_connected_passive_gain() {
    // a = 1 puts all 64 elements in one group.
    let cfg = config(
        r#"{"surface": {"m": 64, "a": 1.0, "m_g": 64},
            "architectures": ["PassiveBd", "DiagPassive"],
            "sweep": {"variable": "m", "values": [64]}}"#,
    );
    let result = run_scenario(&cfg).unwrap();
    let gap = result.at("PassiveBd", 64.0).unwrap() - result.at("DiagPassive", 64.0).unwrap();
    assert!((1.5..=2.5).contains(&gap), "gap {gap} dB");
}

#[test]
fn reported_db_is_the_log_of_the_linear_mean() {
    let cfg = config(
        r#"{"scenario": {"mc_runs": 50},
            "architectures": ["ApBd", "DiagScSc"],
            "sweep": {"variable": "pt_dbm", "values": [0, 20]}}"#,
    );
    let result = run_scenario(&cfg).unwrap();
    for s in &result.series {
        for (db, lin) in s.mean.iter().zip(&s.raw_mean) {
            assert_eq!(*db, round_sig(linear_to_db(*lin)));
        }
    }
}

#[test]
fn invalid_points_are_recorded_and_the_sweep_continues() {
    let cfg = config(
        r#"{"scenario": {"mc_runs": 3},
            "architectures": ["ApBd", "DiagPassive"],
            "sweep": {"variable": "m", "values": [16, 20, 24]}}"#,
    );
    let result = run_scenario(&cfg).unwrap();
    let ap = result.series("ApBd").unwrap();
    assert!(ap.mean[0].is_finite() && ap.mean[1].is_nan() && ap.mean[2].is_finite());
    assert!(ap.errors[1].as_deref().unwrap().contains("divisible"));
    assert_eq!(ap.runs, [3, 0, 3]);
    assert!(result
        .series("DiagPassive")
        .unwrap()
        .mean
        .iter()
        .all(|x| x.is_finite()));
    let table = parse_csv(&csv_string(&result).unwrap()).unwrap();
    assert!(table.matches(&result));
}

#[test]
fn emitted_csv_reproduces_a_real_run() {
    let result = Figure::Fig3.run(&["runs=20".into()]).unwrap();
    let text = csv_string(&result).unwrap();
    assert!(text.starts_with("sweep,PassiveBd_mean,PassiveBd_stderr,ApBd_mean,"));
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 4);
    assert!(parse_csv(&text).unwrap().matches(&result));
}

fn result_from(sweep: Vec<f64>, columns: Vec<(Vec<f64>, Vec<f64>)>) -> ExperimentResult {
    let series = columns
        .into_iter()
        .enumerate()
        .map(|(i, (mean, stderr))| Series {
            label: format!("arch{i}"),
            raw_mean: mean.clone(),
            runs: vec![1; mean.len()],
            errors: vec![None; mean.len()],
            mean: mean.into_iter().map(round_sig).collect(),
            stderr: stderr.into_iter().map(round_sig).collect(),
        })
        .collect();
    ExperimentResult {
        sweep_variable: "m".into(),
        sweep,
        unit: Unit::Db,
        series,
        metadata: Metadata {
            seed: 0,
            mc_runs: 1,
            config_hash: String::new(),
            wall_time_s: 0.0,
        },
    }
}

fn value() -> impl Strategy<Value = f64> {
    prop_oneof![
        8 => -1e6f64..1e6,
        2 => (-300i32..300, -9.99f64..9.99).prop_map(|(e, m)| m * 10f64.powi(e)),
        1 => Just(f64::NAN),
        1 => Just(0.0),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn csv_round_trip(
        rows in 1usize..10,
        cols in 1usize..5,
        seed in proptest::collection::vec(value(), 200),
    ) {
        let mut it = seed.into_iter().cycle();
        let sweep: Vec<f64> = (0..rows).map(|_| it.next().unwrap()).collect();
        let columns = (0..cols)
            .map(|_| ((0..rows).map(|_| it.next().unwrap()).collect(), (0..rows).map(|_| it.next().unwrap()).collect()))
            .collect();
        let result = result_from(sweep, columns);
        let table = parse_csv(&csv_string(&result).unwrap()).unwrap();
        prop_assert!(table.matches(&result));
    }
}
