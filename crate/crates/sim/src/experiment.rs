//! Monte-Carlo sweeps. Run `r` of every sweep point and architecture draws
//! from `run_rng(seed, r)`, so all architectures and sweep points see common
//! random numbers and results do not depend on the thread count.

use std::time::Instant;

use hbdris_core::architecture::{ArchitectureSpec, Design, ThetaSource};
use hbdris_core::channel::{
    group_statistics, linear_to_db, run_rng, sample_channels, BlockLayout, RunRng,
};
use hbdris_core::multiuser::{design_mac, mac_statistics, sample_mac, sum_rate};
use hbdris_core::optimizer::{
    design_from_parts, design_with, evaluate_snr, DesignOptions, EtaSearch,
};
use hbdris_core::takagi::random_unitary_symmetric;
use hbdris_core::{CMat, PowerBudget, ScenarioConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ArchPlan, Metric, Phases, RunConfig, Surface};
use crate::output::round_sig;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    Db,
    BpsPerHz,
}

/// Reported statistics of one architecture across the sweep. `mean` and
/// `stderr` are rounded to six significant digits, the precision of every
/// emitted file; `raw_mean` keeps the unrounded mean in the averaging domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub label: String,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub raw_mean: Vec<f64>,
    pub runs: Vec<usize>,
    pub errors: Vec<Option<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: u64,
    pub mc_runs: usize,
    /// SHA-256 of the effective configuration as compact JSON.
    pub config_hash: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub sweep_variable: String,
    pub sweep: Vec<f64>,
    pub unit: Unit,
    pub series: Vec<Series>,
    pub metadata: Metadata,
}

impl ExperimentResult {
    pub fn series(&self, label: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.label == label)
    }

    /// Index of a sweep value.
    pub fn index_of(&self, value: f64) -> Option<usize> {
        self.sweep.iter().position(|v| *v == value)
    }

    /// Reported mean of `label` at sweep value `value`.
    pub fn at(&self, label: &str, value: f64) -> Option<f64> {
        Some(self.series(label)?.mean[self.index_of(value)?])
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let json = serde_json::to_string(cfg).expect("run configurations always serialize");
    Sha256::digest(json.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Per-run metric of one architecture: linear γ for SNR, b/s/Hz otherwise.
pub fn evaluate_run(
    arch: &ArchitectureSpec,
    phases: Phases,
    metric: &Metric,
    user_powers_w: Option<&[f64]>,
    cfg: &ScenarioConfig,
    run: u64,
) -> hbdris_core::Result<f64> {
    let budget = cfg.power_budget();
    let mut rng = run_rng(cfg.seed, run);
    match metric {
        Metric::SnrDb | Metric::Rate => {
            let ch = sample_channels(cfg, arch, &mut rng)?;
            let design = match phases {
                Phases::Optimized => design_with(&ch, arch, &budget, &DesignOptions::default())?,
                Phases::Random => {
                    let blocks = random_blocks(arch, &mut rng);
                    random_design(arch, blocks, &group_statistics(&ch), &budget)?
                }
            };
            let snr = evaluate_snr(&design, &ch, &budget)?;
            Ok(if *metric == Metric::SnrDb {
                snr.gamma
            } else {
                snr.rate_bps_hz
            })
        }
        Metric::SumRate { .. } => {
            let powers = user_powers_w
                .expect("sum-rate metric carries user powers")
                .to_vec();
            let mac = sample_mac(cfg, arch.m(), powers, &mut rng)?;
            let design = match phases {
                Phases::Optimized => design_mac(&mac, arch, &budget, &DesignOptions::default())?,
                Phases::Random => {
                    let blocks = random_blocks(arch, &mut rng);
                    let stats = mac_statistics(&mac, &BlockLayout::new(arch), budget.pt);
                    random_design(arch, blocks, &stats, &budget)?
                }
            };
            sum_rate(&design, &mac, &budget)
        }
    }
}

fn random_blocks(arch: &ArchitectureSpec, rng: &mut RunRng) -> [Vec<CMat>; 2] {
    std::array::from_fn(|s| {
        (0..arch.rs[s].groups())
            .map(|_| random_unitary_symmetric(arch.rs[s].m_g, rng))
            .collect()
    })
}

fn random_design(
    arch: &ArchitectureSpec,
    blocks: [Vec<CMat>; 2],
    stats: &hbdris_core::GroupStatistics,
    budget: &PowerBudget,
) -> hbdris_core::Result<Design> {
    let opts = DesignOptions {
        eta_search: EtaSearch::Off,
        ..DesignOptions::default()
    };
    design_from_parts(arch, blocks, stats, budget, &opts, ThetaSource::External)
}

/// Mean and standard error (sample std / √n) of one sample set.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

const DB_PER_NEPER: f64 = 10.0 / std::f64::consts::LN_10;

/// Point statistics in the reporting domain: `(mean, stderr, raw_mean)`.
fn summarize(samples: &[f64], baseline: Option<&[f64]>, metric: &Metric) -> (f64, f64, f64) {
    let (mean, se) = mean_stderr(samples);
    match (baseline, metric) {
        (Some(base), _) => {
            // Delta method on log(mean_x) − log(mean_y) with the run-wise covariance.
            let (mb, _) = mean_stderr(base);
            let n = samples.len() as f64;
            let mut var = 0.0;
            if samples.len() > 1 {
                let cov = |u: &[f64], mu: f64, v: &[f64], mv: f64| {
                    u.iter()
                        .zip(v)
                        .map(|(a, b)| (a - mu) * (b - mv))
                        .sum::<f64>()
                        / (n - 1.0)
                };
                var = cov(samples, mean, samples, mean) / (mean * mean)
                    + cov(base, mb, base, mb) / (mb * mb)
                    - 2.0 * cov(samples, mean, base, mb) / (mean * mb);
            }
            let ratio = mean / mb;
            (
                linear_to_db(ratio),
                DB_PER_NEPER * (var.max(0.0) / n).sqrt(),
                ratio,
            )
        }
        (None, Metric::SnrDb) => (linear_to_db(mean), DB_PER_NEPER * se / mean, mean),
        (None, _) => (mean, se, mean),
    }
}

struct PointOutcome {
    per_arch: Vec<std::result::Result<(f64, f64, f64, usize), String>>,
}

fn run_point(
    cfg: &RunConfig,
    plans: &[ArchPlan],
    baseline: Option<&ArchPlan>,
    scenario: &ScenarioConfig,
    surface: &Surface,
) -> PointOutcome {
    let powers = cfg.user_powers_w();
    let build = |p: &ArchPlan| p.build(surface).map_err(|e| e.to_string());
    let archs: Vec<_> = plans.iter().map(build).collect();
    let base_arch = baseline.map(build);
    let runs = scenario.mc_runs;

    let collect =
        |arch: &ArchitectureSpec, phases: Phases| -> std::result::Result<Vec<f64>, String> {
            let values: Vec<hbdris_core::Result<f64>> = (0..runs as u64)
                .into_par_iter()
                .map(|r| evaluate_run(arch, phases, &cfg.metric, powers.as_deref(), scenario, r))
                .collect();
            values
                .into_iter()
                .enumerate()
                .map(|(r, v)| match v {
                    Ok(x) if x.is_finite() => Ok(x),
                    Ok(x) => Err(format!("run {r}: non-finite metric {x}")),
                    Err(e) => Err(format!("run {r}: {e}")),
                })
                .collect()
        };

    let base_samples = match (&base_arch, baseline) {
        (Some(Ok(arch)), Some(plan)) => {
            Some(collect(arch, plan.phases).map_err(|e| format!("baseline {e}")))
        }
        (Some(Err(e)), _) => Some(Err(format!("baseline: {e}"))),
        _ => None,
    };

    let per_arch = archs
        .iter()
        .zip(plans)
        .map(|(arch, plan)| {
            let arch = arch.as_ref().map_err(Clone::clone)?;
            let samples = collect(arch, plan.phases)?;
            let base = match &base_samples {
                Some(Ok(b)) => Some(b.as_slice()),
                Some(Err(e)) => return Err(e.clone()),
                None => None,
            };
            let (mean, se, raw) = summarize(&samples, base, &cfg.metric);
            Ok((mean, se, raw, samples.len()))
        })
        .collect();
    PointOutcome { per_arch }
}

/// Runs every sweep point and architecture of `cfg`. A failing point is
/// reported as NaN with its error message; the sweep continues.
pub fn run_scenario(cfg: &RunConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let started = Instant::now();
    let plans = cfg.plans()?;
    let baseline = cfg.baseline_plan()?;
    let mut series: Vec<Series> = plans
        .iter()
        .map(|p| Series {
            label: p.label.clone(),
            mean: Vec::new(),
            stderr: Vec::new(),
            raw_mean: Vec::new(),
            runs: Vec::new(),
            errors: Vec::new(),
        })
        .collect();
    for &value in &cfg.sweep.values {
        let (scenario, surface) = cfg.point(value);
        let outcome = run_point(cfg, &plans, baseline.as_ref(), &scenario, &surface);
        for (s, result) in series.iter_mut().zip(outcome.per_arch) {
            match result {
                Ok((mean, se, raw, n)) => {
                    s.mean.push(round_sig(mean));
                    s.stderr.push(round_sig(se));
                    s.raw_mean.push(raw);
                    s.runs.push(n);
                    s.errors.push(None);
                }
                Err(e) => {
                    s.mean.push(f64::NAN);
                    s.stderr.push(f64::NAN);
                    s.raw_mean.push(f64::NAN);
                    s.runs.push(0);
                    s.errors.push(Some(e));
                }
            }
        }
    }
    let unit = match (&cfg.metric, &baseline) {
        (Metric::SnrDb, _) | (_, Some(_)) => Unit::Db,
        _ => Unit::BpsPerHz,
    };
    Ok(ExperimentResult {
        sweep_variable: cfg.sweep.variable.name().to_string(),
        sweep: cfg.sweep.values.clone(),
        unit,
        series,
        metadata: Metadata {
            seed: cfg.scenario.seed,
            mc_runs: cfg.scenario.mc_runs,
            config_hash: config_hash(cfg),
            wall_time_s: started.elapsed().as_secs_f64(),
        },
    })
}
