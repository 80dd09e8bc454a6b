//! Fast invariant suite behind `hbdris selftest`.

use std::f64::consts::PI;
use std::fmt;

use hbdris_core::architecture::{preset, Design, Preset};
use hbdris_core::asymptotics::{empirical_per_group_gain, kappa};
use hbdris_core::channel::{
    complex_gaussian, group_statistics, run_rng, sample_channels, ChannelRealization,
};
use hbdris_core::optimizer::{
    design_with, evaluate_snr, reflect_power_unchecked, DesignOptions, EtaSearch,
};
use hbdris_core::oracle::brute_force_beta;
use hbdris_core::takagi::{
    build_coupling_matrix, optimal_group_block, random_unitary_symmetric, takagi_factorize,
    ComplexSymmetricMatrix,
};
use hbdris_core::{CMat, CVec, PowerBudget, ScenarioConfig, C64};

/// Deliberate faults that the suite must detect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Injection {
    /// Scale every closed-form amplitude by 1.01.
    BetaPlusOnePercent,
    /// Break the symmetry of one Θ block.
    AsymmetricTheta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub result: Result<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<CheckOutcome>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.result.is_ok())
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            match &c.result {
                Ok(detail) => writeln!(f, "PASS {:<22} {detail}", c.name)?,
                Err(detail) => writeln!(f, "FAIL {:<22} {detail}", c.name)?,
            }
        }
        let failed = self.checks.iter().filter(|c| c.result.is_err()).count();
        write!(f, "{} checks, {failed} failed", self.checks.len())
    }
}

const SEED: u64 = 0x5e1f;

fn scenario() -> (ScenarioConfig, PowerBudget) {
    let cfg = ScenarioConfig::standard();
    let budget = cfg.power_budget();
    (cfg, budget)
}

fn unit_vector(n: usize, seed: u64, stream: u64) -> CVec {
    let mut rng = run_rng(seed, stream);
    CVec::from_fn(n, |_, _| complex_gaussian(&mut rng)).normalize()
}

fn takagi() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [1, 2, 4, 8] {
        for trial in 0..25u64 {
            let mut rng = run_rng(SEED, 1000 * n as u64 + trial);
            let g = CMat::from_fn(n, n, |_, _| complex_gaussian(&mut rng));
            let generic = (&g + g.transpose()) * C64::new(0.5, 0.0);
            let coupling = build_coupling_matrix(
                &unit_vector(n, SEED, 2 * trial),
                &unit_vector(n, SEED, 2 * trial + 1),
            )
            .map_err(|e| e.to_string())?
            .into_matrix();
            for a in [generic, coupling] {
                let t = takagi_factorize(
                    &ComplexSymmetricMatrix::new(a.clone()).map_err(|e| e.to_string())?,
                )
                .map_err(|e| format!("n={n}: {e}"))?;
                let rec = (t.reconstruct() - &a).norm() / a.norm().max(1.0);
                let uni = (t.q.adjoint() * &t.q - CMat::identity(n, n)).norm();
                worst = worst.max(rec).max(uni);
                count += 1;
            }
        }
    }
    if worst > 1e-10 {
        return Err(format!("worst residual {worst:.2e} > 1e-10"));
    }
    Ok(format!("{count} matrices, worst residual {worst:.1e}"))
}

fn optimal_block() -> Result<String, String> {
    let mut rng = run_rng(SEED, 7);
    for n in [1, 2, 4, 8] {
        let (r, t) = (
            unit_vector(n, SEED, 10 + n as u64),
            unit_vector(n, SEED, 20 + n as u64),
        );
        let theta = optimal_group_block(&r, &t).map_err(|e| e.to_string())?;
        let gain = (r.adjoint() * &theta * &t)[(0, 0)];
        if (gain - C64::new(1.0, 0.0)).norm() > 1e-9 {
            return Err(format!("n={n}: matched gain {gain}"));
        }
        for _ in 0..50 {
            let other = random_unitary_symmetric(n, &mut rng);
            let g = (r.adjoint() * &other * &t)[(0, 0)].norm();
            if g > 1.0 + 1e-9 {
                return Err(format!("n={n}: random block reaches {g}"));
            }
        }
    }
    Ok("bound attained and never exceeded".into())
}

/// Closed-form design without η or clamping, optionally perturbed.
fn raw_design(
    p: Preset,
    ch: &ChannelRealization,
    budget: &PowerBudget,
    injection: Option<Injection>,
) -> Result<Design, String> {
    let arch = preset(p, ch.m(), 0.5, 4).map_err(|e| e.to_string())?;
    let opts = DesignOptions {
        eta_search: EtaSearch::Off,
        ..DesignOptions::default()
    };
    let design = design_with(ch, &arch, budget, &opts).map_err(|e| e.to_string())?;
    if injection != Some(Injection::BetaPlusOnePercent) {
        return Ok(design);
    }
    let mut amplitudes = design.amplitudes.clone();
    for a in &mut amplitudes {
        for v in a.values_mut() {
            *v *= 1.01;
        }
    }
    Design::from_parts(
        design.arch,
        design.theta_blocks,
        amplitudes,
        design.eta,
        design.theta_source,
    )
    .map_err(|e| e.to_string())
}

fn beta_tightness(injection: Option<Injection>) -> Result<String, String> {
    let (cfg, budget) = scenario();
    let mut worst: f64 = 0.0;
    for run in 0..10 {
        for p in [
            Preset::ApBd,
            Preset::FcScBd,
            Preset::ScScBd,
            Preset::DiagFcActive,
        ] {
            let arch = preset(p, 16, 0.5, 4).map_err(|e| e.to_string())?;
            let ch =
                sample_channels(&cfg, &arch, &mut run_rng(SEED, run)).map_err(|e| e.to_string())?;
            let design = raw_design(p, &ch, &budget, injection)?;
            for (s, power) in reflect_power_unchecked(&design, &ch.h_t, &budget)
                .iter()
                .enumerate()
            {
                if let Some(power) = power {
                    worst = worst.max((power / budget.pr_max[s] - 1.0).abs());
                }
            }
        }
    }
    if worst > 1e-9 {
        return Err(format!(
            "reflect power deviates from its budget by {worst:.3e} (relative)"
        ));
    }
    Ok(format!("budget met with equality, worst {worst:.1e}"))
}

fn beta_grid_search() -> Result<String, String> {
    let (cfg, budget) = scenario();
    let arch = preset(Preset::FcScBd, 16, 0.5, 4).map_err(|e| e.to_string())?;
    for run in 0..5 {
        let ch =
            sample_channels(&cfg, &arch, &mut run_rng(SEED, run)).map_err(|e| e.to_string())?;
        let stats = group_statistics(&ch);
        let design = raw_design(Preset::FcScBd, &ch, &budget, None)?;
        for s in 0..2 {
            let closed = design.amplitudes[s].values();
            // Rescaled to unit order so a fixed grid step is meaningful.
            let top = closed.iter().cloned().fold(0.0, f64::max);
            let scaled = hbdris_core::optimizer::RsBudget {
                pr_max: budget.pr_max[s] / (top * top),
                ..budget.rs(s)
            };
            let grid = brute_force_beta(stats.rs(s), &arch.rs[s], scaled, 1e-3)
                .map_err(|e| e.to_string())?;
            for (c, g) in closed.iter().zip(&grid) {
                if (c / top - g).abs() > 1e-3 + 1e-12 {
                    return Err(format!(
                        "RS{}: closed form {} vs grid {}",
                        s + 1,
                        c / top,
                        g
                    ));
                }
            }
        }
    }
    Ok("closed forms within one grid step".into())
}

fn dual_path() -> Result<String, String> {
    let (cfg, budget) = scenario();
    let mut worst: f64 = 0.0;
    for run in 0..10 {
        for p in Preset::ALL {
            let arch = preset(p, 16, 0.5, 4).map_err(|e| e.to_string())?;
            let ch =
                sample_channels(&cfg, &arch, &mut run_rng(SEED, run)).map_err(|e| e.to_string())?;
            let design = design_with(&ch, &arch, &budget, &DesignOptions::default())
                .map_err(|e| e.to_string())?;
            let snr = evaluate_snr(&design, &ch, &budget).map_err(|e| format!("{p}: {e}"))?;
            let dense = (ch.h_r.adjoint() * design.phi.to_dense() * &ch.h_t)[(0, 0)];
            worst = worst.max((dense - snr.h_eq).norm() / snr.h_eq.norm());
        }
    }
    if worst > 1e-9 {
        return Err(format!("dense and block routes differ by {worst:.2e}"));
    }
    Ok(format!(
        "scalar, block and dense routes agree, worst {worst:.1e}"
    ))
}

fn diagonal_recovery() -> Result<String, String> {
    let (cfg, budget) = scenario();
    let pairs = [
        (Preset::PassiveBd, Preset::DiagPassive),
        (Preset::ApBd, Preset::DiagHybridAp),
        (Preset::ScScBd, Preset::DiagScSc),
    ];
    for run in 0..10 {
        for (bd, diag) in pairs {
            let a = preset(bd, 16, 0.5, 1).map_err(|e| e.to_string())?;
            let b = preset(diag, 16, 0.5, 4).map_err(|e| e.to_string())?;
            if a != b {
                return Err(format!("{bd} at M_G=1 differs structurally from {diag}"));
            }
            let ch =
                sample_channels(&cfg, &a, &mut run_rng(SEED, run)).map_err(|e| e.to_string())?;
            let design = design_with(&ch, &a, &budget, &DesignOptions::default())
                .map_err(|e| e.to_string())?;
            // Diagonal optimum: every element adds |h_R,i|·|h_T,i| in phase.
            for (s, blocks) in design.theta_blocks.iter().enumerate() {
                for (g, theta) in blocks.iter().enumerate() {
                    let i = ch.layout.group_range(s, g).start;
                    let term = ch.h_r[i].conj() * theta[(0, 0)] * ch.h_t[i];
                    let expect = ch.h_r[i].norm() * ch.h_t[i].norm();
                    if (theta[(0, 0)].norm() - 1.0).abs() > 1e-12
                        || (term - C64::new(expect, 0.0)).norm() > 1e-9 * expect
                    {
                        return Err(format!("{diag}: element {i} is not phase-aligned"));
                    }
                }
            }
        }
    }
    Ok("M_G = 1 presets reduce to phase alignment".into())
}

fn kappa_values() -> Result<String, String> {
    let k1 = kappa(1).map_err(|e| e.to_string())?;
    if k1 != PI / 4.0 {
        return Err(format!("κ(1) = {k1}"));
    }
    for m_g in [1, 4] {
        let est = empirical_per_group_gain(m_g, 20_000, &mut run_rng(SEED, 40 + m_g as u64))
            .map_err(|e| e.to_string())?;
        let k = kappa(m_g).map_err(|e| e.to_string())?;
        if (est / k - 1.0).abs() > 0.02 {
            return Err(format!("m_g={m_g}: Monte-Carlo {est} vs κ {k}"));
        }
    }
    Ok("κ(1) = π/4, Monte-Carlo within 2%".into())
}

fn design_invariants(injection: Option<Injection>) -> Result<String, String> {
    let (cfg, budget) = scenario();
    for run in 0..5 {
        for p in Preset::ALL {
            let arch = preset(p, 16, 0.5, 4).map_err(|e| e.to_string())?;
            let ch =
                sample_channels(&cfg, &arch, &mut run_rng(SEED, run)).map_err(|e| e.to_string())?;
            let mut design = design_with(&ch, &arch, &budget, &DesignOptions::default())
                .map_err(|e| e.to_string())?;
            if injection == Some(Injection::AsymmetricTheta) {
                let mut blocks = design.theta_blocks.clone();
                if let Some(theta) = blocks.iter_mut().flatten().find(|b| b.nrows() > 1) {
                    theta[(0, 1)] += C64::new(1e-3, 0.0);
                }
                design = Design::from_parts(
                    design.arch,
                    blocks,
                    design.amplitudes,
                    design.eta,
                    design.theta_source,
                )
                .map_err(|e| e.to_string())?;
            }
            design
                .check_invariants(budget.beta_max)
                .map_err(|e| format!("{p}: {e}"))?;
        }
    }
    Ok("Θ unitary symmetric, amplitudes in range".into())
}

pub fn run_selftest(injection: Option<Injection>) -> Report {
    let checks = vec![
        CheckOutcome {
            name: "takagi",
            result: takagi(),
        },
        CheckOutcome {
            name: "optimal_block",
            result: optimal_block(),
        },
        CheckOutcome {
            name: "beta_tightness",
            result: beta_tightness(injection),
        },
        CheckOutcome {
            name: "beta_grid_search",
            result: beta_grid_search(),
        },
        CheckOutcome {
            name: "dual_path_snr",
            result: dual_path(),
        },
        CheckOutcome {
            name: "diagonal_recovery",
            result: diagonal_recovery(),
        },
        CheckOutcome {
            name: "kappa",
            result: kappa_values(),
        },
        CheckOutcome {
            name: "design_invariants",
            result: design_invariants(injection),
        },
    ];
    Report { checks }
}
