//! The six standard sweeps. All share the standard scenario with
//! `a = 0.5`, `M_G = 4` unless a sweep changes them.

use std::fmt;
use std::str::FromStr;

use hbdris_core::architecture::Preset;
use hbdris_core::ScenarioConfig;

use crate::config::{
    ArchEntry, FullKeyword, GroupSize, Metric, Phases, PresetEntry, RunConfig, Surface, Sweep,
    SweepVariable,
};
use crate::experiment::{run_scenario, ExperimentResult};
use crate::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// SNR vs. M for every preset.
    Fig2,
    /// SNR vs. active fraction at M = 64.
    Fig3,
    /// Two-user MAC sum rate vs. M.
    Fig4,
    /// A/P gain over its diagonal counterpart vs. M, per group size.
    Fig5,
    /// Rate vs. reflect-power budget at M = 64.
    Fig6,
    /// Rate vs. transmit power at M = 64.
    Fig7,
}

/// M grid of the sweeps over the surface size.
pub const M_GRID: [f64; 8] = [16.0, 32.0, 48.0, 64.0, 80.0, 96.0, 112.0, 128.0];

/// Architectures with at least one active subsurface.
pub const ACTIVE_PRESETS: [Preset; 6] = [
    Preset::ApBd,
    Preset::FcScBd,
    Preset::ScScBd,
    Preset::DiagHybridAp,
    Preset::DiagFcActive,
    Preset::DiagScSc,
];

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }

    pub fn config(self) -> RunConfig {
        let names = |ps: &[Preset]| {
            ps.iter()
                .map(|p| ArchEntry::Name(p.name().to_string()))
                .collect::<Vec<_>>()
        };
        let base = RunConfig {
            scenario: ScenarioConfig::standard(),
            surface: Surface::default(),
            architectures: Vec::new(),
            metric: Metric::SnrDb,
            sweep: Sweep {
                variable: SweepVariable::M,
                values: M_GRID.to_vec(),
            },
            baseline: None,
        };
        match self {
            Figure::Fig2 => RunConfig {
                architectures: names(&Preset::ALL),
                ..base
            },
            Figure::Fig3 => RunConfig {
                architectures: names(&Preset::ALL),
                sweep: Sweep {
                    variable: SweepVariable::A,
                    values: vec![0.25, 0.5, 0.75],
                },
                ..base
            },
            Figure::Fig4 => {
                let mut architectures = names(&[
                    Preset::ApBd,
                    Preset::FcScBd,
                    Preset::ScScBd,
                    Preset::DiagHybridAp,
                ]);
                architectures.push(ArchEntry::Preset(PresetEntry {
                    preset: Preset::DiagPassive.name().into(),
                    m_g: None,
                    phases: Phases::Random,
                    label: None,
                }));
                RunConfig {
                    architectures,
                    metric: Metric::SumRate {
                        user_powers_dbm: vec![20.0, 20.0],
                    },
                    ..base
                }
            }
            Figure::Fig5 => {
                let entry = |m_g| {
                    ArchEntry::Preset(PresetEntry {
                        preset: Preset::ApBd.name().into(),
                        m_g: Some(m_g),
                        phases: Phases::Optimized,
                        label: None,
                    })
                };
                RunConfig {
                    architectures: vec![
                        entry(GroupSize::Fixed(2)),
                        entry(GroupSize::Fixed(4)),
                        entry(GroupSize::Fixed(8)),
                        entry(GroupSize::Full(FullKeyword::Full)),
                    ],
                    baseline: Some(ArchEntry::Name(Preset::DiagHybridAp.name().into())),
                    ..base
                }
            }
            Figure::Fig6 => RunConfig {
                architectures: names(&ACTIVE_PRESETS),
                metric: Metric::Rate,
                sweep: Sweep {
                    variable: SweepVariable::PrMaxDbm,
                    values: (0..8).map(|k| -10.0 + 5.0 * k as f64).collect(),
                },
                ..base
            },
            Figure::Fig7 => RunConfig {
                architectures: names(&ACTIVE_PRESETS),
                metric: Metric::Rate,
                sweep: Sweep {
                    variable: SweepVariable::PtDbm,
                    values: (0..9).map(|k| -10.0 + 5.0 * k as f64).collect(),
                },
                ..base
            },
        }
    }

    /// The figure configuration with `key=value` overrides applied in order.
    pub fn config_with(self, overrides: &[String]) -> Result<RunConfig> {
        overrides
            .iter()
            .try_fold(self.config(), |cfg, o| cfg.with_override(o))
    }

    pub fn run(self, overrides: &[String]) -> Result<ExperimentResult> {
        run_scenario(&self.config_with(overrides)?)
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| SimError::Config(format!("unknown figure {s:?}; expected fig2..fig7")))
    }
}
