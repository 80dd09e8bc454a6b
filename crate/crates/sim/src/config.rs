//! JSON run configurations. Unknown keys are rejected at every level.

use std::collections::HashSet;
use std::str::FromStr;

use hbdris_core::architecture::{preset, ActivityMode, ArchitectureSpec, Preset, RsSpec};
use hbdris_core::channel::dbm_to_w;
use hbdris_core::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::{Result, SimError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub surface: Surface,
    pub architectures: Vec<ArchEntry>,
    #[serde(default)]
    pub metric: Metric,
    pub sweep: Sweep,
    /// When set, every series reports its mean-SNR gain in dB over this
    /// architecture instead of the metric itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<ArchEntry>,
}

/// Surface size `m`, active fraction `a = M₁/M` and group size `m_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Surface {
    pub m: usize,
    pub a: f64,
    pub m_g: usize,
}

impl Default for Surface {
    fn default() -> Self {
        Self {
            m: 64,
            a: 0.5,
            m_g: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Metric {
    /// Receive SNR, averaged linearly and reported in dB.
    #[default]
    SnrDb,
    /// `log2(1 + γ)` in b/s/Hz.
    Rate,
    /// Single-antenna MAC sum rate in b/s/Hz; one entry per user.
    SumRate { user_powers_dbm: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    M,
    A,
    MG,
    PrMaxDbm,
    PtDbm,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::M => "m",
            SweepVariable::A => "a",
            SweepVariable::MG => "m_g",
            SweepVariable::PrMaxDbm => "pr_max_dbm",
            SweepVariable::PtDbm => "pt_dbm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

/// `"full"`: one group per subsurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FullKeyword {
    #[serde(rename = "full")]
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupSize {
    Fixed(usize),
    Full(FullKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phases {
    /// Designed blocks.
    #[default]
    Optimized,
    /// Random unitary symmetric blocks with closed-form amplitudes at η = 1.
    Random,
}

/// One architecture of a run: a preset name, a preset with options, or an
/// explicit pair of subsurfaces (which ignores the surface sweep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ArchEntry {
    Name(String),
    Preset(PresetEntry),
    Custom(CustomEntry),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresetEntry {
    pub preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_g: Option<GroupSize>,
    #[serde(default)]
    pub phases: Phases,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomEntry {
    pub label: String,
    pub rs: [RsSpec; 2],
    #[serde(default)]
    pub phases: Phases,
}

#[derive(Debug, Clone, PartialEq)]
enum ArchKind {
    Preset {
        preset: Preset,
        m_g: Option<GroupSize>,
    },
    Custom(ArchitectureSpec),
}

/// A resolved [`ArchEntry`].
#[derive(Debug, Clone, PartialEq)]
pub struct ArchPlan {
    pub label: String,
    pub phases: Phases,
    kind: ArchKind,
}

impl ArchPlan {
    pub fn preset(preset: Preset) -> Self {
        Self {
            label: preset.name().to_string(),
            phases: Phases::Optimized,
            kind: ArchKind::Preset { preset, m_g: None },
        }
    }

    /// The architecture at one sweep point.
    pub fn build(&self, surface: &Surface) -> Result<ArchitectureSpec> {
        match &self.kind {
            ArchKind::Custom(spec) => {
                if spec.m() != surface.m {
                    return Err(SimError::Config(format!(
                        "{}: fixed architecture has M={}, sweep point has M={}",
                        self.label,
                        spec.m(),
                        surface.m
                    )));
                }
                Ok(spec.clone())
            }
            ArchKind::Preset { preset: p, m_g } => match m_g {
                Some(GroupSize::Full(_)) => {
                    let base = preset(*p, surface.m, surface.a, 1)?;
                    let spec =
                        ArchitectureSpec::new(full_groups(&base.rs[0]), full_groups(&base.rs[1]));
                    spec.ensure_valid()?;
                    Ok(spec)
                }
                Some(GroupSize::Fixed(g)) => Ok(preset(*p, surface.m, surface.a, *g)?),
                None => Ok(preset(*p, surface.m, surface.a, surface.m_g)?),
            },
        }
    }
}

/// The same subsurface with a single group spanning it.
fn full_groups(rs: &RsSpec) -> RsSpec {
    let m_g = rs.m_s.max(1);
    let mut out = RsSpec {
        m_s: rs.m_s,
        m_g,
        mode: rs.mode,
        clusters: Vec::new(),
    };
    if rs.mode == ActivityMode::ScActive && rs.m_s > 0 {
        out.clusters = vec![1];
    }
    out
}

impl ArchEntry {
    pub fn resolve(&self) -> Result<ArchPlan> {
        let parse =
            |name: &str| Preset::from_str(name).map_err(|e| SimError::Config(e.to_string()));
        match self {
            ArchEntry::Name(name) => Ok(ArchPlan::preset(parse(name)?)),
            ArchEntry::Preset(e) => {
                let preset = parse(&e.preset)?;
                let label = e.label.clone().unwrap_or_else(|| {
                    let mut label = preset.name().to_string();
                    match e.m_g {
                        Some(GroupSize::Fixed(g)) => label.push_str(&format!("_MG{g}")),
                        Some(GroupSize::Full(_)) => label.push_str("_full"),
                        None => {}
                    }
                    if e.phases == Phases::Random {
                        label.push_str("_random");
                    }
                    label
                });
                Ok(ArchPlan {
                    label,
                    phases: e.phases,
                    kind: ArchKind::Preset { preset, m_g: e.m_g },
                })
            }
            ArchEntry::Custom(e) => {
                let spec = ArchitectureSpec::new(e.rs[0].clone(), e.rs[1].clone());
                spec.ensure_valid()?;
                Ok(ArchPlan {
                    label: e.label.clone(),
                    phases: e.phases,
                    kind: ArchKind::Custom(spec),
                })
            }
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("run configurations always serialize")
    }

    pub fn plans(&self) -> Result<Vec<ArchPlan>> {
        self.architectures.iter().map(ArchEntry::resolve).collect()
    }

    pub fn baseline_plan(&self) -> Result<Option<ArchPlan>> {
        self.baseline.as_ref().map(ArchEntry::resolve).transpose()
    }

    /// User powers in W for the sum-rate metric.
    pub fn user_powers_w(&self) -> Option<Vec<f64>> {
        match &self.metric {
            Metric::SumRate { user_powers_dbm } => {
                Some(user_powers_dbm.iter().map(|p| dbm_to_w(*p)).collect())
            }
            _ => None,
        }
    }

    /// Checks everything that does not depend on a sweep point.
    pub fn validate(&self) -> Result<()> {
        self.scenario
            .validate()
            .map_err(|e| SimError::Config(e.to_string()))?;
        if self.architectures.is_empty() {
            return Err(SimError::Config(
                "at least one architecture is required".into(),
            ));
        }
        let plans = self.plans()?;
        let mut seen = HashSet::new();
        for p in &plans {
            if p.label.is_empty() || p.label.contains([',', '"', '\n', '\r']) {
                return Err(SimError::Config(format!(
                    "label {:?} is not a valid CSV column name",
                    p.label
                )));
            }
            if !seen.insert(p.label.as_str()) {
                return Err(SimError::Config(format!(
                    "duplicate architecture label {}",
                    p.label
                )));
            }
        }
        self.baseline_plan()?;
        if self.baseline.is_some() && self.metric != Metric::SnrDb {
            return Err(SimError::Config(
                "a baseline requires the snr_db metric".into(),
            ));
        }
        if let Metric::SumRate { user_powers_dbm } = &self.metric {
            if user_powers_dbm.is_empty() || user_powers_dbm.iter().any(|p| !p.is_finite()) {
                return Err(SimError::Config(
                    "sum_rate needs at least one finite user power".into(),
                ));
            }
        }
        if self.sweep.values.is_empty() {
            return Err(SimError::Config("sweep has no values".into()));
        }
        for &v in &self.sweep.values {
            if !v.is_finite() {
                return Err(SimError::Config(format!("sweep value {v} is not finite")));
            }
            let integral = matches!(self.sweep.variable, SweepVariable::M | SweepVariable::MG);
            if integral && (v < 1.0 || v.fract() != 0.0) {
                return Err(SimError::Config(format!(
                    "{} must be a positive integer, got {v}",
                    self.sweep.variable.name()
                )));
            }
        }
        Ok(())
    }

    /// Scenario and surface at one sweep value.
    pub fn point(&self, value: f64) -> (ScenarioConfig, Surface) {
        let mut cfg = self.scenario.clone();
        let mut surface = self.surface;
        match self.sweep.variable {
            SweepVariable::M => surface.m = value as usize,
            SweepVariable::A => surface.a = value,
            SweepVariable::MG => surface.m_g = value as usize,
            SweepVariable::PrMaxDbm => cfg.pr_max_dbm = value,
            SweepVariable::PtDbm => cfg.pt_dbm = value,
        }
        (cfg, surface)
    }

    /// Applies `key=value`. `key` is a dotted path (`scenario.pt_dbm`) or a
    /// bare field name of `scenario`, `surface` or `sweep`; `runs` aliases
    /// `scenario.mc_runs`. `value` is parsed as JSON, falling back to a string.
    pub fn with_override(&self, assignment: &str) -> Result<Self> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| SimError::Config(format!("override {assignment:?} is not key=value")))?;
        let key = key.trim();
        let value: serde_json::Value = serde_json::from_str(raw.trim())
            .unwrap_or_else(|_| serde_json::Value::String(raw.trim().to_string()));
        let mut tree = serde_json::to_value(self)?;
        let path: Vec<String> = if key == "runs" {
            vec!["scenario".into(), "mc_runs".into()]
        } else if key.contains('.') {
            key.split('.').map(str::to_string).collect()
        } else {
            let section = ["scenario", "surface", "sweep"]
                .into_iter()
                .find(|s| tree[*s].get(key).is_some())
                .or_else(|| tree.get(key).map(|_| ""))
                .or_else(|| (key == "baseline" || key == "metric").then_some(""))
                .ok_or_else(|| SimError::Config(format!("unknown override key {key}")))?;
            if section.is_empty() {
                vec![key.to_string()]
            } else {
                vec![section.to_string(), key.to_string()]
            }
        };
        let mut node = &mut tree;
        for (i, part) in path.iter().enumerate() {
            let obj = node.as_object_mut().ok_or_else(|| {
                SimError::Config(format!("override path {key} does not name an object field"))
            })?;
            if i + 1 == path.len() {
                obj.insert(part.clone(), value.clone());
                break;
            }
            node = obj
                .get_mut(part)
                .ok_or_else(|| SimError::Config(format!("unknown override key {key}")))?;
        }
        let out: RunConfig = serde_json::from_value(tree)
            .map_err(|e| SimError::Config(format!("override {key}: {e}")))?;
        out.validate()?;
        Ok(out)
    }
}
