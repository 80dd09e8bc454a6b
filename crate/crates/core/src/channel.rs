//! Scenario geometry, path loss, Rayleigh fading and per-group channel views.
//!
//! Everything in here works in linear SI units. dB/dBm values only appear in
//! [`ScenarioConfig`] and are converted on access.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::architecture::ArchitectureSpec;
use crate::error::invalid;
use crate::optimizer::PowerBudget;
use crate::{CVec, Result, C64};

/// Physical constants and Monte-Carlo settings of a link-level scenario.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub rx_position: [f64; 3],
    pub ris_position: [f64; 3],
    pub tx_circle_center: [f64; 3],
    pub tx_circle_radius: f64,
    pub alpha: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub bandwidth_hz: f64,
    pub pt_dbm: f64,
    pub pr_max_dbm: f64,
    pub delta2_dbm: f64,
    /// Amplitude cap of every amplifier; `None` leaves amplitudes unbounded.
    pub beta_max: Option<f64>,
    pub mc_runs: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::standard()
    }
}

impl ScenarioConfig {
    /// Rx at (50,0,2) m, surface at (40,2,5) m, Tx on a 10 m disk around the
    /// origin at 2 m height, α = 3.75, −174 dBm/Hz over 2 MHz, 20 dBm
    /// transmit, 10 dBm reflect budget, −100 dBm amplifier noise.
    ///
    /// No amplitude cap is set: at this geometry the closed-form amplitudes
    /// are of order 10⁴ and any cap near unity dominates the design.
    pub fn standard() -> Self {
        Self {
            rx_position: [50.0, 0.0, 2.0],
            ris_position: [40.0, 2.0, 5.0],
            tx_circle_center: [0.0, 0.0, 2.0],
            tx_circle_radius: 10.0,
            alpha: 3.75,
            noise_psd_dbm_per_hz: -174.0,
            bandwidth_hz: 2e6,
            pt_dbm: 20.0,
            pr_max_dbm: 10.0,
            delta2_dbm: -100.0,
            beta_max: None,
            mc_runs: 1000,
            seed: 0x5eed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self
            .rx_position
            .iter()
            .chain(&self.ris_position)
            .chain(&self.tx_circle_center)
            .chain(&[
                self.tx_circle_radius,
                self.alpha,
                self.noise_psd_dbm_per_hz,
                self.bandwidth_hz,
                self.pt_dbm,
                self.pr_max_dbm,
                self.delta2_dbm,
            ])
            .all(|x| x.is_finite());
        if !finite {
            return Err(invalid!("scenario contains non-finite values"));
        }
        if self.alpha <= 0.0 {
            return Err(invalid!("alpha must be positive, got {}", self.alpha));
        }
        if self.bandwidth_hz <= 0.0 {
            return Err(invalid!(
                "bandwidth_hz must be positive, got {}",
                self.bandwidth_hz
            ));
        }
        if self.tx_circle_radius < 0.0 {
            return Err(invalid!("tx_circle_radius must be non-negative"));
        }
        if self.mc_runs == 0 {
            return Err(invalid!("mc_runs must be at least 1"));
        }
        if let Some(b) = self.beta_max {
            if !(b > 0.0) {
                return Err(invalid!("beta_max must be positive, got {b}"));
            }
        }
        if distance(self.rx_position, self.ris_position) <= 0.0 {
            return Err(invalid!("receiver and surface coincide"));
        }
        Ok(())
    }

    /// Thermal noise power σ² in W.
    pub fn noise_power_w(&self) -> f64 {
        dbm_to_w(self.noise_psd_dbm_per_hz + 10.0 * libm::log10(self.bandwidth_hz))
    }

    pub fn power_budget(&self) -> PowerBudget {
        let pr = dbm_to_w(self.pr_max_dbm);
        let d2 = dbm_to_w(self.delta2_dbm);
        PowerBudget {
            pt: dbm_to_w(self.pt_dbm),
            pr_max: [pr, pr],
            delta2: [d2, d2],
            sigma2: self.noise_power_w(),
            beta_max: self.beta_max,
        }
    }
}

pub fn dbm_to_w(dbm: f64) -> f64 {
    libm::pow(10.0, (dbm - 30.0) / 10.0)
}

pub fn w_to_dbm(w: f64) -> f64 {
    10.0 * libm::log10(w) + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    libm::pow(10.0, db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * libm::log10(x)
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    libm::sqrt(a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// `−30 − 10·α·log10(d)` dB.
pub fn path_loss_db(d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(invalid!("distance must be positive and finite, got {d}"));
    }
    Ok(-30.0 - 10.0 * alpha * libm::log10(d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub tx_position: [f64; 3],
    pub d_tx_ris: f64,
    pub d_ris_rx: f64,
}

/// Draws the Tx uniformly over the horizontal disk around `tx_circle_center`.
pub fn sample_geometry<R: Rng + ?Sized>(cfg: &ScenarioConfig, rng: &mut R) -> Geometry {
    let r = cfg.tx_circle_radius * libm::sqrt(rng.random::<f64>());
    let phi = 2.0 * PI * rng.random::<f64>();
    let c = cfg.tx_circle_center;
    let tx = [c[0] + r * libm::cos(phi), c[1] + r * libm::sin(phi), c[2]];
    Geometry {
        tx_position: tx,
        d_tx_ris: distance(tx, cfg.ris_position),
        d_ris_rx: distance(cfg.ris_position, cfg.rx_position),
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * core::f64::consts::FRAC_1_SQRT_2
}

/// Generator behind every Monte-Carlo run.
pub type RunRng = ChaCha8Rng;

/// Independent generator for Monte-Carlo run `run` of a master `seed`.
pub fn run_rng(seed: u64, run: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Path-loss scaled Rayleigh vectors `(h_T, h_R)` of length `m`.
pub fn sample_fading<R: Rng + ?Sized>(
    m: usize,
    geometry: &Geometry,
    alpha: f64,
    rng: &mut R,
) -> Result<(CVec, CVec)> {
    let amp_t = libm::sqrt(db_to_linear(path_loss_db(geometry.d_tx_ris, alpha)?));
    let amp_r = libm::sqrt(db_to_linear(path_loss_db(geometry.d_ris_rx, alpha)?));
    let h_t = CVec::from_fn(m, |_, _| complex_gaussian(rng) * amp_t);
    let h_r = CVec::from_fn(m, |_, _| complex_gaussian(rng) * amp_r);
    Ok((h_t, h_r))
}

/// Draws geometry then fading for one Monte-Carlo run.
pub fn sample_channels<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    arch: &ArchitectureSpec,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let geometry = sample_geometry(cfg, rng);
    let (h_t, h_r) = sample_fading(arch.m(), &geometry, cfg.alpha, rng)?;
    ChannelRealization::new(h_t, h_r, arch)
}

/// Contiguous element ranges of every (RS, group) pair.
///
/// RS₁ occupies the leading `M₁` indices, groups are contiguous inside an RS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    rs: [RsLayout; 2],
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct RsLayout {
    offset: usize,
    m_s: usize,
    m_g: usize,
}

impl BlockLayout {
    pub fn new(arch: &ArchitectureSpec) -> Self {
        let [a, b] = &arch.rs;
        Self {
            rs: [
                RsLayout {
                    offset: 0,
                    m_s: a.m_s,
                    m_g: a.m_g.max(1),
                },
                RsLayout {
                    offset: a.m_s,
                    m_s: b.m_s,
                    m_g: b.m_g.max(1),
                },
            ],
        }
    }

    pub fn len(&self) -> usize {
        self.rs[1].offset + self.rs[1].m_s
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn groups(&self, s: usize) -> usize {
        self.rs[s].m_s / self.rs[s].m_g
    }

    pub fn group_size(&self, s: usize) -> usize {
        self.rs[s].m_g
    }

    pub fn rs_range(&self, s: usize) -> Range<usize> {
        let r = &self.rs[s];
        r.offset..r.offset + r.m_s
    }

    pub fn group_range(&self, s: usize, g: usize) -> Range<usize> {
        let r = &self.rs[s];
        let start = r.offset + g * r.m_g;
        start..start + r.m_g
    }

    /// All `(s, g, range)` triples in element order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Range<usize>)> + '_ {
        (0..2).flat_map(move |s| (0..self.groups(s)).map(move |g| (s, g, self.group_range(s, g))))
    }
}

/// Tx→surface and surface→Rx channels with their group partition.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_t: CVec,
    pub h_r: CVec,
    pub layout: BlockLayout,
}

impl ChannelRealization {
    pub fn new(h_t: CVec, h_r: CVec, arch: &ArchitectureSpec) -> Result<Self> {
        let layout = BlockLayout::new(arch);
        if h_t.len() != layout.len() || h_r.len() != layout.len() {
            return Err(invalid!(
                "channel lengths ({}, {}) do not match the {} surface elements",
                h_t.len(),
                h_r.len(),
                layout.len()
            ));
        }
        Ok(Self { h_t, h_r, layout })
    }

    pub fn m(&self) -> usize {
        self.layout.len()
    }

    pub fn tx_block(&self, s: usize, g: usize) -> CVec {
        let r = self.layout.group_range(s, g);
        self.h_t.rows(r.start, r.len()).into_owned()
    }

    pub fn rx_block(&self, s: usize, g: usize) -> CVec {
        let r = self.layout.group_range(s, g);
        self.h_r.rows(r.start, r.len()).into_owned()
    }
}

/// Norm products of one group: `a = ‖h_R‖‖h_T‖`, `b = ‖h_R‖²`, `c = ‖h_T‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroupStat {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GroupStat {
    pub fn from_norms(norm_r: f64, norm_t: f64) -> Self {
        Self {
            a: norm_r * norm_t,
            b: norm_r * norm_r,
            c: norm_t * norm_t,
        }
    }
}

/// [`GroupStat`] for every group, indexed `[s][g]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroupStatistics {
    pub per_rs: [Vec<GroupStat>; 2],
}

impl GroupStatistics {
    pub fn rs(&self, s: usize) -> &[GroupStat] {
        &self.per_rs[s]
    }
}

pub fn group_statistics(ch: &ChannelRealization) -> GroupStatistics {
    let mut out = GroupStatistics::default();
    for (s, _, range) in ch.layout.iter() {
        let nr = ch.h_r.rows(range.start, range.len()).norm();
        let nt = ch.h_t.rows(range.start, range.len()).norm();
        out.per_rs[s].push(GroupStat::from_norms(nr, nt));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::architecture::{preset, Preset};
    use alloc::vec;

    fn cfg_radius(r: f64) -> ScenarioConfig {
        ScenarioConfig {
            tx_circle_radius: r,
            ..ScenarioConfig::standard()
        }
    }

    #[test]
    fn path_loss_values() {
        assert_eq!(path_loss_db(1.0, 2.0).unwrap(), -30.0);
        assert!((path_loss_db(10.0, 3.75).unwrap() + 67.5).abs() < 1e-12);
        assert!((path_loss_db(50.0, 3.75).unwrap() + 93.712).abs() < 1e-3);
        assert!(path_loss_db(0.0, 3.75).is_err());
        assert!(path_loss_db(-1.0, 3.75).is_err());
    }

    #[test]
    fn path_loss_decreases_with_distance() {
        let mut prev = path_loss_db(0.5, 3.75).unwrap();
        for k in 1..200 {
            let next = path_loss_db(0.5 + k as f64 * 0.75, 3.75).unwrap();
            assert!(next < prev);
            prev = next;
        }
    }

    #[test]
    fn fixed_geometry_distances() {
        let g = sample_geometry(&cfg_radius(0.0), &mut run_rng(1, 0));
        assert_eq!(g.tx_position, [0.0, 0.0, 2.0]);
        assert!((g.d_ris_rx - 113f64.sqrt()).abs() < 1e-12);
        assert!((g.d_tx_ris - 1613f64.sqrt()).abs() < 1e-12);
        assert!((g.d_ris_rx - 10.630).abs() < 1e-3);
        assert!((g.d_tx_ris - 40.162).abs() < 1e-3);
    }

    #[test]
    fn disk_sampling_mean_radius() {
        let cfg = cfg_radius(10.0);
        let mut rng = run_rng(7, 0);
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|_| {
                let p = sample_geometry(&cfg, &mut rng).tx_position;
                libm::sqrt(p[0] * p[0] + p[1] * p[1])
            })
            .sum::<f64>()
            / n as f64;
        assert!(
            (mean / (20.0 / 3.0) - 1.0).abs() < 0.02,
            "mean radius {mean}"
        );
    }

    #[test]
    fn noise_power_conversion() {
        let cfg = ScenarioConfig::standard();
        let expected = libm::pow(10.0, (-174.0 + 10.0 * libm::log10(2e6) - 30.0) / 10.0);
        assert!((cfg.noise_power_w() / expected - 1.0).abs() < 1e-12);
        let b = cfg.power_budget();
        assert!((b.pt - 0.1).abs() < 1e-15);
        assert!((b.pr_max[0] - 0.01).abs() < 1e-15);
        assert!((b.delta2[1] - 1e-13).abs() < 1e-25);
    }

    #[test]
    fn config_validation() {
        assert!(ScenarioConfig::standard().validate().is_ok());
        let bad = [
            ScenarioConfig {
                alpha: 0.0,
                ..ScenarioConfig::standard()
            },
            ScenarioConfig {
                bandwidth_hz: -1.0,
                ..ScenarioConfig::standard()
            },
            ScenarioConfig {
                mc_runs: 0,
                ..ScenarioConfig::standard()
            },
            ScenarioConfig {
                beta_max: Some(0.0),
                ..ScenarioConfig::standard()
            },
            ScenarioConfig {
                pt_dbm: f64::NAN,
                ..ScenarioConfig::standard()
            },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn realizations_are_reproducible() {
        let cfg = ScenarioConfig::standard();
        let arch = preset(Preset::ScScBd, 16, 0.5, 4).unwrap();
        let a = sample_channels(&cfg, &arch, &mut run_rng(42, 3)).unwrap();
        let b = sample_channels(&cfg, &arch, &mut run_rng(42, 3)).unwrap();
        assert_eq!(a, b);
        let c = sample_channels(&cfg, &arch, &mut run_rng(42, 4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn element_power_matches_path_loss() {
        let cfg = cfg_radius(0.0);
        let arch = preset(Preset::PassiveBd, 4, 0.5, 2).unwrap();
        let pl_t = db_to_linear(path_loss_db(1613f64.sqrt(), 3.75).unwrap());
        let pl_r = db_to_linear(path_loss_db(113f64.sqrt(), 3.75).unwrap());
        let n = 10_000;
        let (mut first_t, mut norm_t, mut norm_r) = (0.0, 0.0, 0.0);
        for run in 0..n {
            let ch = sample_channels(&cfg, &arch, &mut run_rng(99, run)).unwrap();
            first_t += ch.h_t[0].norm_sqr();
            norm_t += ch.h_t.norm_squared();
            norm_r += ch.h_r.norm_squared();
        }
        let n = n as f64;
        assert!((first_t / n / pl_t - 1.0).abs() < 0.03);
        assert!((norm_t / n / (4.0 * pl_t) - 1.0).abs() < 0.03);
        assert!((norm_r / n / (4.0 * pl_r) - 1.0).abs() < 0.03);
    }

    #[test]
    fn layout_partitions_the_surface() {
        let arch = preset(Preset::FcScBd, 24, 0.25, 2).unwrap();
        let layout = BlockLayout::new(&arch);
        let ranges: Vec<_> = layout.iter().map(|(_, _, r)| r).collect();
        assert_eq!(ranges.iter().map(|r| r.len()).sum::<usize>(), 24);
        for w in ranges.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        assert_eq!(ranges[0].start, 0);
        assert_eq!(layout.rs_range(0), 0..6);
        assert_eq!(layout.rs_range(1), 6..24);
    }

    #[test]
    fn group_statistics_examples() {
        let arch = preset(Preset::PassiveBd, 8, 0.5, 4).unwrap();
        let c = |re: f64, im: f64| C64::new(re, im);
        let s2 = 2f64.sqrt();
        let mut h_t = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        h_t.extend([
            c(3.0 / 5.0 * s2, 0.0),
            c(0.0, 4.0 / 5.0 * s2),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]);
        let mut h_r = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        h_r.extend([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let ch = ChannelRealization::new(CVec::from_vec(h_t), CVec::from_vec(h_r), &arch).unwrap();
        let st = group_statistics(&ch);
        assert_eq!(
            st.rs(0)[0],
            GroupStat {
                a: 1.0,
                b: 1.0,
                c: 1.0
            }
        );
        let g = st.rs(1)[0];
        assert!((g.c - 2.0).abs() < 1e-14 && (g.b - 1.0).abs() < 1e-14 && (g.a - s2).abs() < 1e-14);

        let zero = ChannelRealization::new(CVec::zeros(8), CVec::zeros(8), &arch).unwrap();
        let st = group_statistics(&zero);
        assert!(st
            .per_rs
            .iter()
            .flatten()
            .all(|g| *g == GroupStat::default()));
    }

    #[test]
    fn norm_identity_holds() {
        let cfg = ScenarioConfig::standard();
        let arch = preset(Preset::ApBd, 32, 0.5, 4).unwrap();
        let ch = sample_channels(&cfg, &arch, &mut run_rng(5, 0)).unwrap();
        for g in group_statistics(&ch).per_rs.iter().flatten() {
            assert!((g.a * g.a - g.b * g.c).abs() <= 1e-12 * g.b * g.c);
        }
    }

    #[test]
    fn mismatched_lengths_rejected() {
        let arch = preset(Preset::PassiveBd, 8, 0.5, 4).unwrap();
        assert!(ChannelRealization::new(CVec::zeros(7), CVec::zeros(8), &arch).is_err());
    }
}
