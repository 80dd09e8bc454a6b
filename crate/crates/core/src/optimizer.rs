//! Single-pass design: per-group Takagi blocks, closed-form amplitudes under
//! the reflect-power budget, a global η scan per active subsurface, and SNR
//! evaluation along two independent routes.

use alloc::format;
use alloc::vec::Vec;

use crate::architecture::{
    group_scales, ActivityMode, Amplitudes, ArchitectureSpec, Design, RsSpec, ThetaSource,
};
use crate::channel::{
    group_statistics, BlockLayout, ChannelRealization, GroupStat, GroupStatistics,
};
use crate::error::invalid;
use crate::takagi::optimal_group_block;
use crate::{CMat, CVec, Error, Result, C64};

/// Relative tolerance of every cross-check between two evaluation routes.
pub const CONSISTENCY_TOL: f64 = 1e-9;

/// Number of uniform η points on `(0, 1]`.
pub const ETA_GRID_POINTS: usize = 200;

/// Powers in W, amplitudes dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub pt: f64,
    pub pr_max: [f64; 2],
    pub delta2: [f64; 2],
    pub sigma2: f64,
    pub beta_max: Option<f64>,
}

impl PowerBudget {
    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.pt,
            self.sigma2,
            self.pr_max[0],
            self.pr_max[1],
            self.delta2[0],
            self.delta2[1],
        ];
        if vals.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(invalid!(
                "power budget entries must be finite and non-negative: {self:?}"
            ));
        }
        if !(self.pt > 0.0) || !(self.sigma2 > 0.0) {
            return Err(invalid!("pt and sigma2 must be positive"));
        }
        if let Some(b) = self.beta_max {
            if !(b > 0.0) {
                return Err(invalid!("beta_max must be positive, got {b}"));
            }
        }
        Ok(())
    }

    pub fn rs(&self, s: usize) -> RsBudget {
        RsBudget {
            pt: self.pt,
            pr_max: self.pr_max[s],
            delta2: self.delta2[s],
        }
    }
}

/// The part of a [`PowerBudget`] that one subsurface sees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsBudget {
    pub pt: f64,
    pub pr_max: f64,
    pub delta2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrBreakdown {
    /// `h_Rᴴ·Φ·h_T`.
    pub h_eq: C64,
    /// `P_t·|h_eq|²` in W.
    pub signal_power: f64,
    /// Amplifier noise reaching the receiver in W.
    pub amp_noise: f64,
    pub gamma: f64,
    pub rate_bps_hz: f64,
}

impl SnrBreakdown {
    fn new(h_eq: C64, amp_noise: f64, budget: &PowerBudget) -> Self {
        let signal_power = budget.pt * h_eq.norm_sqr();
        let gamma = signal_power / (budget.sigma2 + amp_noise);
        Self {
            h_eq,
            signal_power,
            amp_noise,
            gamma,
            rate_bps_hz: libm::log2(1.0 + gamma),
        }
    }
}

/// Θ★ for every group, matched to the Rx channel and the Tx directions in
/// `tx` (any per-group scaling of `tx` is irrelevant). Groups where either
/// block vanishes get the identity.
pub fn solve_spatial_from(h_r: &CVec, tx: &CVec, layout: &BlockLayout) -> Result<[Vec<CMat>; 2]> {
    if h_r.len() != layout.len() || tx.len() != layout.len() {
        return Err(invalid!("channel length does not match the surface"));
    }
    let mut out: [Vec<CMat>; 2] = Default::default();
    for (s, _, range) in layout.iter() {
        let r = h_r.rows(range.start, range.len());
        let t = tx.rows(range.start, range.len());
        let (nr, nt) = (r.norm(), t.norm());
        let block = if nr == 0.0 || nt == 0.0 {
            CMat::identity(range.len(), range.len())
        } else {
            optimal_group_block(&(r / C64::new(nr, 0.0)), &(t / C64::new(nt, 0.0)))?
        };
        out[s].push(block);
    }
    Ok(out)
}

pub fn solve_spatial(ch: &ChannelRealization) -> Result<[Vec<CMat>; 2]> {
    solve_spatial_from(&ch.h_r, &ch.h_t, &ch.layout)
}

/// Cauchy–Schwarz maximizer of `Σ w_i·x_i` subject to `Σ d_i·x_i² ≤ p`.
/// Entries with zero weight get zero.
fn cauchy_schwarz(weights: &[f64], costs: &[f64], p: f64) -> Vec<f64> {
    let denom: f64 = weights
        .iter()
        .zip(costs)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, d)| w * w / d)
        .sum();
    if !(denom > 0.0) || !denom.is_finite() {
        return alloc::vec![0.0; weights.len()];
    }
    let scale = libm::sqrt(p / denom);
    weights
        .iter()
        .zip(costs)
        .map(|(w, d)| if *w > 0.0 { scale * w / d } else { 0.0 })
        .collect()
}

/// Unclamped per-group β of a fully-connected active subsurface.
pub fn fc_closed_form(stats: &[GroupStat], budget: RsBudget, m_g: usize) -> Vec<f64> {
    let mg = m_g as f64;
    let root = libm::sqrt(mg);
    let weights: Vec<f64> = stats.iter().map(|g| g.a / root).collect();
    let costs: Vec<f64> = stats
        .iter()
        .map(|g| (budget.pt * g.c + budget.delta2 * mg) / mg)
        .collect();
    cauchy_schwarz(&weights, &costs, budget.pr_max)
}

/// Unclamped per-cluster β̃ of a sub-connected active subsurface.
pub fn sc_closed_form(stats: &[GroupStat], rs: &RsSpec, budget: RsBudget) -> Vec<f64> {
    let mut weights = Vec::with_capacity(rs.clusters.len());
    let mut costs = Vec::with_capacity(rs.clusters.len());
    for (range, t) in rs.cluster_groups().into_iter().zip(rs.cluster_elements()) {
        let t = t as f64;
        let root = libm::sqrt(t);
        let a: f64 = stats[range.clone()].iter().map(|g| g.a).sum();
        let c: f64 = stats[range].iter().map(|g| g.c).sum();
        weights.push(a / root);
        costs.push((budget.pt * c + budget.delta2 * t) / t);
    }
    cauchy_schwarz(&weights, &costs, budget.pr_max)
}

fn clamp(values: &mut [f64], beta_max: Option<f64>) {
    if let Some(m) = beta_max {
        for v in values {
            *v = v.min(m);
        }
    }
}

/// Clamped β of a fully-connected subsurface.
pub fn solve_beta_fc(
    stats: &[GroupStat],
    budget: RsBudget,
    m_g: usize,
    beta_max: Option<f64>,
) -> Vec<f64> {
    let mut beta = fc_closed_form(stats, budget, m_g);
    clamp(&mut beta, beta_max);
    beta
}

/// Clamped β̃ of a sub-connected subsurface.
pub fn solve_beta_sc(
    stats: &[GroupStat],
    rs: &RsSpec,
    budget: RsBudget,
    beta_max: Option<f64>,
) -> Vec<f64> {
    let mut beta = sc_closed_form(stats, rs, budget);
    clamp(&mut beta, beta_max);
    beta
}

/// Closed-form amplitudes of one subsurface before η and clamping.
pub fn closed_form_amplitudes(stats: &[GroupStat], rs: &RsSpec, budget: RsBudget) -> Amplitudes {
    match rs.mode {
        ActivityMode::Passive => Amplitudes::Passive,
        ActivityMode::FcActive => Amplitudes::Fc(fc_closed_form(stats, budget, rs.m_g)),
        ActivityMode::ScActive => Amplitudes::Sc(sc_closed_form(stats, rs, budget)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaSearch {
    /// One η per active subsurface, scanned in subsurface order.
    #[default]
    PerRs,
    /// Both η scanned jointly on the product grid.
    Joint,
    /// η = 1.
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub eta_search: EtaSearch,
    pub eta_points: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        Self {
            eta_search: EtaSearch::PerRs,
            eta_points: ETA_GRID_POINTS,
        }
    }
}

/// Signal amplitude and amplifier noise contributed by one subsurface at η = 1,
/// assuming every group term is coherent.
#[derive(Debug, Clone, Copy, Default)]
struct RsContribution {
    signal: f64,
    noise: f64,
    active: bool,
}

fn rs_contribution(
    stats: &[GroupStat],
    rs: &RsSpec,
    amps: &Amplitudes,
    delta2: f64,
) -> Result<RsContribution> {
    let scales = group_scales(rs, amps)?;
    let signal = stats.iter().zip(&scales).map(|(g, k)| k * g.a).sum();
    let active = rs.mode != ActivityMode::Passive;
    let noise = if active {
        delta2
            * stats
                .iter()
                .zip(&scales)
                .map(|(g, k)| k * k * g.b)
                .sum::<f64>()
    } else {
        0.0
    };
    Ok(RsContribution {
        signal,
        noise,
        active,
    })
}

fn gamma_at(parts: &[RsContribution; 2], eta: [f64; 2], budget: &PowerBudget) -> f64 {
    let mut signal = 0.0;
    let mut noise = 0.0;
    for (p, e) in parts.iter().zip(eta) {
        let e = if p.active { e } else { 1.0 };
        signal += e * p.signal;
        noise += e * e * p.noise;
    }
    budget.pt * signal * signal / (budget.sigma2 + noise)
}

/// Grid `1, (n−1)/n, …, 1/n`; descending so ties keep the larger η.
fn eta_grid(points: usize) -> impl Iterator<Item = f64> + Clone {
    (1..=points).rev().map(move |k| k as f64 / points as f64)
}

fn argmax_1d(points: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    let mut best = (f64::NEG_INFINITY, 1.0);
    for eta in eta_grid(points) {
        let g = f(eta);
        if g > best.0 {
            best = (g, eta);
        }
    }
    best.1
}

fn search_eta(
    parts: &[RsContribution; 2],
    budget: &PowerBudget,
    opts: &DesignOptions,
) -> Result<[f64; 2]> {
    if opts.eta_points == 0 {
        return Err(invalid!("eta_points must be at least 1"));
    }
    let n = opts.eta_points;
    let mut eta = [1.0, 1.0];
    match opts.eta_search {
        EtaSearch::Off => {}
        EtaSearch::PerRs => {
            for s in 0..2 {
                if parts[s].active {
                    eta[s] = argmax_1d(n, |e| {
                        let mut trial = eta;
                        trial[s] = e;
                        gamma_at(parts, trial, budget)
                    });
                }
            }
        }
        EtaSearch::Joint => {
            let mut best = f64::NEG_INFINITY;
            let grid0: Vec<f64> = if parts[0].active {
                eta_grid(n).collect()
            } else {
                alloc::vec![1.0]
            };
            let grid1: Vec<f64> = if parts[1].active {
                eta_grid(n).collect()
            } else {
                alloc::vec![1.0]
            };
            for &e0 in &grid0 {
                for &e1 in &grid1 {
                    let g = gamma_at(parts, [e0, e1], budget);
                    if g > best {
                        best = g;
                        eta = [e0, e1];
                    }
                }
            }
        }
    }
    Ok(eta)
}

/// Amplitudes, η and assembly for given blocks and the statistics that
/// drive the amplitude rule. The amplitude rule assumes every group adds
/// coherently; with other blocks it stays feasible but is no longer optimal.
pub fn design_from_parts(
    arch: &ArchitectureSpec,
    theta_blocks: [Vec<CMat>; 2],
    stats: &GroupStatistics,
    budget: &PowerBudget,
    opts: &DesignOptions,
    source: ThetaSource,
) -> Result<Design> {
    for s in 0..2 {
        if stats.rs(s).len() != arch.rs[s].groups() {
            return Err(invalid!(
                "RS{}: {} group statistics for {} groups",
                s + 1,
                stats.rs(s).len(),
                arch.rs[s].groups()
            ));
        }
    }
    let mut amplitudes = [
        closed_form_amplitudes(stats.rs(0), &arch.rs[0], budget.rs(0)),
        closed_form_amplitudes(stats.rs(1), &arch.rs[1], budget.rs(1)),
    ];
    let parts = [
        rs_contribution(stats.rs(0), &arch.rs[0], &amplitudes[0], budget.delta2[0])?,
        rs_contribution(stats.rs(1), &arch.rs[1], &amplitudes[1], budget.delta2[1])?,
    ];
    let eta = search_eta(&parts, budget, opts)?;
    let mut eta_out = [None, None];
    for s in 0..2 {
        if arch.rs[s].is_active() {
            eta_out[s] = Some(eta[s]);
            for v in amplitudes[s].values_mut() {
                *v *= eta[s];
            }
            clamp(amplitudes[s].values_mut(), budget.beta_max);
        }
    }
    Design::from_parts(arch.clone(), theta_blocks, amplitudes, eta_out, source)
}

/// Full design for one realization: spatial blocks, amplitudes, η, assembly.
pub fn design_with(
    ch: &ChannelRealization,
    arch: &ArchitectureSpec,
    budget: &PowerBudget,
    opts: &DesignOptions,
) -> Result<Design> {
    arch.ensure_valid()?;
    budget.validate()?;
    if ch.layout != BlockLayout::new(arch) {
        return Err(invalid!("channel layout does not match the architecture"));
    }
    let blocks = solve_spatial(ch)?;
    let stats = group_statistics(ch);
    design_from_parts(
        arch,
        blocks,
        &stats,
        budget,
        opts,
        ThetaSource::ChannelMatched,
    )
}

pub fn design(
    ch: &ChannelRealization,
    arch: &ArchitectureSpec,
    budget: &PowerBudget,
) -> Result<Design> {
    design_with(ch, arch, budget, &DesignOptions::default())
}

/// `Σ_active δ²·‖h_{R,s}ᴴ·Φ_s‖²` summed block by block.
pub fn amplifier_noise(design: &Design, h_r: &CVec, budget: &PowerBudget) -> f64 {
    let mut noise = 0.0;
    let mut blocks = design.phi.blocks().iter();
    for s in 0..2 {
        let rs = &design.arch.rs[s];
        for _ in 0..rs.groups() {
            let Some((offset, phi)) = blocks.next() else {
                break;
            };
            if rs.mode != ActivityMode::Passive {
                let r = h_r.rows(*offset, phi.nrows());
                noise += budget.delta2[s] * (r.adjoint() * phi).norm_squared();
            }
        }
    }
    noise
}

/// `h_Rᴴ·Φ·h_x` through the Φ blocks.
pub fn equivalent_channel(design: &Design, h_r: &CVec, h_x: &CVec) -> C64 {
    design
        .phi
        .mul_vec(h_x)
        .iter()
        .zip(h_r.iter())
        .map(|(y, r)| r.conj() * y)
        .sum()
}

/// Scalar evaluation from group norms; valid only when every block is Θ★
/// for `ch`.
pub fn scalar_snr(
    design: &Design,
    ch: &ChannelRealization,
    budget: &PowerBudget,
) -> Result<SnrBreakdown> {
    let stats = group_statistics(ch);
    let mut signal = 0.0;
    let mut noise = 0.0;
    for s in 0..2 {
        let p = rs_contribution(
            stats.rs(s),
            &design.arch.rs[s],
            &design.amplitudes[s],
            budget.delta2[s],
        )?;
        signal += p.signal;
        noise += p.noise;
    }
    Ok(SnrBreakdown::new(C64::new(signal, 0.0), noise, budget))
}

fn relative_gap(x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs());
    if scale == 0.0 {
        0.0
    } else {
        (x - y).abs() / scale
    }
}

/// SNR through the Φ blocks. For channel-matched designs the scalar route
/// is evaluated as well and both must agree.
pub fn evaluate_snr(
    design: &Design,
    ch: &ChannelRealization,
    budget: &PowerBudget,
) -> Result<SnrBreakdown> {
    if ch.m() != design.phi.dim() {
        return Err(invalid!(
            "channel has {} elements, design {}",
            ch.m(),
            design.phi.dim()
        ));
    }
    let h_eq = equivalent_channel(design, &ch.h_r, &ch.h_t);
    let dense = SnrBreakdown::new(h_eq, amplifier_noise(design, &ch.h_r, budget), budget);
    if design.theta_source == ThetaSource::ChannelMatched {
        let fast = scalar_snr(design, ch, budget)?;
        let h_gap = (dense.h_eq - fast.h_eq).norm()
            / fast
                .h_eq
                .norm()
                .max(dense.h_eq.norm())
                .max(f64::MIN_POSITIVE);
        let checks = [
            ("h_eq", h_gap),
            (
                "amplifier noise",
                relative_gap(dense.amp_noise, fast.amp_noise),
            ),
            ("gamma", relative_gap(dense.gamma, fast.gamma)),
        ];
        for (what, gap) in checks {
            if !(gap <= CONSISTENCY_TOL) {
                return Err(Error::Inconsistent(format!(
                    "{what} differs between block and scalar routes by {gap:e}"
                )));
            }
        }
    }
    Ok(dense)
}

/// Reflect power `P_t‖Φ_s h_{T,s}‖² + δ²‖Φ_s‖_F²` of every active subsurface,
/// checked against its budget.
pub fn reflect_power(
    design: &Design,
    ch: &ChannelRealization,
    budget: &PowerBudget,
) -> Result<[Option<f64>; 2]> {
    let powers = reflect_power_unchecked(design, &ch.h_t, budget);
    for s in 0..2 {
        if let Some(p) = powers[s] {
            let cap = budget.pr_max[s];
            if p > cap * (1.0 + CONSISTENCY_TOL) {
                return Err(Error::Infeasible {
                    rs: s + 1,
                    power: p,
                    budget: cap,
                });
            }
        }
    }
    Ok(powers)
}

/// Reflect powers without the budget check.
pub fn reflect_power_unchecked(
    design: &Design,
    h_t: &CVec,
    budget: &PowerBudget,
) -> [Option<f64>; 2] {
    let mut out = [None, None];
    let mut blocks = design.phi.blocks().iter();
    for s in 0..2 {
        let rs = &design.arch.rs[s];
        let mut total = 0.0;
        for _ in 0..rs.groups() {
            let Some((offset, phi)) = blocks.next() else {
                break;
            };
            let t = h_t.rows(*offset, phi.nrows());
            total += budget.pt * (phi * t).norm_squared() + budget.delta2[s] * phi.norm_squared();
        }
        if rs.is_active() {
            out[s] = Some(total);
        }
    }
    out
}
