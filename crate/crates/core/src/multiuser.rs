//! Several single-antenna transmitters sharing one surface. The Tx side is
//! replaced by the dominant left singular vector of the power-weighted
//! channel stack, restricted and renormalized per group.

use alloc::vec::Vec;

use nalgebra::SymmetricEigen;
use rand::Rng;

use crate::architecture::{ArchitectureSpec, Design, ThetaSource};
use crate::channel::{
    sample_fading, sample_geometry, BlockLayout, ChannelRealization, GroupStat, GroupStatistics,
    ScenarioConfig,
};
use crate::error::invalid;
use crate::optimizer::{
    amplifier_noise, design_from_parts, design_with, equivalent_channel, solve_spatial_from,
    DesignOptions, PowerBudget,
};
use crate::{CMat, CVec, Error, Result, C64};

/// Users with transmit powers (W) and channels towards the surface, plus the
/// common surface→Rx channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MacScenario {
    powers: Vec<f64>,
    users: Vec<CVec>,
    h_r: CVec,
}

impl MacScenario {
    pub fn new(powers: Vec<f64>, users: Vec<CVec>, h_r: CVec) -> Result<Self> {
        if users.is_empty() || users.len() != powers.len() {
            return Err(invalid!("need one power per user and at least one user"));
        }
        if powers.iter().any(|p| !(*p > 0.0) || !p.is_finite()) {
            return Err(invalid!("user powers must be positive"));
        }
        if users.iter().any(|h| h.len() != h_r.len()) {
            return Err(invalid!("user channels must have {} entries", h_r.len()));
        }
        Ok(Self { powers, users, h_r })
    }

    pub fn k_users(&self) -> usize {
        self.users.len()
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn users(&self) -> &[CVec] {
        &self.users
    }

    pub fn h_r(&self) -> &CVec {
        &self.h_r
    }

    /// `[√P₁·h₁, …, √P_K·h_K]`.
    pub fn weighted_stack(&self) -> CMat {
        let m = self.h_r.len();
        CMat::from_fn(m, self.k_users(), |i, k| {
            self.users[k][i] * libm::sqrt(self.powers[k])
        })
    }
}

/// Draws `powers.len()` users at independent Tx positions. The Rx channel is
/// the one drawn alongside the first user, so a single user reproduces
/// [`crate::channel::sample_channels`].
pub fn sample_mac<R: Rng + ?Sized>(
    cfg: &ScenarioConfig,
    m: usize,
    powers: Vec<f64>,
    rng: &mut R,
) -> Result<MacScenario> {
    let mut users = Vec::with_capacity(powers.len());
    let mut h_r = None;
    for _ in 0..powers.len() {
        let geometry = sample_geometry(cfg, rng);
        let (h_t, r) = sample_fading(m, &geometry, cfg.alpha, rng)?;
        users.push(h_t);
        h_r.get_or_insert(r);
    }
    let h_r = h_r.ok_or_else(|| invalid!("need at least one user"))?;
    MacScenario::new(powers, users, h_r)
}

/// Per-group unit Tx directions from the dominant left singular vector of
/// `h_t` (`M×N`), concatenated in element order. A group on which that
/// vector vanishes gets its first basis vector.
pub fn surrogate_direction(h_t: &CMat, layout: &BlockLayout) -> Result<CVec> {
    if h_t.nrows() != layout.len() || h_t.ncols() == 0 {
        return Err(invalid!(
            "Tx matrix is {}x{}, surface has {} elements",
            h_t.nrows(),
            h_t.ncols(),
            layout.len()
        ));
    }
    if h_t.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return Err(invalid!("Tx matrix is zero"));
    }
    let dominant: CVec = if h_t.ncols() == 1 {
        h_t.column(0).into_owned()
    } else {
        // Dominant eigenvector of the K×K Gram matrix, lifted back through h_t.
        let gram = h_t.adjoint() * h_t;
        let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("eigen-decomposition did not converge".into()))?;
        let best = (0..eig.eigenvalues.len())
            .max_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]))
            .ok_or_else(|| Error::Numerical("empty spectrum".into()))?;
        let lifted = h_t * eig.eigenvectors.column(best);
        let norm = lifted.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numerical("dominant singular vector vanished".into()));
        }
        lifted / C64::new(norm, 0.0)
    };
    let mut out = CVec::zeros(layout.len());
    for (_, _, range) in layout.iter() {
        let block = dominant.rows(range.start, range.len());
        let norm = block.norm();
        if norm > 0.0 {
            out.rows_mut(range.start, range.len())
                .copy_from(&(block / C64::new(norm, 0.0)));
        } else {
            out[range.start] = C64::new(1.0, 0.0);
        }
    }
    Ok(out)
}

/// Per-group statistics with the Tx power term replaced by the total
/// impinging power `Σ_k (P_k/P_t)·‖h_{k,g}‖²`.
pub fn mac_statistics(mac: &MacScenario, layout: &BlockLayout, pt: f64) -> GroupStatistics {
    let mut out = GroupStatistics::default();
    for (s, _, range) in layout.iter() {
        let nr = mac.h_r.rows(range.start, range.len()).norm();
        let c: f64 = mac
            .users
            .iter()
            .zip(&mac.powers)
            .map(|(h, p)| p / pt * h.rows(range.start, range.len()).norm_squared())
            .sum();
        out.per_rs[s].push(GroupStat::from_norms(nr, libm::sqrt(c)));
    }
    out
}

/// Design for all users at once. A single user is designed exactly as a
/// single-link channel scaled by `√(P₁/P_t)`.
pub fn design_mac(
    mac: &MacScenario,
    arch: &ArchitectureSpec,
    budget: &PowerBudget,
    opts: &DesignOptions,
) -> Result<Design> {
    arch.ensure_valid()?;
    budget.validate()?;
    let layout = BlockLayout::new(arch);
    if layout.len() != mac.h_r.len() {
        return Err(invalid!("MAC channels do not match the surface"));
    }
    if mac.k_users() == 1 {
        let p = mac.powers[0];
        let h_t = if p == budget.pt {
            mac.users[0].clone()
        } else {
            &mac.users[0] * C64::new(libm::sqrt(p / budget.pt), 0.0)
        };
        let ch = ChannelRealization::new(h_t, mac.h_r.clone(), arch)?;
        return design_with(&ch, arch, budget, opts);
    }
    let directions = surrogate_direction(&mac.weighted_stack(), &layout)?;
    let blocks = solve_spatial_from(&mac.h_r, &directions, &layout)?;
    let stats = mac_statistics(mac, &layout, budget.pt);
    design_from_parts(arch, blocks, &stats, budget, opts, ThetaSource::Surrogate)
}

/// `h_Rᴴ·Φ·h_k` for every user.
pub fn user_channels(design: &Design, mac: &MacScenario) -> Vec<C64> {
    mac.users
        .iter()
        .map(|h| equivalent_channel(design, &mac.h_r, h))
        .collect()
}

/// `log2(1 + Σ_k P_k·|h_eq,k|²/σ̃²)` with σ̃² the thermal plus amplifier noise.
pub fn sum_rate(design: &Design, mac: &MacScenario, budget: &PowerBudget) -> Result<f64> {
    if design.phi.dim() != mac.h_r.len() {
        return Err(invalid!("design and MAC channels differ in size"));
    }
    let noise = budget.sigma2 + amplifier_noise(design, &mac.h_r, budget);
    let received: f64 = user_channels(design, mac)
        .iter()
        .zip(&mac.powers)
        .map(|(h, p)| p * h.norm_sqr())
        .sum();
    Ok(libm::log2(1.0 + received / noise))
}

/// Maximum-ratio transmit vector `h/‖h‖`.
pub fn mrt_precoder(h: &CVec) -> Result<CVec> {
    let n = h.norm();
    if !(n > 0.0) {
        return Err(invalid!("cannot steer towards a zero channel"));
    }
    Ok(h / C64::new(n, 0.0))
}
