//! Hybrid surface descriptions, presets, amplifier accounting and assembly of
//! the block-diagonal scattering matrix Φ.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;
use core::str::FromStr;

use crate::error::invalid;
use crate::takagi::max_asymmetry;
use crate::{CMat, CVec, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ActivityMode {
    Passive,
    /// One amplifier per coupled group.
    FcActive,
    /// One amplifier per cluster of groups.
    ScActive,
}

/// One reflecting subsurface.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct RsSpec {
    pub m_s: usize,
    pub m_g: usize,
    pub mode: ActivityMode,
    /// Cluster sizes in groups (`ScActive` only). Cluster ℓ covers
    /// `clusters[ℓ]` consecutive groups, i.e. `clusters[ℓ]·m_g` elements.
    #[cfg_attr(feature = "serde", serde(default))]
    pub clusters: Vec<usize>,
}

impl RsSpec {
    pub fn passive(m_s: usize, m_g: usize) -> Self {
        Self {
            m_s,
            m_g,
            mode: ActivityMode::Passive,
            clusters: Vec::new(),
        }
    }

    pub fn fc_active(m_s: usize, m_g: usize) -> Self {
        Self {
            m_s,
            m_g,
            mode: ActivityMode::FcActive,
            clusters: Vec::new(),
        }
    }

    /// Sub-connected RS sharing a single amplifier.
    pub fn sc_single(m_s: usize, m_g: usize) -> Self {
        let groups = if m_g == 0 { 0 } else { m_s / m_g };
        let clusters = if groups == 0 {
            Vec::new()
        } else {
            alloc::vec![groups]
        };
        Self {
            m_s,
            m_g,
            mode: ActivityMode::ScActive,
            clusters,
        }
    }

    pub fn sc_clustered(m_s: usize, m_g: usize, clusters: Vec<usize>) -> Self {
        Self {
            m_s,
            m_g,
            mode: ActivityMode::ScActive,
            clusters,
        }
    }

    pub fn groups(&self) -> usize {
        if self.m_g == 0 {
            0
        } else {
            self.m_s / self.m_g
        }
    }

    pub fn is_active(&self) -> bool {
        self.mode != ActivityMode::Passive && self.m_s > 0
    }

    /// Group index ranges of the SC clusters.
    pub fn cluster_groups(&self) -> Vec<Range<usize>> {
        let mut start = 0;
        self.clusters
            .iter()
            .map(|&k| {
                let r = start..start + k;
                start += k;
                r
            })
            .collect()
    }

    /// Elements sharing the amplifier of each cluster, `T = K·m_g`.
    pub fn cluster_elements(&self) -> Vec<usize> {
        self.clusters.iter().map(|k| k * self.m_g).collect()
    }

    pub fn amplifier_count(&self) -> usize {
        if self.m_s == 0 {
            return 0;
        }
        match self.mode {
            ActivityMode::Passive => 0,
            ActivityMode::FcActive => self.groups(),
            ActivityMode::ScActive => self.clusters.len(),
        }
    }

    fn violations(&self, path: &str, out: &mut Vec<Violation>) {
        let mut push = |field: &str, message: String| {
            out.push(Violation {
                path: format!("{path}.{field}"),
                message,
            });
        };
        if self.m_g == 0 {
            push("m_g", "group size must be at least 1".into());
            return;
        }
        if self.m_s % self.m_g != 0 {
            push(
                "m_g",
                format!("m_s {} not divisible by m_g {}", self.m_s, self.m_g),
            );
            return;
        }
        let g = self.groups();
        match self.mode {
            ActivityMode::ScActive => {
                if self.clusters.iter().any(|&k| k == 0) {
                    push("clusters", "cluster sizes must be at least 1".into());
                }
                let sum: usize = self.clusters.iter().sum();
                if sum != g {
                    push("clusters", format!("cluster sizes sum {sum} ≠ G_s {g}"));
                }
            }
            _ => {
                if !self.clusters.is_empty() {
                    push(
                        "clusters",
                        "clusters only apply to ScActive subsurfaces".into(),
                    );
                }
            }
        }
    }
}

/// Structural rule broken by an [`ArchitectureSpec`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// A two-subsurface hybrid surface. A subsurface with `m_s = 0` is allowed
/// and contributes nothing, which expresses single-surface baselines.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct ArchitectureSpec {
    pub rs: [RsSpec; 2],
}

impl ArchitectureSpec {
    pub fn new(rs1: RsSpec, rs2: RsSpec) -> Self {
        Self { rs: [rs1, rs2] }
    }

    pub fn m(&self) -> usize {
        self.rs[0].m_s + self.rs[1].m_s
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        self.rs[0].violations("rs[0]", &mut out);
        self.rs[1].violations("rs[1]", &mut out);
        if self.m() < 1 {
            out.push(Violation {
                path: "rs".into(),
                message: "surface has no elements".into(),
            });
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            return Ok(());
        }
        let joined: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        Err(Error::InvalidArgument(joined.join("; ")))
    }

    pub fn amplifier_count(&self) -> usize {
        self.rs.iter().map(RsSpec::amplifier_count).sum()
    }
}

/// Named family members. `Diag*` are the `m_g = 1` special cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Preset {
    PassiveBd,
    ApBd,
    FcScBd,
    ScScBd,
    DiagPassive,
    DiagFcActive,
    DiagHybridAp,
    DiagScSc,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::PassiveBd,
        Preset::ApBd,
        Preset::FcScBd,
        Preset::ScScBd,
        Preset::DiagPassive,
        Preset::DiagFcActive,
        Preset::DiagHybridAp,
        Preset::DiagScSc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PassiveBd => "PassiveBd",
            Preset::ApBd => "ApBd",
            Preset::FcScBd => "FcScBd",
            Preset::ScScBd => "ScScBd",
            Preset::DiagPassive => "DiagPassive",
            Preset::DiagFcActive => "DiagFcActive",
            Preset::DiagHybridAp => "DiagHybridAp",
            Preset::DiagScSc => "DiagScSc",
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(
            self,
            Preset::DiagPassive | Preset::DiagFcActive | Preset::DiagHybridAp | Preset::DiagScSc
        )
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.chars().filter(|c| *c != '-' && *c != '_').collect();
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(&norm))
            .ok_or_else(|| invalid!("unknown preset '{s}'"))
    }
}

/// Builds a family member with `M` elements, active fraction `a = M₁/M` and
/// group size `m_g` (ignored by the diagonal presets).
pub fn preset(name: Preset, m: usize, a: f64, m_g: usize) -> Result<ArchitectureSpec> {
    if !(0.0..=1.0).contains(&a) {
        return Err(invalid!("active fraction must lie in [0, 1], got {a}"));
    }
    let m1f = a * m as f64;
    let m1 = libm::round(m1f) as usize;
    if libm::fabs(m1f - m1 as f64) > 1e-9 {
        return Err(invalid!("a·M = {m1f} is not an integer"));
    }
    let m2 = m - m1;
    let g = if name.is_diagonal() { 1 } else { m_g };
    let spec = match name {
        Preset::PassiveBd | Preset::DiagPassive => {
            ArchitectureSpec::new(RsSpec::passive(m1, g), RsSpec::passive(m2, g))
        }
        Preset::ApBd | Preset::DiagHybridAp => {
            ArchitectureSpec::new(RsSpec::fc_active(m1, g), RsSpec::passive(m2, g))
        }
        Preset::FcScBd => ArchitectureSpec::new(RsSpec::fc_active(m1, g), RsSpec::sc_single(m2, g)),
        Preset::ScScBd | Preset::DiagScSc => {
            ArchitectureSpec::new(RsSpec::sc_single(m1, g), RsSpec::sc_single(m2, g))
        }
        Preset::DiagFcActive => {
            ArchitectureSpec::new(RsSpec::fc_active(m, 1), RsSpec::passive(0, 1))
        }
    };
    spec.ensure_valid().map_err(|e| match e {
        Error::InvalidArgument(msg) => invalid!("{name} with M={m}, a={a}, M_G={m_g}: {msg}"),
        other => other,
    })?;
    Ok(spec)
}

/// Amplifier amplitudes of one subsurface.
#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Passive,
    /// β per group.
    Fc(Vec<f64>),
    /// β̃ per cluster.
    Sc(Vec<f64>),
}

impl Amplitudes {
    pub fn values(&self) -> &[f64] {
        match self {
            Amplitudes::Passive => &[],
            Amplitudes::Fc(v) | Amplitudes::Sc(v) => v,
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        match self {
            Amplitudes::Passive => &mut [],
            Amplitudes::Fc(v) | Amplitudes::Sc(v) => v,
        }
    }

    /// Zero amplitudes shaped for `rs`.
    pub fn zeros_for(rs: &RsSpec) -> Self {
        match rs.mode {
            ActivityMode::Passive => Amplitudes::Passive,
            ActivityMode::FcActive => Amplitudes::Fc(alloc::vec![0.0; rs.groups()]),
            ActivityMode::ScActive => Amplitudes::Sc(alloc::vec![0.0; rs.clusters.len()]),
        }
    }
}

/// Per-element scale of every group of `rs`: `1`, `β/√m_g` or `β̃/√T`.
pub fn group_scales(rs: &RsSpec, amps: &Amplitudes) -> Result<Vec<f64>> {
    let g = rs.groups();
    match (rs.mode, amps) {
        (ActivityMode::Passive, Amplitudes::Passive) => Ok(alloc::vec![1.0; g]),
        (ActivityMode::FcActive, Amplitudes::Fc(beta)) if beta.len() == g => {
            let root = libm::sqrt(rs.m_g as f64);
            Ok(beta.iter().map(|b| b / root).collect())
        }
        (ActivityMode::ScActive, Amplitudes::Sc(beta)) if beta.len() == rs.clusters.len() => {
            let mut out = Vec::with_capacity(g);
            for (range, (b, t)) in rs
                .cluster_groups()
                .into_iter()
                .zip(beta.iter().zip(rs.cluster_elements()))
            {
                let scale = b / libm::sqrt(t as f64);
                out.extend(range.map(|_| scale));
            }
            Ok(out)
        }
        _ => Err(invalid!(
            "amplitudes {amps:?} do not match a {:?} subsurface with {g} groups",
            rs.mode
        )),
    }
}

/// Block-diagonal `M×M` matrix stored as its diagonal blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockDiagonal {
    dim: usize,
    blocks: Vec<(usize, CMat)>,
}

impl BlockDiagonal {
    pub fn new(dim: usize, blocks: Vec<(usize, CMat)>) -> Result<Self> {
        let mut next = 0;
        for (offset, b) in &blocks {
            if *offset != next || !b.is_square() {
                return Err(invalid!("blocks must be square and contiguous"));
            }
            next += b.nrows();
        }
        if next != dim {
            return Err(invalid!("blocks cover {next} of {dim} rows"));
        }
        Ok(Self { dim, blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn blocks(&self) -> &[(usize, CMat)] {
        &self.blocks
    }

    pub fn to_dense(&self) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        for (offset, b) in &self.blocks {
            let n = b.nrows();
            out.view_mut((*offset, *offset), (n, n)).copy_from(b);
        }
        out
    }

    /// `Φ·x` using only the blocks.
    pub fn mul_vec(&self, x: &CVec) -> CVec {
        let mut out = CVec::zeros(self.dim);
        for (offset, b) in &self.blocks {
            let n = b.nrows();
            let y = b * x.rows(*offset, n);
            out.rows_mut(*offset, n).copy_from(&y);
        }
        out
    }
}

/// Scales every Θ block by its subsurface's per-element factor.
pub fn assemble_phi(
    theta_blocks: &[Vec<CMat>; 2],
    amplitudes: &[Amplitudes; 2],
    arch: &ArchitectureSpec,
) -> Result<BlockDiagonal> {
    let mut blocks = Vec::new();
    let mut offset = 0;
    for s in 0..2 {
        let rs = &arch.rs[s];
        if theta_blocks[s].len() != rs.groups() {
            return Err(invalid!(
                "RS{} has {} groups but {} blocks were given",
                s + 1,
                rs.groups(),
                theta_blocks[s].len()
            ));
        }
        let scales = group_scales(rs, &amplitudes[s])?;
        for (theta, scale) in theta_blocks[s].iter().zip(scales) {
            if theta.nrows() != rs.m_g || theta.ncols() != rs.m_g {
                return Err(invalid!(
                    "RS{} block is {}x{}, expected {}x{}",
                    s + 1,
                    theta.nrows(),
                    theta.ncols(),
                    rs.m_g,
                    rs.m_g
                ));
            }
            blocks.push((offset, theta * C64::new(scale, 0.0)));
            offset += rs.m_g;
        }
    }
    BlockDiagonal::new(arch.m(), blocks)
}

/// How the Θ blocks of a design were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaSource {
    /// Per-group Takagi solution matched to the design channel.
    ChannelMatched,
    /// Takagi solution for a rank-1 surrogate of several Tx channels.
    Surrogate,
    /// Supplied by the caller.
    External,
}

/// A solved scattering configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub arch: ArchitectureSpec,
    pub theta_blocks: [Vec<CMat>; 2],
    pub amplitudes: [Amplitudes; 2],
    /// Global scaling applied to each active subsurface.
    pub eta: [Option<f64>; 2],
    pub phi: BlockDiagonal,
    pub theta_source: ThetaSource,
}

impl Design {
    pub fn from_parts(
        arch: ArchitectureSpec,
        theta_blocks: [Vec<CMat>; 2],
        amplitudes: [Amplitudes; 2],
        eta: [Option<f64>; 2],
        theta_source: ThetaSource,
    ) -> Result<Self> {
        let phi = assemble_phi(&theta_blocks, &amplitudes, &arch)?;
        Ok(Self {
            arch,
            theta_blocks,
            amplitudes,
            eta,
            phi,
            theta_source,
        })
    }

    /// Checks unitarity and symmetry of every Θ, the amplitude range and the
    /// Φ block structure.
    pub fn check_invariants(&self, beta_max: Option<f64>) -> Result<()> {
        const TOL: f64 = 1e-9;
        for (s, blocks) in self.theta_blocks.iter().enumerate() {
            for (g, theta) in blocks.iter().enumerate() {
                let n = theta.nrows();
                let unit = (theta.adjoint() * theta - CMat::identity(n, n)).norm();
                if !(unit <= TOL) {
                    return Err(Error::Inconsistent(format!(
                        "Θ[{s}][{g}] is not unitary (‖ΘᴴΘ − I‖ = {unit:e})"
                    )));
                }
                let asym = (theta - theta.transpose()).norm();
                if !(asym <= TOL) {
                    return Err(Error::Inconsistent(format!(
                        "Θ[{s}][{g}] is not symmetric (‖Θ − Θᵀ‖ = {asym:e})"
                    )));
                }
            }
        }
        for (s, amps) in self.amplitudes.iter().enumerate() {
            for &b in amps.values() {
                let above = beta_max.is_some_and(|m| b > m * (1.0 + 1e-12));
                if !(b >= 0.0) || above || !b.is_finite() {
                    return Err(Error::Inconsistent(format!(
                        "RS{} amplitude {b} out of range",
                        s + 1
                    )));
                }
            }
        }
        let expected = assemble_phi(&self.theta_blocks, &self.amplitudes, &self.arch)?;
        for ((_, got), (_, want)) in self.phi.blocks().iter().zip(expected.blocks()) {
            let err = (got - want).norm();
            if !(err <= 1e-12 * want.norm().max(f64::MIN_POSITIVE)) && err > 0.0 {
                return Err(Error::Inconsistent(
                    "Φ does not match its Θ blocks and amplitudes".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Largest `|Θ_ij − Θ_ji|` over all blocks of a design.
pub fn max_block_asymmetry(design: &Design) -> f64 {
    design
        .theta_blocks
        .iter()
        .flatten()
        .map(max_asymmetry)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::run_rng;
    use crate::takagi::random_unitary_symmetric;
    use alloc::vec;

    #[test]
    fn validation_examples() {
        let ok = ArchitectureSpec::new(RsSpec::sc_clustered(8, 4, vec![2]), RsSpec::passive(8, 4));
        assert!(ok.validate().is_empty());

        let bad = ArchitectureSpec::new(RsSpec::passive(8, 3), RsSpec::passive(8, 4));
        let v = bad.validate();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "rs[0].m_g");
        assert!(v[0].message.contains("not divisible"));

        let bad = ArchitectureSpec::new(
            RsSpec::sc_clustered(8, 4, vec![1, 2]),
            RsSpec::passive(8, 4),
        );
        let v = bad.validate();
        assert_eq!(v[0].path, "rs[0].clusters");
        assert!(v[0].message.contains("sum 3 ≠ G_s 2"));

        let bad = ArchitectureSpec::new(
            RsSpec::sc_clustered(8, 4, vec![0, 2]),
            RsSpec::passive(0, 1),
        );
        assert!(!bad.validate().is_empty());
        let bad = ArchitectureSpec::new(RsSpec::passive(0, 1), RsSpec::passive(0, 1));
        assert!(!bad.validate().is_empty());
    }

    #[test]
    fn preset_examples() {
        let s = preset(Preset::ScScBd, 64, 0.5, 4).unwrap();
        assert_eq!(s.rs[0], RsSpec::sc_clustered(32, 4, vec![8]));
        assert_eq!(s.rs[1], RsSpec::sc_clustered(32, 4, vec![8]));

        let s = preset(Preset::DiagHybridAp, 64, 0.5, 4).unwrap();
        assert_eq!(s.rs[0], RsSpec::fc_active(32, 1));
        assert_eq!(s.rs[1], RsSpec::passive(32, 1));

        let s = preset(Preset::DiagFcActive, 64, 0.5, 4).unwrap();
        assert_eq!(s.rs[0], RsSpec::fc_active(64, 1));
        assert_eq!(s.rs[1].m_s, 0);
        assert_eq!(s.amplifier_count(), 64);

        assert!(preset(Preset::ApBd, 64, 0.5, 3).is_err());
        assert!(preset(Preset::ApBd, 10, 0.25, 1).is_err());
        assert!(preset(Preset::ApBd, 10, 1.5, 1).is_err());
    }

    #[test]
    fn preset_names_parse() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert_eq!("sc-sc-bd".parse::<Preset>().unwrap(), Preset::ScScBd);
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn amplifier_counts() {
        assert_eq!(
            preset(Preset::ScScBd, 64, 0.5, 4)
                .unwrap()
                .amplifier_count(),
            2
        );
        assert_eq!(
            preset(Preset::ApBd, 64, 0.5, 4).unwrap().amplifier_count(),
            8
        );
        assert_eq!(
            preset(Preset::PassiveBd, 64, 0.5, 4)
                .unwrap()
                .amplifier_count(),
            0
        );
        assert_eq!(
            preset(Preset::FcScBd, 64, 0.5, 4)
                .unwrap()
                .amplifier_count(),
            9
        );
        for m in [8, 16, 64, 128] {
            for m_g in [2, 4] {
                // With a single FC group the first two counts tie.
                if m / 2 / m_g < 2 {
                    continue;
                }
                let sc = preset(Preset::ScScBd, m, 0.5, m_g)
                    .unwrap()
                    .amplifier_count();
                let fc = preset(Preset::FcScBd, m, 0.5, m_g)
                    .unwrap()
                    .amplifier_count();
                let diag = preset(Preset::DiagFcActive, m, 0.5, m_g)
                    .unwrap()
                    .amplifier_count();
                assert!(sc < fc && fc < diag, "M={m} M_G={m_g}: {sc} {fc} {diag}");
            }
        }
    }

    fn blocks_for(arch: &ArchitectureSpec, seed: u64) -> [Vec<CMat>; 2] {
        let mut rng = run_rng(seed, 0);
        let mut out: [Vec<CMat>; 2] = Default::default();
        for s in 0..2 {
            for _ in 0..arch.rs[s].groups() {
                out[s].push(random_unitary_symmetric(arch.rs[s].m_g, &mut rng));
            }
        }
        out
    }

    #[test]
    fn diagonal_passive_assembly() {
        let arch = preset(Preset::DiagPassive, 6, 0.5, 1).unwrap();
        let blocks = blocks_for(&arch, 1);
        let phi = assemble_phi(&blocks, &[Amplitudes::Passive, Amplitudes::Passive], &arch)
            .unwrap()
            .to_dense();
        for i in 0..6 {
            for j in 0..6 {
                if i == j {
                    assert!((phi[(i, i)].norm() - 1.0).abs() < 1e-14);
                } else {
                    assert_eq!(phi[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn fc_scaling_cancels() {
        let arch = ArchitectureSpec::new(RsSpec::fc_active(8, 4), RsSpec::passive(0, 1));
        let blocks = [vec![CMat::identity(4, 4); 2], vec![]];
        let beta = 2.0;
        let phi = assemble_phi(
            &blocks,
            &[Amplitudes::Fc(vec![beta, beta]), Amplitudes::Passive],
            &arch,
        )
        .unwrap();
        assert!((phi.to_dense() - CMat::identity(8, 8)).norm() < 1e-15);
    }

    #[test]
    fn sc_per_element_amplitude() {
        let arch = ArchitectureSpec::new(RsSpec::sc_single(8, 4), RsSpec::passive(0, 1));
        let blocks = [vec![CMat::identity(4, 4); 2], vec![]];
        let phi = assemble_phi(
            &blocks,
            &[Amplitudes::Sc(vec![10f64.sqrt()]), Amplitudes::Passive],
            &arch,
        )
        .unwrap();
        let d = phi.to_dense();
        assert!((d[(5, 5)].re - 1.118).abs() < 1e-3);
        assert!((d[(5, 5)].re - (10.0f64 / 8.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn block_energy_identity() {
        let arch = ArchitectureSpec::new(
            RsSpec::fc_active(8, 4),
            RsSpec::sc_clustered(12, 2, vec![2, 4]),
        );
        let blocks = blocks_for(&arch, 3);
        let amps = [
            Amplitudes::Fc(vec![0.7, 3.0]),
            Amplitudes::Sc(vec![1.5, 40.0]),
        ];
        let phi = assemble_phi(&blocks, &amps, &arch).unwrap();
        let expected = [
            0.49,
            9.0,
            2.25 * 2.0 / 4.0,
            2.25 * 2.0 / 4.0,
            1600.0 * 2.0 / 8.0,
        ];
        for ((_, b), e) in phi
            .blocks()
            .iter()
            .zip(expected.iter().chain(&[1600.0 * 2.0 / 8.0; 3]))
        {
            assert!((b.norm_squared() / e - 1.0).abs() < 1e-9);
        }

        let passive = ArchitectureSpec::new(RsSpec::passive(8, 4), RsSpec::passive(4, 2));
        let blocks = blocks_for(&passive, 4);
        let phi = assemble_phi(
            &blocks,
            &[Amplitudes::Passive, Amplitudes::Passive],
            &passive,
        )
        .unwrap();
        for (_, b) in phi.blocks() {
            assert!((b.norm_squared() / b.nrows() as f64 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn assembly_is_linear_in_amplitudes() {
        let arch = ArchitectureSpec::new(RsSpec::fc_active(4, 2), RsSpec::sc_single(4, 2));
        let blocks = blocks_for(&arch, 8);
        let mk = |x: f64, y: f64, z: f64| {
            assemble_phi(
                &blocks,
                &[Amplitudes::Fc(vec![x, y]), Amplitudes::Sc(vec![z])],
                &arch,
            )
            .unwrap()
            .to_dense()
        };
        let lhs = mk(1.0 + 2.0 * 0.5, 3.0 + 2.0 * 0.25, 0.2 + 2.0 * 4.0);
        let rhs = mk(1.0, 3.0, 0.2) + mk(0.5, 0.25, 4.0) * C64::new(2.0, 0.0);
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn assembly_rejects_mismatched_input() {
        let arch = ArchitectureSpec::new(RsSpec::fc_active(4, 2), RsSpec::passive(4, 2));
        let blocks = blocks_for(&arch, 2);
        assert!(assemble_phi(
            &blocks,
            &[Amplitudes::Fc(vec![1.0]), Amplitudes::Passive],
            &arch
        )
        .is_err());
        assert!(assemble_phi(
            &blocks,
            &[Amplitudes::Sc(vec![1.0]), Amplitudes::Passive],
            &arch
        )
        .is_err());
        let wrong = [vec![CMat::identity(3, 3); 2], blocks[1].clone()];
        assert!(assemble_phi(
            &wrong,
            &[Amplitudes::Fc(vec![1.0, 1.0]), Amplitudes::Passive],
            &arch
        )
        .is_err());
    }

    #[test]
    fn design_invariants_catch_bad_blocks() {
        let arch = ArchitectureSpec::new(RsSpec::fc_active(4, 2), RsSpec::passive(4, 2));
        let blocks = blocks_for(&arch, 5);
        let amps = [Amplitudes::Fc(vec![1.0, 2.0]), Amplitudes::Passive];
        let d = Design::from_parts(
            arch.clone(),
            blocks.clone(),
            amps.clone(),
            [Some(1.0), None],
            ThetaSource::External,
        )
        .unwrap();
        assert!(d.check_invariants(Some(3.0)).is_ok());
        assert!(d.check_invariants(Some(1.5)).is_err());

        let mut skew = blocks.clone();
        skew[1][0][(0, 1)] += C64::new(0.0, 1e-3);
        let d =
            Design::from_parts(arch, skew, amps, [Some(1.0), None], ThetaSource::External).unwrap();
        assert!(d.check_invariants(None).is_err());
    }

    #[test]
    fn block_multiply_matches_dense() {
        let arch = ArchitectureSpec::new(RsSpec::fc_active(4, 2), RsSpec::sc_single(6, 3));
        let blocks = blocks_for(&arch, 6);
        let phi = assemble_phi(
            &blocks,
            &[Amplitudes::Fc(vec![1.0, 2.0]), Amplitudes::Sc(vec![0.3])],
            &arch,
        )
        .unwrap();
        let x = CVec::from_fn(10, |i, _| C64::new(i as f64, 1.0 - i as f64));
        assert!((phi.mul_vec(&x) - phi.to_dense() * &x).norm() < 1e-12);
    }
}
