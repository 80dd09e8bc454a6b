//! Hybrid beyond-diagonal RIS design.
//!
//! A reflecting surface is split into two subsurfaces, each passive, fully
//! connected active (one amplifier per coupled group) or sub-connected active
//! (one amplifier shared by a cluster of groups). Every group is coupled by a
//! unitary symmetric block obtained from a Takagi factorization, and the
//! amplifier amplitudes follow in closed form from the reflect-power budget.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the Monte-Carlo
//! harness and the CLI live in `hbdris-sim`.

#![no_std]

extern crate alloc;

pub mod architecture;
pub mod asymptotics;
pub mod channel;
mod error;
pub mod multiuser;
pub mod optimizer;
#[cfg(any(test, feature = "oracles"))]
pub mod oracle;
pub mod takagi;

pub use error::{Error, Result};

/// Complex double used throughout.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

pub use architecture::{
    ActivityMode, Amplitudes, ArchitectureSpec, BlockDiagonal, Design, Preset, RsSpec,
};
pub use channel::{ChannelRealization, GroupStat, GroupStatistics, ScenarioConfig};
pub use optimizer::{design, evaluate_snr, PowerBudget, SnrBreakdown};
