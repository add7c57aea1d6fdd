//! Key-rate analysis for heralded device-independent QKD built on entangled
//! coherent states.
//!
//! * [`rates`]: closed-form heralded statistics, the key rate, the Bell-state
//!   baseline and the repeaterless bound.
//! * [`oracle`]: an independent truncated Fock-space simulation of the same
//!   experiment.
//! * [`optimize`] and [`sweep`]: intensity optimization, distance sweeps and
//!   crossover search.
//! * [`verify`]: closed forms versus oracle over a grid.
//! * [`output`] and [`cli`]: CSV/JSON emission and the command-line surface.

// Range checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod optimize;
pub mod oracle;
pub mod output;
pub mod params;
pub mod rates;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
pub use params::{DetectorStats, KeyRatePoint, ProtocolParams, TSIRELSON};
pub use sweep::{Protocol, SweepConfig, SweepRow};
