//! Balanced multiplexed quantum repeater simulation.
//!
//! A repeater with `N` memories sits between two links of unequal length.
//! Each round it splits its memories between the links, generates
//! entanglements, swaps matched pairs and carries the mismatch forward. The
//! crate provides the per-round engine, fixed and adaptive allocation
//! policies, closed-form rate and fidelity bounds, an exact Markov oracle
//! for small `N`, a two-repeater chain, and the sequential baseline.
//!
//! The closed-form pieces are generic over [`Real`] (`f32` or `f64`); the
//! aliases at the crate root fix them to `f64`.

pub mod allocation;
pub mod bounds;
pub mod chain;
pub mod config;
pub mod engine;
pub mod error;
pub mod fidelity;
pub mod link;
pub mod oracle;
pub mod output;
pub mod scalar;
pub mod stats;
pub mod stochastics;
pub mod sweep;

pub use allocation::{Allocation, Decision, PolicyKind};
pub use chain::{ChainConfig, LinkPool};
pub use engine::{RepeaterConfig, RoundOutcome, RoundState, SimSummary};
pub use error::{Error, Result};
pub use scalar::Real;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type LinkParams = link::LinkParams<f64>;
pub type LinkParamsF32 = link::LinkParams<f32>;
pub type Policy = allocation::Policy<f64>;
pub type CutoffThresholds = allocation::CutoffThresholds<f64>;
pub type BoundsReport = bounds::BoundsReport<f64>;
pub type BoundsReportF32 = bounds::BoundsReport<f32>;
