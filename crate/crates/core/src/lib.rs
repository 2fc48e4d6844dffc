//! Multi-armed bandits with temporally-partitioned rewards.
//!
//! A pull of an arm does not pay out at once: its cumulative reward is spread
//! over the next `tau_max` rounds, grouped into `alpha` z-groups of `phi`
//! consecutive rounds each. How much of the reward cap each z-group may carry
//! is described by a spread PMF ([`SpreadPmf`]).
//!
//! The crate provides:
//! - [`spread`]: spread PMFs, their diagnostics and per-group reward caps.
//! - [`env`]: a seeded environment producing partitioned rewards with delays.
//! - [`policy`]: the fictitious-realization UCB policy and baselines.
//! - [`bounds`]: closed-form regret lower/upper bounds and pseudo-regret.
//! - [`harness`]: config-driven experiment runs and CSV/JSON output.
//!
//! The numerical core is generic over [`Real`]; `f64` aliases are exported
//! at the crate root for everyday use.

// `!(x >= 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod env;
mod error;
pub mod harness;
pub mod policy;
mod scalar;
pub mod spread;

pub use bounds::{InstanceSummary, LowerBoundRate};
pub use env::{ArmSpec, Environment, GeneratorKind, InstanceConfig, Observation, PendingSchedule};
pub use error::{Error, Result};
pub use policy::{Agent, PolicyKind, PolicyState};
pub use scalar::Real;
pub use spread::{Partition, SpreadPmf};

pub type SpreadPmf64 = SpreadPmf<f64>;
pub type SpreadPmf32 = SpreadPmf<f32>;
pub type ArmSpec64 = ArmSpec<f64>;
pub type InstanceConfig64 = InstanceConfig<f64>;
pub type Environment64 = Environment<f64>;
pub type Observation64 = Observation<f64>;
pub type PendingSchedule64 = PendingSchedule<f64>;
pub type PolicyState64 = PolicyState<f64>;
pub type Agent64 = Agent<f64>;
pub type InstanceSummary64 = InstanceSummary<f64>;
