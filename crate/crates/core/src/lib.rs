//! Single-cell massive-MIMO downlink simulator comparing always-max,
//! zooming and cellular partition zooming (CPZ) power allocation by
//! energy efficiency.
//!
//! * [`mimo`]: channel sampling, zero-forcing precoding and rate closed forms.
//! * [`propagation`]: path loss, shadowing and the inverse link budget.
//! * [`partition`]: the annulus-by-sector grid and per-sector zoom state.
//! * [`schemes`]: power per scheme, EE and per-scenario reports.
//! * [`sim`]: seeded scenarios, trials and sweeps.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod mimo;
pub mod partition;
pub mod propagation;
pub mod rng;
pub mod schemes;
pub mod sim;

pub use error::{Result, SimError};
pub use mimo::{ChannelMatrix, BeamformingMatrix, RateModelParams};
pub use partition::{CellIndex, CpzState, PartitionGrid, UeId, UePosition};
pub use propagation::{LinkBudget, ShadowingMode};
pub use schemes::{CellModel, SchemeKind, SchemeReport};
pub use sim::{Placement, ScenarioConfig, SweepResult, SweepRow, SweepVariable, TrialReport};
