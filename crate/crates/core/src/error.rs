use thiserror::Error;

use crate::partition::UeId;

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("channel is rank deficient: {0}")]
    Rank(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("distance {r} m is inside the reference distance r0 = {r0} m")]
    NearField { r: f64, r0: f64 },

    #[error("distance {d} m outside [{lo}, {hi}] m")]
    Range { d: f64, lo: f64, hi: f64 },

    #[error("position at {r} m lies outside the cell of radius {radius} m")]
    OutOfCell { r: f64, radius: f64 },

    #[error("UE {0} already joined")]
    DuplicateUe(UeId),

    #[error("UE {0} is not present")]
    UnknownUe(UeId),

    #[error("invalid configuration: {0}")]
    Config(String),
}
