use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("system has no queues")]
    EmptySystem,

    #[error("queue {queue}: {field} = {value} is invalid ({reason})")]
    InvalidParameter {
        queue: usize,
        field: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("total switch-over time is zero; at least one queue needs a positive mean switch-over")]
    ZeroTotalSwitchover,

    #[error("load {0} is outside [0, 1); the system is only stable for rho < 1")]
    LoadOutOfRange(f64),

    #[error("proportional loads sum to {sum}, expected 1 (E[B_i] / E[A_i at saturation] must sum to one)")]
    UnnormalizedLoads { sum: f64 },

    #[error("invalid moments: mean = {mean}, scv = {scv} (need mean > 0 and scv >= 0)")]
    InvalidMoment { mean: f64, scv: f64 },

    #[error("queue {queue}: density mode {mode} does not apply to interarrival scv {scv}")]
    DensityModeMismatch {
        queue: usize,
        mode: &'static str,
        scv: f64,
    },

    #[error("queue index {index} out of range for a {n}-queue system")]
    QueueIndex { index: usize, n: usize },

    #[error("weighted load sum is zero; the PCL-based estimate is undefined")]
    DegenerateLoad,

    #[error("load is zero: there are no arrivals to simulate")]
    ZeroLoad,

    #[error("simulation budget exceeded: {events} events (cap {cap})")]
    NumericalBudget { events: u64, cap: u64 },

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("malformed results data: {0}")]
    Data(String),
}

pub type Result<T> = std::result::Result<T, Error>;
