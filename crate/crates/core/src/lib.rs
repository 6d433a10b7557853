//! Closed-form light/heavy-traffic interpolation approximations for mean
//! waiting times in cyclic polling systems with renewal arrivals, plus the
//! discrete-event simulator and test-bed harness used to validate them.

pub mod approx;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod model;
pub mod sim;
pub mod stats;

pub use approx::{InterpolationConstants, Method, QueueWait, WaitingTimeResult};
pub use error::{Error, Result};
pub use fit::{FitKind, FittedDistribution};
pub use model::{derive_moments, DensityMode, DerivedMoments, Discipline, QueueSpec, SystemSpec};
pub use sim::{simulate, SimConfig, SimEstimate};
