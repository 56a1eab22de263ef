//! Expected maxima of fractional Brownian motion on `[0, 1]` and over the grid
//! `{i/n}`: closed-form bounds on the discretization gap, exact samplers, and
//! coupled Monte Carlo estimators.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod output;
pub mod process;
pub mod quad;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{FbmError, Result};
pub use process::{HurstParam, UniformGrid};
