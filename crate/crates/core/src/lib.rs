//! Ergodicity and exponential mixing of finite-dimensional quantum channels.
//!
//! * [`operator`]: dense complex operators, states and the total-variation norm.
//! * [`channels`]: Kraus channels, their matrix representations and a zoo of
//!   standard families.
//! * [`dobrushin`]: the Markov–Dobrushin constant and the rate it implies.
//! * [`dynamics`]: spectral classification, fixed points and trajectories.
//! * [`analysis`]: everything above combined into one report.

pub mod analysis;
pub mod channels;
pub mod dobrushin;
pub mod dynamics;
pub mod error;
pub mod operator;
pub mod rng;

pub use channels::KrausChannel;
pub use error::{Error, Result};
pub use operator::{DensityMatrix, HermitianOperator, Operator, PureState};
