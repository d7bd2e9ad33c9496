//! Rényi information measures and their variational characterizations.
//!
//! All logarithms are base 2, so every entropy, divergence and exponent is in
//! bits. Divergences take values in [`ExtendedReal`]; the limit orders
//! `0`, `1` and `inf` are distinct [`Order`] variants.

pub mod codelength;
pub mod distribution;
pub mod error;
pub mod extended;
pub mod hyptest;
pub mod method_of_types;
mod numeric;
pub mod order;
pub mod random;
pub mod renyi;
pub mod shannon;
pub mod solver;
pub mod variational;
pub mod verify;

pub use distribution::{absolutely_continuous, make_distribution, support, Channel, Distribution, JointDistribution};
pub use error::{Error, Result};
pub use extended::ExtendedReal;
pub use order::{Alpha, Order};
pub use renyi::{AlphaVector, Optimum};
pub use solver::SolverConfig;
