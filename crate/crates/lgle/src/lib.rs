//! Simulation and statistical verification toolkit for the log-gamma
//! directed polymer and its Gibbsian line-ensemble embedding.
//!
//! The crate is organized in four layers:
//!
//! * numeric primitives: special functions, grids, FFT convolution,
//!   counter-based RNG streams and random-variate generation;
//! * model constants: the scaling functions `h_theta`, `d_theta`,
//!   `kappa_theta` and the cross-checked identities between them;
//! * simulators: the polymer partition-function recursion, the triangular
//!   array chain, Gibbs conditional samplers (inverse-CDF coupling and heat
//!   bath) and random-walk bridges;
//! * verification: KS machinery, the Tracy-Widom GUE reference table, and
//!   the composite statistical checkers behind the acceptance suite.

pub mod checks;
pub mod ensemble;
pub mod error;
pub mod fft;
pub mod gibbs;
pub mod grid;
pub mod hamiltonian;
pub mod kpz;
pub mod polymer;
pub mod rng;
pub mod rsk;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod tw;

pub use ensemble::LineEnsemble;
pub use error::{Error, Result};
pub use gibbs::{BoundaryData, GibbsSampler};
pub use grid::{Grid, GridDensity};
pub use kpz::KpzConstants;
pub use polymer::DisorderMatrix;
pub use rng::RngStream;
pub use rsk::{ChainTrace, ZTriangle};
pub use stats::{PiecewiseLinear, StatReport};
pub use tw::TwTable;
