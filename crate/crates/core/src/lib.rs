//! Numerical laboratory for thermoelastic Timoshenko beams with fractional
//! damping.
//!
//! The two beam systems are discretized on a uniform grid, assembled into
//! real block generators that are exactly dissipative in a weighted energy
//! norm, and then probed through resolvent norms along the imaginary axis,
//! eigenvalues and time integration.

pub mod cli;
pub mod config;
pub(crate) mod dense;
pub mod error;
pub mod evolve;
pub mod generator;
pub mod grid;
pub mod params;
pub mod probe;
pub mod regionmap;
pub mod report;
pub mod resolvent;
pub mod scalar;
pub mod spectrum;
pub mod state;

pub use error::{Error, Result};
pub use generator::Generator;
pub use grid::Grid;
pub use params::{derive_weights, literal_weights, ModelParams, SystemId, WeightSet};
pub use scalar::Real;
pub use state::{Block, StateVector};

/// Double-precision grid; the resolvent, spectrum and evolution modules work
/// on this precision.
pub type Discretization = Grid<f64>;
pub type Discretization32 = Grid<f32>;
pub type Params = ModelParams<f64>;
pub type Params32 = ModelParams<f32>;
pub type Generator64 = Generator<f64>;
pub type Generator32 = Generator<f32>;
pub type State = StateVector<f64>;
pub type Weights = WeightSet<f64>;
