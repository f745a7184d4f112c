//! Numerical laboratory for the derivation of the cubic NLS from many-body
//! quantum dynamics: zero-energy scattering, dressed BBGKY hierarchy
//! operators, small-N dynamics, board-game combinatorics and dyadic
//! space-time estimates.
//!
//! Numeric code is generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`.

pub mod autodiff;
pub mod boardgame;
pub mod error;
pub mod estimates;
pub mod grid;
pub mod manybody;
pub mod nls;
pub mod numerics;
pub mod scalar;
pub mod scattering;

pub use error::{Error, Result};
pub use scalar::Real;

pub type LatticeGrid = grid::LatticeGrid<f64>;
pub type RadialPotential = scattering::RadialPotential<f64>;
pub type ScatteringSolution = scattering::ScatteringSolution<f64>;
pub type ScaledPotential = scattering::ScaledPotential<f64>;
pub type PairProfile = scattering::PairProfile<f64>;
pub type WaveFunction = manybody::WaveFunction<f64>;
pub type MarginalKernel = manybody::MarginalKernel<f64>;
pub type DressedMarginal = manybody::DressedMarginal<f64>;
pub type GridInteraction = manybody::GridInteraction<f64>;
pub type NLSField = nls::NLSField<f64>;
pub type SpaceTimeDensity = estimates::SpaceTimeDensity<f64>;
pub type TimeAxis = estimates::TimeAxis<f64>;
pub type Cutoff = estimates::Cutoff<f64>;
