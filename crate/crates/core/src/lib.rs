//! Bonded-particle simulation of freezing saturated rock, plus the analysis
//! toolkit for uniaxial and split Hopkinson pressure bar test data.
//!
//! All numerics are generic over [`Scalar`] (`f32` / `f64`); the aliases at
//! the bottom of this file pin the common `f64` instantiations.

// `!(x > 0)` style checks also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod frostheave;
pub mod mechanics;
pub mod packing;
pub mod scalar;
mod spatial;
pub mod thermal;

pub use error::{Error, Result};
pub use scalar::{Scalar, Vec3};

/// Exact rational scalar for ratio formulas such as the model resolution.
pub type Rational = num_rational::Ratio<i64>;

pub type PackingConfigF64 = packing::PackingConfig<f64>;
pub type Assembly = packing::ParticleAssembly<f64>;
pub type Sim = mechanics::Simulation<f64>;
pub type Waves = analysis::WaveRecord<f64>;
pub type Energies = analysis::EnergyReport<f64>;
