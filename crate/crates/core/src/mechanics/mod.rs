//! Bonded-particle mechanics: materials, bond law, dynamics and the
//! uniaxial compression driver.

pub mod bond;
pub mod dynamics;
pub mod material;
pub mod uniaxial;
pub mod calibrate;

pub use bond::{bond_force_update, BondAreaRule, BondIncrement, BondState, BondStatus, BondStrength, FailureMode};
pub use dynamics::{Contact, DynamicsParams, Equilibrium, Simulation};
pub use material::{BondMaterial, MaterialSet};
pub use uniaxial::{extract_mechanical_params, run_uniaxial_test, CurveSample, MechanicalReport, EQUILIBRIUM_RATIO, MODULUS_WINDOW, StressStrainCurve, UniaxialConfig};
pub use calibrate::{calibrate, CalibrationOutcome, CalibrationRecord};
