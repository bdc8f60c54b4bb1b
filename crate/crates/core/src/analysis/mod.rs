//! Dynamic-test analysis: wave energies, dynamic increase factor, three-wave
//! reconstruction, box-counting dimension and T2 spectrum statistics.

pub mod energy;
pub mod fractal;
pub mod io;
pub mod rdif;
pub mod shpb;
pub mod t2;

pub use energy::{compute_energies, compute_energies_with, dissipation_efficiency, EnergyMode, EnergyReport};
pub use fractal::{box_counting_dimension, BoxScales, FractalDimension};
pub use rdif::{compute_rdif, fit_rdif_model, strain_rate_for_pressure, RdifModel, PRESSURE_TO_RATE};
pub use shpb::{face_stresses, reconstruct_three_wave, Bar, DynamicResponse, Pulse, Specimen, WaveRecord};
pub use t2::{group_area_statistics, t2_spectrum_stats, t2_spectrum_stats_with, GroupSummary, SpectrumAxis, T2Stats};
