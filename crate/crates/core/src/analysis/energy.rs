//! Incident, reflected, transmitted and absorbed wave energies.

use std::io::{self, Write};

use crate::analysis::shpb::{Pulse, WaveRecord};
use crate::error::{Error, Result};
use crate::scalar::{trapezoid_uniform, Scalar};

/// Integrand of the wave-energy integrals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnergyMode {
    /// `A₀·C₀·∫σ(t)·ε(t) dt`, stress times strain as written.
    #[default]
    StressStrain,
    /// `A₀·C₀/E·∫σ(t)² dt`, the usual elastic wave energy.
    Conventional,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport<T> {
    /// J
    pub incident: T,
    pub reflected: T,
    pub transmitted: T,
    /// Always `incident - reflected - transmitted`.
    pub absorbed: T,
    /// %, `None` when the incident energy is not positive.
    pub efficiency: Option<T>,
}

impl<T: Scalar> EnergyReport<T> {
    pub fn from_components(incident: T, reflected: T, transmitted: T) -> Self {
        let absorbed = incident - reflected - transmitted;
        Self {
            incident,
            reflected,
            transmitted,
            absorbed,
            efficiency: dissipation_efficiency(absorbed, incident).ok(),
        }
    }

    pub fn write_report<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "E_i = {:.9e}", self.incident)?;
        writeln!(w, "E_r = {:.9e}", self.reflected)?;
        writeln!(w, "E_t = {:.9e}", self.transmitted)?;
        writeln!(w, "E_a = {:.9e}", self.absorbed)?;
        match self.efficiency {
            Some(eta) => writeln!(w, "eta_pct = {eta:.6}"),
            None => writeln!(w, "eta_pct = undefined"),
        }
    }
}

/// `E_a / E_i · 100`.
pub fn dissipation_efficiency<T: Scalar>(absorbed: T, incident: T) -> Result<T> {
    if !(incident > T::zero()) {
        return Err(Error::Domain(format!(
            "incident energy must be positive, got {incident}"
        )));
    }
    Ok(absorbed / incident * T::lit(100.0))
}

fn pulse_energy<T: Scalar>(p: &Pulse<T>, rec: &WaveRecord<T>, mode: EnergyMode) -> T {
    let mpa = T::lit(1.0e6);
    let dt = rec.dt();
    let scale = rec.bar.area * rec.bar.wave_speed;
    match mode {
        EnergyMode::StressStrain => {
            let f = p.stress.iter().zip(&p.strain).map(|(&s, &e)| s * mpa * e);
            scale * trapezoid_uniform(f, dt)
        }
        EnergyMode::Conventional => {
            let e = rec.bar.modulus * T::lit(1.0e9);
            let f = p.stress.iter().map(|&s| (s * mpa) * (s * mpa));
            scale / e * trapezoid_uniform(f, dt)
        }
    }
}

pub fn compute_energies<T: Scalar>(record: &WaveRecord<T>) -> Result<EnergyReport<T>> {
    compute_energies_with(record, EnergyMode::StressStrain)
}

pub fn compute_energies_with<T: Scalar>(record: &WaveRecord<T>, mode: EnergyMode) -> Result<EnergyReport<T>> {
    record.validate()?;
    let [i, r, t] = record.pulses().map(|p| pulse_energy(p, record, mode));
    Ok(EnergyReport::from_components(i, r, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::shpb::Bar;

    #[test]
    fn zero_signals_leave_efficiency_undefined() {
        let n = 5;
        let rec = WaveRecord {
            time: (0..n).map(|i| i as f64).collect(),
            incident: Pulse::constant(0.0, 0.0, n),
            reflected: Pulse::constant(0.0, 0.0, n),
            transmitted: Pulse::constant(0.0, 0.0, n),
            bar: Bar { area: 1.0, wave_speed: 1.0, modulus: 1.0 },
            specimen: None,
        };
        let r = compute_energies(&rec).unwrap();
        assert_eq!(r.incident, 0.0);
        assert_eq!(r.absorbed, 0.0);
        assert!(r.efficiency.is_none());
    }

    #[test]
    fn efficiency_rejects_nonpositive_incident() {
        assert!(dissipation_efficiency(1.0, 0.0).is_err());
        assert_eq!(dissipation_efficiency(0.0, 300.0).unwrap(), 0.0);
    }
}
