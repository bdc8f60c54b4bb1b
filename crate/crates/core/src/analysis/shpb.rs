//! Split Hopkinson pressure bar records and three-wave reconstruction.

use crate::error::{Error, Result};
use crate::mechanics::{CurveSample, StressStrainCurve};
use crate::scalar::Scalar;

/// Relative spread allowed between consecutive sampling intervals.
const UNIFORM_DT_TOL: f64 = 1.0e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bar<T> {
    /// Cross-section `A₀`, m².
    pub area: T,
    /// Elastic wave speed `C₀`, m/s.
    pub wave_speed: T,
    /// GPa
    pub modulus: T,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Specimen<T> {
    /// m²
    pub area: T,
    /// m
    pub length: T,
}

/// One gauge wave. Stress in MPa, strain dimensionless.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Pulse<T> {
    pub stress: Vec<T>,
    pub strain: Vec<T>,
}

impl<T: Scalar> Pulse<T> {
    /// Stress from strain through the bar modulus.
    pub fn from_strain(strain: Vec<T>, bar_modulus: T) -> Self {
        let e = bar_modulus * T::lit(1000.0);
        Self {
            stress: strain.iter().map(|&s| s * e).collect(),
            strain,
        }
    }

    pub fn constant(stress: T, strain: T, n: usize) -> Self {
        Self {
            stress: vec![stress; n],
            strain: vec![strain; n],
        }
    }
}

/// Pre-windowed incident, reflected and transmitted waves on one time base.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveRecord<T> {
    /// s, uniformly spaced.
    pub time: Vec<T>,
    pub incident: Pulse<T>,
    pub reflected: Pulse<T>,
    pub transmitted: Pulse<T>,
    pub bar: Bar<T>,
    pub specimen: Option<Specimen<T>>,
}

impl<T: Scalar> WaveRecord<T> {
    /// Builds a record from gauge strains; stresses follow from the bar modulus.
    pub fn from_strains(
        time: Vec<T>,
        incident: Vec<T>,
        reflected: Vec<T>,
        transmitted: Vec<T>,
        bar: Bar<T>,
        specimen: Option<Specimen<T>>,
    ) -> Self {
        Self {
            time,
            incident: Pulse::from_strain(incident, bar.modulus),
            reflected: Pulse::from_strain(reflected, bar.modulus),
            transmitted: Pulse::from_strain(transmitted, bar.modulus),
            bar,
            specimen,
        }
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn pulses(&self) -> [&Pulse<T>; 3] {
        [&self.incident, &self.reflected, &self.transmitted]
    }

    /// Sampling interval. Zero for records shorter than two samples.
    pub fn dt(&self) -> T {
        match self.time.len() {
            0 | 1 => T::zero(),
            n => (self.time[n - 1] - self.time[0]) / T::from_usize_lossy(n - 1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.time.is_empty() {
            return Err(Error::Empty("wave record"));
        }
        let n = self.time.len();
        for (name, p) in ["incident", "reflected", "transmitted"].iter().zip(self.pulses()) {
            if p.stress.len() != n || p.strain.len() != n {
                return Err(Error::Shape(format!(
                    "{name} wave has {}/{} stress/strain samples, time base has {n}",
                    p.stress.len(),
                    p.strain.len()
                )));
            }
        }
        if !(self.bar.area > T::zero() && self.bar.wave_speed > T::zero()) {
            return Err(Error::config("bar", "area and wave speed must be positive"));
        }
        if !(self.bar.modulus > T::zero()) {
            return Err(Error::config("bar_modulus", "must be positive"));
        }
        let dt = self.dt();
        if n > 1 {
            if !(dt > T::zero()) {
                return Err(Error::Shape("time must increase".into()));
            }
            let tol = dt * T::lit(UNIFORM_DT_TOL);
            if self.time.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > tol) {
                return Err(Error::Shape("time base is not uniformly sampled".into()));
            }
        }
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        if !finite(&self.time) || self.pulses().iter().any(|p| !finite(&p.stress) || !finite(&p.strain)) {
            return Err(Error::Domain("wave record contains non-finite samples".into()));
        }
        Ok(())
    }

    fn specimen_checked(&self) -> Result<Specimen<T>> {
        match self.specimen {
            Some(s) if s.area > T::zero() && s.length > T::zero() => Ok(s),
            Some(_) => Err(Error::config("specimen", "area and length must be positive")),
            None => Err(Error::config("specimen", "specimen area and length are required")),
        }
    }
}

/// Specimen response recovered from the three waves.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicResponse<T> {
    /// Stress (MPa) against strain, with sample times.
    pub curve: StressStrainCurve<T>,
    /// 1/s
    pub strain_rate: Vec<T>,
}

impl<T: Scalar> DynamicResponse<T> {
    pub fn peak_stress(&self) -> T {
        self.curve.samples.iter().map(|s| s.stress).fold(T::zero(), T::max)
    }
}

/// Three-wave method: stress from the mean of both faces, strain rate from the
/// wave imbalance, strain by trapezoid integration of the rate.
pub fn reconstruct_three_wave<T: Scalar>(record: &WaveRecord<T>) -> Result<DynamicResponse<T>> {
    record.validate()?;
    let spec = record.specimen_checked()?;
    let k_stress = record.bar.area * record.bar.modulus * T::lit(1000.0) / (T::lit(2.0) * spec.area);
    let k_rate = record.bar.wave_speed / spec.length;
    let (ei, er, et) = (
        &record.incident.strain,
        &record.reflected.strain,
        &record.transmitted.strain,
    );
    let rate: Vec<T> = (0..record.len()).map(|k| k_rate * (ei[k] - er[k] - et[k])).collect();
    let half_dt = record.dt() * T::lit(0.5);
    let mut strain = T::zero();
    let mut samples = Vec::with_capacity(record.len());
    for k in 0..record.len() {
        if k > 0 {
            strain += (rate[k - 1] + rate[k]) * half_dt;
        }
        samples.push(CurveSample {
            strain,
            stress: k_stress * (ei[k] + er[k] + et[k]),
            time: record.time[k] - record.time[0],
        });
    }
    Ok(DynamicResponse {
        curve: StressStrainCurve { samples },
        strain_rate: rate,
    })
}

/// Incident-face and transmitted-face specimen stress histories, MPa.
pub fn face_stresses<T: Scalar>(record: &WaveRecord<T>) -> Result<(Vec<T>, Vec<T>)> {
    record.validate()?;
    let spec = record.specimen_checked()?;
    let k = record.bar.area * record.bar.modulus * T::lit(1000.0) / spec.area;
    let (ei, er, et) = (
        &record.incident.strain,
        &record.reflected.strain,
        &record.transmitted.strain,
    );
    let front = (0..record.len()).map(|i| k * (ei[i] + er[i])).collect();
    let back = et.iter().map(|&e| k * e).collect();
    Ok((front, back))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar() -> Bar<f64> {
        Bar { area: 1.9635e-3, wave_speed: 5000.0, modulus: 210.0 }
    }

    #[test]
    fn perfect_transmission() {
        let n = 20;
        let t: Vec<f64> = (0..n).map(|i| i as f64 * 1e-6).collect();
        let e = vec![1e-3; n];
        let spec = Specimen { area: 1.9635e-3 / 2.0, length: 0.025 };
        let rec = WaveRecord::from_strains(t, e.clone(), vec![0.0; n], e, bar(), Some(spec));
        let out = reconstruct_three_wave(&rec).unwrap();
        assert!(out.strain_rate.iter().all(|&r| r == 0.0));
        let want = 1.9635e-3 * 210e3 / spec.area * 1e-3;
        assert!((out.curve.samples[5].stress - want).abs() < 1e-9 * want);
    }

    #[test]
    fn missing_specimen_is_config_error() {
        let rec = WaveRecord::from_strains(vec![0.0, 1.0], vec![0.0; 2], vec![0.0; 2], vec![0.0; 2], bar(), None);
        assert!(matches!(reconstruct_three_wave(&rec), Err(Error::InvalidConfig { .. })));
    }

    #[test]
    fn non_uniform_time_rejected() {
        let rec = WaveRecord::from_strains(vec![0.0, 1.0, 3.0], vec![0.0; 3], vec![0.0; 3], vec![0.0; 3], bar(), None);
        assert!(matches!(rec.validate(), Err(Error::Shape(_))));
    }
}
