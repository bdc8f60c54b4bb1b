//! Unconfined uniaxial compression between rigid platens.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mechanics::dynamics::Simulation;
use crate::scalar::{linear_fit, trapezoid, Scalar};

/// Strain window of the elastic-modulus regression.
pub const MODULUS_WINDOW: (f64, f64) = (0.0005, 0.0015);
/// Unbalanced-force ratio required before loading.
pub const EQUILIBRIUM_RATIO: f64 = 1.0e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurveSample<T> {
    /// Axial strain, compression positive.
    pub strain: T,
    /// MPa, compression positive.
    pub stress: T,
    /// s
    pub time: T,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StressStrainCurve<T> {
    pub samples: Vec<CurveSample<T>>,
}

impl<T: Scalar> StressStrainCurve<T> {
    pub fn from_points(points: &[(T, T)]) -> Self {
        Self {
            samples: points
                .iter()
                .map(|&(strain, stress)| CurveSample { strain, stress, time: T::zero() })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_strain(&self) -> T {
        self.samples.iter().map(|s| s.strain).fold(T::neg_infinity(), T::max)
    }

    /// Two columns: strain, stress in MPa.
    pub fn write_table<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# strain stress_MPa")?;
        for s in &self.samples {
            writeln!(w, "{:.9e} {:.9e}", s.strain, s.stress)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MechanicalReport<T> {
    /// MPa
    pub peak_strength: T,
    /// GPa
    pub elastic_modulus: T,
    pub peak_strain: T,
    /// kJ/m³, stress integrated over strain up to the peak.
    pub strain_energy: T,
}

/// Peak, modulus over the fixed strain window, and pre-peak strain energy.
pub fn extract_mechanical_params<T: Scalar>(curve: &StressStrainCurve<T>) -> Result<MechanicalReport<T>> {
    let (lo, hi) = (T::lit(MODULUS_WINDOW.0), T::lit(MODULUS_WINDOW.1));
    if curve.is_empty() || curve.max_strain() < hi {
        return Err(Error::Shape(format!(
            "curve must reach strain {hi} for the modulus window"
        )));
    }
    if curve.samples.iter().any(|s| !(s.stress.is_finite() && s.strain.is_finite())) {
        return Err(Error::Domain("curve contains non-finite samples".into()));
    }
    let (peak_idx, peak) = curve
        .samples
        .iter()
        .enumerate()
        .fold((0, curve.samples[0]), |best, (i, s)| if s.stress > best.1.stress { (i, *s) } else { best });
    if !(peak.stress > T::zero()) {
        return Err(Error::Degenerate("curve never carries compressive stress".into()));
    }
    let (xs, ys): (Vec<T>, Vec<T>) = curve
        .samples
        .iter()
        .filter(|s| s.strain >= lo && s.strain <= hi)
        .map(|s| (s.strain, s.stress))
        .unzip();
    let (_, slope, _) = linear_fit(&xs, &ys)
        .ok_or_else(|| Error::Shape("fewer than two samples inside the modulus window".into()))?;
    let up_to_peak = &curve.samples[..=peak_idx];
    let energy = trapezoid(up_to_peak.iter().map(|s| (s.strain, s.stress)));
    Ok(MechanicalReport {
        peak_strength: peak.stress,
        elastic_modulus: slope / T::lit(1000.0),
        peak_strain: peak.strain,
        strain_energy: energy * T::lit(1000.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniaxialConfig<T> {
    /// Closing speed of the two platens together, mm/s.
    pub platen_velocity: T,
    pub target_strain: T,
    /// Strain between recorded samples.
    pub sample_interval: T,
    /// Loading stops once stress falls below this fraction of the peak.
    pub post_peak_fraction: T,
    pub max_steps: usize,
}

impl<T: Scalar> Default for UniaxialConfig<T> {
    fn default() -> Self {
        Self {
            platen_velocity: T::lit(100.0),
            target_strain: T::lit(0.05),
            sample_interval: T::lit(2.0e-5),
            post_peak_fraction: T::lit(0.6),
            max_steps: 2_000_000,
        }
    }
}

impl<T: Scalar> UniaxialConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.platen_velocity >= T::zero() && self.platen_velocity.is_finite()) {
            return Err(Error::config("platen_velocity", "must be finite and non-negative"));
        }
        if !(self.target_strain > T::zero() && self.target_strain < T::one()) {
            return Err(Error::config("target_strain", "must lie in (0, 1)"));
        }
        if !(self.sample_interval > T::zero() && self.sample_interval <= self.target_strain) {
            return Err(Error::config("sample_interval", "must lie in (0, target_strain]"));
        }
        if !(self.post_peak_fraction >= T::zero() && self.post_peak_fraction < T::one()) {
            return Err(Error::config("post_peak_fraction", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Loads an equilibrated simulation between platens and records the curve.
pub fn run_uniaxial_test<T: Scalar>(sim: &mut Simulation<T>, cfg: &UniaxialConfig<T>) -> Result<StressStrainCurve<T>> {
    cfg.validate()?;
    sim.evaluate_forces();
    let ratio = sim.unbalanced_force_ratio();
    if !(ratio < T::lit(EQUILIBRIUM_RATIO)) {
        return Err(Error::Precondition(format!(
            "assembly not equilibrated: unbalanced-force ratio {ratio:e}"
        )));
    }
    sim.seat_platens(cfg.platen_velocity);
    let h0 = sim.platens().map(|p| p.gap()).unwrap_or(T::one());
    let area = sim.assembly.domain.cross_section();
    let t0 = sim.time;

    let sample = |sim: &Simulation<T>| {
        let p = sim.platens().expect("platens seated");
        CurveSample {
            strain: (h0 - p.gap()) / h0,
            stress: (p.bottom_force + p.top_force) * T::lit(0.5) / area,
            time: sim.time - t0,
        }
    };

    let mut curve = StressStrainCurve { samples: vec![sample(sim)] };
    if cfg.platen_velocity == T::zero() {
        let n = (cfg.target_strain / cfg.sample_interval).ceil().to_usize().unwrap_or(1);
        for _ in 0..n {
            let dt = sim.stable_time_step();
            sim.integrate_step(dt)?;
            curve.samples.push(sample(sim));
        }
        return Ok(curve);
    }

    let mut next = cfg.sample_interval;
    let mut peak = T::zero();
    for _ in 0..cfg.max_steps {
        let dt = sim.stable_time_step();
        sim.integrate_step(dt)?;
        let s = sample(sim);
        if s.strain < next {
            continue;
        }
        curve.samples.push(s);
        next = s.strain + cfg.sample_interval;
        peak = peak.max(s.stress);
        if s.strain >= cfg.target_strain || (peak > T::zero() && s.stress < cfg.post_peak_fraction * peak) {
            break;
        }
    }
    Ok(curve)
}
