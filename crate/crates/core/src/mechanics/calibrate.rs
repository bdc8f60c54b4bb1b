//! Deterministic coordinate-descent calibration of bond micro-parameters
//! against a target peak strength and elastic modulus.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::mechanics::material::BondMaterial;
use crate::mechanics::uniaxial::MechanicalReport;
use crate::scalar::Scalar;

/// Relative error accepted on both peak strength and modulus.
pub const CALIBRATION_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CalibrationRecord<T> {
    /// Adjustment round; 0 is the initial evaluation.
    pub round: usize,
    /// Simulation run index, from 1.
    pub run: usize,
    pub material: BondMaterial<T>,
    pub peak_strength: T,
    pub elastic_modulus: T,
    pub strength_error: T,
    pub modulus_error: T,
}

impl<T: Scalar> CalibrationRecord<T> {
    fn worst_error(&self) -> T {
        self.strength_error.max(self.modulus_error)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalibrationOutcome<T> {
    pub material: BondMaterial<T>,
    pub report: MechanicalReport<T>,
    pub converged: bool,
    /// Adjustment rounds performed.
    pub rounds: usize,
    /// Simulation runs performed.
    pub runs: usize,
    pub audit: Vec<CalibrationRecord<T>>,
}

impl<T: Scalar> CalibrationOutcome<T> {
    pub fn write_audit<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(
            w,
            "# round run E_m_GPa P_be_GPa P_bt_MPa P_bc_MPa peak_MPa modulus_GPa strength_rel_err modulus_rel_err"
        )?;
        for r in &self.audit {
            writeln!(
                w,
                "{} {} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6} {:.6}",
                r.round,
                r.run,
                r.material.contact_modulus,
                r.material.bond_modulus,
                r.material.tensile_strength,
                r.material.cohesion,
                r.peak_strength,
                r.elastic_modulus,
                r.strength_error,
                r.modulus_error
            )?;
        }
        Ok(())
    }
}

fn relative_error<T: Scalar>(sim: T, target: T) -> T {
    ((sim - target) / target).abs()
}

/// Alternately rescales moduli (to match the target modulus) and bond
/// strengths (to match the target peak) until both relative errors are
/// within tolerance or `budget` simulation runs are spent. `simulate` runs one
/// uniaxial test for the given material.
pub fn calibrate<T, F>(
    targets: &MechanicalReport<T>,
    initial: &BondMaterial<T>,
    budget: usize,
    mut simulate: F,
) -> Result<CalibrationOutcome<T>>
where
    T: Scalar,
    F: FnMut(&BondMaterial<T>) -> Result<MechanicalReport<T>>,
{
    if !(targets.peak_strength > T::zero() && targets.elastic_modulus > T::zero()) {
        return Err(Error::config("targets", "peak strength and modulus must be positive"));
    }
    if budget == 0 {
        return Err(Error::config("budget", "at least one simulation run is required"));
    }
    initial.validate()?;
    let tol = T::lit(CALIBRATION_TOLERANCE);
    let mut audit = Vec::new();
    let mut evaluate = |material: BondMaterial<T>, round: usize, audit: &mut Vec<CalibrationRecord<T>>| {
        let report = simulate(&material)?;
        let rec = CalibrationRecord {
            round,
            run: audit.len() + 1,
            material,
            peak_strength: report.peak_strength,
            elastic_modulus: report.elastic_modulus,
            strength_error: relative_error(report.peak_strength, targets.peak_strength),
            modulus_error: relative_error(report.elastic_modulus, targets.elastic_modulus),
        };
        audit.push(rec);
        Ok::<_, Error>((rec, report))
    };

    let (mut current, mut current_report) = evaluate(*initial, 0, &mut audit)?;
    let mut best = (current, current_report);
    let mut rounds = 0;
    let done = |r: &CalibrationRecord<T>| r.strength_error <= tol && r.modulus_error <= tol;

    while !done(&current) && audit.len() < budget {
        rounds += 1;
        if current.modulus_error > tol && current_report.elastic_modulus > T::zero() {
            let f = targets.elastic_modulus / current_report.elastic_modulus;
            (current, current_report) = evaluate(current.material.with_stiffness_scaled(f), rounds, &mut audit)?;
            if current.worst_error() < best.0.worst_error() {
                best = (current, current_report);
            }
            if done(&current) || audit.len() >= budget {
                break;
            }
        }
        if current.strength_error > tol && current_report.peak_strength > T::zero() {
            let g = targets.peak_strength / current_report.peak_strength;
            (current, current_report) = evaluate(current.material.with_strength_scaled(g), rounds, &mut audit)?;
            if current.worst_error() < best.0.worst_error() {
                best = (current, current_report);
            }
        }
    }
    let (rec, report) = if done(&current) { (current, current_report) } else { best };
    Ok(CalibrationOutcome {
        material: rec.material,
        report,
        converged: done(&rec),
        rounds,
        runs: audit.len(),
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Peak proportional to strength, modulus proportional to stiffness.
    fn toy(m: &BondMaterial<f64>) -> Result<MechanicalReport<f64>> {
        Ok(MechanicalReport {
            peak_strength: 1.4 * m.tensile_strength,
            elastic_modulus: 0.4 * m.bond_modulus,
            peak_strain: 0.004,
            strain_energy: 0.0,
        })
    }

    #[test]
    fn fixed_point_takes_no_rounds() {
        let m = BondMaterial::sandstone_rock();
        let t = toy(&m).unwrap();
        let out = calibrate(&t, &m, 5, toy).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds, 0);
        assert_eq!(out.material, m);
    }

    #[test]
    fn proportional_model_converges_in_one_round() {
        let m = BondMaterial::sandstone_rock();
        let t = MechanicalReport { peak_strength: 80.0, elastic_modulus: 5.0, peak_strain: 0.0, strain_energy: 0.0 };
        let out = calibrate(&t, &m, 10, toy).unwrap();
        assert!(out.converged);
        assert_eq!(out.rounds, 1);
        assert_eq!(out.runs, 3);
    }

    #[test]
    fn exhausted_budget_is_flagged() {
        let m = BondMaterial::sandstone_rock();
        let t = MechanicalReport { peak_strength: 80.0, elastic_modulus: 5.0, peak_strain: 0.0, strain_energy: 0.0 };
        let out = calibrate(&t, &m, 1, toy).unwrap();
        assert!(!out.converged);
        assert_eq!(out.runs, 1);
    }
}
