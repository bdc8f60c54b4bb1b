use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use frostdem::analysis::{self, io as aio, BoxScales};
use frostdem::frostheave::run_freeze;
use frostdem::mechanics::{
    calibrate, extract_mechanical_params, run_uniaxial_test, BondMaterial, DynamicsParams, MaterialSet,
    MechanicalReport, Simulation, StressStrainCurve, UniaxialConfig, EQUILIBRIUM_RATIO,
};
use frostdem::packing::{generate_packing, ParticleAssembly};
use frostdem::Error;

use crate::artifacts::RunDir;
use crate::config::{ConfigError, ExperimentConfig};

pub enum RunError {
    Config(ConfigError),
    Input { path: PathBuf, error: Error },
    Read { path: PathBuf, error: io::Error },
    Core(Error),
    Write(io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Input { .. } | RunError::Read { .. } => 3,
            RunError::Core(e) => match e {
                Error::InvalidConfig { .. } | Error::PackingInfeasible { .. } | Error::Precondition(_) => 2,
                Error::Parse { .. } | Error::Shape(_) | Error::Empty(_) => 3,
                _ => 4,
            },
            RunError::Write(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Input { path, error } => write!(f, "{}: {error}", path.display()),
            RunError::Read { path, error } => write!(f, "{}: {error}", path.display()),
            RunError::Core(e) => write!(f, "{e}"),
            RunError::Write(e) => write!(f, "writing artifacts: {e}"),
        }
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl From<io::Error> for RunError {
    fn from(e: io::Error) -> Self {
        RunError::Write(e)
    }
}

fn read_input<T>(path: &Path, parse: impl FnOnce(&str) -> frostdem::Result<T>) -> Result<T, RunError> {
    let text = fs::read_to_string(path).map_err(|error| RunError::Read { path: path.to_path_buf(), error })?;
    parse(&text).map_err(|error| RunError::Input { path: path.to_path_buf(), error })
}

pub fn run_freeze_experiment(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<(), RunError> {
    let p = cfg.packing_or_err()?;
    let assembly = generate_packing(&p.config)?;
    dir.write("packing.txt", |w| assembly.write_snapshot(w))?;
    let mut sim = Simulation::bonded(assembly, p.materials(), DynamicsParams::default())?;
    let out = run_freeze(&mut sim, &cfg.freeze)?;
    dir.write("contact_stats.txt", |w| out.write_stats_table(w))?;
    dir.write("stages.txt", |w| {
        writeln!(w, "# temperature_C time_s max_deviation_C uniform relaxed broken_bonds max_contact_force_N contact_pair_count contact_volume_mm3")?;
        for s in &out.stages {
            writeln!(
                w,
                "{} {:.3} {:.6e} {} {} {} {:.9e} {} {:.9e}",
                s.temperature,
                s.time,
                s.max_deviation,
                s.uniform,
                s.relaxed,
                s.broken_bonds,
                s.stats.max_contact_force,
                s.stats.contact_pair_count,
                s.stats.contact_volume
            )?;
        }
        Ok(())
    })?;
    dir.write("cracks.txt", |w| sim.cracks.write_table(w))?;
    dir.write("temperature_field.txt", |w| out.field.write_snapshot(w))?;
    Ok(())
}

/// Equilibrates a fresh bonded simulation and loads it to failure.
pub fn uniaxial_run(
    assembly: &ParticleAssembly<f64>,
    materials: MaterialSet<f64>,
    cfg: &UniaxialConfig<f64>,
) -> frostdem::Result<(MechanicalReport<f64>, StressStrainCurve<f64>)> {
    let mut sim = Simulation::bonded(assembly.clone(), materials, DynamicsParams::default())?;
    sim.equilibrate(0.5 * EQUILIBRIUM_RATIO, 500_000)?;
    sim.freeze_motion();
    let curve = run_uniaxial_test(&mut sim, cfg)?;
    Ok((extract_mechanical_params(&curve)?, curve))
}

pub fn run_compression_experiment(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<(), RunError> {
    let p = cfg.packing_or_err()?;
    let assembly = generate_packing(&p.config)?;
    let base = p.materials();
    let mcfg = &cfg.mechanics;

    let (report, curve) = match &mcfg.targets {
        None => uniaxial_run(&assembly, base, &mcfg.uniaxial)?,
        Some(targets) => {
            let mut curves: Vec<(BondMaterial<f64>, MechanicalReport<f64>, StressStrainCurve<f64>)> = Vec::new();
            let outcome = calibrate(targets, &base.rock_rock, mcfg.calibration_budget, |m| {
                let (r, c) = uniaxial_run(&assembly, base.rescaled_to(*m), &mcfg.uniaxial)?;
                curves.push((*m, r, c));
                Ok(r)
            })?;
            dir.write("calibration.txt", |w| outcome.write_audit(w))?;
            dir.write("calibration_summary.txt", |w| {
                let rec = outcome.audit.iter().find(|r| r.material == outcome.material).expect("chosen run is audited");
                writeln!(w, "converged = {}", outcome.converged)?;
                writeln!(w, "rounds = {}", outcome.rounds)?;
                writeln!(w, "runs = {}", outcome.runs)?;
                writeln!(w, "target_peak_MPa = {:.6}", targets.peak_strength)?;
                writeln!(w, "target_modulus_GPa = {:.6}", targets.elastic_modulus)?;
                writeln!(w, "strength_rel_err = {:.6}", rec.strength_error)?;
                writeln!(w, "modulus_rel_err = {:.6}", rec.modulus_error)
            })?;
            let (_, r, c) = curves
                .into_iter()
                .rev()
                .find(|(m, _, _)| *m == outcome.material)
                .expect("chosen material was simulated");
            (r, c)
        }
    };
    dir.write("curve.txt", |w| curve.write_table(w))?;
    dir.write("report.txt", |w| {
        writeln!(w, "peak_MPa = {:.9e}", report.peak_strength)?;
        writeln!(w, "modulus_GPa = {:.9e}", report.elastic_modulus)?;
        writeln!(w, "peak_strain = {:.9e}", report.peak_strain)?;
        writeln!(w, "strain_energy_kJ_m3 = {:.9e}", report.strain_energy)
    })?;
    Ok(())
}

pub fn run_analysis(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<(), RunError> {
    let a = &cfg.analysis;
    let mut did = false;

    if let Some(path) = &a.waveform {
        did = true;
        let rec = read_input(path, aio::parse_wave_table::<f64>)?;
        let e = analysis::compute_energies_with(&rec, a.energy_mode)?;
        dir.write("energy.txt", |w| e.write_report(w))?;
        if rec.specimen.is_some() {
            let resp = analysis::reconstruct_three_wave(&rec)?;
            dir.write("three_wave.txt", |w| {
                writeln!(w, "# time_s strain stress_MPa strain_rate_per_s")?;
                for (s, r) in resp.curve.samples.iter().zip(&resp.strain_rate) {
                    writeln!(w, "{:.9e} {:.9e} {:.9e} {:.9e}", s.time, s.strain, s.stress, r)?;
                }
                Ok(())
            })?;
        }
    }
    if let Some(path) = &a.spectrum {
        did = true;
        let spec = read_input(path, aio::parse_pairs::<f64>)?;
        let s = analysis::t2_spectrum_stats(&spec, a.baseline_area)?;
        dir.write("t2.txt", |w| {
            writeln!(w, "peak1_pct = {:.6}", s.peak_pct[0])?;
            writeln!(w, "peak2_pct = {:.6}", s.peak_pct[1])?;
            writeln!(w, "peak3_pct = {:.6}", s.peak_pct[2])?;
            writeln!(w, "area = {:.6}", s.area)?;
            match s.change_rate_pct {
                Some(c) => writeln!(w, "change_rate_pct = {c:.6}"),
                None => Ok(()),
            }
        })?;
    }
    if let Some(path) = &a.area_groups {
        did = true;
        let groups = read_input(path, aio::parse_area_groups::<f64>)?;
        let areas: Vec<Vec<f64>> = groups.iter().map(|g| g.1.clone()).collect();
        let stats = analysis::group_area_statistics(&areas)?;
        dir.write("t2_groups.txt", |w| {
            writeln!(w, "# group mean_area change_rate_pct")?;
            for ((label, _), s) in groups.iter().zip(&stats) {
                writeln!(w, "{label} {:.6} {:.6}", s.mean_area, s.change_rate_pct)?;
            }
            Ok(())
        })?;
    }
    if let Some((d, s)) = a.strengths {
        did = true;
        let r = analysis::compute_rdif(d, s)?;
        dir.write("rdif.txt", |w| writeln!(w, "rdif = {r:.9}"))?;
    }
    if let Some(path) = &a.rdif_points {
        did = true;
        let pts = read_input(path, aio::parse_pairs::<f64>)?;
        let m = analysis::fit_rdif_model(&pts)?;
        dir.write("rdif_fit.txt", |w| {
            writeln!(w, "k = {:.9e}", m.k)?;
            writeln!(w, "m = {:.9e}", m.m)?;
            writeln!(w, "residual = {:.3e}", m.residual)?;
            writeln!(w, "degenerate = {}", m.degenerate)?;
            let ex: Vec<String> = m.excluded.iter().map(|i| i.to_string()).collect();
            writeln!(w, "excluded = {}", ex.join(","))
        })?;
    }
    if let Some(path) = &a.points {
        did = true;
        let pts = read_input(path, aio::parse_points::<f64>)?;
        let d = analysis::box_counting_dimension(&pts, BoxScales::Auto)?;
        dir.write("fractal.txt", |w| {
            writeln!(w, "D = {:.6}", d.dimension)?;
            writeln!(w, "r_squared = {:.6}", d.r_squared)?;
            writeln!(w, "# box_size occupied")?;
            for (eps, n) in &d.counts {
                writeln!(w, "{eps:.9e} {n}")?;
            }
            Ok(())
        })?;
    }
    if !did {
        return Err(RunError::Config(ConfigError {
            line: 0,
            key: "analysis".into(),
            reason: "no analysis inputs given".into(),
        }));
    }
    Ok(())
}
