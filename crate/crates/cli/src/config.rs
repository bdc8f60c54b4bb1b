//! Flat sectioned `key = value` experiment configs.
//!
//! ```text
//! # comment
//! [packing]
//! model = saturated
//! cylinder_radius = 12
//! ```
//!
//! Keys are unique within a section, unknown keys are rejected, and every
//! error carries the line it came from.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use frostdem::analysis::EnergyMode;
use frostdem::frostheave::{BondAlphaRule, FreezeConfig};
use frostdem::mechanics::{MaterialSet, MechanicalReport, UniaxialConfig};
use frostdem::packing::{PackingConfig, RadiusRange};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub key: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "config: `{}`: {}", self.key, self.reason)
        } else {
            write!(f, "config line {}: `{}`: {}", self.line, self.key, self.reason)
        }
    }
}

fn err(line: usize, key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError { line, key: key.to_string(), reason: reason.into() }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Raw sections as parsed, before typing.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, Entry>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (i, l) in text.lines().enumerate() {
            let line = i + 1;
            let s = l.trim();
            if s.is_empty() || s.starts_with('#') {
                continue;
            }
            if let Some(name) = s.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| err(line, s, "unterminated section header"))?
                    .trim();
                if raw.sections.contains_key(name) {
                    return Err(err(line, name, "duplicate section"));
                }
                raw.sections.insert(name.to_string(), BTreeMap::new());
                current = Some(name.to_string());
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| err(line, s, "expected `key = value`"))?;
            let (k, v) = (k.trim(), v.trim());
            let Some(sec) = current.as_ref() else {
                return Err(err(line, k, "key outside any [section]"));
            };
            let map = raw.sections.get_mut(sec).expect("section exists");
            if map.contains_key(k) {
                return Err(err(line, k, "duplicate key"));
            }
            map.insert(k.to_string(), Entry { value: v.to_string(), line, used: false });
        }
        Ok(raw)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.sections.contains_key(name)
    }

    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.sections.get_mut(section)?.get_mut(key)?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn f64(&mut self, section: &str, key: &str) -> Result<Option<f64>, ConfigError> {
        let Some((v, line)) = self.take(section, key) else { return Ok(None) };
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(Some(x)),
            _ => Err(err(line, key, format!("`{v}` is not a finite number"))),
        }
    }

    fn set_f64(&mut self, section: &str, key: &str, slot: &mut f64) -> Result<(), ConfigError> {
        if let Some(x) = self.f64(section, key)? {
            *slot = x;
        }
        Ok(())
    }

    fn u64(&mut self, section: &str, key: &str) -> Result<Option<u64>, ConfigError> {
        let Some((v, line)) = self.take(section, key) else { return Ok(None) };
        v.parse::<u64>()
            .map(Some)
            .map_err(|_| err(line, key, format!("`{v}` is not a non-negative integer")))
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some((v, line)) = self.take(section, key) else { return Ok(None) };
        v.split(',')
            .map(|t| match t.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(err(line, key, format!("`{}` is not a finite number", t.trim()))),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn path(&mut self, section: &str, key: &str, base: &Path) -> Result<Option<PathBuf>, ConfigError> {
        let Some((v, line)) = self.take(section, key) else { return Ok(None) };
        let p = base.join(&v);
        if !p.is_file() {
            return Err(err(line, key, format!("input file `{}` does not exist", p.display())));
        }
        Ok(Some(p))
    }

    fn choice<'a>(&mut self, section: &str, key: &str, options: &[&'a str]) -> Result<Option<&'a str>, ConfigError> {
        let Some((v, line)) = self.take(section, key) else { return Ok(None) };
        options
            .iter()
            .find(|&&o| o == v)
            .copied()
            .map(Some)
            .ok_or_else(|| err(line, key, format!("`{v}` is not one of {options:?}")))
    }

    fn reject_unused(&self) -> Result<(), ConfigError> {
        for (sec, map) in &self.sections {
            if !KNOWN_SECTIONS.contains(&sec.as_str()) {
                let line = map.values().map(|e| e.line).min().unwrap_or(0);
                return Err(err(line, sec, "unknown section"));
            }
            if let Some((k, e)) = map.iter().filter(|(_, e)| !e.used).min_by_key(|(_, e)| e.line) {
                return Err(err(e.line, k, format!("unknown key in [{sec}]")));
            }
        }
        Ok(())
    }
}

const KNOWN_SECTIONS: [&str; 5] = ["run", "packing", "thermal", "mechanics", "analysis"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Saturated,
    Dry,
}

#[derive(Debug, Clone)]
pub struct PackingSection {
    pub model: Model,
    pub config: PackingConfig<f64>,
}

impl PackingSection {
    pub fn materials(&self) -> MaterialSet<f64> {
        match self.model {
            Model::Saturated => MaterialSet::saturated(),
            Model::Dry => MaterialSet::dry(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MechanicsSection {
    pub uniaxial: UniaxialConfig<f64>,
    pub targets: Option<MechanicalReport<f64>>,
    pub calibration_budget: usize,
}

#[derive(Debug, Clone, Default)]
pub struct AnalysisSection {
    pub waveform: Option<PathBuf>,
    pub energy_mode: EnergyMode,
    pub spectrum: Option<PathBuf>,
    pub baseline_area: Option<f64>,
    pub area_groups: Option<PathBuf>,
    pub rdif_points: Option<PathBuf>,
    /// `(dynamic, static)` strengths, MPa.
    pub strengths: Option<(f64, f64)>,
    pub points: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub packing: Option<PackingSection>,
    pub freeze: FreezeConfig<f64>,
    pub mechanics: MechanicsSection,
    pub analysis: AnalysisSection,
}

/// Boundary stages from 20 °C down to `target`, through the standard 0 / −10 / −20 °C stops.
pub fn stages_to(target: f64) -> Vec<f64> {
    let mut s: Vec<f64> = [20.0, 0.0, -10.0, -20.0].into_iter().filter(|&t| t > target).collect();
    if s.is_empty() {
        s.push(20.0);
    }
    s.push(target);
    s
}

impl ExperimentConfig {
    /// Parses and types a config. Relative input paths resolve against `base`.
    pub fn from_text(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::parse(text)?;

        let seed = raw.u64("run", "seed")?;
        let out = raw.take("run", "out").map(|(v, _)| base.join(v));

        let packing = if raw.has_section("packing") {
            let model = match raw.choice("packing", "model", &["saturated", "dry"])? {
                Some("dry") => Model::Dry,
                _ => Model::Saturated,
            };
            let mut c = PackingConfig::<f64>::desk_scale(12.0, 24.0, 1);
            let p = "packing";
            raw.set_f64(p, "cylinder_radius", &mut c.cylinder_radius)?;
            raw.set_f64(p, "cylinder_height", &mut c.cylinder_height)?;
            raw.set_f64(p, "target_porosity", &mut c.target_porosity)?;
            raw.set_f64(p, "solid_fraction", &mut c.solid_fraction)?;
            raw.set_f64(p, "rock_density", &mut c.rock_density)?;
            raw.set_f64(p, "water_density", &mut c.water_density)?;
            let mut rr = [c.rock_radius.min, c.rock_radius.max];
            let mut wr = [c.water_radius.min, c.water_radius.max];
            raw.set_f64(p, "rock_radius_min", &mut rr[0])?;
            raw.set_f64(p, "rock_radius_max", &mut rr[1])?;
            raw.set_f64(p, "water_radius_min", &mut wr[0])?;
            raw.set_f64(p, "water_radius_max", &mut wr[1])?;
            c.rock_radius = RadiusRange::new(rr[0], rr[1]);
            c.water_radius = RadiusRange::new(wr[0], wr[1]);
            if let Some(s) = raw.u64(p, "seed")? {
                c.rng_seed = s;
            }
            if model == Model::Dry {
                c = c.dry();
            }
            Some(PackingSection { model, config: c })
        } else {
            None
        };

        let mut freeze = FreezeConfig::<f64>::default();
        let t = "thermal";
        let target = raw.f64(t, "target_temp")?;
        let stages = raw.list(t, "stages")?;
        freeze.stages = match (stages, target) {
            (Some(_), Some(_)) => {
                let line = raw.sections[t]["target_temp"].line;
                return Err(err(line, "target_temp", "give either `stages` or `target_temp`, not both"));
            }
            (Some(s), None) => s,
            (None, Some(x)) => stages_to(x),
            (None, None) => freeze.stages,
        };
        raw.set_f64(t, "ramp_rate", &mut freeze.ramp_rate)?;
        raw.set_f64(t, "sync_interval", &mut freeze.sync_interval)?;
        raw.set_f64(t, "hold_duration", &mut freeze.hold_duration)?;
        raw.set_f64(t, "max_hold", &mut freeze.max_hold)?;
        raw.set_f64(t, "boundary_layer", &mut freeze.boundary_layer)?;
        raw.set_f64(t, "equilibrium_tolerance", &mut freeze.equilibrium_tolerance)?;
        raw.set_f64(t, "ice_volume_jump", &mut freeze.ice_volume_jump)?;
        if let Some(n) = raw.u64(t, "max_relax_steps")? {
            freeze.max_relax_steps = n as usize;
        }
        if let Some(r) = raw.choice(t, "bond_alpha", &["colder", "radius_sum", "off"])? {
            freeze.bond_alpha = match r {
                "radius_sum" => BondAlphaRule::RadiusSum,
                "off" => BondAlphaRule::Off,
                _ => BondAlphaRule::Colder,
            };
        }

        let m = "mechanics";
        let mut uniaxial = UniaxialConfig::<f64>::default();
        raw.set_f64(m, "platen_velocity", &mut uniaxial.platen_velocity)?;
        raw.set_f64(m, "target_strain", &mut uniaxial.target_strain)?;
        raw.set_f64(m, "sample_interval", &mut uniaxial.sample_interval)?;
        raw.set_f64(m, "post_peak_fraction", &mut uniaxial.post_peak_fraction)?;
        if let Some(n) = raw.u64(m, "max_steps")? {
            uniaxial.max_steps = n as usize;
        }
        let targets = match (raw.f64(m, "target_peak")?, raw.f64(m, "target_modulus")?) {
            (Some(peak), Some(modulus)) => Some(MechanicalReport {
                peak_strength: peak,
                elastic_modulus: modulus,
                peak_strain: 0.0,
                strain_energy: 0.0,
            }),
            (None, None) => None,
            _ => return Err(err(0, "target_peak", "target_peak and target_modulus go together")),
        };
        let calibration_budget = raw.u64(m, "calibration_budget")?.unwrap_or(20) as usize;

        let a = "analysis";
        let mut analysis = AnalysisSection {
            waveform: raw.path(a, "waveform", base)?,
            spectrum: raw.path(a, "spectrum", base)?,
            baseline_area: raw.f64(a, "baseline_area")?,
            area_groups: raw.path(a, "area_groups", base)?,
            rdif_points: raw.path(a, "rdif_points", base)?,
            points: raw.path(a, "points", base)?,
            ..Default::default()
        };
        if let Some(mode) = raw.choice(a, "energy_mode", &["stress_strain", "conventional"])? {
            analysis.energy_mode = if mode == "conventional" { EnergyMode::Conventional } else { EnergyMode::StressStrain };
        }
        analysis.strengths = match (raw.f64(a, "dynamic_strength")?, raw.f64(a, "static_strength")?) {
            (Some(d), Some(s)) => Some((d, s)),
            (None, None) => None,
            _ => return Err(err(0, "dynamic_strength", "dynamic_strength and static_strength go together")),
        };

        raw.reject_unused()?;
        Ok(Self {
            seed,
            out,
            packing,
            freeze,
            mechanics: MechanicsSection { uniaxial, targets, calibration_budget },
            analysis,
        })
    }

    /// Packing section with the effective seed applied.
    pub fn packing_or_err(&self) -> Result<PackingSection, ConfigError> {
        let mut p = self.packing.clone().ok_or_else(|| err(0, "packing", "section is required for this pipeline"))?;
        if let Some(s) = self.seed {
            p.config.rng_seed = s;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_names_line() {
        let e = ExperimentConfig::from_text("[packing]\nmodel = dry\nbogus = 1\n", Path::new(".")).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.key, "bogus");
    }

    #[test]
    fn target_temp_builds_stages() {
        assert_eq!(stages_to(-10.0), vec![20.0, 0.0, -10.0]);
        assert_eq!(stages_to(-20.0), vec![20.0, 0.0, -10.0, -20.0]);
        assert_eq!(stages_to(-5.0), vec![20.0, 0.0, -5.0]);
    }

    #[test]
    fn bad_number() {
        let e = ExperimentConfig::from_text("[thermal]\nramp_rate = fast\n", Path::new(".")).unwrap_err();
        assert_eq!((e.line, e.key.as_str()), (2, "ramp_rate"));
    }
}
