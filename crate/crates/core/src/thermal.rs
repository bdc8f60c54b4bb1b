//! Inter-particle heat conduction and the liquid/ice state of pore water.
//!
//! Particle geometry comes in millimetres; conduction itself is evaluated in
//! SI units (kg, m², m, W) so material constants enter unconverted.

use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::packing::{detect_contacts, ContactKind, ContactPair, ParticleAssembly, Phase};
use crate::scalar::Scalar;

const MM: f64 = 1.0e-3;
const MM3_TO_M3: f64 = 1.0e-9;

/// Interior-to-boundary deviation below which a field counts as uniform, °C.
pub const UNIFORMITY_LIMIT: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WaterState {
    Water,
    Ice,
}

/// Linear expansion coefficient of liquid water above 0 °C, 1/°C.
pub const ALPHA_WATER: f64 = 1.769e-4;
/// Linear expansion coefficient of ice, 1/°C.
pub const ALPHA_ICE: f64 = 2.079e-4;
/// Linear expansion coefficient of the rock skeleton (quartz), 1/°C.
pub const ALPHA_ROCK: f64 = 0.052e-4;

/// 0 °C itself counts as ice.
pub fn phase_state<T: Scalar>(temperature: T) -> WaterState {
    if temperature > T::zero() {
        WaterState::Water
    } else {
        WaterState::Ice
    }
}

impl WaterState {
    pub fn expansion_coefficient<T: Scalar>(self) -> T {
        match self {
            WaterState::Water => T::lit(ALPHA_WATER),
            WaterState::Ice => T::lit(ALPHA_ICE),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalProperties<T> {
    /// W/(m·K)
    pub conductivity: T,
    /// J/(kg·°C)
    pub heat_capacity: T,
    /// °C·cm/W. Carried for reference; conduction uses `conductivity`.
    pub thermal_resistance: T,
    /// 1/°C
    pub expansion_coefficient: T,
}

impl<T: Scalar> ThermalProperties<T> {
    pub fn rock() -> Self {
        Self {
            conductivity: T::lit(7.7),
            heat_capacity: T::lit(877.0),
            thermal_resistance: T::lit(2.58),
            expansion_coefficient: T::lit(ALPHA_ROCK),
        }
    }

    pub fn ice() -> Self {
        Self {
            conductivity: T::lit(2.2),
            heat_capacity: T::lit(4215.0),
            thermal_resistance: T::lit(1.0),
            expansion_coefficient: T::lit(ALPHA_ICE),
        }
    }

    pub fn liquid_water() -> Self {
        Self {
            conductivity: T::lit(0.6),
            heat_capacity: T::lit(4215.0),
            thermal_resistance: T::lit(1.0),
            expansion_coefficient: T::lit(ALPHA_WATER),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.conductivity > T::zero()) {
            return Err(Error::config("conductivity", "must be positive"));
        }
        if !(self.heat_capacity > T::zero()) {
            return Err(Error::config("heat_capacity", "must be positive"));
        }
        if !(self.expansion_coefficient > T::zero()) {
            return Err(Error::config("expansion_coefficient", "must be positive"));
        }
        Ok(())
    }
}

/// Per-phase thermal properties; water switches between its liquid and ice
/// rows with temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalModel<T> {
    pub rock: ThermalProperties<T>,
    pub water: ThermalProperties<T>,
    pub ice: ThermalProperties<T>,
}

impl<T: Scalar> Default for ThermalModel<T> {
    fn default() -> Self {
        Self {
            rock: ThermalProperties::rock(),
            water: ThermalProperties::liquid_water(),
            ice: ThermalProperties::ice(),
        }
    }
}

impl<T: Scalar> ThermalModel<T> {
    pub fn properties(&self, phase: Phase, temperature: T) -> &ThermalProperties<T> {
        match (phase, phase_state(temperature)) {
            (Phase::Rock, _) => &self.rock,
            (Phase::Water, WaterState::Water) => &self.water,
            (Phase::Water, WaterState::Ice) => &self.ice,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rock.validate()?;
        self.water.validate()?;
        self.ice.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundarySchedule<T> {
    /// °C
    pub start_temp: T,
    /// °C
    pub target_temp: T,
    /// °C/min
    pub ramp_rate: T,
    /// s
    pub hold_duration: T,
}

impl<T: Scalar> BoundarySchedule<T> {
    /// 20 °C down to `target` at 1 °C/min, then a 48 h hold.
    pub fn chamber(target: T) -> Self {
        Self {
            start_temp: T::lit(20.0),
            target_temp: target,
            ramp_rate: T::one(),
            hold_duration: T::lit(48.0 * 3600.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ramp_rate > T::zero()) {
            return Err(Error::config("ramp_rate", "must be positive"));
        }
        if !(self.hold_duration >= T::zero()) {
            return Err(Error::config("hold", "must be non-negative"));
        }
        if !(self.start_temp.is_finite() && self.target_temp.is_finite()) {
            return Err(Error::config("target_temp", "temperatures must be finite"));
        }
        Ok(())
    }

    /// Seconds spent ramping.
    pub fn ramp_duration(&self) -> T {
        (self.target_temp - self.start_temp).abs() / self.ramp_rate * T::lit(60.0)
    }

    pub fn total_duration(&self) -> T {
        self.ramp_duration() + self.hold_duration
    }
}

/// Boundary temperature at `t` seconds: linear ramp, then constant.
pub fn schedule_temperature<T: Scalar>(schedule: &BoundarySchedule<T>, t: T) -> T {
    let t = t.max(T::zero());
    let ramp = schedule.ramp_duration();
    if t >= ramp {
        return schedule.target_temp;
    }
    let step = schedule.ramp_rate * t / T::lit(60.0);
    if schedule.target_temp < schedule.start_temp {
        schedule.start_temp - step
    } else {
        schedule.start_temp + step
    }
}

/// Heat flow along a conduction path: `-k · A · ΔT / Δx`.
#[inline]
pub fn heat_flux<T: Scalar>(conductivity: T, area: T, delta_t: T, distance: T) -> T {
    -conductivity * area * delta_t / distance
}

#[derive(Clone, Debug, PartialEq)]
pub struct TemperatureField<T> {
    /// °C, indexed by particle id.
    pub temperatures: Vec<T>,
    /// Sorted ids pinned to `boundary_temperature`.
    pub boundary: Vec<usize>,
    pub boundary_temperature: T,
    /// s
    pub time: T,
}

impl<T: Scalar> TemperatureField<T> {
    /// Insulated field: no pinned particles.
    pub fn uniform(n: usize, temperature: T) -> Self {
        Self {
            temperatures: vec![temperature; n],
            boundary: Vec::new(),
            boundary_temperature: temperature,
            time: T::zero(),
        }
    }

    /// Pins every particle that reaches within `layer` of the top or bottom face.
    pub fn with_end_faces(assembly: &ParticleAssembly<T>, temperature: T, layer: T) -> Self {
        let h = assembly.domain.height;
        let boundary = assembly
            .particles
            .iter()
            .filter(|p| p.center.z - p.radius <= layer || h - p.center.z - p.radius <= layer)
            .map(|p| p.id)
            .collect();
        Self {
            temperatures: vec![temperature; assembly.len()],
            boundary,
            boundary_temperature: temperature,
            time: T::zero(),
        }
    }

    pub fn set_boundary_temperature(&mut self, t: T) {
        self.boundary_temperature = t;
        for &i in &self.boundary {
            self.temperatures[i] = t;
        }
    }

    pub fn is_boundary(&self, id: usize) -> bool {
        self.boundary.binary_search(&id).is_ok()
    }

    pub fn min_max(&self) -> (T, T) {
        self.temperatures
            .iter()
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), &t| (lo.min(t), hi.max(t)))
    }

    /// Σ m·C_v·T in joules (relative to 0 °C).
    pub fn thermal_energy(&self, assembly: &ParticleAssembly<T>, model: &ThermalModel<T>) -> T {
        assembly
            .particles
            .iter()
            .zip(&self.temperatures)
            .map(|(p, &t)| particle_mass_kg(p.density, p.radius) * model.properties(p.phase, t).heat_capacity * t)
            .sum()
    }

    pub fn write_snapshot<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# temperature field t={:.6}", self.time)?;
        writeln!(w, "# id temperature boundary")?;
        for (i, t) in self.temperatures.iter().enumerate() {
            writeln!(w, "{} {:.9} {}", i, t, u8::from(self.is_boundary(i)))?;
        }
        Ok(())
    }
}

/// Conduction paths: every pair within `tolerance`, plus the shortest bridge
/// from each disconnected cluster to the rest so heat reaches every particle.
pub fn conduction_paths<T: Scalar>(assembly: &ParticleAssembly<T>, tolerance: T) -> Vec<ContactPair<T>> {
    let mut paths = detect_contacts(assembly, tolerance);
    let n = assembly.len();
    if n < 2 {
        return paths;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for c in &paths {
        let (ra, rb) = (find(&mut parent, c.particle_a), find(&mut parent, c.particle_b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let ps = &assembly.particles;
    loop {
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        let mut sizes = vec![0usize; n];
        for &r in &roots {
            sizes[r] += 1;
        }
        let main = (0..n).max_by_key(|&r| (sizes[r], std::cmp::Reverse(r))).unwrap_or(0);
        let Some(stray) = (0..n).find(|&i| roots[i] != main) else {
            break;
        };
        let cluster = roots[stray];
        let mut best: Option<(T, usize, usize)> = None;
        for i in (0..n).filter(|&i| roots[i] == cluster) {
            for j in (0..n).filter(|&j| roots[j] != cluster) {
                let gap = (ps[j].center - ps[i].center).norm() - ps[i].radius - ps[j].radius;
                if best.is_none_or(|(g, _, _)| gap < g) {
                    best = Some((gap, i.min(j), i.max(j)));
                }
            }
        }
        let Some((gap, a, b)) = best else { break };
        paths.push(ContactPair {
            particle_a: a,
            particle_b: b,
            kind: ContactKind::from_phases(ps[a].phase, ps[b].phase),
            gap,
        });
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra.max(rb)] = ra.min(rb);
    }
    paths.sort_by_key(|c| (c.particle_a, c.particle_b));
    paths
}

pub(crate) fn particle_mass_kg<T: Scalar>(density: T, radius_mm: T) -> T {
    density * crate::packing::sphere_volume(radius_mm) * T::lit(MM3_TO_M3)
}

#[derive(Clone, Copy, Debug)]
struct Link<T> {
    a: usize,
    b: usize,
    /// m²
    area: T,
    /// m
    distance: T,
}

/// Precomputed conduction geometry for one assembly and contact set.
#[derive(Clone, Debug)]
pub struct ThermalNetwork<T> {
    links: Vec<Link<T>>,
    mass: Vec<T>,
    phase: Vec<Phase>,
    model: ThermalModel<T>,
    heat: Vec<T>,
}

#[inline]
fn harmonic_mean<T: Scalar>(a: T, b: T) -> T {
    T::lit(2.0) * a * b / (a + b)
}

impl<T: Scalar> ThermalNetwork<T> {
    pub fn new(assembly: &ParticleAssembly<T>, contacts: &[ContactPair<T>], model: ThermalModel<T>) -> Self {
        let ps = &assembly.particles;
        let links = contacts
            .iter()
            .map(|c| {
                let (pa, pb) = (&ps[c.particle_a], &ps[c.particle_b]);
                let r = pa.radius.min(pb.radius) * T::lit(MM);
                Link {
                    a: c.particle_a,
                    b: c.particle_b,
                    area: T::PI() * r * r,
                    distance: (pb.center - pa.center).norm() * T::lit(MM),
                }
            })
            .collect();
        Self {
            links,
            mass: ps.iter().map(|p| particle_mass_kg(p.density, p.radius)).collect(),
            phase: ps.iter().map(|p| p.phase).collect(),
            model,
            heat: vec![T::zero(); ps.len()],
        }
    }

    fn capacity(&self, i: usize, t: T) -> T {
        self.mass[i] * self.model.properties(self.phase[i], t).heat_capacity
    }

    fn conductance(&self, link: &Link<T>, temps: &[T]) -> T {
        let ka = self.model.properties(self.phase[link.a], temps[link.a]).conductivity;
        let kb = self.model.properties(self.phase[link.b], temps[link.b]).conductivity;
        harmonic_mean(ka, kb) * link.area / link.distance
    }

    /// Largest stable explicit step for the current field, s.
    ///
    /// Bounded both per contact, `0.25 · C·Δx/(k·A)`, and per particle,
    /// `C / Σ G`, the latter keeping every update a convex combination of
    /// neighbour temperatures.
    pub fn stable_time_step(&self, field: &TemperatureField<T>) -> T {
        let temps = &field.temperatures;
        let mut g_sum = vec![T::zero(); self.mass.len()];
        let mut per_contact = T::infinity();
        for l in &self.links {
            let g = self.conductance(l, temps);
            let c = self.capacity(l.a, temps[l.a]).min(self.capacity(l.b, temps[l.b]));
            per_contact = per_contact.min(T::lit(0.25) * c / g);
            g_sum[l.a] += g;
            g_sum[l.b] += g;
        }
        let per_particle = g_sum
            .iter()
            .enumerate()
            .filter(|(_, g)| **g > T::zero())
            .map(|(i, &g)| self.capacity(i, temps[i]) / g)
            .fold(T::infinity(), T::min);
        per_contact.min(per_particle)
    }

    /// One explicit step in place. Boundary particles are re-pinned after the update.
    pub fn step(&mut self, field: &mut TemperatureField<T>, dt: T) -> Result<()> {
        let limit = self.stable_time_step(field);
        if !(dt <= limit) {
            return Err(Error::Unstable {
                what: "heat conduction",
                dt: dt.as_f64(),
                limit: limit.as_f64(),
            });
        }
        self.apply(field, dt);
        Ok(())
    }

    /// Steps by `min(max_dt, stable limit)` and returns the step taken.
    pub(crate) fn step_within(&mut self, field: &mut TemperatureField<T>, max_dt: T) -> T {
        let dt = max_dt.min(self.stable_time_step(field));
        self.apply(field, dt);
        dt
    }

    fn apply(&mut self, field: &mut TemperatureField<T>, dt: T) {
        self.heat.iter_mut().for_each(|h| *h = T::zero());
        {
            let temps = &field.temperatures;
            for l in &self.links {
                let g = self.conductance(l, temps);
                // Heat carried from a to b over dt.
                let q = g * (temps[l.a] - temps[l.b]) * dt;
                self.heat[l.a] -= q;
                self.heat[l.b] += q;
            }
        }
        for i in 0..field.temperatures.len() {
            let c = self.capacity(i, field.temperatures[i]);
            field.temperatures[i] += self.heat[i] / c;
        }
        let tb = field.boundary_temperature;
        for &i in &field.boundary {
            field.temperatures[i] = tb;
        }
        field.time += dt;
    }
}

/// Functional form of [`ThermalNetwork::step`].
pub fn conduction_step<T: Scalar>(
    assembly: &ParticleAssembly<T>,
    field: &TemperatureField<T>,
    contacts: &[ContactPair<T>],
    dt: T,
    model: &ThermalModel<T>,
) -> Result<TemperatureField<T>> {
    let mut net = ThermalNetwork::new(assembly, contacts, *model);
    let mut next = field.clone();
    net.step(&mut next, dt)?;
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformityReport<T> {
    /// max |T_interior - T_boundary|, °C
    pub max_deviation: T,
    pub passes: bool,
}

/// Largest interior deviation from the boundary temperature.
pub fn uniformity_report<T: Scalar>(field: &TemperatureField<T>) -> Result<UniformityReport<T>> {
    if field.boundary.is_empty() || field.boundary.len() == field.temperatures.len() {
        return Err(Error::Precondition(
            "uniformity needs both boundary and interior particles".into(),
        ));
    }
    let tb = field.boundary_temperature;
    let max_deviation = field
        .temperatures
        .iter()
        .enumerate()
        .filter(|(i, _)| !field.is_boundary(*i))
        .map(|(_, &t)| (t - tb).abs())
        .fold(T::zero(), T::max);
    Ok(UniformityReport {
        max_deviation,
        passes: max_deviation < T::lit(UNIFORMITY_LIMIT),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::{ContactKind, Cylinder, Particle};
    use crate::Vec3;

    fn pair(ta: f64, tb: f64) -> (ParticleAssembly<f64>, Vec<ContactPair<f64>>, TemperatureField<f64>) {
        let a = ParticleAssembly {
            particles: vec![
                Particle { id: 0, center: Vec3::new(0.0, 0.0, 5.0), radius: 1.1, phase: Phase::Rock, density: 2600.0 },
                Particle { id: 1, center: Vec3::new(2.0, 0.0, 5.0), radius: 0.9, phase: Phase::Water, density: 960.0 },
            ],
            bonds: vec![],
            domain: Cylinder { radius: 10.0, height: 10.0 },
        };
        let c = vec![ContactPair { particle_a: 0, particle_b: 1, kind: ContactKind::RockWater, gap: 0.0 }];
        let mut f = TemperatureField::uniform(2, ta);
        f.temperatures[1] = tb;
        (a, c, f)
    }

    #[test]
    fn schedule_examples() {
        let s = BoundarySchedule::chamber(-20.0f64);
        assert_eq!(schedule_temperature(&s, 0.0), 20.0);
        assert_eq!(schedule_temperature(&s, 40.0 * 60.0), -20.0);
        assert_eq!(schedule_temperature(&s, 48.0 * 3600.0), -20.0);
        assert!((schedule_temperature(&s, 600.0) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn warming_schedule_ramps_up() {
        let s = BoundarySchedule { start_temp: -10.0f64, target_temp: 5.0, ramp_rate: 2.0, hold_duration: 0.0 };
        assert!((schedule_temperature(&s, 60.0) + 8.0).abs() < 1e-12);
        assert_eq!(schedule_temperature(&s, 1e6), 5.0);
    }

    #[test]
    fn phase_state_examples() {
        assert_eq!(phase_state(20.0f64), WaterState::Water);
        assert_eq!(phase_state(-10.0f64), WaterState::Ice);
        assert_eq!(phase_state(0.0f64), WaterState::Ice);
        assert_eq!(WaterState::Water.expansion_coefficient::<f64>(), 1.769e-4);
        assert_eq!(WaterState::Ice.expansion_coefficient::<f64>(), 2.079e-4);
    }

    #[test]
    fn unit_flux() {
        assert_eq!(heat_flux(1.0f64, 1.0, 1.0, 1.0), -1.0);
    }

    #[test]
    fn uniform_field_is_unchanged() {
        let (a, c, _) = pair(0.0, 0.0);
        let f = TemperatureField::uniform(2, 7.5);
        let m = ThermalModel::default();
        let dt = ThermalNetwork::new(&a, &c, m).stable_time_step(&f);
        let g = conduction_step(&a, &f, &c, dt, &m).unwrap();
        assert_eq!(g.temperatures, f.temperatures);
    }

    #[test]
    fn too_large_step_is_rejected() {
        let (a, c, f) = pair(10.0, 5.0);
        let m = ThermalModel::default();
        let dt = ThermalNetwork::new(&a, &c, m).stable_time_step(&f);
        let err = conduction_step(&a, &f, &c, dt * 1.01, &m).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
    }

    #[test]
    fn uniformity_needs_interior_and_boundary() {
        let f = TemperatureField::uniform(3, 1.0f64);
        assert!(uniformity_report(&f).is_err());
        let mut f = f;
        f.boundary = vec![0];
        let r = uniformity_report(&f).unwrap();
        assert_eq!(r.max_deviation, 0.0);
        assert!(r.passes);
        f.set_boundary_temperature(-5.0);
        assert!(uniformity_report(&f).unwrap().max_deviation > 0.0);
    }
}
