//! Explicit central-difference dynamics of a bonded sphere assembly.
//!
//! Unit system: mm, N, MPa, tonne, s. Densities arrive in kg/m³ and are
//! converted on construction.

use crate::error::{Error, Result};
use crate::frostheave::{CrackEvent, CrackLog};
use crate::mechanics::bond::{failure_mode, BondAreaRule, BondIncrement, BondState, GPA};
use crate::mechanics::material::MaterialSet;
use crate::packing::{default_contact_tolerance, sphere_volume, ContactKind, ParticleAssembly};
use crate::scalar::{Scalar, Vec3};
use crate::spatial::CellGrid;

/// kg/m³ to t/mm³.
const DENSITY_TO_T_PER_MM3: f64 = 1.0e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsParams<T> {
    /// Local non-viscous damping coefficient.
    pub local_damping: T,
    /// Fraction of `√(m/k)` used as the time step.
    pub timestep_safety: T,
    /// Include bond moments in bond peak stresses.
    pub bending: bool,
    pub bond_area: BondAreaRule,
    /// Extra reach of the neighbour list, mm.
    pub neighbor_margin: T,
}

impl<T: Scalar> Default for DynamicsParams<T> {
    fn default() -> Self {
        Self {
            local_damping: T::lit(0.7),
            timestep_safety: T::lit(0.8),
            bending: true,
            bond_area: BondAreaRule::SumOfRadii,
            neighbor_margin: T::lit(0.2),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LinearContact<T> {
    /// N, compression positive.
    pub normal_force: T,
    /// N, acting on `b`.
    pub shear_force: Vec3<T>,
}

/// A neighbour pair: linear frictional contact plus optional parallel bond.
#[derive(Clone, Debug, PartialEq)]
pub struct Contact<T> {
    pub a: usize,
    pub b: usize,
    pub kind: ContactKind,
    pub linear: LinearContact<T>,
    pub bond: Option<BondState<T>>,
    /// Surface overlap at the last force evaluation, mm.
    pub overlap: T,
}

impl<T: Scalar> Contact<T> {
    pub fn intact_bond(&self) -> Option<&BondState<T>> {
        self.bond.as_ref().filter(|b| b.is_intact())
    }

    /// Transmits force: touching or held by an intact bond.
    pub fn is_active(&self) -> bool {
        self.overlap > T::zero() || self.intact_bond().is_some()
    }

    /// Linear plus bond normal force, compression positive.
    pub fn normal_force(&self) -> T {
        self.linear.normal_force + self.intact_bond().map_or(T::zero(), |b| b.normal_force)
    }

    pub fn shear_force(&self) -> Vec3<T> {
        self.linear.shear_force + self.intact_bond().map_or(Vec3::zero(), |b| b.shear_force)
    }

    /// Magnitude of the full contact force vector.
    pub fn force_magnitude(&self) -> T {
        let n = self.normal_force();
        (n * n + self.shear_force().norm_squared()).sqrt()
    }
}

/// Rigid loading platens normal to `z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Platens<T> {
    /// z of the bottom platen face, mm.
    pub bottom: T,
    /// z of the top platen face, mm.
    pub top: T,
    /// Closing speed, mm/s; each platen moves at half of it.
    pub velocity: T,
    /// Force on the bottom platen at the last evaluation, N.
    pub bottom_force: T,
    pub top_force: T,
}

impl<T: Scalar> Platens<T> {
    pub fn gap(&self) -> T {
        self.top - self.bottom
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Equilibrium<T> {
    pub steps: usize,
    pub ratio: T,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Simulation<T> {
    pub assembly: ParticleAssembly<T>,
    pub materials: MaterialSet<T>,
    pub params: DynamicsParams<T>,
    pub time: T,
    pub cracks: CrackLog<T>,
    velocity: Vec<Vec3<T>>,
    spin: Vec<Vec3<T>>,
    force: Vec<Vec3<T>>,
    torque: Vec<Vec3<T>>,
    mass: Vec<T>,
    inertia: Vec<T>,
    contacts: Vec<Contact<T>>,
    platens: Option<Platens<T>>,
    ref_positions: Vec<Vec3<T>>,
    ref_radii: Vec<T>,
    dt_limit: Option<T>,
    unbalanced_sum: T,
    contact_force_sum: T,
    active_contacts: usize,
}

impl<T: Scalar> Simulation<T> {
    /// Builds the dynamic state; every pair in `assembly.bonds` gets an intact,
    /// unloaded parallel bond.
    pub fn new(assembly: ParticleAssembly<T>, materials: MaterialSet<T>, params: DynamicsParams<T>) -> Result<Self> {
        materials.validate()?;
        if !(params.local_damping >= T::zero() && params.local_damping < T::one()) {
            return Err(Error::config("local_damping", "must lie in [0, 1)"));
        }
        if !(params.timestep_safety > T::zero()) {
            return Err(Error::config("timestep_safety", "must be positive"));
        }
        let n = assembly.len();
        let mass: Vec<T> = assembly
            .particles
            .iter()
            .map(|p| p.density * T::lit(DENSITY_TO_T_PER_MM3) * sphere_volume(p.radius))
            .collect();
        let inertia = assembly
            .particles
            .iter()
            .zip(&mass)
            .map(|(p, &m)| T::lit(0.4) * m * p.radius * p.radius)
            .collect();
        let mut sim = Self {
            materials,
            params,
            time: T::zero(),
            cracks: CrackLog::default(),
            velocity: vec![Vec3::zero(); n],
            spin: vec![Vec3::zero(); n],
            force: vec![Vec3::zero(); n],
            torque: vec![Vec3::zero(); n],
            mass,
            inertia,
            contacts: Vec::new(),
            platens: None,
            ref_positions: Vec::new(),
            ref_radii: Vec::new(),
            dt_limit: None,
            unbalanced_sum: T::zero(),
            contact_force_sum: T::zero(),
            active_contacts: 0,
            assembly,
        };
        let mut bonded: Vec<Contact<T>> = Vec::with_capacity(sim.assembly.bonds.len());
        for bref in &sim.assembly.bonds {
            let (pa, pb) = (&sim.assembly.particles[bref.a], &sim.assembly.particles[bref.b]);
            let kind = sim.assembly.contact_kind(bref.a, bref.b);
            let length = (pb.center - pa.center).norm();
            bonded.push(Contact {
                a: bref.a,
                b: bref.b,
                kind,
                linear: LinearContact::default(),
                bond: Some(BondState::new(
                    bref.a,
                    bref.b,
                    kind,
                    pa.radius,
                    pb.radius,
                    length,
                    sim.materials.for_kind(kind),
                    params.bond_area,
                    params.bending,
                )),
                overlap: T::zero(),
            });
        }
        bonded.sort_by_key(|c| (c.a, c.b));
        bonded.dedup_by_key(|c| (c.a, c.b));
        sim.contacts = bonded;
        sim.rebuild_neighbors();
        Ok(sim)
    }

    /// Installs bonds on every pair within the default detection tolerance,
    /// then builds the simulation.
    pub fn bonded(mut assembly: ParticleAssembly<T>, materials: MaterialSet<T>, params: DynamicsParams<T>) -> Result<Self> {
        let tol = default_contact_tolerance(&assembly);
        assembly.install_bonds(tol);
        Self::new(assembly, materials, params)
    }

    pub fn len(&self) -> usize {
        self.assembly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assembly.is_empty()
    }

    pub fn contacts(&self) -> &[Contact<T>] {
        &self.contacts
    }

    pub(crate) fn contacts_mut(&mut self) -> &mut [Contact<T>] {
        &mut self.contacts
    }

    pub fn velocity(&self, i: usize) -> Vec3<T> {
        self.velocity[i]
    }

    pub fn set_velocity(&mut self, i: usize, v: Vec3<T>) {
        self.velocity[i] = v;
    }

    pub fn spin(&self, i: usize) -> Vec3<T> {
        self.spin[i]
    }

    pub fn set_spin(&mut self, i: usize, w: Vec3<T>) {
        self.spin[i] = w;
    }

    /// Particle mass in tonnes.
    pub fn mass(&self, i: usize) -> T {
        self.mass[i]
    }

    pub fn position(&self, i: usize) -> Vec3<T> {
        self.assembly.particles[i].center
    }

    /// Resultant force on a particle at the last evaluation, N.
    pub fn resultant_force(&self, i: usize) -> Vec3<T> {
        self.force[i]
    }

    pub fn platens(&self) -> Option<&Platens<T>> {
        self.platens.as_ref()
    }

    /// Changes a particle radius; mass follows the new volume.
    pub fn set_radius(&mut self, i: usize, radius: T) {
        let p = &mut self.assembly.particles[i];
        p.radius = radius;
        let m = p.density * T::lit(DENSITY_TO_T_PER_MM3) * sphere_volume(radius);
        self.mass[i] = m;
        self.inertia[i] = T::lit(0.4) * m * radius * radius;
        self.dt_limit = None;
    }

    /// Places platens touching the top and bottom of the specimen.
    pub fn seat_platens(&mut self, velocity: T) {
        let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
        for p in &self.assembly.particles {
            lo = lo.min(p.center.z - p.radius);
            hi = hi.max(p.center.z + p.radius);
        }
        if self.assembly.is_empty() {
            lo = T::zero();
            hi = self.assembly.domain.height;
        }
        self.platens = Some(Platens {
            bottom: lo,
            top: hi,
            velocity,
            bottom_force: T::zero(),
            top_force: T::zero(),
        });
        self.dt_limit = None;
    }

    pub fn remove_platens(&mut self) {
        self.platens = None;
        self.dt_limit = None;
    }

    fn linear_stiffness(&self, kind: ContactKind, ra: T, rb: T) -> (T, T) {
        let m = self.materials.for_kind(kind);
        let r = ra.min(rb);
        let kn = m.contact_modulus * T::lit(GPA) * T::PI() * r * r / (ra + rb);
        (kn, kn * m.stiffness_ratio)
    }

    fn platen_stiffness(&self, r: T) -> T {
        self.materials.rock_rock.contact_modulus * T::lit(GPA) * T::PI() * r
    }

    /// Largest stable time step, `safety · min √(m/k)` over translation and rotation.
    pub fn stable_time_step(&mut self) -> T {
        if let Some(dt) = self.dt_limit {
            return dt;
        }
        let n = self.len();
        let mut kt = vec![T::zero(); n];
        let mut kr = vec![T::zero(); n];
        let ps = &self.assembly.particles;
        for c in &self.contacts {
            let (ra, rb) = (ps[c.a].radius, ps[c.b].radius);
            let (kn, ks) = self.linear_stiffness(c.kind, ra, rb);
            let (mut t, mut rot_a, mut rot_b) = (kn + ks, ks * ra * ra, ks * rb * rb);
            if let Some(b) = c.intact_bond() {
                let bn = b.normal_stiffness * b.area;
                let bs = b.shear_stiffness * b.area;
                t += bn + bs;
                let br = b.normal_stiffness * b.inertia + b.shear_stiffness * b.polar_inertia;
                rot_a += bs * ra * ra + br;
                rot_b += bs * rb * rb + br;
            }
            kt[c.a] += t;
            kt[c.b] += t;
            kr[c.a] += rot_a;
            kr[c.b] += rot_b;
        }
        if self.platens.is_some() {
            for (k, p) in kt.iter_mut().zip(ps) {
                *k += self.platen_stiffness(p.radius);
            }
        }
        let mut dt = T::infinity();
        for i in 0..n {
            if kt[i] > T::zero() {
                dt = dt.min((self.mass[i] / kt[i]).sqrt());
            }
            if kr[i] > T::zero() {
                dt = dt.min((self.inertia[i] / kr[i]).sqrt());
            }
        }
        let dt = if dt.is_finite() { dt * self.params.timestep_safety } else { T::lit(1.0e-6) };
        self.dt_limit = Some(dt);
        dt
    }

    fn needs_rebuild(&self) -> bool {
        let half = self.params.neighbor_margin * T::lit(0.5);
        self.assembly
            .particles
            .iter()
            .zip(self.ref_positions.iter().zip(&self.ref_radii))
            .any(|(p, (&x0, &r0))| (p.center - x0).norm() + (p.radius - r0).max(T::zero()) > half)
    }

    /// Refreshes candidate pairs, keeping the state of pairs that survive and
    /// every pair with a bond record.
    fn rebuild_neighbors(&mut self) {
        let ps = &self.assembly.particles;
        let centers: Vec<Vec3<T>> = ps.iter().map(|p| p.center).collect();
        let max_r = ps.iter().map(|p| p.radius).fold(T::zero(), T::max);
        let margin = self.params.neighbor_margin;
        let grid = CellGrid::build(&centers, T::lit(2.0) * max_r + margin);
        let pairs = grid.pairs_within(&centers, |i, j| ps[i].radius + ps[j].radius + margin);

        let old = std::mem::take(&mut self.contacts);
        let mut merged = Vec::with_capacity(pairs.len().max(old.len()));
        let mut oi = old.into_iter().peekable();
        let mut pi = pairs.into_iter().peekable();
        loop {
            let next_old = oi.peek().map(|c| (c.a, c.b));
            let next_new = pi.peek().copied();
            match (next_old, next_new) {
                (None, None) => break,
                (Some(ko), Some(kn)) if ko == kn => {
                    merged.push(oi.next().expect("peeked"));
                    pi.next();
                }
                (Some(ko), Some(kn)) if ko > kn => {
                    pi.next();
                    merged.push(self.fresh_contact(kn.0, kn.1));
                }
                (Some(_), _) => {
                    let c = oi.next().expect("peeked");
                    // Pairs that left the neighbourhood only persist with a bond record.
                    if c.bond.is_some() {
                        merged.push(c);
                    }
                }
                (None, Some(kn)) => {
                    pi.next();
                    merged.push(self.fresh_contact(kn.0, kn.1));
                }
            }
        }
        self.contacts = merged;
        self.ref_positions = centers;
        self.ref_radii = self.assembly.particles.iter().map(|p| p.radius).collect();
        self.dt_limit = None;
    }

    fn fresh_contact(&self, a: usize, b: usize) -> Contact<T> {
        Contact {
            a,
            b,
            kind: self.assembly.contact_kind(a, b),
            linear: LinearContact::default(),
            bond: None,
            overlap: T::zero(),
        }
    }

    /// Force-displacement pass. With `dt = 0` no increments are applied and
    /// only overlap-dependent forces and sums are refreshed.
    fn compute_forces(&mut self, dt: T) {
        for f in &mut self.force {
            *f = Vec3::zero();
        }
        for t in &mut self.torque {
            *t = Vec3::zero();
        }
        let half = T::lit(0.5);
        let mut contact_force_sum = T::zero();
        let mut active = 0usize;
        let ps = &self.assembly.particles;
        for ci in 0..self.contacts.len() {
            let (a, b, kind) = {
                let c = &self.contacts[ci];
                (c.a, c.b, c.kind)
            };
            let (xa, xb) = (ps[a].center, ps[b].center);
            let (ra, rb) = (ps[a].radius, ps[b].radius);
            let d_vec = xb - xa;
            let d = d_vec.norm();
            let n = if d > T::zero() { d_vec / d } else { Vec3::unit_z() };
            let overlap = ra + rb - d;
            let (kn, ks) = self.linear_stiffness(kind, ra, rb);
            let mu = self.materials.for_kind(kind).friction;

            let contact_point = xa + n * (ra - overlap * half);
            let arm_a = contact_point - xa;
            let arm_b = contact_point - xb;
            let v_rel = (self.velocity[b] + self.spin[b].cross(arm_b)) - (self.velocity[a] + self.spin[a].cross(arm_a));
            let vn = v_rel.dot(n);
            let shear_inc = (v_rel - n * vn) * dt;
            let w_rel = self.spin[b] - self.spin[a];
            let wn = w_rel.dot(n);

            let c = &mut self.contacts[ci];
            c.overlap = overlap;
            if overlap > T::zero() {
                c.linear.normal_force = kn * overlap;
                let mut fs = c.linear.shear_force.reject(n) - shear_inc * ks;
                let cap = mu * c.linear.normal_force;
                let mag = fs.norm();
                if mag > cap && mag > T::zero() {
                    fs = fs * (cap / mag);
                }
                c.linear.shear_force = fs;
            } else {
                c.linear = LinearContact::default();
            }

            let mut broke = None;
            if let Some(bond) = c.bond.as_mut().filter(|b| b.is_intact()) {
                bond.align_to(n);
                bond.apply_increment(&BondIncrement {
                    normal: -vn * dt,
                    shear: shear_inc,
                    twist: wn * dt,
                    bend: (w_rel - n * wn) * dt,
                });
                if let Some(mode) = failure_mode(&bond.stresses(), &bond.strength) {
                    bond.break_with(mode);
                    broke = Some(mode);
                }
            }
            if let Some(mode) = broke {
                self.cracks.record(CrackEvent {
                    time: self.time,
                    position: (xa + xb) * half,
                    mode,
                    a,
                    b,
                });
            }

            let c = &self.contacts[ci];
            if !c.is_active() {
                continue;
            }
            let fn_total = c.normal_force();
            let fs_total = c.shear_force();
            let f_on_b = n * fn_total + fs_total;
            self.force[b] += f_on_b;
            self.force[a] -= f_on_b;
            let mut t_b = arm_b.cross(fs_total);
            let mut t_a = arm_a.cross(-fs_total);
            if let Some(bond) = c.intact_bond() {
                let m = n * bond.twist_moment + bond.bending_moment;
                t_b += m;
                t_a -= m;
            }
            self.torque[b] += t_b;
            self.torque[a] += t_a;
            contact_force_sum += f_on_b.norm();
            active += 1;
        }

        if let Some(pl) = self.platens.as_mut() {
            let e = self.materials.rock_rock.contact_modulus * T::lit(GPA) * T::PI();
            let (mut fb, mut ft) = (T::zero(), T::zero());
            for (i, p) in ps.iter().enumerate() {
                let k = e * p.radius;
                let db = pl.bottom - (p.center.z - p.radius);
                if db > T::zero() {
                    let f = k * db;
                    self.force[i].z += f;
                    fb += f;
                    contact_force_sum += f;
                    active += 1;
                }
                let dtop = p.center.z + p.radius - pl.top;
                if dtop > T::zero() {
                    let f = k * dtop;
                    self.force[i].z -= f;
                    ft += f;
                    contact_force_sum += f;
                    active += 1;
                }
            }
            pl.bottom_force = fb;
            pl.top_force = ft;
        }

        self.unbalanced_sum = self.force.iter().map(|f| f.norm()).sum();
        self.contact_force_sum = contact_force_sum;
        self.active_contacts = active;
    }

    /// Mean unbalanced force over mean contact force.
    pub fn unbalanced_force_ratio(&self) -> T {
        if self.contact_force_sum <= T::zero() || self.active_contacts == 0 || self.is_empty() {
            return if self.unbalanced_sum > T::zero() { T::infinity() } else { T::zero() };
        }
        let mean_unbalanced = self.unbalanced_sum / T::from_usize_lossy(self.len());
        let mean_contact = self.contact_force_sum / T::from_usize_lossy(self.active_contacts);
        mean_unbalanced / mean_contact
    }

    /// Refreshes forces without advancing time.
    pub fn evaluate_forces(&mut self) {
        if self.needs_rebuild() {
            self.rebuild_neighbors();
        }
        self.compute_forces(T::zero());
    }

    /// One explicit cycle: contact update, then motion update with local damping.
    pub fn integrate_step(&mut self, dt: T) -> Result<()> {
        if self.needs_rebuild() {
            self.rebuild_neighbors();
        }
        let limit = self.stable_time_step();
        if !(dt >= T::zero() && dt <= limit * T::lit(1.0 + 1e-9)) {
            return Err(Error::Unstable {
                what: "particle dynamics",
                dt: dt.as_f64(),
                limit: limit.as_f64(),
            });
        }
        self.compute_forces(dt);
        let alpha = self.params.local_damping;
        let damp = |f: Vec3<T>, v: Vec3<T>| -> Vec3<T> {
            if alpha == T::zero() {
                return f;
            }
            let c = |fc: T, vc: T| {
                let s = if vc > T::zero() {
                    T::one()
                } else if vc < T::zero() {
                    -T::one()
                } else {
                    T::zero()
                };
                fc - alpha * fc.abs() * s
            };
            Vec3::new(c(f.x, v.x), c(f.y, v.y), c(f.z, v.z))
        };
        for i in 0..self.len() {
            let f = damp(self.force[i], self.velocity[i]);
            self.velocity[i] += f * (dt / self.mass[i]);
            let tq = damp(self.torque[i], self.spin[i]);
            self.spin[i] += tq * (dt / self.inertia[i]);
            let v = self.velocity[i];
            self.assembly.particles[i].center += v * dt;
        }
        if let Some(pl) = self.platens.as_mut() {
            let s = pl.velocity * dt * T::lit(0.5);
            pl.bottom += s;
            pl.top -= s;
        }
        self.time += dt;
        Ok(())
    }

    /// Steps at the stable time step until the unbalanced-force ratio drops
    /// below `tolerance` or `max_steps` run out.
    pub fn equilibrate(&mut self, tolerance: T, max_steps: usize) -> Result<Equilibrium<T>> {
        self.evaluate_forces();
        let mut ratio = self.unbalanced_force_ratio();
        let mut steps = 0;
        while !(ratio < tolerance) && steps < max_steps {
            let dt = self.stable_time_step();
            self.integrate_step(dt)?;
            steps += 1;
            ratio = self.unbalanced_force_ratio();
        }
        if steps > 0 {
            self.evaluate_forces();
            ratio = self.unbalanced_force_ratio();
        }
        Ok(Equilibrium {
            steps,
            ratio,
            converged: ratio < tolerance,
        })
    }

    /// Σ ½ m v² + ½ I ω², N·mm.
    pub fn kinetic_energy(&self) -> T {
        let half = T::lit(0.5);
        (0..self.len())
            .map(|i| half * (self.mass[i] * self.velocity[i].norm_squared() + self.inertia[i] * self.spin[i].norm_squared()))
            .sum()
    }

    /// Σ m v, t·mm/s.
    pub fn momentum(&self) -> Vec3<T> {
        let mut p = Vec3::zero();
        for i in 0..self.len() {
            p += self.velocity[i] * self.mass[i];
        }
        p
    }

    /// Zeroes all velocities.
    pub fn freeze_motion(&mut self) {
        self.velocity.iter_mut().for_each(|v| *v = Vec3::zero());
        self.spin.iter_mut().for_each(|v| *v = Vec3::zero());
    }

    pub fn intact_bond_count(&self) -> usize {
        self.contacts.iter().filter(|c| c.intact_bond().is_some()).count()
    }
}
