//! Two-phase (rock / pore water) spherical packings in a cylinder.
//!
//! The cylinder axis is `z`; the base sits at `z = 0` and the axis passes
//! through the origin. Lengths are millimetres, densities kg/m³.

use std::fmt;
use std::io::{self, Write};

use num_traits::{FromPrimitive, Num};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Vec3};
use crate::spatial::CellGrid;

/// Resolution below which a model is considered too coarse.
pub const MIN_RESOLUTION: u32 = 5;

/// Largest overlap, relative to the smaller radius, left after generation.
pub const MAX_PACKING_OVERLAP: f64 = 1.0e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Phase {
    Rock,
    Water,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Rock => "rock",
            Phase::Water => "water",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContactKind {
    RockRock,
    RockWater,
    WaterWater,
}

impl ContactKind {
    pub fn from_phases(a: Phase, b: Phase) -> Self {
        match (a, b) {
            (Phase::Rock, Phase::Rock) => ContactKind::RockRock,
            (Phase::Water, Phase::Water) => ContactKind::WaterWater,
            _ => ContactKind::RockWater,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ContactKind::RockRock => "rock-rock",
            ContactKind::RockWater => "rock-water",
            ContactKind::WaterWater => "water-water",
        }
    }
}

impl fmt::Display for ContactKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusRange<T> {
    pub min: T,
    pub max: T,
}

impl<T: Scalar> RadiusRange<T> {
    pub fn new(min: T, max: T) -> Self {
        Self { min, max }
    }

    pub fn mean(&self) -> T {
        (self.min + self.max) * T::lit(0.5)
    }

    /// Volume of a sphere with the mean radius of the range.
    pub fn mean_single_volume(&self) -> T {
        sphere_volume(self.mean())
    }

    fn validate(&self, param: &'static str) -> Result<()> {
        if !(self.min > T::zero() && self.max.is_finite()) {
            return Err(Error::config(param, "radii must be positive and finite"));
        }
        if self.min >= self.max {
            return Err(Error::config(
                param,
                format!("radius_min {} must be below radius_max {}", self.min, self.max),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingConfig<T> {
    /// Water volume over total particle volume.
    pub target_porosity: T,
    pub rock_radius: RadiusRange<T>,
    pub water_radius: RadiusRange<T>,
    pub cylinder_radius: T,
    pub cylinder_height: T,
    pub rock_density: T,
    pub water_density: T,
    pub rng_seed: u64,
    /// Fraction of the cylinder volume occupied by particles.
    pub solid_fraction: T,
}

impl<T: Scalar> PackingConfig<T> {
    /// Saturated sandstone particle set: Φ50×50 mm, n = 8.59 %.
    pub fn sandstone_reference() -> Self {
        Self {
            target_porosity: T::lit(0.0859),
            rock_radius: RadiusRange::new(T::lit(1.0), T::lit(1.2)),
            water_radius: RadiusRange::new(T::lit(0.8), T::lit(0.95)),
            cylinder_radius: T::lit(25.0),
            cylinder_height: T::lit(50.0),
            rock_density: T::lit(2600.0),
            water_density: T::lit(960.0),
            rng_seed: 1,
            solid_fraction: T::lit(0.55),
        }
    }

    /// Same particle parameters in a smaller cylinder.
    pub fn desk_scale(cylinder_radius: T, cylinder_height: T, rng_seed: u64) -> Self {
        Self {
            cylinder_radius,
            cylinder_height,
            rng_seed,
            ..Self::sandstone_reference()
        }
    }

    /// The dry counterpart: water particles are removed and the solid volume
    /// is refilled with rock.
    pub fn dry(&self) -> Self {
        Self {
            target_porosity: T::zero(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.target_porosity;
        if !(n >= T::zero() && n <= T::lit(0.5)) {
            return Err(Error::config(
                "target_porosity",
                format!("{n} outside [0, 0.5]"),
            ));
        }
        self.rock_radius.validate("rock_radius")?;
        self.water_radius.validate("water_radius")?;
        for (param, v) in [
            ("cylinder_radius", self.cylinder_radius),
            ("cylinder_height", self.cylinder_height),
            ("rock_density", self.rock_density),
            ("water_density", self.water_density),
        ] {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::config(param, format!("{v} must be positive")));
            }
        }
        let f = self.solid_fraction;
        if !(f > T::zero() && f < T::lit(0.74)) {
            return Err(Error::config(
                "solid_fraction",
                format!("{f} outside (0, 0.74)"),
            ));
        }
        Ok(())
    }

    pub fn domain(&self) -> Cylinder<T> {
        Cylinder {
            radius: self.cylinder_radius,
            height: self.cylinder_height,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cylinder<T> {
    pub radius: T,
    pub height: T,
}

impl<T: Scalar> Cylinder<T> {
    pub fn volume(&self) -> T {
        T::PI() * self.radius * self.radius * self.height
    }

    pub fn cross_section(&self) -> T {
        T::PI() * self.radius * self.radius
    }

    pub fn contains(&self, p: Vec3<T>) -> bool {
        p.x * p.x + p.y * p.y <= self.radius * self.radius
            && p.z >= T::zero()
            && p.z <= self.height
    }

    /// Pushes a sphere back inside the cylinder.
    fn clamp_sphere(&self, p: Vec3<T>, r: T) -> Vec3<T> {
        let mut q = p;
        let rho_max = (self.radius - r).max(T::zero());
        let rho = (q.x * q.x + q.y * q.y).sqrt();
        if rho > rho_max {
            let s = if rho > T::zero() { rho_max / rho } else { T::zero() };
            q.x *= s;
            q.y *= s;
        }
        q.z = q.z.max(r).min((self.height - r).max(r));
        q
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Particle<T> {
    pub id: usize,
    pub center: Vec3<T>,
    pub radius: T,
    pub phase: Phase,
    /// kg/m³
    pub density: T,
}

impl<T: Scalar> Particle<T> {
    pub fn volume(&self) -> T {
        sphere_volume(self.radius)
    }
}

/// A bonded pair, `a < b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BondRef {
    pub a: usize,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleAssembly<T> {
    pub particles: Vec<Particle<T>>,
    pub bonds: Vec<BondRef>,
    pub domain: Cylinder<T>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPair<T> {
    pub particle_a: usize,
    pub particle_b: usize,
    pub kind: ContactKind,
    /// Surface separation; negative when the spheres overlap.
    pub gap: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParticleCounts {
    pub water: usize,
    pub rock: usize,
}

impl ParticleCounts {
    pub fn total(&self) -> usize {
        self.water + self.rock
    }

    /// Porosity implied by these counts and the given mean single volumes.
    pub fn porosity<T: Scalar>(&self, water_single: T, rock_single: T) -> T {
        let w = T::from_usize_lossy(self.water) * water_single;
        let r = T::from_usize_lossy(self.rock) * rock_single;
        if w + r == T::zero() {
            T::zero()
        } else {
            w / (w + r)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution<T> {
    pub value: T,
    /// `value > 5`.
    pub passes: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PorosityEstimate<T> {
    pub porosity: T,
    pub standard_error: T,
    pub hits: usize,
}

pub fn sphere_volume<T: Scalar>(r: T) -> T {
    T::lit(4.0 / 3.0) * T::PI() * r * r * r
}

/// Splits a particle-volume budget between the phases so that the water
/// volume fraction equals `porosity`.
pub fn counts_for_solid_volume<T: Scalar>(
    porosity: T,
    water_single: T,
    rock_single: T,
    solid_volume: T,
) -> Result<ParticleCounts> {
    if !(porosity >= T::zero() && porosity < T::one()) {
        return Err(Error::config("target_porosity", format!("{porosity} outside [0, 1)")));
    }
    if !(water_single > T::zero() && rock_single > T::zero()) {
        return Err(Error::config("radius", "single-particle volumes must be positive"));
    }
    if !(solid_volume >= T::zero() && solid_volume.is_finite()) {
        return Err(Error::config("solid_fraction", "solid volume must be non-negative"));
    }
    let round = |v: T| v.round().to_usize().unwrap_or(0);
    Ok(ParticleCounts {
        water: round(porosity * solid_volume / water_single),
        rock: round((T::one() - porosity) * solid_volume / rock_single),
    })
}

/// Water / rock particle counts for a configuration.
pub fn compute_particle_counts<T: Scalar>(config: &PackingConfig<T>) -> Result<ParticleCounts> {
    config.validate()?;
    let solid = config.domain().volume() * config.solid_fraction;
    counts_for_solid_volume(
        config.target_porosity,
        config.water_radius.mean_single_volume(),
        config.rock_radius.mean_single_volume(),
        solid,
    )
}

/// Model radius over particle-size range. Exact on rational inputs.
pub fn compute_resolution<T>(model_radius: T, r_max: T, r_min: T) -> Result<Resolution<T>>
where
    T: Num + PartialOrd + Copy + FromPrimitive,
{
    if r_max <= r_min {
        return Err(Error::Degenerate(
            "resolution needs r_max > r_min".to_string(),
        ));
    }
    let value = model_radius / (r_max - r_min);
    Ok(Resolution {
        value,
        passes: T::from_u32(MIN_RESOLUTION).is_some_and(|min| value > min),
    })
}

const JAM_RETRIES: usize = 4;
/// Shake amplitude of a jam retry, fraction of radius.
const JAM_JITTER: f64 = 0.05;

/// Generates a packing by random sequential insertion at reduced radii
/// followed by staged radius growth with overlap relaxation.
pub fn generate_packing<T: Scalar>(config: &PackingConfig<T>) -> Result<ParticleAssembly<T>> {
    let counts = compute_particle_counts(config)?;
    let domain = config.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let mut specs: Vec<(Phase, T)> = Vec::with_capacity(counts.total());
    for _ in 0..counts.rock {
        specs.push((Phase::Rock, sample_radius(&mut rng, &config.rock_radius)));
    }
    for _ in 0..counts.water {
        specs.push((Phase::Water, sample_radius(&mut rng, &config.water_radius)));
    }
    specs.shuffle(&mut rng);

    let max_r = config.rock_radius.max.max(config.water_radius.max);
    if specs.is_empty() {
        return Ok(ParticleAssembly {
            particles: Vec::new(),
            bonds: Vec::new(),
            domain,
        });
    }
    if T::lit(2.0) * max_r > (T::lit(2.0) * domain.radius).min(domain.height) {
        return Err(Error::PackingInfeasible {
            parameter: "cylinder_radius",
            detail: format!("largest particle radius {max_r} does not fit the domain"),
        });
    }

    // Insert at a scale where random sequential insertion is still easy.
    let insert_fraction = T::lit(0.2);
    let scale0 = if config.solid_fraction > insert_fraction {
        (insert_fraction / config.solid_fraction).cbrt()
    } else {
        T::one()
    };

    let mut centers: Vec<Vec3<T>> = Vec::with_capacity(specs.len());
    let mut radii: Vec<T> = specs.iter().map(|s| s.1 * scale0).collect();
    let cell = T::lit(2.0) * max_r;
    let mut placed = PlacementGrid::new(domain, cell);
    const MAX_ATTEMPTS: usize = 20_000;
    for (i, &r) in radii.iter().enumerate() {
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let p = sample_in_cylinder(&mut rng, &domain, r);
            if placed.is_free(p, r, &centers, &radii) {
                placed.insert(p, i);
                centers.push(p);
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::PackingInfeasible {
                parameter: "solid_fraction",
                detail: format!(
                    "could not insert particle {i} of {} after {MAX_ATTEMPTS} attempts",
                    specs.len()
                ),
            });
        }
    }

    // Grow to full size in stages, relaxing overlaps after each.
    const STAGES: usize = 12;
    for stage in 1..=STAGES {
        let s = scale0 + (T::one() - scale0) * T::from_usize_lossy(stage) / T::from_usize_lossy(STAGES);
        for (r, spec) in radii.iter_mut().zip(&specs) {
            *r = spec.1 * s;
        }
        let last = stage == STAGES;
        let tol = if last { T::lit(MAX_PACKING_OVERLAP) } else { T::lit(0.02) };
        let iters = if last { 20_000 } else { 400 };
        let mut reached = relax_overlaps(&mut centers, &radii, &domain, tol, iters);
        // Shake jammed packings and try again.
        for _ in 0..JAM_RETRIES {
            if !last || reached {
                break;
            }
            for (c, &r) in centers.iter_mut().zip(&radii) {
                let mut j = || T::lit(rng.gen_range(-1.0..=1.0)) * r * T::lit(JAM_JITTER);
                *c += Vec3::new(j(), j(), j());
            }
            reached = relax_overlaps(&mut centers, &radii, &domain, tol, iters);
        }
        if last && !reached {
            return Err(Error::PackingInfeasible {
                parameter: "solid_fraction",
                detail: format!(
                    "overlaps did not relax below {} of radius at solid fraction {}",
                    MAX_PACKING_OVERLAP, config.solid_fraction
                ),
            });
        }
    }

    let particles = specs
        .iter()
        .zip(centers)
        .enumerate()
        .map(|(id, (&(phase, radius), center))| Particle {
            id,
            center,
            radius,
            phase,
            density: match phase {
                Phase::Rock => config.rock_density,
                Phase::Water => config.water_density,
            },
        })
        .collect();
    let mut assembly = ParticleAssembly {
        particles,
        bonds: Vec::new(),
        domain,
    };
    assembly.relieve_pore_water();
    Ok(assembly)
}

fn sample_radius<T: Scalar>(rng: &mut ChaCha8Rng, range: &RadiusRange<T>) -> T {
    let u: f64 = rng.gen();
    range.min + (range.max - range.min) * T::lit(u)
}

fn sample_in_cylinder<T: Scalar>(rng: &mut ChaCha8Rng, domain: &Cylinder<T>, r: T) -> Vec3<T> {
    let rho = (domain.radius - r).max(T::zero());
    loop {
        let x = T::lit(rng.gen_range(-1.0..=1.0));
        let y = T::lit(rng.gen_range(-1.0..=1.0));
        let z: f64 = rng.gen();
        if x * x + y * y <= T::one() {
            return Vec3::new(x * rho, y * rho, r + (domain.height - r - r) * T::lit(z));
        }
    }
}

/// Incremental grid used during insertion.
struct PlacementGrid<T> {
    cell: T,
    dims: [usize; 3],
    cells: Vec<Vec<usize>>,
    radius: T,
}

impl<T: Scalar> PlacementGrid<T> {
    fn new(domain: Cylinder<T>, cell: T) -> Self {
        let n = |len: T| (len / cell).ceil().to_usize().unwrap_or(1).max(1);
        let dims = [
            n(domain.radius * T::lit(2.0)),
            n(domain.radius * T::lit(2.0)),
            n(domain.height),
        ];
        Self {
            cell,
            dims,
            cells: vec![Vec::new(); dims[0] * dims[1] * dims[2]],
            radius: domain.radius,
        }
    }

    fn coord(&self, p: Vec3<T>) -> [usize; 3] {
        let f = |v: T, d: usize| (v / self.cell).floor().max(T::zero()).to_usize().unwrap_or(0).min(d - 1);
        [
            f(p.x + self.radius, self.dims[0]),
            f(p.y + self.radius, self.dims[1]),
            f(p.z, self.dims[2]),
        ]
    }

    fn insert(&mut self, p: Vec3<T>, i: usize) {
        let c = self.coord(p);
        let idx = (c[2] * self.dims[1] + c[1]) * self.dims[0] + c[0];
        self.cells[idx].push(i);
    }

    fn is_free(&self, p: Vec3<T>, r: T, centers: &[Vec3<T>], radii: &[T]) -> bool {
        let c = self.coord(p);
        let range = |k: usize, d: usize| k.saturating_sub(1)..=(k + 1).min(d - 1);
        for z in range(c[2], self.dims[2]) {
            for y in range(c[1], self.dims[1]) {
                for x in range(c[0], self.dims[0]) {
                    for &j in &self.cells[(z * self.dims[1] + y) * self.dims[0] + x] {
                        let reach = r + radii[j];
                        if (centers[j] - p).norm_squared() < reach * reach {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Gauss-Seidel overlap projection. Returns whether every overlap ended up
/// below `tol` times the smaller radius of its pair.
fn relax_overlaps<T: Scalar>(
    centers: &mut [Vec3<T>],
    radii: &[T],
    domain: &Cylinder<T>,
    tol: T,
    max_iters: usize,
) -> bool {
    let max_r = radii.iter().copied().fold(T::zero(), T::max);
    let cell = T::lit(2.0) * max_r;
    // Moving each pair apart by a bit more than half the overlap converges
    // faster on dense packings than exact pairwise resolution.
    let push = T::lit(0.6);
    for _ in 0..max_iters {
        for (c, &r) in centers.iter_mut().zip(radii) {
            *c = domain.clamp_sphere(*c, r);
        }
        let grid = CellGrid::build(centers, cell);
        let pairs = grid.pairs_within(centers, |i, j| radii[i] + radii[j]);
        let mut worst = T::zero();
        for &(i, j) in &pairs {
            let d_vec = centers[j] - centers[i];
            let d = d_vec.norm();
            let overlap = radii[i] + radii[j] - d;
            if overlap <= T::zero() {
                continue;
            }
            worst = worst.max(overlap / radii[i].min(radii[j]));
            let n = if d > T::zero() {
                d_vec / d
            } else {
                Vec3::unit_z()
            };
            let shift = n * (overlap * push);
            let mi = radii[i] * radii[i] * radii[i];
            let mj = radii[j] * radii[j] * radii[j];
            let wi = mj / (mi + mj);
            let wj = mi / (mi + mj);
            centers[i] -= shift * wi;
            centers[j] += shift * wj;
        }
        if worst <= tol {
            let inside = centers
                .iter()
                .zip(radii)
                .all(|(c, &r)| (domain.clamp_sphere(*c, r) - *c).norm() <= tol * r);
            if inside {
                return true;
            }
        }
    }
    for (c, &r) in centers.iter_mut().zip(radii) {
        *c = domain.clamp_sphere(*c, r);
    }
    false
}

/// All pairs whose surfaces are within `tolerance` of each other.
pub fn detect_contacts<T: Scalar>(assembly: &ParticleAssembly<T>, tolerance: T) -> Vec<ContactPair<T>> {
    let tolerance = tolerance.max(T::zero());
    let ps = &assembly.particles;
    if ps.len() < 2 {
        return Vec::new();
    }
    let centers: Vec<Vec3<T>> = ps.iter().map(|p| p.center).collect();
    let max_r = ps.iter().map(|p| p.radius).fold(T::zero(), T::max);
    let grid = CellGrid::build(&centers, T::lit(2.0) * max_r + tolerance);
    grid.pairs_within(&centers, |i, j| ps[i].radius + ps[j].radius + tolerance)
        .into_iter()
        .map(|(a, b)| ContactPair {
            particle_a: a,
            particle_b: b,
            kind: ContactKind::from_phases(ps[a].phase, ps[b].phase),
            gap: (centers[b] - centers[a]).norm() - ps[a].radius - ps[b].radius,
        })
        .collect()
}

/// Default contact-detection tolerance: 5 % of the smallest radius.
pub fn default_contact_tolerance<T: Scalar>(assembly: &ParticleAssembly<T>) -> T {
    let r_min = assembly
        .particles
        .iter()
        .map(|p| p.radius)
        .fold(T::infinity(), T::min);
    if r_min.is_finite() {
        r_min * T::lit(0.05)
    } else {
        T::zero()
    }
}

impl<T: Scalar> ParticleAssembly<T> {
    /// Shrinks each water particle, in id order, just enough that it no longer
    /// overlaps any neighbour, so pore water starts free of contact force.
    /// Returns the largest relative radius reduction.
    pub fn relieve_pore_water(&mut self) -> T {
        let centers: Vec<Vec3<T>> = self.particles.iter().map(|p| p.center).collect();
        let max_r = self.particles.iter().map(|p| p.radius).fold(T::zero(), T::max);
        let grid = CellGrid::build(&centers, T::lit(2.0) * max_r);
        let mut worst = T::zero();
        for i in 0..self.particles.len() {
            if self.particles[i].phase != Phase::Water {
                continue;
            }
            let mut r = self.particles[i].radius;
            grid.for_each_near(centers[i], |j| {
                if j != i {
                    r = r.min((centers[j] - centers[i]).norm() - self.particles[j].radius);
                }
            });
            let r0 = self.particles[i].radius;
            if r < r0 && r > T::zero() {
                worst = worst.max((r0 - r) / r0);
                self.particles[i].radius = r;
            }
        }
        worst
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.particles.iter().filter(|p| p.phase == phase).count()
    }

    pub fn contact_kind(&self, a: usize, b: usize) -> ContactKind {
        ContactKind::from_phases(self.particles[a].phase, self.particles[b].phase)
    }

    /// Bonds every pair within `tolerance`, replacing any existing bonds.
    pub fn install_bonds(&mut self, tolerance: T) {
        self.bonds = detect_contacts(self, tolerance)
            .into_iter()
            .map(|c| BondRef {
                a: c.particle_a,
                b: c.particle_b,
            })
            .collect();
    }

    /// Water volume over total particle volume from exact sphere volumes.
    pub fn volume_porosity(&self) -> Option<T> {
        let (mut w, mut r) = (T::zero(), T::zero());
        for p in &self.particles {
            match p.phase {
                Phase::Water => w += p.volume(),
                Phase::Rock => r += p.volume(),
            }
        }
        (w + r > T::zero()).then(|| w / (w + r))
    }

    pub fn solid_fraction(&self) -> T {
        self.particles.iter().map(|p| p.volume()).sum::<T>() / self.domain.volume()
    }

    /// Column-ordered text snapshot of particles and bonds.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "# assembly snapshot v1")?;
        writeln!(
            w,
            "# domain cylinder_radius={:.9} cylinder_height={:.9}",
            self.domain.radius, self.domain.height
        )?;
        writeln!(w, "# particles {}", self.particles.len())?;
        writeln!(w, "# id x y z radius phase density")?;
        for p in &self.particles {
            writeln!(
                w,
                "{} {:.9} {:.9} {:.9} {:.9} {} {:.3}",
                p.id, p.center.x, p.center.y, p.center.z, p.radius, p.phase, p.density
            )?;
        }
        writeln!(w, "# bonds {}", self.bonds.len())?;
        writeln!(w, "# a b kind")?;
        for b in &self.bonds {
            writeln!(w, "{} {} {}", b.a, b.b, self.contact_kind(b.a, b.b))?;
        }
        Ok(())
    }
}

/// Monte Carlo estimate of the water share of particle volume.
pub fn measure_porosity<T: Scalar>(
    assembly: &ParticleAssembly<T>,
    samples: usize,
) -> Result<PorosityEstimate<T>> {
    measure_porosity_seeded(assembly, samples, 0x5eed_9090)
}

pub fn measure_porosity_seeded<T: Scalar>(
    assembly: &ParticleAssembly<T>,
    samples: usize,
    seed: u64,
) -> Result<PorosityEstimate<T>> {
    let ps = &assembly.particles;
    if ps.is_empty() {
        return Err(Error::Empty("assembly has no particles"));
    }
    if samples < 10_000 {
        return Err(Error::Precondition(format!(
            "porosity estimate needs at least 10^4 samples, got {samples}"
        )));
    }
    let mut lo = Vec3::new(T::infinity(), T::infinity(), T::infinity());
    let mut hi = -lo;
    for p in ps {
        let r = Vec3::new(p.radius, p.radius, p.radius);
        let a = p.center - r;
        let b = p.center + r;
        lo = Vec3::new(lo.x.min(a.x), lo.y.min(a.y), lo.z.min(a.z));
        hi = Vec3::new(hi.x.max(b.x), hi.y.max(b.y), hi.z.max(b.z));
    }
    let centers: Vec<Vec3<T>> = ps.iter().map(|p| p.center).collect();
    let max_r = ps.iter().map(|p| p.radius).fold(T::zero(), T::max);
    let grid = CellGrid::build(&centers, T::lit(2.0) * max_r);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut water, mut rock) = (0usize, 0usize);
    let span = hi - lo;
    for _ in 0..samples {
        let u = Vec3::new(
            T::lit(rng.gen()),
            T::lit(rng.gen()),
            T::lit(rng.gen()),
        );
        let q = Vec3::new(lo.x + span.x * u.x, lo.y + span.y * u.y, lo.z + span.z * u.z);
        // A point in an overlap belongs to the sphere it is deepest inside.
        let mut best: Option<(T, Phase)> = None;
        grid.for_each_near(q, |i| {
            let p = &ps[i];
            let rel = (q - p.center).norm() / p.radius;
            if rel <= T::one() && best.is_none_or(|(b, _)| rel < b) {
                best = Some((rel, p.phase));
            }
        });
        match best {
            Some((_, Phase::Water)) => water += 1,
            Some((_, Phase::Rock)) => rock += 1,
            None => {}
        }
    }
    let hits = water + rock;
    if hits == 0 {
        return Err(Error::Degenerate("no Monte Carlo sample hit a particle".into()));
    }
    let p = T::from_usize_lossy(water) / T::from_usize_lossy(hits);
    let se = (p * (T::one() - p) / T::from_usize_lossy(hits)).sqrt();
    Ok(PorosityEstimate {
        porosity: p,
        standard_error: se,
        hits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_spheres(d: f64, phase_b: Phase) -> ParticleAssembly<f64> {
        ParticleAssembly {
            particles: vec![
                Particle { id: 0, center: Vec3::new(0.0, 0.0, 5.0), radius: 1.0, phase: Phase::Rock, density: 2600.0 },
                Particle { id: 1, center: Vec3::new(d, 0.0, 5.0), radius: 1.0, phase: phase_b, density: 960.0 },
            ],
            bonds: vec![],
            domain: Cylinder { radius: 10.0, height: 10.0 },
        }
    }

    #[test]
    fn zero_porosity_has_no_water() {
        let cfg = PackingConfig::<f64>::desk_scale(5.0, 10.0, 3).dry();
        let c = compute_particle_counts(&cfg).unwrap();
        assert_eq!(c.water, 0);
        assert!(c.rock > 0);
    }

    #[test]
    fn equal_volumes_split_evenly() {
        let c = counts_for_solid_volume(0.5, 1.0, 1.0, 100.0).unwrap();
        assert_eq!(c, ParticleCounts { water: 50, rock: 50 });
    }

    #[test]
    fn unit_porosity_is_rejected() {
        assert!(counts_for_solid_volume(1.0, 1.0, 1.0, 100.0).is_err());
        let mut cfg = PackingConfig::<f64>::sandstone_reference();
        cfg.target_porosity = 1.0;
        assert!(compute_particle_counts(&cfg).is_err());
    }

    #[test]
    fn degenerate_radius_range_is_rejected() {
        let mut cfg = PackingConfig::<f64>::sandstone_reference();
        cfg.water_radius = RadiusRange::new(0.9, 0.9);
        assert!(matches!(
            compute_particle_counts(&cfg),
            Err(Error::InvalidConfig { param: "water_radius", .. })
        ));
    }

    #[test]
    fn resolution_examples() {
        use crate::Rational;
        let r = compute_resolution(25.0f64, 0.95, 0.8).unwrap();
        assert!((r.value - 166.666_666_666).abs() < 1e-6 && r.passes);
        // Exactly at the threshold: strict inequality fails.
        let r = compute_resolution(Rational::from(1), Rational::new(6, 5), Rational::from(1)).unwrap();
        assert_eq!(r.value, Rational::from(5));
        assert!(!r.passes);
        assert!(compute_resolution(25.0f64, 1.0, 1.0).is_err());
    }

    #[test]
    fn touching_spheres_make_one_contact() {
        let a = two_spheres(2.0, Phase::Water);
        let c = detect_contacts(&a, 0.0);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kind, ContactKind::RockWater);
        assert!(c[0].gap.abs() < 1e-12);
        assert!(detect_contacts(&two_spheres(2.5, Phase::Rock), 0.0).is_empty());
    }

    #[test]
    fn porosity_of_all_rock_is_zero() {
        let a = two_spheres(3.0, Phase::Rock);
        let est = measure_porosity(&a, 20_000).unwrap();
        assert_eq!(est.porosity, 0.0);
    }

    #[test]
    fn porosity_of_equal_pair_is_half() {
        let a = two_spheres(3.0, Phase::Water);
        let est = measure_porosity(&a, 40_000).unwrap();
        assert!((est.porosity - 0.5).abs() < 3.0 * est.standard_error);
    }

    #[test]
    fn porosity_of_empty_assembly_is_an_error() {
        let a = ParticleAssembly::<f64> {
            particles: vec![],
            bonds: vec![],
            domain: Cylinder { radius: 1.0, height: 1.0 },
        };
        assert!(measure_porosity(&a, 10_000).is_err());
    }

    #[test]
    fn zero_particle_config_is_empty() {
        let mut cfg = PackingConfig::<f64>::desk_scale(5.0, 10.0, 1);
        cfg.solid_fraction = 1e-6;
        let a = generate_packing(&cfg).unwrap();
        assert!(a.is_empty());
    }
}
