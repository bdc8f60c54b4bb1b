//! Linear parallel bond: a cemented beam between two particles carrying
//! normal/shear force and twisting/bending moment until it breaks.

use std::fmt;

use crate::mechanics::material::BondMaterial;
use crate::packing::ContactKind;
use crate::scalar::{Scalar, Vec3};

/// MPa to N/mm² is the identity; GPa needs this factor.
pub(crate) const GPA: f64 = 1.0e3;

/// How the bond cross-section is sized from the two particle radii.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BondAreaRule {
    /// `π (r_a + r_b)²`
    #[default]
    SumOfRadii,
    /// `π min(r_a, r_b)²`
    MinRadius,
}

impl BondAreaRule {
    pub fn bond_radius<T: Scalar>(self, ra: T, rb: T) -> T {
        match self {
            BondAreaRule::SumOfRadii => ra + rb,
            BondAreaRule::MinRadius => ra.min(rb),
        }
    }

    pub fn area<T: Scalar>(self, ra: T, rb: T) -> T {
        let r = self.bond_radius(ra, rb);
        T::PI() * r * r
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FailureMode {
    Tensile,
    Shear,
}

impl fmt::Display for FailureMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureMode::Tensile => "tensile",
            FailureMode::Shear => "shear",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BondStatus {
    Intact,
    Broken(FailureMode),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondStrength<T> {
    /// MPa
    pub tensile: T,
    /// MPa
    pub cohesion: T,
    /// degrees
    pub friction_angle: T,
}

impl<T: Scalar> BondStrength<T> {
    pub fn from_material(m: &BondMaterial<T>) -> Self {
        Self {
            tensile: m.tensile_strength,
            cohesion: m.cohesion,
            friction_angle: m.friction_angle,
        }
    }

    /// Shear strength under normal stress `sigma` (tension positive).
    pub fn shear_strength(&self, sigma: T) -> T {
        self.cohesion - sigma * self.friction_angle.to_radians().tan()
    }
}

/// Bond stresses in MPa; `tensile` and `normal` are tension-positive.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BondStresses<T> {
    /// Average normal stress over the cross-section.
    pub normal: T,
    /// Peak tensile stress including bending.
    pub tensile: T,
    /// Peak shear stress including twisting.
    pub shear: T,
}

/// Failure mode for given stresses, or `None` while the bond holds.
pub fn failure_mode<T: Scalar>(stresses: &BondStresses<T>, strength: &BondStrength<T>) -> Option<FailureMode> {
    if stresses.tensile > strength.tensile {
        Some(FailureMode::Tensile)
    } else if stresses.shear > strength.shear_strength(stresses.normal) {
        Some(FailureMode::Shear)
    } else {
        None
    }
}

/// Relative motion of particle `b` with respect to `a` over one step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BondIncrement<T> {
    /// Approach along the contact normal, mm (positive closes the gap).
    pub normal: T,
    /// Tangential sliding of `b` relative to `a`, mm.
    pub shear: Vec3<T>,
    /// Relative rotation about the normal, rad.
    pub twist: T,
    /// Relative rotation about tangential axes, rad.
    pub bend: Vec3<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BondState<T> {
    pub a: usize,
    pub b: usize,
    pub kind: ContactKind,
    /// Normal stiffness per unit area, N/mm³.
    pub normal_stiffness: T,
    /// Shear stiffness per unit area, N/mm³.
    pub shear_stiffness: T,
    /// mm
    pub radius: T,
    /// mm²
    pub area: T,
    /// mm⁴
    pub inertia: T,
    /// mm⁴
    pub polar_inertia: T,
    /// Centre distance at installation, mm.
    pub initial_length: T,
    /// N, compression positive.
    pub normal_force: T,
    /// N, acting on `b`.
    pub shear_force: Vec3<T>,
    /// N·mm, acting on `b`.
    pub twist_moment: T,
    /// N·mm, acting on `b`.
    pub bending_moment: Vec3<T>,
    pub strength: BondStrength<T>,
    /// Include moment terms in the peak stresses.
    pub bending: bool,
    pub status: BondStatus,
}

impl<T: Scalar> BondState<T> {
    /// Fresh, unloaded bond between particles of radius `ra`, `rb` whose
    /// centres are `length` apart.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: usize,
        b: usize,
        kind: ContactKind,
        ra: T,
        rb: T,
        length: T,
        material: &BondMaterial<T>,
        area_rule: BondAreaRule,
        bending: bool,
    ) -> Self {
        let radius = area_rule.bond_radius(ra, rb);
        let area = T::PI() * radius * radius;
        let r4 = radius * radius * radius * radius;
        let kn = material.bond_modulus * T::lit(GPA) / (ra + rb);
        Self {
            a,
            b,
            kind,
            normal_stiffness: kn,
            shear_stiffness: kn / material.bond_stiffness_ratio,
            radius,
            area,
            inertia: T::PI() * r4 / T::lit(4.0),
            polar_inertia: T::PI() * r4 / T::lit(2.0),
            initial_length: length,
            normal_force: T::zero(),
            shear_force: Vec3::zero(),
            twist_moment: T::zero(),
            bending_moment: Vec3::zero(),
            strength: BondStrength::from_material(material),
            bending,
            status: BondStatus::Intact,
        }
    }

    pub fn is_intact(&self) -> bool {
        self.status == BondStatus::Intact
    }

    /// Axial spring constant `k_n · A`, N/mm.
    pub fn axial_stiffness(&self) -> T {
        self.normal_stiffness * self.area
    }

    /// Linear force/moment update for one increment.
    pub fn apply_increment(&mut self, inc: &BondIncrement<T>) {
        self.normal_force += self.normal_stiffness * self.area * inc.normal;
        self.shear_force -= inc.shear * (self.shear_stiffness * self.area);
        self.twist_moment -= self.shear_stiffness * self.polar_inertia * inc.twist;
        self.bending_moment -= inc.bend * (self.normal_stiffness * self.inertia);
    }

    /// Keeps the shear force and bending moment in the plane normal to `n`.
    pub(crate) fn align_to(&mut self, n: Vec3<T>) {
        self.shear_force = self.shear_force.reject(n);
        self.bending_moment = self.bending_moment.reject(n);
    }

    pub fn stresses(&self) -> BondStresses<T> {
        let normal = -self.normal_force / self.area;
        let (bend, twist) = if self.bending {
            (
                self.bending_moment.norm() * self.radius / self.inertia,
                self.twist_moment.abs() * self.radius / self.polar_inertia,
            )
        } else {
            (T::zero(), T::zero())
        };
        BondStresses {
            normal,
            tensile: normal + bend,
            shear: self.shear_force.norm() / self.area + twist,
        }
    }

    /// Clears the carried load after failure.
    pub(crate) fn break_with(&mut self, mode: FailureMode) {
        self.status = BondStatus::Broken(mode);
        self.normal_force = T::zero();
        self.shear_force = Vec3::zero();
        self.twist_moment = T::zero();
        self.bending_moment = Vec3::zero();
    }
}

/// Applies one relative-motion increment to an intact bond.
pub fn bond_force_update<T: Scalar>(bond: &mut BondState<T>, increment: &BondIncrement<T>) {
    if bond.is_intact() {
        bond.apply_increment(increment);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bond() -> BondState<f64> {
        BondState::new(
            0,
            1,
            ContactKind::RockRock,
            1.0,
            1.0,
            2.0,
            &BondMaterial::sandstone_rock(),
            BondAreaRule::SumOfRadii,
            true,
        )
    }

    #[test]
    fn zero_increment_changes_nothing() {
        let mut b = bond();
        let before = b.clone();
        bond_force_update(&mut b, &BondIncrement::default());
        assert_eq!(b, before);
    }

    #[test]
    fn pure_shear_leaves_normal_force() {
        let mut b = bond();
        bond_force_update(
            &mut b,
            &BondIncrement { shear: Vec3::new(1e-4, 0.0, 0.0), ..Default::default() },
        );
        assert_eq!(b.normal_force, 0.0);
        assert!(b.shear_force.x < 0.0);
    }

    #[test]
    fn area_rules() {
        let sum = BondAreaRule::SumOfRadii.area(1.0f64, 0.8);
        let min = BondAreaRule::MinRadius.area(1.0f64, 0.8);
        assert!((sum - std::f64::consts::PI * 3.24).abs() < 1e-12);
        assert!((min - std::f64::consts::PI * 0.64).abs() < 1e-12);
    }

    #[test]
    fn compression_raises_shear_strength() {
        let s = BondStrength { tensile: 40.0, cohesion: 40.0, friction_angle: 45.0f64 };
        assert!((s.shear_strength(-10.0) - 50.0).abs() < 1e-9);
        assert!((s.shear_strength(10.0) - 30.0).abs() < 1e-9);
    }
}
