use crate::error::{Error, Result};
use crate::packing::ContactKind;
use crate::scalar::Scalar;

/// Micro-parameters of one bond family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BondMaterial<T> {
    /// Linear-contact effective modulus `E_m`, GPa.
    pub contact_modulus: T,
    /// Linear-contact stiffness ratio `k_s / k_n`.
    pub stiffness_ratio: T,
    /// Dimensionless micro-parameter listed as ν (0.6). Used as the sliding
    /// friction coefficient of the linear contact.
    pub friction: T,
    /// Parallel-bond effective modulus `P_be`, GPa.
    pub bond_modulus: T,
    /// Parallel-bond stiffness ratio `P_bk = k_n / k_s`.
    pub bond_stiffness_ratio: T,
    /// Tensile strength `P_bt`, MPa.
    pub tensile_strength: T,
    /// Cohesion `P_bc`, MPa.
    pub cohesion: T,
    /// Friction angle `P_bfa`, degrees.
    pub friction_angle: T,
}

impl<T: Scalar> BondMaterial<T> {
    fn row(bond_modulus: f64, strength: f64, friction_angle: f64) -> Self {
        Self {
            contact_modulus: T::lit(9.0),
            stiffness_ratio: T::one(),
            friction: T::lit(0.6),
            bond_modulus: T::lit(bond_modulus),
            bond_stiffness_ratio: T::lit(2.5),
            tensile_strength: T::lit(strength),
            cohesion: T::lit(strength),
            friction_angle: T::lit(friction_angle),
        }
    }

    /// Saturated sandstone, rock-rock bond.
    pub fn sandstone_rock() -> Self {
        Self::row(9.0, 40.0, 45.0)
    }

    /// Saturated sandstone, rock-water bond.
    pub fn sandstone_rock_water() -> Self {
        Self::row(4.5, 60.0, 0.0)
    }

    /// Saturated sandstone, water-water bond.
    pub fn sandstone_water_water() -> Self {
        Self::row(2.0, 60.0, 0.0)
    }

    /// Dry sandstone, rock-rock bond.
    pub fn dry_sandstone_rock() -> Self {
        Self::row(4.23, 80.0, 45.0)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("contact_modulus", self.contact_modulus),
            ("stiffness_ratio", self.stiffness_ratio),
            ("bond_modulus", self.bond_modulus),
            ("bond_stiffness_ratio", self.bond_stiffness_ratio),
            ("tensile_strength", self.tensile_strength),
            ("cohesion", self.cohesion),
        ];
        for (param, v) in positive {
            if !(v > T::zero() && v.is_finite()) {
                return Err(Error::config(param, format!("{v} must be positive")));
            }
        }
        if !(self.friction >= T::zero()) {
            return Err(Error::config("friction", "must be non-negative"));
        }
        if !(self.friction_angle >= T::zero() && self.friction_angle < T::lit(90.0)) {
            return Err(Error::config("friction_angle", "must lie in [0, 90)"));
        }
        Ok(())
    }

    /// Scales both moduli.
    pub fn with_stiffness_scaled(mut self, factor: T) -> Self {
        self.contact_modulus *= factor;
        self.bond_modulus *= factor;
        self
    }

    /// Scales tensile strength and cohesion.
    pub fn with_strength_scaled(mut self, factor: T) -> Self {
        self.tensile_strength *= factor;
        self.cohesion *= factor;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialSet<T> {
    pub rock_rock: BondMaterial<T>,
    pub rock_water: BondMaterial<T>,
    pub water_water: BondMaterial<T>,
}

impl<T: Scalar> MaterialSet<T> {
    pub fn saturated() -> Self {
        Self {
            rock_rock: BondMaterial::sandstone_rock(),
            rock_water: BondMaterial::sandstone_rock_water(),
            water_water: BondMaterial::sandstone_water_water(),
        }
    }

    pub fn dry() -> Self {
        Self {
            rock_rock: BondMaterial::dry_sandstone_rock(),
            ..Self::saturated()
        }
    }

    pub fn for_kind(&self, kind: ContactKind) -> &BondMaterial<T> {
        match kind {
            ContactKind::RockRock => &self.rock_rock,
            ContactKind::RockWater => &self.rock_water,
            ContactKind::WaterWater => &self.water_water,
        }
    }

    /// Swaps in a new rock-rock family and rescales the other two by the same
    /// stiffness and strength factors.
    pub fn rescaled_to(&self, rock_rock: BondMaterial<T>) -> Self {
        let f = rock_rock.bond_modulus / self.rock_rock.bond_modulus;
        let g = rock_rock.tensile_strength / self.rock_rock.tensile_strength;
        let scale = |m: BondMaterial<T>| m.with_stiffness_scaled(f).with_strength_scaled(g);
        Self {
            rock_rock,
            rock_water: scale(self.rock_water),
            water_water: scale(self.water_water),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.rock_rock.validate()?;
        self.rock_water.validate()?;
        self.water_water.validate()
    }
}
