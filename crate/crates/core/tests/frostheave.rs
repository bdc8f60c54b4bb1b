use frostdem::frostheave::*;
use frostdem::mechanics::{BondAreaRule, BondMaterial, BondState, BondStatus, FailureMode};
use frostdem::packing::{ContactKind, Phase};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn contact_force_percentages() {
    for (base, cur, want) in [(42.727, 42.924, 0.46105), (42.727, 42.936, 0.48913), (33.893, 33.933, 0.11801)] {
        let got = percent_increase(base, cur).unwrap();
        assert!(close(got, want, 5e-4), "{base}->{cur}: {got}");
    }
    assert!(percent_increase(0.0, 1.0).is_err());
    assert_eq!(percent_reduction(10.0, 9.0).unwrap(), 10.0);
}

#[test]
fn radius_increments_per_phase() {
    assert!(close(thermal_radius_update(1.0, ExpansionPhase::Rock, -20.0), -1.04e-4, 1e-15));
    assert!(close(thermal_radius_update(1.0, ExpansionPhase::Water, -20.0), -3.538e-3, 1e-15));
    // Ice grows on cooling.
    assert!(close(thermal_radius_update(1.0, ExpansionPhase::Ice, -20.0), 4.158e-3, 1e-15));
    assert!(close(path_increment(1.0, Phase::Water, 20.0, -20.0), -3.538e-3 + 4.158e-3, 1e-15));
    assert!(close(path_increment(2.0, Phase::Rock, 20.0, -20.0), -4.16e-4, 1e-15));
}

#[test]
fn cement_follows_rock_until_frozen() {
    assert!(close(bond_path_increment(1.0, Phase::Water, 20.0, 0.0), -1.04e-4, 1e-15));
    assert!(close(bond_path_increment(1.0, Phase::Water, 0.0, -10.0), 2.079e-3, 1e-15));
    assert_eq!(bond_path_increment(1.0, Phase::Rock, 0.0, -10.0), thermal_radius_update(1.0, ExpansionPhase::Rock, -10.0));
}

#[test]
fn thermal_bond_force() {
    // -kn·A·α·L·ΔT
    assert!(close(bond_thermal_force(1.0e3, 2.0, 1.0e-5, 3.0, -10.0), 0.6, 1e-12));
    assert_eq!(bond_thermal_force(1.0e3, 2.0, 1.0e-5, 3.0, 0.0), 0.0);
}

#[test]
fn lens_volume_matches_equal_sphere_formula() {
    let r = 1.3;
    for d in [0.1, 1.0, 2.0, 2.5] {
        let want = std::f64::consts::PI * (4.0 * r + d) * (2.0 * r - d).powi(2) / 12.0;
        assert!(close(lens_volume(r, r, d), want, 1e-12), "d = {d}");
    }
    assert_eq!(lens_volume(1.0, 1.0, 2.0), 0.0);
    assert_eq!(lens_volume(1.0, 1.0, 3.0), 0.0);
    let small = 4.0 / 3.0 * std::f64::consts::PI * 0.125;
    assert!(close(lens_volume(2.0, 0.5, 1.0), small, 1e-12));
}

fn bond() -> BondState<f64> {
    BondState::new(0, 1, ContactKind::RockRock, 1.0, 1.0, 2.0, &BondMaterial::sandstone_rock(), BondAreaRule::SumOfRadii, true)
}

#[test]
fn tensile_failure_load_by_bisection() {
    let b = bond();
    let want = b.strength.tensile * b.area;
    let breaks = |pull: f64| {
        let mut t = b.clone();
        t.normal_force = -pull;
        check_bond_failure(&t) != BondStatus::Intact
    };
    let (mut lo, mut hi) = (0.0, 10.0 * want);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if breaks(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    assert!(((hi - want) / want).abs() < 1e-9, "{hi} vs {want}");
    let mut t = b.clone();
    t.normal_force = -1.01 * want;
    assert_eq!(check_bond_failure(&t), BondStatus::Broken(FailureMode::Tensile));
}

#[test]
fn shear_failure_uses_normal_stress() {
    let mut b = bond();
    // Under 10 MPa of compression the 45° envelope adds 10 MPa.
    b.normal_force = 10.0 * b.area;
    b.shear_force = frostdem::Vec3::new(49.0 * b.area, 0.0, 0.0);
    assert_eq!(check_bond_failure(&b), BondStatus::Intact);
    b.shear_force = frostdem::Vec3::new(50.5 * b.area, 0.0, 0.0);
    assert_eq!(check_bond_failure(&b), BondStatus::Broken(FailureMode::Shear));
}

#[test]
fn crack_log_counts_modes() {
    let mut log = CrackLog::default();
    let ev = |mode| CrackEvent { time: 1.0, position: frostdem::Vec3::new(0.0, 0.0, 0.0), mode, a: 0, b: 1 };
    log.record(ev(FailureMode::Tensile));
    log.record(ev(FailureMode::Shear));
    log.record(ev(FailureMode::Tensile));
    assert_eq!(log.len(), 3);
    assert_eq!(log.count(FailureMode::Tensile), 2);
    let mut out = Vec::new();
    log.write_table(&mut out).unwrap();
    assert!(String::from_utf8(out).unwrap().contains("tensile"));
}

#[test]
fn freeze_config_validation() {
    let mut c = FreezeConfig::<f64>::default();
    assert!(c.validate().is_ok());
    c.ramp_rate = 0.0;
    assert!(c.validate().is_err());
    let c = FreezeConfig::<f64> { stages: vec![20.0], ..Default::default() };
    assert!(c.validate().is_err());
}

proptest! {
    // Ice grows with |ΔT|, so additivity only holds along a monotonic path.
    #[test]
    fn cooling_increments_are_additive(r in 0.5..2.0f64, mut t in prop::array::uniform3(-30.0..30.0f64), water in any::<bool>()) {
        t.sort_by(|x, y| y.total_cmp(x));
        let [a, b, c] = t;
        let phase = if water { Phase::Water } else { Phase::Rock };
        let split = path_increment(r, phase, a, b) + path_increment(r, phase, b, c);
        prop_assert!((split - path_increment(r, phase, a, c)).abs() < 1e-14);
        let split = bond_path_increment(r, phase, a, b) + bond_path_increment(r, phase, b, c);
        prop_assert!((split - bond_path_increment(r, phase, a, c)).abs() < 1e-14);
    }

    #[test]
    fn percentages_invert(base in 1.0..100.0f64, cur in 0.0..200.0f64) {
        let p = percent_increase(base, cur).unwrap();
        prop_assert!((base * (1.0 + p / 100.0) - cur).abs() < 1e-9);
        prop_assert_eq!(percent_reduction(base, cur).unwrap(), -p);
    }
}
