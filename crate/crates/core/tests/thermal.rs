use frostdem::packing::*;
use frostdem::thermal::*;
use frostdem::Vec3;
use proptest::prelude::*;

fn pair(phase_b: Phase) -> ParticleAssembly<f64> {
    let p = |id, x: f64, phase| Particle { id, center: Vec3::new(x, 0.0, 5.0), radius: 1.0, phase, density: 2600.0 };
    ParticleAssembly {
        particles: vec![p(0, 0.0, Phase::Rock), p(1, 2.0, phase_b)],
        bonds: Vec::new(),
        domain: Cylinder { radius: 5.0, height: 10.0 },
    }
}

#[test]
fn two_body_exchange_matches_closed_form() {
    let a = pair(Phase::Rock);
    let model = ThermalModel::<f64>::default();
    let contacts = detect_contacts(&a, 0.01);
    assert_eq!(contacts.len(), 1);
    let mut net = ThermalNetwork::new(&a, &contacts, model);
    let mut field = TemperatureField::uniform(2, 0.0);
    field.temperatures = vec![20.0, 0.5];

    // Conductance k·πr²/d and capacities m·c, SI units.
    let r = 1.0e-3;
    let g = 7.7 * std::f64::consts::PI * r * r / 2.0e-3;
    let m = 2600.0 * 4.0 / 3.0 * std::f64::consts::PI * r * r * r;
    let c = m * 877.0;
    let rate = g * 2.0 / c;

    let dt = 0.1 * net.stable_time_step(&field);
    let n = 2000;
    for _ in 0..n {
        net.step(&mut field, dt).unwrap();
    }
    let diff = field.temperatures[0] - field.temperatures[1];
    let discrete = 19.5 * (1.0 - rate * dt).powi(n);
    assert!((diff - discrete).abs() < 1e-9 * 19.5, "{diff} vs {discrete}");
    let continuous = 19.5 * (-rate * dt * n as f64).exp();
    assert!((diff - continuous).abs() < 0.02 * 19.5 * (1.0 - (-rate * dt * n as f64).exp()));
    assert!((field.temperatures[0] + field.temperatures[1] - 20.5).abs() < 1e-9);
}

#[test]
fn oversized_step_is_rejected() {
    let a = pair(Phase::Water);
    let contacts = detect_contacts(&a, 0.01);
    let mut net = ThermalNetwork::new(&a, &contacts, ThermalModel::default());
    let mut field = TemperatureField::uniform(2, 10.0);
    let dt = 2.0 * net.stable_time_step(&field);
    assert!(matches!(net.step(&mut field, dt), Err(frostdem::Error::Unstable { .. })));
}

#[test]
fn schedule_ramps_then_holds() {
    let s = BoundarySchedule::chamber(-20.0f64);
    assert_eq!(s.ramp_duration(), 2400.0);
    assert_eq!(schedule_temperature(&s, 0.0), 20.0);
    assert_eq!(schedule_temperature(&s, 1200.0), 0.0);
    assert_eq!(schedule_temperature(&s, 1.0e5), -20.0);
}

#[test]
fn water_properties_switch_at_freezing() {
    let m = ThermalModel::<f64>::default();
    assert_eq!(m.properties(Phase::Water, 1.0).conductivity, 0.6);
    assert_eq!(m.properties(Phase::Water, -1.0).conductivity, 2.2);
    assert_eq!(phase_state(0.0f64), WaterState::Ice);
}

#[test]
fn bridging_connects_isolated_particles() {
    let mut a = pair(Phase::Rock);
    a.particles.push(Particle { id: 2, center: Vec3::new(0.0, 0.0, 9.0), radius: 0.8, phase: Phase::Water, density: 960.0 });
    let paths = conduction_paths(&a, 0.01);
    assert_eq!(paths.len(), 2);
    assert!(paths.iter().any(|c| c.particle_b == 2 || c.particle_a == 2));
}

#[test]
fn heat_flux_sign() {
    assert_eq!(heat_flux(2.0f64, 3.0, 4.0, 6.0), -4.0);
}

fn desk() -> ParticleAssembly<f64> {
    generate_packing(&PackingConfig::desk_scale(8.0, 16.0, 21)).unwrap()
}

#[test]
fn end_faces_converge_to_boundary_temperature() {
    let a = desk();
    let model = ThermalModel::default();
    let paths = conduction_paths(&a, default_contact_tolerance(&a));
    let mut net = ThermalNetwork::new(&a, &paths, model);
    let mut field = TemperatureField::with_end_faces(&a, 20.0, 0.5);
    field.set_boundary_temperature(5.0);
    for _ in 0..200_000 {
        let dt = net.stable_time_step(&field);
        net.step(&mut field, dt).unwrap();
        if uniformity_report(&field).unwrap().max_deviation < 1e-6 {
            break;
        }
    }
    assert!(uniformity_report(&field).unwrap().max_deviation < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn insulated_steps_conserve_heat_and_stay_bounded(seed in 0u64..1000, frac in 0.1..1.0f64) {
        let a = desk();
        let model = ThermalModel::default();
        let paths = conduction_paths(&a, default_contact_tolerance(&a));
        let mut net = ThermalNetwork::new(&a, &paths, model);
        let mut field = TemperatureField::uniform(a.len(), 0.0);
        for (i, t) in field.temperatures.iter_mut().enumerate() {
            *t = 1.0 + ((i as u64 * 2654435761 + seed) % 97) as f64 / 4.0;
        }
        let (lo, hi) = field.min_max();
        let e0 = field.thermal_energy(&a, &model);
        for _ in 0..50 {
            let dt = frac * net.stable_time_step(&field);
            net.step(&mut field, dt).unwrap();
        }
        let (lo2, hi2) = field.min_max();
        prop_assert!(lo2 >= lo - 1e-12 && hi2 <= hi + 1e-12);
        let e1 = field.thermal_energy(&a, &model);
        prop_assert!(((e1 - e0) / e0).abs() < 1e-12);
    }
}
