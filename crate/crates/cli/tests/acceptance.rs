//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 2 is a known failure: the tabulated group means do not follow
//! from the tabulated raw areas. Any other failure makes the run exit nonzero.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use frostdem::analysis::*;
use frostdem::frostheave::{check_bond_failure, percent_increase, run_freeze, FreezeConfig};
use frostdem::mechanics::*;
use frostdem::packing::*;
use frostdem::thermal::*;
use frostdem::{Rational, Vec3};

const KNOWN_FAILURES: &[usize] = &[2];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn c1() -> Verdict {
    let r = compute_resolution(Rational::from_integer(25), Rational::new(6, 5), Rational::from_integer(1)).unwrap();
    verdict(r.value == Rational::from_integer(125), format!("resolution = {}", r.value))
}

fn c2() -> Verdict {
    let groups = vec![
        vec![14250.0, 15240.0, 14561.0],
        vec![17574.0, 18400.0, 17850.0],
        vec![24250.0, 23830.0, 23760.0],
    ];
    let s = group_area_statistics(&groups).unwrap();
    let means_ok = [14683.0, 17944.0, 23956.0].iter().zip(&s).all(|(want, g)| close(g.mean_area, *want, 1.0));
    let rates_ok = close(s[1].change_rate_pct, 22.21, 0.02) && close(s[2].change_rate_pct, 63.15, 0.02);
    verdict(
        means_ok && rates_ok,
        format!(
            "means {:.2} {:.2} {:.2} (want 14683 17944 23956), rates {:.3} {:.3} (want 22.21 63.15)",
            s[0].mean_area, s[1].mean_area, s[2].mean_area, s[1].change_rate_pct, s[2].change_rate_pct
        ),
    )
}

fn c3() -> Verdict {
    let got: Vec<f64> = [(42.727, 42.924), (42.727, 42.936), (33.893, 33.933)]
        .iter()
        .map(|&(b, c)| percent_increase(b, c).unwrap())
        .collect();
    let ok = got.iter().zip([0.46105, 0.48913, 0.11801]).all(|(g, w)| close(*g, w, 5e-4));
    verdict(ok, format!("{:.5} {:.5} {:.5}", got[0], got[1], got[2]))
}

fn c4() -> Verdict {
    let a = dissipation_efficiency(97.40, 300.0).unwrap();
    let b = dissipation_efficiency(151.10, 300.0).unwrap();
    verdict(close(a, 32.5, 0.1) && close(b, 50.4, 0.1), format!("eta = {a:.2} %, {b:.2} %"))
}

fn c5() -> Verdict {
    let n = 101;
    let bar = Bar { area: 1.9635e-3, wave_speed: 5000.0, modulus: 10.0 };
    let rec = WaveRecord {
        time: (0..n).map(|i| 1.0e-4 * i as f64 / (n - 1) as f64).collect(),
        incident: Pulse::constant(10.0, 0.001, n),
        reflected: Pulse::constant(3.0, 0.0003, n),
        transmitted: Pulse::constant(5.0, 0.0005, n),
        bar,
        specimen: None,
    };
    let e = compute_energies(&rec).unwrap();
    let rel = (e.incident - 9.8175).abs() / 9.8175;
    let identity = [(1.0, 0.3, 0.2), (300.0, 97.4, 51.1), (7.5, 9.0, 0.0)]
        .iter()
        .all(|&(i, r, t)| EnergyReport::from_components(i, r, t).absorbed == i - r - t)
        && e.absorbed == e.incident - e.reflected - e.transmitted;
    verdict(rel < 0.005 && identity, format!("E_i = {:.6} J (rel err {rel:.1e}), balance exact = {identity}", e.incident))
}

fn c6() -> Verdict {
    let pts: Vec<(f64, f64)> = [200.0f64, 400.0, 600.0].iter().map(|&r| (r, 1.0 + 0.01 * r.powf(0.5))).collect();
    let m = fit_rdif_model(&pts).unwrap();
    let pair = fit_rdif_model(&[(200.0, 1.05), (600.0, 1.32)]).unwrap();
    let ok = close(m.k, 0.01, 1e-6) && close(m.m, 0.5, 1e-6) && pair.residual < 1e-12;
    verdict(ok, format!("k = {:.9}, m = {:.9}; pair m = {:.4}, residual = {:.1e}", m.k, m.m, pair.m, pair.residual))
}

fn c7() -> Verdict {
    let a = generate_packing(&PackingConfig::desk_scale(9.2, 18.4, 7)).unwrap();
    let model = ThermalModel::default();
    let paths = conduction_paths(&a, default_contact_tolerance(&a));

    let mut net = ThermalNetwork::new(&a, &paths, model);
    let mut field = TemperatureField::uniform(a.len(), 0.0);
    for (i, t) in field.temperatures.iter_mut().enumerate() {
        *t = 2.0 + (i * 37 % 23) as f64;
    }
    let e0 = field.thermal_energy(&a, &model);
    let dt = net.stable_time_step(&field);
    for _ in 0..100_000 {
        net.step(&mut field, dt).unwrap();
    }
    let drift = ((field.thermal_energy(&a, &model) - e0) / e0).abs();

    let mut net = ThermalNetwork::new(&a, &paths, model);
    let mut field = TemperatureField::with_end_faces(&a, 20.0, 0.5);
    field.set_boundary_temperature(-5.0);
    let mut steps = 0;
    let mut dev = f64::INFINITY;
    while steps < 2_000_000 {
        let dt = net.stable_time_step(&field);
        net.step(&mut field, dt).unwrap();
        steps += 1;
        if steps % 100 == 0 {
            dev = uniformity_report(&field).unwrap().max_deviation;
            if dev < 1e-6 {
                break;
            }
        }
    }
    verdict(
        a.len() >= 500 && drift < 1e-6 && dev < 1e-6,
        format!("{} particles, energy drift {drift:.1e} over 1e5 steps, deviation {dev:.1e} after {steps} steps", a.len()),
    )
}

fn freeze_forces(config: PackingConfig<f64>, materials: MaterialSet<f64>) -> (usize, Vec<f64>) {
    let a = generate_packing(&config).unwrap();
    let n = a.len();
    let mut sim = Simulation::bonded(a, materials, DynamicsParams::default()).unwrap();
    let out = run_freeze(&mut sim, &FreezeConfig::default()).unwrap();
    (n, out.stages.iter().map(|s| s.stats.max_contact_force).collect())
}

fn c8() -> Verdict {
    let (ns, sat) = freeze_forces(PackingConfig::desk_scale(12.0, 24.0, 5), MaterialSet::saturated());
    let (nd, dry) = freeze_forces(PackingConfig::desk_scale(12.0, 24.0, 5).dry(), MaterialSet::dry());
    let sat_ok = sat[1] < sat[0] && sat[2] > sat[1] && sat[3] > sat[2];
    let drift = dry[1..3].iter().map(|f| percent_increase(dry[0], *f).unwrap().abs()).fold(0.0, f64::max);
    verdict(
        ns >= 1000 && nd >= 1000 && sat_ok && drift < 0.2,
        format!(
            "saturated ({ns}) max force {:.4} {:.4} {:.4} {:.4} N; dry ({nd}) drift through -10 C {drift:.3} %",
            sat[0], sat[1], sat[2], sat[3]
        ),
    )
}

fn c9() -> Verdict {
    // One bond in tension: bisect the failure load.
    let bond = BondState::new(0, 1, ContactKind::RockRock, 1.0, 1.0, 2.0, &BondMaterial::sandstone_rock(), BondAreaRule::SumOfRadii, true);
    let want = bond.strength.tensile * bond.area;
    let (mut lo, mut hi): (f64, f64) = (0.0, 10.0 * want);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let mut b = bond.clone();
        b.normal_force = -mid;
        if check_bond_failure(&b) == BondStatus::Intact {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let load_err = (hi - want).abs() / want;

    // Bonded dimer with a gap, so only the bond acts.
    let p = |id, x: f64| Particle { id, center: Vec3::new(x, 0.0, 5.0), radius: 1.0, phase: Phase::Rock, density: 2600.0 };
    let a = ParticleAssembly {
        particles: vec![p(0, 0.0), p(1, 2.05)],
        bonds: vec![BondRef { a: 0, b: 1 }],
        domain: Cylinder { radius: 5.0, height: 10.0 },
    };
    let params = DynamicsParams { local_damping: 0.0, ..DynamicsParams::default() };
    let mut sim = Simulation::new(a, MaterialSet::saturated(), params).unwrap();
    let k = sim.contacts()[0].intact_bond().unwrap().axial_stiffness();
    let omega = (k / (sim.mass(0) / 2.0)).sqrt();
    sim.set_velocity(0, Vec3::new(-50.0, 0.0, 0.0));
    sim.set_velocity(1, Vec3::new(50.0, 0.0, 0.0));
    let dt = sim.stable_time_step() / 50.0;
    let rel = |s: &Simulation<f64>| s.velocity(1).x - s.velocity(0).x;
    let mut last = rel(&sim);
    let mut crossings = Vec::new();
    while crossings.len() < 9 {
        sim.integrate_step(dt).unwrap();
        let v = rel(&sim);
        if v.signum() != last.signum() {
            crossings.push(sim.time - dt * v.abs() / (v - last).abs());
        }
        last = v;
    }
    let period = (crossings[8] - crossings[0]) / 4.0;
    let freq_err = (period * omega / (2.0 * std::f64::consts::PI) - 1.0).abs();

    let pts: Vec<(f64, f64)> = (0..=200).map(|i| (i as f64 * 1e-5, 7.3e3 * i as f64 * 1e-5)).collect();
    let r = extract_mechanical_params(&StressStrainCurve::from_points(&pts)).unwrap();
    let mod_err = (r.elastic_modulus - 7.3).abs();

    verdict(
        load_err < 1e-9 && freq_err < 0.01 && mod_err < 1e-9,
        format!("failure load rel err {load_err:.1e}, frequency rel err {freq_err:.1e}, modulus err {mod_err:.1e} GPa"),
    )
}

fn uniaxial(a: &ParticleAssembly<f64>, m: MaterialSet<f64>) -> frostdem::Result<MechanicalReport<f64>> {
    let mut sim = Simulation::bonded(a.clone(), m, DynamicsParams::default())?;
    sim.equilibrate(0.5 * EQUILIBRIUM_RATIO, 500_000)?;
    sim.freeze_motion();
    let curve = run_uniaxial_test(&mut sim, &UniaxialConfig::default())?;
    extract_mechanical_params(&curve)
}

fn c10() -> Verdict {
    let a = generate_packing(&PackingConfig::desk_scale(8.0, 16.0, 3).dry()).unwrap();
    let base = MaterialSet::dry();
    let hidden = base.rock_rock.with_stiffness_scaled(1.3).with_strength_scaled(0.8);
    let targets = uniaxial(&a, base.rescaled_to(hidden)).unwrap();
    let out = calibrate(&targets, &base.rock_rock, 20, |m| uniaxial(&a, base.rescaled_to(*m))).unwrap();
    let es = (out.report.peak_strength - targets.peak_strength).abs() / targets.peak_strength;
    let em = (out.report.elastic_modulus - targets.elastic_modulus).abs() / targets.elastic_modulus;
    verdict(
        a.len() <= 2000 && out.converged && out.runs <= 20 && es < 0.05 && em < 0.05,
        format!(
            "{} particles, targets {:.2} MPa / {:.3} GPa, {} runs, errors {:.2} % / {:.2} %",
            a.len(),
            targets.peak_strength,
            targets.elastic_modulus,
            out.runs,
            es * 100.0,
            em * 100.0
        ),
    )
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_frostdem")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(String::from_utf8_lossy(&out.stderr).into_owned())
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c12() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("areas.txt"), "20 14250 15240 14561\n-10 17574 18400 17850\n-20 24250 23830 23760\n").unwrap();
    fs::write(d.join("rdif.txt"), "200 1.05\n400 1.18\n600 1.32\n").unwrap();
    let pts: String = (0..10_000).map(|i| format!("{} {}\n", i % 100, i / 100)).collect();
    fs::write(d.join("points.txt"), pts).unwrap();
    let configs = [
        ("analyze", "[analysis]\narea_groups = areas.txt\nrdif_points = rdif.txt\npoints = points.txt\n"),
        ("freeze", "[run]\nseed = 4\n[packing]\ncylinder_radius = 8\ncylinder_height = 16\n[thermal]\ntarget_temp = -5\n"),
        (
            "compress",
            "[run]\nseed = 4\n[packing]\nmodel = dry\ncylinder_radius = 8\ncylinder_height = 16\n[mechanics]\ntarget_strain = 0.003\n",
        ),
    ];
    let mut identical = 0;
    let mut notes = Vec::new();
    for (cmd, text) in configs {
        let cfg = d.join(format!("{cmd}.cfg"));
        fs::write(&cfg, text).unwrap();
        let mut snaps = Vec::new();
        for run in 0..2 {
            let out = d.join(format!("{cmd}-{run}"));
            if let Err(e) = run_cli(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]) {
                notes.push(format!("{cmd} failed: {}", e.trim()));
                break;
            }
            snaps.push(snapshot(&out));
        }
        if snaps.len() == 2 && snaps[0] == snaps[1] {
            identical += 1;
            notes.push(format!("{cmd}: {} files identical", snaps[0].len()));
        } else if snaps.len() == 2 {
            notes.push(format!("{cmd}: artifacts differ"));
        }
    }
    verdict(identical == configs.len(), notes.join("; "))
}

fn c11() -> Verdict {
    let line: Vec<[f64; 2]> = (0..2000).map(|i| [i as f64, 0.5 * i as f64]).collect();
    let plane: Vec<[f64; 2]> = (0..10_000).map(|i| [(i % 100) as f64, (i / 100) as f64]).collect();
    let l = box_counting_dimension(&line, BoxScales::Auto).unwrap();
    let p = box_counting_dimension(&plane, BoxScales::Auto).unwrap();
    verdict(
        close(l.dimension, 1.0, 0.1) && close(p.dimension, 2.0, 0.1) && l.r_squared > 0.98 && p.r_squared > 0.98,
        format!("line D = {:.4} (R2 {:.4}), plane D = {:.4} (R2 {:.4})", l.dimension, l.r_squared, p.dimension, p.r_squared),
    )
}

fn main() -> ExitCode {
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let checks: [(usize, fn() -> Verdict); 12] =
        [(1, c1), (2, c2), (3, c3), (4, c4), (5, c5), (6, c6), (7, c7), (8, c8), (9, c9), (10, c10), (11, c11), (12, c12)];
    let mut unexpected = 0;
    for (n, check) in checks {
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let t = Instant::now();
        let v = check();
        let known = KNOWN_FAILURES.contains(&n);
        let tag = match (v.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => {
                unexpected += 1;
                "FAIL"
            }
        };
        println!("criterion {n}: {tag} [{:.1}s] {}", t.elapsed().as_secs_f64(), v.detail);
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
