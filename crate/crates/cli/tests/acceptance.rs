//! One line per acceptance criterion; exits nonzero when any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use braidstab::braid::conjugacy::DEFAULT_BUDGET;
use braidstab::braid::extract::DEFAULT_COLLISION_RADIUS;
use braidstab::braid::{are_conjugate, braid_word_with_retry, BraidWord, GeometricBraid};
use braidstab::entropy::gamma_estimate;
use braidstab::flow::{Flow, HamiltonianFlow};
use braidstab::gf2::run_corpus;
use braidstab::ham::{compose_hamiltonians, kth_power_hamiltonian, make_admissible_disk_hamiltonian, Bump, InverseFlowMode, TimeProfile};
use braidstab::orbits::{find_periodic_points, orbit_from_seed, OrbitSearchConfig, SeedGrid, StabilityType};
use braidstab::stability::{run_stability_experiment, scenario_b};
use braidstab::symbolic::{build_q, q_braid_gamma_demo, verify_q_structure};
use braidstab::{Surface, TimePeriodicHamiltonian, Vec2};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn w(n: usize, s: &str) -> BraidWord {
    BraidWord::parse(n, s).unwrap()
}

fn rate(word: &BraidWord, n: usize) -> f64 {
    gamma_estimate(word, n).unwrap().rate
}

fn within(t: Instant, limit: Duration) -> (bool, String) {
    let e = t.elapsed();
    (e < limit, format!("{:.2}s", e.as_secs_f64()))
}

fn c1() -> Verdict {
    let t = Instant::now();
    let r = rate(&w(3, "1 -2"), 18);
    let (fast, el) = within(t, Duration::from_secs(5));
    let target = ((3.0 + 5f64.sqrt()) / 2.0).ln();
    verdict((0.952..=0.973).contains(&r) && fast, format!("rate {r:.6} (target {target:.6}), {el}"))
}

fn c2() -> Verdict {
    let t = Instant::now();
    let base = w(3, "1 -2");
    let r1 = rate(&base, 18);
    let r2 = rate(&base.pow(2), 18);
    let r3 = rate(&base.pow(3), 18);
    let (fast, el) = within(t, Duration::from_secs(30));
    let (d2, d3) = ((r2 - 2.0 * r1).abs(), (r3 - 3.0 * r1).abs());
    verdict(d2 <= 0.03 && d3 <= 0.05 && fast, format!("|w2 - 2w| = {d2:.4}, |w3 - 3w| = {d3:.4}, {el}"))
}

fn c3() -> Verdict {
    let base = w(3, "1 -2");
    let r = rate(&base, 18);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let len = rng.gen_range(1..=4);
        let letters: Vec<i32> = (0..len).map(|_| rng.gen_range(1..=2) * if rng.gen() { 1 } else { -1 }).collect();
        let u = BraidWord::new(3, letters).unwrap();
        worst = worst.max((rate(&base.conjugate_by(&u).unwrap(), 18) - r).abs());
    }
    verdict(worst <= 0.02, format!("max deviation {worst:.4} over 50 conjugators"))
}

fn c4() -> Verdict {
    let r = rate(&w(3, "1 2"), 18);
    verdict(r <= 0.05, format!("rate {r:.6}"))
}

/// n points at radius ½ carried counterclockwise by `alpha` over unit time
/// with the closed-form flow of a centred rotation.
fn rigid(n: usize, alpha: f64) -> GeometricBraid {
    let h = TimePeriodicHamiltonian::centered_rotation(-alpha);
    let times: Vec<f64> = (0..=1000).map(|j| j as f64 / 1000.0).collect();
    let strands = (0..n)
        .map(|k| {
            let a = 0.2 + 2.0 * PI * k as f64 / n as f64;
            let p = Vec2::new(0.5 * a.cos(), 0.5 * a.sin());
            times.iter().map(|&t| h.exact_flow(0.0, t, p).unwrap().0).collect()
        })
        .collect();
    GeometricBraid::from_strands(Surface::Disk, times, strands, DEFAULT_COLLISION_RADIUS).unwrap()
}

fn c5() -> Verdict {
    let mut cases: Vec<(String, GeometricBraid, BraidWord)> = vec![
        ("2 points, half turn".into(), rigid(2, PI), w(2, "1")),
        ("3 points, third turn".into(), rigid(3, 2.0 * PI / 3.0), w(3, "1 2")),
    ];
    for n in 2..=5 {
        let gens: Vec<i32> = (1..n as i32).collect();
        let rot = BraidWord::new(n, gens).unwrap();
        cases.push((format!("{n} points, 1/{n} turn"), rigid(n, 2.0 * PI / n as f64), rot.clone()));
        cases.push((format!("{n} points, full twist"), rigid(n, 2.0 * PI), rot.pow(n as i32)));
    }
    let mut failures = Vec::new();
    for (name, g, expected) in &cases {
        for j in 0..16 {
            let theta = 0.05 + PI * (j as f64 + 0.31) / 16.0;
            let ok = braid_word_with_retry(g, theta, DEFAULT_COLLISION_RADIUS)
                .ok()
                .and_then(|(word, _)| are_conjugate(&word, expected, DEFAULT_BUDGET).ok())
                .is_some_and(|v| v.is_yes());
            if !ok {
                failures.push(format!("{name} at {theta:.3}"));
            }
        }
    }
    verdict(failures.is_empty(), format!("{} cases x 16 angles, failures: {failures:?}", cases.len()))
}

fn presets() -> Vec<TimePeriodicHamiltonian> {
    let bump = Bump::new(Vec2::new(0.2, 0.1), 0.4, 0.5).with_profile(TimeProfile::Smooth);
    let base = TimePeriodicHamiltonian::rotation(2.0);
    vec![
        base.clone(),
        TimePeriodicHamiltonian::centered_rotation(1.5),
        TimePeriodicHamiltonian::torus_shear(),
        TimePeriodicHamiltonian::pendulum(),
        TimePeriodicHamiltonian::forced_pendulum(0.5),
        TimePeriodicHamiltonian::cellular(0.5),
        TimePeriodicHamiltonian::bump(bump),
        compose_hamiltonians(&base, &TimePeriodicHamiltonian::bump(bump), InverseFlowMode::Exact { step: 1e-3 }).unwrap(),
        kth_power_hamiltonian(&TimePeriodicHamiltonian::cellular(0.5), 2).unwrap(),
        make_admissible_disk_hamiltonian(1.0, TimePeriodicHamiltonian::rotation(1.0).field().clone(), 0.5).unwrap(),
    ]
}

fn c6() -> Verdict {
    let pts = [Vec2::new(0.1, 0.2), Vec2::new(-0.4, 0.3), Vec2::new(0.35, -0.55)];
    let (mut det_err, mut trip): (f64, f64) = (0.0, 0.0);
    let hs = presets();
    for h in &hs {
        let f = HamiltonianFlow::with_step(h.clone(), 1e-3);
        for &p in &pts {
            let (q, m) = f.advance_with_jacobian(0.0, 1.0, p).unwrap();
            det_err = det_err.max((m.det() - 1.0).abs());
            let back = f.advance(1.0, 0.0, q).unwrap();
            trip = trip.max((back - p).norm());
        }
    }
    verdict(det_err <= 1e-6 && trip <= 1e-8, format!("{} presets, max |det - 1| = {det_err:.2e}, roundtrip {trip:.2e}", hs.len()))
}

fn c7() -> Verdict {
    let cfg = OrbitSearchConfig { samples_per_period: 50, ..Default::default() };
    let rot = HamiltonianFlow::with_step(TimePeriodicHamiltonian::rotation(2f64.sqrt()), 1e-3);
    let mut counts = Vec::new();
    let mut rot_ok = true;
    for k in 1..=3 {
        let set = find_periodic_points(&rot, k, &SeedGrid::Disk { n: 32 }, &cfg).unwrap();
        counts.push(set.len());
        rot_ok &= set.len() == 1 && set.orbits[0].seed.lift().norm() < 1e-9;
    }
    let pend = HamiltonianFlow::with_step(TimePeriodicHamiltonian::pendulum(), 1e-3);
    let set = find_periodic_points(&pend, 1, &SeedGrid::Torus { n: 32 }, &OrbitSearchConfig::default()).unwrap();
    let mut eq: Vec<(Vec2, StabilityType)> = set.orbits.iter().map(|o| (o.seed.coords(), o.stability)).collect();
    eq.sort_by(|a, b| a.0.x.total_cmp(&b.0.x));
    let labels_ok = eq.len() == 2
        && eq[0].0.norm() < 1e-9
        && eq[0].1 == StabilityType::Hyperbolic
        && (eq[1].0 - Vec2::new(0.5, 0.0)).norm() < 1e-9
        && eq[1].1 == StabilityType::Elliptic;
    // linearizations: x'' = x at the origin, x'' = −x at (½, 0)
    let o = orbit_from_seed(&pend, Vec2::ZERO, 1, &OrbitSearchConfig::default()).unwrap();
    let mut re = [o.multipliers[0].re, o.multipliers[1].re];
    re.sort_by(|a, b| b.total_cmp(a));
    let e = orbit_from_seed(&pend, Vec2::new(0.5, 0.0), 1, &OrbitSearchConfig::default()).unwrap();
    let dev = (re[0] - 1f64.exp())
        .abs()
        .max((re[1] - (-1f64).exp()).abs())
        .max(e.multipliers.iter().map(|m| (m.re - 1f64.cos()).abs().max((m.im.abs() - 1f64.sin()).abs())).fold(0.0, f64::max));
    verdict(
        rot_ok && labels_ok && dev <= 1e-4,
        format!("rotation counts {counts:?}, pendulum {:?}, multiplier deviation {dev:.2e}", eq.iter().map(|e| e.1).collect::<Vec<_>>()),
    )
}

fn c8() -> Verdict {
    let cfg = OrbitSearchConfig::default();
    let c = 1.7;
    let adm = make_admissible_disk_hamiltonian(c, TimePeriodicHamiltonian::rotation(c).field().clone(), 0.5).unwrap();
    let a0 = orbit_from_seed(&HamiltonianFlow::with_step(adm, 1e-3), Vec2::ZERO, 1, &cfg).unwrap().action.unwrap();
    let e0 = (a0 + c / 2.0).abs();
    let circ = HamiltonianFlow::with_step(TimePeriodicHamiltonian::centered_rotation(2.0 * PI), 1e-3);
    let mut e1: f64 = 0.0;
    for r in [0.2, 0.5, 0.8] {
        let a = orbit_from_seed(&circ, Vec2::new(r, 0.0), 1, &cfg).unwrap().action.unwrap();
        e1 = e1.max((a - 2.0 * PI * r * r).abs());
    }
    verdict(e0 <= 1e-10 && e1 <= 1e-5, format!("constant orbit error {e0:.2e}, circle error {e1:.2e}"))
}

fn c9() -> Verdict {
    let t = Instant::now();
    let r = match run_stability_experiment(&scenario_b()) {
        Ok(r) => r,
        Err(e) => return verdict(false, format!("experiment failed: {e}")),
    };
    let (fast, el) = within(t, Duration::from_secs(600));
    let eps = r.isolation.epsilon;
    let mut checked = 0;
    let mut bad = Vec::new();
    for row in &r.rows {
        if row.hofer <= 0.5 * eps {
            checked += 1;
            let drift_ok = row.max_drift.is_some_and(|d| d <= row.hofer + 1e-4);
            if !row.verdict.is_yes() || !drift_ok {
                bad.push(row.amplitude);
            }
        }
    }
    verdict(
        r.rows.len() == 10 && checked > 0 && bad.is_empty() && !r.falsified && fast,
        format!(
            "epsilon {eps:.4e}, {checked} rows below epsilon/2, failing {bad:?}, falsified {}, {el}",
            r.falsified
        ),
    )
}

fn c10() -> Verdict {
    let t = Instant::now();
    let r = run_corpus(20240601, 1000, 6);
    let (fast, el) = within(t, Duration::from_secs(60));
    verdict(
        r.constructed_and_verified == 1000 && r.oracle_found == 1000 && fast,
        format!("constructed {}/1000, oracle {}/1000, {el}", r.constructed_and_verified, r.oracle_found),
    )
}

fn c11() -> Verdict {
    let t = Instant::now();
    let checks_ok = (3..=12).all(|m| {
        build_q(m).unwrap().period() == 8 * (m - 2) && verify_q_structure(m).unwrap().all_pass()
    });
    let demos: Vec<(usize, f64, f64)> = [4, 5]
        .iter()
        .map(|&m| {
            let d = q_braid_gamma_demo(m, 12).unwrap();
            (m, d.estimate.rate, d.bound)
        })
        .collect();
    let (fast, el) = within(t, Duration::from_secs(300));
    let demo_ok = demos.iter().all(|&(_, r, b)| r >= b - 0.1);
    verdict(checks_ok && demo_ok && fast, format!("checks m=3..12 {checks_ok}, demos (m, rate, bound) {demos:.3?}, {el}"))
}

fn artifacts(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timings.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn c12() -> Verdict {
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let runs = [
        ("orbits", "pendulum-orbits.toml"),
        ("braid", "braid-period3.toml"),
        ("entropy", "entropy-word.toml"),
        ("stability", "stability-rotation.toml"),
        ("gf2-corpus", "gf2-corpus.toml"),
        ("symbolic-check", "symbolic-m4.toml"),
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (cmd, file) in runs {
        let mut outs = Vec::new();
        for threads in ["1", "2"] {
            let out = tmp.path().join(cmd).join(threads);
            let status = Command::new(env!("CARGO_BIN_EXE_braidstab"))
                .args([cmd, "--scenario"])
                .arg(scenarios.join(file))
                .args(["--threads", threads, "--out"])
                .arg(&out)
                .output()
                .unwrap()
                .status;
            if !status.success() {
                differing.push(format!("{cmd} exited {status}"));
            }
            outs.push(artifacts(&out));
        }
        if outs[0] != outs[1] || outs[0].is_empty() {
            differing.push(cmd.to_string());
        }
    }
    verdict(differing.is_empty(), format!("{} commands rerun, differing: {differing:?}", runs.len()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Verdict); 12] = [
        (1, "entropy estimate of s1 s2^-1", c1),
        (2, "entropy scaling under powers", c2),
        (3, "entropy conjugacy invariance", c3),
        (4, "finite-order braid", c4),
        (5, "braid extraction oracle", c5),
        (6, "symplectic integrity", c6),
        (7, "orbit solver", c7),
        (8, "action values", c8),
        (9, "stability experiment", c9),
        (10, "transverse pairing corpus", c10),
        (11, "symbolic orbit Q", c11),
        (12, "determinism", c12),
    ];
    let mut failed = 0;
    for (id, name, f) in criteria {
        let v = f();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {id:>2} {}: {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {}/12 passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
