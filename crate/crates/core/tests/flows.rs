use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use braidstab::flow::{Flow, HamiltonianFlow, ProductFlow};
use braidstab::ham::{compose_hamiltonians, kth_power_hamiltonian, Bump, InverseFlowMode, TimeProfile};
use braidstab::orbits::{find_periodic_points, orbit_from_seed, OrbitSearchConfig, SeedGrid, StabilityType};
use braidstab::{Mat2, Surface, TimePeriodicHamiltonian, Vec2};

const STEP: f64 = 1e-3;

fn disk_grid(n: usize, r: f64) -> Vec<Vec2> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = Vec2::new(-r + 2.0 * r * i as f64 / (n - 1) as f64, -r + 2.0 * r * j as f64 / (n - 1) as f64);
            if p.norm() <= r {
                v.push(p);
            }
        }
    }
    v
}

#[test]
fn composed_hamiltonian_matches_chained_flows() {
    let outer = TimePeriodicHamiltonian::rotation(1.3);
    let inner = TimePeriodicHamiltonian::bump(Bump::new(Vec2::new(0.2, -0.1), 0.4, 0.3).with_profile(TimeProfile::Smooth));
    let composed = compose_hamiltonians(&outer, &inner, InverseFlowMode::Exact { step: STEP }).unwrap();
    let fc = HamiltonianFlow::with_step(composed, STEP);
    let fo = HamiltonianFlow::with_step(outer.clone(), STEP);
    let fi = HamiltonianFlow::with_step(inner.clone(), STEP);
    let product = ProductFlow::new(fo.clone(), fi.clone());
    for p in disk_grid(10, 0.9) {
        let chained = fo.advance(0.0, 1.0, fi.advance(0.0, 1.0, p).unwrap()).unwrap();
        let direct = fc.advance(0.0, 1.0, p).unwrap();
        assert!((direct - chained).norm() < 1e-5, "{p:?}: {direct:?} vs {chained:?}");
        let via_product = product.advance(0.0, 1.0, p).unwrap();
        assert!((via_product - chained).norm() < 1e-12);
    }
}

#[test]
fn product_flow_jacobian_is_symplectic() {
    let fo = HamiltonianFlow::with_step(TimePeriodicHamiltonian::rotation(0.7), STEP);
    let fi = HamiltonianFlow::with_step(TimePeriodicHamiltonian::bump(Bump::new(Vec2::new(0.1, 0.3), 0.3, 0.5)), STEP);
    let product = ProductFlow::new(fo, fi);
    for p in disk_grid(5, 0.8) {
        let (_, m) = product.advance_with_jacobian(0.0, 2.5, p).unwrap();
        assert_abs_diff_eq!(m.det(), 1.0, epsilon = 1e-9);
    }
}

#[test]
fn kth_power_time_one_is_base_time_k() {
    let base = TimePeriodicHamiltonian::forced_pendulum(0.4);
    for k in [2u32, 3] {
        let power = HamiltonianFlow::with_step(kth_power_hamiltonian(&base, k).unwrap(), STEP / k as f64);
        let flow = HamiltonianFlow::with_step(base.clone(), STEP);
        for p in [Vec2::new(0.1, 0.05), Vec2::new(0.4, -0.2), Vec2::new(0.77, 0.3)] {
            let a = power.advance(0.0, 1.0, p).unwrap();
            let b = flow.advance(0.0, k as f64, p).unwrap();
            assert!((a - b).norm() < 1e-9, "k={k} {p:?}");
        }
    }
    let rot = HamiltonianFlow::with_step(kth_power_hamiltonian(&TimePeriodicHamiltonian::rotation(0.5), 4).unwrap(), STEP);
    let (_, m) = rot.advance_with_jacobian(0.0, 1.0, Vec2::new(0.3, 0.0)).unwrap();
    assert!((m - Mat2::rotation(-2.0)).max_abs() < 1e-5);
}

#[test]
fn irrational_rotation_has_only_the_origin() {
    let flow = HamiltonianFlow::with_step(TimePeriodicHamiltonian::rotation(2f64.sqrt()), STEP);
    let cfg = OrbitSearchConfig { samples_per_period: 50, ..Default::default() };
    for k in 1..=3 {
        let set = find_periodic_points(&flow, k, &SeedGrid::Disk { n: 32 }, &cfg).unwrap();
        assert_eq!(set.len(), 1, "k={k}");
        assert!(set.orbits[0].seed.lift().norm() < 1e-9);
        assert!(set.degenerate.is_empty());
        assert_eq!(set.orbits[0].stability, StabilityType::Elliptic);
    }
}

#[test]
fn pendulum_equilibria_and_linearization() {
    let flow = HamiltonianFlow::with_step(TimePeriodicHamiltonian::pendulum(), STEP);
    let set = find_periodic_points(&flow, 1, &SeedGrid::Torus { n: 16 }, &OrbitSearchConfig::default()).unwrap();
    let mut found: Vec<(Vec2, StabilityType)> = set.orbits.iter().map(|o| (o.seed.coords(), o.stability)).collect();
    found.sort_by(|a, b| a.0.x.total_cmp(&b.0.x));
    assert_eq!(found.len(), 2);
    assert!(found[0].0.norm() < 1e-9);
    assert!((found[1].0 - Vec2::new(0.5, 0.0)).norm() < 1e-9);
    assert_eq!(found[0].1, StabilityType::Hyperbolic);
    assert_eq!(found[1].1, StabilityType::Elliptic);

    // linear flows x'' = x and x'' = −x over unit time
    let hyp = [1f64.exp(), (-1f64).exp()];
    let o = orbit_from_seed(&flow, Vec2::new(0.0, 0.0), 1, &OrbitSearchConfig::default()).unwrap();
    let mut re = [o.multipliers[0].re, o.multipliers[1].re];
    re.sort_by(|a, b| b.total_cmp(a));
    assert_abs_diff_eq!(re[0], hyp[0], epsilon = 1e-4);
    assert_abs_diff_eq!(re[1], hyp[1], epsilon = 1e-4);
    let e = orbit_from_seed(&flow, Vec2::new(0.5, 0.0), 1, &OrbitSearchConfig::default()).unwrap();
    for m in e.multipliers {
        assert_abs_diff_eq!(m.re, 1f64.cos(), epsilon = 1e-4);
        assert_abs_diff_eq!(m.im.abs(), 1f64.sin(), epsilon = 1e-4);
    }
}

#[test]
fn circle_actions_of_a_full_turn() {
    let h = TimePeriodicHamiltonian::centered_rotation(2.0 * PI);
    let flow = HamiltonianFlow::with_step(h, STEP);
    for r in [0.2, 0.5, 0.8] {
        let o = orbit_from_seed(&flow, Vec2::new(r, 0.0), 1, &OrbitSearchConfig::default()).unwrap();
        assert_abs_diff_eq!(o.action.unwrap(), 2.0 * PI * r * r, epsilon = 1e-5);
        // the stationary functional is constant along the family
        assert_abs_diff_eq!(o.stationary_action.unwrap(), 0.0, epsilon = 1e-5);
    }
}

#[test]
fn torus_flows_stay_on_the_torus() {
    let flow = HamiltonianFlow::with_step(TimePeriodicHamiltonian::cellular(0.3), STEP);
    assert_eq!(flow.surface(), Surface::Torus);
    let s = flow.sample_orbit(Vec2::new(0.9, 0.95), 0.0, 1.0, 20).unwrap();
    assert!(s.trajectory.points.iter().all(|p| {
        let c = p.coords();
        (0.0..1.0).contains(&c.x) && (0.0..1.0).contains(&c.y)
    }));
}
