//! Periodic orbits of time-1 maps: Newton search, Floquet data, actions and
//! action-gap isolation.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::flow::{Flow, HamiltonianFlow, OrbitSamples};
use crate::geometry::{surface_distance, torus_min_image, Mat2, Surface, SurfacePoint, Vec2};
use crate::ham::TimePeriodicHamiltonian;
use crate::integrate::{lift_point, IntegrateError, IntegratorConfig, Trajectory};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OrbitError {
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("period must be at least 1")]
    ZeroPeriod,
    #[error("orbit is not contractible (winding ({0}, {1})); torus cappings are unsupported")]
    UnsupportedClass(i64, i64),
    #[error("lift displacement ({0}, {1}) is not within 0.25 of an integer pair")]
    SamplingResolution(f64, f64),
    #[error("orbits do not share a homotopy class")]
    ClassMismatch,
    #[error("expected {expected} actions, got {got}")]
    ActionCount { expected: usize, got: usize },
    #[error("orbit has no samples")]
    NoSamples,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitSearchConfig {
    pub tol_orbit: f64,
    pub merge_radius: f64,
    pub tol_eig: f64,
    /// Seeds whose Newton matrix exceeds this condition number are degenerate.
    pub max_condition: f64,
    pub max_newton: usize,
    /// Newton steps are clipped to this length.
    pub max_newton_step: f64,
    pub samples_per_period: usize,
}

impl Default for OrbitSearchConfig {
    fn default() -> Self {
        Self {
            tol_orbit: 1e-10,
            merge_radius: 1e-4,
            tol_eig: 1e-6,
            max_condition: 1e8,
            max_newton: 40,
            max_newton_step: 0.25,
            samples_per_period: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeedGrid {
    /// n×n cell centres of [-1,1]², kept when inside the unit disk.
    Disk { n: usize },
    /// n×n grid points i/n of the unit torus.
    Torus { n: usize },
    /// nx×ny grid points x0 + i(x1−x0)/nx, y0 + j(y1−y0)/ny.
    Rect { x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize },
    /// nr×ntheta cell centres in polar coordinates over r0 ≤ r ≤ r1.
    Annulus { r0: f64, r1: f64, nr: usize, ntheta: usize },
    Points { points: Vec<Vec2> },
    Union { grids: Vec<SeedGrid> },
}

impl SeedGrid {
    pub fn points(&self) -> Vec<Vec2> {
        match self {
            SeedGrid::Disk { n } => {
                let n = *n;
                let mut v = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let p = Vec2::new(
                            -1.0 + (2 * i + 1) as f64 / n as f64,
                            -1.0 + (2 * j + 1) as f64 / n as f64,
                        );
                        if p.norm_sq() <= 1.0 {
                            v.push(p);
                        }
                    }
                }
                v
            }
            SeedGrid::Torus { n } => {
                let n = *n;
                (0..n)
                    .flat_map(|i| (0..n).map(move |j| Vec2::new(i as f64 / n as f64, j as f64 / n as f64)))
                    .collect()
            }
            SeedGrid::Rect { x0, x1, y0, y1, nx, ny } => {
                let mut v = Vec::new();
                for i in 0..*nx {
                    for j in 0..*ny {
                        v.push(Vec2::new(
                            x0 + (x1 - x0) * i as f64 / *nx as f64,
                            y0 + (y1 - y0) * j as f64 / *ny as f64,
                        ));
                    }
                }
                v
            }
            SeedGrid::Annulus { r0, r1, nr, ntheta } => {
                let mut v = Vec::new();
                for i in 0..*nr {
                    let r = r0 + (r1 - r0) * (i as f64 + 0.5) / *nr as f64;
                    for j in 0..*ntheta {
                        let a = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / *ntheta as f64;
                        v.push(Vec2::new(r * a.cos(), r * a.sin()));
                    }
                }
                v
            }
            SeedGrid::Points { points } => points.clone(),
            SeedGrid::Union { grids } => grids.iter().flat_map(SeedGrid::points).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityType {
    Elliptic,
    Hyperbolic,
    Parabolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum HomotopyClass {
    /// Disk loops.
    Trivial,
    Winding { x: i64, y: i64 },
}

impl HomotopyClass {
    pub fn is_contractible(&self) -> bool {
        matches!(self, HomotopyClass::Trivial | HomotopyClass::Winding { x: 0, y: 0 })
    }
}

impl std::fmt::Display for HomotopyClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HomotopyClass::Trivial => f.write_str("trivial"),
            HomotopyClass::Winding { x, y } => write!(f, "({x},{y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub seed: SurfacePoint,
    pub period_k: u32,
    pub samples: Trajectory,
    pub velocities: Vec<Vec2>,
    pub energies: Vec<f64>,
    pub monodromy: Mat2,
    pub multipliers: [Complex64; 2],
    pub nondegenerate: bool,
    pub stability: StabilityType,
    /// −(signed area) + ∫H.
    pub action: Option<f64>,
    /// (signed area) + ∫H, the functional that is stationary along orbits of
    /// X_H = (H_y, −H_x). Action gaps and windows use this one.
    pub stationary_action: Option<f64>,
    pub homotopy_class: HomotopyClass,
    pub residual: f64,
}

/// A converged root that failed the non-degeneracy test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateRoot {
    pub point: Vec2,
    pub condition: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SearchDiagnostics {
    pub seeds: usize,
    pub converged: usize,
    pub diverged: usize,
    pub degenerate_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSet {
    pub orbits: Vec<PeriodicOrbit>,
    pub degenerate: Vec<DegenerateRoot>,
    pub diagnostics: SearchDiagnostics,
}

impl OrbitSet {
    pub fn from_orbits(orbits: Vec<PeriodicOrbit>) -> Self {
        Self { orbits, degenerate: Vec::new(), diagnostics: SearchDiagnostics::default() }
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// True when every orbit has the same free homotopy class.
    pub fn shared_class(&self) -> bool {
        self.orbits.windows(2).all(|w| w[0].homotopy_class == w[1].homotopy_class)
    }
}

/// φ^k(p) with its Jacobian.
pub fn time_k_map_with_jacobian(
    flow: &dyn Flow,
    p: &SurfacePoint,
    k: u32,
) -> Result<(SurfacePoint, Mat2), OrbitError> {
    if k == 0 {
        return Err(OrbitError::ZeroPeriod);
    }
    let (q, m) = flow.advance_with_jacobian(0.0, k as f64, p.lift())?;
    Ok((lift_point(flow.surface(), q), m))
}

/// Convenience form integrating `h` at the given step.
pub fn time_k_map(
    h: &TimePeriodicHamiltonian,
    p: &SurfacePoint,
    k: u32,
    step: f64,
) -> Result<(SurfacePoint, Mat2), OrbitError> {
    time_k_map_with_jacobian(&HamiltonianFlow::with_step(h.clone(), step), p, k)
}

fn displacement(surface: Surface, p: Vec2, q: Vec2) -> Vec2 {
    match surface {
        Surface::Disk => q - p,
        Surface::Torus => torus_min_image(q - p),
    }
}

pub fn classify_multipliers(m: &Mat2, tol_eig: f64) -> ([Complex64; 2], bool, StabilityType) {
    let mult = m.eigenvalues();
    let one = Complex64::new(1.0, 0.0);
    let nondegenerate = mult.iter().all(|z| (z - one).norm() > tol_eig);
    let tr = m.trace();
    let stability = if (tr.abs() - 2.0).abs() <= tol_eig {
        StabilityType::Parabolic
    } else if tr.abs() < 2.0 {
        StabilityType::Elliptic
    } else {
        StabilityType::Hyperbolic
    };
    (mult, nondegenerate, stability)
}

enum SeedOutcome {
    Root { point: Vec2, residual: f64 },
    Degenerate { point: Vec2, condition: f64 },
    Diverged,
}

fn newton(flow: &dyn Flow, seed: Vec2, k: u32, cfg: &OrbitSearchConfig) -> SeedOutcome {
    let surface = flow.surface();
    let mut p = seed;
    for _ in 0..cfg.max_newton {
        let Ok((q, m)) = flow.advance_with_jacobian(0.0, k as f64, p) else {
            return SeedOutcome::Diverged;
        };
        let g = displacement(surface, p, q);
        let res = g.norm();
        let a = m - Mat2::IDENTITY;
        let cond = a.condition_number();
        if res <= cfg.tol_orbit {
            if cond > cfg.max_condition {
                return SeedOutcome::Degenerate { point: p, condition: cond };
            }
            return SeedOutcome::Root { point: p, residual: res };
        }
        if cond > cfg.max_condition {
            return SeedOutcome::Degenerate { point: p, condition: cond };
        }
        let Some(ai) = a.inverse() else {
            return SeedOutcome::Degenerate { point: p, condition: f64::INFINITY };
        };
        let mut dp = ai.apply(g) * -1.0;
        let len = dp.norm();
        if len > cfg.max_newton_step {
            dp = dp * (cfg.max_newton_step / len);
        }
        p = p + dp;
        if !p.is_finite() || (surface == Surface::Disk && p.norm_sq() > 1.0 + 1e-9) {
            return SeedOutcome::Diverged;
        }
        if surface == Surface::Torus {
            p = SurfacePoint::unchecked(surface, p).coords();
        }
    }
    SeedOutcome::Diverged
}

/// Builds the full orbit record from a (near-)periodic seed without Newton.
pub fn orbit_from_seed(
    flow: &dyn Flow,
    seed: Vec2,
    k: u32,
    cfg: &OrbitSearchConfig,
) -> Result<PeriodicOrbit, OrbitError> {
    if k == 0 {
        return Err(OrbitError::ZeroPeriod);
    }
    let surface = flow.surface();
    let (q, m) = flow.advance_with_jacobian(0.0, k as f64, seed)?;
    let residual = displacement(surface, seed, q).norm();
    let OrbitSamples { trajectory, velocities, energies } =
        flow.sample_orbit(seed, 0.0, k as f64, cfg.samples_per_period * k as usize)?;
    let (multipliers, nondegenerate, stability) = classify_multipliers(&m, cfg.tol_eig);
    let mut orbit = PeriodicOrbit {
        seed: lift_point(surface, seed),
        period_k: k,
        samples: trajectory,
        velocities,
        energies,
        monodromy: m,
        multipliers,
        nondegenerate,
        stability,
        action: None,
        stationary_action: None,
        homotopy_class: HomotopyClass::Trivial,
        residual,
    };
    orbit.homotopy_class = free_homotopy_class(&orbit)?;
    if orbit.homotopy_class.is_contractible() {
        orbit.action = Some(orbit_action(&orbit)?);
        orbit.stationary_action = Some(stationary_action(&orbit)?);
    }
    Ok(orbit)
}

fn orbit_points(flow: &dyn Flow, p: Vec2, k: u32) -> Vec<Vec2> {
    let mut pts = vec![p];
    let mut z = p;
    for j in 0..k.saturating_sub(1) {
        match flow.advance(j as f64, (j + 1) as f64, z) {
            Ok(q) => {
                z = q;
                pts.push(q);
            }
            Err(_) => break,
        }
    }
    pts
}

/// Newton search for period-k points from every seed, deduplicated by
/// `merge_radius` against all integer-time points of the orbits found so far.
pub fn find_periodic_points(
    flow: &dyn Flow,
    k: u32,
    seeds: &SeedGrid,
    cfg: &OrbitSearchConfig,
) -> Result<OrbitSet, OrbitError> {
    if k == 0 {
        return Err(OrbitError::ZeroPeriod);
    }
    let surface = flow.surface();
    let pts = seeds.points();
    let outcomes: Vec<SeedOutcome> = pts.par_iter().map(|&s| newton(flow, s, k, cfg)).collect();

    let mut diagnostics = SearchDiagnostics { seeds: pts.len(), ..Default::default() };
    let mut roots: Vec<(Vec2, f64, Vec<Vec2>)> = Vec::new();
    let mut degenerate: Vec<DegenerateRoot> = Vec::new();
    for o in outcomes {
        match o {
            SeedOutcome::Root { point, residual } => {
                diagnostics.converged += 1;
                let near = roots
                    .iter()
                    .any(|(_, _, orbit)| orbit.iter().any(|&q| surface_distance(surface, q, point) < cfg.merge_radius));
                if !near {
                    let orbit = orbit_points(flow, point, k);
                    roots.push((point, residual, orbit));
                }
            }
            SeedOutcome::Degenerate { point, condition } => {
                diagnostics.degenerate_seeds += 1;
                if !degenerate.iter().any(|d| surface_distance(surface, d.point, point) < cfg.merge_radius) {
                    degenerate.push(DegenerateRoot { point, condition });
                }
            }
            SeedOutcome::Diverged => diagnostics.diverged += 1,
        }
    }

    let built: Vec<Result<PeriodicOrbit, OrbitError>> =
        roots.par_iter().map(|(p, _, _)| orbit_from_seed(flow, *p, k, cfg)).collect();
    let mut orbits = Vec::new();
    for b in built {
        let orbit = b?;
        if orbit.nondegenerate {
            orbits.push(orbit);
        } else {
            degenerate.push(DegenerateRoot {
                point: orbit.seed.lift(),
                condition: (orbit.monodromy - Mat2::IDENTITY).condition_number(),
            });
        }
    }
    Ok(OrbitSet { orbits, degenerate, diagnostics })
}

fn trapezoid(values: impl Iterator<Item = f64>, n_values: usize, dt: f64) -> f64 {
    let mut s = 0.0;
    for (i, v) in values.enumerate() {
        let w = if i == 0 || i + 1 == n_values { 0.5 } else { 1.0 };
        s += w * v;
    }
    s * dt
}

/// Signed area ½∮(x dy − y dx) of the sampled loop, using the stored velocities.
pub fn signed_area(samples: &Trajectory, velocities: &[Vec2]) -> f64 {
    let n = samples.len();
    if n < 2 {
        return 0.0;
    }
    let dt = (samples.times[n - 1] - samples.times[0]) / (n - 1) as f64;
    0.5 * trapezoid(samples.points.iter().zip(velocities).map(|(p, v)| p.lift().cross(*v)), n, dt)
}

/// −(signed enclosed area) + ∫₀^k H(t, γ(t)) dt for contractible orbits.
pub fn orbit_action(orbit: &PeriodicOrbit) -> Result<f64, OrbitError> {
    let (area, energy) = area_and_energy(orbit)?;
    Ok(-area + energy)
}

/// (signed area) + ∫₀^k H(t, γ(t)) dt. Its first variation is
/// ∫ ω(X_H − γ̇, δγ), so orbits are its critical points and it is the one
/// whose values move by at most the Hofer norm under perturbation.
pub fn stationary_action(orbit: &PeriodicOrbit) -> Result<f64, OrbitError> {
    let (area, energy) = area_and_energy(orbit)?;
    Ok(area + energy)
}

fn area_and_energy(orbit: &PeriodicOrbit) -> Result<(f64, f64), OrbitError> {
    if let HomotopyClass::Winding { x, y } = orbit.homotopy_class {
        if x != 0 || y != 0 {
            return Err(OrbitError::UnsupportedClass(x, y));
        }
    }
    let n = orbit.samples.len();
    if n < 2 {
        return Err(OrbitError::NoSamples);
    }
    let dt = (orbit.samples.times[n - 1] - orbit.samples.times[0]) / (n - 1) as f64;
    let energy = trapezoid(orbit.energies.iter().copied(), n, dt);
    Ok((signed_area(&orbit.samples, &orbit.velocities), energy))
}

pub fn free_homotopy_class(orbit: &PeriodicOrbit) -> Result<HomotopyClass, OrbitError> {
    let (Some(first), Some(last)) = (orbit.samples.points.first(), orbit.samples.points.last()) else {
        return Err(OrbitError::NoSamples);
    };
    match first.surface() {
        Surface::Disk => Ok(HomotopyClass::Trivial),
        Surface::Torus => {
            let d = last.lift() - first.lift();
            let (rx, ry) = (d.x.round(), d.y.round());
            if (d.x - rx).abs() > 0.25 || (d.y - ry).abs() > 0.25 {
                return Err(OrbitError::SamplingResolution(d.x, d.y));
            }
            Ok(HomotopyClass::Winding { x: rx as i64, y: ry as i64 })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsolationVerdict {
    pub isolated: bool,
    pub epsilon: f64,
    /// Smallest gap above `tol_action`, if any.
    pub min_nonzero_gap: Option<f64>,
    /// Isolation is only certified against the supplied orbit set.
    pub scope: String,
}

pub const ISOLATION_SCOPE: &str = "relative to the discovered orbit set only";

/// Gap matrix |A_i − A_j| and whether every gap is either ≤ tol_action or ≥ ε.
pub fn action_gaps_and_isolation(
    orbits: &OrbitSet,
    actions: &[f64],
    epsilon: f64,
    tol_action: f64,
) -> Result<(Vec<Vec<f64>>, IsolationVerdict), OrbitError> {
    if !orbits.is_empty() && actions.len() != orbits.len() {
        return Err(OrbitError::ActionCount { expected: orbits.len(), got: actions.len() });
    }
    if !orbits.shared_class() {
        return Err(OrbitError::ClassMismatch);
    }
    Ok(isolation_from_actions(actions, epsilon, tol_action))
}

pub fn isolation_from_actions(actions: &[f64], epsilon: f64, tol_action: f64) -> (Vec<Vec<f64>>, IsolationVerdict) {
    let n = actions.len();
    let mut gaps = vec![vec![0.0; n]; n];
    let mut isolated = true;
    let mut min_gap: Option<f64> = None;
    for i in 0..n {
        for j in 0..n {
            let g = (actions[i] - actions[j]).abs();
            gaps[i][j] = g;
            if i < j && g > tol_action {
                min_gap = Some(min_gap.map_or(g, |m: f64| m.min(g)));
                if g < epsilon {
                    isolated = false;
                }
            }
        }
    }
    (gaps, IsolationVerdict { isolated, epsilon, min_nonzero_gap: min_gap, scope: ISOLATION_SCOPE.into() })
}

/// Default integrator for orbit work.
pub fn default_flow(h: &TimePeriodicHamiltonian) -> HamiltonianFlow {
    HamiltonianFlow::new(h.clone(), IntegratorConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rotation_time_map_is_rotation() {
        let c = 1.0;
        let h = TimePeriodicHamiltonian::rotation(c);
        let p = SurfacePoint::disk(0.5, 0.2).unwrap();
        let (q, m) = time_k_map(&h, &p, 1, 1e-3).unwrap();
        // midpoint rotation angle per step is 2·atan(c·dt/2)
        let angle = -2.0 * (c * 1e-3 / 2.0f64).atan() * 1000.0;
        let r = Mat2::rotation(angle);
        assert!((q.lift() - r.apply(p.lift())).max_abs() < 1e-12);
        assert!((m - r).max_abs() < 1e-12);
        assert!((m - Mat2::rotation(-c)).max_abs() < 1e-6);
        assert!((m.det() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn zero_hamiltonian_is_identity_and_degenerate() {
        let h = TimePeriodicHamiltonian::zero(Surface::Disk);
        let p = SurfacePoint::disk(0.3, -0.4).unwrap();
        let (q, m) = time_k_map(&h, &p, 2, 1e-3).unwrap();
        assert_eq!(q.lift(), p.lift());
        assert_eq!(m, Mat2::IDENTITY);
        let set = find_periodic_points(&default_flow(&h), 1, &SeedGrid::Disk { n: 6 }, &OrbitSearchConfig::default()).unwrap();
        assert!(set.is_empty());
        assert_eq!(set.diagnostics.degenerate_seeds, set.diagnostics.seeds);
    }

    #[test]
    fn shear_orbit_winds_negatively() {
        let h = TimePeriodicHamiltonian::torus_shear();
        let o = orbit_from_seed(&default_flow(&h), Vec2::new(0.0, 0.25), 1, &OrbitSearchConfig::default()).unwrap();
        assert_eq!(o.homotopy_class, HomotopyClass::Winding { x: -1, y: 0 });
        assert!(o.action.is_none());
        assert!(matches!(orbit_action(&o), Err(OrbitError::UnsupportedClass(-1, 0))));
    }

    #[test]
    fn constant_orbit_action_at_critical_point() {
        let h = TimePeriodicHamiltonian::cellular(0.0);
        // (¼, ¼) is a maximum of sin·sin/(2π)
        let o = orbit_from_seed(&default_flow(&h), Vec2::new(0.25, 0.25), 2, &OrbitSearchConfig::default()).unwrap();
        assert_eq!(o.homotopy_class, HomotopyClass::Winding { x: 0, y: 0 });
        assert!((o.action.unwrap() - 2.0 / (2.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn isolation_examples() {
        let (g, v) = isolation_from_actions(&[0.0, 1.0], 0.5, 1e-8);
        assert_eq!(g, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(v.isolated);
        let (g, v) = isolation_from_actions(&[0.7, 0.7, 0.7], 0.5, 1e-8);
        assert!(g.iter().flatten().all(|&x| x == 0.0));
        assert!(v.isolated && v.min_nonzero_gap.is_none());
        assert!(!isolation_from_actions(&[0.0, 0.3], 0.5, 1e-8).1.isolated);
    }

    #[test]
    fn mixed_classes_are_rejected() {
        let shear = TimePeriodicHamiltonian::torus_shear();
        let f = default_flow(&shear);
        let cfg = OrbitSearchConfig { samples_per_period: 100, ..Default::default() };
        let a = orbit_from_seed(&f, Vec2::new(0.0, 0.25), 1, &cfg).unwrap();
        let b = orbit_from_seed(&f, Vec2::new(0.0, 0.0), 1, &cfg).unwrap();
        let set = OrbitSet::from_orbits(vec![a, b]);
        assert_eq!(action_gaps_and_isolation(&set, &[0.0, 0.0], 0.1, 1e-8).unwrap_err(), OrbitError::ClassMismatch);
    }
}
