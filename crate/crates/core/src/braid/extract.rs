//! Geometric braids of orbit sets and their Artin words under a planar projection.

use serde::{Deserialize, Serialize};

use super::conjugacy::{are_conjugate, ConjugacyVerdict, DEFAULT_BUDGET};
use super::word::{BraidWord, WordError};
use crate::geometry::{surface_distance, Surface, Vec2};
use crate::orbits::{HomotopyClass, OrbitSet, PeriodicOrbit};

pub const DEFAULT_COLLISION_RADIUS: f64 = 1e-5;
/// Endpoint matching tolerance for the strand permutation.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;
pub const ANGLE_RETRIES: usize = 8;
pub const ANGLE_PERTURBATION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("strands {a} and {b} collide at t = {t}")]
    Collision { a: usize, b: usize, t: f64 },
    #[error("projection at angle {angle} is not generic near t = {t}")]
    NonGeneric { angle: f64, t: f64 },
    #[error("strand {0} does not end on a strand start")]
    OpenStrand(usize),
    #[error("need at least one sample interval")]
    TooFewSamples,
    #[error("word extraction is only defined on the disk")]
    NotDisk,
    #[error("conjugacy search ran out of budget")]
    Undecided,
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Strands sampled at common times `0 = t_0 < … < t_S = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricBraid {
    pub surface: Surface,
    pub times: Vec<f64>,
    /// strands[s][j] is strand s at times[j] (lift coordinates on the torus).
    pub strands: Vec<Vec<Vec2>>,
}

fn interpolate(orbit: &PeriodicOrbit, t: f64) -> Vec2 {
    let tr = &orbit.samples;
    let n = tr.len();
    let (t0, t1) = (tr.times[0], tr.times[n - 1]);
    let f = ((t - t0) / (t1 - t0) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
    let i = (f.floor() as usize).min(n - 2);
    let a = f - i as f64;
    tr.points[i].lift().lerp(tr.points[i + 1].lift(), a)
}

impl GeometricBraid {
    pub fn from_strands(surface: Surface, times: Vec<f64>, strands: Vec<Vec<Vec2>>, collision_radius: f64) -> Result<Self, ExtractError> {
        if times.len() < 2 {
            return Err(ExtractError::TooFewSamples);
        }
        let b = Self { surface, times, strands };
        b.check_collisions(collision_radius)?;
        Ok(b)
    }

    pub fn n_strands(&self) -> usize {
        self.strands.len()
    }

    pub fn samples(&self) -> usize {
        self.times.len()
    }

    fn check_collisions(&self, radius: f64) -> Result<(), ExtractError> {
        for a in 0..self.strands.len() {
            for b in a + 1..self.strands.len() {
                for (j, &t) in self.times.iter().enumerate() {
                    if surface_distance(self.surface, self.strands[a][j], self.strands[b][j]) < radius {
                        return Err(ExtractError::Collision { a, b, t });
                    }
                }
            }
        }
        Ok(())
    }

    /// σ with strand s ending where strand σ(s) starts.
    pub fn strand_permutation(&self) -> Result<Vec<usize>, ExtractError> {
        let last = self.times.len() - 1;
        (0..self.strands.len())
            .map(|s| {
                let end = self.strands[s][last];
                (0..self.strands.len())
                    .find(|&r| surface_distance(self.surface, end, self.strands[r][0]) <= ENDPOINT_TOLERANCE)
                    .ok_or(ExtractError::OpenStrand(s))
            })
            .collect()
    }

    /// CSV rows `strand,t,x,y`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("strand,t,x,y\n");
        for (k, strand) in self.strands.iter().enumerate() {
            for (t, p) in self.times.iter().zip(strand) {
                s.push_str(&format!("{k},{t:.11e},{:.11e},{:.11e}\n", p.x, p.y));
            }
        }
        s
    }
}

/// One strand per unit-time slice of every orbit, resampled at
/// `samples_per_period` uniform intervals.
pub fn suspend_orbits(orbits: &OrbitSet, samples_per_period: usize, collision_radius: f64) -> Result<GeometricBraid, ExtractError> {
    if samples_per_period == 0 {
        return Err(ExtractError::TooFewSamples);
    }
    let surface = orbits.orbits.first().map(|o| o.seed.surface()).unwrap_or(Surface::Disk);
    let times: Vec<f64> = (0..=samples_per_period).map(|j| j as f64 / samples_per_period as f64).collect();
    let mut strands = Vec::new();
    for o in &orbits.orbits {
        for slice in 0..o.period_k {
            let mut strand: Vec<Vec2> = times.iter().map(|&t| interpolate(o, slice as f64 + t)).collect();
            if surface == Surface::Torus {
                let shift = Vec2::new(strand[0].x.floor(), strand[0].y.floor());
                for p in &mut strand {
                    *p = *p - shift;
                }
            }
            strands.push(strand);
        }
    }
    GeometricBraid::from_strands(surface, times, strands, collision_radius)
}

#[derive(Debug, Clone, Copy)]
struct Event {
    t: f64,
    a: usize,
    b: usize,
    /// v_a − v_b at the crossing
    dv: f64,
}

/// Artin word read off by projecting onto the direction at `angle`.
pub fn braid_word_from_geometric(braid: &GeometricBraid, angle: f64, collision_radius: f64) -> Result<BraidWord, ExtractError> {
    if braid.surface != Surface::Disk {
        return Err(ExtractError::NotDisk);
    }
    let n = braid.n_strands();
    if n == 0 {
        return Ok(BraidWord::identity(1));
    }
    let (s, c) = angle.sin_cos();
    let u = Vec2::new(c, s);
    let v = Vec2::new(-s, c);
    let pu: Vec<Vec<f64>> = braid.strands.iter().map(|st| st.iter().map(|p| p.dot(u)).collect()).collect();
    let pv: Vec<Vec<f64>> = braid.strands.iter().map(|st| st.iter().map(|p| p.dot(v)).collect()).collect();
    let m = braid.times.len();
    let non_generic = |t: f64| ExtractError::NonGeneric { angle, t };

    let mut events = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let d: Vec<f64> = (0..m).map(|j| pu[a][j] - pu[b][j]).collect();
            for j in 0..m {
                if d[j] == 0.0 {
                    return Err(non_generic(braid.times[j]));
                }
            }
            for j in 0..m - 1 {
                if d[j].signum() == d[j + 1].signum() {
                    continue;
                }
                // the sign change must persist at the neighbouring samples
                let flips_back = (j > 0 && d[j - 1].signum() != d[j].signum())
                    || (j + 2 < m && d[j + 2].signum() != d[j + 1].signum());
                if flips_back {
                    return Err(non_generic(braid.times[j]));
                }
                let f = d[j] / (d[j] - d[j + 1]);
                let t = braid.times[j] + f * (braid.times[j + 1] - braid.times[j]);
                let va = pv[a][j] + f * (pv[a][j + 1] - pv[a][j]);
                let vb = pv[b][j] + f * (pv[b][j + 1] - pv[b][j]);
                if (va - vb).abs() < collision_radius {
                    return Err(ExtractError::Collision { a, b, t });
                }
                events.push(Event { t, a, b, dv: va - vb });
            }
        }
    }
    events.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    for w in events.windows(2) {
        let shared = w[0].a == w[1].a || w[0].a == w[1].b || w[0].b == w[1].a || w[0].b == w[1].b;
        if shared && (w[1].t - w[0].t).abs() < 1e-12 {
            return Err(non_generic(w[0].t));
        }
    }

    // positions ordered by increasing projection at t = 0
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| pu[x][0].total_cmp(&pu[y][0]));
    let mut pos = vec![0usize; n];
    for (p, &s) in order.iter().enumerate() {
        pos[s] = p;
    }

    let mut letters = Vec::with_capacity(events.len());
    for e in events {
        let (pa, pb) = (pos[e.a], pos[e.b]);
        if pa.abs_diff(pb) != 1 {
            return Err(non_generic(e.t));
        }
        let (left, right, dv_rl) = if pa < pb { (e.a, e.b, -e.dv) } else { (e.b, e.a, e.dv) };
        let i = pa.min(pb);
        letters.push(if dv_rl > 0.0 { i as i32 + 1 } else { -(i as i32 + 1) });
        pos[left] = i + 1;
        pos[right] = i;
        order.swap(i, i + 1);
    }
    Ok(BraidWord::new(n, letters)?)
}

/// Tries `angle`, then `angle ± k·1e-3` for k = 1, 1, 2, 2, … up to 8 retries.
/// Returns the word and the angle that worked.
pub fn braid_word_with_retry(braid: &GeometricBraid, angle: f64, collision_radius: f64) -> Result<(BraidWord, f64), ExtractError> {
    let mut last = None;
    for k in 0..=ANGLE_RETRIES {
        let offset = if k == 0 {
            0.0
        } else {
            let mag = k.div_ceil(2) as f64;
            if k % 2 == 1 { mag } else { -mag }
        };
        let a = angle + offset * ANGLE_PERTURBATION;
        match braid_word_from_geometric(braid, a, collision_radius) {
            Ok(w) => return Ok((w, a)),
            Err(e @ ExtractError::NonGeneric { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Whether the words at two projection angles are conjugate.
pub fn projection_invariance_check(braid: &GeometricBraid, theta1: f64, theta2: f64) -> Result<bool, ExtractError> {
    let (w1, _) = braid_word_with_retry(braid, theta1, DEFAULT_COLLISION_RADIUS)?;
    let (w2, _) = braid_word_with_retry(braid, theta2, DEFAULT_COLLISION_RADIUS)?;
    match are_conjugate(&w1, &w2, DEFAULT_BUDGET)? {
        ConjugacyVerdict::Yes { .. } => Ok(true),
        ConjugacyVerdict::No { .. } => Ok(false),
        ConjugacyVerdict::Unknown { .. } => Err(ExtractError::Undecided),
    }
}

/// Word permutation implied by the strand permutation: positions are ranks of
/// the starting points along the projection axis.
pub fn position_permutation(braid: &GeometricBraid, angle: f64) -> Result<Vec<usize>, ExtractError> {
    let sigma = braid.strand_permutation()?;
    let u = Vec2::new(angle.cos(), angle.sin());
    let n = braid.n_strands();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| braid.strands[x][0].dot(u).total_cmp(&braid.strands[y][0].dot(u)));
    let mut rank = vec![0; n];
    for (p, &s) in order.iter().enumerate() {
        rank[s] = p;
    }
    let mut perm = vec![0; n];
    for s in 0..n {
        perm[rank[s]] = rank[sigma[s]];
    }
    Ok(perm)
}

/// Winding, permutation and pairwise rotation data for torus orbit sets, the
/// weaker substitute for a braid word on the torus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusBraidSummary {
    pub windings: Vec<HomotopyClass>,
    pub permutation: Vec<usize>,
    /// Total turning of the lift difference between strands a < b, in turns.
    pub pairwise_rotation: Vec<(usize, usize, f64)>,
    pub label: String,
}

pub const TORUS_SUMMARY_LABEL: &str = "torus comparison uses windings, permutation and pairwise rotation only";

pub fn torus_summary(orbits: &OrbitSet, braid: &GeometricBraid) -> Result<TorusBraidSummary, ExtractError> {
    let permutation = braid.strand_permutation()?;
    let mut pairwise = Vec::new();
    for a in 0..braid.n_strands() {
        for b in a + 1..braid.n_strands() {
            let mut turn = 0.0;
            let d = |j: usize| braid.strands[b][j] - braid.strands[a][j];
            for j in 0..braid.samples() - 1 {
                let (p, q) = (d(j), d(j + 1));
                turn += p.cross(q).atan2(p.dot(q));
            }
            pairwise.push((a, b, turn / (2.0 * std::f64::consts::PI)));
        }
    }
    Ok(TorusBraidSummary {
        windings: orbits.orbits.iter().map(|o| o.homotopy_class).collect(),
        permutation,
        pairwise_rotation: pairwise,
        label: TORUS_SUMMARY_LABEL.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// n points on a circle of radius r turned counterclockwise by `alpha` over [0, 1].
    fn rigid(n: usize, phase: f64, alpha: f64, samples: usize) -> GeometricBraid {
        let times: Vec<f64> = (0..=samples).map(|j| j as f64 / samples as f64).collect();
        let strands = (0..n)
            .map(|k| {
                let a0 = phase + 2.0 * PI * k as f64 / n as f64;
                times.iter().map(|&t| Vec2::new((a0 + alpha * t).cos(), (a0 + alpha * t).sin()) * 0.5).collect()
            })
            .collect();
        GeometricBraid::from_strands(Surface::Disk, times, strands, DEFAULT_COLLISION_RADIUS).unwrap()
    }

    #[test]
    fn two_antipodal_points() {
        let b = rigid(2, 0.3, PI, 400);
        let w = braid_word_from_geometric(&b, 0.05, DEFAULT_COLLISION_RADIUS).unwrap();
        assert_eq!(w.letters(), &[1]);
    }

    #[test]
    fn three_points_third_turn() {
        let b = rigid(3, 0.1, 2.0 * PI / 3.0, 600);
        let w = braid_word_from_geometric(&b, 0.05, DEFAULT_COLLISION_RADIUS).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.letters().iter().all(|&l| l > 0));
        assert_eq!(crate::braid::word::cycle_type(&w.permutation()), vec![3]);
        assert_eq!(w.permutation(), position_permutation(&b, 0.05).unwrap());
        assert!(projection_invariance_check(&b, 0.05, 0.9).unwrap());
    }

    #[test]
    fn constant_strands_give_empty_word() {
        let times = vec![0.0, 0.5, 1.0];
        let strands = vec![vec![Vec2::new(0.1, 0.2); 3], vec![Vec2::new(-0.3, 0.4); 3]];
        let b = GeometricBraid::from_strands(Surface::Disk, times, strands, 1e-5).unwrap();
        assert!(braid_word_from_geometric(&b, 0.2, 1e-5).unwrap().is_empty());
        assert!(projection_invariance_check(&b, 0.2, 1.3).unwrap());
    }

    #[test]
    fn collisions_are_reported() {
        let times = vec![0.0, 1.0];
        let strands = vec![vec![Vec2::new(0.1, 0.2); 2], vec![Vec2::new(0.1, 0.2 + 1e-7); 2]];
        assert!(matches!(
            GeometricBraid::from_strands(Surface::Disk, times, strands, 1e-5),
            Err(ExtractError::Collision { a: 0, b: 1, .. })
        ));
    }

    #[test]
    fn degenerate_angle_is_retried() {
        let times = vec![0.0, 0.5, 1.0];
        // both strands share x = 0.3: vertical projection ties at every sample
        let strands = vec![vec![Vec2::new(0.3, 0.2); 3], vec![Vec2::new(0.3, -0.4); 3]];
        let b = GeometricBraid::from_strands(Surface::Disk, times, strands, 1e-5).unwrap();
        assert!(matches!(braid_word_from_geometric(&b, 0.0, 1e-5), Err(ExtractError::NonGeneric { .. })));
        let (w, a) = braid_word_with_retry(&b, 0.0, 1e-5).unwrap();
        assert!(w.is_empty());
        assert_eq!(a, 1e-3);
    }
}
