//! Flows that orbit searches and braid sampling can run on.
//!
//! [`HamiltonianFlow`] integrates a single Hamiltonian. [`ProductFlow`] is the
//! flow t ↦ φ_outer^t ∘ φ_inner^t on each unit time cell, which is the flow of
//! the composed Hamiltonian H_outer(t,p) + H_inner(t, (φ_outer^t)⁻¹ p) without
//! having to evaluate that Hamiltonian pointwise.

use rayon::prelude::*;

use crate::geometry::{Mat2, Surface, Vec2};
use crate::ham::TimePeriodicHamiltonian;
use crate::integrate::{self, lift_point, IntegrateError, IntegratorConfig, Trajectory};

/// Uniform samples of one orbit with the vector field and Hamiltonian along it.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSamples {
    pub trajectory: Trajectory,
    pub velocities: Vec<Vec2>,
    pub energies: Vec<f64>,
}

pub trait Flow: Send + Sync {
    fn surface(&self) -> Surface;

    fn advance(&self, t0: f64, t1: f64, p: Vec2) -> Result<Vec2, IntegrateError>;

    fn advance_with_jacobian(&self, t0: f64, t1: f64, p: Vec2) -> Result<(Vec2, Mat2), IntegrateError>;

    /// `intervals + 1` samples at uniform times in `[t0, t1]`.
    fn sample_orbit(&self, p: Vec2, t0: f64, t1: f64, intervals: usize) -> Result<OrbitSamples, IntegrateError>;
}

#[derive(Debug, Clone)]
pub struct HamiltonianFlow {
    pub hamiltonian: TimePeriodicHamiltonian,
    pub config: IntegratorConfig,
}

impl HamiltonianFlow {
    pub fn new(hamiltonian: TimePeriodicHamiltonian, config: IntegratorConfig) -> Self {
        Self { hamiltonian, config }
    }

    pub fn with_step(hamiltonian: TimePeriodicHamiltonian, step: f64) -> Self {
        Self::new(hamiltonian, IntegratorConfig::with_step(step))
    }
}

fn sample_times(t0: f64, t1: f64, intervals: usize) -> Vec<f64> {
    let n = intervals.max(1);
    (0..=n).map(|i| if i == n { t1 } else { t0 + (t1 - t0) * i as f64 / n as f64 }).collect()
}

impl Flow for HamiltonianFlow {
    fn surface(&self) -> Surface {
        self.hamiltonian.surface()
    }

    fn advance(&self, t0: f64, t1: f64, p: Vec2) -> Result<Vec2, IntegrateError> {
        integrate::advance(&self.hamiltonian, t0, t1, p, &self.config)
    }

    fn advance_with_jacobian(&self, t0: f64, t1: f64, p: Vec2) -> Result<(Vec2, Mat2), IntegrateError> {
        integrate::advance_with_jacobian(&self.hamiltonian, t0, t1, p, &self.config)
    }

    fn sample_orbit(&self, p: Vec2, t0: f64, t1: f64, intervals: usize) -> Result<OrbitSamples, IntegrateError> {
        let h = &self.hamiltonian;
        let times = sample_times(t0, t1, intervals);
        let mut points = Vec::with_capacity(times.len());
        let mut z = p;
        points.push(z);
        for w in times.windows(2) {
            z = self.advance(w[0], w[1], z)?;
            points.push(z);
        }
        let velocities = times
            .iter()
            .zip(&points)
            .map(|(&t, &z)| h.vector_field(t, z))
            .collect::<Result<Vec<_>, _>>()?;
        let energies = times.iter().zip(&points).map(|(&t, &z)| h.value(t, z)).collect();
        let step = (t1 - t0) / intervals.max(1) as f64;
        let surface = self.surface();
        let trajectory = Trajectory { times, points: points.into_iter().map(|z| lift_point(surface, z)).collect(), step };
        Ok(OrbitSamples { trajectory, velocities, energies })
    }
}

/// On every cell [m, m+1] the map from time m to m+s is φ_outer^{0→s} ∘ φ_inner^{0→s}.
#[derive(Debug, Clone)]
pub struct ProductFlow {
    pub outer: HamiltonianFlow,
    pub inner: HamiltonianFlow,
}

/// Splits `t` into an integer cell start and the offset inside the cell.
fn cell_of(t: f64) -> (f64, f64) {
    let m = (t + 1e-12).floor();
    (m, (t - m).max(0.0))
}

impl ProductFlow {
    pub fn new(outer: HamiltonianFlow, inner: HamiltonianFlow) -> Self {
        Self { outer, inner }
    }

    /// From cell start to offset `s` (s may be 1).
    fn local(&self, s: f64, p: Vec2) -> Result<(Vec2, Mat2), IntegrateError> {
        let (x, ji) = self.inner.advance_with_jacobian(0.0, s, p)?;
        let (y, jo) = self.outer.advance_with_jacobian(0.0, s, x)?;
        Ok((y, jo * ji))
    }

    /// From offset `s` back to cell start.
    fn local_inv(&self, s: f64, p: Vec2) -> Result<(Vec2, Mat2), IntegrateError> {
        let (x, jo) = self.outer.advance_with_jacobian(s, 0.0, p)?;
        let (y, ji) = self.inner.advance_with_jacobian(s, 0.0, x)?;
        Ok((y, ji * jo))
    }
}

impl Flow for ProductFlow {
    fn surface(&self) -> Surface {
        self.outer.surface()
    }

    fn advance(&self, t0: f64, t1: f64, p: Vec2) -> Result<Vec2, IntegrateError> {
        self.advance_with_jacobian(t0, t1, p).map(|(q, _)| q)
    }

    fn advance_with_jacobian(&self, t0: f64, t1: f64, p: Vec2) -> Result<(Vec2, Mat2), IntegrateError> {
        if t0 == t1 {
            return Ok((p, Mat2::IDENTITY));
        }
        let (mut m, s0) = cell_of(t0);
        let (mut q, mut j) = if s0 > 0.0 { self.local_inv(s0, p)? } else { (p, Mat2::IDENTITY) };
        while t1 >= m + 1.0 {
            let (q1, j1) = self.local(1.0, q)?;
            q = q1;
            j = j1 * j;
            m += 1.0;
        }
        while t1 < m {
            let (q1, j1) = self.local_inv(1.0, q)?;
            q = q1;
            j = j1 * j;
            m -= 1.0;
        }
        let s1 = t1 - m;
        if s1 > 0.0 {
            let (q1, j1) = self.local(s1, q)?;
            q = q1;
            j = j1 * j;
        }
        Ok((q, j))
    }

    fn sample_orbit(&self, p: Vec2, t0: f64, t1: f64, intervals: usize) -> Result<OrbitSamples, IntegrateError> {
        let times = sample_times(t0, t1, intervals);
        let (m0, _) = cell_of(t0);
        // positions at integer times from the start cell onward
        let cells = (t1 - m0).ceil().max(1.0) as usize;
        let mut starts = Vec::with_capacity(cells + 1);
        let start = self.advance(t0, m0, p)?;
        starts.push(start);
        for _ in 0..cells {
            let last = *starts.last().expect("non-empty");
            starts.push(self.local(1.0, last)?.0);
        }
        let oh = &self.outer.hamiltonian;
        let ih = &self.inner.hamiltonian;
        let rows = times
            .par_iter()
            .map(|&t| {
                let (m, s) = cell_of(t);
                let q = starts[(m - m0) as usize];
                let x = self.inner.advance(0.0, s, q)?;
                let (y, jo) = self.outer.advance_with_jacobian(0.0, s, x)?;
                let v = oh.vector_field(t, y)? + jo.apply(ih.vector_field(t, x)?);
                let e = oh.value(t, y) + ih.value(t, x);
                Ok((y, v, e))
            })
            .collect::<Result<Vec<_>, IntegrateError>>()?;
        let surface = self.surface();
        let step = (t1 - t0) / intervals.max(1) as f64;
        let trajectory = Trajectory {
            times,
            points: rows.iter().map(|r| lift_point(surface, r.0)).collect(),
            step,
        };
        Ok(OrbitSamples {
            trajectory,
            velocities: rows.iter().map(|r| r.1).collect(),
            energies: rows.iter().map(|r| r.2).collect(),
        })
    }
}
