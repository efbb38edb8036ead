//! Implicit midpoint integration of Hamiltonian flows.

use serde::{Deserialize, Serialize};

use crate::geometry::{Mat2, SurfacePoint, Vec2};
use crate::ham::{HamError, TimePeriodicHamiltonian};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub step: f64,
    pub tol_inner: f64,
    pub max_inner: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { step: 1e-3, tol_inner: 1e-12, max_inner: 50 }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        Self { step, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("inner solve did not converge at t = {t} (residual {residual:e})")]
    InnerSolve { t: f64, residual: f64 },
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("invalid time interval [{t0}, {t1}]")]
    InvalidInterval { t0: f64, t1: f64 },
    #[error(transparent)]
    Field(#[from] HamError),
}

/// Number of uniform substeps used to cover `span` with steps of at most `step`.
pub fn step_count(span: f64, step: f64) -> usize {
    ((span.abs() / step - 1e-9).ceil() as usize).max(1)
}

/// One implicit midpoint step of size `dt` (may be negative) from `(t, z0)`.
pub fn midpoint_step(
    h: &TimePeriodicHamiltonian,
    t: f64,
    z0: Vec2,
    dt: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec2, IntegrateError> {
    let tm = t + 0.5 * dt;
    let tol = |z: Vec2| cfg.tol_inner * z.max_abs().max(1.0);

    let mut z = z0 + h.vector_field(t, z0)? * dt;
    let mut last = f64::INFINITY;
    for _ in 0..cfg.max_inner {
        let next = z0 + h.vector_field(tm, (z0 + z) * 0.5)? * dt;
        let delta = (next - z).max_abs();
        z = next;
        if delta <= tol(z) {
            return Ok(z);
        }
        if !(delta < last) && delta > 1e3 * tol(z) {
            break;
        }
        last = delta;
    }

    // Newton on R(z) = z − z0 − dt·X(tm, (z0 + z)/2).
    let mut z = z0;
    let mut residual = f64::INFINITY;
    for _ in 0..cfg.max_inner {
        let m = (z0 + z) * 0.5;
        let r = z - z0 - h.vector_field(tm, m)? * dt;
        residual = r.max_abs();
        if residual <= tol(z) {
            return Ok(z);
        }
        let a = h.vector_field_jacobian(tm, m)?;
        let j = Mat2::IDENTITY - a.scale(0.5 * dt);
        let Some(ji) = j.inverse() else { break };
        z = z - ji.apply(r);
        if !z.is_finite() {
            break;
        }
    }
    Err(IntegrateError::InnerSolve { t, residual })
}

/// Derivative of the midpoint step: (I − dt·A/2)⁻¹(I + dt·A/2), A = DX at the midpoint.
/// Its determinant is exactly one because A is trace-free.
pub fn midpoint_step_jacobian(
    h: &TimePeriodicHamiltonian,
    t: f64,
    z0: Vec2,
    z1: Vec2,
    dt: f64,
) -> Result<Mat2, IntegrateError> {
    let a = h.vector_field_jacobian(t + 0.5 * dt, (z0 + z1) * 0.5)?;
    let b = a.scale(0.5 * dt);
    let inv = (Mat2::IDENTITY - b).inverse().ok_or(IntegrateError::InnerSolve { t, residual: f64::INFINITY })?;
    Ok(inv * (Mat2::IDENTITY + b))
}

fn check(t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<(), IntegrateError> {
    if !(cfg.step > 0.0 && cfg.step.is_finite()) {
        return Err(IntegrateError::InvalidStep(cfg.step));
    }
    if !(t0.is_finite() && t1.is_finite()) {
        return Err(IntegrateError::InvalidInterval { t0, t1 });
    }
    Ok(())
}

/// Flow from `t0` to `t1` (either direction) on the lift.
pub fn advance(
    h: &TimePeriodicHamiltonian,
    t0: f64,
    t1: f64,
    p: Vec2,
    cfg: &IntegratorConfig,
) -> Result<Vec2, IntegrateError> {
    check(t0, t1, cfg)?;
    if t0 == t1 {
        return Ok(p);
    }
    let n = step_count(t1 - t0, cfg.step);
    let dt = (t1 - t0) / n as f64;
    let mut z = p;
    for k in 0..n {
        z = midpoint_step(h, t0 + k as f64 * dt, z, dt, cfg)?;
    }
    Ok(z)
}

/// Flow and its Jacobian from `t0` to `t1`.
pub fn advance_with_jacobian(
    h: &TimePeriodicHamiltonian,
    t0: f64,
    t1: f64,
    p: Vec2,
    cfg: &IntegratorConfig,
) -> Result<(Vec2, Mat2), IntegrateError> {
    check(t0, t1, cfg)?;
    if t0 == t1 {
        return Ok((p, Mat2::IDENTITY));
    }
    let n = step_count(t1 - t0, cfg.step);
    let dt = (t1 - t0) / n as f64;
    let mut z = p;
    let mut j = Mat2::IDENTITY;
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        let z1 = midpoint_step(h, t, z, dt, cfg)?;
        j = midpoint_step_jacobian(h, t, z, z1, dt)? * j;
        z = z1;
    }
    Ok((z, j))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<SurfacePoint>,
    pub step: f64,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&SurfacePoint> {
        self.points.last()
    }

    pub fn lifts(&self) -> impl Iterator<Item = Vec2> + '_ {
        self.points.iter().map(|p| p.lift())
    }

    /// CSV rows `t,x,y,lift_x,lift_y` with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y,lift_x,lift_y\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            let c = p.coords();
            let l = p.lift();
            s.push_str(&format!("{t:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n", c.x, c.y, l.x, l.y));
        }
        s
    }
}

/// Samples the flow of `h` from `t0` to `t1 > t0` at every integration step.
/// Steps are uniform, of size `(t1 − t0)/n ≤ step`.
pub fn integrate_flow(
    h: &TimePeriodicHamiltonian,
    p0: SurfacePoint,
    t0: f64,
    t1: f64,
    step: f64,
) -> Result<Trajectory, IntegrateError> {
    let cfg = IntegratorConfig::with_step(step);
    check(t0, t1, &cfg)?;
    if !(t1 > t0) {
        return Err(IntegrateError::InvalidInterval { t0, t1 });
    }
    let surface = p0.surface();
    let n = step_count(t1 - t0, step);
    let dt = (t1 - t0) / n as f64;
    let mut times = Vec::with_capacity(n + 1);
    let mut points = Vec::with_capacity(n + 1);
    let mut z = p0.lift();
    times.push(t0);
    points.push(p0);
    for k in 0..n {
        let t = t0 + k as f64 * dt;
        z = midpoint_step(h, t, z, dt, &cfg)?;
        times.push(if k + 1 == n { t1 } else { t0 + (k + 1) as f64 * dt });
        points.push(lift_point(surface, z));
    }
    Ok(Trajectory { times, points, step: dt })
}

/// Wraps a lift coordinate without the disk-range check, since integration
/// error may push boundary orbits a hair outside.
pub(crate) fn lift_point(surface: crate::geometry::Surface, z: Vec2) -> SurfacePoint {
    SurfacePoint::unchecked(surface, z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Surface;
    use std::f64::consts::PI;

    #[test]
    fn quarter_rotation_matches_closed_form() {
        let h = TimePeriodicHamiltonian::centered_rotation(PI / 2.0);
        let p0 = SurfacePoint::disk(1.0, 0.0).unwrap();
        let tr = integrate_flow(&h, p0, 0.0, 1.0, 1e-3).unwrap();
        let end = tr.last().unwrap().coords();
        assert!((end - Vec2::new(0.0, -1.0)).max_abs() < 1e-6, "{end:?}");
        assert_eq!(tr.len(), 1001);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
    }

    #[test]
    fn shear_line_winds_once() {
        let h = TimePeriodicHamiltonian::torus_shear();
        let p0 = SurfacePoint::torus(0.0, 0.25).unwrap();
        let tr = integrate_flow(&h, p0, 0.0, 1.0, 1e-3).unwrap();
        let end = tr.last().unwrap();
        assert!((end.lift() - Vec2::new(-1.0, 0.25)).max_abs() < 1e-12);
        assert!(end.coords().x.abs() < 1e-12 || (end.coords().x - 1.0).abs() < 1e-12);
    }

    #[test]
    fn energy_error_is_second_order() {
        let h = TimePeriodicHamiltonian::pendulum();
        let p = Vec2::new(0.2, 0.3);
        let drift = |step: f64| {
            let tr = integrate_flow(&h, SurfacePoint::torus(p.x, p.y).unwrap(), 0.0, 1.0, step).unwrap();
            let e0 = h.value(0.0, p);
            tr.lifts().map(|z| (h.value(0.0, z) - e0).abs()).fold(0.0, f64::max)
        };
        let a = drift(2e-2);
        let b = drift(1e-2);
        let ratio = a / b;
        assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn forward_backward_roundtrip() {
        let h = TimePeriodicHamiltonian::forced_pendulum(0.4);
        let cfg = IntegratorConfig::default();
        let p = Vec2::new(0.31, -0.12);
        let q = advance(&h, 0.0, 1.0, p, &cfg).unwrap();
        let back = advance(&h, 1.0, 0.0, q, &cfg).unwrap();
        assert!((back - p).max_abs() < 1e-12);
    }

    #[test]
    fn jacobian_is_symplectic_and_matches_fd() {
        let h = TimePeriodicHamiltonian::cellular(0.7);
        let cfg = IntegratorConfig::default();
        let p = Vec2::new(0.13, 0.41);
        let (_, j) = advance_with_jacobian(&h, 0.0, 1.0, p, &cfg).unwrap();
        assert!((j.det() - 1.0).abs() < 1e-12);
        let e = 1e-6;
        let fx = (advance(&h, 0.0, 1.0, p + Vec2::new(e, 0.0), &cfg).unwrap()
            - advance(&h, 0.0, 1.0, p - Vec2::new(e, 0.0), &cfg).unwrap())
            * (0.5 / e);
        assert!((fx.x - j.a).abs() < 1e-6 && (fx.y - j.c).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        let h = TimePeriodicHamiltonian::zero(Surface::Disk);
        let p = SurfacePoint::disk(0.0, 0.0).unwrap();
        assert!(integrate_flow(&h, p, 0.0, 1.0, 0.0).is_err());
        assert!(integrate_flow(&h, p, 1.0, 0.0, 1e-3).is_err());
    }
}
