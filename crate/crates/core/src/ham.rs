//! Time-periodic Hamiltonians on the disk and torus.
//!
//! Sign convention: with ω = dx∧dy and ι_X ω = dH the vector field is
//! X_H = (∂H/∂y, −∂H/∂x). The rotation ½c r² therefore turns clockwise.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geometry::{reduce_unit, Mat2, Surface, SurfacePoint, Vec2};
use crate::integrate::{self, IntegratorConfig};

/// Step for the fourth-order central-difference gradient.
pub const H_GRAD: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HamError {
    #[error("non-finite Hamiltonian data at t = {t}, p = ({x}, {y})")]
    NonFinite { t: f64, x: f64, y: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("admissible gluing mismatch at r0 = {r0}: {what} differs by {err:e}")]
    GluingMismatch { r0: f64, what: &'static str, err: f64 },
    #[error("grid must have at least 2 samples per axis")]
    GridTooSmall,
}

/// A scalar field H(t, p) defined for t in [0, 1).
///
/// Implementors get `t` already reduced. Derivatives default to `None`, in
/// which case finite differences are used.
pub trait HamiltonianField: Send + Sync + fmt::Debug {
    fn value(&self, t: f64, p: Vec2) -> f64;

    fn gradient(&self, _t: f64, _p: Vec2) -> Option<Vec2> {
        None
    }

    fn hessian(&self, _t: f64, _p: Vec2) -> Option<Mat2> {
        None
    }

    /// Closed-form flow from `t0` to `t1` (unreduced times) with its Jacobian.
    fn exact_flow(&self, _t0: f64, _t1: f64, _p: Vec2) -> Option<(Vec2, Mat2)> {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum Normalization {
    /// Mean over the torus vanishes at every t.
    ZeroMean,
    /// Vanishes near the disk boundary.
    CompactSupport,
    /// Equal to ½c(r²−1) for r ≥ r0.
    Admissible { c: f64, r0: f64 },
    /// No normalization (lift Hamiltonians, test fields).
    Raw,
}

#[derive(Clone)]
pub struct TimePeriodicHamiltonian {
    name: String,
    surface: Surface,
    normalization: Normalization,
    field: Arc<dyn HamiltonianField>,
}

impl fmt::Debug for TimePeriodicHamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimePeriodicHamiltonian")
            .field("name", &self.name)
            .field("surface", &self.surface)
            .field("normalization", &self.normalization)
            .finish()
    }
}

pub fn fd_gradient(field: &dyn HamiltonianField, t: f64, p: Vec2) -> Vec2 {
    let h = H_GRAD;
    let d = |e: Vec2| {
        let f = |s: f64| field.value(t, p + e * s);
        (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h)
    };
    Vec2::new(d(Vec2::new(1.0, 0.0)), d(Vec2::new(0.0, 1.0)))
}

fn field_gradient(field: &dyn HamiltonianField, t: f64, p: Vec2) -> Vec2 {
    field.gradient(t, p).unwrap_or_else(|| fd_gradient(field, t, p))
}

pub fn fd_hessian(field: &dyn HamiltonianField, t: f64, p: Vec2) -> Mat2 {
    let h = H_GRAD;
    let g = |e: Vec2| {
        let f = |s: f64| field_gradient(field, t, p + e * s);
        (f(h) - f(-h)) * (1.0 / (2.0 * h))
    };
    let gx = g(Vec2::new(1.0, 0.0));
    let gy = g(Vec2::new(0.0, 1.0));
    let off = 0.5 * (gx.y + gy.x);
    Mat2::new(gx.x, off, off, gy.y)
}

impl TimePeriodicHamiltonian {
    pub fn new(
        name: impl Into<String>,
        surface: Surface,
        normalization: Normalization,
        field: Arc<dyn HamiltonianField>,
    ) -> Self {
        Self { name: name.into(), surface, normalization, field }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn field(&self) -> &Arc<dyn HamiltonianField> {
        &self.field
    }

    pub fn value(&self, t: f64, p: Vec2) -> f64 {
        self.field.value(reduce_unit(t), p)
    }

    pub fn gradient(&self, t: f64, p: Vec2) -> Vec2 {
        field_gradient(self.field.as_ref(), reduce_unit(t), p)
    }

    pub fn hessian(&self, t: f64, p: Vec2) -> Mat2 {
        let t = reduce_unit(t);
        self.field.hessian(t, p).unwrap_or_else(|| fd_hessian(self.field.as_ref(), t, p))
    }

    pub fn vector_field(&self, t: f64, p: Vec2) -> Result<Vec2, HamError> {
        let g = self.gradient(t, p);
        if !g.is_finite() {
            return Err(HamError::NonFinite { t, x: p.x, y: p.y });
        }
        Ok(Vec2::new(g.y, -g.x))
    }

    /// Derivative of X_H: [[H_yx, H_yy], [−H_xx, −H_xy]].
    pub fn vector_field_jacobian(&self, t: f64, p: Vec2) -> Result<Mat2, HamError> {
        let h = self.hessian(t, p);
        if !h.is_finite() {
            return Err(HamError::NonFinite { t, x: p.x, y: p.y });
        }
        Ok(Mat2::new(h.c, h.d, -h.a, -h.b))
    }

    pub fn exact_flow(&self, t0: f64, t1: f64, p: Vec2) -> Option<(Vec2, Mat2)> {
        self.field.exact_flow(t0, t1, p)
    }

    pub fn rename(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// λ·H.
    pub fn scaled(&self, lambda: f64) -> TimePeriodicHamiltonian {
        TimePeriodicHamiltonian::new(
            format!("{}*{}", lambda, self.name),
            self.surface,
            match self.normalization {
                Normalization::Admissible { c, r0 } => Normalization::Admissible { c: c * lambda, r0 },
                other => other,
            },
            Arc::new(Scaled { inner: self.clone(), lambda }),
        )
    }

    // Presets.

    /// ½c(r² − 1): admissible with slope c everywhere on the disk.
    pub fn rotation(c: f64) -> Self {
        Self::new(
            format!("rotation(c={c})"),
            Surface::Disk,
            Normalization::Admissible { c, r0: 0.0 },
            Arc::new(Rotation { c, shift: -0.5 * c }),
        )
    }

    /// ½c r², without the boundary shift.
    pub fn centered_rotation(c: f64) -> Self {
        Self::new(
            format!("centered-rotation(c={c})"),
            Surface::Disk,
            Normalization::Raw,
            Arc::new(Rotation { c, shift: 0.0 }),
        )
    }

    pub fn zero(surface: Surface) -> Self {
        Self::constant(surface, 0.0)
    }

    pub fn constant(surface: Surface, value: f64) -> Self {
        let normalization = match surface {
            Surface::Torus if value == 0.0 => Normalization::ZeroMean,
            Surface::Disk if value == 0.0 => Normalization::CompactSupport,
            _ => Normalization::Raw,
        };
        Self::new(format!("constant({value})"), surface, normalization, Arc::new(Constant(value)))
    }

    /// Arbitrary evaluator; derivatives by finite differences.
    pub fn from_fn<F>(name: impl Into<String>, surface: Surface, normalization: Normalization, f: F) -> Self
    where
        F: Fn(f64, Vec2) -> f64 + Send + Sync + 'static,
    {
        Self::new(name, surface, normalization, Arc::new(FnField(Box::new(f))))
    }

    /// cos(2πy)/(2π) on the torus.
    pub fn torus_shear() -> Self {
        Self::new("shear", Surface::Torus, Normalization::ZeroMean, Arc::new(TorusShear))
    }

    /// y²/2 + (cos 2πx − 1)/(2π)², evaluated on the lift.
    pub fn pendulum() -> Self {
        Self::new("pendulum", Surface::Torus, Normalization::Raw, Arc::new(Pendulum { forcing: 0.0 }))
    }

    /// Pendulum with the extra term forcing·cos(2πx)·cos(2πt)/(2π)².
    pub fn forced_pendulum(forcing: f64) -> Self {
        Self::new(
            format!("forced-pendulum(a={forcing})"),
            Surface::Torus,
            Normalization::Raw,
            Arc::new(Pendulum { forcing }),
        )
    }

    /// sin(2πx)·sin(2πy)/(2π)·(1 + a·sin 2πt) on the torus.
    pub fn cellular(modulation: f64) -> Self {
        Self::new(
            format!("cellular(a={modulation})"),
            Surface::Torus,
            Normalization::ZeroMean,
            Arc::new(Cellular { modulation }),
        )
    }

    pub fn bump(bump: Bump) -> Self {
        Self::new(
            format!("bump(c=({},{}),rho={},A={})", bump.center.x, bump.center.y, bump.radius, bump.amplitude),
            Surface::Disk,
            Normalization::CompactSupport,
            Arc::new(bump),
        )
    }
}

#[derive(Debug)]
struct Scaled {
    inner: TimePeriodicHamiltonian,
    lambda: f64,
}

impl HamiltonianField for Scaled {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        self.lambda * self.inner.value(t, p)
    }
    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        Some(self.inner.gradient(t, p) * self.lambda)
    }
    fn hessian(&self, t: f64, p: Vec2) -> Option<Mat2> {
        Some(self.inner.hessian(t, p).scale(self.lambda))
    }
}

#[derive(Debug, Clone, Copy)]
struct Rotation {
    c: f64,
    shift: f64,
}

impl HamiltonianField for Rotation {
    fn value(&self, _t: f64, p: Vec2) -> f64 {
        0.5 * self.c * p.norm_sq() + self.shift
    }
    fn gradient(&self, _t: f64, p: Vec2) -> Option<Vec2> {
        Some(p * self.c)
    }
    fn hessian(&self, _t: f64, _p: Vec2) -> Option<Mat2> {
        Some(Mat2::new(self.c, 0.0, 0.0, self.c))
    }
    fn exact_flow(&self, t0: f64, t1: f64, p: Vec2) -> Option<(Vec2, Mat2)> {
        let m = Mat2::rotation(-self.c * (t1 - t0));
        Some((m.apply(p), m))
    }
}

#[derive(Debug, Clone, Copy)]
struct Constant(f64);

impl HamiltonianField for Constant {
    fn value(&self, _t: f64, _p: Vec2) -> f64 {
        self.0
    }
    fn gradient(&self, _t: f64, _p: Vec2) -> Option<Vec2> {
        Some(Vec2::ZERO)
    }
    fn hessian(&self, _t: f64, _p: Vec2) -> Option<Mat2> {
        Some(Mat2::ZERO)
    }
    fn exact_flow(&self, _t0: f64, _t1: f64, p: Vec2) -> Option<(Vec2, Mat2)> {
        Some((p, Mat2::IDENTITY))
    }
}

type BoxedFn = Box<dyn Fn(f64, Vec2) -> f64 + Send + Sync>;

struct FnField(BoxedFn);

impl fmt::Debug for FnField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnField")
    }
}

impl HamiltonianField for FnField {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        (self.0)(t, p)
    }
}

#[derive(Debug, Clone, Copy)]
struct TorusShear;

impl HamiltonianField for TorusShear {
    fn value(&self, _t: f64, p: Vec2) -> f64 {
        (2.0 * PI * p.y).cos() / (2.0 * PI)
    }
    fn gradient(&self, _t: f64, p: Vec2) -> Option<Vec2> {
        Some(Vec2::new(0.0, -(2.0 * PI * p.y).sin()))
    }
    fn hessian(&self, _t: f64, p: Vec2) -> Option<Mat2> {
        Some(Mat2::new(0.0, 0.0, 0.0, -2.0 * PI * (2.0 * PI * p.y).cos()))
    }
}

#[derive(Debug, Clone, Copy)]
struct Pendulum {
    forcing: f64,
}

impl HamiltonianField for Pendulum {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        let k = 2.0 * PI;
        let mod_t = 1.0 + self.forcing * (k * t).cos();
        0.5 * p.y * p.y + ((k * p.x).cos() * mod_t - 1.0) / (k * k)
    }
    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        let k = 2.0 * PI;
        let mod_t = 1.0 + self.forcing * (k * t).cos();
        Some(Vec2::new(-(k * p.x).sin() * mod_t / k, p.y))
    }
    fn hessian(&self, t: f64, p: Vec2) -> Option<Mat2> {
        let k = 2.0 * PI;
        let mod_t = 1.0 + self.forcing * (k * t).cos();
        Some(Mat2::new(-(k * p.x).cos() * mod_t, 0.0, 0.0, 1.0))
    }
}

#[derive(Debug, Clone, Copy)]
struct Cellular {
    modulation: f64,
}

impl HamiltonianField for Cellular {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        let k = 2.0 * PI;
        (k * p.x).sin() * (k * p.y).sin() / k * (1.0 + self.modulation * (k * t).sin())
    }
    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        let k = 2.0 * PI;
        let m = 1.0 + self.modulation * (k * t).sin();
        Some(Vec2::new((k * p.x).cos() * (k * p.y).sin() * m, (k * p.x).sin() * (k * p.y).cos() * m))
    }
    fn hessian(&self, t: f64, p: Vec2) -> Option<Mat2> {
        let k = 2.0 * PI;
        let m = k * (1.0 + self.modulation * (k * t).sin());
        let (sx, cx) = (k * p.x).sin_cos();
        let (sy, cy) = (k * p.y).sin_cos();
        Some(Mat2::new(-sx * sy * m, cx * cy * m, cx * cy * m, -sx * sy * m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TimeProfile {
    #[default]
    Constant,
    /// sin(2πt)
    Sin,
    /// cos(2πt)
    Cos,
    /// 1 − cos(2πt): unit mean, vanishing to first order at integer times.
    Smooth,
}

impl TimeProfile {
    fn eval(self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sin => (2.0 * PI * t).sin(),
            TimeProfile::Cos => (2.0 * PI * t).cos(),
            TimeProfile::Smooth => 1.0 - (2.0 * PI * t).cos(),
        }
    }
}

/// amplitude·τ(t)·exp(1 − 1/(1 − s)), s = |p − center|²/radius², range [0, amplitude].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Vec2,
    pub radius: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub profile: TimeProfile,
}

impl Bump {
    pub fn new(center: Vec2, radius: f64, amplitude: f64) -> Self {
        Self { center, radius, amplitude, profile: TimeProfile::Constant }
    }

    pub fn with_profile(mut self, profile: TimeProfile) -> Self {
        self.profile = profile;
        self
    }

    /// Profile value and its first two derivatives in s.
    fn shape(s: f64) -> (f64, f64, f64) {
        if s >= 1.0 {
            return (0.0, 0.0, 0.0);
        }
        let u = 1.0 - s;
        let b = (1.0 - 1.0 / u).exp();
        let f1 = -1.0 / (u * u);
        let f2 = -2.0 / (u * u * u);
        (b, b * f1, b * (f1 * f1 + f2))
    }
}

impl HamiltonianField for Bump {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        let s = (p - self.center).norm_sq() / (self.radius * self.radius);
        self.amplitude * self.profile.eval(t) * Bump::shape(s).0
    }
    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        let r2 = self.radius * self.radius;
        let d = p - self.center;
        let (_, b1, _) = Bump::shape(d.norm_sq() / r2);
        Some(d * (self.amplitude * self.profile.eval(t) * b1 * 2.0 / r2))
    }
    fn hessian(&self, t: f64, p: Vec2) -> Option<Mat2> {
        let r2 = self.radius * self.radius;
        let d = p - self.center;
        let (_, b1, b2) = Bump::shape(d.norm_sq() / r2);
        let gs = d * (2.0 / r2);
        let a = self.amplitude * self.profile.eval(t);
        let iso = b1 * 2.0 / r2;
        Some(Mat2::new(
            a * (b2 * gs.x * gs.x + iso),
            a * b2 * gs.x * gs.y,
            a * b2 * gs.x * gs.y,
            a * (b2 * gs.y * gs.y + iso),
        ))
    }
}

/// k·G(kt mod 1, p).
#[derive(Debug)]
struct KthPower {
    base: TimePeriodicHamiltonian,
    k: u32,
}

impl HamiltonianField for KthPower {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        let k = self.k as f64;
        k * self.base.value(k * t, p)
    }
    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        let k = self.k as f64;
        Some(self.base.gradient(k * t, p) * k)
    }
    fn hessian(&self, t: f64, p: Vec2) -> Option<Mat2> {
        let k = self.k as f64;
        Some(self.base.hessian(k * t, p).scale(k))
    }
    fn exact_flow(&self, t0: f64, t1: f64, p: Vec2) -> Option<(Vec2, Mat2)> {
        let k = self.k as f64;
        self.base.exact_flow(k * t0, k * t1, p)
    }
}

/// Hamiltonian whose time-1 map is the k-th power of the time-1 map of `g`.
pub fn kth_power_hamiltonian(g: &TimePeriodicHamiltonian, k: u32) -> Result<TimePeriodicHamiltonian, HamError> {
    if k == 0 {
        return Err(HamError::InvalidParameter("k must be at least 1".into()));
    }
    if k == 1 {
        return Ok(g.clone());
    }
    let normalization = match g.normalization() {
        Normalization::Admissible { c, r0 } => Normalization::Admissible { c: c * k as f64, r0 },
        other => other,
    };
    Ok(TimePeriodicHamiltonian::new(
        format!("{}^{}", g.name(), k),
        g.surface(),
        normalization,
        Arc::new(KthPower { base: g.clone(), k }),
    ))
}

/// How the composed Hamiltonian evaluates the inverse outer flow.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InverseFlowMode {
    /// Backward integration on every evaluation (or the closed-form flow when available).
    Exact { step: f64 },
    /// Lazily filled node cache over [-1,1]² × time slices with bilinear
    /// interpolation in space and linear interpolation in time.
    Cached { spacing: f64, time_slices: usize, step: f64 },
}

impl Default for InverseFlowMode {
    fn default() -> Self {
        InverseFlowMode::Exact { step: 1e-3 }
    }
}

#[derive(Debug)]
struct Composed {
    outer: TimePeriodicHamiltonian,
    inner: TimePeriodicHamiltonian,
    mode: InverseFlowMode,
    cache: Mutex<HashMap<(u32, i32, i32), Vec2>>,
}

impl Composed {
    fn inverse_exact(&self, t: f64, p: Vec2, step: f64) -> Option<(Vec2, Mat2)> {
        if t == 0.0 {
            return Some((p, Mat2::IDENTITY));
        }
        if let Some(r) = self.outer.exact_flow(t, 0.0, p) {
            return Some(r);
        }
        let cfg = IntegratorConfig { step, ..IntegratorConfig::default() };
        integrate::advance_with_jacobian(&self.outer, t, 0.0, p, &cfg).ok()
    }

    fn node(&self, slice: u32, ix: i32, iy: i32, spacing: f64, slices: usize, step: f64) -> Vec2 {
        if let Some(v) = self.cache.lock().expect("cache poisoned").get(&(slice, ix, iy)) {
            return *v;
        }
        let t = slice as f64 / slices as f64;
        let p = Vec2::new(ix as f64 * spacing, iy as f64 * spacing);
        let v = self
            .inverse_exact(t, p, step)
            .map(|(q, _)| q)
            .unwrap_or(Vec2::new(f64::NAN, f64::NAN));
        self.cache.lock().expect("cache poisoned").insert((slice, ix, iy), v);
        v
    }

    fn inverse_cached(&self, t: f64, p: Vec2, spacing: f64, slices: usize, step: f64) -> Vec2 {
        let fx = p.x / spacing;
        let fy = p.y / spacing;
        let (ix, iy) = (fx.floor(), fy.floor());
        let (ax, ay) = (fx - ix, fy - iy);
        let (ix, iy) = (ix as i32, iy as i32);
        let ts = t * slices as f64;
        let s0 = ts.floor();
        let at = ts - s0;
        let s0 = s0 as u32;
        let spatial = |s: u32| {
            let v00 = self.node(s, ix, iy, spacing, slices, step);
            let v10 = self.node(s, ix + 1, iy, spacing, slices, step);
            let v01 = self.node(s, ix, iy + 1, spacing, slices, step);
            let v11 = self.node(s, ix + 1, iy + 1, spacing, slices, step);
            v00.lerp(v10, ax).lerp(v01.lerp(v11, ax), ay)
        };
        let a = spatial(s0);
        if at == 0.0 {
            return a;
        }
        a.lerp(spatial(s0 + 1), at)
    }
}

impl HamiltonianField for Composed {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        let q = match self.mode {
            InverseFlowMode::Exact { step } => match self.inverse_exact(t, p, step) {
                Some((q, _)) => q,
                None => return f64::NAN,
            },
            InverseFlowMode::Cached { spacing, time_slices, step } => {
                self.inverse_cached(t, p, spacing, time_slices, step)
            }
        };
        self.outer.value(t, p) + self.inner.value(t, q)
    }

    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        match self.mode {
            InverseFlowMode::Exact { step } => {
                let Some((q, dq)) = self.inverse_exact(t, p, step) else {
                    return Some(Vec2::new(f64::NAN, f64::NAN));
                };
                Some(self.outer.gradient(t, p) + dq.transpose().apply(self.inner.gradient(t, q)))
            }
            InverseFlowMode::Cached { .. } => None,
        }
    }
}

/// H_⊕(t,p) + F_t((φ_⊕^t)⁻¹(p)), whose time-1 map is φ_⊕ ∘ φ_F.
pub fn compose_hamiltonians(
    outer: &TimePeriodicHamiltonian,
    inner: &TimePeriodicHamiltonian,
    mode: InverseFlowMode,
) -> Result<TimePeriodicHamiltonian, HamError> {
    if outer.surface() != inner.surface() {
        return Err(HamError::InvalidParameter("surfaces differ".into()));
    }
    match mode {
        InverseFlowMode::Exact { step } if step <= 0.0 => {
            return Err(HamError::InvalidParameter("step must be positive".into()))
        }
        InverseFlowMode::Cached { spacing, time_slices, step }
            if spacing <= 0.0 || time_slices == 0 || step <= 0.0 =>
        {
            return Err(HamError::InvalidParameter("cache parameters must be positive".into()))
        }
        _ => {}
    }
    Ok(TimePeriodicHamiltonian::new(
        format!("{}#{}", outer.name(), inner.name()),
        outer.surface(),
        outer.normalization(),
        Arc::new(Composed { outer: outer.clone(), inner: inner.clone(), mode, cache: Mutex::new(HashMap::new()) }),
    ))
}

#[derive(Debug)]
struct Admissible {
    c: f64,
    r0: f64,
    interior: Arc<dyn HamiltonianField>,
}

impl HamiltonianField for Admissible {
    fn value(&self, t: f64, p: Vec2) -> f64 {
        let r2 = p.norm_sq();
        if r2 >= self.r0 * self.r0 {
            0.5 * self.c * (r2 - 1.0)
        } else {
            self.interior.value(t, p)
        }
    }
    fn gradient(&self, t: f64, p: Vec2) -> Option<Vec2> {
        if p.norm_sq() >= self.r0 * self.r0 {
            Some(p * self.c)
        } else {
            Some(field_gradient(self.interior.as_ref(), t, p))
        }
    }
    fn hessian(&self, t: f64, p: Vec2) -> Option<Mat2> {
        if p.norm_sq() >= self.r0 * self.r0 {
            Some(Mat2::new(self.c, 0.0, 0.0, self.c))
        } else {
            Some(
                self.interior
                    .hessian(t, p)
                    .unwrap_or_else(|| fd_hessian(self.interior.as_ref(), t, p)),
            )
        }
    }
}

/// Glues `interior` to ½c(r²−1) at r = r0 after checking C¹ agreement on a
/// 64-point ring at four time samples.
pub fn make_admissible_disk_hamiltonian(
    c: f64,
    interior: Arc<dyn HamiltonianField>,
    r0: f64,
) -> Result<TimePeriodicHamiltonian, HamError> {
    if !(r0 > 0.0 && r0 < 1.0) {
        return Err(HamError::InvalidParameter(format!("r0 = {r0} must lie in (0, 1)")));
    }
    const TOL: f64 = 1e-8;
    for ti in 0..4 {
        let t = ti as f64 / 4.0;
        for i in 0..64 {
            let a = 2.0 * PI * i as f64 / 64.0;
            let p = Vec2::new(r0 * a.cos(), r0 * a.sin());
            let dv = (interior.value(t, p) - 0.5 * c * (r0 * r0 - 1.0)).abs();
            if !(dv <= TOL) {
                return Err(HamError::GluingMismatch { r0, what: "value", err: dv });
            }
            let dg = (field_gradient(interior.as_ref(), t, p) - p * c).max_abs();
            if !(dg <= TOL) {
                return Err(HamError::GluingMismatch { r0, what: "gradient", err: dg });
            }
        }
    }
    Ok(TimePeriodicHamiltonian::new(
        format!("admissible(c={c},r0={r0})"),
        Surface::Disk,
        Normalization::Admissible { c, r0 },
        Arc::new(Admissible { c, r0, interior }),
    ))
}

pub fn hamiltonian_vector_field(h: &TimePeriodicHamiltonian, t: f64, p: &SurfacePoint) -> Result<Vec2, HamError> {
    h.vector_field(t, p.lift())
}

/// Mean of H(t,·) over a uniform torus grid.
pub fn torus_mean(h: &TimePeriodicHamiltonian, t: f64, grid: usize) -> f64 {
    let n = grid.max(1);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += h.value(t, Vec2::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    s / (n * n) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HoferEstimate {
    pub value: f64,
    pub t_grid: usize,
    pub space_grid: usize,
}

fn space_nodes(surface: Surface, g: usize) -> (Vec<Vec2>, f64) {
    match surface {
        Surface::Disk => {
            let d = 2.0 / (g - 1) as f64;
            let mut pts = Vec::with_capacity(g * g);
            for i in 0..g {
                for j in 0..g {
                    let p = Vec2::new(-1.0 + i as f64 * d, -1.0 + j as f64 * d);
                    if p.norm_sq() <= 1.0 {
                        pts.push(p);
                    }
                }
            }
            (pts, d)
        }
        Surface::Torus => {
            let d = 1.0 / g as f64;
            let mut pts = Vec::with_capacity(g * g);
            for i in 0..g {
                for j in 0..g {
                    pts.push(Vec2::new(i as f64 * d, j as f64 * d));
                }
            }
            (pts, d)
        }
    }
}

fn oscillation_at(h: &TimePeriodicHamiltonian, t: f64, nodes: &[Vec2], d: f64) -> f64 {
    let surface = h.surface();
    let mut best_max = (f64::NEG_INFINITY, Vec2::ZERO);
    let mut best_min = (f64::INFINITY, Vec2::ZERO);
    for &p in nodes {
        let v = h.value(t, p);
        if v > best_max.0 {
            best_max = (v, p);
        }
        if v < best_min.0 {
            best_min = (v, p);
        }
    }
    let refine = |(v0, c): (f64, Vec2), better: &dyn Fn(f64, f64) -> bool| {
        let mut best = v0;
        for i in -4..=4 {
            for j in -4..=4 {
                let p = c + Vec2::new(i as f64, j as f64) * (d / 4.0);
                if surface == Surface::Disk && p.norm_sq() > 1.0 {
                    continue;
                }
                let v = h.value(t, p);
                if better(v, best) {
                    best = v;
                }
            }
        }
        best
    };
    let max = refine(best_max, &|a, b| a > b);
    let min = refine(best_min, &|a, b| a < b);
    max - min
}

/// Periodic-trapezoid estimate of ∫₀¹ (max F_t − min F_t) dt. The spatial
/// extrema come from a grid scan plus one 9×9 refinement around each, so the
/// result never exceeds the true value up to rounding.
pub fn hofer_norm(f: &TimePeriodicHamiltonian, t_grid: usize, space_grid: usize) -> Result<HoferEstimate, HamError> {
    if t_grid < 2 || space_grid < 2 {
        return Err(HamError::GridTooSmall);
    }
    let (nodes, d) = space_nodes(f.surface(), space_grid);
    let osc: Vec<f64> = (0..t_grid)
        .into_par_iter()
        .map(|i| oscillation_at(f, i as f64 / t_grid as f64, &nodes, d))
        .collect();
    let value = osc.iter().sum::<f64>() / t_grid as f64;
    if !value.is_finite() {
        return Err(HamError::NonFinite { t: f64::NAN, x: f64::NAN, y: f64::NAN });
    }
    Ok(HoferEstimate { value, t_grid, space_grid })
}
