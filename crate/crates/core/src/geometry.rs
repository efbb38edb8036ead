//! Planar vectors, 2×2 matrices and points on the disk or the flat torus.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Slack allowed outside the closed unit disk before a point is rejected.
pub const DISK_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, other: Vec2, f: f64) -> Vec2 {
        self + (other - self) * f
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Row-major 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };
    pub const ZERO: Mat2 = Mat2 { a: 0.0, b: 0.0, c: 0.0, d: 0.0 };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn rotation(angle: f64) -> Mat2 {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a, self.c, self.b, self.d)
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a * v.x + self.b * v.y, self.c * v.x + self.d * v.y)
    }

    pub fn scale(&self, s: f64) -> Mat2 {
        Mat2::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs()).max(self.d.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d).sqrt()
    }

    /// Ratio of largest to smallest singular value; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let s = (self.a + self.d).hypot(self.c - self.b);
        let q = (self.a - self.d).hypot(self.b + self.c);
        let smin = 0.5 * (s - q).abs();
        if smin == 0.0 {
            return f64::INFINITY;
        }
        0.5 * (s + q) / smin
    }

    /// Eigenvalues as a complex pair, larger real part (or positive imaginary part) first.
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        let tr = self.trace();
        let det = self.det();
        let disc = tr * tr / 4.0 - det;
        if disc >= 0.0 {
            let s = disc.sqrt();
            [Complex64::new(tr / 2.0 + s, 0.0), Complex64::new(tr / 2.0 - s, 0.0)]
        } else {
            let s = (-disc).sqrt();
            [Complex64::new(tr / 2.0, s), Complex64::new(tr / 2.0, -s)]
        }
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Surface {
    Disk,
    Torus,
}

impl std::fmt::Display for Surface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Surface::Disk => f.write_str("disk"),
            Surface::Torus => f.write_str("torus"),
        }
    }
}

/// Reduces a real number into `[0, 1)`.
pub fn reduce_unit(v: f64) -> f64 {
    let r = v - v.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Displacement `b - a` taken to its nearest representative on the torus.
pub fn torus_min_image(d: Vec2) -> Vec2 {
    Vec2::new(d.x - d.x.round(), d.y - d.y.round())
}

/// A point on the disk or torus. Torus points keep the unwrapped lift they
/// were produced on; [`SurfacePoint::coords`] returns the reduced representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    surface: Surface,
    lift: Vec2,
}

impl SurfacePoint {
    pub fn disk(x: f64, y: f64) -> Result<Self, GeometryError> {
        let p = Vec2::new(x, y);
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        if p.norm_sq() > 1.0 + DISK_TOLERANCE {
            return Err(GeometryError::OutsideDisk { x, y });
        }
        Ok(Self { surface: Surface::Disk, lift: p })
    }

    pub fn torus(x: f64, y: f64) -> Result<Self, GeometryError> {
        let p = Vec2::new(x, y);
        if !p.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        Ok(Self { surface: Surface::Torus, lift: p })
    }

    pub fn on(surface: Surface, p: Vec2) -> Result<Self, GeometryError> {
        match surface {
            Surface::Disk => Self::disk(p.x, p.y),
            Surface::Torus => Self::torus(p.x, p.y),
        }
    }

    pub(crate) fn unchecked(surface: Surface, lift: Vec2) -> Self {
        Self { surface, lift }
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    /// Unwrapped coordinates (identical to `coords` on the disk).
    pub fn lift(&self) -> Vec2 {
        self.lift
    }

    /// Canonical coordinates: Euclidean on the disk, `[0,1)²` on the torus.
    pub fn coords(&self) -> Vec2 {
        match self.surface {
            Surface::Disk => self.lift,
            Surface::Torus => Vec2::new(reduce_unit(self.lift.x), reduce_unit(self.lift.y)),
        }
    }

    /// The same point with its lift replaced by the reduced representative.
    pub fn normalized(&self) -> SurfacePoint {
        SurfacePoint { surface: self.surface, lift: self.coords() }
    }

    /// Distance on the surface (minimal image on the torus).
    pub fn distance(&self, other: &SurfacePoint) -> f64 {
        surface_distance(self.surface, self.lift, other.lift)
    }
}

pub fn surface_distance(surface: Surface, a: Vec2, b: Vec2) -> f64 {
    match surface {
        Surface::Disk => (a - b).norm(),
        Surface::Torus => torus_min_image(b - a).norm(),
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point ({x}, {y}) lies outside the closed unit disk")]
    OutsideDisk { x: f64, y: f64 },
    #[error("non-finite coordinate")]
    NonFinite,
}
