//! Points, directions and the segment/cylinder occlusion primitive.

use core::ops::{Add, Mul, Neg, Sub};

use crate::math;

/// A point or direction in room coordinates, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const UP: Vec3 = Vec3::new(0.0, 0.0, 1.0);
    pub const DOWN: Vec3 = Vec3::new(0.0, 0.0, -1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        math::sqrt(self.norm_sq())
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (other - self).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Length of the segment portion next to each endpoint that is ignored by
/// [`segment_hits_cylinder`], in meters.
pub const GRAZING_TOLERANCE: f64 = 1e-9;

/// Vertical solid cylinder standing on the floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cylinder {
    pub center_x: f64,
    pub center_y: f64,
    pub radius: f64,
    pub height: f64,
}

/// Whether the segment `p0 -> p1` passes through the closed solid cylinder.
///
/// The first and last [`GRAZING_TOLERANCE`] meters of the segment are
/// excluded, so a segment that only touches the cylinder at an endpoint is
/// not blocked.
pub fn segment_hits_cylinder(p0: Vec3, p1: Vec3, cyl: &Cylinder) -> bool {
    let d = p1 - p0;
    let len = d.norm();
    if !(len > 2.0 * GRAZING_TOLERANCE) {
        return false;
    }
    let margin = GRAZING_TOLERANCE / len;
    let mut s_lo = margin;
    let mut s_hi = 1.0 - margin;

    // Height slab 0 <= z <= height.
    if d.z == 0.0 {
        if p0.z < 0.0 || p0.z > cyl.height {
            return false;
        }
    } else {
        let a = (0.0 - p0.z) / d.z;
        let b = (cyl.height - p0.z) / d.z;
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        s_lo = s_lo.max(a);
        s_hi = s_hi.min(b);
        if s_lo > s_hi {
            return false;
        }
    }

    // Radial condition: |o + s*dxy|^2 <= r^2.
    let ox = p0.x - cyl.center_x;
    let oy = p0.y - cyl.center_y;
    let qa = d.x * d.x + d.y * d.y;
    let qb = 2.0 * (ox * d.x + oy * d.y);
    let qc = ox * ox + oy * oy - cyl.radius * cyl.radius;
    if qa <= f64::EPSILON * f64::EPSILON * len * len {
        return qc <= 0.0;
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return false;
    }
    let root = math::sqrt(disc);
    // Numerically stable pair of roots.
    let q = if qb >= 0.0 { -0.5 * (qb + root) } else { -0.5 * (qb - root) };
    let (r0, r1) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        let x0 = q / qa;
        let x1 = qc / q;
        if x0 <= x1 {
            (x0, x1)
        } else {
            (x1, x0)
        }
    };
    r0.max(s_lo) <= r1.min(s_hi)
}
