//! Small 3-vector and quaternion toolkit.
//!
//! Quaternions are scalar-first `(w, x, y, z)`, Hamilton product, right-handed.

use core::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3(pub [f64; 3]);

impl Vec3 {
    pub const ZERO: Vec3 = Vec3([0.0; 3]);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3([x, y, z])
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.0[0] * other.0[0] + self.0[1] * other.0[1] + self.0[2] * other.0[2]
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn scale(self, k: f64) -> Vec3 {
        Vec3([self.0[0] * k, self.0[1] * k, self.0[2] * k])
    }

    pub fn is_finite(self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// `self + (other - self) * u`
    pub fn lerp(self, other: Vec3, u: f64) -> Vec3 {
        self + (other - self).scale(u)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        self.scale(-1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Quat {
    fn default() -> Self {
        Quat::IDENTITY
    }
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quat { w, x, y, z }
    }

    /// Rotation of `angle` radians about `axis` (need not be normalized).
    pub fn from_axis_angle(axis: Vec3, angle: f64) -> Quat {
        let n = axis.norm();
        if n == 0.0 {
            return Quat::IDENTITY;
        }
        let (s, c) = (libm::sin(angle / 2.0), libm::cos(angle / 2.0));
        let a = axis.scale(s / n);
        Quat::new(c, a.0[0], a.0[1], a.0[2])
    }

    /// Inverse of [`Quat::log`]: unit quaternion from a rotation vector.
    pub fn exp(rotvec: Vec3) -> Quat {
        let angle = rotvec.norm();
        if angle < 1e-12 {
            // second-order series keeps tiny rotations accurate
            let h = rotvec.scale(0.5);
            return Quat::new(1.0, h.0[0], h.0[1], h.0[2]).normalized();
        }
        Quat::from_axis_angle(rotvec, angle)
    }

    pub fn vector(self) -> Vec3 {
        Vec3([self.x, self.y, self.z])
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    pub fn dot(self, o: Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Unit-norm copy. A zero quaternion stays zero.
    pub fn normalized(self) -> Quat {
        let n = self.norm();
        if n == 0.0 {
            return self;
        }
        Quat::new(self.w / n, self.x / n, self.y / n, self.z / n)
    }

    pub fn conjugate(self) -> Quat {
        Quat::new(self.w, -self.x, -self.y, -self.z)
    }

    /// Conjugate; equal to the inverse for unit quaternions.
    pub fn inverse(self) -> Quat {
        self.conjugate()
    }

    /// Representative with `w >= 0`, i.e. rotation angle in `[0, π]`.
    pub fn canonical(self) -> Quat {
        if self.w < 0.0 {
            -self
        } else {
            self
        }
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(self) -> f64 {
        let c = self.canonical();
        2.0 * libm::atan2(c.vector().norm(), c.w)
    }

    /// Rotation vector (axis · angle) of the shortest-arc representative.
    pub fn log(self) -> Vec3 {
        let c = self.canonical();
        let v = c.vector();
        let s = v.norm();
        if s < 1e-12 {
            return v.scale(2.0);
        }
        let angle = 2.0 * libm::atan2(s, c.w);
        v.scale(angle / s)
    }

    /// Spherical interpolation along the shortest arc. Output is unit-norm.
    pub fn slerp(self, other: Quat, u: f64) -> Quat {
        let mut b = other;
        let mut d = self.dot(b);
        if d < 0.0 {
            b = -b;
            d = -d;
        }
        if d > 1.0 - 1e-12 {
            return Quat::new(
                self.w + (b.w - self.w) * u,
                self.x + (b.x - self.x) * u,
                self.y + (b.y - self.y) * u,
                self.z + (b.z - self.z) * u,
            )
            .normalized();
        }
        let theta = libm::acos(d.min(1.0));
        let s = libm::sin(theta);
        let ka = libm::sin((1.0 - u) * theta) / s;
        let kb = libm::sin(u * theta) / s;
        Quat::new(ka * self.w + kb * b.w, ka * self.x + kb * b.x, ka * self.y + kb * b.y, ka * self.z + kb * b.z)
            .normalized()
    }

    /// Rotates `v` by this (unit) quaternion.
    pub fn rotate(self, v: Vec3) -> Vec3 {
        let p = Quat::new(0.0, v.0[0], v.0[1], v.0[2]);
        (self * p * self.conjugate()).vector()
    }
}

impl Mul for Quat {
    type Output = Quat;
    fn mul(self, r: Quat) -> Quat {
        let q = self;
        Quat::new(
            q.w * r.w - q.x * r.x - q.y * r.y - q.z * r.z,
            q.w * r.x + q.x * r.w + q.y * r.z - q.z * r.y,
            q.w * r.y - q.x * r.z + q.y * r.w + q.z * r.x,
            q.w * r.z + q.x * r.y - q.y * r.x + q.z * r.w,
        )
    }
}

impl Neg for Quat {
    type Output = Quat;
    fn neg(self) -> Quat {
        Quat::new(-self.w, -self.x, -self.y, -self.z)
    }
}
