//! Three-component vector used for positions, velocities and field contributions.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A 3-D vector. Positions are in meters, velocities in meters per tick.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn splat(v: f64) -> Self {
        Self::new(v, v, v)
    }

    /// Euclidean length.
    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Component-wise product.
    pub fn hadamard(self, other: Vec3) -> Vec3 {
        Vec3::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Rescales the vector so its length does not exceed `limit`.
    pub fn clamp_norm(self, limit: f64) -> Vec3 {
        let n = self.norm();
        if n > limit && n > 0.0 {
            self * (limit / n)
        } else {
            self
        }
    }

    /// True when every component of `self` is strictly below the matching
    /// component of `other`.
    pub fn all_lt(self, other: Vec3) -> bool {
        self.x < other.x && self.y < other.y && self.z < other.z
    }

    /// True when `self` lies inside the closed box `[lo, hi]`.
    pub fn within(self, lo: Vec3, hi: Vec3) -> bool {
        (lo.x..=hi.x).contains(&self.x)
            && (lo.y..=hi.y).contains(&self.y)
            && (lo.z..=hi.z).contains(&self.z)
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Vec3::new(x, y, z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, rhs: Vec3) {
        *self = *self + rhs;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        rhs * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_examples() {
        assert_eq!(Vec3::ZERO.norm(), 0.0);
        assert_eq!(Vec3::new(3.0, 4.0, 0.0).norm(), 5.0);
        assert!((Vec3::splat(1.0).norm() - 3f64.sqrt()).abs() < 1e-12);
        assert!((Vec3::splat(1.0).norm() - 1.732_050_8).abs() < 1e-7);
    }

    #[test]
    fn clamp_norm_keeps_direction() {
        let v = Vec3::new(3.0, 4.0, 0.0).clamp_norm(1.0);
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert!((v.x - 0.6).abs() < 1e-12 && (v.y - 0.8).abs() < 1e-12);
        assert_eq!(
            Vec3::new(0.1, 0.0, 0.0).clamp_norm(1.0),
            Vec3::new(0.1, 0.0, 0.0)
        );
        assert_eq!(Vec3::ZERO.clamp_norm(1.0), Vec3::ZERO);
    }

    #[test]
    fn within_is_closed() {
        let lo = Vec3::ZERO;
        let hi = Vec3::new(10.0, 10.0, 5.0);
        assert!(hi.within(lo, hi));
        assert!(lo.within(lo, hi));
        assert!(!Vec3::new(10.0, 10.0, 5.000_001).within(lo, hi));
    }
}
