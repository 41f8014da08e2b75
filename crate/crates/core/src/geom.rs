//! Plain 2-vectors and a symmetric 2x2 matrix.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    /// Unit vector at `angle` radians counterclockwise from +x.
    pub fn from_angle(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Vec2::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        self / self.norm()
    }

    /// Rotation by +90 degrees.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Polar angle in (-pi, pi].
    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Counterclockwise angle from `self` to `other`, in (-pi, pi].
    pub fn angle_to(self, other: Vec2) -> f64 {
        self.cross(other).atan2(self.dot(other))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
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

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, s: f64) -> Vec2 {
        Vec2::new(self.x / s, self.y / s)
    }
}

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn scaled_identity(s: f64) -> Self {
        Sym2 { xx: s, xy: 0.0, yy: s }
    }

    /// `w w^T`.
    pub fn outer(w: Vec2) -> Self {
        Sym2 {
            xx: w.x * w.x,
            xy: w.x * w.y,
            yy: w.y * w.y,
        }
    }

    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_tr = 0.5 * self.trace();
        let d = (0.5 * (self.xx - self.yy)).hypot(self.xy);
        [half_tr - d, half_tr + d]
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.xx * v.x + self.xy * v.y, self.xy * v.x + self.yy * v.y)
    }

    /// Frobenius product `A : B`.
    pub fn frobenius(&self, o: &Sym2) -> f64 {
        self.xx * o.xx + 2.0 * self.xy * o.xy + self.yy * o.yy
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2 {
            xx: self.xx - o.xx,
            xy: self.xy - o.xy,
            yy: self.yy - o.yy,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angle_to_is_signed() {
        let a = Vec2::new(1.0, 0.0);
        assert!((a.angle_to(Vec2::new(0.0, 1.0)) - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((a.angle_to(Vec2::new(0.0, -1.0)) + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn eigenvalues_of_outer_product() {
        let w = Vec2::new(3.0, 4.0);
        let m = Sym2::scaled_identity(2.0) - Sym2::outer(w);
        let [lo, hi] = m.eigenvalues();
        assert!((lo - (2.0 - 25.0)).abs() < 1e-12);
        assert!((hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn serde_as_pair() {
        let v = Vec2::new(1.5, -2.0);
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "[1.5,-2.0]");
        let back: Vec2 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
