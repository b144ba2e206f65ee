//! Planar vectors, angle wrapping and ray/segment intersection primitives.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<R> {
    pub x: R,
    pub y: R,
}

impl<R: Real> Vec2<R> {
    #[inline]
    pub fn new(x: R, y: R) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(R::zero(), R::zero())
    }

    /// Unit vector at angle `theta` from the +x axis.
    #[inline]
    pub fn from_angle(theta: R) -> Self {
        Self::new(theta.cos(), theta.sin())
    }

    #[inline]
    pub fn dot(self, other: Self) -> R {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn cross(self, other: Self) -> R {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm_sq(self) -> R {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> R {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Self) -> R {
        (self - other).norm()
    }

    /// Angle of this vector from the +x axis, in (−π, π].
    #[inline]
    pub fn angle(self) -> R {
        self.y.atan2(self.x)
    }

    /// Normalized copy, or `None` for (near) zero vectors.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > R::lit(1e-12) {
            Some(self * (R::one() / n))
        } else {
            None
        }
    }

    /// Counter-clockwise rotation by `theta`.
    #[inline]
    pub fn rotated(self, theta: R) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<R: Real> Add for Vec2<R> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<R: Real> AddAssign for Vec2<R> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl<R: Real> Sub for Vec2<R> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<R: Real> SubAssign for Vec2<R> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl<R: Real> Mul<R> for Vec2<R> {
    type Output = Self;
    #[inline]
    fn mul(self, k: R) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<R: Real> Neg for Vec2<R> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_angle<R: Real>(theta: R) -> R {
    let pi = R::PI();
    let two_pi = pi + pi;
    let mut wrapped = theta - two_pi * ((theta + pi) / two_pi).floor();
    // floor-based wrap lands in [−π, π); fold the lower endpoint over.
    if wrapped <= -pi {
        wrapped += two_pi;
    }
    if wrapped > pi {
        wrapped -= two_pi;
    }
    wrapped
}

/// Absolute wrapped difference between two angles, in [0, π].
#[inline]
pub fn angle_between<R: Real>(a: R, b: R) -> R {
    wrap_angle(a - b).abs()
}

/// Distance along a ray (unit `dir`) to its first intersection with a circle,
/// or `None` when the ray misses. A ray starting inside the circle hits at 0.
pub fn ray_circle<R: Real>(origin: Vec2<R>, dir: Vec2<R>, center: Vec2<R>, radius: R) -> Option<R> {
    let oc = origin - center;
    let c = oc.norm_sq() - radius * radius;
    if c <= R::zero() {
        return Some(R::zero());
    }
    let b = oc.dot(dir);
    if b >= R::zero() {
        return None;
    }
    let disc = b * b - c;
    if disc < R::zero() {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= R::zero()).then_some(t)
}

/// Distance along a ray from a point inside the box `[0, w] × [0, h]` to the box boundary.
pub fn ray_box_exit<R: Real>(origin: Vec2<R>, dir: Vec2<R>, width: R, height: R) -> R {
    let eps = R::lit(1e-15);
    let mut t = R::infinity();
    if dir.x > eps {
        t = t.min((width - origin.x) / dir.x);
    } else if dir.x < -eps {
        t = t.min(-origin.x / dir.x);
    }
    if dir.y > eps {
        t = t.min((height - origin.y) / dir.y);
    } else if dir.y < -eps {
        t = t.min(-origin.y / dir.y);
    }
    t.max(R::zero())
}

/// Shortest distance from `p` to the segment `a`–`b`.
pub fn point_segment_distance<R: Real>(p: Vec2<R>, a: Vec2<R>, b: Vec2<R>) -> R {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq <= R::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(R::zero()).min(R::one());
    p.distance(a + ab * t)
}

/// True when the closed segment `a`–`b` passes strictly inside the circle.
#[inline]
pub fn segment_hits_circle<R: Real>(a: Vec2<R>, b: Vec2<R>, center: Vec2<R>, radius: R) -> bool {
    point_segment_distance(center, a, b) < radius
}
