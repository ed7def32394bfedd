//! Planar geometry shared by the map compiler, the simulator and the renderer.
//!
//! All lengths are meters. Angles handed across module boundaries are degrees,
//! counterclockwise, with 0 pointing along map +x.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

/// Serialized as a two-element array `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `deg` degrees counterclockwise from +x.
    pub fn from_angle_deg(deg: f64) -> Self {
        let r = deg.to_radians();
        Self::new(r.cos(), r.sin())
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the 3D cross product; positive when `o` is counterclockwise of `self`.
    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n == 0.0 {
            self
        } else {
            self * (1.0 / n)
        }
    }

    /// Rotated 90 degrees counterclockwise.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn angle_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Vec2 { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl From<[Vec2; 2]> for Segment2 {
    fn from([a, b]: [Vec2; 2]) -> Self {
        Segment2 { a, b }
    }
}

impl From<Segment2> for [Vec2; 2] {
    fn from(s: Segment2) -> Self {
        [s.a, s.b]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Serialized as `[[ax, ay], [bx, by]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[Vec2; 2]", into = "[Vec2; 2]")]
pub struct Segment2 {
    pub a: Vec2,
    pub b: Vec2,
}

impl Segment2 {
    pub const fn new(a: Vec2, b: Vec2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(self.b)
    }

    /// Orthogonal projection of `p` clamped to the segment.
    /// Returns `(point, arc_length_from_a, distance)`.
    pub fn project(&self, p: Vec2) -> (Vec2, f64, f64) {
        let d = self.b - self.a;
        let len2 = d.dot(d);
        let t = if len2 == 0.0 {
            0.0
        } else {
            ((p - self.a).dot(d) / len2).clamp(0.0, 1.0)
        };
        let q = self.a + d * t;
        (q, t * len2.sqrt(), q.dist(p))
    }

    pub fn distance_to(&self, p: Vec2) -> f64 {
        self.project(p).2
    }

    /// Parameter along the ray `origin + t * dir` (dir need not be unit) at which
    /// the ray meets this segment, if it does.
    pub fn ray_hit(&self, origin: Vec2, dir: Vec2) -> Option<f64> {
        let e = self.b - self.a;
        let denom = dir.cross(e);
        if denom.abs() < 1e-12 {
            return None;
        }
        let w = self.a - origin;
        let t = w.cross(e) / denom;
        let u = w.cross(dir) / denom;
        if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&u) {
            Some(t)
        } else {
            None
        }
    }

    /// Minimum distance between two segments.
    pub fn distance_to_segment(&self, o: &Segment2) -> f64 {
        if segments_intersect(self, o) {
            return 0.0;
        }
        self.distance_to(o.a)
            .min(self.distance_to(o.b))
            .min(o.distance_to(self.a))
            .min(o.distance_to(self.b))
    }
}

pub fn segments_intersect(s: &Segment2, o: &Segment2) -> bool {
    let d1 = s.b - s.a;
    let d2 = o.b - o.a;
    let denom = d1.cross(d2);
    if denom.abs() < 1e-12 {
        return false;
    }
    let w = o.a - s.a;
    let t = w.cross(d2) / denom;
    let u = w.cross(d1) / denom;
    (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u)
}

/// Convex quadrilateral described by an oriented rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub center: Vec2,
    /// Unit axis along the rectangle's length.
    pub axis: Vec2,
    pub half_len: f64,
    pub half_width: f64,
}

impl Rect {
    pub fn corners(&self) -> [Vec2; 4] {
        let u = self.axis * self.half_len;
        let v = self.axis.perp() * self.half_width;
        [
            self.center - u - v,
            self.center + u - v,
            self.center + u + v,
            self.center - u + v,
        ]
    }

    pub fn edges(&self) -> [Segment2; 4] {
        let c = self.corners();
        [
            Segment2::new(c[0], c[1]),
            Segment2::new(c[1], c[2]),
            Segment2::new(c[2], c[3]),
            Segment2::new(c[3], c[0]),
        ]
    }

    /// Strict containment with a tolerance shrinking the rectangle.
    pub fn contains_strict(&self, p: Vec2, eps: f64) -> bool {
        let d = p - self.center;
        d.dot(self.axis).abs() < self.half_len - eps
            && d.dot(self.axis.perp()).abs() < self.half_width - eps
    }

    pub fn contains(&self, p: Vec2, eps: f64) -> bool {
        let d = p - self.center;
        d.dot(self.axis).abs() <= self.half_len + eps
            && d.dot(self.axis.perp()).abs() <= self.half_width + eps
    }

    /// Parametric interval `[t0, t1]` of `s` that lies strictly inside the rectangle.
    pub fn clip_interval(&self, s: &Segment2) -> Option<(f64, f64)> {
        let d = s.b - s.a;
        let rel = s.a - self.center;
        let mut t0: f64 = 0.0;
        let mut t1: f64 = 1.0;
        for (axis, half) in [
            (self.axis, self.half_len),
            (self.axis.perp(), self.half_width),
        ] {
            let p = rel.dot(axis);
            let q = d.dot(axis);
            if q.abs() < 1e-12 {
                if p.abs() >= half - 1e-9 {
                    return None;
                }
            } else {
                let mut a = (-half - p) / q;
                let mut b = (half - p) / q;
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                t0 = t0.max(a);
                t1 = t1.min(b);
            }
        }
        (t1 - t0 > 1e-9).then_some((t0, t1))
    }

    /// Whether two rectangles share interior area (separating-axis test).
    pub fn overlaps(&self, o: &Rect, eps: f64) -> bool {
        let ca = self.corners();
        let cb = o.corners();
        for axis in [self.axis, self.axis.perp(), o.axis, o.axis.perp()] {
            let (amin, amax) = project_range(&ca, axis);
            let (bmin, bmax) = project_range(&cb, axis);
            if amax <= bmin + eps || bmax <= amin + eps {
                return false;
            }
        }
        true
    }
}

fn project_range(pts: &[Vec2; 4], axis: Vec2) -> (f64, f64) {
    pts.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let v = p.dot(axis);
            (lo.min(v), hi.max(v))
        })
}

/// Wrap an angle to `[0, 360)`.
pub fn wrap_360(deg: f64) -> f64 {
    let r = deg.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Wrap an angle to `(-180, 180]`.
pub fn wrap_180(deg: f64) -> f64 {
    let r = wrap_360(deg);
    if r > 180.0 {
        r - 360.0
    } else {
        r
    }
}
