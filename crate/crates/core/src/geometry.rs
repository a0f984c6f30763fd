//! Small planar vector helpers shared by the lane and TTC code.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(p: [f64; 2]) -> Self {
        Vec2::new(p[0], p[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(p: Vec2) -> Self {
        [p.x, p.y]
    }
}

/// Distance from `p` to the closed segment `a`-`b`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab.scale(t))).norm()
}

/// Distance from `p` to the closed boundary of `polygon`.
pub fn boundary_distance(p: Vec2, polygon: &[Vec2]) -> f64 {
    let n = polygon.len();
    (0..n)
        .map(|i| point_segment_distance(p, polygon[i], polygon[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

/// Even-odd containment; points within `tol` of the boundary count as inside.
pub fn polygon_contains(polygon: &[Vec2], p: Vec2, tol: f64) -> bool {
    if polygon.len() < 3 {
        return false;
    }
    if boundary_distance(p, polygon) <= tol {
        return true;
    }
    let mut inside = false;
    let n = polygon.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (polygon[i], polygon[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// True when the open segments cross with each endpoint more than `tol`
/// away from the other segment's supporting line.
pub fn segments_cross_properly(a0: Vec2, a1: Vec2, b0: Vec2, b1: Vec2, tol: f64) -> bool {
    let side = |p: Vec2, q0: Vec2, q1: Vec2| {
        let d = q1 - q0;
        let len = d.norm();
        if len == 0.0 {
            0.0
        } else {
            d.cross(p - q0) / len
        }
    };
    let (s1, s2) = (side(b0, a0, a1), side(b1, a0, a1));
    let (s3, s4) = (side(a0, b0, b1), side(a1, b0, b1));
    let opposite = |u: f64, v: f64| (u > tol && v < -tol) || (u < -tol && v > tol);
    opposite(s1, s2) && opposite(s3, s4)
}

/// Position of a point's projection along a polyline, measured as arc length
/// from the first vertex. Points beyond either end are extrapolated along the
/// end segment, so the result is unbounded and monotone along straight lanes.
pub fn arc_length_position(polyline: &[Vec2], p: Vec2) -> f64 {
    match polyline.len() {
        0 => return 0.0,
        1 => return 0.0,
        _ => {}
    }
    let last = polyline.len() - 2;
    let mut best = (f64::INFINITY, 0.0);
    let mut offset = 0.0;
    for (i, w) in polyline.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let ab = b - a;
        let len = ab.norm();
        if len == 0.0 {
            continue;
        }
        let raw = (p - a).dot(ab) / (len * len);
        let lo = if i == 0 { f64::NEG_INFINITY } else { 0.0 };
        let hi = if i == last { f64::INFINITY } else { 1.0 };
        let t = raw.clamp(lo, hi);
        let foot = a + ab.scale(t);
        let d = (p - foot).norm();
        if d < best.0 {
            best = (d, offset + t * len);
        }
        offset += len;
    }
    best.1
}

/// Unit tangent of the polyline segment nearest to `p`.
pub fn nearest_tangent(polyline: &[Vec2], p: Vec2) -> Option<Vec2> {
    polyline
        .windows(2)
        .filter(|w| (w[1] - w[0]).norm() > 0.0)
        .map(|w| (point_segment_distance(p, w[0], w[1]), w[1] - w[0]))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, d)| d.scale(1.0 / d.norm()))
}

/// Normalizes an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    r
}
