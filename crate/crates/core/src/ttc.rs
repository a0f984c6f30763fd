//! Time-to-collision between two oriented vehicle rectangles.
//!
//! Each vehicle is a rectangle moving at constant velocity. With vehicle B
//! held stationary, a ray is cast from every corner of A along the relative
//! velocity and intersected with the four sides of B; the shortest valid hit
//! is the distance A can travel before touching B. The same is done with the
//! roles swapped, and the smaller of the two distances divided by the
//! relative speed is the TTC. First contact between two translating convex
//! shapes always involves at least one corner, so the sixteen rays per pass
//! cover every contact configuration.

use serde::{Deserialize, Serialize};

use crate::error::TtcError;
use crate::geometry::Vec2;
use crate::trajectory::{Frame, VehicleId};

/// Below this relative speed (m/s) no TTC is reported.
pub const MIN_RELATIVE_SPEED: f64 = 1e-6;

/// On-segment tolerance for ray hits, in meters.
pub const SEGMENT_TOLERANCE_M: f64 = 1e-9;

/// Rays closer than this to parallel (sine of the angle) are treated as parallel.
const PARALLEL_SINE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Vec2,
    /// Radians, direction of the length axis.
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

/// Corner order: front-left, front-right, rear-right, rear-left.
pub const CORNER_NAMES: [&str; 4] = ["front_left", "front_right", "rear_right", "rear_left"];

impl OrientedBox {
    pub fn new(center: Vec2, heading: f64, length: f64, width: f64) -> Self {
        Self {
            center,
            heading,
            length,
            width,
        }
    }

    /// Unit vectors along the length (forward) and width (left) axes.
    pub fn axes(&self) -> (Vec2, Vec2) {
        let (s, c) = self.heading.sin_cos();
        let forward = Vec2::new(c, s);
        (forward, forward.perp())
    }

    pub fn corners(&self) -> [Vec2; 4] {
        let (f, l) = self.axes();
        let hf = f.scale(0.5 * self.length);
        let hl = l.scale(0.5 * self.width);
        let c = self.center;
        [c + hf + hl, c + hf - hl, c - hf - hl, c - hf + hl]
    }

    /// Sides as consecutive corner pairs.
    pub fn sides(&self) -> [(Vec2, Vec2); 4] {
        let k = self.corners();
        [(k[0], k[1]), (k[1], k[2]), (k[2], k[3]), (k[3], k[0])]
    }

    pub fn translated(&self, by: Vec2) -> Self {
        Self {
            center: self.center + by,
            ..*self
        }
    }

    /// Half the diagonal.
    pub fn circumradius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }
}

pub fn corners(b: &OrientedBox) -> [Vec2; 4] {
    b.corners()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairState {
    pub box_a: OrientedBox,
    pub vel_a: Vec2,
    pub box_b: OrientedBox,
    pub vel_b: Vec2,
}

impl PairState {
    pub fn swapped(&self) -> Self {
        Self {
            box_a: self.box_b,
            vel_a: self.vel_b,
            box_b: self.box_a,
            vel_b: self.vel_a,
        }
    }

    pub fn relative_velocity(&self) -> Vec2 {
        self.vel_a - self.vel_b
    }
}

/// Intersection of the forward ray `origin + t * direction` (t >= 0) with the
/// closed segment `seg_start`-`seg_end`. Parallel lines never intersect.
pub fn ray_segment_intersection(
    origin: Vec2,
    direction: Vec2,
    seg_start: Vec2,
    seg_end: Vec2,
) -> Option<(Vec2, f64)> {
    let edge = seg_end - seg_start;
    let denom = direction.cross(edge);
    let (dn, en) = (direction.norm(), edge.norm());
    if dn == 0.0 || en == 0.0 || denom.abs() <= PARALLEL_SINE * dn * en {
        return None;
    }
    let w = seg_start - origin;
    let t = w.cross(edge) / denom;
    let u = w.cross(direction) / denom;
    let slack = SEGMENT_TOLERANCE_M / en;
    if t < 0.0 || u < -slack || u > 1.0 + slack {
        return None;
    }
    Some((origin + direction.scale(t), t))
}

/// Shortest corner-ray distance from `moving` to `stationary` along
/// `rel_vel`, with the index of the corner of `moving` that realizes it.
fn corner_ray_distance(
    moving: &OrientedBox,
    stationary: &OrientedBox,
    rel_vel: Vec2,
) -> Option<(f64, usize)> {
    let speed = rel_vel.norm();
    let sides = stationary.sides();
    let mut best: Option<(f64, usize)> = None;
    for (i, corner) in moving.corners().into_iter().enumerate() {
        for &(s0, s1) in &sides {
            if let Some((_, t)) = ray_segment_intersection(corner, rel_vel, s0, s1) {
                let d = t * speed;
                if best.map_or(true, |(b, _)| d < b) {
                    best = Some((d, i));
                }
            }
        }
    }
    best
}

/// Distance `moving` travels along `rel_vel` before one of its corners
/// touches a side of `stationary`, if any corner ray hits.
pub fn directional_collision_distance(
    moving: &OrientedBox,
    stationary: &OrientedBox,
    rel_vel: Vec2,
) -> Option<f64> {
    if rel_vel.norm() <= MIN_RELATIVE_SPEED {
        return None;
    }
    corner_ray_distance(moving, stationary, rel_vel).map(|(d, _)| d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WitnessSide {
    /// A corner of vehicle A hits a side of B.
    A,
    /// A corner of vehicle B hits a side of A.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessCorner {
    pub side: WitnessSide,
    /// Index into [`CORNER_NAMES`].
    pub corner: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtcResult {
    pub ttc: f64,
    pub collision_distance: f64,
    /// `None` when the boxes already overlap.
    pub witness: Option<WitnessCorner>,
}

/// Interval overlap on every separating axis of two rectangles. Touching
/// within `tol` counts as overlap.
pub fn boxes_overlap(a: &OrientedBox, b: &OrientedBox, tol: f64) -> bool {
    let (ca, cb) = (a.corners(), b.corners());
    let (fa, la) = a.axes();
    let (fb, lb) = b.axes();
    [fa, la, fb, lb].iter().all(|&axis| {
        let (amin, amax) = project(&ca, axis);
        let (bmin, bmax) = project(&cb, axis);
        amin <= bmax + tol && bmin <= amax + tol
    })
}

pub(crate) fn project(points: &[Vec2], axis: Vec2) -> (f64, f64) {
    points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let v = p.dot(axis);
        (lo.min(v), hi.max(v))
    })
}

/// Two-dimensional TTC. The distance each corner can travel is measured in
/// the other vehicle's rest frame, so the divisor is the relative speed.
pub fn ttc(pair: &PairState) -> Option<TtcResult> {
    if boxes_overlap(&pair.box_a, &pair.box_b, SEGMENT_TOLERANCE_M) {
        return Some(TtcResult {
            ttc: 0.0,
            collision_distance: 0.0,
            witness: None,
        });
    }
    let rel = pair.relative_velocity();
    let speed = rel.norm();
    if speed <= MIN_RELATIVE_SPEED {
        return None;
    }
    let ab = corner_ray_distance(&pair.box_a, &pair.box_b, rel);
    let ba = corner_ray_distance(&pair.box_b, &pair.box_a, -rel);
    let (distance, witness) = match (ab, ba) {
        (None, None) => return None,
        (Some((d, i)), None) => (d, WitnessCorner { side: WitnessSide::A, corner: i }),
        (None, Some((d, i))) => (d, WitnessCorner { side: WitnessSide::B, corner: i }),
        (Some((da, ia)), Some((db, ib))) => {
            if da <= db {
                (da, WitnessCorner { side: WitnessSide::A, corner: ia })
            } else {
                (db, WitnessCorner { side: WitnessSide::B, corner: ib })
            }
        }
    };
    Some(TtcResult {
        ttc: distance / speed,
        collision_distance: distance,
        witness: Some(witness),
    })
}

/// Closing-gap TTC along a single lane. Positions are vehicle fronts; the
/// gap runs from the lag's front bumper to the lead's rear bumper.
pub fn ttc_1d(
    lead_pos: f64,
    lead_len: f64,
    lead_speed: f64,
    lag_pos: f64,
    lag_speed: f64,
) -> Result<Option<f64>, TtcError> {
    if lag_pos >= lead_pos {
        return Err(TtcError::LagAhead { lag_pos, lead_pos });
    }
    let gap = lead_pos - lag_pos - lead_len;
    if gap < 0.0 {
        return Err(TtcError::NegativeGap { lag_pos, gap });
    }
    Ok((lag_speed > lead_speed).then(|| gap / (lag_speed - lead_speed)))
}

/// TTC of one vehicle pair at one frame. `pair.0 < pair.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TtcSample {
    pub frame: Frame,
    pub pair: (VehicleId, VehicleId),
    pub ttc: Option<f64>,
    pub collision_distance: Option<f64>,
    pub witness_corner: Option<WitnessCorner>,
    /// Midpoint of the two vehicle centers.
    pub midpoint: Vec2,
}
