//! Brute-force TTC by time stepping, used to check the corner-ray method.
//!
//! Vehicle B is held fixed and A is advanced along the relative velocity in
//! steps of `dt`. Each step is tested with a separating-axis check of B
//! against the region A sweeps during the step, so contacts shorter than a
//! step (grazing passes) are still seen. The result is `k * dt` for the
//! first step `k` whose swept region touches B.

use rand::Rng;
use serde::Serialize;

use crate::geometry::Vec2;
use crate::ttc::{boxes_overlap, project, ttc, OrientedBox, PairState, SEGMENT_TOLERANCE_M};

/// True when A, moving by `displacement`, touches B at some point of the move.
pub fn swept_overlap(a: &OrientedBox, displacement: Vec2, b: &OrientedBox, tol: f64) -> bool {
    let (fa, la) = a.axes();
    let (fb, lb) = b.axes();
    let (ca, cb) = (a.corners(), b.corners());
    let len = displacement.norm();
    let mut axes = vec![fa, la, fb, lb];
    if len > 0.0 {
        axes.push(displacement.perp().scale(1.0 / len));
    }
    axes.iter().all(|&axis| {
        let (amin, amax) = project(&ca, axis);
        let p = displacement.dot(axis);
        let (amin, amax) = (amin + p.min(0.0), amax + p.max(0.0));
        let (bmin, bmax) = project(&cb, axis);
        amin <= bmax + tol && bmin <= amax + tol
    })
}

/// First `k * dt` (k >= 0) at which the rectangles touch under constant
/// velocities, or `None` if they do not within `horizon` seconds.
pub fn ttc_oracle(pair: &PairState, dt: f64, horizon: f64) -> Option<f64> {
    assert!(dt > 0.0 && horizon > 0.0, "dt and horizon must be positive");
    let (a, b) = (pair.box_a, pair.box_b);
    if boxes_overlap(&a, &b, SEGMENT_TOLERANCE_M) {
        return Some(0.0);
    }
    let rel = pair.relative_velocity();
    let step = rel.scale(dt);
    let step_len = step.norm();
    if step_len == 0.0 {
        return None;
    }
    let radii = a.circumradius() + b.circumradius();
    let steps = (horizon / dt + 1e-9).floor() as u64;
    let mut k: u64 = 1;
    while k <= steps {
        let start = a.translated(rel.scale((k - 1) as f64 * dt));
        // bounding circles cannot meet for `skip` whole steps
        let clearance = (start.center - b.center).norm() - radii;
        let skip = (clearance / step_len).floor() - 1.0;
        if skip >= 1.0 {
            k += skip as u64;
            continue;
        }
        if swept_overlap(&start, step, &b, SEGMENT_TOLERANCE_M) {
            return Some(k as f64 * dt);
        }
        k += 1;
    }
    None
}

/// Outcome of checking one pair against the stepping oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleComparison {
    pub analytic: Option<f64>,
    pub oracle: Option<f64>,
    /// Absolute difference when both report a collision, zero when neither
    /// does, infinite when only one does.
    pub discrepancy: f64,
    pub agree: bool,
}

/// Compares `ttc` with `ttc_oracle` over `horizon` seconds. Both must agree
/// within `2 * dt` when either reports a collision inside the horizon. The
/// oracle runs `2 * dt` past the horizon so collisions right at the edge are
/// not counted as one-sided.
pub fn compare_with_oracle(pair: &PairState, dt: f64, horizon: f64) -> OracleComparison {
    let tol = 2.0 * dt + 1e-12;
    let analytic = ttc(pair).map(|r| r.ttc);
    let oracle = ttc_oracle(pair, dt, horizon + 2.0 * dt);
    let (discrepancy, agree) = match (analytic, oracle) {
        (Some(a), Some(o)) => ((a - o).abs(), (a - o).abs() <= tol),
        (None, None) => (0.0, true),
        (Some(a), None) => (f64::INFINITY, a > horizon),
        (None, Some(_)) => (f64::INFINITY, false),
    };
    OracleComparison {
        analytic,
        oracle,
        discrepancy,
        agree,
    }
}

/// Random pair for oracle sweeps: speeds up to 40 m/s, any heading, sides
/// between 2 and 18 m, centers up to 80 m apart. Half of the pairs have A
/// aimed roughly at B so that collisions and grazing passes are common.
pub fn random_pair<R: Rng + ?Sized>(rng: &mut R) -> PairState {
    use std::f64::consts::PI;
    let vehicle_box = |center: Vec2, rng: &mut R| {
        let length = rng.gen_range(2.0..=18.0);
        let width = rng.gen_range(2.0..=length);
        OrientedBox::new(center, rng.gen_range(-PI..PI), length, width)
    };
    let polar = |r: f64, a: f64| Vec2::new(r * a.cos(), r * a.sin());
    let box_a = vehicle_box(Vec2::default(), rng);
    let box_b = vehicle_box(polar(rng.gen_range(0.0..80.0), rng.gen_range(-PI..PI)), rng);
    let vel_b = polar(rng.gen_range(0.0..=40.0), rng.gen_range(-PI..PI));
    let vel_a = if rng.gen_bool(0.5) {
        let to_b = box_b.center - box_a.center;
        let aim = to_b.y.atan2(to_b.x) + rng.gen_range(-0.3..0.3);
        let rel = polar(rng.gen_range(1.0..=40.0), aim);
        let v = vel_b + rel;
        // keep the absolute speed within 40 m/s
        if v.norm() > 40.0 {
            v.scale(40.0 / v.norm())
        } else {
            v
        }
    } else {
        polar(rng.gen_range(0.0..=40.0), rng.gen_range(-PI..PI))
    };
    PairState {
        box_a,
        vel_a,
        box_b,
        vel_b,
    }
}
