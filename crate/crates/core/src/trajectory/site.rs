use serde::{Deserialize, Serialize};

use super::LaneId;
use crate::error::DataError;
use crate::geometry::{
    boundary_distance, point_segment_distance, polygon_contains, segments_cross_properly, Vec2,
};

/// Lane polygons may touch or overlap by at most this much.
pub const LANE_OVERLAP_TOLERANCE_M: f64 = 0.01;

/// Containment tolerance for lane assignment.
const CONTAINMENT_TOLERANCE_M: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneType {
    Mainline,
    OnRamp,
    Acceleration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub lane_id: LaneId,
    pub lane_type: LaneType,
    #[serde(with = "points")]
    pub centerline: Vec<Vec2>,
    #[serde(with = "points")]
    pub left_boundary: Vec<Vec2>,
    #[serde(with = "points")]
    pub right_boundary: Vec<Vec2>,
}

impl Lane {
    /// Closed outline: left boundary forward, right boundary backward.
    pub fn polygon(&self) -> Vec<Vec2> {
        let mut poly = self.left_boundary.clone();
        poly.extend(self.right_boundary.iter().rev().copied());
        poly
    }

    pub fn contains(&self, p: Vec2) -> bool {
        polygon_contains(&self.polygon(), p, CONTAINMENT_TOLERANCE_M)
    }
}

mod points {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::geometry::Vec2;

    pub fn serialize<S: Serializer>(pts: &[Vec2], s: S) -> Result<S::Ok, S::Error> {
        let raw: Vec<[f64; 2]> = pts.iter().map(|&p| p.into()).collect();
        raw.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec2>, D::Error> {
        let raw = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(raw.into_iter().map(Vec2::from).collect())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteFile {
    frame_rate: f64,
    segment_length: f64,
    lanes: Vec<Lane>,
}

/// Lane layout of the observed road segment. Lanes are kept sorted by id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiteFile", into = "SiteFile")]
pub struct SiteGeometry {
    frame_rate: f64,
    segment_length: f64,
    lanes: Vec<Lane>,
    polygons: Vec<Vec<Vec2>>,
}

impl TryFrom<SiteFile> for SiteGeometry {
    type Error = DataError;
    fn try_from(f: SiteFile) -> Result<Self, DataError> {
        SiteGeometry::new(f.lanes, f.segment_length, f.frame_rate)
    }
}

impl From<SiteGeometry> for SiteFile {
    fn from(s: SiteGeometry) -> Self {
        SiteFile {
            frame_rate: s.frame_rate,
            segment_length: s.segment_length,
            lanes: s.lanes,
        }
    }
}

impl SiteGeometry {
    pub fn new(mut lanes: Vec<Lane>, segment_length: f64, frame_rate: f64) -> Result<Self, DataError> {
        let err = |m: String| Err(DataError::Site(m));
        if !(frame_rate > 0.0) || !frame_rate.is_finite() {
            return err(format!("frame_rate must be positive, got {frame_rate}"));
        }
        if !(segment_length > 0.0) || !segment_length.is_finite() {
            return err(format!("segment_length must be positive, got {segment_length}"));
        }
        if lanes.is_empty() {
            return err("no lanes defined".into());
        }
        lanes.sort_by_key(|l| l.lane_id);
        for w in lanes.windows(2) {
            if w[0].lane_id == w[1].lane_id {
                return err(format!("duplicate lane_id {}", w[0].lane_id));
            }
        }
        for lane in &lanes {
            for (name, line) in [
                ("centerline", &lane.centerline),
                ("left_boundary", &lane.left_boundary),
                ("right_boundary", &lane.right_boundary),
            ] {
                if line.len() < 2 {
                    return err(format!("lane {}: {name} needs at least 2 points", lane.lane_id));
                }
                if line.iter().any(|p| !p.is_finite()) {
                    return err(format!("lane {}: {name} has non-finite points", lane.lane_id));
                }
            }
        }
        let polygons: Vec<Vec<Vec2>> = lanes.iter().map(Lane::polygon).collect();
        for (lane, poly) in lanes.iter().zip(&polygons) {
            if self_intersects(poly) {
                return err(format!("lane {} outline self-intersects", lane.lane_id));
            }
        }
        for i in 0..lanes.len() {
            for j in i + 1..lanes.len() {
                if polygons_overlap(&polygons[i], &polygons[j], LANE_OVERLAP_TOLERANCE_M) {
                    return err(format!(
                        "lanes {} and {} overlap",
                        lanes[i].lane_id, lanes[j].lane_id
                    ));
                }
            }
        }
        Ok(Self {
            frame_rate,
            segment_length,
            lanes,
            polygons,
        })
    }

    pub fn frame_rate(&self) -> f64 {
        self.frame_rate
    }

    pub fn segment_length(&self) -> f64 {
        self.segment_length
    }

    pub fn lanes(&self) -> &[Lane] {
        &self.lanes
    }

    pub fn lane(&self, id: LaneId) -> Option<&Lane> {
        self.lanes
            .binary_search_by_key(&id, |l| l.lane_id)
            .ok()
            .map(|i| &self.lanes[i])
    }

    /// Lane whose outline contains `p`; shared boundaries go to the lowest id.
    pub fn assign_lane(&self, p: Vec2) -> Option<LaneId> {
        self.lanes
            .iter()
            .zip(&self.polygons)
            .find(|(_, poly)| polygon_contains(poly, p, CONTAINMENT_TOLERANCE_M))
            .map(|(l, _)| l.lane_id)
    }

    /// Lane with the closest centerline.
    pub fn nearest_lane(&self, p: Vec2) -> Option<&Lane> {
        self.lanes
            .iter()
            .map(|l| {
                let d = l
                    .centerline
                    .windows(2)
                    .map(|w| point_segment_distance(p, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min);
                (d, l)
            })
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, l)| l)
    }

    /// Axis-aligned bounds over all lane boundary points.
    pub fn bounding_box(&self) -> (Vec2, Vec2) {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in self.polygons.iter().flatten() {
            min = Vec2::new(min.x.min(p.x), min.y.min(p.y));
            max = Vec2::new(max.x.max(p.x), max.y.max(p.y));
        }
        (min, max)
    }
}

fn self_intersects(poly: &[Vec2]) -> bool {
    let n = poly.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_cross_properly(poly[i], poly[(i + 1) % n], poly[j], poly[(j + 1) % n], 1e-9) {
                return true;
            }
        }
    }
    false
}

fn polygons_overlap(a: &[Vec2], b: &[Vec2], tol: f64) -> bool {
    let edges = |p: &[Vec2]| -> Vec<(Vec2, Vec2)> {
        (0..p.len()).map(|i| (p[i], p[(i + 1) % p.len()])).collect()
    };
    let (ea, eb) = (edges(a), edges(b));
    for &(a0, a1) in &ea {
        for &(b0, b1) in &eb {
            if segments_cross_properly(a0, a1, b0, b1, tol) {
                return true;
            }
        }
    }
    let deep_inside = |p: Vec2, poly: &[Vec2]| polygon_contains(poly, p, 0.0) && boundary_distance(p, poly) > tol;
    let centroid = |p: &[Vec2]| {
        let s = p.iter().fold(Vec2::default(), |acc, &q| acc + q);
        s.scale(1.0 / p.len() as f64)
    };
    // vertices plus points along each edge catch overlaps whose corners all
    // sit on the other outline
    let probes = |p: &[Vec2]| -> Vec<Vec2> {
        let mut out = vec![centroid(p)];
        for (s, e) in edges(p) {
            out.extend([0.0, 0.25, 0.5, 0.75].map(|t| s + (e - s).scale(t)));
        }
        out
    };
    probes(a).into_iter().any(|p| deep_inside(p, b)) || probes(b).into_iter().any(|p| deep_inside(p, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn straight_lane(id: LaneId, y0: f64, y1: f64) -> Lane {
        let (x0, x1) = (0.0, 100.0);
        let yc = 0.5 * (y0 + y1);
        Lane {
            lane_id: id,
            lane_type: LaneType::Mainline,
            centerline: vec![Vec2::new(x0, yc), Vec2::new(x1, yc)],
            left_boundary: vec![Vec2::new(x0, y1), Vec2::new(x1, y1)],
            right_boundary: vec![Vec2::new(x0, y0), Vec2::new(x1, y0)],
        }
    }

    fn two_lanes() -> SiteGeometry {
        SiteGeometry::new(
            vec![straight_lane(3, 3.5, 7.0), straight_lane(2, 0.0, 3.5)],
            100.0,
            25.0,
        )
        .unwrap()
    }

    #[test]
    fn assign_on_centerline_boundary_and_outside() {
        let site = two_lanes();
        assert_eq!(site.assign_lane(Vec2::new(50.0, 1.75)), Some(2));
        assert_eq!(site.assign_lane(Vec2::new(50.0, 5.25)), Some(3));
        assert_eq!(site.assign_lane(Vec2::new(50.0, 3.5)), Some(2));
        assert_eq!(site.assign_lane(Vec2::new(50.0, 17.0)), None);
        assert_eq!(site.assign_lane(Vec2::new(50.0, -10.0)), None);
    }

    #[test]
    fn rejects_overlap_and_missing_lanes() {
        let r = SiteGeometry::new(vec![straight_lane(1, 0.0, 3.5), straight_lane(2, 3.0, 6.5)], 100.0, 25.0);
        assert!(matches!(r, Err(DataError::Site(_))));
        let r = SiteGeometry::new(vec![straight_lane(1, 0.0, 3.5), straight_lane(2, 0.0, 3.5)], 100.0, 25.0);
        assert!(r.is_err());
        assert!(SiteGeometry::new(vec![], 100.0, 25.0).is_err());
        assert!(SiteGeometry::new(vec![straight_lane(1, 0.0, 3.5)], 100.0, 0.0).is_err());
        // within the 1 cm tolerance
        let ok = SiteGeometry::new(vec![straight_lane(1, 0.0, 3.505), straight_lane(2, 3.5, 7.0)], 100.0, 25.0);
        assert!(ok.is_ok());
    }

    #[test]
    fn rejects_bow_tie() {
        let mut lane = straight_lane(1, 0.0, 3.5);
        lane.right_boundary.reverse();
        assert!(SiteGeometry::new(vec![lane], 100.0, 25.0).is_err());
    }

    #[test]
    fn json_round_trip() {
        let site = two_lanes();
        let text = serde_json::to_string(&site).unwrap();
        assert!(text.contains("\"lane_type\":\"mainline\""));
        let back: SiteGeometry = serde_json::from_str(&text).unwrap();
        assert_eq!(back, site);
    }
}
