//! Trajectory data model: vehicles, per-frame kinematic states, the site's
//! lane geometry and the validated [`Dataset`] that ties them together.

mod io;
mod lanes;
mod site;

pub use io::{ingest_dataset, read_site, read_tracks, write_site, write_tracks, TracksTable};
pub use lanes::{
    detect_lane_changes, lane_of, lane_window_frames, same_travel_lane, LaneChangeEpisode,
    DEFAULT_LANE_CHANGE_WINDOW_S,
};
pub use site::{Lane, LaneType, SiteGeometry};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::DataError;
use crate::geometry::{nearest_tangent, wrap_angle, Vec2};

pub type VehicleId = u64;
pub type LaneId = u32;
pub type Frame = u32;

/// Vehicles strictly longer than this are trucks.
pub const TRUCK_LENGTH_THRESHOLD_M: f64 = 6.0;

/// Below this speed the velocity direction is too noisy to define heading.
pub const HEADING_MIN_SPEED: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VehicleClass {
    Car,
    Truck,
}

impl VehicleClass {
    pub fn as_str(self) -> &'static str {
        match self {
            VehicleClass::Car => "car",
            VehicleClass::Truck => "truck",
        }
    }
}

/// Car/truck split by body length. The boundary value itself is a car.
pub fn classify_vehicle(length: f64) -> Result<VehicleClass, DataError> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(DataError::NonPositiveLength(length));
    }
    Ok(if length > TRUCK_LENGTH_THRESHOLD_M {
        VehicleClass::Truck
    } else {
        VehicleClass::Car
    })
}

/// One vehicle at one frame. `lane` is the lane id carried by the input file,
/// if any; geometry-derived lanes are computed on demand by [`lane_of`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicState {
    pub frame: Frame,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub heading: f64,
    pub lane: Option<LaneId>,
}

impl KinematicState {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::new(self.vx, self.vy)
    }

    pub fn speed(&self) -> f64 {
        self.vx.hypot(self.vy)
    }
}

/// Heading from the velocity direction, or from the lane centerline tangent
/// when the vehicle is nearly stopped.
pub fn derive_heading(position: Vec2, velocity: Vec2, lane: Option<LaneId>, site: &SiteGeometry) -> f64 {
    if velocity.norm() >= HEADING_MIN_SPEED {
        return wrap_angle(velocity.y.atan2(velocity.x));
    }
    let lane = lane
        .and_then(|id| site.lane(id))
        .or_else(|| site.nearest_lane(position));
    match lane.and_then(|l| nearest_tangent(&l.centerline, position)) {
        Some(t) => wrap_angle(t.y.atan2(t.x)),
        None => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VehicleTrack {
    pub id: VehicleId,
    pub vclass: VehicleClass,
    pub length: f64,
    pub width: f64,
    pub states: Vec<KinematicState>,
}

impl VehicleTrack {
    /// Builds a track, classifying it by length and checking its invariants.
    /// States are sorted by frame; duplicates are rejected.
    pub fn new(
        id: VehicleId,
        length: f64,
        width: f64,
        mut states: Vec<KinematicState>,
    ) -> Result<Self, DataError> {
        let vclass = classify_vehicle(length)?;
        let bad = |message: String| DataError::Track { id, message };
        if !(width > 0.0) || !width.is_finite() {
            return Err(bad(format!("width must be positive, got {width}")));
        }
        if length < width {
            return Err(bad(format!("length {length} is smaller than width {width}")));
        }
        states.sort_by_key(|s| s.frame);
        for w in states.windows(2) {
            if w[0].frame == w[1].frame {
                return Err(bad(format!("duplicate frame {}", w[0].frame)));
            }
        }
        for s in &states {
            let finite = [s.x, s.y, s.vx, s.vy, s.heading].iter().all(|v| v.is_finite());
            if !finite {
                return Err(bad(format!("non-finite state at frame {}", s.frame)));
            }
        }
        Ok(Self {
            id,
            vclass,
            length,
            width,
            states,
        })
    }

    pub fn first_frame(&self) -> Option<Frame> {
        self.states.first().map(|s| s.frame)
    }

    pub fn last_frame(&self) -> Option<Frame> {
        self.states.last().map(|s| s.frame)
    }

    pub fn state_at(&self, frame: Frame) -> Option<&KinematicState> {
        self.states
            .binary_search_by_key(&frame, |s| s.frame)
            .ok()
            .map(|i| &self.states[i])
    }
}

/// Fleet composition counted per vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleetMix {
    pub cars: usize,
    pub trucks: usize,
}

impl FleetMix {
    pub fn total(&self) -> usize {
        self.cars + self.trucks
    }

    /// Truck share in percent, `None` for an empty fleet.
    pub fn truck_percentage(&self) -> Option<f64> {
        (self.total() > 0).then(|| 100.0 * self.trucks as f64 / self.total() as f64)
    }
}

/// Immutable, validated collection of tracks on one site.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub site: SiteGeometry,
    tracks: BTreeMap<VehicleId, VehicleTrack>,
}

impl Dataset {
    pub fn new(site: SiteGeometry, tracks: Vec<VehicleTrack>) -> Result<Self, DataError> {
        let (min, max) = site.bounding_box();
        let mut map = BTreeMap::new();
        for track in tracks {
            let pad = track.length;
            for s in &track.states {
                if s.x < min.x - pad || s.x > max.x + pad || s.y < min.y - pad || s.y > max.y + pad {
                    return Err(DataError::Dataset(format!(
                        "vehicle {} at frame {} lies outside the site ({}, {})",
                        track.id, s.frame, s.x, s.y
                    )));
                }
            }
            let id = track.id;
            if map.insert(id, track).is_some() {
                return Err(DataError::Dataset(format!("duplicate vehicle id {id}")));
            }
        }
        Ok(Self { site, tracks: map })
    }

    pub fn empty(site: SiteGeometry) -> Self {
        Self {
            site,
            tracks: BTreeMap::new(),
        }
    }

    pub fn tracks(&self) -> impl Iterator<Item = &VehicleTrack> + '_ {
        self.tracks.values()
    }

    pub fn track(&self, id: VehicleId) -> Option<&VehicleTrack> {
        self.tracks.get(&id)
    }

    pub fn len(&self) -> usize {
        self.tracks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tracks.is_empty()
    }

    /// First and last frame over all tracks.
    pub fn frame_span(&self) -> Option<(Frame, Frame)> {
        let first = self.tracks().filter_map(|t| t.first_frame()).min()?;
        let last = self.tracks().filter_map(|t| t.last_frame()).max()?;
        Some((first, last))
    }

    pub fn fleet_mix(&self) -> FleetMix {
        let trucks = self
            .tracks()
            .filter(|t| t.vclass == VehicleClass::Truck)
            .count();
        FleetMix {
            cars: self.len() - trucks,
            trucks,
        }
    }

    /// Replaces tracks with transformed versions, revalidating the result.
    pub fn map_tracks<F>(&self, f: F) -> Result<Dataset, DataError>
    where
        F: Fn(&VehicleTrack) -> VehicleTrack,
    {
        Dataset::new(self.site.clone(), self.tracks().map(f).collect())
    }
}
