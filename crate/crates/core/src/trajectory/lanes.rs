use serde::{Deserialize, Serialize};

use super::{Frame, KinematicState, LaneId, LaneType, SiteGeometry, VehicleId, VehicleTrack};

/// Half-width of the marking window around a boundary crossing.
pub const DEFAULT_LANE_CHANGE_WINDOW_S: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaneChangeEpisode {
    pub vehicle_id: VehicleId,
    pub start_frame: Frame,
    pub end_frame: Frame,
    pub from_lane: LaneId,
    pub to_lane: LaneId,
}

impl LaneChangeEpisode {
    pub fn overlaps(&self, start: Frame, end: Frame) -> bool {
        self.start_frame <= end && start <= self.end_frame
    }
}

/// Lane of a state: the file's lane id when present, otherwise geometry.
pub fn lane_of(state: &KinematicState, site: &SiteGeometry) -> Option<LaneId> {
    state.lane.or_else(|| site.assign_lane(state.position()))
}

/// True when `a` and `b` are the same travel lane. An on-ramp flowing into
/// an acceleration lane is one continuous lane, not a lane change.
pub fn same_travel_lane(site: &SiteGeometry, a: LaneId, b: LaneId) -> bool {
    if a == b {
        return true;
    }
    let ty = |id| site.lane(id).map(|l| l.lane_type);
    matches!(
        (ty(a), ty(b)),
        (Some(LaneType::OnRamp), Some(LaneType::Acceleration))
            | (Some(LaneType::Acceleration), Some(LaneType::OnRamp))
    )
}

pub fn lane_window_frames(window_s: f64, frame_rate: f64) -> u32 {
    (window_s * frame_rate).round().max(0.0) as u32
}

/// One episode per lane transition, spanning the crossing frame plus or
/// minus `window` frames. Transitions whose windows overlap are merged.
/// Frames without a lane assignment are skipped.
pub fn detect_lane_changes(
    track: &VehicleTrack,
    site: &SiteGeometry,
    window: u32,
) -> Vec<LaneChangeEpisode> {
    let mut episodes: Vec<LaneChangeEpisode> = Vec::new();
    let mut current: Option<LaneId> = None;
    for state in &track.states {
        let Some(lane) = lane_of(state, site) else {
            continue;
        };
        let prev = current.replace(lane);
        let Some(prev) = prev else { continue };
        if same_travel_lane(site, prev, lane) {
            continue;
        }
        let start = state.frame.saturating_sub(window);
        let end = state.frame.saturating_add(window);
        match episodes.last_mut() {
            Some(last) if start <= last.end_frame => {
                last.end_frame = end;
                last.to_lane = lane;
            }
            _ => episodes.push(LaneChangeEpisode {
                vehicle_id: track.id,
                start_frame: start,
                end_frame: end,
                from_lane: prev,
                to_lane: lane,
            }),
        }
    }
    // a merged out-and-back wiggle ends where it started
    episodes.retain(|e| !same_travel_lane(site, e.from_lane, e.to_lane));
    episodes
}
