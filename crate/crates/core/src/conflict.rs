//! Pairwise TTC scanning, conflict event extraction and classification.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, DataError};
use crate::geometry::{arc_length_position, Vec2};
use crate::trajectory::{
    detect_lane_changes, lane_of, lane_window_frames, same_travel_lane, Dataset, Frame,
    KinematicState, LaneChangeEpisode, VehicleClass, VehicleId, VehicleTrack,
    DEFAULT_LANE_CHANGE_WINDOW_S,
};
use crate::ttc::{ttc, OrientedBox, PairState, TtcSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConflictConfig {
    /// Seconds; samples at or below this are conflicts.
    pub ttc_threshold: f64,
    /// Meters; pairs farther apart are not evaluated at that frame.
    pub pruning_radius: f64,
    /// Seconds; below-threshold runs this close together are one event.
    pub merge_gap: f64,
    /// Frames; shorter events are dropped.
    pub min_duration: u32,
    /// Seconds either side of a lane boundary crossing marked as changing lanes.
    pub lane_change_window: f64,
}

impl Default for ConflictConfig {
    fn default() -> Self {
        Self {
            ttc_threshold: 3.0,
            pruning_radius: 75.0,
            merge_gap: 0.5,
            min_duration: 1,
            lane_change_window: DEFAULT_LANE_CHANGE_WINDOW_S,
        }
    }
}

impl ConflictConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [
            ("ttc_threshold", self.ttc_threshold),
            ("pruning_radius", self.pruning_radius),
            ("merge_gap", self.merge_gap),
            ("min_duration", self.min_duration as f64),
            ("lane_change_window", self.lane_change_window),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(ConfigError::NotPositive { field, value });
            }
        }
        if self.ttc_threshold > 10.0 {
            return Err(ConfigError::ThresholdTooLarge(self.ttc_threshold));
        }
        Ok(())
    }
}

/// Vehicle types of a conflict as (lead, lag).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TypePair {
    #[serde(rename = "car-car")]
    CarCar,
    #[serde(rename = "car-truck")]
    CarTruck,
    #[serde(rename = "truck-car")]
    TruckCar,
    #[serde(rename = "truck-truck")]
    TruckTruck,
}

impl TypePair {
    pub const ALL: [TypePair; 4] = [
        TypePair::CarCar,
        TypePair::CarTruck,
        TypePair::TruckCar,
        TypePair::TruckTruck,
    ];

    pub fn new(lead: VehicleClass, lag: VehicleClass) -> Self {
        use VehicleClass::*;
        match (lead, lag) {
            (Car, Car) => TypePair::CarCar,
            (Car, Truck) => TypePair::CarTruck,
            (Truck, Car) => TypePair::TruckCar,
            (Truck, Truck) => TypePair::TruckTruck,
        }
    }

    pub fn lead(self) -> VehicleClass {
        match self {
            TypePair::CarCar | TypePair::CarTruck => VehicleClass::Car,
            _ => VehicleClass::Truck,
        }
    }

    pub fn lag(self) -> VehicleClass {
        match self {
            TypePair::CarCar | TypePair::TruckCar => VehicleClass::Car,
            _ => VehicleClass::Truck,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TypePair::CarCar => "car-car",
            TypePair::CarTruck => "car-truck",
            TypePair::TruckCar => "truck-car",
            TypePair::TruckTruck => "truck-truck",
        }
    }
}

impl fmt::Display for TypePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TypePair {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let norm = s.to_ascii_lowercase().replace(['_', ' '], "-");
        TypePair::ALL
            .into_iter()
            .find(|t| t.as_str() == norm || t.as_str().replace('-', "") == norm)
            .ok_or_else(|| format!("unknown type pair `{s}` (expected car-car, car-truck, truck-car or truck-truck)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConflictClass {
    LaneChange,
    RearEnd,
}

impl ConflictClass {
    pub fn as_str(self) -> &'static str {
        match self {
            ConflictClass::LaneChange => "lane_change",
            ConflictClass::RearEnd => "rear_end",
        }
    }
}

impl FromStr for ConflictClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "lane_change" => Ok(ConflictClass::LaneChange),
            "rear_end" => Ok(ConflictClass::RearEnd),
            _ => Err(format!("unknown conflict class `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventClassification {
    pub lead_id: VehicleId,
    pub lag_id: VehicleId,
    pub type_pair: TypePair,
    pub conflict_class: ConflictClass,
}

/// A contiguous below-threshold episode for one vehicle pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConflictEvent {
    pub pair: (VehicleId, VehicleId),
    pub start_frame: Frame,
    pub end_frame: Frame,
    pub min_ttc: f64,
    pub min_ttc_frame: Frame,
    /// Midpoint of the two vehicle centers at `min_ttc_frame`.
    pub location: Vec2,
    pub classification: Option<EventClassification>,
}

impl ConflictEvent {
    pub fn type_pair(&self) -> Option<TypePair> {
        self.classification.map(|c| c.type_pair)
    }

    pub fn conflict_class(&self) -> Option<ConflictClass> {
        self.classification.map(|c| c.conflict_class)
    }

    pub fn is_lane_change(&self) -> bool {
        self.conflict_class() == Some(ConflictClass::LaneChange)
    }
}

fn ordered(a: VehicleId, b: VehicleId) -> (VehicleId, VehicleId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Oriented box of a vehicle at one state.
pub fn vehicle_box(track: &VehicleTrack, state: &KinematicState) -> OrientedBox {
    OrientedBox::new(state.position(), state.heading, track.length, track.width)
}

/// Pairs present at `frame` whose centers are within the pruning radius.
pub fn candidate_pairs(
    dataset: &Dataset,
    frame: Frame,
    config: &ConflictConfig,
) -> Vec<(VehicleId, VehicleId)> {
    let present: Vec<(VehicleId, Vec2)> = dataset
        .tracks()
        .filter_map(|t| t.state_at(frame).map(|s| (t.id, s.position())))
        .collect();
    let mut pairs = Vec::new();
    for (i, &(ia, pa)) in present.iter().enumerate() {
        for &(ib, pb) in &present[i + 1..] {
            if (pa - pb).norm() <= config.pruning_radius {
                pairs.push(ordered(ia, ib));
            }
        }
    }
    pairs
}

/// Per-frame TTC for one pair over every co-present frame inside the
/// pruning radius.
pub fn ttc_series(
    dataset: &Dataset,
    pair: (VehicleId, VehicleId),
    config: &ConflictConfig,
) -> Vec<TtcSample> {
    let pair = ordered(pair.0, pair.1);
    let (Some(ta), Some(tb)) = (dataset.track(pair.0), dataset.track(pair.1)) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < ta.states.len() && j < tb.states.len() {
        let (sa, sb) = (&ta.states[i], &tb.states[j]);
        match sa.frame.cmp(&sb.frame) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let (pa, pb) = (sa.position(), sb.position());
                if (pa - pb).norm() <= config.pruning_radius {
                    let state = PairState {
                        box_a: vehicle_box(ta, sa),
                        vel_a: sa.velocity(),
                        box_b: vehicle_box(tb, sb),
                        vel_b: sb.velocity(),
                    };
                    let r = ttc(&state);
                    out.push(TtcSample {
                        frame: sa.frame,
                        pair,
                        ttc: r.map(|r| r.ttc),
                        collision_distance: r.map(|r| r.collision_distance),
                        witness_corner: r.and_then(|r| r.witness),
                        midpoint: (pa + pb).scale(0.5),
                    });
                }
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Groups below-threshold samples of one frame-ordered series into events.
/// A run breaks on any sample above threshold, without a TTC, or on a frame
/// gap; runs whose separation is at most `merge_gap` seconds are joined.
pub fn extract_events(
    series: &[TtcSample],
    config: &ConflictConfig,
    frame_rate: f64,
) -> Vec<ConflictEvent> {
    let below = |s: &TtcSample| s.ttc.is_some_and(|t| t <= config.ttc_threshold);
    // index ranges of maximal runs
    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (k, s) in series.iter().enumerate() {
        if !below(s) {
            continue;
        }
        match runs.last_mut() {
            Some(last) if last.1 + 1 == k && series[last.1].frame + 1 == s.frame => last.1 = k,
            _ => runs.push((k, k)),
        }
    }
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for run in runs {
        match merged.last_mut() {
            Some(last)
                if (series[run.0].frame - series[last.1].frame) as f64 / frame_rate
                    <= config.merge_gap + 1e-9 =>
            {
                last.1 = run.1
            }
            _ => merged.push(run),
        }
    }
    merged
        .into_iter()
        .filter(|&(a, b)| series[b].frame - series[a].frame + 1 >= config.min_duration)
        .map(|(a, b)| {
            let mut best = &series[a];
            for s in &series[a..=b] {
                if below(s) && s.ttc < best.ttc {
                    best = s;
                }
            }
            ConflictEvent {
                pair: best.pair,
                start_frame: series[a].frame,
                end_frame: series[b].frame,
                min_ttc: best.ttc.unwrap_or(f64::NAN),
                min_ttc_frame: best.frame,
                location: best.midpoint,
                classification: None,
            }
        })
        .collect()
}

fn classify_with(
    event: &ConflictEvent,
    dataset: &Dataset,
    episodes: &dyn Fn(&VehicleTrack) -> Vec<LaneChangeEpisode>,
) -> ConflictEvent {
    let site = &dataset.site;
    let (Some(ta), Some(tb)) = (dataset.track(event.pair.0), dataset.track(event.pair.1)) else {
        return *event;
    };
    let changing = [ta, tb].iter().any(|t| {
        episodes(t)
            .iter()
            .any(|e| e.overlaps(event.start_frame, event.end_frame))
    });
    let lane_at = |t: &VehicleTrack, f: Frame| t.state_at(f).and_then(|s| lane_of(s, site));
    let different_lanes = match (lane_at(ta, event.min_ttc_frame), lane_at(tb, event.min_ttc_frame)) {
        (Some(la), Some(lb)) => !same_travel_lane(site, la, lb),
        _ => false,
    };
    let conflict_class = if changing || different_lanes {
        ConflictClass::LaneChange
    } else {
        ConflictClass::RearEnd
    };

    // both vehicles are measured along one reference centerline, chosen
    // from the lower id so the result does not depend on argument order
    let (sa, sb) = (ta.state_at(event.start_frame), tb.state_at(event.start_frame));
    let (lead_id, lag_id) = match (sa, sb) {
        (Some(sa), Some(sb)) => {
            let reference = lane_of(sa, site)
                .or_else(|| lane_of(sb, site))
                .and_then(|id| site.lane(id))
                .or_else(|| site.nearest_lane(sa.position()));
            let (pa, pb) = match reference {
                Some(lane) => (
                    arc_length_position(&lane.centerline, sa.position()),
                    arc_length_position(&lane.centerline, sb.position()),
                ),
                None => (sa.x, sb.x),
            };
            if pb > pa {
                (tb.id, ta.id)
            } else {
                (ta.id, tb.id)
            }
        }
        _ => (ta.id, tb.id),
    };
    let class_of = |id: VehicleId| if id == ta.id { ta.vclass } else { tb.vclass };
    ConflictEvent {
        classification: Some(EventClassification {
            lead_id,
            lag_id,
            type_pair: TypePair::new(class_of(lead_id), class_of(lag_id)),
            conflict_class,
        }),
        ..*event
    }
}

/// Sets lead/lag, type pair and lane-change/rear-end class on an event.
pub fn classify_event(event: &ConflictEvent, dataset: &Dataset, config: &ConflictConfig) -> ConflictEvent {
    let window = lane_window_frames(config.lane_change_window, dataset.site.frame_rate());
    classify_with(event, dataset, &|t| detect_lane_changes(t, &dataset.site, window))
}

/// Every pair of tracks whose frame spans overlap.
fn overlapping_pairs(dataset: &Dataset) -> Vec<(VehicleId, VehicleId)> {
    let mut spans: Vec<(Frame, Frame, VehicleId)> = dataset
        .tracks()
        .filter_map(|t| Some((t.first_frame()?, t.last_frame()?, t.id)))
        .collect();
    spans.sort_unstable();
    let mut pairs = Vec::new();
    for (i, &(_, last_i, id_i)) in spans.iter().enumerate() {
        for &(first_j, _, id_j) in &spans[i + 1..] {
            if first_j > last_i {
                break;
            }
            pairs.push(ordered(id_i, id_j));
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Full scan: TTC series for every interacting pair, event extraction and
/// classification. Pairs are evaluated in parallel; the result is sorted by
/// (start_frame, id_a, id_b) and independent of the work partition.
pub fn detect_conflicts(dataset: &Dataset, config: &ConflictConfig) -> Vec<ConflictEvent> {
    let frame_rate = dataset.site.frame_rate();
    let window = lane_window_frames(config.lane_change_window, frame_rate);
    let episodes: BTreeMap<VehicleId, Vec<LaneChangeEpisode>> = dataset
        .tracks()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| (t.id, detect_lane_changes(t, &dataset.site, window)))
        .collect();
    let lookup = |t: &VehicleTrack| episodes.get(&t.id).cloned().unwrap_or_default();
    let mut events: Vec<ConflictEvent> = overlapping_pairs(dataset)
        .par_iter()
        .flat_map_iter(|&pair| {
            let series = ttc_series(dataset, pair, config);
            extract_events(&series, config, frame_rate)
                .into_iter()
                .map(|e| classify_with(&e, dataset, &lookup))
                .collect::<Vec<_>>()
        })
        .collect();
    events.sort_by_key(|e| (e.start_frame, e.pair.0, e.pair.1, e.end_frame));
    events
}

const CSV_HEADER: [&str; 12] = [
    "pair_a",
    "pair_b",
    "start_frame",
    "end_frame",
    "min_ttc",
    "min_ttc_frame",
    "x",
    "y",
    "lead_id",
    "lag_id",
    "type_pair",
    "conflict_class",
];

pub fn write_conflicts_csv<W: Write>(events: &[ConflictEvent], w: W) -> Result<(), DataError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for e in events {
        let c = e.classification;
        wtr.write_record([
            e.pair.0.to_string(),
            e.pair.1.to_string(),
            e.start_frame.to_string(),
            e.end_frame.to_string(),
            e.min_ttc.to_string(),
            e.min_ttc_frame.to_string(),
            e.location.x.to_string(),
            e.location.y.to_string(),
            c.map(|c| c.lead_id.to_string()).unwrap_or_default(),
            c.map(|c| c.lag_id.to_string()).unwrap_or_default(),
            c.map(|c| c.type_pair.to_string()).unwrap_or_default(),
            c.map(|c| c.conflict_class.as_str().to_string()).unwrap_or_default(),
        ])?;
    }
    wtr.flush().map_err(|e| DataError::Csv(e.into()))?;
    Ok(())
}

pub fn read_conflicts_csv<R: Read>(r: R) -> Result<Vec<ConflictEvent>, DataError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let get = |k: usize| -> Result<&str, DataError> {
            record.get(k).ok_or_else(|| DataError::Malformed {
                line,
                column: CSV_HEADER[k].into(),
                message: "missing value".into(),
            })
        };
        fn parse<T: FromStr>(raw: &str, line: u64, column: &str) -> Result<T, DataError> {
            raw.parse().map_err(|_| DataError::Malformed {
                line,
                column: column.into(),
                message: format!("cannot parse `{raw}`"),
            })
        }
        let p = |k: usize| -> Result<&str, DataError> { get(k) };
        let classification = if p(10)?.is_empty() {
            None
        } else {
            Some(EventClassification {
                lead_id: parse(p(8)?, line, CSV_HEADER[8])?,
                lag_id: parse(p(9)?, line, CSV_HEADER[9])?,
                type_pair: p(10)?.parse().map_err(|m| DataError::Malformed {
                    line,
                    column: CSV_HEADER[10].into(),
                    message: m,
                })?,
                conflict_class: p(11)?.parse().map_err(|m| DataError::Malformed {
                    line,
                    column: CSV_HEADER[11].into(),
                    message: m,
                })?,
            })
        };
        out.push(ConflictEvent {
            pair: (parse(p(0)?, line, CSV_HEADER[0])?, parse(p(1)?, line, CSV_HEADER[1])?),
            start_frame: parse(p(2)?, line, CSV_HEADER[2])?,
            end_frame: parse(p(3)?, line, CSV_HEADER[3])?,
            min_ttc: parse(p(4)?, line, CSV_HEADER[4])?,
            min_ttc_frame: parse(p(5)?, line, CSV_HEADER[5])?,
            location: Vec2::new(parse(p(6)?, line, CSV_HEADER[6])?, parse(p(7)?, line, CSV_HEADER[7])?),
            classification,
        });
    }
    Ok(out)
}
