//! Scripted merging-section scenarios with known conflicts.
//!
//! Background vehicles follow their lane at constant speed and are placed so
//! that no pair ever comes within [`CLEARANCE_TTC_S`] of colliding. Each
//! injected conflict is a closing pair in one lane: the lag vehicle approaches
//! at a constant speed difference until the bumper gap equals
//! `target * closing_speed`, then matches the lead's speed. For lane-change
//! injections the lead steers into the adjacent lane right after that frame,
//! crossing the lane boundary within the lane-change marking window.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::conflict::{ConflictClass, TypePair};
use crate::error::ScenarioError;
use crate::geometry::Vec2;
use crate::trajectory::{
    derive_heading, Dataset, Frame, KinematicState, Lane, LaneId, LaneType, SiteGeometry,
    VehicleClass, VehicleId, VehicleTrack,
};
use crate::ttc::{ttc, OrientedBox, PairState};

/// Background and cross-injection pairs stay above this TTC at every frame.
pub const CLEARANCE_TTC_S: f64 = 4.0;
/// Lateral speed of a scripted lane change, m/s.
pub const SWERVE_SPEED: f64 = 2.5;
/// Smallest bumper gap at the closest approach; keeps the swerving lead's
/// rotated rear corners clear of the lag vehicle.
const MIN_BUMPER_GAP_M: f64 = 1.0;
const MAX_ATTEMPTS: usize = 2000;
const INJECTION_SPACING_S: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiteTemplate {
    pub segment_length: f64,
    pub frame_rate: f64,
    pub lane_width: f64,
    /// On-ramp length before the acceleration lane starts.
    pub ramp_length: f64,
}

impl Default for SiteTemplate {
    fn default() -> Self {
        Self {
            segment_length: 215.0,
            frame_rate: 25.0,
            lane_width: 3.5,
            ramp_length: 80.0,
        }
    }
}

impl SiteTemplate {
    pub const MAINLINE_LANES: LaneId = 5;
    pub const ACCELERATION_LANE: LaneId = 6;
    pub const ON_RAMP_LANE: LaneId = 7;

    fn validate(&self) -> Result<(), ScenarioError> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !(ok(self.segment_length) && ok(self.frame_rate) && ok(self.lane_width) && ok(self.ramp_length)) {
            return Err(ScenarioError::InvalidSpec("site template values must be positive".into()));
        }
        if self.ramp_length >= self.segment_length {
            return Err(ScenarioError::InvalidSpec("ramp_length must be shorter than the segment".into()));
        }
        Ok(())
    }

    /// Lateral center of a lane. Lane 1 is innermost (largest y); the ramp
    /// and acceleration lane share the outermost strip.
    pub fn lane_center_y(&self, lane: LaneId) -> f64 {
        let slot = if lane <= Self::MAINLINE_LANES { Self::MAINLINE_LANES + 1 - lane } else { 0 };
        self.lane_width * (slot as f64 + 0.5)
    }

    pub fn build(&self) -> Result<SiteGeometry, ScenarioError> {
        self.validate()?;
        let w = self.lane_width;
        let strip = |id: LaneId, lane_type, x0: f64, x1: f64| {
            let yc = self.lane_center_y(id);
            let line = |y: f64| vec![Vec2::new(x0, y), Vec2::new(x1, y)];
            Lane {
                lane_id: id,
                lane_type,
                centerline: line(yc),
                left_boundary: line(yc + 0.5 * w),
                right_boundary: line(yc - 0.5 * w),
            }
        };
        let mut lanes: Vec<Lane> = (1..=Self::MAINLINE_LANES)
            .map(|id| strip(id, LaneType::Mainline, 0.0, self.segment_length))
            .collect();
        lanes.push(strip(Self::ACCELERATION_LANE, LaneType::Acceleration, self.ramp_length, self.segment_length));
        lanes.push(strip(Self::ON_RAMP_LANE, LaneType::OnRamp, 0.0, self.ramp_length));
        Ok(SiteGeometry::new(lanes, self.segment_length, self.frame_rate)?)
    }
}

/// Background fleet. Speeds in m/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleetSpec {
    pub n_cars: usize,
    pub n_trucks: usize,
    pub car_speed_mean: f64,
    pub car_speed_sd: f64,
    pub truck_speed_mean: f64,
    pub truck_speed_sd: f64,
}

impl Default for FleetSpec {
    fn default() -> Self {
        Self {
            n_cars: 0,
            n_trucks: 0,
            car_speed_mean: 25.0,
            car_speed_sd: 3.0,
            truck_speed_mean: 20.0,
            truck_speed_sd: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConflictInjection {
    pub lead_class: VehicleClass,
    pub lag_class: VehicleClass,
    /// Seconds, in (0, 3].
    pub target_min_ttc: f64,
    /// Midpoint of the two vehicle centers at the closest approach. The y
    /// coordinate selects the lane; vehicles are centered in it.
    pub location: Vec2,
    pub conflict_class_intent: ConflictClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub seed: u64,
    #[serde(default)]
    pub site: SiteTemplate,
    #[serde(default)]
    pub fleet: FleetSpec,
    #[serde(default)]
    pub injections: Vec<ConflictInjection>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.site.validate()?;
        let f = &self.fleet;
        for (name, mean, sd) in [
            ("car", f.car_speed_mean, f.car_speed_sd),
            ("truck", f.truck_speed_mean, f.truck_speed_sd),
        ] {
            if !(mean > 0.0 && mean.is_finite()) || !(sd >= 0.0 && sd.is_finite()) {
                return Err(ScenarioError::InvalidSpec(format!(
                    "{name} speed needs a positive mean and non-negative sd, got {mean} / {sd}"
                )));
            }
        }
        for (index, inj) in self.injections.iter().enumerate() {
            let t = inj.target_min_ttc;
            if !(t > 0.0 && t <= 3.0) {
                return Err(ScenarioError::InfeasibleInjection {
                    index,
                    reason: format!("target_min_ttc must be in (0, 3], got {t}"),
                });
            }
            if !inj.location.is_finite() {
                return Err(ScenarioError::InfeasibleInjection {
                    index,
                    reason: "location is not finite".into(),
                });
            }
        }
        Ok(())
    }
}

/// What the generator built for one injection, with final vehicle ids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InjectedConflict {
    pub index: usize,
    pub lead_id: VehicleId,
    pub lag_id: VehicleId,
    pub type_pair: TypePair,
    pub conflict_class: ConflictClass,
    /// Frame of the closest approach.
    pub min_ttc_frame: Frame,
    /// TTC of the constructed pair at `min_ttc_frame`.
    pub min_ttc: f64,
    pub location: Vec2,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub dataset: Dataset,
    pub injected: Vec<InjectedConflict>,
}

/// A vehicle before ids are assigned. Frames are contiguous.
#[derive(Debug, Clone)]
struct Draft {
    length: f64,
    width: f64,
    first: i64,
    /// (x, y, vx, vy) per frame starting at `first`.
    samples: Vec<[f64; 4]>,
}

impl Draft {
    fn last(&self) -> i64 {
        self.first + self.samples.len() as i64 - 1
    }

    fn shifted(&self, by: i64) -> Draft {
        Draft {
            first: self.first + by,
            ..self.clone()
        }
    }

    fn box_at(&self, k: usize) -> (OrientedBox, Vec2) {
        let [x, y, vx, vy] = self.samples[k];
        let heading = vy.atan2(vx);
        (OrientedBox::new(Vec2::new(x, y), heading, self.length, self.width), Vec2::new(vx, vy))
    }
}

/// Samples a motion over every frame whose x lies on the segment, walking
/// out from `anchor`. `motion` must be increasing in x.
fn trace(anchor: i64, segment_length: f64, length: f64, width: f64, motion: impl Fn(i64) -> [f64; 4]) -> Draft {
    let mut first = anchor;
    while motion(first - 1)[0] >= 0.0 {
        first -= 1;
    }
    let mut samples = Vec::new();
    let mut f = first;
    loop {
        let s = motion(f);
        if s[0] > segment_length {
            break;
        }
        samples.push(s);
        f += 1;
    }
    Draft {
        length,
        width,
        first,
        samples,
    }
}

/// Earliest co-present frame at which the pair's TTC drops to `limit`.
fn interaction(a: &Draft, b: &Draft, limit: f64) -> Option<i64> {
    let lo = a.first.max(b.first);
    let hi = a.last().min(b.last());
    for f in lo..=hi {
        let (ka, kb) = ((f - a.first) as usize, (f - b.first) as usize);
        let (sa, sb) = (a.samples[ka], b.samples[kb]);
        // parallel lane-following in separate lanes never closes
        if sa[3] == 0.0 && sb[3] == 0.0 && (sa[1] - sb[1]).abs() > 0.5 * (a.width + b.width) + 1e-6 {
            continue;
        }
        let (box_a, vel_a) = a.box_at(ka);
        let (box_b, vel_b) = b.box_at(kb);
        let pair = PairState {
            box_a,
            vel_a,
            box_b,
            vel_b,
        };
        if ttc(&pair).is_some_and(|r| r.ttc <= limit) {
            return Some(f);
        }
    }
    None
}

fn clear_of(candidate: &[&Draft], placed: &[Draft]) -> bool {
    candidate
        .iter()
        .all(|c| placed.iter().all(|p| interaction(c, p, CLEARANCE_TTC_S).is_none()))
}

fn dimensions(class: VehicleClass, rng: &mut ChaCha8Rng) -> (f64, f64) {
    match class {
        VehicleClass::Car => (rng.gen_range(4.2..5.0), rng.gen_range(1.7..1.9)),
        VehicleClass::Truck => (rng.gen_range(9.0..16.0), rng.gen_range(2.4..2.55)),
    }
}

fn speed(fleet: &FleetSpec, class: VehicleClass, rng: &mut ChaCha8Rng) -> f64 {
    let (mean, sd) = match class {
        VehicleClass::Car => (fleet.car_speed_mean, fleet.car_speed_sd),
        VehicleClass::Truck => (fleet.truck_speed_mean, fleet.truck_speed_sd),
    };
    let v = Normal::new(mean, sd).map(|d| d.sample(rng)).unwrap_or(mean);
    v.clamp(0.5 * mean, 1.5 * mean)
}

struct Encounter {
    lead: Draft,
    lag: Draft,
    min_ttc: f64,
    location: Vec2,
}

/// Builds one encounter with the closest approach at frame 0.
fn build_encounter(
    index: usize,
    inj: &ConflictInjection,
    spec: &ScenarioSpec,
    site: &SiteGeometry,
    rng: &mut ChaCha8Rng,
) -> Result<Encounter, ScenarioError> {
    let infeasible = |reason: String| ScenarioError::InfeasibleInjection { index, reason };
    let tpl = &spec.site;
    let fps = tpl.frame_rate;
    let lane = site
        .assign_lane(inj.location)
        .ok_or_else(|| infeasible(format!("location ({}, {}) is outside every lane", inj.location.x, inj.location.y)))?;
    let yc = tpl.lane_center_y(lane);

    let (lead_len, lead_w) = dimensions(inj.lead_class, rng);
    let (lag_len, lag_w) = dimensions(inj.lag_class, rng);
    let v_lead = speed(&spec.fleet, inj.lead_class, rng);
    let tau = inj.target_min_ttc;
    let closing = rng.gen_range(3.0..6.0_f64).max(MIN_BUMPER_GAP_M / tau);
    let v_lag = v_lead + closing;
    // a hair under the target so a 3.0 s target still lands on the threshold
    let gap = tau * closing - 1e-9;
    let half = 0.5 * (gap + 0.5 * (lead_len + lag_len));
    let (x_lead, x_lag) = (inj.location.x + half, inj.location.x - half);
    if x_lag < 0.0 {
        return Err(infeasible("location is too close to the upstream end of the segment".into()));
    }
    if x_lead > tpl.segment_length {
        return Err(infeasible("location is too close to the downstream end of the segment".into()));
    }

    let swerve = match inj.conflict_class_intent {
        ConflictClass::RearEnd => None,
        ConflictClass::LaneChange => {
            let w = tpl.lane_width;
            let dir = if site.assign_lane(Vec2::new(x_lead, yc + w)).is_some() {
                1.0
            } else if site.assign_lane(Vec2::new(x_lead, yc - w)).is_some() {
                -1.0
            } else {
                return Err(infeasible("no adjacent lane to change into".into()));
            };
            let crossing_x = x_lead + v_lead * (0.5 * w / SWERVE_SPEED);
            if crossing_x > tpl.segment_length {
                return Err(infeasible("lane change would finish past the end of the segment".into()));
            }
            Some((dir, w))
        }
    };

    let lead = trace(0, tpl.segment_length, lead_len, lead_w, |f| {
        let t = f as f64 / fps;
        let x = x_lead + v_lead * t;
        match swerve {
            Some((dir, w)) if f > 0 => {
                let moved = SWERVE_SPEED * t;
                if moved < w {
                    [x, yc + dir * moved, v_lead, dir * SWERVE_SPEED]
                } else {
                    [x, yc + dir * w, v_lead, 0.0]
                }
            }
            _ => [x, yc, v_lead, 0.0],
        }
    });
    let lag = trace(0, tpl.segment_length, lag_len, lag_w, |f| {
        let t = f as f64 / fps;
        if f <= 0 {
            [x_lag + v_lag * t, yc, v_lag, 0.0]
        } else {
            [x_lag + v_lead * t, yc, v_lead, 0.0]
        }
    });

    let k_lead = (0 - lead.first) as usize;
    let k_lag = (0 - lag.first) as usize;
    let (box_a, vel_a) = lead.box_at(k_lead);
    let (box_b, vel_b) = lag.box_at(k_lag);
    let min_ttc = ttc(&PairState {
        box_a,
        vel_a,
        box_b,
        vel_b,
    })
    .map(|r| r.ttc)
    .ok_or_else(|| infeasible("constructed pair is not closing".into()))?;

    // after the closest approach the pair must separate cleanly
    let after = Draft {
        first: 1,
        samples: lead.samples[k_lead + 1..].to_vec(),
        ..lead.clone()
    };
    if interaction(&after, &lag, CLEARANCE_TTC_S).is_some() {
        return Err(infeasible("encounter does not resolve after the closest approach".into()));
    }

    Ok(Encounter {
        location: Vec2::new(0.5 * (x_lead + x_lag), yc),
        lead,
        lag,
        min_ttc,
    })
}

/// Generates the dataset together with the ground truth for every injection.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<Scenario, ScenarioError> {
    spec.validate()?;
    let site = spec.site.build()?;
    let fps = spec.site.frame_rate;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut placed: Vec<Draft> = Vec::new();
    // (index in `placed` of lead, of lag, closest frame, ttc, location, injection)
    let mut truth = Vec::new();

    let mut cursor: i64 = 0;
    for (index, inj) in spec.injections.iter().enumerate() {
        let enc = build_encounter(index, inj, spec, &site, &mut rng)?;
        let earliest = -enc.lead.first.min(enc.lag.first);
        let mut at = cursor.max(earliest);
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let (lead, lag) = (enc.lead.shifted(at), enc.lag.shifted(at));
            if clear_of(&[&lead, &lag], &placed) {
                placed.push(lead);
                placed.push(lag);
                ok = true;
                break;
            }
            at += fps.round() as i64;
        }
        if !ok {
            return Err(ScenarioError::InfeasibleInjection {
                index,
                reason: "overlaps earlier injections at every tried start time".into(),
            });
        }
        truth.push((placed.len() - 2, placed.len() - 1, at, enc.min_ttc, enc.location, inj));
        cursor = at + (INJECTION_SPACING_S * fps).round() as i64;
    }

    // background streams: five mainline lanes plus the ramp/acceleration strip
    let car_streams: Vec<LaneId> = vec![1, 2, 3, 4, 5, SiteTemplate::ON_RAMP_LANE];
    let truck_streams: Vec<LaneId> = vec![3, 4, 5, SiteTemplate::ON_RAMP_LANE];
    let mut classes: Vec<VehicleClass> = std::iter::repeat_n(VehicleClass::Car, spec.fleet.n_cars)
        .chain(std::iter::repeat_n(VehicleClass::Truck, spec.fleet.n_trucks))
        .collect();
    classes.shuffle(&mut rng);
    let mut stream_cursor = [0_i64; 8];
    let step = (0.5 * fps).round().max(1.0) as i64;
    for (index, class) in classes.into_iter().enumerate() {
        let streams = match class {
            VehicleClass::Car => &car_streams,
            VehicleClass::Truck => &truck_streams,
        };
        let lane = *streams.choose(&mut rng).expect("non-empty stream list");
        let y = spec.site.lane_center_y(lane);
        let (length, width) = dimensions(class, &mut rng);
        let v = speed(&spec.fleet, class, &mut rng);
        let headway = rng.gen_range(1.5..4.0) * fps;
        let mut entry = stream_cursor[lane as usize] + headway.round() as i64;
        let mut ok = false;
        for _ in 0..MAX_ATTEMPTS {
            let d = trace(entry, spec.site.segment_length, length, width, |f| {
                [v * (f - entry) as f64 / fps, y, v, 0.0]
            });
            if clear_of(&[&d], &placed) {
                placed.push(d);
                ok = true;
                break;
            }
            entry += step;
        }
        if !ok {
            return Err(ScenarioError::Placement {
                index,
                attempts: MAX_ATTEMPTS,
            });
        }
        stream_cursor[lane as usize] = entry;
    }

    // ids follow entry order, then lateral position
    let mut order: Vec<usize> = (0..placed.len()).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (&placed[a], &placed[b]);
        da.first
            .cmp(&db.first)
            .then(da.samples[0][1].total_cmp(&db.samples[0][1]))
            .then(a.cmp(&b))
    });
    let mut id_of = vec![0 as VehicleId; placed.len()];
    for (rank, &k) in order.iter().enumerate() {
        id_of[k] = rank as VehicleId + 1;
    }

    let mut tracks = Vec::with_capacity(placed.len());
    for (k, d) in placed.iter().enumerate() {
        let states = d
            .samples
            .iter()
            .enumerate()
            .map(|(i, &[x, y, vx, vy])| {
                let p = Vec2::new(x, y);
                let lane = site.assign_lane(p);
                KinematicState {
                    frame: (d.first + i as i64) as Frame,
                    x,
                    y,
                    vx,
                    vy,
                    heading: derive_heading(p, Vec2::new(vx, vy), lane, &site),
                    lane,
                }
            })
            .collect();
        tracks.push(VehicleTrack::new(id_of[k], d.length, d.width, states)?);
    }
    let injected = truth
        .into_iter()
        .enumerate()
        .map(|(index, (lead, lag, at, min_ttc, location, inj))| InjectedConflict {
            index,
            lead_id: id_of[lead],
            lag_id: id_of[lag],
            type_pair: TypePair::new(inj.lead_class, inj.lag_class),
            conflict_class: inj.conflict_class_intent,
            min_ttc_frame: at as Frame,
            min_ttc,
            location,
        })
        .collect();
    let dataset = Dataset::new(site, tracks)?;
    tracing::debug!(vehicles = dataset.len(), "scenario generated");
    Ok(Scenario { dataset, injected })
}

pub fn generate(spec: &ScenarioSpec) -> Result<Dataset, ScenarioError> {
    generate_scenario(spec).map(|s| s.dataset)
}

/// About 100 vehicles, 35% trucks counting injected ones, with lane-change
/// conflicts mostly in the acceleration lane. Mean injected TTC rises from
/// car-car through car-truck and truck-car to truck-truck.
pub fn paper_like_scenario(seed: u64) -> ScenarioSpec {
    use ConflictClass::{LaneChange, RearEnd};
    use VehicleClass::{Car, Truck};
    let site = SiteTemplate::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_ed0f_5ce4_a210);
    let accel = site.lane_center_y(SiteTemplate::ACCELERATION_LANE);
    let plan: [(VehicleClass, VehicleClass, f64, f64, f64, ConflictClass); 14] = [
        (Car, Car, 1.0, 120.0, accel, LaneChange),
        (Car, Car, 1.2, 150.0, accel, LaneChange),
        (Car, Car, 1.4, 160.0, site.lane_center_y(2), LaneChange),
        (Car, Truck, 1.5, 130.0, accel, LaneChange),
        (Car, Truck, 1.6, 165.0, accel, LaneChange),
        (Car, Truck, 1.7, 100.0, site.lane_center_y(4), LaneChange),
        (Truck, Car, 1.9, 115.0, accel, LaneChange),
        (Truck, Car, 2.0, 140.0, accel, LaneChange),
        (Truck, Car, 2.1, 150.0, site.lane_center_y(5), LaneChange),
        (Truck, Truck, 2.3, 125.0, accel, LaneChange),
        (Truck, Truck, 2.4, 155.0, accel, LaneChange),
        (Truck, Truck, 2.5, 140.0, site.lane_center_y(4), LaneChange),
        (Car, Car, 1.8, 90.0, site.lane_center_y(3), RearEnd),
        (Truck, Truck, 2.6, 60.0, site.lane_center_y(5), RearEnd),
    ];
    let injections = plan
        .iter()
        .map(|&(lead, lag, target, x, y, class)| ConflictInjection {
            lead_class: lead,
            lag_class: lag,
            target_min_ttc: target,
            location: Vec2::new(x + rng.gen_range(-5.0..5.0), y),
            conflict_class_intent: class,
        })
        .collect();
    // 14 cars and 14 trucks are injected
    ScenarioSpec {
        seed,
        site,
        fleet: FleetSpec {
            n_cars: 51,
            n_trucks: 21,
            ..FleetSpec::default()
        },
        injections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn template_layout() {
        let tpl = SiteTemplate::default();
        let site = tpl.build().unwrap();
        assert_eq!(site.lanes().len(), 7);
        assert_eq!(site.assign_lane(Vec2::new(50.0, 1.75)), Some(SiteTemplate::ON_RAMP_LANE));
        assert_eq!(site.assign_lane(Vec2::new(150.0, 1.75)), Some(SiteTemplate::ACCELERATION_LANE));
        assert_eq!(site.assign_lane(Vec2::new(150.0, 5.25)), Some(5));
        assert_eq!(site.assign_lane(Vec2::new(150.0, 19.25)), Some(1));
        assert_eq!(site.segment_length(), 215.0);
        assert_eq!(site.frame_rate(), 25.0);
    }

    #[test]
    fn rejects_bad_targets_and_locations() {
        let mut spec = ScenarioSpec {
            seed: 1,
            site: SiteTemplate::default(),
            fleet: FleetSpec::default(),
            injections: vec![ConflictInjection {
                lead_class: VehicleClass::Car,
                lag_class: VehicleClass::Car,
                target_min_ttc: 3.5,
                location: Vec2::new(100.0, 5.25),
                conflict_class_intent: ConflictClass::RearEnd,
            }],
        };
        assert!(matches!(generate(&spec), Err(ScenarioError::InfeasibleInjection { index: 0, .. })));
        spec.injections[0].target_min_ttc = 2.0;
        spec.injections[0].location = Vec2::new(100.0, 40.0);
        assert!(matches!(generate(&spec), Err(ScenarioError::InfeasibleInjection { index: 0, .. })));
        spec.injections[0].location = Vec2::new(1.0, 5.25);
        assert!(matches!(generate(&spec), Err(ScenarioError::InfeasibleInjection { index: 0, .. })));
    }

    #[test]
    fn merging_scenario_mix() {
        let spec = paper_like_scenario(7);
        let cars = spec.fleet.n_cars
            + spec.injections.iter().map(|i| (i.lead_class == VehicleClass::Car) as usize + (i.lag_class == VehicleClass::Car) as usize).sum::<usize>();
        let total = spec.fleet.n_cars + spec.fleet.n_trucks + 2 * spec.injections.len();
        assert_eq!((cars, total), (65, 100));
    }
}
