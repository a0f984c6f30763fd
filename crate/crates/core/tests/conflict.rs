use std::collections::BTreeSet;

use rampsafe::conflict::{
    candidate_pairs, classify_event, extract_events, read_conflicts_csv, ttc_series, write_conflicts_csv,
};
use rampsafe::synth::{generate, paper_like_scenario};
use rampsafe::trajectory::{derive_heading, Lane, LaneType};
use rampsafe::ttc::TtcSample;
use rampsafe::{
    detect_conflicts, ConflictClass, ConflictConfig, ConflictEvent, Dataset, KinematicState, SiteGeometry,
    TypePair, Vec2, VehicleTrack,
};

const FPS: f64 = 25.0;

fn lane(id: u32, y0: f64) -> Lane {
    let line = |y: f64| vec![Vec2::new(0.0, y), Vec2::new(215.0, y)];
    Lane {
        lane_id: id,
        lane_type: LaneType::Mainline,
        centerline: line(y0 + 1.75),
        left_boundary: line(y0 + 3.5),
        right_boundary: line(y0),
    }
}

/// Lane 1 at y in [3.5, 7], lane 2 at y in [0, 3.5].
fn site() -> SiteGeometry {
    SiteGeometry::new(vec![lane(1, 3.5), lane(2, 0.0)], 215.0, FPS).unwrap()
}

/// Constant-velocity track over `frames`.
fn track(id: u64, length: f64, start: Vec2, vel: Vec2, frames: std::ops::Range<u32>) -> VehicleTrack {
    let site = site();
    let f0 = frames.start;
    let states = frames
        .map(|f| {
            let p = start + vel.scale((f - f0) as f64 / FPS);
            KinematicState {
                frame: f,
                x: p.x,
                y: p.y,
                vx: vel.x,
                vy: vel.y,
                heading: derive_heading(p, vel, None, &site),
                lane: None,
            }
        })
        .collect();
    VehicleTrack::new(id, length, 1.8, states).unwrap()
}

fn dataset(tracks: Vec<VehicleTrack>) -> Dataset {
    Dataset::new(site(), tracks).unwrap()
}

fn samples(ttcs: &[Option<f64>]) -> Vec<TtcSample> {
    ttcs.iter()
        .enumerate()
        .map(|(i, &t)| TtcSample {
            frame: i as u32,
            pair: (1, 2),
            ttc: t,
            collision_distance: t.map(|t| t * 5.0),
            witness_corner: None,
            midpoint: Vec2::new(i as f64, 0.0),
        })
        .collect()
}

#[test]
fn pruning_radius_is_inclusive() {
    let cfg = ConflictConfig::default();
    let ds = dataset(vec![
        track(1, 4.5, Vec2::new(10.0, 5.25), Vec2::new(20.0, 0.0), 0..2),
        track(2, 4.5, Vec2::new(20.0, 5.25), Vec2::new(20.0, 0.0), 0..2),
        track(3, 4.5, Vec2::new(85.0, 5.25), Vec2::new(20.0, 0.0), 0..2),
        track(4, 4.5, Vec2::new(210.0, 5.25), Vec2::new(20.0, 0.0), 0..1),
    ]);
    let pairs = candidate_pairs(&ds, 0, &cfg);
    assert!(pairs.contains(&(1, 2)));
    // exactly 75 m apart
    assert!(pairs.contains(&(1, 3)));
    assert!(!pairs.contains(&(1, 4)));
    assert!(!pairs.contains(&(2, 4)));
}

#[test]
fn series_of_head_on_closure() {
    let cfg = ConflictConfig::default();
    // 40 m bumper gap closing at 10 m/s: 4 s, minus 0.04 s per frame
    let ds = dataset(vec![
        track(1, 4.0, Vec2::new(0.0, 5.25), Vec2::new(10.0, 0.0), 0..50),
        track(2, 4.0, Vec2::new(44.0, 5.25), Vec2::new(0.0, 0.0), 0..50),
        track(3, 4.0, Vec2::new(100.0, 1.75), Vec2::new(10.0, 0.0), 60..70),
    ]);
    let series = ttc_series(&ds, (2, 1), &cfg);
    assert_eq!(series.len(), 50);
    for s in &series {
        let expected = 4.0 - 0.04 * s.frame as f64;
        assert!((s.ttc.unwrap() - expected).abs() < 1e-9, "{s:?}");
        assert_eq!(s.pair, (1, 2));
    }
    assert!(ttc_series(&ds, (1, 3), &cfg).is_empty());
}

#[test]
fn single_dip_is_one_event() {
    let cfg = ConflictConfig::default();
    let ev = extract_events(&samples(&[Some(3.5), Some(2.8), Some(2.5), Some(2.9), Some(3.2)]), &cfg, FPS);
    assert_eq!(ev.len(), 1);
    let e = &ev[0];
    assert_eq!((e.start_frame, e.end_frame, e.min_ttc, e.min_ttc_frame), (1, 3, 2.5, 2));
    assert_eq!(e.location, Vec2::new(2.0, 0.0));
    assert!(e.classification.is_none());
}

#[test]
fn merge_gap_joins_close_dips_only() {
    let cfg = ConflictConfig::default();
    let dip = [Some(2.0), Some(1.5), Some(2.0)];
    let build = |gap_frames: usize| {
        let mut v: Vec<Option<f64>> = dip.to_vec();
        v.extend(std::iter::repeat(Some(4.0)).take(gap_frames));
        v.extend(dip);
        v
    };
    // 2 s of TTC above threshold between the dips
    assert_eq!(extract_events(&samples(&build(50)), &cfg, FPS).len(), 2);
    // 0.3 s between them
    let merged = extract_events(&samples(&build(7)), &cfg, FPS);
    assert_eq!(merged.len(), 1);
    assert_eq!((merged[0].start_frame, merged[0].end_frame), (0, 12));
    // ties resolve to the earliest frame
    assert_eq!(merged[0].min_ttc_frame, 1);
    // frames without a TTC break runs as well
    let with_none = [Some(2.0), None, Some(2.0)];
    let cfg_no_merge = ConflictConfig { merge_gap: 0.01, ..cfg };
    assert_eq!(extract_events(&samples(&with_none), &cfg_no_merge, FPS).len(), 2);
}

#[test]
fn min_duration_drops_short_runs() {
    let cfg = ConflictConfig {
        min_duration: 3,
        ..ConflictConfig::default()
    };
    let mut ttcs = vec![Some(2.0); 2];
    ttcs.extend([Some(4.0); 13]);
    ttcs.extend([Some(1.0); 3]);
    let ev = extract_events(&samples(&ttcs), &cfg, FPS);
    assert_eq!(ev.len(), 1);
    assert_eq!(ev[0].start_frame, 15);
}

fn only_event(ds: &Dataset) -> ConflictEvent {
    let events = detect_conflicts(ds, &ConflictConfig::default());
    assert_eq!(events.len(), 1, "{events:#?}");
    events[0]
}

#[test]
fn same_lane_follower_is_rear_end() {
    let ds = dataset(vec![
        track(1, 4.5, Vec2::new(50.0, 5.25), Vec2::new(15.0, 0.0), 0..30),
        track(2, 4.5, Vec2::new(30.0, 5.25), Vec2::new(20.0, 0.0), 0..30),
    ]);
    let e = only_event(&ds);
    let c = e.classification.unwrap();
    assert_eq!(c.conflict_class, ConflictClass::RearEnd);
    assert_eq!((c.lead_id, c.lag_id), (1, 2));
    assert_eq!(c.type_pair, TypePair::CarCar);
}

#[test]
fn truck_lead_with_car_lag() {
    let ds = dataset(vec![
        track(7, 12.0, Vec2::new(60.0, 5.25), Vec2::new(15.0, 0.0), 0..30),
        track(3, 4.5, Vec2::new(35.0, 5.25), Vec2::new(20.0, 0.0), 0..30),
    ]);
    let c = only_event(&ds).classification.unwrap();
    assert_eq!((c.lead_id, c.lag_id, c.type_pair), (7, 3, TypePair::TruckCar));
}

#[test]
fn adjacent_lanes_without_episode() {
    // A drifts toward lane 1 but never crosses within its track
    let ds = dataset(vec![
        track(1, 4.0, Vec2::new(10.0, 1.75), Vec2::new(10.0, 1.0), 0..6),
        track(2, 4.0, Vec2::new(18.0, 5.25), Vec2::new(5.0, 0.0), 0..6),
    ]);
    let e = only_event(&ds);
    let c = e.classification.unwrap();
    assert_eq!(c.conflict_class, ConflictClass::LaneChange);
    assert_eq!((c.lead_id, c.lag_id), (2, 1));
}

#[test]
fn crossing_during_event_is_lane_change() {
    // A crosses from lane 2 into lane 1 at frame 5; both share lane 1 at the end
    let ds = dataset(vec![
        track(1, 4.0, Vec2::new(10.0, 3.4), Vec2::new(10.0, 0.5), 0..10),
        track(2, 4.0, Vec2::new(22.0, 5.25), Vec2::new(5.0, 0.0), 0..10),
    ]);
    let e = only_event(&ds);
    assert_eq!(e.min_ttc_frame, 9);
    assert_eq!(e.conflict_class(), Some(ConflictClass::LaneChange));

    let swapped = ConflictEvent {
        pair: (e.pair.1, e.pair.0),
        classification: None,
        ..e
    };
    let again = classify_event(&swapped, &ds, &ConflictConfig::default());
    let (c1, c2) = (e.classification.unwrap(), again.classification.unwrap());
    assert_eq!((c1.lead_id, c1.type_pair, c1.conflict_class), (c2.lead_id, c2.type_pair, c2.conflict_class));
}

#[test]
fn empty_dataset_has_no_events() {
    assert!(detect_conflicts(&Dataset::empty(site()), &ConflictConfig::default()).is_empty());
}

#[test]
fn invariants_on_generated_traffic() {
    let ds = generate(&paper_like_scenario(9)).unwrap();
    let cfg = ConflictConfig::default();
    let events = detect_conflicts(&ds, &cfg);
    assert!(!events.is_empty());
    for e in &events {
        assert!(e.pair.0 < e.pair.1);
        assert!(e.start_frame <= e.min_ttc_frame && e.min_ttc_frame <= e.end_frame);
        assert!(e.min_ttc >= 0.0 && e.min_ttc <= cfg.ttc_threshold);
        let c = e.classification.unwrap();
        let ids: BTreeSet<u64> = [c.lead_id, c.lag_id].into();
        assert_eq!(ids, [e.pair.0, e.pair.1].into());
    }
    let mut sorted = events.clone();
    sorted.sort_by_key(|e| (e.start_frame, e.pair.0, e.pair.1));
    assert_eq!(sorted, events);

    // the same events whatever the thread count
    for threads in [1, 3] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        assert_eq!(pool.install(|| detect_conflicts(&ds, &cfg)), events);
    }

    // a larger radius never loses events; a huge one equals the unpruned set
    let wide = detect_conflicts(&ds, &ConflictConfig { pruning_radius: 150.0, ..cfg });
    let huge = detect_conflicts(&ds, &ConflictConfig { pruning_radius: 1e6, ..cfg });
    for e in &events {
        assert!(wide.iter().any(|w| w.pair == e.pair && w.min_ttc_frame == e.min_ttc_frame));
    }
    assert_eq!(wide, huge);
}

#[test]
fn conflicts_csv_round_trip() {
    let ds = generate(&paper_like_scenario(3)).unwrap();
    let events = detect_conflicts(&ds, &ConflictConfig::default());
    let mut buf = Vec::new();
    write_conflicts_csv(&events, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with(
        "pair_a,pair_b,start_frame,end_frame,min_ttc,min_ttc_frame,x,y,lead_id,lag_id,type_pair,conflict_class\n"
    ));
    assert_eq!(read_conflicts_csv(buf.as_slice()).unwrap(), events);
}

#[test]
fn config_validation() {
    assert!(ConflictConfig::default().validate().is_ok());
    assert!(ConflictConfig { ttc_threshold: 0.0, ..Default::default() }.validate().is_err());
    assert!(ConflictConfig { ttc_threshold: 12.0, ..Default::default() }.validate().is_err());
    assert!(ConflictConfig { pruning_radius: -1.0, ..Default::default() }.validate().is_err());
    assert!(ConflictConfig { min_duration: 0, ..Default::default() }.validate().is_err());
    assert_eq!("truck-car".parse::<TypePair>(), Ok(TypePair::TruckCar));
    assert!("bus-car".parse::<TypePair>().is_err());
}
