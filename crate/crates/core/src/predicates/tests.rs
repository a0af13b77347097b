use std::sync::Arc;

use super::*;
use crate::category::Category;
use crate::color::{Color, ColorTable};
use crate::io::EgoPose;
use crate::map::{HdMap, LaneRecord, LaneType, MapFile};
use crate::registry::Value;

const DT: f64 = 0.1;

fn ts(i: usize) -> Timestamp {
    Timestamp(1_000_000_000 + (i as i64) * 100_000_000)
}

/// Two eastbound lanes: L1 (y in [-3.5, 0]) and L2 (y in [0, 3.5]) to its left.
fn road() -> HdMap {
    let lane = |id: &str, y0: f64, y1: f64, left: Option<&str>, right: Option<&str>| LaneRecord {
        id: id.into(),
        lane_type: LaneType::Vehicle,
        left_boundary: vec![[-100.0, y1], [200.0, y1]],
        right_boundary: vec![[-100.0, y0], [200.0, y0]],
        left_neighbor: left.map(Into::into),
        right_neighbor: right.map(Into::into),
        successors: vec![],
        is_intersection: false,
    };
    HdMap::from_file(MapFile {
        lanes: vec![lane("L1", -3.5, 0.0, Some("L2"), None), lane("L2", 0.0, 3.5, None, Some("L1"))],
        drivable: vec![vec![[-100.0, -3.5], [200.0, -3.5], [200.0, 3.5], [-100.0, 3.5]]],
        ..MapFile::default()
    })
    .unwrap()
}

fn track(id: &str, category: Category, n: usize, pos: impl Fn(f64) -> (f64, f64, f64)) -> Track {
    let boxes = (0..n)
        .map(|i| {
            let (x, y, yaw) = pos(i as f64 * DT);
            TrackBox { timestamp: ts(i), translation: [x, y, 0.0], yaw, size: [4.0, 2.0, 1.5], confidence: 1.0 }
        })
        .collect();
    Track::new(id, category, boxes).unwrap()
}

fn bundle(tracks: Vec<Track>, n: usize) -> LogBundle {
    LogBundle {
        log_id: "t".into(),
        tracks,
        ego: (0..n).map(|i| EgoPose::planar(ts(i), 0.0, 0.0, 0.0, 0.0)).collect(),
        map: road(),
        colors: ColorTable::new(),
    }
}

fn sc(s: ScenarioSet) -> Value {
    Value::Scenario(Arc::new(s))
}

fn call(engine: &LogEngine, name: &str, pairs: &[(&str, Value)]) -> Result<ScenarioSet> {
    let mut full: Vec<(&str, Value)> = pairs.to_vec();
    if registry::lookup(name).unwrap().params.iter().any(|p| p.name == "log_dir") {
        full.push(("log_dir", Value::LogDir));
    }
    let args = Args::for_function(name, &full).unwrap();
    engine.call(name, &args)
}

fn all(engine: &LogEngine, category: &str) -> ScenarioSet {
    call(engine, "get_objects_of_category", &[("category", Value::Str(category.into()))]).unwrap()
}

fn ids(s: &ScenarioSet) -> Vec<&str> {
    s.ids().collect()
}

fn convoy() -> LogBundle {
    let n = 50;
    bundle(
        vec![
            track("a", Category::RegularVehicle, n, |t| (10.0 * t, -1.75, 0.0)),
            track("b", Category::RegularVehicle, n, |t| (20.0 + 10.0 * t, -1.75, 0.0)),
            track("d", Category::RegularVehicle, n, |t| (80.0 - 10.0 * t, 1.75, std::f64::consts::PI)),
            track("p", Category::Pedestrian, n, |_| (30.0, 20.0, 0.0)),
        ],
        n,
    )
}

#[test]
fn categories_and_super_categories() {
    let b = convoy();
    let e = LogEngine::new(&b, EngineConfig::default());
    assert_eq!(ids(&all(&e, "PEDESTRIAN")), ["p"]);
    assert_eq!(ids(&all(&e, "VEHICLE")), ["a", "b", "d"]);
    assert_eq!(all(&e, "ANY").len(), 4);
    assert!(all(&e, "BUS").is_empty());
    let bad = Args::for_function("get_objects_of_category", &[("log_dir", Value::LogDir), ("category", Value::Str("CAR".into()))]);
    assert!(bad.is_err());
}

#[test]
fn velocity_and_stationary() {
    let b = convoy();
    let e = LogEngine::new(&b, EngineConfig::default());
    let any = all(&e, "ANY");
    let fast = call(&e, "has_velocity", &[("track_candidates", sc(any.clone())), ("min_velocity", Value::Int(5))]).unwrap();
    assert_eq!(ids(&fast), ["a", "b", "d"]);
    let identity = call(
        &e,
        "has_velocity",
        &[("track_candidates", sc(any.clone())), ("min_velocity", Value::Int(0)), ("max_velocity", Value::Float(f64::INFINITY))],
    )
    .unwrap();
    assert_eq!(identity, any);
    let parked = call(&e, "stationary", &[("track_candidates", sc(any.clone()))]).unwrap();
    assert_eq!(ids(&parked), ["p"]);
    let bad = call(
        &e,
        "has_velocity",
        &[("track_candidates", sc(any)), ("min_velocity", Value::Int(5)), ("max_velocity", Value::Int(1))],
    );
    assert!(matches!(bad, Err(Error::InvalidArgument(_))));
}

#[test]
fn convoy_relations() {
    let b = convoy();
    let e = LogEngine::new(&b, EngineConfig::default());
    let v = all(&e, "VEHICLE");
    let a_only = {
        let mut s = v.clone();
        s.retain_pairs(|id, _| id == "a");
        s
    };
    let ahead = call(
        &e,
        "has_objects_in_relative_direction",
        &[
            ("track_candidates", sc(a_only.clone())),
            ("related_candidates", sc(v.clone())),
            ("direction", Value::Str("forward".into())),
            ("lateral_thresh", Value::Int(1)),
        ],
    )
    .unwrap();
    let rel: Vec<&String> = ahead.get("a").unwrap().related.keys().collect();
    assert_eq!(rel, ["b"]);

    let follow = call(&e, "following", &[("track_uuid", sc(v.clone())), ("candidate_uuids", sc(v.clone()))]).unwrap();
    assert_eq!(ids(&follow), ["a"]);
    assert_eq!(follow.get("a").unwrap().related.keys().collect::<Vec<_>>(), ["b"]);

    let same = call(
        &e,
        "heading_in_relative_direction_to",
        &[("track_candidates", sc(a_only.clone())), ("related_candidates", sc(v.clone())), ("direction", Value::Str("same".into()))],
    )
    .unwrap();
    assert_eq!(same.get("a").unwrap().related.keys().collect::<Vec<_>>(), ["b"]);
    let opposite = call(
        &e,
        "on_relative_side_of_road",
        &[("track_candidates", sc(a_only)), ("related_candidates", sc(v)), ("side", Value::Str("same".into()))],
    )
    .unwrap();
    // Both lanes run east, so every vehicle is on the same side here.
    assert_eq!(opposite.get("a").unwrap().related.len(), 2);
}

#[test]
fn map_predicates() {
    let b = convoy();
    let e = LogEngine::new(&b, EngineConfig::default());
    let any = all(&e, "ANY");
    let on_road = call(&e, "on_road", &[("track_candidates", sc(any.clone()))]).unwrap();
    assert_eq!(ids(&on_road), ["a", "b", "d"]);
    let drivable = call(&e, "in_drivable_area", &[("track_candidates", sc(any.clone()))]).unwrap();
    assert_eq!(drivable, on_road);
    let bus = call(&e, "on_lane_type", &[("track_uuid", sc(any.clone())), ("lane_type", Value::Str("BUS".into()))]).unwrap();
    assert!(bus.is_empty());
    let crossing = call(&e, "at_pedestrian_crossing", &[("track_candidates", sc(any.clone()))]).unwrap();
    assert!(crossing.is_empty());
    let inter = call(&e, "on_intersection", &[("track_candidates", sc(any))]).unwrap();
    assert!(inter.is_empty());
}

#[test]
fn lane_change_left_with_dilation() {
    let n = 60;
    // Moves from y = -1.75 to y = 1.75 between t = 2.05 s and t = 4.05 s.
    let b = bundle(
        vec![track("a", Category::RegularVehicle, n, |t| {
            let y = (-1.75 + 3.5 * (t - 2.05) / 2.0).clamp(-1.75, 1.75);
            (10.0 * t, y, 0.0)
        })],
        n,
    );
    let e = LogEngine::new(&b, EngineConfig::default());
    let any = all(&e, "ANY");
    let left = call(&e, "changing_lanes", &[("track_candidates", sc(any.clone())), ("direction", Value::Str("left".into()))]).unwrap();
    let either = call(&e, "changing_lanes", &[("track_candidates", sc(any))]).unwrap();
    let stamps = &left.get("a").unwrap().timestamps;
    // The lane flips at t = 3.1 s (index 31); +-0.5 s is indices 26..=36.
    assert_eq!(stamps.iter().copied().collect::<Vec<_>>(), (26..=36).map(ts).collect::<Vec<_>>());
    assert_eq!(either, left);
}

#[test]
fn colors() {
    let mut b = convoy();
    b.colors.set("a", Color::Red);
    let e = LogEngine::new(&b, EngineConfig::default());
    let any = all(&e, "ANY");
    let red = call(&e, "is_color", &[("track_candidates", sc(any.clone())), ("color", Value::Str("red".into()))]).unwrap();
    assert_eq!(ids(&red), ["a"]);
    let other = call(&e, "is_color", &[("track_candidates", sc(any.clone())), ("color", Value::Str("chartreuse".into()))]).unwrap();
    assert_eq!(other, any);
}

#[test]
fn near_objects_excludes_self() {
    let b = convoy();
    let e = LogEngine::new(&b, EngineConfig::default());
    let p = all(&e, "PEDESTRIAN");
    let alone = call(&e, "near_objects", &[("track_uuid", sc(p.clone())), ("candidate_uuids", sc(p.clone()))]).unwrap();
    assert!(alone.is_empty());
    let with_self = call(
        &e,
        "near_objects",
        &[("track_uuid", sc(p.clone())), ("candidate_uuids", sc(p)), ("include_self", Value::Bool(true))],
    )
    .unwrap();
    assert_eq!(with_self.relationship_count(), 0);
    assert_eq!(ids(&with_self), ["p"]);
}
