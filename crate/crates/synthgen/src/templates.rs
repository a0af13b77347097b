//! Map templates. All lanes are straight, 3.5 m wide and have two-point
//! boundaries, which keeps the reference engine's lane geometry exact.

use scenemine_core::geometry::Point;
use scenemine_core::map::{LaneRecord, LaneType, MapFile, PedestrianCrossing, StopSign};
use scenemine_core::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

pub const LANE_WIDTH: f64 = 3.5;
pub const TEMPLATES: [&str; 2] = ["straight_road", "intersection"];

/// Half-size of the intersection box.
const BOX: f64 = 7.0;
const ARM: f64 = 57.0;

fn lane(id: &str, lane_type: LaneType, left: [Point; 2], right: [Point; 2]) -> LaneRecord {
    LaneRecord {
        id: id.into(),
        lane_type,
        left_boundary: left.to_vec(),
        right_boundary: right.to_vec(),
        left_neighbor: None,
        right_neighbor: None,
        successors: vec![],
        is_intersection: false,
    }
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Point> {
    vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
}

fn link(lanes: &mut [LaneRecord], id: &str, f: impl FnOnce(&mut LaneRecord)) {
    f(lanes.iter_mut().find(|l| l.id == id).expect("template lane"))
}

/// A 200 m road along +x: bike lane, eastbound lane, eastbound bus lane and a
/// westbound lane, with one crosswalk.
pub fn straight_road() -> MapFile {
    let (x0, x1) = (-50.0, 150.0);
    let mut lanes = vec![
        lane("BK", LaneType::Bike, [[x0, -3.5], [x1, -3.5]], [[x0, -5.0], [x1, -5.0]]),
        lane("E1", LaneType::Vehicle, [[x0, 0.0], [x1, 0.0]], [[x0, -3.5], [x1, -3.5]]),
        lane("E2", LaneType::Bus, [[x0, 3.5], [x1, 3.5]], [[x0, 0.0], [x1, 0.0]]),
        lane("W1", LaneType::Vehicle, [[x1, 3.5], [x0, 3.5]], [[x1, 7.0], [x0, 7.0]]),
    ];
    link(&mut lanes, "BK", |l| l.left_neighbor = Some("E1".into()));
    link(&mut lanes, "E1", |l| {
        l.right_neighbor = Some("BK".into());
        l.left_neighbor = Some("E2".into());
    });
    link(&mut lanes, "E2", |l| {
        l.right_neighbor = Some("E1".into());
        l.left_neighbor = Some("W1".into());
    });
    link(&mut lanes, "W1", |l| l.left_neighbor = Some("E2".into()));
    MapFile {
        lanes,
        crossings: vec![PedestrianCrossing { id: "C1".into(), polygon: rect(60.0, -5.0, 64.0, 7.0) }],
        stop_signs: vec![],
        drivable: vec![rect(x0, -3.5, x1, 7.0)],
    }
}

/// A four-way junction centered on the origin. Each arm has one inbound and one
/// outbound lane; straight-through lanes cross the box; every inbound lane
/// has a stop sign and a crosswalk. The south inbound lane is a bus lane.
pub fn intersection() -> MapFile {
    let (b, a, w) = (BOX, ARM, LANE_WIDTH);
    let v = LaneType::Vehicle;
    let mut lanes = vec![
        // West arm.
        lane("WI", v, [[-a, 0.0], [-b, 0.0]], [[-a, -w], [-b, -w]]),
        lane("WO", v, [[-b, 0.0], [-a, 0.0]], [[-b, w], [-a, w]]),
        // East arm.
        lane("EO", v, [[b, 0.0], [a, 0.0]], [[b, -w], [a, -w]]),
        lane("EI", v, [[a, 0.0], [b, 0.0]], [[a, w], [b, w]]),
        // South arm.
        lane("SI", LaneType::Bus, [[0.0, -a], [0.0, -b]], [[w, -a], [w, -b]]),
        lane("SO", v, [[0.0, -b], [0.0, -a]], [[-w, -b], [-w, -a]]),
        // North arm.
        lane("NO", v, [[0.0, b], [0.0, a]], [[w, b], [w, a]]),
        lane("NI", v, [[0.0, a], [0.0, b]], [[-w, a], [-w, b]]),
        // Through lanes.
        lane("X_EB", v, [[-b, 0.0], [b, 0.0]], [[-b, -w], [b, -w]]),
        lane("X_WB", v, [[b, 0.0], [-b, 0.0]], [[b, w], [-b, w]]),
        lane("X_NB", v, [[0.0, -b], [0.0, b]], [[w, -b], [w, b]]),
        lane("X_SB", v, [[0.0, b], [0.0, -b]], [[-w, b], [-w, -b]]),
    ];
    for (inbound, through, outbound) in [("WI", "X_EB", "EO"), ("EI", "X_WB", "WO"), ("SI", "X_NB", "NO"), ("NI", "X_SB", "SO")] {
        link(&mut lanes, inbound, |l| l.successors = vec![through.into()]);
        link(&mut lanes, through, |l| {
            l.successors = vec![outbound.into()];
            l.is_intersection = true;
        });
    }
    for (x, y) in [("WI", "WO"), ("EI", "EO"), ("SI", "SO"), ("NI", "NO")] {
        link(&mut lanes, x, |l| l.left_neighbor = Some(y.into()));
        link(&mut lanes, y, |l| l.left_neighbor = Some(x.into()));
    }
    let sign = |id: &str, position: Point, facing_yaw: f64, lane: &str| StopSign {
        id: id.into(),
        position,
        facing_yaw,
        controlled_lane_ids: vec![lane.into()],
    };
    let drivable = vec![vec![
        [-a, -w],
        [-w, -w],
        [-w, -a],
        [w, -a],
        [w, -w],
        [a, -w],
        [a, w],
        [w, w],
        [w, a],
        [-w, a],
        [-w, w],
        [-a, w],
    ]];
    MapFile {
        lanes,
        crossings: vec![
            PedestrianCrossing { id: "CW".into(), polygon: rect(-11.0, -5.0, -8.0, 5.0) },
            PedestrianCrossing { id: "CE".into(), polygon: rect(8.0, -5.0, 11.0, 5.0) },
            PedestrianCrossing { id: "CS".into(), polygon: rect(-5.0, -11.0, 5.0, -8.0) },
            PedestrianCrossing { id: "CN".into(), polygon: rect(-5.0, 8.0, 5.0, 11.0) },
        ],
        stop_signs: vec![
            sign("SW", [-8.0, -4.5], PI, "WI"),
            sign("SE", [8.0, 4.5], 0.0, "EI"),
            sign("SS", [4.5, -8.0], -FRAC_PI_2, "SI"),
            sign("SN", [-4.5, 8.0], FRAC_PI_2, "NI"),
        ],
        drivable,
    }
}

pub fn template(id: &str) -> Result<MapFile> {
    match id {
        "straight_road" => Ok(straight_road()),
        "intersection" => Ok(intersection()),
        other => Err(Error::InvalidArgument(format!(
            "unknown map template {other:?}; expected one of {}",
            TEMPLATES.join(", ")
        ))),
    }
}

/// Straight path that starts at `lane` and follows first successors.
pub fn lane_path(map: &MapFile, lane: &str) -> Result<Vec<Point>> {
    let find = |id: &str| {
        map.lanes
            .iter()
            .find(|l| l.id == id)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown lane {id:?}")))
    };
    let mut rec = find(lane)?;
    let mid = |r: &LaneRecord, i: usize| {
        let (l, q) = (r.left_boundary[i], r.right_boundary[i]);
        [(l[0] + q[0]) / 2.0, (l[1] + q[1]) / 2.0]
    };
    let mut path = vec![mid(rec, 0), mid(rec, 1)];
    let mut seen = vec![rec.id.as_str()];
    while let Some(next) = rec.successors.first() {
        if seen.contains(&next.as_str()) {
            break;
        }
        rec = find(next)?;
        seen.push(&rec.id);
        path.push(mid(rec, 1));
    }
    Ok(path)
}
