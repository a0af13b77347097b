//! HD-map model and the planar queries the map predicates are built on.
//!
//! All map geometry is 2D city-frame meters. Lane polygons are closed: a point on
//! the boundary belongs to the lane.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, Point, Rigid2};
use crate::track::normalize_angle;

/// Spacing of the boundary resampling used to derive centerlines.
pub const CENTERLINE_SPACING: f64 = 0.5;
/// Two centerline distances closer than this are a tie in lane assignment.
pub const TIE_EPS: f64 = 1e-9;
/// Half-length of the chord used to estimate centerline tangents.
const TANGENT_HALF_CHORD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LaneType {
    Vehicle,
    Bus,
    Bike,
}

impl LaneType {
    pub const NAMES: [&'static str; 3] = ["BUS", "VEHICLE", "BIKE"];
}

impl FromStr for LaneType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "VEHICLE" => Ok(LaneType::Vehicle),
            "BUS" => Ok(LaneType::Bus),
            "BIKE" => Ok(LaneType::Bike),
            other => Err(Error::InvalidArgument(format!(
                "unknown lane type {other:?}; expected one of BUS, VEHICLE, BIKE"
            ))),
        }
    }
}

impl fmt::Display for LaneType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LaneType::Vehicle => "VEHICLE",
            LaneType::Bus => "BUS",
            LaneType::Bike => "BIKE",
        })
    }
}

/// Lane record as stored in the map file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneRecord {
    pub id: String,
    pub lane_type: LaneType,
    pub left_boundary: Vec<Point>,
    pub right_boundary: Vec<Point>,
    #[serde(default)]
    pub left_neighbor: Option<String>,
    #[serde(default)]
    pub right_neighbor: Option<String>,
    #[serde(default)]
    pub successors: Vec<String>,
    #[serde(default)]
    pub is_intersection: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PedestrianCrossing {
    pub id: String,
    pub polygon: Vec<Point>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopSign {
    pub id: String,
    pub position: Point,
    /// Direction the sign face points, toward approaching traffic.
    pub facing_yaw: f64,
    #[serde(default)]
    pub controlled_lane_ids: Vec<String>,
}

/// The on-disk map document.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MapFile {
    #[serde(default)]
    pub lanes: Vec<LaneRecord>,
    #[serde(default)]
    pub crossings: Vec<PedestrianCrossing>,
    #[serde(default)]
    pub stop_signs: Vec<StopSign>,
    #[serde(default)]
    pub drivable: Vec<Vec<Point>>,
}

#[derive(Debug, Clone)]
pub struct LaneSegment {
    pub record: LaneRecord,
    pub centerline: Vec<Point>,
    /// Left boundary followed by the reversed right boundary.
    pub polygon: Vec<Point>,
    bbox: [f64; 4],
    length: f64,
}

impl LaneSegment {
    fn build(record: LaneRecord) -> Result<Self> {
        if record.left_boundary.len() < 2 || record.right_boundary.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "lane {} needs at least two points per boundary",
                record.id
            )));
        }
        let mut polygon = record.left_boundary.clone();
        polygon.extend(record.right_boundary.iter().rev().copied());
        if !geometry::is_simple(&polygon) {
            return Err(Error::InvalidArgument(format!("lane {} boundary polygon is not simple", record.id)));
        }
        let centerline = derive_centerline(&record.left_boundary, &record.right_boundary);
        let bbox = bounding_box(&polygon);
        let length = geometry::polyline_length(&centerline);
        Ok(LaneSegment { record, centerline, polygon, bbox, length })
    }

    pub fn id(&self) -> &str {
        &self.record.id
    }

    pub fn lane_type(&self) -> LaneType {
        self.record.lane_type
    }

    pub fn is_intersection(&self) -> bool {
        self.record.is_intersection
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn contains(&self, p: Point) -> bool {
        in_bbox(&self.bbox, p, geometry::BOUNDARY_EPS) && geometry::polygon_contains(&self.polygon, p)
    }

    pub fn centerline_distance(&self, p: Point) -> f64 {
        geometry::polyline_distance(&self.centerline, p)
    }

    /// Unit tangent of the centerline at arclength `s`.
    pub fn direction_at(&self, s: f64) -> Point {
        let h = TANGENT_HALF_CHORD.min(self.length / 2.0);
        let lo = (s - h).clamp(0.0, self.length - 2.0 * h);
        let a = geometry::point_at_arclength(&self.centerline, lo);
        let b = geometry::point_at_arclength(&self.centerline, lo + 2.0 * h);
        geometry::unit(geometry::sub(b, a)).unwrap_or([1.0, 0.0])
    }

    /// Unit tangent at the projection of `p` onto the centerline.
    pub fn direction_near(&self, p: Point) -> Point {
        self.direction_at(geometry::project_arclength(&self.centerline, p))
    }
}

/// Average of matching samples of both boundaries after uniform resampling.
fn derive_centerline(left: &[Point], right: &[Point]) -> Vec<Point> {
    let longest = geometry::polyline_length(left).max(geometry::polyline_length(right));
    let count = ((longest / CENTERLINE_SPACING).ceil() as usize + 1).max(2);
    let l = geometry::resample_uniform(left, count);
    let r = geometry::resample_uniform(right, count);
    l.iter().zip(&r).map(|(a, b)| [(a[0] + b[0]) * 0.5, (a[1] + b[1]) * 0.5]).collect()
}

fn bounding_box(poly: &[Point]) -> [f64; 4] {
    poly.iter().fold(
        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        |b, p| [b[0].min(p[0]), b[1].min(p[1]), b[2].max(p[0]), b[3].max(p[1])],
    )
}

fn in_bbox(b: &[f64; 4], p: Point, pad: f64) -> bool {
    p[0] >= b[0] - pad && p[0] <= b[2] + pad && p[1] >= b[1] - pad && p[1] <= b[3] + pad
}

fn bbox_distance(b: &[f64; 4], p: Point) -> f64 {
    let dx = (b[0] - p[0]).max(p[0] - b[2]).max(0.0);
    let dy = (b[1] - p[1]).max(p[1] - b[3]).max(0.0);
    dx.hypot(dy)
}

/// A polygon layer with per-polygon bounding boxes.
#[derive(Debug, Clone, Default)]
pub struct PolygonLayer {
    polygons: Vec<Vec<Point>>,
    boxes: Vec<[f64; 4]>,
}

impl PolygonLayer {
    pub fn new(polygons: Vec<Vec<Point>>) -> Self {
        let boxes = polygons.iter().map(|p| bounding_box(p)).collect();
        PolygonLayer { polygons, boxes }
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn polygons(&self) -> &[Vec<Point>] {
        &self.polygons
    }

    /// 0 inside any polygon (boundary included), else distance to the nearest
    /// boundary, `+inf` for an empty layer.
    pub fn distance(&self, p: Point) -> f64 {
        let mut best = f64::INFINITY;
        for (poly, b) in self.polygons.iter().zip(&self.boxes) {
            if bbox_distance(b, p) >= best {
                continue;
            }
            best = best.min(geometry::polygon_distance(poly, p));
            if best == 0.0 {
                break;
            }
        }
        best
    }

    pub fn contains(&self, p: Point) -> bool {
        self.distance(p) == 0.0
    }
}

/// Free-standing form of [`PolygonLayer::distance`].
pub fn distance_to_layer(p: Point, layer: &[Vec<Point>]) -> f64 {
    layer.iter().map(|poly| geometry::polygon_distance(poly, p)).fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone)]
pub struct HdMap {
    lanes: BTreeMap<String, LaneSegment>,
    crossings: Vec<PedestrianCrossing>,
    stop_signs: Vec<StopSign>,
    crossing_layer: PolygonLayer,
    drivable_layer: PolygonLayer,
    intersection_layer: PolygonLayer,
    source: MapFile,
}

impl Default for HdMap {
    fn default() -> Self {
        HdMap::from_file(MapFile::default()).expect("empty map is valid")
    }
}

impl HdMap {
    pub fn from_file(file: MapFile) -> Result<Self> {
        let mut lanes = BTreeMap::new();
        for rec in &file.lanes {
            if lanes.contains_key(&rec.id) {
                return Err(Error::InvalidArgument(format!("duplicate lane id {}", rec.id)));
            }
            lanes.insert(rec.id.clone(), LaneSegment::build(rec.clone())?);
        }
        for lane in lanes.values() {
            let r = &lane.record;
            let refs = r.left_neighbor.iter().chain(&r.right_neighbor).chain(&r.successors);
            for id in refs {
                if !lanes.contains_key(id) {
                    return Err(Error::InvalidArgument(format!("lane {} references unknown lane {id}", r.id)));
                }
            }
        }
        for c in &file.crossings {
            if !geometry::is_simple(&c.polygon) || geometry::signed_area(&c.polygon).abs() <= 0.0 {
                return Err(Error::InvalidArgument(format!("crossing {} polygon is degenerate", c.id)));
            }
        }
        for (i, poly) in file.drivable.iter().enumerate() {
            if !geometry::is_simple(poly) {
                return Err(Error::InvalidArgument(format!("drivable polygon {i} is not simple")));
            }
        }
        let mut stop_signs = file.stop_signs.clone();
        for s in &mut stop_signs {
            s.facing_yaw = normalize_angle(s.facing_yaw);
            for id in &s.controlled_lane_ids {
                if !lanes.contains_key(id) {
                    return Err(Error::InvalidArgument(format!("stop sign {} controls unknown lane {id}", s.id)));
                }
            }
        }
        let crossing_layer = PolygonLayer::new(file.crossings.iter().map(|c| c.polygon.clone()).collect());
        let drivable_layer = PolygonLayer::new(file.drivable.clone());
        let intersection_layer = PolygonLayer::new(
            lanes.values().filter(|l| l.is_intersection()).map(|l| l.polygon.clone()).collect(),
        );
        Ok(HdMap {
            lanes,
            crossings: file.crossings.clone(),
            stop_signs,
            crossing_layer,
            drivable_layer,
            intersection_layer,
            source: file,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: MapFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        HdMap::from_file(file).map_err(|e| Error::Config { path: path.to_owned(), message: e.to_string() })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.source).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn source(&self) -> &MapFile {
        &self.source
    }

    /// Rebuilds the map with every coordinate moved by `tf`.
    pub fn transformed(&self, tf: &Rigid2) -> Result<Self> {
        let mv = |pts: &[Point]| pts.iter().map(|p| tf.apply(*p)).collect::<Vec<_>>();
        let mut file = self.source.clone();
        for l in &mut file.lanes {
            l.left_boundary = mv(&l.left_boundary);
            l.right_boundary = mv(&l.right_boundary);
        }
        for c in &mut file.crossings {
            c.polygon = mv(&c.polygon);
        }
        for s in &mut file.stop_signs {
            s.position = tf.apply(s.position);
            s.facing_yaw = normalize_angle(s.facing_yaw + tf.yaw);
        }
        for d in &mut file.drivable {
            *d = mv(d);
        }
        HdMap::from_file(file)
    }

    pub fn lanes(&self) -> impl Iterator<Item = &LaneSegment> {
        self.lanes.values()
    }

    pub fn lane(&self, id: &str) -> Option<&LaneSegment> {
        self.lanes.get(id)
    }

    pub fn crossings(&self) -> &[PedestrianCrossing] {
        &self.crossings
    }

    pub fn stop_signs(&self) -> &[StopSign] {
        &self.stop_signs
    }

    pub fn crossing_layer(&self) -> &PolygonLayer {
        &self.crossing_layer
    }

    pub fn drivable_layer(&self) -> &PolygonLayer {
        &self.drivable_layer
    }

    /// Union of intersection-lane polygons.
    pub fn intersection_layer(&self) -> &PolygonLayer {
        &self.intersection_layer
    }

    /// The lane containing `p`. Overlaps resolve to the nearest centerline, then the
    /// smallest id.
    pub fn assign_lane(&self, p: Point) -> Option<&LaneSegment> {
        let mut best: Option<(f64, &LaneSegment)> = None;
        for lane in self.lanes.values() {
            if !lane.contains(p) {
                continue;
            }
            let d = lane.centerline_distance(p);
            match best {
                Some((bd, _)) if d >= bd - TIE_EPS => {}
                _ => best = Some((d, lane)),
            }
        }
        best.map(|(_, l)| l)
    }

    /// The lane whose polygon is nearest to `p` within `max_distance`; ties by id.
    pub fn nearest_lane(&self, p: Point, max_distance: f64) -> Option<&LaneSegment> {
        let mut best: Option<(f64, &LaneSegment)> = None;
        for lane in self.lanes.values() {
            if bbox_distance(&lane.bbox, p) > max_distance {
                continue;
            }
            let d = geometry::polygon_distance(&lane.polygon, p);
            if d > max_distance {
                continue;
            }
            match best {
                Some((bd, _)) if d >= bd - TIE_EPS => {}
                _ => best = Some((d, lane)),
            }
        }
        best.map(|(_, l)| l)
    }

    /// Unit centerline tangent of `lane_id` at arclength `s`.
    pub fn lane_direction(&self, lane_id: &str, s: f64) -> Result<Point> {
        self.lanes
            .get(lane_id)
            .map(|l| l.direction_at(s))
            .ok_or_else(|| Error::NotFound(format!("lane {lane_id}")))
    }

    /// True when `a == b` or either lane is a direct successor of the other.
    pub fn lanes_connected(&self, a: &str, b: &str) -> bool {
        a == b || self.is_successor(a, b) || self.is_successor(b, a)
    }

    /// True when `next` is listed as a successor of `lane`.
    pub fn is_successor(&self, lane: &str, next: &str) -> bool {
        self.lanes.get(lane).is_some_and(|l| l.record.successors.iter().any(|s| s == next))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(id: &str, y0: f64, y1: f64, len: f64) -> LaneRecord {
        LaneRecord {
            id: id.into(),
            lane_type: LaneType::Vehicle,
            left_boundary: vec![[0.0, y1], [len, y1]],
            right_boundary: vec![[0.0, y0], [len, y0]],
            left_neighbor: None,
            right_neighbor: None,
            successors: vec![],
            is_intersection: false,
        }
    }

    fn two_lane() -> HdMap {
        HdMap::from_file(MapFile {
            lanes: vec![straight("L1", -3.5, 0.0, 100.0), straight("L2", 0.0, 3.5, 100.0)],
            crossings: vec![PedestrianCrossing {
                id: "C1".into(),
                polygon: vec![[40.0, -3.5], [44.0, -3.5], [44.0, 3.5], [40.0, 3.5]],
            }],
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn assigns_containing_lane() {
        let m = two_lane();
        assert_eq!(m.assign_lane([10.0, -2.0]).unwrap().id(), "L1");
        assert_eq!(m.assign_lane([10.0, 2.0]).unwrap().id(), "L2");
        assert!(m.assign_lane([0.0, 50.0]).is_none());
    }

    #[test]
    fn shared_boundary_tie_goes_to_smallest_id() {
        let m = two_lane();
        assert_eq!(m.assign_lane([10.0, 0.0]).unwrap().id(), "L1");
    }

    #[test]
    fn layer_distance() {
        let m = two_lane();
        assert_eq!(m.crossing_layer().distance([42.0, 0.0]), 0.0);
        assert!((m.crossing_layer().distance([37.0, 0.0]) - 3.0).abs() < 1e-6);
        assert_eq!(PolygonLayer::default().distance([0.0, 0.0]), f64::INFINITY);
        assert_eq!(distance_to_layer([0.0, 0.0], &[]), f64::INFINITY);
    }

    #[test]
    fn straight_lane_direction() {
        let m = two_lane();
        assert_eq!(m.lane_direction("L1", 0.0).unwrap(), [1.0, 0.0]);
        assert_eq!(m.lane_direction("L1", 100.0).unwrap(), [1.0, 0.0]);
        assert!(matches!(m.lane_direction("nope", 0.0), Err(Error::NotFound(_))));
    }

    #[test]
    fn arc_lane_direction_at_midpoint() {
        // Left-turning quarter arc of radius 20 around (0, 20), lane width 3.5.
        let arc = |r: f64| -> Vec<Point> {
            (0..=90).map(|i| {
                let th = (i as f64).to_radians();
                [r * th.sin(), 20.0 - r * th.cos()]
            })
            .collect()
        };
        let rec = LaneRecord {
            left_boundary: arc(18.25),
            right_boundary: arc(21.75),
            ..straight("A", 0.0, 1.0, 1.0)
        };
        let m = HdMap::from_file(MapFile { lanes: vec![rec], ..Default::default() }).unwrap();
        let lane = m.lane("A").unwrap();
        let d = m.lane_direction("A", lane.length() / 2.0).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d[0] - h).abs() < 1e-6 && (d[1] - h).abs() < 1e-6, "{d:?}");
    }

    #[test]
    fn rejects_dangling_neighbor_and_bad_polygon() {
        let mut l = straight("L1", 0.0, 1.0, 10.0);
        l.left_neighbor = Some("X".into());
        assert!(HdMap::from_file(MapFile { lanes: vec![l], ..Default::default() }).is_err());
        let mut twisted = straight("L1", 0.0, 1.0, 10.0);
        twisted.right_boundary.reverse();
        assert!(HdMap::from_file(MapFile { lanes: vec![twisted], ..Default::default() }).is_err());
    }
}
