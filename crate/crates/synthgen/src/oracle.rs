//! A brute-force reference implementation of the atomic predicates.
//!
//! Everything here is computed from the raw map records and boxes with its
//! own geometry: winding-number containment, vertex-averaged lane midlines,
//! its own smoothing and differencing, and set algebra over explicit
//! `(id, t)` / `(id, related, t)` tuples. Every relational predicate walks every
//! (candidate, related, timestamp) triple of the log. It is slow on purpose and
//! exists to be compared against [`scenemine_core::LogEngine`].

use std::collections::BTreeSet;
use std::f64::consts::PI;

use scenemine_core::map::{LaneType, MapFile};
use scenemine_core::registry::{self, Args};
use scenemine_core::{CategoryQuery, Color, EngineConfig, Error, LogBundle, PredicateEngine, Result};
use scenemine_core::{ScenarioSet, Timestamp, Track};

type P = [f64; 2];

const EPS: f64 = 1e-9;
const MOVING: f64 = 0.5;
const STATIONARY_SPREAD: f64 = 2.0;
const FOLLOW_ANGLE: f64 = 45.0;
const SIGN_RADIUS: f64 = 15.0;
const SIDE_SEARCH: f64 = 10.0;

/// A scenario set as explicit tuples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Tuples {
    pairs: BTreeSet<(String, Timestamp)>,
    triples: BTreeSet<(String, String, Timestamp)>,
}

impl Tuples {
    fn of(s: &ScenarioSet) -> Self {
        Tuples {
            pairs: s.pairs().map(|(id, t)| (id.to_owned(), t)).collect(),
            triples: s.triples().map(|(k, r, t)| (k.to_owned(), r.to_owned(), t)).collect(),
        }
    }

    fn has(&self, id: &str, t: Timestamp) -> bool {
        self.pairs.contains(&(id.to_owned(), t))
    }

    fn ids(&self) -> BTreeSet<&str> {
        self.pairs.iter().map(|(id, _)| id.as_str()).collect()
    }

    /// Drops relationship triples whose `(id, t)` is not a pair.
    fn closed(mut self) -> Self {
        let pairs = &self.pairs;
        self.triples.retain(|(k, _, t)| pairs.contains(&(k.clone(), *t)));
        self
    }

    fn into_set(self) -> ScenarioSet {
        let mut out = ScenarioSet::new();
        for (id, t) in &self.pairs {
            out.insert(id, *t);
        }
        for (k, r, t) in &self.triples {
            assert!(self.pairs.contains(&(k.clone(), *t)), "relationship outside its entry");
            out.insert_related(k, r, *t);
        }
        out
    }
}

fn minus(a: P, b: P) -> P {
    [a[0] - b[0], a[1] - b[1]]
}

fn dotp(a: P, b: P) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn crossp(a: P, b: P) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn len(a: P) -> f64 {
    (a[0] * a[0] + a[1] * a[1]).sqrt()
}

fn degrees_between(a: P, b: P) -> f64 {
    crossp(a, b).atan2(dotp(a, b)).abs() * 180.0 / PI
}

fn point_segment(p: P, a: P, b: P) -> f64 {
    let ab = minus(b, a);
    let l2 = dotp(ab, ab);
    let u = if l2 > 0.0 { (dotp(minus(p, a), ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    len(minus(p, [a[0] + u * ab[0], a[1] + u * ab[1]]))
}

fn ring_distance(poly: &[P], p: P) -> f64 {
    (0..poly.len()).map(|i| point_segment(p, poly[i], poly[(i + 1) % poly.len()])).fold(f64::INFINITY, f64::min)
}

fn winding(poly: &[P], p: P) -> i32 {
    let mut w = 0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        let side = crossp(minus(b, a), minus(p, a));
        if a[1] <= p[1] {
            if b[1] > p[1] && side > 0.0 {
                w += 1;
            }
        } else if b[1] <= p[1] && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// 0 inside or on the boundary of the polygon, else distance to it.
fn area_distance(poly: &[P], p: P) -> f64 {
    if poly.len() < 3 {
        return f64::INFINITY;
    }
    if winding(poly, p) != 0 {
        return 0.0;
    }
    let d = ring_distance(poly, p);
    if d <= EPS {
        0.0
    } else {
        d
    }
}

fn layer_distance<'a>(polys: impl IntoIterator<Item = &'a Vec<P>>, p: P) -> f64 {
    polys.into_iter().map(|poly| area_distance(poly, p)).fold(f64::INFINITY, f64::min)
}

struct Lane {
    id: String,
    lane_type: LaneType,
    polygon: Vec<P>,
    midline: Vec<P>,
    left: Option<String>,
    right: Option<String>,
    successors: Vec<String>,
    is_intersection: bool,
}

fn midline(left: &[P], right: &[P]) -> Vec<P> {
    let n = left.len().max(right.len()).max(2);
    let at = |line: &[P], i: usize| -> P {
        if line.len() == n {
            return line[i];
        }
        // Uniform arclength resampling for boundaries of unequal vertex counts.
        let total: f64 = line.windows(2).map(|w| len(minus(w[1], w[0]))).sum();
        let mut s = total * i as f64 / (n - 1) as f64;
        for w in line.windows(2) {
            let l = len(minus(w[1], w[0]));
            if s <= l && l > 0.0 {
                let u = s / l;
                return [w[0][0] + u * (w[1][0] - w[0][0]), w[0][1] + u * (w[1][1] - w[0][1])];
            }
            s -= l;
        }
        line[line.len() - 1]
    };
    (0..n)
        .map(|i| {
            let (a, b) = (at(left, i), at(right, i));
            [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
        })
        .collect()
}

impl Lane {
    fn contains(&self, p: P) -> bool {
        area_distance(&self.polygon, p) == 0.0
    }

    fn midline_distance(&self, p: P) -> f64 {
        self.midline.windows(2).map(|w| point_segment(p, w[0], w[1])).fold(f64::INFINITY, f64::min)
    }

    /// Unit tangent of the midline segment nearest to `p`.
    fn direction(&self, p: P) -> P {
        let mut best = (f64::INFINITY, [1.0, 0.0]);
        for w in self.midline.windows(2) {
            let d = point_segment(p, w[0], w[1]);
            let v = minus(w[1], w[0]);
            let n = len(v);
            if d < best.0 && n > 0.0 {
                best = (d, [v[0] / n, v[1] / n]);
            }
        }
        best.1
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Motion {
    velocity: P,
    speed: f64,
    forward: f64,
    lateral: f64,
}

/// Centered moving average, then central differences (one-sided at the ends).
fn motion_states(track: &Track) -> Vec<Motion> {
    let n = track.boxes.len();
    if n == 1 {
        return vec![Motion::default()];
    }
    let t0 = track.boxes[0].timestamp.0;
    let time: Vec<f64> = track.boxes.iter().map(|b| (b.timestamp.0 - t0) as f64 * 1e-9).collect();
    let mut gaps: Vec<f64> = (1..n).map(|i| time[i] - time[i - 1]).collect();
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = gaps[gaps.len() / 2];
    let mut window = if median > 0.0 { ((0.5 / median - 1e-9).ceil() as usize).max(1) } else { 1 };
    if window % 2 == 0 {
        window += 1;
    }
    let mut smooth = vec![[0.0; 2]; n];
    for (i, out) in smooth.iter_mut().enumerate() {
        let h = (window / 2).min(i).min(n - 1 - i);
        let (mut sx, mut sy) = (0.0, 0.0);
        for b in &track.boxes[i - h..=i + h] {
            sx += b.translation[0];
            sy += b.translation[1];
        }
        let k = (2 * h + 1) as f64;
        *out = [sx / k, sy / k];
    }
    let diff = |v: &[P]| -> Vec<P> {
        (0..n)
            .map(|i| {
                let a = i.saturating_sub(1);
                let b = (i + 1).min(n - 1);
                let dt = time[b] - time[a];
                [(v[b][0] - v[a][0]) / dt, (v[b][1] - v[a][1]) / dt]
            })
            .collect()
    };
    let vel = diff(&smooth);
    let acc = diff(&vel);
    track
        .boxes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (s, c) = b.yaw.sin_cos();
            Motion {
                velocity: vel[i],
                speed: vel[i][0].hypot(vel[i][1]),
                forward: acc[i][0] * c + acc[i][1] * s,
                lateral: -acc[i][0] * s + acc[i][1] * c,
            }
        })
        .collect()
}

/// Per-track facts, computed up front.
struct Facts {
    motion: Vec<Motion>,
    lane: Vec<Option<usize>>,
    road: Vec<Option<P>>,
}

pub struct Oracle<'a> {
    bundle: &'a LogBundle,
    config: EngineConfig,
    map: &'a MapFile,
    lanes: Vec<Lane>,
    facts: Vec<Facts>,
    times: Vec<Timestamp>,
}

impl<'a> Oracle<'a> {
    pub fn new(bundle: &'a LogBundle, config: EngineConfig) -> Self {
        let map = bundle.map.source();
        let mut lanes: Vec<Lane> = map
            .lanes
            .iter()
            .map(|r| {
                let mut polygon = r.left_boundary.clone();
                polygon.extend(r.right_boundary.iter().rev());
                Lane {
                    id: r.id.clone(),
                    lane_type: r.lane_type,
                    polygon,
                    midline: midline(&r.left_boundary, &r.right_boundary),
                    left: r.left_neighbor.clone(),
                    right: r.right_neighbor.clone(),
                    successors: r.successors.clone(),
                    is_intersection: r.is_intersection,
                }
            })
            .collect();
        lanes.sort_by(|a, b| a.id.cmp(&b.id));
        let mut times: BTreeSet<Timestamp> = bundle.ego.iter().map(|p| p.timestamp).collect();
        times.extend(bundle.tracks.iter().flat_map(|t| t.boxes.iter().map(|b| b.timestamp)));
        let mut oracle =
            Oracle { bundle, config, map, lanes, facts: Vec::new(), times: times.into_iter().collect() };
        oracle.facts = bundle
            .tracks
            .iter()
            .map(|t| {
                let lane: Vec<Option<usize>> = t.boxes.iter().map(|b| oracle.lane_at(b.xy())).collect();
                let road = t
                    .boxes
                    .iter()
                    .zip(&lane)
                    .map(|(b, l)| {
                        let p = b.xy();
                        l.or_else(|| oracle.nearest_lane(p)).map(|i| oracle.lanes[i].direction(p))
                    })
                    .collect();
                Facts { motion: motion_states(t), lane, road }
            })
            .collect();
        oracle
    }

    fn lane_at(&self, p: P) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, lane) in self.lanes.iter().enumerate() {
            if lane.contains(p) {
                let d = lane.midline_distance(p);
                if best.is_none_or(|(bd, _)| d < bd - EPS) {
                    best = Some((d, i));
                }
            }
        }
        best.map(|b| b.1)
    }

    fn nearest_lane(&self, p: P) -> Option<usize> {
        let mut best: Option<(f64, usize)> = None;
        for (i, lane) in self.lanes.iter().enumerate() {
            let d = area_distance(&lane.polygon, p);
            if d <= SIDE_SEARCH && best.is_none_or(|(bd, _)| d < bd - EPS) {
                best = Some((d, i));
            }
        }
        best.map(|b| b.1)
    }

    fn lane_by_id(&self, id: &str) -> Option<&Lane> {
        self.lanes.iter().find(|l| l.id == id)
    }

    fn successor(&self, from: usize, to: usize) -> bool {
        self.lanes[from].successors.contains(&self.lanes[to].id)
    }

    /// Index of track `id` and its box slot at `t`.
    fn at(&self, id: &str, t: Timestamp) -> Option<(usize, usize)> {
        let k = self.bundle.tracks.iter().position(|tr| tr.id == id)?;
        let slot = self.bundle.tracks[k].boxes.iter().position(|b| b.timestamp == t)?;
        Some((k, slot))
    }

    fn pos(&self, (k, s): (usize, usize)) -> P {
        self.bundle.tracks[k].boxes[s].xy()
    }

    fn motion(&self, (k, s): (usize, usize)) -> Motion {
        self.facts[k].motion[s]
    }

    fn lane_of(&self, (k, s): (usize, usize)) -> Option<usize> {
        self.facts[k].lane[s]
    }

    /// Candidate pairs kept per box; relationships survive at kept pairs.
    fn per_box(&self, cand: &Tuples, keep: impl Fn((usize, usize)) -> bool) -> Tuples {
        let pairs = cand.pairs.iter().filter(|(id, t)| self.at(id, *t).is_some_and(&keep)).cloned().collect();
        Tuples { pairs, triples: cand.triples.clone() }.closed()
    }

    /// Whole candidate tracks kept.
    fn per_track(&self, cand: &Tuples, keep: impl Fn(&Track) -> bool) -> Tuples {
        let ok = |id: &str| self.bundle.tracks.iter().find(|t| t.id == id).is_some_and(&keep);
        Tuples {
            pairs: cand.pairs.iter().filter(|(id, _)| ok(id)).cloned().collect(),
            triples: cand.triples.iter().filter(|(id, _, _)| ok(id)).cloned().collect(),
        }
    }

    /// Candidate pairs kept where the track's own per-box marks are set.
    fn per_mark(&self, cand: &Tuples, marks: impl Fn(usize) -> Vec<bool>) -> Tuples {
        let marked: Vec<Vec<bool>> = (0..self.bundle.tracks.len()).map(marks).collect();
        self.per_box(cand, |(k, s)| marked[k][s])
    }

    /// Every (candidate, related, t) triple of the log accepted by `relate`.
    fn triples(&self, cand: &Tuples, rel: &Tuples, relate: impl Fn((usize, usize), (usize, usize)) -> bool) -> Tuples {
        let mut out = Tuples::default();
        for c in &self.bundle.tracks {
            for r in &self.bundle.tracks {
                if c.id == r.id {
                    continue;
                }
                for t in &self.times {
                    if !cand.has(&c.id, *t) || !rel.has(&r.id, *t) {
                        continue;
                    }
                    let (Some(co), Some(ro)) = (self.at(&c.id, *t), self.at(&r.id, *t)) else { continue };
                    if relate(co, ro) {
                        out.pairs.insert((c.id.clone(), *t));
                        out.triples.insert((c.id.clone(), r.id.clone(), *t));
                    }
                }
            }
        }
        out
    }

    /// For each candidate observation, the related observations at the same time.
    fn neighbourhoods(&self, cand: &Tuples, rel: &Tuples) -> Vec<((usize, usize), Timestamp, Vec<(usize, usize)>)> {
        let mut out = Vec::new();
        for c in &self.bundle.tracks {
            for t in &self.times {
                if !cand.has(&c.id, *t) {
                    continue;
                }
                let Some(co) = self.at(&c.id, *t) else { continue };
                let others = self
                    .bundle
                    .tracks
                    .iter()
                    .filter(|r| rel.has(&r.id, *t))
                    .filter_map(|r| self.at(&r.id, *t))
                    .collect();
                out.push((co, *t, others));
            }
        }
        out
    }

    fn id(&self, (k, _): (usize, usize)) -> &str {
        &self.bundle.tracks[k].id
    }

    fn evaluate(&self, f: &str, a: &Args) -> Result<Tuples> {
        let cand = || a.scenario("track_candidates").map(Tuples::of);
        let rel = || a.scenario("related_candidates").map(Tuples::of);
        let num = |n: &str| a.number(n);
        let within = |v: f64, lo: f64, hi: f64| lo <= v && v <= hi;
        let ordered = |lo: f64, hi: f64| {
            if lo > hi || lo.is_nan() || hi.is_nan() {
                Err(Error::InvalidArgument(format!("{lo} > {hi}")))
            } else {
                Ok(())
            }
        };
        Ok(match f {
            "get_objects_of_category" => {
                let q: CategoryQuery = a.text("category")?.parse()?;
                let mut out = Tuples::default();
                for t in self.bundle.tracks.iter().filter(|t| q.matches(t.category)) {
                    out.pairs.extend(t.boxes.iter().map(|b| (t.id.clone(), b.timestamp)));
                }
                out
            }
            "is_category" => {
                let q: CategoryQuery = a.text("category")?.parse()?;
                self.per_track(&cand()?, |t| q.matches(t.category))
            }
            "has_velocity" => {
                let (lo, hi) = (num("min_velocity")?, num("max_velocity")?);
                ordered(lo, hi)?;
                self.per_box(&cand()?, |o| within(self.motion(o).speed, lo, hi))
            }
            "accelerating" | "has_lateral_acceleration" => {
                let (lo, hi) = (num("min_accel")?, num("max_accel")?);
                ordered(lo, hi)?;
                let lateral = f == "has_lateral_acceleration";
                self.per_box(&cand()?, |o| {
                    let m = self.motion(o);
                    within(if lateral { m.lateral } else { m.forward }, lo, hi)
                })
            }
            "stationary" => self.per_track(&cand()?, |t| {
                let mut spread: f64 = 0.0;
                for a in &t.boxes {
                    for b in &t.boxes {
                        spread = spread.max(len(minus(a.xy(), b.xy())));
                    }
                }
                spread < STATIONARY_SPREAD
            }),
            "turning" => {
                let side = side(a.optional_text("direction")?)?;
                let span = (self.config.turning_window_s * 1e9).round() as i64;
                let thr = self.config.turning_min_yaw_change_rad;
                self.per_mark(&cand()?, |k| {
                    let boxes = &self.bundle.tracks[k].boxes;
                    // Heading accumulated relative to the first box.
                    let mut heading = vec![boxes[0].yaw];
                    for w in boxes.windows(2) {
                        let d = w[1].yaw - w[0].yaw;
                        let step = d.sin().atan2(d.cos());
                        heading.push(heading.last().unwrap() + step);
                    }
                    let mut marks = vec![false; boxes.len()];
                    for i in 0..boxes.len() {
                        for j in i + 1..boxes.len() {
                            if boxes[j].timestamp.0 - boxes[i].timestamp.0 > span {
                                continue;
                            }
                            let change = heading[j] - heading[i];
                            let hit = match side {
                                Some(true) => change > thr,
                                Some(false) => change < -thr,
                                None => change > thr || change < -thr,
                            };
                            if hit {
                                for m in &mut marks[i..=j] {
                                    *m = true;
                                }
                            }
                        }
                    }
                    marks
                })
            }
            "changing_lanes" => {
                let side = side(a.optional_text("direction")?)?;
                let dilation = (self.config.lane_change_dilation_s * 1e9).round() as i64;
                self.per_mark(&cand()?, |k| {
                    let boxes = &self.bundle.tracks[k].boxes;
                    let lanes = &self.facts[k].lane;
                    let mut events = Vec::new();
                    for i in 1..boxes.len() {
                        let (Some(from), Some(to)) = (lanes[i - 1], lanes[i]) else { continue };
                        if from == to {
                            continue;
                        }
                        let target = Some(&self.lanes[to].id);
                        let left = self.lanes[from].left.as_ref() == target;
                        let right = self.lanes[from].right.as_ref() == target;
                        if match side {
                            Some(true) => left,
                            Some(false) => right,
                            None => left || right,
                        } {
                            events.push(boxes[i].timestamp.0);
                        }
                    }
                    boxes.iter().map(|b| events.iter().any(|e| (b.timestamp.0 - e).abs() <= dilation)).collect()
                })
            }
            "at_pedestrian_crossing" => {
                let d = num("within_distance")?;
                self.per_box(&cand()?, |o| layer_distance(self.map.crossings.iter().map(|c| &c.polygon), self.pos(o)) <= d + EPS)
            }
            "on_lane_type" => {
                let wanted: LaneType = a.text("lane_type")?.parse()?;
                self.per_box(&Tuples::of(a.scenario("track_uuid")?), |o| {
                    self.lane_of(o).is_some_and(|l| self.lanes[l].lane_type == wanted)
                })
            }
            "near_intersection" | "on_intersection" => {
                let thr = if f == "near_intersection" { num("threshold")? } else { 0.0 };
                let cands = if f == "near_intersection" { Tuples::of(a.scenario("track_uuid")?) } else { cand()? };
                let polys: Vec<&Vec<P>> = self.lanes.iter().filter(|l| l.is_intersection).map(|l| &l.polygon).collect();
                self.per_box(&cands, |o| layer_distance(polys.iter().copied(), self.pos(o)) <= thr + EPS)
            }
            "at_stop_sign" => {
                let fwd = num("forward_thresh")?;
                self.per_box(&cand()?, |o| {
                    let Some(l) = self.lane_of(o) else { return false };
                    let p = self.pos(o);
                    self.map.stop_signs.iter().any(|s| {
                        let ahead = dotp(minus(p, s.position), [s.facing_yaw.cos(), s.facing_yaw.sin()]);
                        s.controlled_lane_ids.contains(&self.lanes[l].id)
                            && len(minus(p, s.position)) <= SIGN_RADIUS
                            && within(ahead, 0.0, fwd)
                    })
                })
            }
            "in_drivable_area" => self.per_box(&cand()?, |o| layer_distance(&self.map.drivable, self.pos(o)) == 0.0),
            "on_road" => self.per_box(&cand()?, |o| self.lane_of(o).is_some()),
            "is_color" => {
                let wanted = a.text("color")?;
                let c = cand()?;
                if !["white", "silver", "black", "red", "yellow", "blue"].contains(&wanted) {
                    c
                } else {
                    self.per_track(&c, |t| self.bundle.colors.get(&t.id) == wanted.parse::<Color>().unwrap())
                }
            }
            "facing_toward" => {
                let (angle, max) = (num("within_angle")?, num("max_distance")?);
                self.triples(&cand()?, &rel()?, |c, r| {
                    let yaw = self.bundle.tracks[c.0].boxes[c.1].yaw;
                    let d = minus(self.pos(r), self.pos(c));
                    let n = len(d);
                    n > 0.0 && n <= max && degrees_between([yaw.cos(), yaw.sin()], d) <= angle
                })
            }
            "heading_toward" => {
                let (angle, min_speed, max) = (num("angle_threshold")?, num("minimum_speed")?, num("max_distance")?);
                self.triples(&cand()?, &rel()?, |c, r| {
                    let v = self.motion(c).velocity;
                    let d = minus(self.pos(r), self.pos(c));
                    let n = len(d);
                    len(v) > 0.0 && n > 0.0 && n <= max && degrees_between(v, d) <= angle && dotp(v, d) / n >= min_speed
                })
            }
            "heading_in_relative_direction_to" => {
                let which = a.text("direction")?;
                if !["same", "perpendicular", "opposite"].contains(&which) {
                    return Err(Error::InvalidArgument(which.to_owned()));
                }
                self.triples(&cand()?, &rel()?, |c, r| {
                    let (mc, mr) = (self.motion(c), self.motion(r));
                    if mc.speed < MOVING || mr.speed < MOVING {
                        return false;
                    }
                    let deg = degrees_between(mc.velocity, mr.velocity);
                    match which {
                        "same" => deg < 45.0,
                        "perpendicular" => (45.0..135.0).contains(&deg),
                        _ => deg >= 135.0,
                    }
                })
            }
            "has_objects_in_relative_direction" | "get_objects_in_relative_direction" => {
                let dir = a.text("direction")?;
                let (min_n, max_n) = (num("min_number")?, num("max_number")?);
                let (reach, lateral) = (num("within_distance")?, num("lateral_thresh")?);
                let mut out = Tuples::default();
                for (c, t, others) in self.neighbourhoods(&cand()?, &rel()?) {
                    let cb = &self.bundle.tracks[c.0].boxes[c.1];
                    let mut found: Vec<(f64, String)> = Vec::new();
                    for r in others.into_iter().filter(|r| r.0 != c.0) {
                        let d = minus(self.pos(r), cb.xy());
                        let (s, co) = cb.yaw.sin_cos();
                        // Offsets in the candidate frame: x forward, y left.
                        let fwd = co * d[0] + s * d[1];
                        let left = -s * d[0] + co * d[1];
                        let (along, across, half_along, half_across) = match dir {
                            "forward" => (fwd, left, cb.size[0] / 2.0, cb.size[1] / 2.0),
                            "backward" => (-fwd, left, cb.size[0] / 2.0, cb.size[1] / 2.0),
                            "left" => (left, fwd, cb.size[1] / 2.0, cb.size[0] / 2.0),
                            "right" => (-left, fwd, cb.size[1] / 2.0, cb.size[0] / 2.0),
                            other => return Err(Error::InvalidArgument(other.to_owned())),
                        };
                        if along > EPS
                            && (along - half_along).max(0.0) <= reach
                            && (across.abs() - half_across).max(0.0) <= lateral
                        {
                            found.push((len(d), self.id(r).to_owned()));
                        }
                    }
                    if (found.len() as f64) < min_n {
                        continue;
                    }
                    let id = self.id(c).to_owned();
                    out.pairs.insert((id.clone(), t));
                    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                    let keep = if max_n >= found.len() as f64 { found.len() } else { max_n as usize };
                    for (_, rid) in found.into_iter().take(keep) {
                        out.triples.insert((id.clone(), rid, t));
                    }
                }
                if f.starts_with("get_") {
                    reversed(&out)
                } else {
                    out
                }
            }
            "being_crossed_by" => self.crossings(
                &cand()?,
                &rel()?,
                a.text("direction")?,
                a.text("in_direction")?,
                num("forward_thresh")?,
                num("lateral_thresh")?,
            )?,
            "near_objects" => {
                let (thr, min_n, with_self) = (num("distance_thresh")?, num("min_objects")?, a.boolean("include_self")?);
                let mut out = Tuples::default();
                let c = Tuples::of(a.scenario("track_uuid")?);
                let r = Tuples::of(a.scenario("candidate_uuids")?);
                for (co, t, others) in self.neighbourhoods(&c, &r) {
                    let near: Vec<_> =
                        others.iter().filter(|o| o.0 != co.0 && len(minus(self.pos(**o), self.pos(co))) <= thr).collect();
                    let me = others.iter().any(|o| o.0 == co.0) && with_self;
                    if (near.len() + usize::from(me)) as f64 >= min_n {
                        let id = self.id(co).to_owned();
                        out.pairs.insert((id.clone(), t));
                        for o in near {
                            out.triples.insert((id.clone(), self.id(*o).to_owned(), t));
                        }
                    }
                }
                out
            }
            "following" => {
                let c = Tuples::of(a.scenario("track_uuid")?);
                let r = Tuples::of(a.scenario("candidate_uuids")?);
                let mut out = Tuples::default();
                for (co, t, others) in self.neighbourhoods(&c, &r) {
                    let Some(lane) = self.lane_of(co) else { continue };
                    let mc = self.motion(co);
                    if mc.speed < MOVING {
                        continue;
                    }
                    let p = self.pos(co);
                    let ahead_dir = self.lanes[lane].direction(p);
                    let mut leads: Vec<(f64, &str)> = others
                        .iter()
                        .filter(|o| o.0 != co.0)
                        .filter(|o| self.lane_of(**o).is_some_and(|l| l == lane || self.successor(lane, l)))
                        .filter(|o| {
                            let mo = self.motion(**o);
                            mo.speed >= MOVING && degrees_between(mc.velocity, mo.velocity) <= FOLLOW_ANGLE
                        })
                        .filter(|o| dotp(minus(self.pos(**o), p), ahead_dir) > 0.0)
                        .map(|o| (len(minus(self.pos(*o), p)), self.id(*o)))
                        .collect();
                    leads.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
                    if let Some((_, lead)) = leads.first() {
                        let id = self.id(co).to_owned();
                        out.pairs.insert((id.clone(), t));
                        out.triples.insert((id, (*lead).to_owned(), t));
                    }
                }
                out
            }
            "in_same_lane" => self.triples(&cand()?, &rel()?, |c, r| match (self.lane_of(c), self.lane_of(r)) {
                (Some(x), Some(y)) => x == y || self.successor(x, y) || self.successor(y, x),
                _ => false,
            }),
            "on_relative_side_of_road" => {
                let same = match a.text("side")? {
                    "same" => true,
                    "opposite" => false,
                    other => return Err(Error::InvalidArgument(other.to_owned())),
                };
                self.triples(&cand()?, &rel()?, |c, r| {
                    match (self.facts[c.0].road[c.1], self.facts[r.0].road[r.1]) {
                        (Some(x), Some(y)) => {
                            let d = dotp(x, y);
                            if same {
                                d > EPS
                            } else {
                                d < -EPS
                            }
                        }
                        _ => false,
                    }
                })
            }
            "scenario_and" | "scenario_or" => {
                let sets: Vec<Tuples> = a.scenarios("scenario_dicts")?.into_iter().map(Tuples::of).collect();
                if sets.is_empty() {
                    return Err(Error::InvalidArgument(format!("{f} needs at least one input")));
                }
                let mut out = Tuples::default();
                for s in &sets {
                    out.triples.extend(s.triples.iter().cloned());
                }
                out.pairs = if f == "scenario_or" {
                    sets.iter().flat_map(|s| s.pairs.iter().cloned()).collect()
                } else {
                    sets[0].pairs.iter().filter(|p| sets.iter().all(|s| s.pairs.contains(p))).cloned().collect()
                };
                out.closed()
            }
            other => return Err(Error::NotFound(format!("function {other}"))),
        })
    }

    fn crossings(
        &self,
        cand: &Tuples,
        rel: &Tuples,
        direction: &str,
        sense: &str,
        forward: f64,
        lateral_limit: f64,
    ) -> Result<Tuples> {
        let want_ccw = match sense {
            "clockwise" => Some(false),
            "counterclockwise" => Some(true),
            "either" => None,
            other => return Err(Error::InvalidArgument(other.to_owned())),
        };
        if !["forward", "backward", "left", "right"].contains(&direction) {
            return Err(Error::InvalidArgument(direction.to_owned()));
        }
        let mut out = Tuples::default();
        let cand_ids = cand.ids();
        let rel_ids = rel.ids();
        for c in self.bundle.tracks.iter().filter(|t| cand_ids.contains(t.id.as_str())) {
            for r in self.bundle.tracks.iter().filter(|t| rel_ids.contains(t.id.as_str()) && t.id != c.id) {
                // (time, distance past the facing edge, signed offset from the midplane)
                let mut track: Vec<(Timestamp, f64, f64)> = Vec::new();
                for b in &c.boxes {
                    let Some(rb) = r.boxes.iter().find(|x| x.timestamp == b.timestamp) else { continue };
                    let d = minus(rb.xy(), b.xy());
                    let (s, co) = b.yaw.sin_cos();
                    let fwd = co * d[0] + s * d[1];
                    let left = -s * d[0] + co * d[1];
                    let (along, side, half) = match direction {
                        "forward" => (fwd, left, b.size[0] / 2.0),
                        "backward" => (-fwd, -left, b.size[0] / 2.0),
                        "left" => (left, -fwd, b.size[1] / 2.0),
                        _ => (-left, fwd, b.size[1] / 2.0),
                    };
                    let side = if side.abs() <= EPS { 0.0 } else { side };
                    track.push((b.timestamp, along - half, side));
                }
                let mut inside = false;
                for w in track.windows(2) {
                    let ((_, a0, s0), (t, a1, s1)) = (w[0], w[1]);
                    let ccw = if s0 < 0.0 && s1 >= 0.0 {
                        Some(true)
                    } else if s0 > 0.0 && s1 <= 0.0 {
                        Some(false)
                    } else {
                        None
                    };
                    let crossing = ccw.filter(|_| {
                        let at = a0 + s0 / (s0 - s1) * (a1 - a0);
                        at >= 0.0 && at <= forward
                    });
                    let mark = match crossing {
                        Some(ccw) => {
                            inside = want_ccw.is_none_or(|w| w == ccw);
                            inside
                        }
                        None => {
                            inside = inside && s1.abs() <= lateral_limit;
                            inside
                        }
                    };
                    if mark && cand.has(&c.id, t) && rel.has(&r.id, t) {
                        out.pairs.insert((c.id.clone(), t));
                        out.triples.insert((c.id.clone(), r.id.clone(), t));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Lane type at each box of a track, for tests and diagnostics.
    pub fn lane_ids(&self, track_id: &str) -> Vec<Option<&str>> {
        let Some(k) = self.bundle.tracks.iter().position(|t| t.id == track_id) else { return Vec::new() };
        self.facts[k].lane.iter().map(|l| l.map(|i| self.lanes[i].id.as_str())).collect()
    }

    pub fn has_lane(&self, id: &str) -> bool {
        self.lane_by_id(id).is_some()
    }
}

fn side(s: Option<&str>) -> Result<Option<bool>> {
    match s {
        None => Ok(None),
        Some("left") => Ok(Some(true)),
        Some("right") => Ok(Some(false)),
        Some(other) => Err(Error::InvalidArgument(format!("bad direction {other:?}"))),
    }
}

fn reversed(s: &Tuples) -> Tuples {
    Tuples {
        pairs: s.triples.iter().map(|(_, r, t)| (r.clone(), *t)).collect(),
        triples: s.triples.iter().map(|(k, r, t)| (r.clone(), k.clone(), *t)).collect(),
    }
}

impl PredicateEngine for Oracle<'_> {
    fn call(&self, function: &str, args: &Args) -> Result<ScenarioSet> {
        registry::check_ranges(function, args).map_err(Error::InvalidArgument)?;
        self.evaluate(function, args).map(Tuples::into_set)
    }

    fn negate(&self, candidates: &ScenarioSet, selected: &ScenarioSet) -> ScenarioSet {
        let (c, s) = (Tuples::of(candidates), Tuples::of(selected));
        Tuples { pairs: c.pairs.difference(&s.pairs).cloned().collect(), triples: BTreeSet::new() }.into_set()
    }

    fn reverse(&self, set: &ScenarioSet) -> ScenarioSet {
        reversed(&Tuples::of(set)).into_set()
    }
}
