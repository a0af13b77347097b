//! The atomic predicates, evaluated over one log.
//!
//! [`LogEngine`] owns lazily built per-track caches (kinematics, lane
//! assignment) and dispatches calls by name through [`PredicateEngine`], the
//! same interface the program interpreter uses, so alternative engines can be
//! swapped in.

mod relational;
mod unary;

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::config::EngineConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::io::LogBundle;
use crate::kinematics::{estimate_states, KinematicState};
use crate::map::LaneSegment;
use crate::registry::{self, Args};
use crate::scenario::{self, ScenarioEntry, ScenarioSet};
use crate::track::{Timestamp, Track, TrackBox};

/// Minimum speed for an object to count as moving.
pub const MOVING_SPEED: f64 = 0.5;
/// Objects that move less than this over their observation are stationary.
pub const STATIONARY_DISPLACEMENT: f64 = 2.0;
/// Largest heading difference between a follower and its lead, degrees.
pub const FOLLOWING_MAX_ANGLE_DEG: f64 = 45.0;
/// Stop-sign proximity gate.
pub const STOP_SIGN_RADIUS: f64 = 15.0;
/// Off-lane objects borrow the direction of a lane at most this far away.
pub const ROAD_SIDE_SEARCH: f64 = 10.0;

/// Anything that can evaluate registry functions on bound arguments.
pub trait PredicateEngine: Sync {
    fn call(&self, function: &str, args: &Args) -> Result<ScenarioSet>;

    /// `scenario_not`: the candidate pairs missing from `selected`.
    fn negate(&self, candidates: &ScenarioSet, selected: &ScenarioSet) -> ScenarioSet {
        scenario::scenario_not(candidates, selected)
    }

    /// `reverse_relationship`.
    fn reverse(&self, set: &ScenarioSet) -> ScenarioSet {
        scenario::reverse_relationship(set)
    }
}

#[derive(Default)]
struct Derived<'a> {
    states: OnceLock<Vec<KinematicState>>,
    lanes: OnceLock<Vec<Option<&'a LaneSegment>>>,
    road_directions: OnceLock<Vec<Option<Point>>>,
}

/// Predicate evaluation over one city-frame log.
pub struct LogEngine<'a> {
    bundle: &'a LogBundle,
    config: EngineConfig,
    index: HashMap<&'a str, usize>,
    derived: Vec<Derived<'a>>,
}

/// One observation: track index and box index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Obs {
    track: usize,
    slot: usize,
}

impl<'a> LogEngine<'a> {
    pub fn new(bundle: &'a LogBundle, config: EngineConfig) -> Self {
        let index = bundle.tracks.iter().enumerate().map(|(i, t)| (t.id.as_str(), i)).collect();
        let derived = bundle.tracks.iter().map(|_| Derived::default()).collect();
        LogEngine { bundle, config, index, derived }
    }

    pub fn bundle(&self) -> &'a LogBundle {
        self.bundle
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    fn track(&self, i: usize) -> &'a Track {
        &self.bundle.tracks[i]
    }

    fn track_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    fn bx(&self, o: Obs) -> &'a TrackBox {
        &self.bundle.tracks[o.track].boxes[o.slot]
    }

    fn xy(&self, o: Obs) -> Point {
        self.bx(o).xy()
    }

    fn observe(&self, track: usize, t: Timestamp) -> Option<Obs> {
        self.track(track).index_of(t).map(|slot| Obs { track, slot })
    }

    pub fn states(&self, track: usize) -> &[KinematicState] {
        self.derived[track].states.get_or_init(|| estimate_states(self.track(track)))
    }

    fn state(&self, o: Obs) -> &KinematicState {
        &self.states(o.track)[o.slot]
    }

    fn lanes(&self, track: usize) -> &[Option<&'a LaneSegment>] {
        self.derived[track].lanes.get_or_init(|| {
            let map = &self.bundle.map;
            self.track(track).boxes.iter().map(|b| map.assign_lane(b.xy())).collect()
        })
    }

    fn lane(&self, o: Obs) -> Option<&'a LaneSegment> {
        self.lanes(o.track)[o.slot]
    }

    /// Travel direction of the lane under (or near) each box.
    fn road_direction(&self, o: Obs) -> Option<Point> {
        self.derived[o.track].road_directions.get_or_init(|| {
            let map = &self.bundle.map;
            let lanes = self.lanes(o.track);
            self.track(o.track)
                .boxes
                .iter()
                .zip(lanes)
                .map(|(b, lane)| {
                    let p = b.xy();
                    lane.or_else(|| map.nearest_lane(p, ROAD_SIDE_SEARCH)).map(|l| l.direction_near(p))
                })
                .collect()
        })[o.slot]
    }

    /// Keeps candidate pairs whose box satisfies `keep`; candidate relationships
    /// survive at kept timestamps.
    fn filter_boxes(&self, candidates: &ScenarioSet, keep: impl Fn(Obs) -> bool) -> ScenarioSet {
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            let Some(track) = self.track_index(id) else { continue };
            let timestamps = entry
                .timestamps
                .iter()
                .copied()
                .filter(|t| self.observe(track, *t).is_some_and(&keep))
                .collect();
            out.set_entry(id, ScenarioEntry { timestamps, related: entry.related.clone() });
        }
        out
    }

    /// Keeps whole candidate tracks accepted by `keep`.
    fn filter_tracks(&self, candidates: &ScenarioSet, keep: impl Fn(usize) -> bool) -> ScenarioSet {
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            if self.track_index(id).is_some_and(&keep) {
                out.set_entry(id, entry.clone());
            }
        }
        out
    }

    /// Keeps candidate pairs inside the per-track timestamp sets produced by `marks`.
    fn filter_marked(&self, candidates: &ScenarioSet, marks: impl Fn(usize) -> Vec<bool>) -> ScenarioSet {
        self.filter_tracks_with(candidates, |track, entry| {
            let marked = marks(track);
            entry
                .timestamps
                .iter()
                .copied()
                .filter(|t| self.track(track).index_of(*t).is_some_and(|i| marked[i]))
                .collect()
        })
    }

    fn filter_tracks_with(
        &self,
        candidates: &ScenarioSet,
        keep: impl Fn(usize, &ScenarioEntry) -> scenario::TimeSet,
    ) -> ScenarioSet {
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            let Some(track) = self.track_index(id) else { continue };
            let timestamps = keep(track, entry);
            out.set_entry(id, ScenarioEntry { timestamps, related: entry.related.clone() });
        }
        out
    }

    /// Related observations per timestamp, in id order.
    fn related_by_time(&self, related: &ScenarioSet) -> HashMap<Timestamp, Vec<Obs>> {
        let mut out: HashMap<Timestamp, Vec<Obs>> = HashMap::new();
        for (id, entry) in related.entries() {
            let Some(track) = self.track_index(id) else { continue };
            for t in &entry.timestamps {
                if let Some(o) = self.observe(track, *t) {
                    out.entry(*t).or_default().push(o);
                }
            }
        }
        out
    }

    /// Relates each candidate observation to every other related observation at
    /// the same timestamp accepted by `relate`.
    fn relate_pairs(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        relate: impl Fn(Obs, Obs) -> bool,
    ) -> ScenarioSet {
        let by_time = self.related_by_time(related);
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            let Some(track) = self.track_index(id) else { continue };
            for t in &entry.timestamps {
                let (Some(c), Some(others)) = (self.observe(track, *t), by_time.get(t)) else { continue };
                for &r in others {
                    if r.track != c.track && relate(c, r) {
                        out.insert_related(id, &self.track(r.track).id, *t);
                    }
                }
            }
        }
        out
    }

    fn dispatch(&self, function: &str, a: &Args) -> Result<ScenarioSet> {
        match function {
            "get_objects_of_category" => self.get_objects_of_category(a.text("category")?),
            "is_category" => self.is_category(a.scenario("track_candidates")?, a.text("category")?),
            "has_velocity" => {
                self.has_velocity(a.scenario("track_candidates")?, a.number("min_velocity")?, a.number("max_velocity")?)
            }
            "stationary" => Ok(self.stationary(a.scenario("track_candidates")?)),
            "accelerating" => {
                self.accelerating(a.scenario("track_candidates")?, a.number("min_accel")?, a.number("max_accel")?)
            }
            "has_lateral_acceleration" => self.has_lateral_acceleration(
                a.scenario("track_candidates")?,
                a.number("min_accel")?,
                a.number("max_accel")?,
            ),
            "turning" => self.turning(a.scenario("track_candidates")?, parse_side(a.optional_text("direction")?)?),
            "changing_lanes" => {
                self.changing_lanes(a.scenario("track_candidates")?, parse_side(a.optional_text("direction")?)?)
            }
            "facing_toward" => Ok(self.facing_toward(
                a.scenario("track_candidates")?,
                a.scenario("related_candidates")?,
                a.number("within_angle")?,
                a.number("max_distance")?,
            )),
            "heading_toward" => Ok(self.heading_toward(
                a.scenario("track_candidates")?,
                a.scenario("related_candidates")?,
                a.number("angle_threshold")?,
                a.number("minimum_speed")?,
                a.number("max_distance")?,
            )),
            "heading_in_relative_direction_to" => self.heading_in_relative_direction_to(
                a.scenario("track_candidates")?,
                a.scenario("related_candidates")?,
                a.text("direction")?,
            ),
            "has_objects_in_relative_direction" | "get_objects_in_relative_direction" => {
                let query = relational::DirectionQuery {
                    direction: a.text("direction")?.parse()?,
                    min_number: a.number("min_number")?,
                    max_number: a.number("max_number")?,
                    within_distance: a.number("within_distance")?,
                    lateral_thresh: a.number("lateral_thresh")?,
                };
                let found = self.has_objects_in_relative_direction(
                    a.scenario("track_candidates")?,
                    a.scenario("related_candidates")?,
                    &query,
                );
                Ok(if function.starts_with("get_") { scenario::reverse_relationship(&found) } else { found })
            }
            "being_crossed_by" => self.being_crossed_by(
                a.scenario("track_candidates")?,
                a.scenario("related_candidates")?,
                &relational::CrossingQuery {
                    direction: a.text("direction")?.parse()?,
                    sense: a.text("in_direction")?.parse()?,
                    forward_thresh: a.number("forward_thresh")?,
                    lateral_thresh: a.number("lateral_thresh")?,
                },
            ),
            "near_objects" => Ok(self.near_objects(
                a.scenario("track_uuid")?,
                a.scenario("candidate_uuids")?,
                a.number("distance_thresh")?,
                a.number("min_objects")?,
                a.boolean("include_self")?,
            )),
            "following" => Ok(self.following(a.scenario("track_uuid")?, a.scenario("candidate_uuids")?)),
            "at_pedestrian_crossing" => {
                Ok(self.at_pedestrian_crossing(a.scenario("track_candidates")?, a.number("within_distance")?))
            }
            "on_lane_type" => self.on_lane_type(a.scenario("track_uuid")?, a.text("lane_type")?),
            "near_intersection" => Ok(self.near_intersection(a.scenario("track_uuid")?, a.number("threshold")?)),
            "on_intersection" => Ok(self.on_intersection(a.scenario("track_candidates")?)),
            "at_stop_sign" => Ok(self.at_stop_sign(a.scenario("track_candidates")?, a.number("forward_thresh")?)),
            "in_drivable_area" => Ok(self.in_drivable_area(a.scenario("track_candidates")?)),
            "on_road" => Ok(self.on_road(a.scenario("track_candidates")?)),
            "in_same_lane" => {
                Ok(self.in_same_lane(a.scenario("track_candidates")?, a.scenario("related_candidates")?))
            }
            "on_relative_side_of_road" => self.on_relative_side_of_road(
                a.scenario("track_candidates")?,
                a.scenario("related_candidates")?,
                a.text("side")?,
            ),
            "is_color" => Ok(self.is_color(a.scenario("track_candidates")?, a.text("color")?)),
            "scenario_and" => scenario::scenario_and(&a.scenarios("scenario_dicts")?),
            "scenario_or" => scenario::scenario_or(&a.scenarios("scenario_dicts")?),
            other => Err(Error::NotFound(format!("function {other}"))),
        }
    }
}

impl PredicateEngine for LogEngine<'_> {
    fn call(&self, function: &str, args: &Args) -> Result<ScenarioSet> {
        registry::check_ranges(function, args).map_err(Error::InvalidArgument)?;
        self.dispatch(function, args)
    }
}

/// `left` / `right`; `None` means either.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

fn parse_side(s: Option<&str>) -> Result<Option<Side>> {
    match s {
        None => Ok(None),
        Some("left") => Ok(Some(Side::Left)),
        Some("right") => Ok(Some(Side::Right)),
        Some(other) => Err(Error::InvalidArgument(format!("direction must be 'left', 'right' or None, got {other:?}"))),
    }
}

fn in_range(v: f64, lo: f64, hi: f64) -> bool {
    lo <= v && v <= hi
}

#[cfg(test)]
mod tests;
