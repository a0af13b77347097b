use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{angle_between, cross, dist, dot, norm, sub, to_local, Point, BOUNDARY_EPS};
use crate::scenario::ScenarioSet;
use crate::track::Timestamp;

use super::{LogEngine, Obs, FOLLOWING_MAX_ANGLE_DEG, MOVING_SPEED};

/// A direction in a box's own frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelativeDirection {
    Forward,
    Backward,
    Left,
    Right,
}

impl FromStr for RelativeDirection {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward" => Ok(RelativeDirection::Forward),
            "backward" => Ok(RelativeDirection::Backward),
            "left" => Ok(RelativeDirection::Left),
            "right" => Ok(RelativeDirection::Right),
            other => Err(Error::InvalidArgument(format!(
                "direction must be forward, backward, left or right, got {other:?}"
            ))),
        }
    }
}

impl RelativeDirection {
    /// Unit axis in the box frame (x forward, y left).
    pub fn axis(self) -> Point {
        match self {
            RelativeDirection::Forward => [1.0, 0.0],
            RelativeDirection::Backward => [-1.0, 0.0],
            RelativeDirection::Left => [0.0, 1.0],
            RelativeDirection::Right => [0.0, -1.0],
        }
    }

    /// Half extents of a `[length, width]` box along and across the axis.
    pub fn half_extents(self, size: [f64; 3]) -> (f64, f64) {
        match self {
            RelativeDirection::Forward | RelativeDirection::Backward => (size[0] / 2.0, size[1] / 2.0),
            RelativeDirection::Left | RelativeDirection::Right => (size[1] / 2.0, size[0] / 2.0),
        }
    }
}

/// Sense in which a crosser passes the half-midplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingSense {
    Clockwise,
    Counterclockwise,
    Either,
}

impl FromStr for CrossingSense {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clockwise" => Ok(CrossingSense::Clockwise),
            "counterclockwise" => Ok(CrossingSense::Counterclockwise),
            "either" => Ok(CrossingSense::Either),
            other => Err(Error::InvalidArgument(format!(
                "in_direction must be clockwise, counterclockwise or either, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(super) struct DirectionQuery {
    pub direction: RelativeDirection,
    pub min_number: f64,
    pub max_number: f64,
    pub within_distance: f64,
    pub lateral_thresh: f64,
}

#[derive(Debug, Clone, Copy)]
pub(super) struct CrossingQuery {
    pub direction: RelativeDirection,
    pub sense: CrossingSense,
    pub forward_thresh: f64,
    pub lateral_thresh: f64,
}

/// Related position in the candidate's frame, split into the distance past the
/// facing edge along `direction` and the offset beyond the parallel sides.
/// `None` when the point is not strictly inside the direction's half-plane.
pub fn directional_offsets(local: Point, size: [f64; 3], direction: RelativeDirection) -> Option<(f64, f64)> {
    let axis = direction.axis();
    let along = dot(local, axis);
    if along <= BOUNDARY_EPS {
        return None;
    }
    let across = cross(axis, local).abs();
    let (half_along, half_across) = direction.half_extents(size);
    Some(((along - half_along).max(0.0), (across - half_across).max(0.0)))
}

impl LogEngine<'_> {
    fn heading(&self, o: Obs) -> Point {
        let yaw = self.bx(o).yaw;
        [yaw.cos(), yaw.sin()]
    }

    pub(super) fn facing_toward(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        within_angle: f64,
        max_distance: f64,
    ) -> ScenarioSet {
        self.relate_pairs(candidates, related, |c, r| {
            let d = sub(self.xy(r), self.xy(c));
            let n = norm(d);
            n > 0.0 && n <= max_distance && angle_between(self.heading(c), d).to_degrees() <= within_angle
        })
    }

    pub(super) fn heading_toward(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        angle_threshold: f64,
        minimum_speed: f64,
        max_distance: f64,
    ) -> ScenarioSet {
        self.relate_pairs(candidates, related, |c, r| {
            let v = self.state(c).velocity;
            let d = sub(self.xy(r), self.xy(c));
            let n = norm(d);
            norm(v) > 0.0
                && n > 0.0
                && n <= max_distance
                && angle_between(v, d).to_degrees() <= angle_threshold
                && dot(v, d) / n >= minimum_speed
        })
    }

    pub(super) fn heading_in_relative_direction_to(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        direction: &str,
    ) -> Result<ScenarioSet> {
        let (lo, hi, closed) = match direction {
            "same" => (0.0, 45.0, false),
            "perpendicular" => (45.0, 135.0, false),
            "opposite" => (135.0, 180.0, true),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "direction must be same, opposite or perpendicular, got {other:?}"
                )))
            }
        };
        Ok(self.relate_pairs(candidates, related, |c, r| {
            let (sc, sr) = (self.state(c), self.state(r));
            if sc.speed < MOVING_SPEED || sr.speed < MOVING_SPEED {
                return false;
            }
            let a = angle_between(sc.velocity, sr.velocity).to_degrees();
            a >= lo && (a < hi || (closed && a <= hi))
        }))
    }

    pub(super) fn has_objects_in_relative_direction(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        q: &DirectionQuery,
    ) -> ScenarioSet {
        let by_time = self.related_by_time(related);
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            let Some(track) = self.track_index(id) else { continue };
            for t in &entry.timestamps {
                let Some(c) = self.observe(track, *t) else { continue };
                let cb = self.bx(c);
                let mut found: Vec<(f64, &str)> = Vec::new();
                for &r in by_time.get(t).map(Vec::as_slice).unwrap_or(&[]) {
                    if r.track == c.track {
                        continue;
                    }
                    let p = self.xy(r);
                    let local = to_local(p, cb.xy(), cb.yaw);
                    if let Some((axial, lateral)) = directional_offsets(local, cb.size, q.direction) {
                        if axial <= q.within_distance && lateral <= q.lateral_thresh {
                            found.push((dist(p, cb.xy()), &self.track(r.track).id));
                        }
                    }
                }
                if (found.len() as f64) < q.min_number {
                    continue;
                }
                out.insert(id, *t);
                found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
                for (_, rid) in found.iter().take(clamp_count(q.max_number)) {
                    out.insert_related(id, rid, *t);
                }
            }
        }
        out
    }

    pub(super) fn being_crossed_by(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        q: &CrossingQuery,
    ) -> Result<ScenarioSet> {
        let mut out = ScenarioSet::new();
        for (cid, centry) in candidates.entries() {
            let Some(ct) = self.track_index(cid) else { continue };
            for (rid, rentry) in related.entries() {
                let Some(rt) = self.track_index(rid) else { continue };
                if rt == ct {
                    continue;
                }
                let track = self.track(ct);
                let other = self.track(rt);
                let samples: Vec<(Timestamp, Point)> = track
                    .boxes
                    .iter()
                    .filter_map(|b| {
                        let rb = other.box_at(b.timestamp)?;
                        let local = to_local(rb.xy(), b.xy(), b.yaw);
                        let axis = q.direction.axis();
                        let (half_along, _) = q.direction.half_extents(b.size);
                        let lateral = cross(axis, local);
                        let lateral = if lateral.abs() <= BOUNDARY_EPS { 0.0 } else { lateral };
                        let offset = [dot(axis, local) - half_along, lateral];
                        Some((b.timestamp, offset))
                    })
                    .collect();
                for t in crossing_marks(&samples, q) {
                    if centry.timestamps.contains(&t) && rentry.timestamps.contains(&t) {
                        out.insert_related(cid, rid, t);
                    }
                }
            }
        }
        Ok(out)
    }

    pub(super) fn near_objects(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        distance_thresh: f64,
        min_objects: f64,
        include_self: bool,
    ) -> ScenarioSet {
        let by_time = self.related_by_time(related);
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            let Some(track) = self.track_index(id) else { continue };
            for t in &entry.timestamps {
                let Some(c) = self.observe(track, *t) else { continue };
                let p = self.xy(c);
                let mut count = 0usize;
                let mut near: Vec<&str> = Vec::new();
                for &r in by_time.get(t).map(Vec::as_slice).unwrap_or(&[]) {
                    if r.track == c.track {
                        count += usize::from(include_self);
                    } else if dist(self.xy(r), p) <= distance_thresh {
                        count += 1;
                        near.push(&self.track(r.track).id);
                    }
                }
                if count as f64 >= min_objects {
                    out.insert(id, *t);
                    for rid in near {
                        out.insert_related(id, rid, *t);
                    }
                }
            }
        }
        out
    }

    /// Relates each candidate to its nearest lead: same or successor lane, both
    /// moving with headings within 45 degrees, lead ahead along the lane.
    pub(super) fn following(&self, candidates: &ScenarioSet, related: &ScenarioSet) -> ScenarioSet {
        let by_time = self.related_by_time(related);
        let map = &self.bundle.map;
        let mut out = ScenarioSet::new();
        for (id, entry) in candidates.entries() {
            let Some(track) = self.track_index(id) else { continue };
            for t in &entry.timestamps {
                let Some(c) = self.observe(track, *t) else { continue };
                let (Some(lane), sc) = (self.lane(c), self.state(c)) else { continue };
                if sc.speed < MOVING_SPEED {
                    continue;
                }
                let p = self.xy(c);
                let forward = lane.direction_near(p);
                let mut best: Option<(f64, &str)> = None;
                for &r in by_time.get(t).map(Vec::as_slice).unwrap_or(&[]) {
                    if r.track == c.track {
                        continue;
                    }
                    let Some(rlane) = self.lane(r) else { continue };
                    if rlane.id() != lane.id() && !map.is_successor(lane.id(), rlane.id()) {
                        continue;
                    }
                    let sr = self.state(r);
                    if sr.speed < MOVING_SPEED
                        || angle_between(sc.velocity, sr.velocity).to_degrees() > FOLLOWING_MAX_ANGLE_DEG
                    {
                        continue;
                    }
                    let d = sub(self.xy(r), p);
                    if dot(d, forward) <= 0.0 {
                        continue;
                    }
                    let rid = self.track(r.track).id.as_str();
                    let n = norm(d);
                    if best.is_none_or(|(bd, bid)| n < bd || (n == bd && rid < bid)) {
                        best = Some((n, rid));
                    }
                }
                if let Some((_, rid)) = best {
                    out.insert_related(id, rid, *t);
                }
            }
        }
        out
    }

    pub(super) fn in_same_lane(&self, candidates: &ScenarioSet, related: &ScenarioSet) -> ScenarioSet {
        let map = &self.bundle.map;
        self.relate_pairs(candidates, related, |c, r| match (self.lane(c), self.lane(r)) {
            (Some(a), Some(b)) => map.lanes_connected(a.id(), b.id()),
            _ => false,
        })
    }

    pub(super) fn on_relative_side_of_road(
        &self,
        candidates: &ScenarioSet,
        related: &ScenarioSet,
        side: &str,
    ) -> Result<ScenarioSet> {
        let same = match side {
            "same" => true,
            "opposite" => false,
            other => return Err(Error::InvalidArgument(format!("side must be same or opposite, got {other:?}"))),
        };
        Ok(self.relate_pairs(candidates, related, |c, r| {
            match (self.road_direction(c), self.road_direction(r)) {
                (Some(a), Some(b)) => {
                    let d = dot(a, b);
                    if same {
                        d > BOUNDARY_EPS
                    } else {
                        d < -BOUNDARY_EPS
                    }
                }
                _ => false,
            }
        }))
    }
}

fn clamp_count(n: f64) -> usize {
    if n.is_infinite() || n >= usize::MAX as f64 {
        usize::MAX
    } else {
        n.max(0.0) as usize
    }
}

/// Timestamps at which a crosser is inside an active crossing of the
/// half-midplane. Each sample holds `[distance past the edge, signed lateral
/// offset]` in the candidate frame, with offsets within rounding of zero already
/// snapped to zero; a sign change of the lateral offset with the
/// interpolated crossing point within `[0, forward_thresh]` starts a crossing
/// (negative to positive is counterclockwise), which lasts while the lateral
/// offset stays within `lateral_thresh`.
fn crossing_marks(samples: &[(Timestamp, Point)], q: &CrossingQuery) -> Vec<Timestamp> {
    let mut marks = Vec::new();
    let mut active = false;
    for k in 1..samples.len() {
        let (_, prev) = samples[k - 1];
        let (t, cur) = samples[k];
        let (s0, s1) = (prev[1], cur[1]);
        let sense = if s0 < 0.0 && s1 >= 0.0 {
            Some(CrossingSense::Counterclockwise)
        } else if s0 > 0.0 && s1 <= 0.0 {
            Some(CrossingSense::Clockwise)
        } else {
            None
        };
        let event = sense.filter(|_| {
            let f = s0 / (s0 - s1);
            let a = prev[0] + f * (cur[0] - prev[0]);
            (0.0..=q.forward_thresh).contains(&a)
        });
        if let Some(sense) = event {
            active = q.sense == CrossingSense::Either || q.sense == sense;
            if active {
                marks.push(t);
            }
        } else if active && s1.abs() <= q.lateral_thresh {
            marks.push(t);
        } else {
            active = false;
        }
    }
    marks
}
