use crate::category::CategoryQuery;
use crate::color::Color;
use crate::error::{Error, Result};
use crate::geometry::{dist, dot, sub, BOUNDARY_EPS};
use crate::kinematics::unwrap_angles;
use crate::map::LaneType;
use crate::scenario::ScenarioSet;
use crate::track::Timestamp;

use super::{in_range, LogEngine, Side, STATIONARY_DISPLACEMENT, STOP_SIGN_RADIUS};

impl LogEngine<'_> {
    pub(super) fn get_objects_of_category(&self, category: &str) -> Result<ScenarioSet> {
        let query: CategoryQuery = category.parse()?;
        let mut out = ScenarioSet::new();
        for t in self.bundle.tracks.iter().filter(|t| query.matches(t.category)) {
            out.insert_all(&t.id, t.timestamps());
        }
        Ok(out)
    }

    pub(super) fn is_category(&self, candidates: &ScenarioSet, category: &str) -> Result<ScenarioSet> {
        let query: CategoryQuery = category.parse()?;
        Ok(self.filter_tracks(candidates, |i| query.matches(self.track(i).category)))
    }

    pub(super) fn has_velocity(&self, candidates: &ScenarioSet, min: f64, max: f64) -> Result<ScenarioSet> {
        check_order(min, max)?;
        Ok(self.filter_boxes(candidates, |o| in_range(self.state(o).speed, min, max)))
    }

    pub(super) fn stationary(&self, candidates: &ScenarioSet) -> ScenarioSet {
        self.filter_tracks(candidates, |i| {
            let pts: Vec<_> = self.track(i).boxes.iter().map(|b| b.xy()).collect();
            let spread = pts
                .iter()
                .enumerate()
                .flat_map(|(k, a)| pts[k + 1..].iter().map(move |b| dist(*a, *b)))
                .fold(0.0, f64::max);
            spread < STATIONARY_DISPLACEMENT
        })
    }

    pub(super) fn accelerating(&self, candidates: &ScenarioSet, min: f64, max: f64) -> Result<ScenarioSet> {
        check_order(min, max)?;
        Ok(self.filter_boxes(candidates, |o| in_range(self.state(o).accel_forward, min, max)))
    }

    pub(super) fn has_lateral_acceleration(&self, candidates: &ScenarioSet, min: f64, max: f64) -> Result<ScenarioSet> {
        check_order(min, max)?;
        Ok(self.filter_boxes(candidates, |o| in_range(self.state(o).accel_lateral, min, max)))
    }

    /// Marks every box inside a span of at most `turning_window_s` over which the
    /// unwrapped heading changes by more than the turning threshold.
    pub(super) fn turning(&self, candidates: &ScenarioSet, side: Option<Side>) -> Result<ScenarioSet> {
        let window = (self.config.turning_window_s * 1e9).round() as i64;
        let threshold = self.config.turning_min_yaw_change_rad;
        Ok(self.filter_marked(candidates, |i| {
            let boxes = &self.track(i).boxes;
            let yaw = unwrap_angles(boxes.iter().map(|b| b.yaw));
            let mut marked = vec![false; boxes.len()];
            for a in 0..boxes.len() {
                for b in a + 1..boxes.len() {
                    if boxes[b].timestamp.0 - boxes[a].timestamp.0 > window {
                        break;
                    }
                    let change = yaw[b] - yaw[a];
                    let hit = match side {
                        Some(Side::Left) => change > threshold,
                        Some(Side::Right) => change < -threshold,
                        None => change.abs() > threshold,
                    };
                    if hit {
                        marked[a..=b].iter_mut().for_each(|m| *m = true);
                    }
                }
            }
            marked
        }))
    }

    /// A lane change is a step from one assigned lane to its left or right
    /// neighbor; boxes within the dilation of that step are marked.
    pub(super) fn changing_lanes(&self, candidates: &ScenarioSet, side: Option<Side>) -> Result<ScenarioSet> {
        let dilation = (self.config.lane_change_dilation_s * 1e9).round() as i64;
        Ok(self.filter_marked(candidates, |i| {
            let boxes = &self.track(i).boxes;
            let lanes = self.lanes(i);
            let mut events: Vec<Timestamp> = Vec::new();
            for k in 1..boxes.len() {
                let (Some(from), Some(to)) = (lanes[k - 1], lanes[k]) else { continue };
                if from.id() == to.id() {
                    continue;
                }
                let left = from.record.left_neighbor.as_deref() == Some(to.id());
                let right = from.record.right_neighbor.as_deref() == Some(to.id());
                let hit = match side {
                    Some(Side::Left) => left,
                    Some(Side::Right) => right,
                    None => left || right,
                };
                if hit {
                    events.push(boxes[k].timestamp);
                }
            }
            boxes
                .iter()
                .map(|b| events.iter().any(|e| (b.timestamp.0 - e.0).abs() <= dilation))
                .collect()
        }))
    }

    pub(super) fn at_pedestrian_crossing(&self, candidates: &ScenarioSet, within: f64) -> ScenarioSet {
        let layer = self.bundle.map.crossing_layer();
        self.filter_boxes(candidates, |o| layer.distance(self.xy(o)) <= within + BOUNDARY_EPS)
    }

    pub(super) fn on_lane_type(&self, candidates: &ScenarioSet, lane_type: &str) -> Result<ScenarioSet> {
        let wanted: LaneType = lane_type.parse()?;
        Ok(self.filter_boxes(candidates, |o| self.lane(o).is_some_and(|l| l.lane_type() == wanted)))
    }

    pub(super) fn near_intersection(&self, candidates: &ScenarioSet, threshold: f64) -> ScenarioSet {
        let layer = self.bundle.map.intersection_layer();
        self.filter_boxes(candidates, |o| layer.distance(self.xy(o)) <= threshold + BOUNDARY_EPS)
    }

    pub(super) fn on_intersection(&self, candidates: &ScenarioSet) -> ScenarioSet {
        let layer = self.bundle.map.intersection_layer();
        self.filter_boxes(candidates, |o| layer.contains(self.xy(o)))
    }

    pub(super) fn at_stop_sign(&self, candidates: &ScenarioSet, forward_thresh: f64) -> ScenarioSet {
        let signs = self.bundle.map.stop_signs();
        self.filter_boxes(candidates, |o| {
            let Some(lane) = self.lane(o) else { return false };
            let p = self.xy(o);
            signs.iter().any(|s| {
                if !s.controlled_lane_ids.iter().any(|id| id == lane.id()) || dist(p, s.position) > STOP_SIGN_RADIUS {
                    return false;
                }
                let ahead = dot(sub(p, s.position), [s.facing_yaw.cos(), s.facing_yaw.sin()]);
                in_range(ahead, 0.0, forward_thresh)
            })
        })
    }

    pub(super) fn in_drivable_area(&self, candidates: &ScenarioSet) -> ScenarioSet {
        let layer = self.bundle.map.drivable_layer();
        self.filter_boxes(candidates, |o| layer.contains(self.xy(o)))
    }

    pub(super) fn on_road(&self, candidates: &ScenarioSet) -> ScenarioSet {
        self.filter_boxes(candidates, |o| self.lane(o).is_some())
    }

    /// Unsupported colors select every candidate.
    pub(super) fn is_color(&self, candidates: &ScenarioSet, color: &str) -> ScenarioSet {
        match Color::query(color) {
            None => candidates.clone(),
            Some(c) => self.filter_tracks(candidates, |i| self.bundle.colors.get(&self.track(i).id) == c),
        }
    }
}

fn check_order(min: f64, max: f64) -> Result<()> {
    if min > max || min.is_nan() || max.is_nan() {
        return Err(Error::InvalidArgument(format!("minimum {min} exceeds maximum {max}")));
    }
    Ok(())
}
