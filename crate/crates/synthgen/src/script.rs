//! Scene scripts: the JSON description a synthetic log is generated from.

use scenemine_core::geometry::Point;
use scenemine_core::map::MapFile;
use scenemine_core::{Category, Color, Error, Result};
use serde::{Deserialize, Serialize};

use crate::templates::{self, LANE_WIDTH};

/// Speed limit for every scripted agent, m/s.
pub const MAX_SPEED: f64 = 30.0;
pub const RATES_HZ: [u32; 2] = [2, 10];
pub const MIN_DURATION_S: f64 = 5.0;
pub const MAX_DURATION_S: f64 = 20.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneScript {
    pub seed: u64,
    pub duration_s: f64,
    pub rate_hz: u32,
    /// Map template id, see [`templates::TEMPLATES`].
    pub map: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_id: Option<String>,
    /// Uniform position jitter amplitude, meters. Yaw jitter is a tenth of it in radians.
    #[serde(default)]
    pub noise_m: f64,
    pub ego: Motion,
    #[serde(default)]
    pub agents: Vec<AgentSpec>,
    #[serde(default)]
    pub queries: Vec<Query>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    pub category: Category,
    /// (length, width, height); defaults by category.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub size: Option<[f64; 3]>,
    /// Random when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color: Option<Color>,
    /// Random in [0.3, 1] when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    /// Seconds after the log start at which the agent is first observed.
    #[serde(default)]
    pub start_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub end_s: Option<f64>,
    pub motion: Motion,
}

/// A labeled query: the program's result on the scene is the ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Query {
    pub description: String,
    pub program: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Toward {
    Left,
    Right,
}

/// Motion primitives. Times are seconds since the log start; headings are radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "primitive", rename_all = "snake_case", deny_unknown_fields)]
pub enum Motion {
    Hold {
        x: f64,
        y: f64,
        yaw: f64,
    },
    Line {
        x: f64,
        y: f64,
        heading: f64,
        speed: f64,
        #[serde(default)]
        accel: f64,
    },
    Arc {
        x: f64,
        y: f64,
        heading: f64,
        speed: f64,
        yaw_rate: f64,
    },
    LaneFollow {
        lane: String,
        s0: f64,
        speed: f64,
        #[serde(default)]
        accel: f64,
    },
    LaneChange {
        lane: String,
        s0: f64,
        speed: f64,
        toward: Toward,
        at_s: f64,
        duration_s: f64,
    },
    /// Waits `delay_s`, then walks a straight line.
    Crossing {
        x: f64,
        y: f64,
        heading: f64,
        speed: f64,
        delay_s: f64,
    },
}

/// A planar pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub xy: Point,
    pub yaw: f64,
}

/// Distance covered from speed `v0` under constant `accel`, with speed held
/// inside `[0, MAX_SPEED]`.
pub fn travelled(v0: f64, accel: f64, t: f64) -> f64 {
    let v0 = v0.clamp(0.0, MAX_SPEED);
    if accel == 0.0 || t <= 0.0 {
        return v0 * t.max(0.0);
    }
    let bound = if accel > 0.0 { MAX_SPEED } else { 0.0 };
    let tb = (bound - v0) / accel;
    if t <= tb {
        v0 * t + 0.5 * accel * t * t
    } else {
        v0 * tb + 0.5 * accel * tb * tb + bound * (t - tb)
    }
}

fn smoothstep(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * (3.0 - 2.0 * u)
}

fn smoothstep_slope(u: f64) -> f64 {
    if !(0.0..=1.0).contains(&u) {
        return 0.0;
    }
    6.0 * u * (1.0 - u)
}

/// Point and unit direction at arclength `s`, extrapolating past either end.
fn along_path(path: &[Point], s: f64) -> (Point, Point) {
    let seg = |i: usize| {
        let (a, b) = (path[i], path[i + 1]);
        let len = (b[0] - a[0]).hypot(b[1] - a[1]);
        (a, [(b[0] - a[0]) / len, (b[1] - a[1]) / len], len)
    };
    let mut acc = 0.0;
    let last = path.len() - 2;
    for i in 0..=last {
        let (a, dir, len) = seg(i);
        if s <= acc + len || i == last {
            let u = if i == 0 { s } else { (s - acc).max(0.0) };
            return ([a[0] + dir[0] * u, a[1] + dir[1] * u], dir);
        }
        acc += len;
    }
    unreachable!("path has at least one segment")
}

impl Motion {
    pub fn validate(&self, map: &MapFile) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        let speed_ok = |v: f64| (0.0..=MAX_SPEED).contains(&v);
        match self {
            Motion::Hold { x, y, yaw } if ![*x, *y, *yaw].iter().all(|v| v.is_finite()) => {
                bad("hold: non-finite pose".into())
            }
            Motion::Line { speed, accel, .. } | Motion::LaneFollow { speed, accel, .. }
                if !speed_ok(*speed) || !accel.is_finite() =>
            {
                bad(format!("speed must be in [0, {MAX_SPEED}] with finite acceleration"))
            }
            Motion::Arc { speed, yaw_rate, .. } if !speed_ok(*speed) || !yaw_rate.is_finite() => {
                bad(format!("arc: speed must be in [0, {MAX_SPEED}]"))
            }
            Motion::Crossing { speed, delay_s, .. } if !speed_ok(*speed) || !(*delay_s >= 0.0) => {
                bad("crossing: bad speed or delay".into())
            }
            Motion::LaneChange { speed, duration_s, .. } if !speed_ok(*speed) || !(*duration_s > 0.0) => {
                bad("lane_change: bad speed or duration".into())
            }
            Motion::LaneFollow { lane, .. } | Motion::LaneChange { lane, .. } => {
                templates::lane_path(map, lane).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// Pose at `t` seconds. `path` is the lane path for lane primitives.
    pub fn pose(&self, t: f64, path: Option<&[Point]>) -> Pose {
        match self {
            Motion::Hold { x, y, yaw } => Pose { xy: [*x, *y], yaw: *yaw },
            Motion::Line { x, y, heading, speed, accel } => {
                let d = travelled(*speed, *accel, t);
                Pose { xy: [x + d * heading.cos(), y + d * heading.sin()], yaw: *heading }
            }
            Motion::Arc { x, y, heading, speed, yaw_rate } => {
                let v = speed.clamp(0.0, MAX_SPEED);
                let h = heading + yaw_rate * t;
                if yaw_rate.abs() < 1e-9 {
                    return Pose { xy: [x + v * t * heading.cos(), y + v * t * heading.sin()], yaw: h };
                }
                let r = v / yaw_rate;
                Pose { xy: [x + r * (h.sin() - heading.sin()), y - r * (h.cos() - heading.cos())], yaw: h }
            }
            Motion::LaneFollow { s0, speed, accel, .. } => {
                let (p, dir) = along_path(path.expect("lane path"), s0 + travelled(*speed, *accel, t));
                Pose { xy: p, yaw: dir[1].atan2(dir[0]) }
            }
            Motion::LaneChange { s0, speed, toward, at_s, duration_s, .. } => {
                let v = speed.clamp(0.0, MAX_SPEED);
                let (p, dir) = along_path(path.expect("lane path"), s0 + v * t);
                let sign = if *toward == Toward::Left { 1.0 } else { -1.0 };
                let u = (t - at_s) / duration_s;
                let offset = sign * LANE_WIDTH * smoothstep(u);
                let lateral_speed = sign * LANE_WIDTH * smoothstep_slope(u) / duration_s;
                let normal = [-dir[1], dir[0]];
                let yaw = dir[1].atan2(dir[0]) + lateral_speed.atan2(v.max(1e-6));
                Pose { xy: [p[0] + offset * normal[0], p[1] + offset * normal[1]], yaw }
            }
            Motion::Crossing { x, y, heading, speed, delay_s } => {
                let d = speed.clamp(0.0, MAX_SPEED) * (t - delay_s).max(0.0);
                Pose { xy: [x + d * heading.cos(), y + d * heading.sin()], yaw: *heading }
            }
        }
    }

    pub fn lane(&self) -> Option<&str> {
        match self {
            Motion::LaneFollow { lane, .. } | Motion::LaneChange { lane, .. } => Some(lane),
            _ => None,
        }
    }
}

impl SceneScript {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("scene script: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scripts serialize")
    }

    pub fn log_id(&self) -> String {
        self.log_id.clone().unwrap_or_else(|| format!("synth_{:06}", self.seed))
    }

    /// Number of sampled timestamps.
    pub fn sample_count(&self) -> usize {
        (self.duration_s * f64::from(self.rate_hz)).round() as usize
    }

    pub fn validate(&self) -> Result<MapFile> {
        if !RATES_HZ.contains(&self.rate_hz) {
            return Err(Error::InvalidArgument(format!("rate_hz must be 2 or 10, got {}", self.rate_hz)));
        }
        if !(MIN_DURATION_S..=MAX_DURATION_S).contains(&self.duration_s) {
            return Err(Error::InvalidArgument(format!(
                "duration_s must be in [{MIN_DURATION_S}, {MAX_DURATION_S}], got {}",
                self.duration_s
            )));
        }
        if !(self.noise_m >= 0.0 && self.noise_m <= 1.0) {
            return Err(Error::InvalidArgument(format!("noise_m must be in [0, 1], got {}", self.noise_m)));
        }
        let map = templates::template(&self.map)?;
        self.ego.validate(&map)?;
        let mut ids = std::collections::BTreeSet::new();
        for a in &self.agents {
            if a.id.is_empty() || a.id == scenemine_core::io::EGO_TRACK_ID || !ids.insert(a.id.as_str()) {
                return Err(Error::InvalidArgument(format!("agent id {:?} is empty, reserved or repeated", a.id)));
            }
            if a.category == Category::EgoVehicle {
                return Err(Error::InvalidArgument(format!("agent {} cannot be EGO_VEHICLE", a.id)));
            }
            if a.size.is_some_and(|s| s.iter().any(|v| !(*v > 0.0))) {
                return Err(Error::InvalidArgument(format!("agent {} has a non-positive size", a.id)));
            }
            if a.confidence.is_some_and(|c| !(0.0..=1.0).contains(&c)) {
                return Err(Error::InvalidArgument(format!("agent {} confidence outside [0, 1]", a.id)));
            }
            if !(a.start_s >= 0.0) || a.end_s.is_some_and(|e| !(e >= a.start_s)) {
                return Err(Error::InvalidArgument(format!("agent {} has a bad observation window", a.id)));
            }
            a.motion.validate(&map)?;
        }
        Ok(map)
    }
}

/// Nominal (length, width, height) per category.
pub fn default_size(category: Category) -> [f64; 3] {
    use Category::*;
    match category {
        Pedestrian | OfficialSignaler => [0.6, 0.6, 1.7],
        Bicyclist | Bicycle | Motorcyclist | Motorcycle | WheeledRider | WheeledDevice => [1.8, 0.6, 1.6],
        Bus | SchoolBus | ArticulatedBus => [12.0, 2.6, 3.2],
        BoxTruck | Truck | LargeVehicle => [8.0, 2.5, 3.0],
        Bollard | ConstructionCone | ConstructionBarrel | Sign | StopSign => [0.4, 0.4, 1.0],
        Dog | Animal | Stroller | Wheelchair => [0.8, 0.5, 0.8],
        _ => [4.5, 1.9, 1.6],
    }
}
