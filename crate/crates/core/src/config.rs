//! Engine and post-processing constants, loadable from TOML.
//!
//! ```toml
//! # engine.toml
//! turning_min_yaw_change_rad = 0.5235987755982988
//! turning_window_s = 3.0
//! lane_change_dilation_s = 0.5
//! call_timeout_s = 30.0
//! max_relationship_pairs = 10000000
//!
//! # postprocess.toml
//! top_k_large = 200
//! top_k_other = 100
//! large_classes = ["REGULAR_VEHICLE", "PEDESTRIAN", "BOLLARD", "CONSTRUCTION_CONE", "CONSTRUCTION_BARREL"]
//! relationship_max_dist_m = 50.0
//! min_segment_s = 1.5
//! output_rate_hz = 2.0
//! ```

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    /// Signed heading change that counts as a turn.
    pub turning_min_yaw_change_rad: f64,
    /// Longest span over which the heading change may accumulate.
    pub turning_window_s: f64,
    /// Lane-change events are widened by this much on each side.
    pub lane_change_dilation_s: f64,
    /// Wall-time budget per DSL call.
    pub call_timeout_s: f64,
    /// Upper bound on relationship triples held by any one intermediate result.
    pub max_relationship_pairs: usize,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            turning_min_yaw_change_rad: std::f64::consts::FRAC_PI_6,
            turning_window_s: 3.0,
            lane_change_dilation_s: 0.5,
            call_timeout_s: 30.0,
            max_relationship_pairs: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PostprocessConfig {
    pub top_k_large: usize,
    pub large_classes: Vec<Category>,
    pub top_k_other: usize,
    pub relationship_max_dist_m: f64,
    pub min_segment_s: f64,
    pub output_rate_hz: f64,
}

impl Default for PostprocessConfig {
    fn default() -> Self {
        PostprocessConfig {
            top_k_large: 200,
            large_classes: vec![
                Category::RegularVehicle,
                Category::Pedestrian,
                Category::Bollard,
                Category::ConstructionCone,
                Category::ConstructionBarrel,
            ],
            top_k_other: 100,
            relationship_max_dist_m: 50.0,
            min_segment_s: 1.5,
            output_rate_hz: 2.0,
        }
    }
}

impl PostprocessConfig {
    pub fn top_k(&self, category: Category) -> usize {
        if self.large_classes.contains(&category) {
            self.top_k_large
        } else {
            self.top_k_other
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.top_k_large == 0
            || self.top_k_other == 0
            || !(self.relationship_max_dist_m > 0.0)
            || !(self.min_segment_s > 0.0)
            || !(self.output_rate_hz > 0.0)
        {
            return Err(Error::InvalidArgument("post-processing parameters must be positive".into()));
        }
        Ok(())
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.turning_min_yaw_change_rad > 0.0)
            || !(self.turning_window_s > 0.0)
            || !(self.lane_change_dilation_s >= 0.0)
            || !(self.call_timeout_s > 0.0)
        {
            return Err(Error::InvalidArgument("engine constants must be positive".into()));
        }
        Ok(())
    }
}

/// Reads a TOML config file; missing keys take their defaults.
pub fn load_toml<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config { path: path.to_owned(), message: e.to_string() })
}
