use std::path::Path;

use anyhow::Result;
use scenemine_core::{config::load_toml, EngineConfig, PostprocessConfig};
use scenemine_metrics::EvalConfig;
use scenemine_synthesis::SynthesisConfig;
use serde::{Deserialize, Serialize};

/// Everything tunable, one TOML table per stage:
///
/// ```toml
/// [engine]
/// turning_window_s = 3.0
/// [postprocess]
/// min_segment_s = 1.5
/// [eval]
/// score_related = true
/// [synthesis]
/// endpoint = "http://127.0.0.1:8000/v1/chat/completions"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub engine: EngineConfig,
    pub postprocess: PostprocessConfig,
    pub eval: EvalConfig,
    pub synthesis: SynthesisConfig,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let config: RunConfig = match path {
            Some(p) => load_toml(p)?,
            None => RunConfig::default(),
        };
        config.engine.validate()?;
        config.postprocess.validate()?;
        config.eval.validate()?;
        config.synthesis.validate()?;
        Ok(config)
    }
}
