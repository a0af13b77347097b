use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenemine_core::geometry::Point;
use scenemine_core::io::{self, EgoPose, EGO_OFFSET, EGO_SIZE};
use scenemine_core::{dsl, postprocess, Color, ColorTable, EngineConfig, Error, HdMap, LogBundle, PostprocessConfig};
use scenemine_core::{Result, ScenarioSet, Timestamp, Track, TrackBox};

use crate::oracle::Oracle;
use crate::script::{default_size, Motion, Pose, Query, SceneScript};
use crate::templates;

/// First timestamp of every synthetic log, ns.
pub const BASE_TIMESTAMP_NS: i64 = 1_600_000_000_000_000_000;

/// A query together with its oracle-computed answer.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledQuery {
    pub query: Query,
    /// Raw program output.
    pub raw: ScenarioSet,
    /// After relationship pruning, segment dilation and resampling.
    pub ground_truth: ScenarioSet,
}

#[derive(Debug, Clone)]
pub struct GeneratedScene {
    pub script: SceneScript,
    pub bundle: LogBundle,
    pub labels: Vec<LabeledQuery>,
}

pub fn timestamps(script: &SceneScript) -> Vec<Timestamp> {
    let period = 1_000_000_000 / i64::from(script.rate_hz);
    (0..script.sample_count() as i64).map(|i| Timestamp(BASE_TIMESTAMP_NS + i * period)).collect()
}

fn seconds_since_start(t: Timestamp) -> f64 {
    (t.0 - BASE_TIMESTAMP_NS) as f64 * 1e-9
}

fn lane_path(map: &scenemine_core::map::MapFile, motion: &Motion) -> Result<Option<Vec<Point>>> {
    motion.lane().map(|lane| templates::lane_path(map, lane)).transpose()
}

const COLORS: [Color; 7] = [Color::White, Color::Silver, Color::Black, Color::Red, Color::Yellow, Color::Blue, Color::Unknown];

/// Builds the log for `script`: scripted agents, the ego track and the map.
pub fn generate_bundle(script: &SceneScript) -> Result<LogBundle> {
    let map_file = script.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(script.seed);
    let stamps = timestamps(script);
    let jitter = |rng: &mut ChaCha8Rng, amplitude: f64| {
        if amplitude > 0.0 {
            rng.gen_range(-amplitude..=amplitude)
        } else {
            0.0
        }
    };

    let ego_path = lane_path(&map_file, &script.ego)?;
    let ego: Vec<EgoPose> = stamps
        .iter()
        .map(|t| {
            let Pose { xy, yaw } = script.ego.pose(seconds_since_start(*t), ego_path.as_deref());
            // The pose is the ego frame origin; the ego box sits EGO_OFFSET ahead of it.
            let (s, c) = yaw.sin_cos();
            let z = EGO_SIZE[2] / 2.0 - EGO_OFFSET[2];
            EgoPose::planar(*t, xy[0] - c * EGO_OFFSET[0], xy[1] - s * EGO_OFFSET[0], z, yaw)
        })
        .collect();

    let mut colors = ColorTable::new();
    let mut tracks = Vec::with_capacity(script.agents.len() + 1);
    for agent in &script.agents {
        let color = agent.color.unwrap_or_else(|| COLORS[rng.gen_range(0..COLORS.len())]);
        let confidence = agent.confidence.unwrap_or_else(|| rng.gen_range(0.3..=1.0));
        if color != Color::Unknown {
            colors.set(agent.id.clone(), color);
        }
        let size = agent.size.unwrap_or_else(|| default_size(agent.category));
        let path = lane_path(&map_file, &agent.motion)?;
        let end = agent.end_s.unwrap_or(f64::INFINITY);
        let mut boxes = Vec::new();
        for t in &stamps {
            let s = seconds_since_start(*t);
            if s < agent.start_s - 1e-9 || s > end + 1e-9 {
                continue;
            }
            let Pose { xy, yaw } = agent.motion.pose(s, path.as_deref());
            let dx = jitter(&mut rng, script.noise_m);
            let dy = jitter(&mut rng, script.noise_m);
            let dyaw = jitter(&mut rng, script.noise_m / 10.0);
            boxes.push(TrackBox {
                timestamp: *t,
                translation: [xy[0] + dx, xy[1] + dy, size[2] / 2.0],
                yaw: yaw + dyaw,
                size,
                confidence,
            });
        }
        if boxes.is_empty() {
            return Err(Error::InvalidArgument(format!("agent {} is never observed", agent.id)));
        }
        tracks.push(Track::new(agent.id.clone(), agent.category, boxes)?);
    }
    let tracks = io::inject_ego_track(tracks, &ego)?;
    let bundle = LogBundle { log_id: script.log_id(), tracks, ego, map: HdMap::from_file(map_file)?, colors };
    bundle.check_invariants()?;
    Ok(bundle)
}

/// Runs a query program with the reference engine and post-processes the result.
pub fn label_query(bundle: &LogBundle, query: &Query, config: &EngineConfig) -> Result<LabeledQuery> {
    let program = dsl::parse_program(&query.program).map_err(|d| {
        Error::InvalidArgument(format!("query {:?}: {}", query.description, d.first().map(ToString::to_string).unwrap_or_default()))
    })?;
    if let Some(d) = dsl::validate_program(&program).first() {
        return Err(Error::InvalidArgument(format!("query {:?}: {d}", query.description)));
    }
    let oracle = Oracle::new(bundle, config.clone());
    let options = dsl::ExecOptions::from_config(config, &query.description);
    let run = dsl::execute_program(&program, &oracle, &options)
        .map_err(|e| Error::InvalidArgument(format!("query {:?}: {e}", query.description)))?;
    let ground_truth = postprocess::finalize(&run.scenario, bundle, &PostprocessConfig::default());
    Ok(LabeledQuery { query: query.clone(), raw: run.scenario, ground_truth })
}

/// Generates the log and labels every scripted query.
pub fn generate_scene(script: &SceneScript) -> Result<GeneratedScene> {
    let bundle = generate_bundle(script)?;
    let config = EngineConfig::default();
    let labels = script.queries.iter().map(|q| label_query(&bundle, q, &config)).collect::<Result<_>>()?;
    Ok(GeneratedScene { script: script.clone(), bundle, labels })
}
