//! Randomized comparison of an engine against the reference oracle: random
//! scene scripts, random candidate sets and random in-range arguments.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scenemine_core::registry::{self, Args, ParamKind, Value};
use scenemine_core::{Category, EngineConfig, LogBundle, LogEngine, PredicateEngine, ScenarioSet};

use crate::oracle::Oracle;
use crate::script::{AgentSpec, Motion, SceneScript, Toward};

/// Id used for candidate entries that name no track in the log.
pub const GHOST_ID: &str = "ghost";

/// A random scene: at most ten tracks (ego included) and at most 50 timestamps.
pub fn random_script(seed: u64) -> SceneScript {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    let intersection = rng.gen_bool(0.5);
    let (rate_hz, duration_s) = if rng.gen_bool(0.5) { (10, 5.0) } else { (2, f64::from(rng.gen_range(5..=20u32))) };
    let lanes: &[&str] = if intersection { &["WI", "EI", "SI", "NI"] } else { &["E1", "E2", "W1"] };
    let ego = Motion::LaneFollow {
        lane: lanes.choose(&mut rng).unwrap().to_string(),
        s0: rng.gen_range(0.0..40.0),
        speed: rng.gen_range(3.0..15.0),
        accel: rng.gen_range(-1.0..1.0),
    };
    let n = rng.gen_range(2..=9);
    let mut agents = Vec::with_capacity(n);
    for i in 0..n {
        let (category, motion) = random_agent(&mut rng, intersection, lanes, duration_s);
        let (start_s, end_s) = if rng.gen_bool(0.25) {
            let a = rng.gen_range(0.0..duration_s / 2.0);
            (a, Some(rng.gen_range(a + 1.0..=duration_s)))
        } else {
            (0.0, None)
        };
        agents.push(AgentSpec {
            id: format!("a{i}"),
            category,
            size: None,
            color: None,
            confidence: None,
            start_s,
            end_s,
            motion,
        });
    }
    SceneScript {
        seed,
        duration_s,
        rate_hz,
        map: if intersection { "intersection" } else { "straight_road" }.into(),
        log_id: None,
        noise_m: rng.gen_range(0.02..0.05),
        ego,
        agents,
        queries: vec![],
    }
}

fn random_agent(rng: &mut ChaCha8Rng, intersection: bool, lanes: &[&str], duration: f64) -> (Category, Motion) {
    let pick = |rng: &mut ChaCha8Rng| lanes.choose(rng).unwrap().to_string();
    match rng.gen_range(0..7) {
        0 => (
            Category::RegularVehicle,
            Motion::LaneFollow {
                lane: pick(rng),
                s0: rng.gen_range(0.0..70.0),
                speed: rng.gen_range(0.0..14.0),
                accel: rng.gen_range(-1.5..1.5),
            },
        ),
        1 => {
            let (lane, toward) = if intersection {
                (pick(rng), if rng.gen_bool(0.5) { Toward::Left } else { Toward::Right })
            } else if rng.gen_bool(0.5) {
                ("E1".to_string(), if rng.gen_bool(0.7) { Toward::Left } else { Toward::Right })
            } else {
                ("E2".to_string(), Toward::Right)
            };
            (
                Category::RegularVehicle,
                Motion::LaneChange {
                    lane,
                    s0: rng.gen_range(0.0..60.0),
                    speed: rng.gen_range(4.0..12.0),
                    toward,
                    at_s: rng.gen_range(0.0..duration * 0.7),
                    duration_s: rng.gen_range(1.5..3.0),
                },
            )
        }
        2 => {
            let (x, y, heading) = if intersection {
                *[(-9.5, -6.0, FRAC_PI_2), (9.5, 6.0, -FRAC_PI_2), (-6.0, -9.5, 0.0), (6.0, 9.5, PI)].choose(rng).unwrap()
            } else {
                *[(62.0, -6.0, FRAC_PI_2), (62.0, 8.0, -FRAC_PI_2)].choose(rng).unwrap()
            };
            (
                Category::Pedestrian,
                Motion::Crossing {
                    x: x + rng.gen_range(-1.0..1.0),
                    y,
                    heading: heading + rng.gen_range(-0.2..0.2),
                    speed: rng.gen_range(0.8..2.0),
                    delay_s: rng.gen_range(0.0..3.0),
                },
            )
        }
        3 => {
            let category = *[Category::RegularVehicle, Category::ConstructionCone, Category::Bollard, Category::Pedestrian]
                .choose(rng)
                .unwrap();
            let (x, y) = if intersection {
                (rng.gen_range(-40.0..40.0), *[-1.75, 1.75, -5.0, 5.0].choose(rng).unwrap())
            } else {
                (rng.gen_range(-20.0..100.0), *[-4.25, -1.75, 1.75, 5.25, 9.0].choose(rng).unwrap())
            };
            (category, Motion::Hold { x, y: y + rng.gen_range(-0.5..0.5), yaw: rng.gen_range(-PI..PI) })
        }
        4 => {
            let (x, y, heading) = if intersection {
                *[(-25.0, -1.75, 0.0), (25.0, 1.75, PI), (1.75, -25.0, FRAC_PI_2), (-1.75, 25.0, -FRAC_PI_2)]
                    .choose(rng)
                    .unwrap()
            } else {
                (rng.gen_range(0.0..60.0), -1.75, 0.0)
            };
            let speed = rng.gen_range(3.0..8.0);
            (
                Category::RegularVehicle,
                Motion::Arc { x, y, heading, speed, yaw_rate: rng.gen_range(-0.4..0.4) },
            )
        }
        5 => {
            if intersection {
                (
                    Category::Bus,
                    Motion::LaneFollow { lane: "SI".into(), s0: rng.gen_range(0.0..50.0), speed: rng.gen_range(2.0..10.0), accel: 0.0 },
                )
            } else {
                (
                    Category::Bicyclist,
                    Motion::LaneFollow { lane: "BK".into(), s0: rng.gen_range(0.0..80.0), speed: rng.gen_range(2.0..7.0), accel: 0.0 },
                )
            }
        }
        _ => (
            Category::Pedestrian,
            Motion::Line {
                x: rng.gen_range(-30.0..80.0),
                y: rng.gen_range(-12.0..12.0),
                heading: rng.gen_range(-PI..PI),
                speed: rng.gen_range(0.0..2.0),
                accel: 0.0,
            },
        ),
    }
}

/// A random scenario set over the log: a subset of tracks and their
/// timestamps, some foreign timestamps, a ghost entry and random relationships.
pub fn random_set(bundle: &LogBundle, rng: &mut impl Rng) -> ScenarioSet {
    let times = bundle.timestamps();
    let ids: Vec<&str> = bundle.tracks.iter().map(|t| t.id.as_str()).collect();
    let mut out = ScenarioSet::new();
    let density = rng.gen_range(0.2..1.0);
    for track in &bundle.tracks {
        if !rng.gen_bool(0.7) {
            continue;
        }
        let all = rng.gen_bool(0.4);
        for b in &track.boxes {
            if all || rng.gen_bool(density) {
                out.insert(&track.id, b.timestamp);
            }
        }
        if rng.gen_bool(0.2) {
            out.insert(&track.id, *times.choose(rng).unwrap());
        }
    }
    if rng.gen_bool(0.3) {
        for _ in 0..3 {
            out.insert(GHOST_ID, *times.choose(rng).unwrap());
        }
    }
    let pairs: Vec<(String, _)> = out.pairs().map(|(id, t)| (id.to_owned(), t)).collect();
    if !pairs.is_empty() {
        for _ in 0..rng.gen_range(0..6) {
            let (k, t) = pairs.choose(rng).unwrap();
            out.insert_related(k, ids.choose(rng).unwrap(), *t);
        }
    }
    out
}

fn number_for(function: &str, name: &str, rng: &mut impl Rng) -> Option<Value> {
    let f = |v: f64| Some(Value::Float(v));
    match name {
        "min_velocity" => f(rng.gen_range(0.0..8.0)),
        "max_velocity" => f(if rng.gen_bool(0.3) { f64::INFINITY } else { rng.gen_range(8.0..20.0) }),
        "min_accel" => f(rng.gen_range(-3.0..0.8)),
        "max_accel" => f(if rng.gen_bool(0.3) { f64::INFINITY } else { rng.gen_range(0.8..4.0) }),
        "within_angle" | "angle_threshold" => f(rng.gen_range(5.0..120.0)),
        "max_distance" => f(rng.gen_range(5.0..60.0)),
        "minimum_speed" => f(rng.gen_range(0.0..3.0)),
        "min_number" => Some(Value::Int(rng.gen_range(0..3))),
        "max_number" => {
            if rng.gen_bool(0.3) {
                f(f64::INFINITY)
            } else {
                Some(Value::Int(rng.gen_range(1..4)))
            }
        }
        "within_distance" if function == "at_pedestrian_crossing" => f(rng.gen_range(0.0..5.0)),
        "within_distance" => f(rng.gen_range(1.0..40.0)),
        "lateral_thresh" => f(rng.gen_range(0.5..10.0)),
        "forward_thresh" => f(rng.gen_range(1.0..20.0)),
        "distance_thresh" => f(rng.gen_range(1.0..30.0)),
        "min_objects" => Some(Value::Int(rng.gen_range(1..4))),
        "threshold" => f(rng.gen_range(0.0..10.0)),
        _ => None,
    }
}

/// Random in-range arguments for `function`. Optional numbers are sometimes
/// left at their defaults.
pub fn random_args(function: &str, bundle: &LogBundle, rng: &mut impl Rng) -> Args {
    let spec = registry::lookup(function).expect("registry function");
    let mut pairs: Vec<(&str, Value)> = Vec::new();
    for p in spec.params {
        let v = match p.kind {
            ParamKind::Scenario => Some(Value::Scenario(Arc::new(random_set(bundle, rng)))),
            ParamKind::ScenarioList => Some(Value::List(
                (0..rng.gen_range(1..=3)).map(|_| Value::Scenario(Arc::new(random_set(bundle, rng)))).collect(),
            )),
            ParamKind::LogDir => Some(Value::LogDir),
            ParamKind::OutputDir => Some(Value::OutputDir),
            ParamKind::Enum(options) => Some(Value::Str(options.choose(rng).unwrap().to_string())),
            ParamKind::OptionalEnum(options) => {
                Some(if rng.gen_bool(0.3) { Value::None } else { Value::Str(options.choose(rng).unwrap().to_string()) })
            }
            ParamKind::Category => {
                let mut names = vec!["ANY", "VEHICLE"];
                names.extend(bundle.tracks.iter().map(|t| t.category.name()));
                names.push("BUS");
                Some(Value::Str(names.choose(rng).unwrap().to_string()))
            }
            ParamKind::Color => Some(Value::Str(
                ["white", "silver", "black", "red", "yellow", "blue", "chartreuse"].choose(rng).unwrap().to_string(),
            )),
            ParamKind::Bool => Some(Value::Bool(rng.gen_bool(0.5))),
            ParamKind::Float | ParamKind::Count => {
                if p.default.is_some() && rng.gen_bool(0.25) {
                    None
                } else {
                    number_for(function, p.name, rng)
                }
            }
            ParamKind::Text => Some(Value::Str("random".into())),
        };
        if let Some(v) = v {
            pairs.push((p.name, v));
        }
    }
    Args::for_function(function, &pairs).expect("generated arguments bind")
}

/// A disagreement between the engine and the oracle.
#[derive(Debug)]
pub struct Mismatch {
    pub function: String,
    pub what: &'static str,
    pub engine: String,
    pub oracle: String,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} ({}): engine {} vs oracle {}", self.function, self.what, self.engine, self.oracle)
    }
}

fn summary(s: &ScenarioSet) -> String {
    let pairs: Vec<String> = s.pairs().map(|(id, t)| format!("{id}@{}", t.0)).collect();
    let triples: Vec<String> = s.triples().map(|(k, r, t)| format!("{k}>{r}@{}", t.0)).collect();
    format!("pairs [{}] rel [{}]", pairs.join(" "), triples.join(" "))
}

/// Evaluates one call with both engines, plus `negate` and `reverse` on the
/// result, and reports the first difference.
pub fn compare_call(
    engine: &dyn PredicateEngine,
    oracle: &dyn PredicateEngine,
    function: &str,
    args: &Args,
) -> Result<(), Mismatch> {
    let mismatch = |what, e: String, o: String| Mismatch { function: function.to_owned(), what, engine: e, oracle: o };
    let (e, o) = (engine.call(function, args), oracle.call(function, args));
    let (e, o) = match (e, o) {
        (Ok(e), Ok(o)) => (e, o),
        (Err(_), Err(_)) => return Ok(()),
        (e, o) => return Err(mismatch("status", format!("{e:?}"), format!("{o:?}"))),
    };
    if e != o {
        return Err(mismatch("call", summary(&e), summary(&o)));
    }
    if let Some(Value::Scenario(cand)) = args.get("track_candidates").or_else(|| args.get("track_uuid")) {
        let (ne, no) = (engine.negate(cand, &e), oracle.negate(cand, &o));
        if ne != no {
            return Err(mismatch("negate", summary(&ne), summary(&no)));
        }
    }
    let (re, ro) = (engine.reverse(&e), oracle.reverse(&o));
    if re != ro {
        return Err(mismatch("reverse", summary(&re), summary(&ro)));
    }
    Ok(())
}

/// Compares the log engine and the oracle on `calls` random calls over every
/// predicate function. Returns the number of calls and all mismatches.
pub fn check_bundle(bundle: &LogBundle, seed: u64, calls: usize) -> (usize, Vec<Mismatch>) {
    let config = EngineConfig::default();
    let engine = LogEngine::new(bundle, config.clone());
    let oracle = Oracle::new(bundle, config);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let functions = registry::predicate_names();
    let mut mismatches = Vec::new();
    for i in 0..calls {
        let function = functions[i % functions.len()];
        let args = random_args(function, bundle, &mut rng);
        if let Err(m) = compare_call(&engine, &oracle, function, &args) {
            mismatches.push(m);
        }
    }
    (calls, mismatches)
}
