//! Deterministic synthetic driving logs with exact ground truth.
//!
//! A [`SceneScript`] places scripted agents (motion primitives on a map
//! template) around a scripted ego vehicle. [`generate_scene`] samples it into a
//! [`scenemine_core::LogBundle`] and labels each scripted query by running its
//! program on [`Oracle`], a brute-force reference implementation of every
//! predicate that shares no geometry code with the production engine.

pub mod equivalence;
pub mod generate;
pub mod oracle;
pub mod script;
pub mod templates;
pub mod transform;

pub use generate::{generate_bundle, generate_scene, label_query, GeneratedScene, LabeledQuery, BASE_TIMESTAMP_NS};
pub use oracle::Oracle;
pub use script::{AgentSpec, Motion, Query, SceneScript};
pub use transform::transform_bundle;

/// Built-in fixture scripts, by name.
pub const FIXTURES: [(&str, &str); 2] =
    [("s1_following", include_str!("../fixtures/s1_following.json")), ("s2_crossing", include_str!("../fixtures/s2_crossing.json"))];

pub fn fixture(name: &str) -> Option<SceneScript> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, text)| SceneScript::from_json(text).expect("fixture parses"))
}
