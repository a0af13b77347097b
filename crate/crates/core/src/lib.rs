//! Scenario mining over driving logs: tracks and HD maps, per-object
//! kinematics, the atomic spatio-temporal predicates, the scenario program
//! language and the output post-processing.
//!
//! ```no_run
//! use scenemine_core::{dsl, io, predicates::LogEngine, EngineConfig};
//!
//! let bundle = io::load_log("logs/0001".as_ref())?;
//! let program = dsl::parse_program(
//!     "cars = get_objects_of_category(log_dir, category='REGULAR_VEHICLE')\n\
//!      output_scenario(cars, 'cars', log_dir, output_dir)\n",
//! )
//! .expect("valid program");
//! let engine = LogEngine::new(&bundle, EngineConfig::default());
//! let run = dsl::execute_program(&program, &engine, &dsl::ExecOptions::default())?;
//! println!("{} cars", run.scenario.len());
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod category;
pub mod color;
pub mod config;
pub mod dsl;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kinematics;
pub mod map;
pub mod postprocess;
pub mod predicates;
pub mod registry;
pub mod scenario;
pub mod track;

pub use category::{Category, CategoryQuery};
pub use color::{Color, ColorTable};
pub use config::{EngineConfig, PostprocessConfig};
pub use error::{Error, Result};
pub use io::{EgoPose, LogBundle};
pub use map::HdMap;
pub use predicates::{LogEngine, PredicateEngine};
pub use scenario::{ScenarioEntry, ScenarioSet, TimeSet};
pub use track::{Timestamp, Track, TrackBox};
