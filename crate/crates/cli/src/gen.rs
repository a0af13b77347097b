use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use scenemine_core::io;
use scenemine_synthgen::equivalence::random_script;
use scenemine_synthgen::{fixture, generate_scene, Query, SceneScript};

use crate::programs::load_programs;
use crate::{EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    /// Scene script (JSON).
    #[arg(long, conflicts_with_all = ["random", "fixture"])]
    pub script: Option<PathBuf>,
    /// Bundled fixture scene by name.
    #[arg(long, conflicts_with = "random")]
    pub fixture: Option<String>,
    /// Number of random scenes.
    #[arg(long)]
    pub random: Option<usize>,
    /// First seed for random scenes; scene i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub duration_s: Option<f64>,
    #[arg(long)]
    pub rate_hz: Option<u32>,
    /// Programs added as labeled queries to every scene.
    #[arg(long, num_args = 1..)]
    pub programs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn scripts(args: &GenArgs) -> Result<Vec<SceneScript>> {
    let mut scripts = match (&args.script, &args.fixture, args.random) {
        (Some(path), _, _) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            vec![SceneScript::from_json(&text)?]
        }
        (None, Some(name), _) => match fixture(name) {
            Some(s) => vec![s],
            None => bail!("unknown fixture {name:?}"),
        },
        (None, None, Some(n)) => (0..n as u64).map(|i| random_script(args.seed + i)).collect(),
        (None, None, None) => bail!("one of --script, --fixture or --random is required"),
    };
    let queries: Vec<Query> = load_programs(&args.programs)?
        .into_iter()
        .map(|p| Query { description: p.description, program: p.source })
        .collect();
    for s in &mut scripts {
        if let Some(d) = args.duration_s {
            s.duration_s = d;
        }
        if let Some(r) = args.rate_hz {
            s.rate_hz = r;
        }
        s.queries.extend(queries.iter().cloned());
    }
    Ok(scripts)
}

/// Writes `logs/<id>`, `gt/<id>/<stem>.{csv,json}` and `scripts/<id>.json` under `out`.
pub fn generate(args: &GenArgs) -> Result<Vec<String>> {
    let scripts = scripts(args)?;
    let mut ids = Vec::with_capacity(scripts.len());
    for script in &scripts {
        let scene = generate_scene(script).with_context(|| format!("scene {}", script.log_id()))?;
        let id = scene.bundle.log_id.clone();
        io::write_log(&args.out.join("logs"), &scene.bundle)?;
        for label in &scene.labels {
            io::write_scenario_output(&label.ground_truth, &label.query.description, &id, &args.out.join("gt").join(&id))?;
        }
        write_script(&args.out.join("scripts"), &id, script)?;
        ids.push(id);
    }
    Ok(ids)
}

fn write_script(dir: &Path, id: &str, script: &SceneScript) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format!("{id}.json"));
    std::fs::write(&path, script.to_json() + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn run(args: &GenArgs) -> i32 {
    match generate(args) {
        Ok(ids) => {
            println!("generated {} logs under {}", ids.len(), args.out.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
