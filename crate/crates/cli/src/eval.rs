use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use scenemine_core::io::{self, read_scenario_csv, read_scenario_document};
use scenemine_core::postprocess::output_grid;
use scenemine_core::{LogBundle, ScenarioSet, Timestamp};
use scenemine_metrics::{evaluate, render_table, EvalCase, EvalReport, Labeled};

use crate::config::RunConfig;
use crate::{thread_pool, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    /// Predicted outputs: `<log_id>/<stem>.csv`.
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground truth in the same layout.
    #[arg(long)]
    pub gt: PathBuf,
    /// Logs whose tracks the predictions refer to.
    #[arg(long)]
    pub logs: PathBuf,
    /// Logs for the ground-truth tracks; defaults to `--logs`.
    #[arg(long)]
    pub gt_logs: Option<PathBuf>,
    /// Where to write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
}

/// A scenario file with the description from its JSON mirror (the stem when absent).
struct Output {
    description: String,
    scenario: ScenarioSet,
}

type Key = (String, String);

fn read_outputs(root: &Path) -> Result<BTreeMap<Key, Output>> {
    let mut out = BTreeMap::new();
    if !root.is_dir() {
        bail!("{} is not a directory", root.display());
    }
    for log in std::fs::read_dir(root).with_context(|| format!("reading {}", root.display()))? {
        let log = log?.path();
        if !log.is_dir() || log.file_name().is_some_and(|n| n == "programs") {
            continue;
        }
        let log_id = log.file_name().unwrap_or_default().to_string_lossy().into_owned();
        for file in std::fs::read_dir(&log)? {
            let file = file?.path();
            if file.extension().is_none_or(|x| x != "csv") {
                continue;
            }
            let stem = file.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            let scenario = read_scenario_csv(&file)?;
            let mirror = file.with_extension("json");
            let description = if mirror.is_file() { read_scenario_document(&mirror)?.description } else { stem.clone() };
            out.insert((log_id.clone(), stem), Output { description, scenario });
        }
    }
    Ok(out)
}

fn load_bundle(root: &Path, log_id: &str) -> Result<LogBundle> {
    let dir = root.join(log_id);
    io::load_log(&dir).with_context(|| format!("loading {}", dir.display()))
}

/// Scores `pred` against `gt`; every (log, prompt) must appear on both sides.
pub fn score(args: &EvalArgs) -> Result<EvalReport> {
    let config = RunConfig::load(args.config.as_deref())?;
    let pool = thread_pool(args.jobs)?;
    let pred = read_outputs(&args.pred)?;
    let gt = read_outputs(&args.gt)?;
    let pred_keys: BTreeSet<&Key> = pred.keys().collect();
    let gt_keys: BTreeSet<&Key> = gt.keys().collect();
    let orphans: Vec<String> = pred_keys
        .symmetric_difference(&gt_keys)
        .map(|(log, stem)| {
            let side = if pred.contains_key(&(log.clone(), stem.clone())) { "prediction" } else { "ground truth" };
            format!("{log}/{stem}.csv exists only in the {side}")
        })
        .collect();
    if !orphans.is_empty() {
        bail!("unpaired outputs:\n  {}", orphans.join("\n  "));
    }
    if gt.is_empty() {
        bail!("no scenario outputs under {}", args.gt.display());
    }

    let log_ids: BTreeSet<&str> = gt.keys().map(|(l, _)| l.as_str()).collect();
    let gt_root = args.gt_logs.as_deref().unwrap_or(&args.logs);
    let mut pred_logs = BTreeMap::new();
    let mut gt_logs = BTreeMap::new();
    let mut grids: BTreeMap<&str, Vec<Timestamp>> = BTreeMap::new();
    for id in &log_ids {
        let p = load_bundle(&args.logs, id)?;
        grids.insert(id, output_grid(&p.timestamps(), config.postprocess.output_rate_hz).into_iter().collect());
        if args.gt_logs.is_some() {
            gt_logs.insert(*id, load_bundle(gt_root, id)?);
        }
        pred_logs.insert(*id, p);
    }
    let gt_logs = if args.gt_logs.is_some() { &gt_logs } else { &pred_logs };

    let cases: Vec<EvalCase> = gt
        .iter()
        .map(|((log, stem), g)| {
            let p = &pred[&(log.clone(), stem.clone())];
            EvalCase {
                prompt: &g.description,
                log_id: log,
                pred: Labeled::new(&pred_logs[log.as_str()].tracks, &p.scenario),
                gt: Labeled::new(&gt_logs[log.as_str()].tracks, &g.scenario),
                log_times: &grids[log.as_str()],
            }
        })
        .collect();
    Ok(pool.install(|| evaluate(&cases, &config.eval))?)
}

pub fn run(args: &EvalArgs) -> i32 {
    let result = score(args).and_then(|report| {
        print!("{}", render_table(&report));
        if let Some(path) = &args.report {
            let text = serde_json::to_string_pretty(&report)? + "\n";
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
