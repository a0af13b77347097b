use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use clap::Args;
use rayon::prelude::*;
use scenemine_core::dsl::{self, ExecOptions, Program};
use scenemine_core::io::{self, scenario_stem};
use scenemine_core::postprocess::{filter_top_k, finalize};
use scenemine_core::{LogBundle, LogEngine};
use scenemine_synthesis::{self as synthesis, ChatModel, HttpChatModel, RateLimited};

use crate::config::RunConfig;
use crate::manifest::{PromptRecord, PromptStatus, RunManifest};
use crate::programs::{load_programs, read_prompts};
use crate::{load_logs, thread_pool, EXIT_INVALID, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, Args)]
pub struct MineArgs {
    /// Directory whose subdirectories are logs.
    #[arg(long)]
    pub logs: PathBuf,
    /// Program files or directories of `*.py` programs.
    #[arg(long, num_args = 1.., conflicts_with = "prompts", required_unless_present = "prompts")]
    pub programs: Vec<PathBuf>,
    /// Text file of descriptions, one per line, synthesized into programs first.
    #[arg(long)]
    pub prompts: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Check programs and logs without executing or writing anything.
    #[arg(long)]
    pub dry_run: bool,
}

/// A program ready to run, or the reason it is not.
struct Job {
    record: PromptRecord,
    program: Option<Program>,
}

pub fn run(args: &MineArgs, model: Option<&dyn ChatModel>) -> i32 {
    match mine(args, model) {
        Ok(manifest) => {
            let failed = manifest.prompts.iter().filter(|p| p.status != PromptStatus::Ok).count();
            if failed > 0 {
                eprintln!("{failed} of {} prompts failed; see {}", manifest.prompts.len(), args.out.join(crate::manifest::MANIFEST_FILE).display());
                EXIT_INVALID
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn prepare_programs(args: &MineArgs) -> Result<Vec<Job>> {
    let files = load_programs(&args.programs)?;
    Ok(files
        .into_iter()
        .map(|f| {
            let mut record = PromptRecord {
                stem: scenario_stem(&f.description),
                description: f.description,
                program: Some(path_string(&f.path)),
                status: PromptStatus::Ok,
                logs_written: 0,
                messages: vec![],
            };
            let program = match synthesis::check_source(&f.source) {
                Ok(p) => Some(p),
                Err(d) => {
                    record.status = PromptStatus::ParseFail;
                    record.messages = d.iter().map(ToString::to_string).collect();
                    None
                }
            };
            Job { record, program }
        })
        .collect())
}

fn synthesize_programs(prompts: &Path, config: &RunConfig, out: &Path, model: Option<&dyn ChatModel>, dry_run: bool) -> Result<Vec<Job>> {
    let descriptions = read_prompts(prompts)?;
    let http;
    let limited;
    let model: &dyn ChatModel = match model {
        Some(m) => m,
        None => {
            http = HttpChatModel::new(&config.synthesis);
            match config.synthesis.requests_per_minute {
                Some(rpm) => {
                    limited = RateLimited::new(http, rpm);
                    &limited
                }
                None => &http,
            }
        }
    };
    let (results, stats) = synthesis::synthesize_all(&descriptions, &config.synthesis, model);
    log::info!("synthesis: {} of {} prompts failed ({:.1}%)", stats.failures, stats.total, 100.0 * stats.rate());
    let program_dir = out.join("programs");
    let mut jobs = Vec::with_capacity(descriptions.len());
    for (description, result) in descriptions.into_iter().zip(results) {
        let stem = scenario_stem(&description);
        let mut record = PromptRecord {
            description: description.clone(),
            stem: stem.clone(),
            program: None,
            status: PromptStatus::Ok,
            logs_written: 0,
            messages: vec![],
        };
        let program = match result {
            Ok(s) => {
                record.messages.push(format!("synthesized in {} attempt(s)", s.attempts));
                if !dry_run {
                    std::fs::create_dir_all(&program_dir)?;
                    let path = program_dir.join(format!("{stem}.py"));
                    std::fs::write(&path, format!("# Description: {description}\n{}", s.source))
                        .with_context(|| format!("writing {}", path.display()))?;
                    record.program = Some(path_string(&path));
                }
                Some(s.program)
            }
            Err(e) => {
                record.status = PromptStatus::SynthFail;
                record.messages.push(e.to_string());
                None
            }
        };
        jobs.push(Job { record, program });
    }
    Ok(jobs)
}

/// Flags every later program whose description repeats an earlier one.
fn reject_duplicates(jobs: &mut [Job]) {
    let mut seen = std::collections::BTreeSet::new();
    for job in jobs {
        if !seen.insert(job.record.stem.clone()) && job.program.is_some() {
            job.program = None;
            job.record.status = PromptStatus::ParseFail;
            job.record.messages.push(format!("description {:?} repeats an earlier program", job.record.description));
        }
    }
}

/// Top-k filtered copy of a log, as programs see it.
pub fn prepare_log(bundle: &LogBundle, config: &RunConfig) -> LogBundle {
    LogBundle {
        log_id: bundle.log_id.clone(),
        tracks: filter_top_k(bundle.tracks.clone(), &config.postprocess),
        ego: bundle.ego.clone(),
        map: bundle.map.clone(),
        colors: bundle.colors.clone(),
    }
}

/// Outcome of one program on one log.
struct Cell {
    job: usize,
    log_id: String,
    error: Option<String>,
}

fn run_log(bundle: &LogBundle, jobs: &[Job], config: &RunConfig, out: &Path) -> Vec<Cell> {
    let filtered = prepare_log(bundle, config);
    let engine = LogEngine::new(&filtered, config.engine.clone());
    let log_dir = out.join(&filtered.log_id);
    let mut cells = Vec::new();
    for (i, job) in jobs.iter().enumerate() {
        let Some(program) = &job.program else { continue };
        let started = Instant::now();
        let options = ExecOptions::from_config(&config.engine, &job.record.description);
        let error = match dsl::execute_program(program, &engine, &options) {
            Ok(run) => {
                let result = finalize(&run.scenario, &filtered, &config.postprocess);
                io::write_scenario_output(&result, &job.record.description, &filtered.log_id, &log_dir)
                    .err()
                    .map(|e| format!("writing output: {e}"))
            }
            Err(e) => Some(e.to_string()),
        };
        log::info!(
            "prompt={} log={} status={} elapsed_ms={:.1}",
            job.record.stem,
            filtered.log_id,
            if error.is_none() { "ok" } else { "exec-fail" },
            started.elapsed().as_secs_f64() * 1e3
        );
        cells.push(Cell { job: i, log_id: filtered.log_id.clone(), error });
    }
    cells
}

/// Runs the whole pipeline and writes the manifest. Errors are usage or I/O problems;
/// per-prompt failures are recorded in the manifest.
pub fn mine(args: &MineArgs, model: Option<&dyn ChatModel>) -> Result<RunManifest> {
    let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let config = RunConfig::load(args.config.as_deref())?;
    let pool = thread_pool(args.jobs)?;
    let mut jobs = match &args.prompts {
        Some(p) => synthesize_programs(p, &config, &args.out, model, args.dry_run)?,
        None if args.programs.is_empty() => bail!("no programs given"),
        None => prepare_programs(args)?,
    };
    reject_duplicates(&mut jobs);
    let log_paths = crate::log_dirs(&args.logs)?;
    let mut logs: Vec<String> = log_paths.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect();

    if !args.dry_run {
        std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
        let bundles = load_logs(&args.logs, &pool)?;
        logs = bundles.iter().map(|b| b.log_id.clone()).collect();
        let cells: Vec<Cell> =
            pool.install(|| bundles.par_iter().flat_map_iter(|b| run_log(b, &jobs, &config, &args.out)).collect());
        for cell in cells {
            let record = &mut jobs[cell.job].record;
            match cell.error {
                None => record.logs_written += 1,
                Some(e) => {
                    record.status = PromptStatus::ExecFail;
                    record.messages.push(format!("{}: {e}", cell.log_id));
                }
            }
        }
    }

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        prompts_file: args.prompts.as_deref().map(path_string),
        program_paths: args.programs.iter().map(|p| path_string(p)).collect(),
        logs_root: path_string(&args.logs),
        output_root: path_string(&args.out),
        config_paths: args.config.iter().map(|p| path_string(p)).collect(),
        logs,
        prompts: jobs.into_iter().map(|j| j.record).collect(),
        started_unix_s,
    };
    if args.dry_run {
        for p in &manifest.prompts {
            println!("{:<10} {} {}", serde_json::to_value(p.status)?.as_str().unwrap_or(""), p.stem, p.description);
            for m in &p.messages {
                println!("    {m}");
            }
        }
        println!("{} logs under {}", manifest.logs.len(), manifest.logs_root);
    } else {
        manifest.write(&args.out)?;
    }
    Ok(manifest)
}
