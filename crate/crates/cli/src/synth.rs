use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use scenemine_core::io::scenario_stem;
use scenemine_synthesis::{synthesize_all, ChatModel, FailureStats, HttpChatModel, RateLimited, SynthesisError};
use serde::Serialize;

use crate::config::RunConfig;
use crate::programs::read_prompts;
use crate::{EXIT_INVALID, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    /// Text file of descriptions, one per line.
    #[arg(long)]
    pub prompts: PathBuf,
    /// Directory for `<stem>.py` programs and `synthesis.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct Outcome {
    description: String,
    stem: String,
    ok: bool,
    attempts: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct Summary {
    stats: FailureStats,
    failure_rate: f64,
    prompts: Vec<Outcome>,
}

pub fn synth(args: &SynthArgs, model: Option<&dyn ChatModel>) -> Result<FailureStats> {
    let config = RunConfig::load(args.config.as_deref())?;
    let descriptions = read_prompts(&args.prompts)?;
    let http;
    let limited;
    let model: &dyn ChatModel = match (model, config.synthesis.requests_per_minute) {
        (Some(m), _) => m,
        (None, Some(rpm)) => {
            limited = RateLimited::new(HttpChatModel::new(&config.synthesis), rpm);
            &limited
        }
        (None, None) => {
            http = HttpChatModel::new(&config.synthesis);
            &http
        }
    };
    let (results, stats) = synthesize_all(&descriptions, &config.synthesis, model);
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut prompts = Vec::new();
    for (description, result) in descriptions.into_iter().zip(results) {
        let stem = scenario_stem(&description);
        let outcome = match result {
            Ok(s) => {
                let path = args.out.join(format!("{stem}.py"));
                std::fs::write(&path, format!("# Description: {description}\n{}", s.source))?;
                Outcome { description, stem, ok: true, attempts: s.attempts, error: None }
            }
            Err(e) => {
                let attempts = match &e {
                    SynthesisError::Failed { attempts, .. } => *attempts,
                    SynthesisError::EmptyDescription => 0,
                };
                Outcome { description, stem, ok: false, attempts, error: Some(e.to_string()) }
            }
        };
        prompts.push(outcome);
    }
    let summary = Summary { stats, failure_rate: stats.rate(), prompts };
    std::fs::write(args.out.join("synthesis.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!("{} of {} prompts failed ({:.1}%)", stats.failures, stats.total, 100.0 * stats.rate());
    Ok(stats)
}

pub fn run(args: &SynthArgs, model: Option<&dyn ChatModel>) -> i32 {
    match synth(args, model) {
        Ok(stats) if stats.failures == 0 => EXIT_OK,
        Ok(_) => EXIT_INVALID,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}
