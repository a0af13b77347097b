//! Natural-language to scenario-program synthesis.
//!
//! [`synthesize`] prompts a [`ChatModel`] with the API listing and examples,
//! extracts the fenced code block from the reply, and parses and validates it.
//! Invalid programs are sent back with their diagnostics (as JSON) until one
//! validates or the retry budget runs out.

pub mod client;
pub mod prompt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use scenemine_core::dsl::{self, Diagnostic, Program, Severity, Span};

pub use client::{ChatModel, HttpChatModel, Message, RateLimited, ScriptedModel, TransportError};
pub use prompt::{api_listing, build_prompt, default_prompt, EXAMPLE_PROGRAMS, FLAWED_PROGRAMS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthesisConfig {
    pub endpoint: String,
    pub model: String,
    pub max_retries: u32,
    pub temperature: f64,
    pub timeout_s: f64,
    /// Environment variable holding the API key.
    pub api_key_env: String,
    /// Prompts synthesized concurrently.
    pub jobs: usize,
    pub requests_per_minute: Option<f64>,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            endpoint: "http://127.0.0.1:8000/v1/chat/completions".into(),
            model: "default".into(),
            max_retries: 3,
            temperature: 0.0,
            timeout_s: 120.0,
            api_key_env: "SCENEMINE_LLM_API_KEY".into(),
            jobs: 1,
            requests_per_minute: None,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> scenemine_core::Result<()> {
        let bad = |m: &str| Err(scenemine_core::Error::InvalidArgument(m.into()));
        if !(self.timeout_s > 0.0) {
            return bad("timeout_s must be positive");
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        if self.requests_per_minute.is_some_and(|r| !(r > 0.0)) {
            return bad("requests_per_minute must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Synthesized {
    pub program: Program,
    /// The extracted source that produced `program`.
    pub source: String,
    pub attempts: u32,
}

#[derive(Debug, thiserror::Error)]
pub enum SynthesisError {
    #[error("empty description")]
    EmptyDescription,
    #[error("no valid program after {attempts} attempts; last diagnostics: {}", render(.diagnostics))]
    Failed { attempts: u32, diagnostics: Vec<Diagnostic>, last_source: String },
}

fn render(d: &[Diagnostic]) -> String {
    d.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Parses and validates `source`; errors only (lint warnings do not block).
pub fn check_source(source: &str) -> Result<Program, Vec<Diagnostic>> {
    let program = dsl::parse_program(source)?;
    let errors: Vec<Diagnostic> =
        dsl::validate_program(&program).into_iter().filter(|d| d.severity == Severity::Error).collect();
    if errors.is_empty() {
        Ok(program)
    } else {
        Err(errors)
    }
}

fn feedback(diagnostics: &[Diagnostic]) -> String {
    format!(
        "The program is not valid. Diagnostics (JSON):\n{}\nFix every problem and reply with the complete corrected program in one python block.",
        dsl::diagnostics_json(diagnostics)
    )
}

/// One prompt, up to `max_retries + 1` model calls.
pub fn synthesize(description: &str, config: &SynthesisConfig, model: &dyn ChatModel) -> Result<Synthesized, SynthesisError> {
    let prompt = default_prompt(description).map_err(|_| SynthesisError::EmptyDescription)?;
    let mut messages = vec![Message::user(prompt)];
    let mut diagnostics = Vec::new();
    let mut last_source = String::new();
    for attempt in 1..=config.max_retries + 1 {
        let reply = match model.complete(&messages) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("synthesis attempt {attempt} for {description:?}: {e}");
                diagnostics = vec![Diagnostic::error("transport", e.to_string(), Span { line: 0, column: 0 })];
                continue;
            }
        };
        let source = dsl::extract_code(&reply).to_owned();
        match check_source(&source) {
            Ok(program) => return Ok(Synthesized { program, source, attempts: attempt }),
            Err(d) => {
                log::info!("synthesis attempt {attempt} for {description:?}: {}", render(&d));
                messages.push(Message::assistant(reply));
                messages.push(Message::user(feedback(&d)));
                diagnostics = d;
                last_source = source;
            }
        }
    }
    Err(SynthesisError::Failed { attempts: config.max_retries + 1, diagnostics, last_source })
}

/// Failure counting over a prompt suite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureStats {
    pub total: usize,
    pub failures: usize,
}

impl FailureStats {
    pub fn record(&mut self, ok: bool) {
        self.total += 1;
        self.failures += usize::from(!ok);
    }

    /// Failures over total, 0 for an empty suite.
    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.failures as f64 / self.total as f64
        }
    }
}

/// Synthesizes every description on `config.jobs` threads; results keep input order.
pub fn synthesize_all(
    descriptions: &[String],
    config: &SynthesisConfig,
    model: &dyn ChatModel,
) -> (Vec<Result<Synthesized, SynthesisError>>, FailureStats) {
    let run = || descriptions.par_iter().map(|d| synthesize(d, config, model)).collect::<Vec<_>>();
    let results = match rayon::ThreadPoolBuilder::new().num_threads(config.jobs.max(1)).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    };
    let mut stats = FailureStats::default();
    for r in &results {
        stats.record(r.is_ok());
    }
    (results, stats)
}
