use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use super::ast::{Call, Callee, Expr, Program, Statement};
use super::Diagnostic;
use crate::config::EngineConfig;
use crate::predicates::PredicateEngine;
use crate::registry::{self, Value};
use crate::scenario::ScenarioSet;

#[derive(Debug, Clone)]
pub struct ExecOptions {
    /// Wall-time budget per call.
    pub call_timeout: Duration,
    /// Most relationship triples any single call may return.
    pub max_relationships: usize,
    /// Value of the pre-bound `description` name.
    pub description: String,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions::from_config(&EngineConfig::default(), "")
    }
}

impl ExecOptions {
    pub fn from_config(config: &EngineConfig, description: &str) -> Self {
        ExecOptions {
            call_timeout: Duration::from_secs_f64(config.call_timeout_s),
            max_relationships: config.max_relationship_pairs,
            description: description.to_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub scenario: ScenarioSet,
    pub description: String,
}

/// A runtime failure, located at a statement.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecError {
    pub statement: usize,
    pub diagnostic: Diagnostic,
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "statement {}: {}", self.statement + 1, self.diagnostic)
    }
}

impl std::error::Error for ExecError {}

struct Interpreter<'e> {
    engine: &'e dyn PredicateEngine,
    options: &'e ExecOptions,
    env: HashMap<String, Value>,
}

impl Interpreter<'_> {
    fn eval(&self, e: &Expr) -> Result<Value, Diagnostic> {
        Ok(match e {
            Expr::Str(s, _) => Value::Str(s.clone()),
            Expr::Int(i, _) => Value::Int(*i),
            Expr::Float(x, _) => Value::Float(*x),
            Expr::Bool(b, _) => Value::Bool(*b),
            Expr::None(_) => Value::None,
            Expr::List(items, _) => Value::List(items.iter().map(|i| self.eval(i)).collect::<Result<_, _>>()?),
            Expr::Name(n, span) => self
                .env
                .get(n)
                .cloned()
                .ok_or_else(|| Diagnostic::error("unbound-name", format!("name {n:?} is not defined"), *span))?,
            Expr::Call(c) => Value::Scenario(Arc::new(self.call(c)?)),
        })
    }

    fn bind(&self, c: &Call) -> Result<registry::Args, Diagnostic> {
        let target = c.callee.target();
        let spec = registry::lookup(target)
            .ok_or_else(|| Diagnostic::error("unknown-function", format!("unknown function {target:?}"), c.span))?;
        let positional = c.args.iter().map(|a| self.eval(a)).collect::<Result<Vec<_>, _>>()?;
        let keyword = c
            .kwargs
            .iter()
            .map(|(k, v)| Ok((k.clone(), self.eval(v)?)))
            .collect::<Result<Vec<_>, Diagnostic>>()?;
        registry::bind(spec, positional, keyword)
            .map_err(|e| Diagnostic::error(e.code(), format!("{target}: {e}"), c.span).with_token(target))
    }

    fn call(&self, c: &Call) -> Result<ScenarioSet, Diagnostic> {
        let args = self.bind(c)?;
        let target = c.callee.target();
        let started = Instant::now();
        let runtime = |e: crate::Error| Diagnostic::error("runtime", format!("{target}: {e}"), c.span).with_token(target);
        let mut result = self.engine.call(target, &args).map_err(runtime)?;
        if let Callee::Wrapped { wrapper, .. } = &c.callee {
            result = match wrapper.as_str() {
                "scenario_not" => {
                    let first = registry::lookup(target).and_then(|s| s.params.first()).map(|p| p.name).unwrap_or("");
                    let candidates = args.scenario(first).map_err(runtime)?;
                    self.engine.negate(candidates, &result)
                }
                "reverse_relationship" => self.engine.reverse(&result),
                other => {
                    return Err(Diagnostic::error("unknown-function", format!("{other} is not a wrapper"), c.span));
                }
            };
        }
        let elapsed = started.elapsed();
        if elapsed > self.options.call_timeout {
            return Err(Diagnostic::error(
                "timeout",
                format!("{target} took {:.1} s, over the {:.1} s budget", elapsed.as_secs_f64(), self.options.call_timeout.as_secs_f64()),
                c.span,
            )
            .with_token(target));
        }
        let relationships = result.relationship_count();
        if relationships > self.options.max_relationships {
            return Err(Diagnostic::error(
                "budget",
                format!("{target} produced {relationships} relationships, over the budget of {}", self.options.max_relationships),
                c.span,
            )
            .with_token(target));
        }
        Ok(result)
    }
}

/// Evaluates a parsed program against `engine`. The program should have passed
/// [`super::validate_program`]; remaining problems surface as runtime errors.
pub fn execute_program(
    program: &Program,
    engine: &dyn PredicateEngine,
    options: &ExecOptions,
) -> Result<Execution, ExecError> {
    let mut interp = Interpreter { engine, options, env: HashMap::new() };
    interp.env.insert("log_dir".into(), Value::LogDir);
    interp.env.insert("output_dir".into(), Value::OutputDir);
    interp.env.insert("description".into(), Value::Str(options.description.clone()));
    for (i, s) in program.statements.iter().enumerate() {
        let fail = |diagnostic: Diagnostic| ExecError { statement: i, diagnostic: diagnostic.with_statement(i) };
        match s {
            Statement::Assign { name, value, .. } => {
                let v = interp.eval(value).map_err(fail)?;
                interp.env.insert(name.clone(), v);
            }
            Statement::Output(c) => {
                let args = interp.bind(c).map_err(fail)?;
                let scenario = match args.get("scenario") {
                    Some(Value::Scenario(s)) => s.as_ref().clone(),
                    _ => return Err(fail(Diagnostic::error("type", "output_scenario needs a scenario", c.span))),
                };
                let description = args
                    .text("description")
                    .map_err(|e| fail(Diagnostic::error("type", e.to_string(), c.span)))?
                    .to_owned();
                return Ok(Execution { scenario, description });
            }
        }
    }
    let line = program.statements.last().map(|s| s.span()).unwrap_or_default();
    Err(ExecError {
        statement: program.statements.len(),
        diagnostic: Diagnostic::error("missing-output", "program ended without output_scenario(...)", line),
    })
}
