use std::collections::{HashMap, HashSet};

use super::ast::{Call, Callee, Expr, Program, Statement};
use super::Diagnostic;
use crate::registry::{self, FunctionKind, ParamKind, Value, ValueType};

/// Statically known value of an expression.
fn static_value(e: &Expr, env: &HashMap<&str, ValueType>, diags: &mut Vec<Diagnostic>) -> Value {
    match e {
        Expr::Str(s, _) => Value::Str(s.clone()),
        Expr::Int(i, _) => Value::Int(*i),
        Expr::Float(x, _) => Value::Float(*x),
        Expr::Bool(b, _) => Value::Bool(*b),
        Expr::None(_) => Value::None,
        Expr::List(items, _) => Value::List(items.iter().map(|i| static_value(i, env, diags)).collect()),
        Expr::Name(n, _) => match n.as_str() {
            "log_dir" => Value::LogDir,
            "output_dir" => Value::OutputDir,
            "description" => Value::Opaque(ValueType::Str),
            other => Value::Opaque(env.get(other).copied().unwrap_or(ValueType::Scenario)),
        },
        Expr::Call(c) => {
            check_call(c, env, diags);
            Value::Opaque(ValueType::Scenario)
        }
    }
}

fn check_call(c: &Call, env: &HashMap<&str, ValueType>, diags: &mut Vec<Diagnostic>) {
    let positional: Vec<Value> = c.args.iter().map(|a| static_value(a, env, diags)).collect();
    let keyword: Vec<(String, Value)> = c.kwargs.iter().map(|(k, v)| (k.clone(), static_value(v, env, diags))).collect();
    let target = c.callee.target();
    let Some(spec) = registry::lookup(target) else {
        diags.push(Diagnostic::error("unknown-function", format!("unknown function {target:?}"), c.span).with_token(target));
        return;
    };
    if let Callee::Wrapped { wrapper, inner } = &c.callee {
        let first = spec.params.first().map(|p| p.kind);
        if wrapper == "scenario_not" && first != Some(ParamKind::Scenario) {
            diags.push(
                Diagnostic::error("type", format!("scenario_not needs a function whose first argument is a scenario; {inner} has none"), c.span)
                    .with_token(inner),
            );
        }
        if !matches!(spec.kind, FunctionKind::Unary | FunctionKind::Relational | FunctionKind::Source) {
            diags.push(Diagnostic::error("type", format!("{inner} cannot be wrapped"), c.span).with_token(inner));
        }
    }
    match registry::bind(spec, positional, keyword) {
        Err(e) => diags.push(Diagnostic::error(e.code(), format!("{target}: {e}"), c.span).with_token(target)),
        Ok(args) => {
            if let Err(msg) = registry::check_ranges(target, &args) {
                diags.push(Diagnostic::error("range", format!("{target}: {msg}"), c.span).with_token(target));
            }
        }
    }
}

fn result_type(e: &Expr, env: &HashMap<&str, ValueType>) -> ValueType {
    match e {
        Expr::Str(..) => ValueType::Str,
        Expr::Int(..) | Expr::Float(..) => ValueType::Number,
        Expr::Bool(..) => ValueType::Bool,
        Expr::None(_) => ValueType::None,
        Expr::List(..) => ValueType::List,
        Expr::Call(_) => ValueType::Scenario,
        Expr::Name(n, _) => match n.as_str() {
            "log_dir" => ValueType::LogDir,
            "output_dir" => ValueType::OutputDir,
            "description" => ValueType::Str,
            other => env.get(other).copied().unwrap_or(ValueType::Scenario),
        },
    }
}

/// Arity, keyword, type, enum and literal-range checks against the registry.
/// An empty list means the program may be executed.
pub fn validate_program(program: &Program) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut env: HashMap<&str, ValueType> = HashMap::new();
    for (i, s) in program.statements.iter().enumerate() {
        let before = diags.len();
        match s {
            Statement::Assign { name, value, .. } => {
                if let Expr::Call(c) = value {
                    check_call(c, &env, &mut diags);
                } else {
                    static_value(value, &env, &mut diags);
                }
                let ty = result_type(value, &env);
                env.insert(name, ty);
            }
            Statement::Output(c) => check_call(c, &env, &mut diags),
        }
        for d in &mut diags[before..] {
            d.statement = Some(i);
        }
    }
    diags
}

/// Non-fatal findings: assigned names that are never read.
pub fn lint_program(program: &Program) -> Vec<Diagnostic> {
    fn reads<'a>(e: &'a Expr, out: &mut HashSet<&'a str>) {
        match e {
            Expr::Name(n, _) => {
                out.insert(n);
            }
            Expr::List(items, _) => items.iter().for_each(|i| reads(i, out)),
            Expr::Call(c) => c.args.iter().chain(c.kwargs.iter().map(|(_, v)| v)).for_each(|a| reads(a, out)),
            _ => {}
        }
    }
    let mut diags = Vec::new();
    for (i, s) in program.statements.iter().enumerate() {
        let Statement::Assign { name, span, .. } = s else { continue };
        let mut used = HashSet::new();
        for later in &program.statements[i + 1..] {
            match later {
                Statement::Assign { name: n, value, .. } => {
                    reads(value, &mut used);
                    if n == name && !used.contains(name.as_str()) {
                        break;
                    }
                }
                Statement::Output(c) => c.args.iter().chain(c.kwargs.iter().map(|(_, v)| v)).for_each(|a| reads(a, &mut used)),
            }
        }
        if !used.contains(name.as_str()) {
            diags.push(
                Diagnostic::warning("unused-binding", format!("{name:?} is assigned but never used"), *span)
                    .with_token(name)
                    .with_statement(i),
            );
        }
    }
    diags
}
