//! The scenario program language: a restricted subset of Python made of
//! assignments, calls, literals and the two higher-order wrappers.
//!
//! Every problem is reported as a [`Diagnostic`], which serializes to JSON so it
//! can be fed back to a program generator.

pub mod ast;
mod check;
mod exec;
mod lexer;
mod parser;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use ast::{Call, Callee, Expr, Program, Span, Statement};
pub use check::{lint_program, validate_program};
pub use exec::{execute_program, ExecError, ExecOptions, Execution};
pub use parser::parse_program;

/// Names bound by the host before a program runs.
pub const PREBOUND: [&str; 3] = ["log_dir", "output_dir", "description"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub line: usize,
    pub column: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token: Option<String>,
    /// Zero-based statement index, for runtime failures.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statement: Option<usize>,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: Span) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code: code.to_owned(),
            message: message.into(),
            line: span.line,
            column: span.column,
            token: None,
            statement: None,
        }
    }

    pub fn warning(code: &str, message: impl Into<String>, span: Span) -> Self {
        Diagnostic { severity: Severity::Warning, ..Diagnostic::error(code, message, span) }
    }

    pub fn with_token(mut self, token: &str) -> Self {
        self.token = Some(token.to_owned());
        self
    }

    pub fn with_statement(mut self, index: usize) -> Self {
        self.statement = Some(index);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("diagnostics serialize")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {kind}[{}]: {}", self.line, self.column, self.code, self.message)
    }
}

/// Renders diagnostics as a JSON array.
pub fn diagnostics_json(diags: &[Diagnostic]) -> String {
    serde_json::to_string_pretty(diags).expect("diagnostics serialize")
}

/// The contents of the first fenced code block (preferring ```python), or the
/// whole text when there is no fence.
pub fn extract_code(text: &str) -> &str {
    let find_block = |tag: &str| -> Option<&str> {
        let start = text.find(tag)?;
        let after = &text[start + tag.len()..];
        let body_start = after.find('\n').map(|i| i + 1)?;
        if after[..body_start].trim().contains(char::is_whitespace) {
            return None;
        }
        let body = &after[body_start..];
        let end = body.find("```").unwrap_or(body.len());
        Some(&body[..end])
    };
    find_block("```python").or_else(|| find_block("```py")).or_else(|| find_block("```")).unwrap_or(text)
}
