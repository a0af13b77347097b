use std::path::PathBuf;

use clap::Args;
use scenemine_core::dsl::{self, Diagnostic, Severity};

use crate::programs::read_program;
use crate::{EXIT_INVALID, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// Program files.
    pub files: Vec<PathBuf>,
    /// Print diagnostics as JSON, one array per file.
    #[arg(long)]
    pub json: bool,
}

/// Parse errors, or validation errors plus lint warnings.
pub fn diagnose(source: &str) -> Vec<Diagnostic> {
    match dsl::parse_program(source) {
        Err(d) => d,
        Ok(program) => {
            let mut d = dsl::validate_program(&program);
            d.extend(dsl::lint_program(&program));
            d
        }
    }
}

pub fn run(args: &ValidateArgs) -> i32 {
    let mut code = EXIT_OK;
    for path in &args.files {
        let file = match read_program(path) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {e:#}");
                return EXIT_USAGE;
            }
        };
        let diagnostics = diagnose(&file.source);
        if diagnostics.iter().any(|d| d.severity == Severity::Error) {
            code = EXIT_INVALID;
        }
        if args.json {
            println!("{}", dsl::diagnostics_json(&diagnostics));
        } else if diagnostics.is_empty() {
            println!("{}: ok", path.display());
        } else {
            for d in &diagnostics {
                println!("{}: {d}", path.display());
            }
        }
    }
    code
}
