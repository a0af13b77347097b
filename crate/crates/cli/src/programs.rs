use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// A scenario program read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramFile {
    pub path: PathBuf,
    pub description: String,
    pub source: String,
}

/// The text after a `# Description:` comment, else the file stem with
/// underscores read as spaces.
pub fn program_description(stem: &str, source: &str) -> String {
    source
        .lines()
        .filter_map(|l| l.trim().strip_prefix('#'))
        .find_map(|c| {
            let c = c.trim();
            c.get(..12).filter(|h| h.eq_ignore_ascii_case("description:")).map(|_| c[12..].trim().to_owned())
        })
        .filter(|d| !d.is_empty())
        .unwrap_or_else(|| stem.replace('_', " "))
}

/// Reads program files; directories contribute their `*.py` files in name order.
pub fn load_programs(paths: &[PathBuf]) -> Result<Vec<ProgramFile>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut inner: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("reading {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "py"))
                .collect();
            inner.sort();
            files.extend(inner);
        } else {
            files.push(p.clone());
        }
    }
    files.iter().map(|f| read_program(f)).collect()
}

pub fn read_program(path: &Path) -> Result<ProgramFile> {
    let source = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(ProgramFile { path: path.to_owned(), description: program_description(&stem, &source), source })
}

/// Descriptions from a prompts file: one per line; blank lines and `#` comments skipped.
pub fn read_prompts(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_owned).collect())
}
