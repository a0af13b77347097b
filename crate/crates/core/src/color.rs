//! Per-track color attributes, read from a `track_id,color` sidecar file.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Silver,
    Black,
    Red,
    Yellow,
    Blue,
    Unknown,
}

impl Color {
    /// Colors a query may ask for. Anything else selects every candidate.
    pub const QUERYABLE: [Color; 6] = [Color::White, Color::Silver, Color::Black, Color::Red, Color::Yellow, Color::Blue];

    pub fn name(self) -> &'static str {
        match self {
            Color::White => "white",
            Color::Silver => "silver",
            Color::Black => "black",
            Color::Red => "red",
            Color::Yellow => "yellow",
            Color::Blue => "blue",
            Color::Unknown => "unknown",
        }
    }

    /// Parses a query literal; `None` for anything outside [`Color::QUERYABLE`].
    pub fn query(s: &str) -> Option<Color> {
        Color::QUERYABLE.iter().copied().find(|c| c.name() == s)
    }
}

impl FromStr for Color {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unknown" | "" => Ok(Color::Unknown),
            other => Color::query(other).ok_or_else(|| Error::InvalidArgument(format!("unknown color {other:?}"))),
        }
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Missing entries read as [`Color::Unknown`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ColorTable {
    colors: BTreeMap<String, Color>,
}

#[derive(Deserialize, Serialize)]
struct ColorRow {
    track_id: String,
    color: String,
}

impl ColorTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, track_id: impl Into<String>, color: Color) {
        self.colors.insert(track_id.into(), color);
    }

    pub fn get(&self, track_id: &str) -> Color {
        self.colors.get(track_id).copied().unwrap_or(Color::Unknown)
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Color)> {
        self.colors.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut table = ColorTable::new();
        for row in rdr.deserialize::<ColorRow>() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let color = row.color.trim().to_ascii_lowercase().parse()?;
            table.set(row.track_id, color);
        }
        Ok(table)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        if self.colors.is_empty() {
            w.write_record(["track_id", "color"]).map_err(|e| Error::csv(path, e))?;
        }
        for (k, v) in &self.colors {
            w.serialize(ColorRow { track_id: k.clone(), color: v.name().into() })
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_is_unknown() {
        let mut t = ColorTable::new();
        t.set("a", Color::Red);
        assert_eq!(t.get("a"), Color::Red);
        assert_eq!(t.get("b"), Color::Unknown);
        assert_eq!(Color::query("chartreuse"), None);
        assert_eq!(Color::query("unknown"), None);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("colors.csv");
        let mut t = ColorTable::new();
        t.set("a", Color::Red);
        t.set("b", Color::Silver);
        t.save(&p).unwrap();
        assert_eq!(ColorTable::load(&p).unwrap(), t);
    }
}
