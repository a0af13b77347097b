use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use scenemine_core::{Result, Timestamp};
use serde::{Deserialize, Serialize};

use crate::balanced::{log_outcome, timestamp_outcomes, Confusion};
use crate::hota::{hota_counts, EvalConfig, HotaCounts, HotaMode, Labeled, Role};

/// One (prompt, log) pair to score.
#[derive(Debug, Clone)]
pub struct EvalCase<'a> {
    pub prompt: &'a str,
    pub log_id: &'a str,
    pub pred: Labeled<'a>,
    pub gt: Labeled<'a>,
    /// Timestamps over which timestamp-level accuracy is counted.
    pub log_times: &'a [Timestamp],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub hota: f64,
    pub hota_temporal: f64,
    pub hota_track: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hota_temporal_related: Option<f64>,
    /// `None` when the ground truth lacks either positives or negatives.
    pub log_balanced_accuracy: Option<f64>,
    pub timestamp_balanced_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PromptScores {
    pub prompt: String,
    pub logs: usize,
    #[serde(flatten)]
    pub scores: Scores,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub cases: usize,
    #[serde(flatten)]
    pub overall: Scores,
    pub per_prompt: Vec<PromptScores>,
}

#[derive(Debug, Clone)]
struct Tally {
    standard: HotaCounts,
    temporal: HotaCounts,
    track: HotaCounts,
    related: Option<HotaCounts>,
    logs: Confusion,
    stamps: Confusion,
    cases: usize,
}

impl Tally {
    fn of(case: &EvalCase, config: &EvalConfig) -> Result<Tally> {
        let counts = |mode, role| hota_counts(&case.pred, &case.gt, config, mode, role);
        Ok(Tally {
            standard: counts(HotaMode::Standard, Role::Referred)?,
            temporal: counts(HotaMode::Temporal, Role::Referred)?,
            track: counts(HotaMode::Track, Role::Referred)?,
            related: if config.score_related { Some(counts(HotaMode::Temporal, Role::Related)?) } else { None },
            logs: log_outcome(case.pred.scenario, case.gt.scenario),
            stamps: timestamp_outcomes(case.pred.scenario, case.gt.scenario, case.log_times),
            cases: 1,
        })
    }

    fn merge(&mut self, other: &Tally) {
        self.standard.merge(&other.standard);
        self.temporal.merge(&other.temporal);
        self.track.merge(&other.track);
        if let (Some(a), Some(b)) = (&mut self.related, &other.related) {
            a.merge(b);
        }
        self.logs.merge(&other.logs);
        self.stamps.merge(&other.stamps);
        self.cases += other.cases;
    }

    fn scores(&self) -> Scores {
        Scores {
            hota: self.standard.score(),
            hota_temporal: self.temporal.score(),
            hota_track: self.track.score(),
            hota_temporal_related: self.related.as_ref().map(HotaCounts::score),
            log_balanced_accuracy: self.logs.balanced_accuracy().ok(),
            timestamp_balanced_accuracy: self.stamps.balanced_accuracy().ok(),
        }
    }
}

/// Scores every case, then aggregates per prompt and overall. Counts are summed
/// before scoring, so the result does not depend on case order.
pub fn evaluate(cases: &[EvalCase], config: &EvalConfig) -> Result<EvalReport> {
    config.validate()?;
    let tallies: Vec<Tally> = cases.par_iter().map(|c| Tally::of(c, config)).collect::<Result<_>>()?;
    let mut by_prompt: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut overall: Option<Tally> = None;
    for (case, tally) in cases.iter().zip(&tallies) {
        match by_prompt.get_mut(case.prompt) {
            Some(t) => t.merge(tally),
            None => {
                by_prompt.insert(case.prompt, tally.clone());
            }
        }
        match &mut overall {
            Some(t) => t.merge(tally),
            None => overall = Some(tally.clone()),
        }
    }
    let empty = || Tally {
        standard: HotaCounts::zero(config.alpha_thresholds.len()),
        temporal: HotaCounts::zero(config.alpha_thresholds.len()),
        track: HotaCounts::zero(config.alpha_thresholds.len()),
        related: config.score_related.then(|| HotaCounts::zero(config.alpha_thresholds.len())),
        logs: Confusion::default(),
        stamps: Confusion::default(),
        cases: 0,
    };
    Ok(EvalReport {
        cases: cases.len(),
        overall: overall.unwrap_or_else(empty).scores(),
        per_prompt: by_prompt
            .into_iter()
            .map(|(prompt, t)| PromptScores { prompt: prompt.to_owned(), logs: t.cases, scores: t.scores() })
            .collect(),
    })
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.2}"))
}

/// Fixed-width text rendering of a report.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    let header = ["prompt", "logs", "HOTA", "HOTA-Temporal", "HOTA-Track", "Log BA", "Timestamp BA"];
    let mut rows: Vec<[String; 7]> = report
        .per_prompt
        .iter()
        .map(|p| {
            let s = &p.scores;
            [
                p.prompt.clone(),
                p.logs.to_string(),
                pct(Some(s.hota)),
                pct(Some(s.hota_temporal)),
                pct(Some(s.hota_track)),
                pct(s.log_balanced_accuracy),
                pct(s.timestamp_balanced_accuracy),
            ]
        })
        .collect();
    let s = &report.overall;
    rows.push([
        "ALL".into(),
        report.cases.to_string(),
        pct(Some(s.hota)),
        pct(Some(s.hota_temporal)),
        pct(Some(s.hota_track)),
        pct(s.log_balanced_accuracy),
        pct(s.timestamp_balanced_accuracy),
    ]);
    let widths: Vec<usize> =
        (0..7).map(|i| rows.iter().map(|r| r[i].chars().count()).chain([header[i].len()]).max().unwrap_or(0)).collect();
    let line = |cells: &[&str]| {
        let mut l = String::new();
        for (i, c) in cells.iter().enumerate() {
            if i == 0 {
                let _ = write!(l, "{c:<w$}", w = widths[0]);
            } else {
                let _ = write!(l, "  {c:>w$}", w = widths[i]);
            }
        }
        l.trim_end().to_owned()
    };
    out.push_str(&line(&header));
    out.push('\n');
    for r in &rows {
        out.push_str(&line(&r.iter().map(String::as_str).collect::<Vec<_>>()));
        out.push('\n');
    }
    if let Some(r) = s.hota_temporal_related {
        let _ = writeln!(out, "HOTA-Temporal (related): {r:.2}");
    }
    out
}
