use std::collections::{BTreeMap, HashMap, HashSet};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use scenemine_core::{Error, Result, ScenarioSet, TimeSet, Timestamp, Track, TrackBox};
use serde::{Deserialize, Serialize};

use crate::iou::box_iou_3d;

/// Slack on the `similarity >= alpha` test so that an exact match is not lost
/// to rounding in the intersection area.
const ALPHA_EPS: f64 = 1e-10;
/// Fixed-point scale for the assignment solver.
const WEIGHT_SCALE: f64 = 1e9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Similarity {
    Iou3d,
    /// `max(0, 1 - d / zero_at_m)` on BEV centroid distance.
    CenterDistance { zero_at_m: f64 },
}

impl Similarity {
    pub fn score(&self, a: &TrackBox, b: &TrackBox) -> f64 {
        match self {
            Similarity::Iou3d => box_iou_3d(a, b),
            Similarity::CenterDistance { zero_at_m } => {
                let d = (a.translation[0] - b.translation[0]).hypot(a.translation[1] - b.translation[1]);
                (1.0 - d / zero_at_m).max(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    pub similarity: Similarity,
    pub alpha_thresholds: Vec<f64>,
    /// Also score related objects with the temporal variant.
    pub score_related: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            similarity: Similarity::Iou3d,
            alpha_thresholds: (1..=19).map(|i| i as f64 * 0.05).collect(),
            score_related: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        let a = &self.alpha_thresholds;
        if a.is_empty() || a.iter().any(|x| !(*x > 0.0 && *x < 1.0)) || a.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("alpha thresholds must be strictly increasing in (0, 1)".into()));
        }
        if let Similarity::CenterDistance { zero_at_m } = self.similarity {
            if !(zero_at_m > 0.0) {
                return Err(Error::InvalidArgument("zero_at_m must be positive".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HotaMode {
    /// Every box of every track.
    Standard,
    /// Only the referred timestamps.
    Temporal,
    /// Every box of any track that is referred at least once.
    Track,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Referred,
    Related,
}

/// Tracks plus the scenario that labels them, for one (prompt, log) pair.
#[derive(Debug, Clone, Copy)]
pub struct Labeled<'a> {
    pub tracks: &'a [Track],
    pub scenario: &'a ScenarioSet,
}

impl<'a> Labeled<'a> {
    pub fn new(tracks: &'a [Track], scenario: &'a ScenarioSet) -> Self {
        Labeled { tracks, scenario }
    }

    fn role_stamps(&self, role: Role) -> BTreeMap<&'a str, TimeSet> {
        let mut out: BTreeMap<&str, TimeSet> = BTreeMap::new();
        for (id, entry) in self.scenario.entries() {
            match role {
                Role::Referred => {
                    if !entry.timestamps.is_empty() {
                        out.entry(id.as_str()).or_default().extend(entry.timestamps.iter().copied());
                    }
                }
                Role::Related => {
                    for (related, ts) in &entry.related {
                        out.entry(related.as_str()).or_default().extend(ts.iter().copied());
                    }
                }
            }
        }
        out
    }

    /// Boxes kept under `mode`, grouped by timestamp, each tagged with its track index.
    fn detections(&self, mode: HotaMode, role: Role) -> Result<BTreeMap<Timestamp, Vec<(usize, &'a TrackBox)>>> {
        let mut seen = HashSet::new();
        for t in self.tracks {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::InvalidArgument(format!("duplicate track id {}", t.id)));
            }
        }
        let stamps = self.role_stamps(role);
        let mut out: BTreeMap<Timestamp, Vec<(usize, &TrackBox)>> = BTreeMap::new();
        for (i, track) in self.tracks.iter().enumerate() {
            let marked = stamps.get(track.id.as_str());
            for b in &track.boxes {
                let keep = match mode {
                    HotaMode::Standard => true,
                    HotaMode::Temporal => marked.is_some_and(|s| s.contains(&b.timestamp)),
                    HotaMode::Track => marked.is_some(),
                };
                if keep {
                    out.entry(b.timestamp).or_default().push((i, b));
                }
            }
        }
        Ok(out)
    }
}

/// Maximum-weight one-to-one assignment; returns (row, column) pairs.
pub fn optimal_assignment(weights: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let rows = weights.len();
    let cols = weights.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let fixed = |w: f64| (w * WEIGHT_SCALE).round() as i64;
    if rows <= cols {
        let m = Matrix::from_fn(rows, cols, |(r, c)| fixed(weights[r][c]));
        let (_, assign) = kuhn_munkres(&m);
        assign.into_iter().enumerate().collect()
    } else {
        let m = Matrix::from_fn(cols, rows, |(c, r)| fixed(weights[r][c]));
        let (_, assign) = kuhn_munkres(&m);
        let mut pairs: Vec<(usize, usize)> = assign.into_iter().enumerate().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        pairs
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AlphaCounts {
    pub tp: u64,
    pub fn_: u64,
    pub fp: u64,
    /// Sum over true positives of their association accuracy.
    pub ass_sum: f64,
}

/// Additive HOTA state; merge across (prompt, log) pairs before scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotaCounts {
    pub per_alpha: Vec<AlphaCounts>,
}

impl HotaCounts {
    pub fn zero(alphas: usize) -> Self {
        HotaCounts { per_alpha: vec![AlphaCounts::default(); alphas] }
    }

    pub fn merge(&mut self, other: &HotaCounts) {
        for (a, b) in self.per_alpha.iter_mut().zip(&other.per_alpha) {
            a.tp += b.tp;
            a.fn_ += b.fn_;
            a.fp += b.fp;
            a.ass_sum += b.ass_sum;
        }
    }

    pub fn det_a(&self) -> Vec<f64> {
        self.per_alpha.iter().map(|c| ratio(c.tp as f64, (c.tp + c.fn_ + c.fp) as f64)).collect()
    }

    pub fn ass_a(&self) -> Vec<f64> {
        self.per_alpha.iter().map(|c| ratio(c.ass_sum, c.tp as f64)).collect()
    }

    /// Percentage. Both sides empty counts as a perfect score.
    pub fn score(&self) -> f64 {
        if self.per_alpha.iter().all(|c| c.tp + c.fn_ + c.fp == 0) {
            return 100.0;
        }
        let n = self.per_alpha.len() as f64;
        let sum: f64 = self.det_a().iter().zip(self.ass_a()).map(|(d, a)| (d * a).sqrt()).sum();
        100.0 * sum / n
    }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Raw HOTA counts for one (prompt, log) pair.
pub fn hota_counts(pred: &Labeled, gt: &Labeled, config: &EvalConfig, mode: HotaMode, role: Role) -> Result<HotaCounts> {
    config.validate()?;
    let pred_dets = pred.detections(mode, role)?;
    let gt_dets = gt.detections(mode, role)?;
    let alphas = &config.alpha_thresholds;
    let mut counts = HotaCounts::zero(alphas.len());

    let mut gt_count = vec![0u64; gt.tracks.len()];
    let mut pred_count = vec![0u64; pred.tracks.len()];
    let mut pair_tp: Vec<HashMap<(usize, usize), u64>> = vec![HashMap::new(); alphas.len()];
    let empty = Vec::new();

    let stamps: std::collections::BTreeSet<Timestamp> = pred_dets.keys().chain(gt_dets.keys()).copied().collect();
    for t in stamps {
        let g = gt_dets.get(&t).unwrap_or(&empty);
        let p = pred_dets.get(&t).unwrap_or(&empty);
        g.iter().for_each(|(i, _)| gt_count[*i] += 1);
        p.iter().for_each(|(j, _)| pred_count[*j] += 1);
        let sim: Vec<Vec<f64>> = g.iter().map(|(_, gb)| p.iter().map(|(_, pb)| config.similarity.score(gb, pb)).collect()).collect();
        for (k, alpha) in alphas.iter().enumerate() {
            let passes = |s: f64| s >= alpha - ALPHA_EPS;
            let weights: Vec<Vec<f64>> = sim.iter().map(|row| row.iter().map(|s| if passes(*s) { *s } else { 0.0 }).collect()).collect();
            let mut matched = 0u64;
            for (r, c) in optimal_assignment(&weights) {
                if passes(sim[r][c]) {
                    matched += 1;
                    *pair_tp[k].entry((g[r].0, p[c].0)).or_default() += 1;
                }
            }
            let c = &mut counts.per_alpha[k];
            c.tp += matched;
            c.fn_ += g.len() as u64 - matched;
            c.fp += p.len() as u64 - matched;
        }
    }
    for (k, pairs) in pair_tp.iter().enumerate() {
        let mut sorted: Vec<(&(usize, usize), &u64)> = pairs.iter().collect();
        sorted.sort_unstable();
        counts.per_alpha[k].ass_sum = sorted
            .into_iter()
            .map(|(&(g, p), &tpa)| {
                let tpa = tpa as f64;
                tpa * tpa / (gt_count[g] as f64 + pred_count[p] as f64 - tpa)
            })
            .sum();
    }
    Ok(counts)
}

/// HOTA percentage for one (prompt, log) pair, scoring referred objects.
pub fn hota(pred: &Labeled, gt: &Labeled, config: &EvalConfig, mode: HotaMode) -> Result<f64> {
    Ok(hota_counts(pred, gt, config, mode, Role::Referred)?.score())
}

#[cfg(test)]
mod tests {
    use super::*;
    use scenemine_core::Category;

    fn bx(t: i64, x: f64) -> TrackBox {
        TrackBox { timestamp: Timestamp(t), translation: [x, 0.0, 0.75], yaw: 0.0, size: [4.0, 2.0, 1.5], confidence: 1.0 }
    }

    fn track(id: &str, stamps: impl IntoIterator<Item = i64>, x: f64) -> Track {
        Track::new(id, Category::RegularVehicle, stamps.into_iter().map(|t| bx(t, x)).collect()).unwrap()
    }

    fn all_referred(tracks: &[Track]) -> ScenarioSet {
        let mut s = ScenarioSet::new();
        for t in tracks {
            s.insert_all(&t.id, t.timestamps());
        }
        s
    }

    #[test]
    fn identity_scores_exactly_100() {
        let tracks = vec![track("a", 1..=10, 0.0), track("b", 3..=7, 10.0)];
        let s = all_referred(&tracks);
        let l = Labeled::new(&tracks, &s);
        for mode in [HotaMode::Standard, HotaMode::Temporal, HotaMode::Track] {
            assert_eq!(hota(&l, &l, &EvalConfig::default(), mode).unwrap(), 100.0);
        }
    }

    #[test]
    fn empty_prediction_scores_zero() {
        let tracks = vec![track("a", 1..=10, 0.0)];
        let s = all_referred(&tracks);
        let none = ScenarioSet::new();
        let gt = Labeled::new(&tracks, &s);
        let pred = Labeled::new(&[], &none);
        for mode in [HotaMode::Standard, HotaMode::Temporal, HotaMode::Track] {
            assert_eq!(hota(&pred, &gt, &EvalConfig::default(), mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn half_matched_track() {
        // TP = 5, FN = 5, FP = 0 at every alpha: DetA = 5/10, AssA = 5/(10 + 5 - 5).
        let gt_tracks = vec![track("g", 1..=10, 0.0)];
        let pred_tracks = vec![track("p", 1..=5, 0.0)];
        let (gs, ps) = (all_referred(&gt_tracks), all_referred(&pred_tracks));
        let h = hota(&Labeled::new(&pred_tracks, &ps), &Labeled::new(&gt_tracks, &gs), &EvalConfig::default(), HotaMode::Standard)
            .unwrap();
        assert!((h - 50.0).abs() < 1e-9, "{h}");
    }

    #[test]
    fn temporal_penalizes_extent_track_does_not() {
        let tracks = vec![track("a", 1..=10, 0.0)];
        let mut gs = ScenarioSet::new();
        gs.insert_all("a", (4..=6).map(Timestamp));
        let ps = all_referred(&tracks);
        let (pred, gt) = (Labeled::new(&tracks, &ps), Labeled::new(&tracks, &gs));
        let cfg = EvalConfig::default();
        assert!(hota(&pred, &gt, &cfg, HotaMode::Temporal).unwrap() < 100.0);
        assert_eq!(hota(&pred, &gt, &cfg, HotaMode::Track).unwrap(), 100.0);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let tracks = vec![track("a", 1..=2, 0.0), track("a", 3..=4, 0.0)];
        let s = ScenarioSet::new();
        let l = Labeled::new(&tracks, &s);
        assert!(hota(&l, &l, &EvalConfig::default(), HotaMode::Standard).is_err());
    }

    #[test]
    fn bad_alphas_rejected() {
        let cfg = EvalConfig { alpha_thresholds: vec![0.5, 0.5], ..EvalConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = EvalConfig { alpha_thresholds: vec![0.0, 0.5], ..EvalConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn related_role_scores_related_objects() {
        let tracks = vec![track("a", 1..=4, 0.0), track("r", 1..=4, 10.0)];
        let mut s = ScenarioSet::new();
        s.insert_related("a", "r", Timestamp(2));
        let l = Labeled::new(&tracks, &s);
        let c = hota_counts(&l, &l, &EvalConfig::default(), HotaMode::Temporal, Role::Related).unwrap();
        assert!(c.per_alpha.iter().all(|a| a.tp == 1 && a.fn_ == 0 && a.fp == 0));
    }
}
