//! Filters applied around program execution: per-class top-K tracks before,
//! then relationship pruning, segment dilation and output resampling after.

use std::collections::{BTreeMap, BTreeSet};

use crate::category::Category;
use crate::config::PostprocessConfig;
use crate::geometry::dist;
use crate::io::LogBundle;
use crate::scenario::{ScenarioEntry, ScenarioSet, TimeSet};
use crate::track::{Timestamp, Track};

/// Keeps, per class, the K tracks with the largest summed confidence; ties go
/// to the smaller id. Input order is preserved.
pub fn filter_top_k(tracks: Vec<Track>, config: &PostprocessConfig) -> Vec<Track> {
    let mut by_class: BTreeMap<Category, Vec<(f64, &str)>> = BTreeMap::new();
    for t in &tracks {
        let score: f64 = t.boxes.iter().map(|b| b.confidence).sum();
        by_class.entry(t.category).or_default().push((score, &t.id));
    }
    let mut keep: BTreeSet<String> = BTreeSet::new();
    for (class, mut scored) in by_class {
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        keep.extend(scored.into_iter().take(config.top_k(class)).map(|(_, id)| id.to_owned()));
    }
    tracks.into_iter().filter(|t| keep.contains(&t.id)).collect()
}

/// Removes relationship timestamps where the two centroids are farther apart
/// than `max_distance` (or either box is missing). Referred timestamps stay.
pub fn prune_far_relationships(result: &ScenarioSet, bundle: &LogBundle, max_distance: f64) -> ScenarioSet {
    let mut out = result.clone();
    out.retain_relationships(|id, related, t| {
        let (Some(a), Some(b)) = (bundle.track(id), bundle.track(related)) else { return false };
        match (a.box_at(t), b.box_at(t)) {
            (Some(x), Some(y)) => dist(x.xy(), y.xy()) <= max_distance,
            _ => false,
        }
    });
    out
}

/// Maximal runs of consecutive track timestamps, as inclusive index ranges.
fn segments(track_times: &[Timestamp], referred: &TimeSet) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, t) in track_times.iter().enumerate() {
        if !referred.contains(t) {
            continue;
        }
        match out.last_mut() {
            Some((_, end)) if *end + 1 == i => *end = i,
            _ => out.push((i, i)),
        }
    }
    out
}

/// Widens a segment of `times[lo..=hi]` to at least `min_ns`, centered, shifted
/// inward at the track ends and snapped outward to observed timestamps.
fn dilate(times: &[Timestamp], lo: usize, hi: usize, min_ns: i64) -> (usize, usize) {
    let (first, last) = (times[0].0, times[times.len() - 1].0);
    let duration = times[hi].0 - times[lo].0;
    if duration >= min_ns {
        return (lo, hi);
    }
    let needed = min_ns - duration;
    let before = needed / 2;
    let mut start = times[lo].0 - before;
    let mut end = times[hi].0 + (needed - before);
    if start < first {
        end += first - start;
        start = first;
    }
    if end > last {
        start = (start - (end - last)).max(first);
        end = last;
    }
    let lo = times.partition_point(|t| t.0 <= start).saturating_sub(1);
    let hi = times.partition_point(|t| t.0 < end).min(times.len() - 1);
    (lo, hi)
}

/// Extends every referred segment shorter than `min_segment_s` to that length
/// within the track's observed span. Relationships are left as they are.
pub fn dilate_segments(result: &ScenarioSet, bundle: &LogBundle, min_segment_s: f64) -> ScenarioSet {
    let min_ns = (min_segment_s * 1e9).round() as i64;
    let mut out = ScenarioSet::new();
    for (id, entry) in result.entries() {
        let Some(track) = bundle.track(id) else {
            out.set_entry(id, entry.clone());
            continue;
        };
        let times: Vec<Timestamp> = track.timestamps().collect();
        let mut timestamps: TimeSet = entry.timestamps.iter().filter(|t| track.index_of(**t).is_none()).copied().collect();
        for (lo, hi) in segments(&times, &entry.timestamps) {
            let (lo, hi) = dilate(&times, lo, hi, min_ns);
            timestamps.extend(times[lo..=hi].iter().copied());
        }
        out.set_entry(id, ScenarioEntry { timestamps, related: entry.related.clone() });
    }
    out
}

/// The log timestamps nearest to each tick of a `rate_hz` grid anchored at the
/// first pose (ties go to the earlier timestamp).
pub fn output_grid(log_times: &[Timestamp], rate_hz: f64) -> BTreeSet<Timestamp> {
    let mut grid = BTreeSet::new();
    let (Some(first), Some(last)) = (log_times.first(), log_times.last()) else { return grid };
    let period = (1e9 / rate_hz).round() as i64;
    let mut tick = first.0;
    while tick <= last.0 {
        let i = log_times.partition_point(|t| t.0 < tick);
        let nearest = match (i.checked_sub(1).map(|j| log_times[j]), log_times.get(i)) {
            (Some(a), Some(b)) => {
                if tick - a.0 <= b.0 - tick {
                    a
                } else {
                    *b
                }
            }
            (Some(a), None) => a,
            (None, Some(b)) => *b,
            (None, None) => unreachable!("non-empty"),
        };
        grid.insert(nearest);
        tick += period;
    }
    grid
}

/// Keeps only timestamps on the output grid.
pub fn resample_output(result: &ScenarioSet, bundle: &LogBundle, rate_hz: f64) -> ScenarioSet {
    let grid = output_grid(&bundle.timestamps(), rate_hz);
    let mut out = result.clone();
    out.retain_pairs(|_, t| grid.contains(&t));
    out
}

/// Prune, dilate, resample: everything that follows execution.
pub fn finalize(result: &ScenarioSet, bundle: &LogBundle, config: &PostprocessConfig) -> ScenarioSet {
    let pruned = prune_far_relationships(result, bundle, config.relationship_max_dist_m);
    let dilated = dilate_segments(&pruned, bundle, config.min_segment_s);
    resample_output(&dilated, bundle, config.output_rate_hz)
}
