//! Fixed instances scored against hand expansion of the HOTA definition.

use scenemine_core::{Category, ScenarioSet, Timestamp, Track, TrackBox};
use scenemine_metrics::{evaluate, hota, render_table, EvalCase, EvalConfig, HotaMode, Labeled};

fn bx(t: i64, x: f64) -> TrackBox {
    TrackBox { timestamp: Timestamp(t), translation: [x, 0.0, 0.75], yaw: 0.0, size: [4.0, 2.0, 1.5], confidence: 1.0 }
}

fn track(id: &str, stamps: impl IntoIterator<Item = i64>, x: f64) -> Track {
    Track::new(id, Category::RegularVehicle, stamps.into_iter().map(|t| bx(t, x)).collect()).unwrap()
}

fn referred(tracks: &[Track]) -> ScenarioSet {
    let mut s = ScenarioSet::new();
    for t in tracks {
        s.insert_all(&t.id, t.timestamps());
    }
    s
}

/// Direct evaluation of the HOTA sums when every matched pair is an exact box
/// match and there is a single gt and a single pred track.
fn single_pair_hota(gt_len: f64, pred_len: f64, overlap: f64) -> f64 {
    let det = overlap / (gt_len + pred_len - overlap);
    let ass = overlap / (gt_len + pred_len - overlap);
    100.0 * (det * ass).sqrt()
}

#[test]
fn ten_stamp_five_match_is_fifty() {
    let gt = vec![track("g", 1..=10, 0.0)];
    let pred = vec![track("p", 1..=5, 0.0)];
    let (gs, ps) = (referred(&gt), referred(&pred));
    let got = hota(&Labeled::new(&pred, &ps), &Labeled::new(&gt, &gs), &EvalConfig::default(), HotaMode::Standard).unwrap();
    assert!((got - 50.0).abs() < 1e-9);
    assert!((got - single_pair_hota(10.0, 5.0, 5.0)).abs() < 1e-9);
}

#[test]
fn partial_overlap_with_offset_box() {
    // 8 gt stamps, 6 pred stamps; stamps 3..=6 overlap exactly and stamps 7..=8
    // are predicted 10 m away (IoU 0 at every alpha).
    let gt = vec![track("g", 1..=8, 0.0)];
    let pred = vec![Track::new(
        "p",
        Category::RegularVehicle,
        (3..=6).map(|t| bx(t, 0.0)).chain((7..=8).map(|t| bx(t, 10.0))).collect(),
    )
    .unwrap()];
    let (gs, ps) = (referred(&gt), referred(&pred));
    let got = hota(&Labeled::new(&pred, &ps), &Labeled::new(&gt, &gs), &EvalConfig::default(), HotaMode::Standard).unwrap();
    // TP 4, FN 4, FP 2; TPA 4, FNA 4, FPA 2.
    assert!((got - single_pair_hota(8.0, 6.0, 4.0)).abs() < 1e-9);
}

#[test]
fn id_switch_halves_association() {
    // One gt track split over two pred tracks of five stamps each.
    let gt = vec![track("g", 1..=10, 0.0)];
    let pred = vec![track("p1", 1..=5, 0.0), track("p2", 6..=10, 0.0)];
    let (gs, ps) = (referred(&gt), referred(&pred));
    let got = hota(&Labeled::new(&pred, &ps), &Labeled::new(&gt, &gs), &EvalConfig::default(), HotaMode::Standard).unwrap();
    // DetA = 1; every TP has A = 5 / (10 + 5 - 5) = 0.5.
    assert!((got - 100.0 * 0.5f64.sqrt()).abs() < 1e-9);
}

#[test]
fn report_aggregates_and_renders() {
    let tracks = vec![track("a", 1..=4, 0.0)];
    let all = referred(&tracks);
    let none = ScenarioSet::new();
    let times: Vec<Timestamp> = (1..=4).map(Timestamp).collect();
    let cases = vec![
        EvalCase { prompt: "p", log_id: "l1", pred: Labeled::new(&tracks, &all), gt: Labeled::new(&tracks, &all), log_times: &times },
        EvalCase { prompt: "p", log_id: "l2", pred: Labeled::new(&tracks, &all), gt: Labeled::new(&tracks, &none), log_times: &times },
    ];
    let r = evaluate(&cases, &EvalConfig::default()).unwrap();
    assert_eq!(r.per_prompt.len(), 1);
    assert_eq!(r.overall.log_balanced_accuracy, Some(50.0));
    assert_eq!(r.overall.timestamp_balanced_accuracy, Some(50.0));
    let table = render_table(&r);
    assert!(table.lines().next().unwrap().starts_with("prompt"));
    assert!(table.contains("ALL"));
}
