use proptest::prelude::*;
use scenemine_core::{Category, ScenarioSet, Timestamp, Track, TrackBox};
use scenemine_metrics::{hota, optimal_assignment, EvalConfig, HotaMode, Labeled};

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Best total weight by trying every injection of the smaller side into the larger.
fn brute_force(w: &[Vec<f64>]) -> f64 {
    let (rows, cols) = (w.len(), w[0].len());
    let n = rows.max(cols);
    permutations(n)
        .into_iter()
        .map(|perm| (0..rows).filter(|r| perm[*r] < cols).map(|r| w[r][perm[r]]).sum::<f64>())
        .fold(0.0, f64::max)
}

fn weights() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(0.0f64..1.0, c), r))
}

fn bx(t: i64, x: f64, y: f64) -> TrackBox {
    TrackBox { timestamp: Timestamp(t), translation: [x, y, 0.75], yaw: 0.0, size: [4.0, 2.0, 1.5], confidence: 1.0 }
}

#[derive(Debug, Clone)]
struct Instance {
    tracks: Vec<Track>,
    referred: ScenarioSet,
}

/// Up to five tracks over six stamps with random presence, jitter and referral.
fn instance() -> impl Strategy<Value = Instance> {
    prop::collection::vec((prop::collection::vec((any::<bool>(), -1.0f64..1.0, any::<bool>()), 6), -20.0f64..20.0), 1..=5)
        .prop_map(|specs| {
            let mut tracks = Vec::new();
            let mut referred = ScenarioSet::new();
            for (k, (stamps, base)) in specs.into_iter().enumerate() {
                let id = format!("t{k}");
                let boxes: Vec<TrackBox> = stamps
                    .iter()
                    .enumerate()
                    .filter(|(_, (present, _, _))| *present)
                    .map(|(t, (_, jitter, _))| bx(t as i64 + 1, base + jitter, k as f64 * 5.0))
                    .collect();
                for (t, (present, _, refer)) in stamps.iter().enumerate() {
                    if *present && *refer {
                        referred.insert(&id, Timestamp(t as i64 + 1));
                    }
                }
                if !boxes.is_empty() {
                    tracks.push(Track::new(id, Category::RegularVehicle, boxes).unwrap());
                }
            }
            Instance { tracks, referred }
        })
}

fn renamed(inst: &Instance, prefix: &str) -> Instance {
    let rename = |id: &str| format!("{prefix}{id}");
    let mut tracks: Vec<Track> = inst
        .tracks
        .iter()
        .map(|t| Track { id: rename(&t.id), ..t.clone() })
        .collect();
    tracks.reverse();
    let mut referred = ScenarioSet::new();
    for (id, t) in inst.referred.pairs() {
        referred.insert(&rename(id), t);
    }
    Instance { tracks, referred }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn assignment_is_optimal(w in weights()) {
        let pairs = optimal_assignment(&w);
        let total: f64 = pairs.iter().map(|(r, c)| w[*r][*c]).sum();
        prop_assert!((total - brute_force(&w)).abs() < 1e-6);
        let rows: std::collections::HashSet<_> = pairs.iter().map(|p| p.0).collect();
        let cols: std::collections::HashSet<_> = pairs.iter().map(|p| p.1).collect();
        prop_assert_eq!(rows.len(), pairs.len());
        prop_assert_eq!(cols.len(), pairs.len());
    }

    #[test]
    fn scores_bounded_and_label_invariant(pred in instance(), gt in instance()) {
        let cfg = EvalConfig::default();
        let p2 = renamed(&pred, "x_");
        let g2 = renamed(&gt, "y_");
        for mode in [HotaMode::Standard, HotaMode::Temporal, HotaMode::Track] {
            let a = hota(&Labeled::new(&pred.tracks, &pred.referred), &Labeled::new(&gt.tracks, &gt.referred), &cfg, mode).unwrap();
            let b = hota(&Labeled::new(&p2.tracks, &p2.referred), &Labeled::new(&g2.tracks, &g2.referred), &cfg, mode).unwrap();
            prop_assert!((0.0..=100.0).contains(&a));
            prop_assert!((a - b).abs() < 1e-9, "{:?}: {} vs {}", mode, a, b);
        }
    }

    #[test]
    fn self_comparison_is_perfect(inst in instance()) {
        let l = Labeled::new(&inst.tracks, &inst.referred);
        for mode in [HotaMode::Standard, HotaMode::Temporal, HotaMode::Track] {
            prop_assert_eq!(hota(&l, &l, &EvalConfig::default(), mode).unwrap(), 100.0);
        }
    }

    #[test]
    fn whole_track_predictions_favor_track_mode(gt in instance()) {
        // Predict every box of every ground-truth track that is referred at all.
        let mut pred = ScenarioSet::new();
        for t in &gt.tracks {
            if gt.referred.get(&t.id).is_some() {
                pred.insert_all(&t.id, t.timestamps());
            }
        }
        let cfg = EvalConfig::default();
        let (p, g) = (Labeled::new(&gt.tracks, &pred), Labeled::new(&gt.tracks, &gt.referred));
        let track = hota(&p, &g, &cfg, HotaMode::Track).unwrap();
        let temporal = hota(&p, &g, &cfg, HotaMode::Temporal).unwrap();
        prop_assert!(track >= temporal - 1e-9);
    }
}
