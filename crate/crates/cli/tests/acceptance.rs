//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! when any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use scenemine_cli::manifest::PromptStatus;
use scenemine_cli::mine::{self, MineArgs};
use scenemine_core::dsl::{self, ExecOptions, Severity};
use scenemine_core::geometry::Rigid2;
use scenemine_core::io::{self, read_scenario_csv};
use scenemine_core::postprocess::{dilate_segments, filter_top_k};
use scenemine_core::{registry, Category, EngineConfig, LogBundle, LogEngine, PostprocessConfig, PredicateEngine, ScenarioSet, Timestamp, Track, TrackBox};
use scenemine_metrics::{evaluate, hota, EvalCase, EvalConfig, HotaMode, Labeled};
use scenemine_synthesis::{synthesize, ScriptedModel, SynthesisConfig};
use scenemine_synthgen::equivalence::{check_bundle, random_args, random_script};
use scenemine_synthgen::{fixture, generate_bundle, transform_bundle, AgentSpec, SceneScript, BASE_TIMESTAMP_NS};

type Outcome = Result<String, String>;

fn crates() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap().to_owned()
}

fn reference_programs() -> Vec<(String, String)> {
    let mut dirs = vec![crates().join("synthesis/programs"), crates().join("cli/tests/data/programs")];
    let mut out = Vec::new();
    for dir in dirs.drain(..) {
        let mut files: Vec<PathBuf> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        for f in files {
            out.push((f.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&f).unwrap()));
        }
    }
    out
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1 ------------------------------------------------------------------------

fn oracle_equivalence() -> Outcome {
    let started = Instant::now();
    let per_scene = 2 * registry::predicate_names().len();
    let results: Vec<(usize, Vec<String>)> = (0..1000u64)
        .into_par_iter()
        .map(|seed| match generate_bundle(&random_script(seed)) {
            Ok(bundle) => {
                let (n, mismatches) = check_bundle(&bundle, seed, per_scene);
                (n, mismatches.into_iter().map(|m| format!("seed {seed}: {m}")).collect())
            }
            Err(e) => (0, vec![format!("seed {seed}: generation failed: {e}")]),
        })
        .collect();
    let calls: usize = results.iter().map(|r| r.0).sum();
    let failures: Vec<String> = results.into_iter().flat_map(|r| r.1).collect();
    let secs = started.elapsed().as_secs_f64();
    ensure(failures.is_empty(), || format!("{} mismatches, first: {}", failures.len(), failures[0]))?;
    ensure(secs < 600.0, || format!("took {secs:.1} s"))?;
    Ok(format!("1000 scenes, {calls} calls (with negate and reverse variants), 0 mismatches in {secs:.1} s"))
}

// 2 ------------------------------------------------------------------------

fn bx(t: i64, x: f64, y: f64) -> TrackBox {
    TrackBox { timestamp: Timestamp(t), translation: [x, y, 0.75], yaw: 0.0, size: [4.0, 2.0, 1.5], confidence: 1.0 }
}

fn straight_track(id: &str, stamps: impl IntoIterator<Item = i64>, y: f64) -> Track {
    Track::new(id, Category::RegularVehicle, stamps.into_iter().map(|t| bx(t, t as f64 * 0.5, y)).collect()).unwrap()
}

fn all_referred(tracks: &[Track]) -> ScenarioSet {
    let mut s = ScenarioSet::new();
    for t in tracks {
        s.insert_all(&t.id, t.timestamps());
    }
    s
}

/// HOTA of one gt track against one pred track that agree exactly on `overlap`
/// stamps and are disjoint elsewhere, summed over the alpha grid directly.
fn hand_hota(gt_len: f64, pred_len: f64, overlap: f64, alphas: &[f64]) -> f64 {
    let per_alpha: Vec<f64> = alphas
        .iter()
        .map(|_| {
            let (tp, fn_, fp) = (overlap, gt_len - overlap, pred_len - overlap);
            let det_a = tp / (tp + fn_ + fp);
            let ass_a = (0..overlap as usize).map(|_| tp / (tp + fn_ + fp)).sum::<f64>() / tp;
            (det_a * ass_a).sqrt()
        })
        .collect();
    100.0 * per_alpha.iter().sum::<f64>() / alphas.len() as f64
}

fn metric_identities() -> Outcome {
    let cfg = EvalConfig::default();
    let modes = [HotaMode::Standard, HotaMode::Temporal, HotaMode::Track];
    let tracks = vec![straight_track("a", 1..=12, 0.0), straight_track("b", 4..=9, 6.0), straight_track("c", 2..=20, -8.0)];
    let mut gt = all_referred(&tracks[..2]);
    for t in 4..=9 {
        gt.insert_related("a", "c", Timestamp(t));
    }
    for mode in modes {
        let got = hota(&Labeled::new(&tracks, &gt), &Labeled::new(&tracks, &gt), &cfg, mode).map_err(|e| e.to_string())?;
        ensure(got == 100.0, || format!("pred = gt gives {got} in {mode:?}"))?;
        let empty = ScenarioSet::new();
        let got = hota(&Labeled::new(&[], &empty), &Labeled::new(&tracks, &gt), &cfg, mode).map_err(|e| e.to_string())?;
        ensure(got == 0.0, || format!("empty pred gives {got} in {mode:?}"))?;
        if mode != HotaMode::Standard {
            // Tracks present but nothing referred: standard mode ignores referral, the others score 0.
            let got = hota(&Labeled::new(&tracks, &empty), &Labeled::new(&tracks, &gt), &cfg, mode).map_err(|e| e.to_string())?;
            ensure(got == 0.0, || format!("unreferred pred gives {got} in {mode:?}"))?;
        }
    }
    let g = vec![straight_track("g", 1..=10, 0.0)];
    let p = vec![straight_track("p", 1..=5, 0.0)];
    let (gs, ps) = (all_referred(&g), all_referred(&p));
    let got = hota(&Labeled::new(&p, &ps), &Labeled::new(&g, &gs), &cfg, HotaMode::Standard).map_err(|e| e.to_string())?;
    let hand = hand_hota(10.0, 5.0, 5.0, &cfg.alpha_thresholds);
    ensure((got - 50.0).abs() <= 1e-9, || format!("10/5 construction gives {got}"))?;
    ensure((got - hand).abs() <= 1e-9, || format!("10/5 construction {got} vs hand expansion {hand}"))?;
    Ok(format!("identity 100 and empty 0 in all three modes; 10/5 construction {got:.12} (hand {hand:.12})"))
}

// 3 ------------------------------------------------------------------------

fn balanced_accuracy_anchor() -> Outcome {
    let tracks_a = vec![straight_track("a", 1..=10, 0.0), straight_track("b", 1..=10, 5.0)];
    let tracks_b = vec![straight_track("x", 1..=10, 0.0)];
    let times: Vec<Timestamp> = (1..=10).map(Timestamp).collect();
    let mut positive = ScenarioSet::new();
    positive.insert_all("a", (3..=6).map(Timestamp));
    let negative = ScenarioSet::new();
    let (all_a, all_b) = (all_referred(&tracks_a), all_referred(&tracks_b));
    let cases = vec![
        EvalCase { prompt: "p1", log_id: "A", pred: Labeled::new(&tracks_a, &all_a), gt: Labeled::new(&tracks_a, &positive), log_times: &times },
        EvalCase { prompt: "p1", log_id: "B", pred: Labeled::new(&tracks_b, &all_b), gt: Labeled::new(&tracks_b, &negative), log_times: &times },
        EvalCase { prompt: "p2", log_id: "A", pred: Labeled::new(&tracks_a, &all_a), gt: Labeled::new(&tracks_a, &negative), log_times: &times },
    ];
    let report = evaluate(&cases, &EvalConfig::default()).map_err(|e| e.to_string())?;
    let (log, stamp) = (report.overall.log_balanced_accuracy, report.overall.timestamp_balanced_accuracy);
    ensure(log == Some(50.0) && stamp == Some(50.0), || format!("log {log:?}, timestamp {stamp:?}"))?;
    Ok("all-positive predictor scores 50.0 / 50.0".into())
}

// 4 ------------------------------------------------------------------------

fn secs(t: Timestamp) -> f64 {
    (t.0 - BASE_TIMESTAMP_NS) as f64 * 1e-9
}

fn dilation_example() -> Result<String, String> {
    let mut script = fixture("s2_crossing").unwrap();
    script.rate_hz = 2;
    script.duration_s = 20.0;
    script.agents.truncate(1);
    script.agents[0].start_s = 3.0;
    script.agents[0].end_s = Some(15.0);
    script.queries.clear();
    let bundle = generate_bundle(&script).map_err(|e| e.to_string())?;
    let id = script.agents[0].id.clone();
    let observed: Vec<Timestamp> = bundle.track(&id).unwrap().timestamps().collect();
    let at = |s: f64| Timestamp(BASE_TIMESTAMP_NS + (s * 1e9).round() as i64);
    ensure(observed[0] == at(3.0) && observed.last() == Some(&at(15.0)), || "track window is not 3.0-15.0 s".into())?;
    let mut set = ScenarioSet::new();
    set.insert(&id, at(4.5));
    set.insert(&id, at(5.0));
    let out = dilate_segments(&set, &bundle, PostprocessConfig::default().min_segment_s);
    let got: Vec<Timestamp> = out.get(&id).map(|e| e.timestamps.iter().copied().collect()).unwrap_or_default();
    let want = vec![at(4.0), at(4.5), at(5.0), at(5.5)];
    ensure(got == want, || format!("dilated to {:?} s", got.iter().map(|t| secs(*t)).collect::<Vec<_>>()))?;
    Ok("4.5 s, 5.0 s -> 4.0..5.5 s".into())
}

fn top_k_example() -> Result<String, String> {
    let mut tracks: Vec<Track> =
        (0..250).map(|i| straight_track(&format!("v{i:03}"), 1..=(1 + i % 7), i as f64 * 3.0)).collect();
    tracks.push(Track::new("p", Category::Pedestrian, vec![bx(1, 0.0, 0.0)]).unwrap());
    let kept = filter_top_k(tracks, &PostprocessConfig::default());
    let vehicles = kept.iter().filter(|t| t.category == Category::RegularVehicle).count();
    ensure(vehicles == 200, || format!("{vehicles} vehicles survive"))?;
    ensure(kept.iter().any(|t| t.id == "p"), || "other classes were dropped".into())?;
    Ok("250 -> 200".into())
}

const FAR_PROGRAM: &str = "\
vehicles = get_objects_of_category(log_dir, category=\"VEHICLE\")
anything = get_objects_of_category(log_dir, category=\"ANY\")
crowded = near_objects(vehicles, anything, log_dir, distance_thresh=500)
output_scenario(crowded, description, log_dir, output_dir)
";

/// Every RELATED row under `out` (one directory per log) against centroid distance.
fn far_rows(out: &Path, logs: &Path) -> Result<(usize, usize), String> {
    let (mut rows, mut far) = (0, 0);
    for log in std::fs::read_dir(out).map_err(|e| e.to_string())? {
        let log = log.unwrap().path();
        if !log.is_dir() || log.file_name().is_some_and(|n| n == "programs") {
            continue;
        }
        let bundle = io::load_log(&logs.join(log.file_name().unwrap())).map_err(|e| e.to_string())?;
        for f in std::fs::read_dir(&log).unwrap() {
            let f = f.unwrap().path();
            if f.extension().is_none_or(|x| x != "csv") {
                continue;
            }
            let set = read_scenario_csv(&f).map_err(|e| e.to_string())?;
            for (id, related, t) in set.triples() {
                rows += 1;
                let a = bundle.track(id).and_then(|x| x.box_at(t)).map(|b| b.translation);
                let b = bundle.track(related).and_then(|x| x.box_at(t)).map(|b| b.translation);
                match (a, b) {
                    (Some(a), Some(b)) if (a[0] - b[0]).hypot(a[1] - b[1]) <= 50.0 => {}
                    _ => far += 1,
                }
            }
        }
    }
    Ok((rows, far))
}

fn no_far_relationships(work: &Path) -> Result<String, String> {
    let logs = work.join("far/logs");
    let mut raw_far = 0;
    for seed in 0..20 {
        let mut script = random_script(5000 + seed);
        script.duration_s = 10.0;
        script.rate_hz = 2;
        let bundle = generate_bundle(&script).map_err(|e| e.to_string())?;
        let program = dsl::parse_program(FAR_PROGRAM).map_err(|d| d[0].to_string())?;
        let engine = LogEngine::new(&bundle, EngineConfig::default());
        let run = dsl::execute_program(&program, &engine, &ExecOptions::from_config(&EngineConfig::default(), "far"))
            .map_err(|e| e.to_string())?;
        raw_far += run
            .scenario
            .triples()
            .filter(|(a, b, t)| {
                let p = bundle.track(a).unwrap().box_at(*t).unwrap().translation;
                let q = bundle.track(b).unwrap().box_at(*t).unwrap().translation;
                (p[0] - q[0]).hypot(p[1] - q[1]) > 50.0
            })
            .count();
        io::write_log(&logs, &bundle).map_err(|e| e.to_string())?;
    }
    ensure(raw_far > 0, || "no raw relationship beyond 50 m; the check is vacuous".into())?;
    let programs = work.join("far/programs");
    std::fs::create_dir_all(&programs).unwrap();
    std::fs::write(programs.join("anything_near_vehicles.py"), FAR_PROGRAM).unwrap();
    for (name, src) in reference_programs() {
        std::fs::write(programs.join(name), src).unwrap();
    }
    let out = work.join("far/out");
    let args = MineArgs { logs: logs.clone(), programs: vec![programs], prompts: None, out: out.clone(), config: None, jobs: None, dry_run: false };
    let manifest = mine::mine(&args, None).map_err(|e| format!("{e:#}"))?;
    ensure(manifest.prompts.iter().all(|p| p.status == PromptStatus::Ok), || "a program failed".into())?;
    let (rows, far) = far_rows(&out, &logs)?;
    ensure(far == 0, || format!("{far} of {rows} relationship rows beyond 50 m"))?;
    Ok(format!("{raw_far} raw triples beyond 50 m, 0 of {rows} output rows"))
}

fn postprocess_anchors(work: &Path) -> Outcome {
    let a = dilation_example()?;
    let b = top_k_example()?;
    let c = no_far_relationships(work)?;
    Ok(format!("{a}; {b}; {c}"))
}

// 5 ------------------------------------------------------------------------

fn dsl_fixtures() -> Outcome {
    let programs = reference_programs();
    let six: Vec<&(String, String)> = programs.iter().take(6).collect();
    let bundles: Vec<LogBundle> =
        ["s1_following", "s2_crossing"].iter().map(|n| generate_bundle(&fixture(n).unwrap()).unwrap()).collect();
    for (name, src) in &six {
        let program = dsl::parse_program(src).map_err(|d| format!("{name}: {}", d[0]))?;
        let errors: Vec<_> = dsl::validate_program(&program).into_iter().filter(|d| d.severity == Severity::Error).collect();
        ensure(errors.is_empty(), || format!("{name}: {}", errors[0]))?;
        for bundle in &bundles {
            let engine = LogEngine::new(bundle, EngineConfig::default());
            dsl::execute_program(&program, &engine, &ExecOptions::from_config(&EngineConfig::default(), name))
                .map_err(|e| format!("{name} on {}: {e}", bundle.log_id))?;
        }
    }
    let mut corpus: Vec<(String, String)> = programs.clone();
    for n in ["s1_following", "s2_crossing"] {
        for q in fixture(n).unwrap().queries {
            corpus.push((q.description, q.program));
        }
    }
    for (name, src) in &corpus {
        let first = dsl::parse_program(src).map_err(|d| format!("{name}: {}", d[0]))?;
        let printed = first.to_string();
        let second = dsl::parse_program(&printed).map_err(|d| format!("{name} reprinted: {}", d[0]))?;
        ensure(first == second, || format!("{name}: AST changed after pretty-printing"))?;
        ensure(second.to_string() == printed, || format!("{name}: printing is not a fixed point"))?;
    }
    let valid = format!("```python\n{}```", six[0].1);
    let model = ScriptedModel::new(["```python\nimport os\n```".to_string(), valid]);
    let got = synthesize("pedestrian crossing between stopped buses", &SynthesisConfig::default(), &model)
        .map_err(|e| e.to_string())?;
    ensure(got.attempts == 2 && model.calls() == 2, || format!("{} attempts", got.attempts))?;
    Ok(format!("6 programs run on 2 fixtures; {} programs round-trip; mock succeeds in 2 attempts", corpus.len()))
}

// 6 ------------------------------------------------------------------------

fn rigid_invariance() -> Result<String, String> {
    let transforms = [Rigid2::new(2.2, [1234.5, -987.25]), Rigid2::new(-0.7, [-50.0, 310.0]), Rigid2::new(3.1, [0.0, 0.0])];
    let mut scripts: Vec<SceneScript> = (300..330).map(random_script).collect();
    scripts.push(fixture("s1_following").unwrap());
    scripts.push(fixture("s2_crossing").unwrap());
    let mut calls = 0;
    for (i, script) in scripts.iter().enumerate() {
        let bundle = generate_bundle(script).map_err(|e| e.to_string())?;
        let base = LogEngine::new(&bundle, EngineConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        let draws: Vec<_> = registry::predicate_names()
            .iter()
            .flat_map(|f| (0..3).map(|_| (*f, random_args(f, &bundle, &mut rng))).collect::<Vec<_>>())
            .collect();
        for tf in &transforms {
            let moved = transform_bundle(&bundle, tf).map_err(|e| e.to_string())?;
            let engine = LogEngine::new(&moved, EngineConfig::default());
            for (f, args) in &draws {
                calls += 1;
                let (a, b) = (base.call(f, args).map_err(|e| e.to_string()), engine.call(f, args).map_err(|e| e.to_string()));
                ensure(a == b, || format!("{} {f}: result changed under {tf:?}", bundle.log_id))?;
            }
        }
    }
    Ok(format!("{calls} predicate calls unchanged under 3 rigid motions"))
}

fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_owned()];
    while let Some(dir) = stack.pop() {
        for e in std::fs::read_dir(&dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
                continue;
            }
            let mut bytes = std::fs::read(&p).unwrap();
            if p.file_name().is_some_and(|n| n == "manifest.json") {
                let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
                v["started_unix_s"] = 0.into();
                bytes = serde_json::to_vec_pretty(&v).unwrap();
            }
            out.insert(p.strip_prefix(root).unwrap().to_owned(), bytes);
        }
    }
    out
}

fn cli_determinism(work: &Path) -> Result<String, String> {
    let bin = env!("CARGO_BIN_EXE_scenemine");
    let gen = work.join("det/gen");
    let run = |args: &[&str], extra: &[&Path]| {
        let status = Command::new(bin).args(args).args(extra).output().map_err(|e| e.to_string())?;
        ensure(status.status.success(), || format!("{args:?} failed: {}", String::from_utf8_lossy(&status.stderr)))
    };
    run(&["gen", "--random", "8", "--seed", "77", "--out"], &[&gen])?;
    run(&["gen", "--fixture", "s1_following", "--out"], &[&gen])?;
    run(&["gen", "--fixture", "s2_crossing", "--out"], &[&gen])?;
    let first_gen = snapshot(&gen);
    std::fs::remove_dir_all(&gen).unwrap();
    run(&["gen", "--random", "8", "--seed", "77", "--out"], &[&gen])?;
    run(&["gen", "--fixture", "s1_following", "--out"], &[&gen])?;
    run(&["gen", "--fixture", "s2_crossing", "--out"], &[&gen])?;
    ensure(first_gen == snapshot(&gen), || "gen output differs between runs".into())?;

    let programs = [crates().join("synthesis/programs"), crates().join("cli/tests/data/programs")];
    let out = work.join("det/out");
    let logs = gen.join("logs");
    let mine_with = |jobs: &str| run(&["mine", "--jobs", jobs, "--logs"], &[&logs, Path::new("--programs"), &programs[0], &programs[1], Path::new("--out"), &out]);
    mine_with("1")?;
    let first = snapshot(&out);
    std::fs::remove_dir_all(&out).unwrap();
    mine_with("4")?;
    let second = snapshot(&out);
    ensure(first == second, || {
        let diff: Vec<_> = first.keys().filter(|k| first.get(*k) != second.get(*k)).collect();
        format!("mine output differs: {diff:?}")
    })?;
    Ok(format!("gen and mine reruns byte-identical ({} mine files, 1 vs 4 threads)", first.len()))
}

fn determinism(work: &Path) -> Outcome {
    let a = rigid_invariance()?;
    let b = cli_determinism(work)?;
    Ok(format!("{a}; {b}"))
}

// 7 ------------------------------------------------------------------------

/// Random agents from several scripts on the same map, merged into one 20 s, 10 Hz scene.
fn dense_script(index: u64) -> SceneScript {
    let mut base = random_script(10_000 + index * 16);
    let mut agents: Vec<AgentSpec> = Vec::new();
    let mut seed = 10_000 + index * 16;
    while agents.len() < 25 && seed < 10_000 + index * 16 + 16 {
        let s = random_script(seed);
        if s.map == base.map {
            for mut a in s.agents {
                a.id = format!("{}_{}", a.id, seed);
                agents.push(a);
            }
        }
        seed += 1;
    }
    base.agents = agents;
    base.duration_s = 20.0;
    base.rate_hz = 10;
    base.log_id = Some(format!("dense_{index:03}"));
    base
}

fn performance(work: &Path) -> Outcome {
    let logs = work.join("perf/logs");
    let bundles: Vec<LogBundle> = (0..100).into_par_iter().map(|i| generate_bundle(&dense_script(i)).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let tracks: usize = bundles.iter().map(|b| b.tracks.len()).sum();
    for b in &bundles {
        io::write_log(&logs, b).map_err(|e| e.to_string())?;
    }
    let programs = vec![crates().join("synthesis/programs"), crates().join("cli/tests/data/programs")];
    let out = work.join("perf/out");
    let args = MineArgs { logs, programs, prompts: None, out, config: None, jobs: None, dry_run: false };
    let started = Instant::now();
    let manifest = mine::mine(&args, None).map_err(|e| format!("{e:#}"))?;
    let elapsed = started.elapsed().as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, usize::from);
    ensure(manifest.prompts.len() == 10 && manifest.prompts.iter().all(|p| p.status == PromptStatus::Ok && p.logs_written == 100), || {
        "not every program ran on every log".into()
    })?;
    let detail = format!("100 logs x 10 programs ({tracks} tracks, 200 stamps each) in {elapsed:.1} s on {cores} core(s)");
    ensure(elapsed < 60.0, || detail.clone())?;
    Ok(detail)
}

fn main() {
    let work = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("metric identities", Box::new(metric_identities)),
        ("balanced accuracy anchor", Box::new(balanced_accuracy_anchor)),
        ("post-processing anchors", Box::new(|| postprocess_anchors(work.path()))),
        ("DSL fixtures", Box::new(dsl_fixtures)),
        ("determinism and invariance", Box::new(|| determinism(work.path()))),
        ("performance", Box::new(|| performance(work.path()))),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(p.downcast_ref::<String>().cloned().unwrap_or_else(|| "panicked".into())));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} [{secs:.1} s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
