use std::path::{Path, PathBuf};
use std::process::Command;

use scenemine_cli::manifest::{PromptStatus, RunManifest};
use scenemine_cli::{eval, mine, synth};
use scenemine_synthesis::ScriptedModel;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_scenemine"))
}

fn crates() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap().to_owned()
}

fn reference_programs() -> PathBuf {
    crates().join("synthesis/programs")
}

fn status(cmd: &mut Command) -> i32 {
    let out = cmd.output().unwrap();
    out.status.code().unwrap_or(-1)
}

fn gen_fixture(out: &Path, name: &str) {
    let code = status(bin().args(["gen", "--fixture", name, "--out"]).arg(out));
    assert_eq!(code, 0);
}

fn mine_args(logs: &Path, programs: Vec<PathBuf>, out: &Path) -> mine::MineArgs {
    mine::MineArgs { logs: logs.into(), programs, prompts: None, out: out.into(), config: None, jobs: Some(2), dry_run: false }
}

#[test]
fn validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut reference: Vec<PathBuf> = std::fs::read_dir(reference_programs()).unwrap().map(|e| e.unwrap().path()).collect();
    reference.sort();
    assert_eq!(reference.len(), 6);
    assert_eq!(status(bin().arg("validate").args(&reference)), 0);

    let bad = dir.path().join("bad.py");
    std::fs::write(&bad, "import os\n").unwrap();
    let out = bin().args(["validate", "--json"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"severity\""));
    assert_eq!(status(bin().arg("validate").arg(dir.path().join("missing.py"))), 2);
    assert_eq!(status(bin().arg("validate")), 0);
}

#[test]
fn gen_fixture_matches_golden_bundle() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(dir.path(), "s1_following");
    let golden = crates().join("synthgen/fixtures/golden/s1_following");
    for f in ["tracks.csv", "poses.csv", "map.json", "colors.csv"] {
        let a = std::fs::read(golden.join(f)).unwrap();
        let b = std::fs::read(dir.path().join("logs/s1_following").join(f)).unwrap();
        assert!(a == b, "{f} differs from the golden copy");
    }
    assert_eq!(std::fs::read_dir(dir.path().join("gt/s1_following")).unwrap().count(), 6);
    assert!(dir.path().join("scripts/s1_following.json").is_file());
}

#[test]
fn gen_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g");
    assert_eq!(status(bin().args(["gen", "--random", "1", "--rate-hz", "7", "--out"]).arg(&out)), 2);
    let script = dir.path().join("s.json");
    std::fs::write(&script, "{\"seed\": 1}").unwrap();
    assert_eq!(status(bin().args(["gen", "--script"]).arg(&script).arg("--out").arg(&out)), 2);
    assert_eq!(status(bin().args(["gen", "--fixture", "nope", "--out"]).arg(&out)), 2);
    assert_eq!(status(bin().args(["gen", "--out"]).arg(&out)), 2);
}

#[test]
fn mine_then_eval_against_itself() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(&dir.path().join("g"), "s1_following");
    gen_fixture(&dir.path().join("g"), "s2_crossing");
    let logs = dir.path().join("g/logs");
    let out = dir.path().join("m");
    let code = status(bin().args(["mine", "--jobs", "2", "--logs"]).arg(&logs).arg("--programs").arg(reference_programs()).arg("--out").arg(&out));
    assert_eq!(code, 0);
    let manifest = RunManifest::read(&out).unwrap();
    assert_eq!(manifest.logs, ["s1_following", "s2_crossing"]);
    assert_eq!(manifest.prompts.len(), 6);
    assert!(manifest.prompts.iter().all(|p| p.status == PromptStatus::Ok && p.logs_written == 2));
    for log in &manifest.logs {
        assert_eq!(std::fs::read_dir(out.join(log)).unwrap().count(), 12);
    }

    let report = dir.path().join("report.json");
    let args = eval::EvalArgs {
        pred: out.clone(),
        gt: out.clone(),
        logs: logs.clone(),
        gt_logs: None,
        report: Some(report.clone()),
        config: None,
        jobs: Some(1),
    };
    assert_eq!(eval::run(&args), 0);
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["cases"], 12);
    assert_eq!(json["hota"], 100.0);
    assert_eq!(json["hota_track"], 100.0);

    // The fixture ground truth holds queries the reference programs do not answer.
    let args = eval::EvalArgs { gt: dir.path().join("g/gt"), report: None, ..args };
    assert_eq!(eval::run(&args), 2);
}

#[test]
fn mine_reports_failures_in_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(&dir.path().join("g"), "s2_crossing");
    let programs = dir.path().join("p");
    std::fs::create_dir(&programs).unwrap();
    std::fs::write(programs.join("a_bad.py"), "# Description: broken\nx = undefined_function(log_dir)\n").unwrap();
    std::fs::write(
        programs.join("b_good.py"),
        "peds = get_objects_of_category(log_dir, category=\"PEDESTRIAN\")\noutput_scenario(peds, description, log_dir, output_dir)\n",
    )
    .unwrap();
    let out = dir.path().join("m");
    let args = mine_args(&dir.path().join("g/logs"), vec![programs], &out);
    assert_eq!(mine::run(&args, None), 1);
    let manifest = RunManifest::read(&out).unwrap();
    assert_eq!(manifest.prompts[0].description, "broken");
    assert_eq!(manifest.prompts[0].status, PromptStatus::ParseFail);
    assert!(!manifest.prompts[0].messages.is_empty());
    assert_eq!(manifest.prompts[1].description, "b good");
    assert_eq!(manifest.prompts[1].status, PromptStatus::Ok);
    assert_eq!(manifest.prompts[1].logs_written, 1);

    let missing = mine_args(&dir.path().join("nowhere"), vec![reference_programs()], &dir.path().join("m2"));
    assert_eq!(mine::run(&missing, None), 2);
    assert!(!dir.path().join("m2").exists());
}

#[test]
fn dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(&dir.path().join("g"), "s2_crossing");
    let out = dir.path().join("m");
    let args = mine::MineArgs { dry_run: true, ..mine_args(&dir.path().join("g/logs"), vec![reference_programs()], &out) };
    let manifest = mine::mine(&args, None).unwrap();
    assert_eq!(manifest.logs, ["s2_crossing"]);
    assert!(manifest.prompts.iter().all(|p| p.logs_written == 0));
    assert!(!out.exists());
}

#[test]
fn mine_from_prompts_with_a_model() {
    let dir = tempfile::tempdir().unwrap();
    gen_fixture(&dir.path().join("g"), "s1_following");
    let prompts = dir.path().join("prompts.txt");
    std::fs::write(&prompts, "# suite\npedestrians\n\n").unwrap();
    let reply = "```python\npeds = get_objects_of_category(log_dir, category=\"PEDESTRIAN\")\noutput_scenario(peds, description, log_dir, output_dir)\n```";
    let model = ScriptedModel::new(["import os", reply]);
    let out = dir.path().join("m");
    let args = mine::MineArgs { programs: vec![], prompts: Some(prompts.clone()), ..mine_args(&dir.path().join("g/logs"), vec![], &out) };
    assert_eq!(mine::run(&args, Some(&model)), 0);
    let manifest = RunManifest::read(&out).unwrap();
    let record = &manifest.prompts[0];
    assert_eq!(record.description, "pedestrians");
    assert_eq!(record.messages, ["synthesized in 2 attempt(s)"]);
    let program = std::fs::read_to_string(record.program.as_ref().unwrap()).unwrap();
    assert!(program.starts_with("# Description: pedestrians\n"));
    let csv = std::fs::read_to_string(out.join("s1_following").join(format!("{}.csv", record.stem))).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.starts_with("T_C,")));

    let synth_out = dir.path().join("s");
    let failing = ScriptedModel::new(["import os"]);
    assert_eq!(synth::run(&synth::SynthArgs { prompts, out: synth_out.clone(), config: None }, Some(&failing)), 1);
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(synth_out.join("synthesis.json")).unwrap()).unwrap();
    assert_eq!(summary["failure_rate"], 1.0);
    assert_eq!(summary["prompts"][0]["attempts"], 4);
}
