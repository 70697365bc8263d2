use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

fn pfs(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pfs")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn golden_instances() -> Vec<PathBuf> {
    let mut paths: Vec<PathBuf> = fs::read_dir(golden_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_str().unwrap().ends_with(".instance.json"))
        .collect();
    paths.sort();
    paths
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Solver output for every golden instance is pinned byte for byte.
/// Run with `UPDATE_GOLDEN=1` to rewrite the expected files.
#[test]
fn golden_solve_outputs() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let instances = golden_instances();
    assert!(instances.len() >= 10);
    for instance in instances {
        let (code, stdout, stderr) = pfs(&["solve", s(&instance)]);
        assert_eq!(code, 0, "{}: {stderr}", instance.display());
        let expected = PathBuf::from(s(&instance).replace(".instance.json", ".schedule.json"));
        if update {
            fs::write(&expected, &stdout).unwrap();
        }
        assert_eq!(stdout, fs::read_to_string(&expected).unwrap(), "{}", expected.display());
    }
}

#[test]
fn golden_values_match_the_oracle() {
    for instance in golden_instances() {
        let (_, solved, _) = pfs(&["solve", s(&instance)]);
        let (code, oracle, stderr) = pfs(&["oracle", s(&instance)]);
        assert_eq!(code, 0, "{stderr}");
        let solved: Value = serde_json::from_str(&solved).unwrap();
        let oracle: Value = serde_json::from_str(&oracle).unwrap();
        assert_eq!(solved["value"], oracle["value"], "{}", instance.display());
    }
}

#[test]
fn single_job_value_is_release_plus_processing() {
    let dir = TempDir::new().unwrap();
    let i = write(&dir, "i.json", r#"{"machines":2,"jobs":[{"id":1,"release":"3/2","processing":4}]}"#);
    let (code, out, _) = pfs(&["solve", &i, "--criterion", "sum_cj"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["value"], "11/2");
}

#[test]
fn non_agreeable_instance_names_the_pair() {
    let dir = TempDir::new().unwrap();
    let i = write(
        &dir,
        "i.json",
        r#"{"machines":1,"jobs":[{"id":1,"release":0,"processing":3},{"id":2,"release":1,"processing":1},{"id":3,"release":2,"processing":2}]}"#,
    );
    let (code, _, err) = pfs(&["solve", &i, "--criterion", "sum_cj"]);
    assert_eq!(code, 2);
    assert!(err.contains("jobs 1 and 2"), "{err}");

    let (code, out, _) = pfs(&["solve", &i, "--criterion", "sum_cj", "--order", "2,1,3"]);
    assert_eq!(code, 0);
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["certificate"], "user_supplied");
    assert_eq!(doc["order"], serde_json::json!([2, 1, 3]));
}

#[test]
fn parse_and_io_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.json", r#"{"machines":1,"jobs":[{"id":1,"release":0,"processing":1.5}]}"#);
    assert_eq!(pfs(&["solve", &bad, "--criterion", "sum_cj"]).0, 1);
    let missing = dir.path().join("missing.json");
    assert_eq!(pfs(&["solve", s(&missing), "--criterion", "sum_cj"]).0, 1);
    let ok = write(&dir, "ok.json", r#"{"machines":1,"jobs":[{"id":1,"release":0,"processing":1}]}"#);
    let (code, _, err) = pfs(&["solve", &ok]);
    assert_eq!(code, 1);
    assert!(err.contains("--criterion"));
    assert_eq!(pfs(&["solve", &ok, "--criterion", "wulj"]).0, 1);
}

const TWO_JOBS: &str = r#"{"machines":2,"jobs":[{"id":1,"release":0,"processing":2},{"id":2,"release":0,"processing":2}],
    "criterion":{"kind":"sum","functions":"sum_cj"}}"#;

#[test]
fn verify_reports_overlaps_and_delays() {
    let dir = TempDir::new().unwrap();
    let i = write(&dir, "i.json", TWO_JOBS);
    let overlap = write(
        &dir,
        "overlap.json",
        r#"{"pieces":[{"job":1,"machine":1,"start":0,"end":2},{"job":2,"machine":1,"start":1,"end":3}]}"#,
    );
    let (code, out, _) = pfs(&["verify", &i, &overlap, "--json"]);
    assert_eq!(code, 3);
    assert!(out.contains("machine_overlap"), "{out}");

    // Job 2 waits on M2 during [0, 1) although it is released.
    let delayed = write(
        &dir,
        "delayed.json",
        r#"{"pieces":[{"job":1,"machine":1,"start":0,"end":2},{"job":2,"machine":2,"start":1,"end":3}]}"#,
    );
    assert_eq!(pfs(&["verify", &i, &delayed]).0, 0);
    let (code, out, _) = pfs(&["verify", &i, &delayed, "--non-delay"]);
    assert_eq!(code, 3);
    assert!(out.contains("non_delay: 1 violation(s)"), "{out}");

    let (code, out, _) = pfs(&["verify", &i, &overlap, "--pfs"]);
    assert_eq!(code, 3);
    assert!(out.contains("pfs: skipped"), "{out}");
}

#[test]
fn solver_output_passes_every_structural_check() {
    for instance in golden_instances() {
        let dir = TempDir::new().unwrap();
        let (_, out, _) = pfs(&["solve", s(&instance)]);
        let schedule = write(&dir, "s.json", &out);
        let (code, report, _) = pfs(&["verify", s(&instance), &schedule, "--pfs", "--non-delay", "--vertical"]);
        assert_eq!(code, 0, "{}: {report}", instance.display());
    }
}

#[test]
fn pfs_transform_output_verifies() {
    let dir = TempDir::new().unwrap();
    let i = write(
        &dir,
        "i.json",
        r#"{"machines":2,"jobs":[{"id":1,"release":0,"processing":2},{"id":2,"release":0,"processing":2},{"id":3,"release":0,"processing":3}]}"#,
    );
    // Completions 3, 3, 4 follow the ids, but M1 runs 1, 2, 1 and M2 runs 3, 2, 3.
    let tangled = write(
        &dir,
        "s.json",
        r#"{"pieces":[{"job":1,"machine":1,"start":0,"end":1},{"job":2,"machine":1,"start":1,"end":2},
            {"job":1,"machine":1,"start":2,"end":3},{"job":3,"machine":2,"start":0,"end":2},
            {"job":2,"machine":2,"start":2,"end":3},{"job":3,"machine":2,"start":3,"end":4}]}"#,
    );
    assert_eq!(pfs(&["verify", &i, &tangled, "--pfs"]).0, 3);
    let (code, out, err) = pfs(&["transform", &i, &tangled, "pfs"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("C before: [3, 3, 4]"), "{err}");
    let fixed = write(&dir, "fixed.json", &out);
    let (code, report, _) = pfs(&["verify", &i, &fixed, "--pfs", "--non-delay"]);
    assert_eq!(code, 0, "{report}");
}

#[test]
fn exchange_requires_the_later_completion() {
    let dir = TempDir::new().unwrap();
    let i = write(&dir, "i.json", TWO_JOBS);
    let s1 = write(
        &dir,
        "s.json",
        r#"{"pieces":[{"job":1,"machine":1,"start":0,"end":2},{"job":2,"machine":2,"start":0,"end":2}]}"#,
    );
    let (code, _, err) = pfs(&["transform", &i, &s1, "exchange", "1", "2"]);
    assert_eq!(code, 4);
    assert!(err.contains("C_1 > C_2"), "{err}");

    let s2 = write(
        &dir,
        "late.json",
        r#"{"pieces":[{"job":2,"machine":1,"start":0,"end":2},{"job":1,"machine":1,"start":2,"end":4}]}"#,
    );
    let (code, out, err) = pfs(&["transform", &i, &s2, "exchange", "1", "2"]);
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("C after:  [2, 4]"), "{err}");
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["value"], "6");
}

#[test]
fn normalize_is_a_fixpoint_on_non_delay_schedules() {
    let dir = TempDir::new().unwrap();
    let i = write(&dir, "i.json", TWO_JOBS);
    let text = "{\n  \"pieces\": [\n    {\n      \"job\": 1,\n      \"machine\": 1,\n      \"start\": 0,\n      \"end\": 2\n    },\n    {\n      \"job\": 2,\n      \"machine\": 2,\n      \"start\": 0,\n      \"end\": 2\n    }\n  ],\n  \"value\": \"4\"\n}\n";
    let sched = write(&dir, "s.json", text);
    let (code, out, _) = pfs(&["transform", &i, &sched, "normalize"]);
    assert_eq!(code, 0);
    assert_eq!(out, text);
}

#[test]
fn normalize_and_vertical_repair_a_schedule() {
    let dir = TempDir::new().unwrap();
    let i = write(&dir, "i.json", TWO_JOBS);
    let sched = write(
        &dir,
        "s.json",
        r#"{"pieces":[{"job":2,"machine":1,"start":1,"end":3},{"job":1,"machine":2,"start":0,"end":2}]}"#,
    );
    let out_path = dir.path().join("n.json");
    let (code, _, _) = pfs(&["transform", &i, &sched, "normalize", "--out", s(&out_path)]);
    assert_eq!(code, 0);
    assert_eq!(pfs(&["verify", &i, s(&out_path), "--non-delay"]).0, 0);
    assert_eq!(pfs(&["verify", &i, s(&out_path), "--vertical"]).0, 3);
    let (code, out, _) = pfs(&["transform", &i, s(&out_path), "vertical"]);
    assert_eq!(code, 0);
    let v = write(&dir, "v.json", &out);
    assert_eq!(pfs(&["verify", &i, &v, "--vertical", "--non-delay", "--pfs"]).0, 0);
}

#[test]
fn gantt_is_deterministic_and_follows_the_machine_sequences() {
    let dir = TempDir::new().unwrap();
    let instance = golden_dir().join("agreeable_releases.instance.json");
    let (_, out, _) = pfs(&["solve", s(&instance)]);
    let sched = write(&dir, "s.json", &out);
    let svg_path = dir.path().join("g.svg");
    assert_eq!(pfs(&["gantt", s(&instance), &sched, "--out", s(&svg_path)]).0, 0);
    let svg = fs::read_to_string(&svg_path).unwrap();
    let (_, again, _) = pfs(&["gantt", s(&instance), &sched]);
    assert_eq!(svg, again);

    // Job labels per machine, left to right, are subsequences of the one order.
    let doc: Value = serde_json::from_str(&out).unwrap();
    let order: Vec<u64> = doc["order"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    for q in 1..=2 {
        let tag = format!(" on M{q}: [");
        let seq: Vec<u64> = svg
            .lines()
            .filter(|l| l.contains(&tag))
            .map(|l| l.split("<title>job ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap())
            .collect();
        let mut it = order.iter();
        assert!(seq.iter().all(|j| it.any(|o| o == j)), "M{q}: {seq:?}");
    }

    let empty = write(&dir, "empty.json", r#"{"pieces":[]}"#);
    let (code, svg, _) = pfs(&["gantt", s(&instance), &empty]);
    assert_eq!(code, 0);
    assert!(svg.contains(">M1<") && !svg.contains("<title>job"));
}

#[test]
fn generated_instances_round_trip() {
    let dir = TempDir::new().unwrap();
    let (code, text, _) =
        pfs(&["generate", "--n", "5", "--m", "2", "--seed", "9", "--agreeable", "--criterion", "sum_wj_tj"]);
    assert_eq!(code, 0);
    let (_, again, _) =
        pfs(&["generate", "--n", "5", "--m", "2", "--seed", "9", "--agreeable", "--criterion", "sum_wj_tj"]);
    assert_eq!(text, again);
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["machines"], 2);
    let jobs = doc["jobs"].as_array().unwrap();
    assert_eq!(jobs.len(), 5);
    let key = |j: &Value| (j["release"].as_i64().unwrap(), j["processing"].as_i64().unwrap());
    assert!(jobs.windows(2).all(|w| key(&w[0]) <= key(&w[1])));
    let path = write(&dir, "i.json", &text);
    let (code, oracle, _) = pfs(&["oracle", &path, "--oracle-cap", "4"]);
    assert_eq!(code, 1, "{oracle}");
    assert_eq!(pfs(&["oracle", &path, "--criterion", "wulj", "--common-due", "5"]).0, 0);
}
