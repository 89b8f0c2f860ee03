//! End-to-end checks of the installed binary: artifact files, exit
//! codes, and output shapes.

use std::path::Path;
use std::process::{Command, Output};

fn binary() -> Command {
    let mut command = Command::new(env!("CARGO_BIN_EXE_nearmiss"));
    command.env_remove("NEARMISS_SEED");
    command
}

fn run(args: &[&str]) -> Output {
    binary().args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn generate_dataset(dir: &Path, preset: &str, seed: &str) -> std::path::PathBuf {
    let data = dir.join("data.json");
    let output = run(&[
        "generate",
        "--preset",
        preset,
        "--seed",
        seed,
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    data
}

#[test]
fn pipeline_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_dataset(dir.path(), "default", "7");

    let theory = dir.path().join("pain.pl");
    let output = run(&[
        "learn",
        "--data",
        data.to_str().unwrap(),
        "--class",
        "pain",
        "--mode",
        "attributes",
        "--out",
        theory.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let theory_text = std::fs::read_to_string(&theory).unwrap();
    assert!(theory_text.starts_with("pain(S) :- "), "{theory_text}");
    assert!(theory_text.ends_with(".\n"), "{theory_text}");
    let report: serde_json::Value = serde_json::from_str(&stdout(&output)).unwrap();
    assert_eq!(report["class"], "pain");
    assert_eq!(report["positives"], 37);

    let report_path = dir.path().join("report.json");
    let csv_path = dir.path().join("report.csv");
    let output = run(&[
        "evaluate",
        "--data",
        data.to_str().unwrap(),
        "--report",
        report_path.to_str().unwrap(),
        "--csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["cells"].is_array());
    assert_eq!(report["reference"].as_array().unwrap().len(), 8);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert!(
        csv.starts_with("approach,mode,metric,n_nm,l_nm,l_fm,acc_pos,covered\n"),
        "{csv}"
    );
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn fixed_seed_pipelines_are_byte_identical() {
    let once = tempfile::tempdir().unwrap();
    let again = tempfile::tempdir().unwrap();
    let mut artifacts = Vec::new();
    for dir in [once.path(), again.path()] {
        let data = generate_dataset(dir, "default", "21");
        let theory = dir.join("theory.pl");
        let report = dir.join("report.json");
        let csv = dir.join("report.csv");
        let output = run(&[
            "learn",
            "--data",
            data.to_str().unwrap(),
            "--class",
            "disgust",
            "--mode",
            "relations",
            "--out",
            theory.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", stderr(&output));
        let output = run(&[
            "evaluate",
            "--data",
            data.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
            "--csv",
            csv.to_str().unwrap(),
        ]);
        assert!(output.status.success(), "{}", stderr(&output));
        artifacts.push((
            std::fs::read(&data).unwrap(),
            std::fs::read(&theory).unwrap(),
            std::fs::read(&report).unwrap(),
            std::fs::read(&csv).unwrap(),
        ));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "datasets differ");
    assert_eq!(artifacts[0].1, artifacts[1].1, "theories differ");
    assert_eq!(artifacts[0].2, artifacts[1].2, "reports differ");
    assert_eq!(artifacts[0].3, artifacts[1].3, "csv differs");
}

#[test]
fn seed_env_var_overrides_flag() {
    let dir = tempfile::tempdir().unwrap();
    let via_env = dir.path().join("env.json");
    let output = binary()
        .args([
            "generate",
            "--seed",
            "1",
            "--out",
            via_env.to_str().unwrap(),
        ])
        .env("NEARMISS_SEED", "2")
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", stderr(&output));

    let via_flag = dir.path().join("flag.json");
    let output = run(&[
        "generate",
        "--seed",
        "2",
        "--out",
        via_flag.to_str().unwrap(),
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    assert_eq!(
        std::fs::read(&via_env).unwrap(),
        std::fs::read(&via_flag).unwrap(),
        "environment seed was ignored"
    );

    let output = binary()
        .args(["generate"])
        .env("NEARMISS_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1), "{}", stderr(&output));
    assert!(
        stderr(&output).contains("NEARMISS_SEED"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn explain_prints_json_and_sentences() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_dataset(dir.path(), "default", "7");
    let output = run(&[
        "explain",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "s94",
        "--metric",
        "jaccard",
        "--mode",
        "attributes",
        "--basis",
        "trace",
        "--miss",
        "near",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let first = text.lines().next().unwrap();
    let explanation: serde_json::Value = serde_json::from_str(first).unwrap();
    assert_eq!(explanation["target"], "s94");
    assert_eq!(explanation["kind"], "near");
    assert!(explanation["similarity"].as_str().unwrap().contains('/'));
    assert!(
        text.lines()
            .any(|l| l.starts_with("shows ") || l.starts_with("does not show ")),
        "{text}"
    );
}

#[test]
fn explain_reports_missing_near_misses_with_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_dataset(dir.path(), "relational-separable", "3");
    let output = run(&[
        "explain",
        "--data",
        data.to_str().unwrap(),
        "--target",
        "s1",
        "--metric",
        "jaccard",
        "--mode",
        "relations",
        "--basis",
        "trace",
        "--miss",
        "near",
    ]);
    assert!(output.status.success(), "{}", stderr(&output));
    let result: serde_json::Value = serde_json::from_str(stdout(&output).trim()).unwrap();
    assert_eq!(result["note"], "no near misses");
    assert_eq!(result["misses"].as_array().unwrap().len(), 0);
}

#[test]
fn usage_problems_exit_one() {
    let output = run(&["--bogus"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(stderr(&output).contains("Usage"), "{}", stderr(&output));

    let output = run(&[
        "explain", "--data", "x.json", "--target", "s1", "--miss", "sideways",
    ]);
    assert_eq!(output.status.code(), Some(1));

    let output = run(&["generate", "--preset", "mystery"]);
    assert_eq!(output.status.code(), Some(1));
    assert!(
        stderr(&output).contains("unknown preset"),
        "{}",
        stderr(&output)
    );
}

#[test]
fn invalid_data_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.json");
    std::fs::write(&data, "{\"classes\": [\"pain\"], \"sequences\": []}").unwrap();
    let output = run(&["learn", "--data", data.to_str().unwrap(), "--class", "pain"]);
    assert_eq!(output.status.code(), Some(1), "{}", stderr(&output));
    assert!(stderr(&output).contains("error:"), "{}", stderr(&output));

    let output = run(&["learn", "--data", "/nonexistent.json", "--class", "pain"]);
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn learner_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate_dataset(dir.path(), "default", "5");
    let output = run(&[
        "learn",
        "--data",
        data.to_str().unwrap(),
        "--class",
        "sadness",
        "--mode",
        "attributes",
    ]);
    assert_eq!(output.status.code(), Some(2), "{}", stderr(&output));
    assert!(stderr(&output).contains("error:"), "{}", stderr(&output));
}

#[test]
fn help_and_version_exit_zero() {
    let output = run(&["--help"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).contains("generate"));
    assert!(stdout(&output).contains("explain"));

    let output = run(&["--version"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(stdout(&output).starts_with("nearmiss"));
}
