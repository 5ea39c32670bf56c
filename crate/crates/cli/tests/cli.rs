use std::path::Path;
use std::process::{Command, Output};

use repominer_fixtures::scenarios;
use repominer_fixtures::{FixtureRepo, Op};

fn repominer(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_repominer"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("REPOMINER_CLONE_DIR")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn mine_counts_on_disjoint_defects() {
    let sc = scenarios::disjoint_defects().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = repominer(&[
        "mine",
        "failure-prone-files",
        path(sc.repo.path()),
        "--language",
        "yaml-config",
        "--out",
        path(&report),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out).trim(),
        "fixing commits: 2, fixed files: 2, failure-prone files: 4"
    );
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["fixing_commits"].as_array().unwrap().len(), 2);
    assert_eq!(json["fixed_files"].as_array().unwrap().len(), 2);
    assert_eq!(json["failure_prone_files"].as_array().unwrap().len(), 4);
    assert_eq!(json["run_timestamp"], "2023-11-14T22:13:20Z");
    assert_eq!(json["plugin"], "yaml-config");
}

#[test]
fn mine_to_stdout_omits_later_stages() {
    let sc = scenarios::disjoint_defects().unwrap();
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(sc.repo.path()),
        "--language",
        "yaml-config",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["fixing_commits"].as_array().unwrap().len(), 2);
    assert!(json.get("fixed_files").is_none());
    assert!(stderr(&out).contains("fixing commits: 2"));
}

#[test]
fn no_fixing_commits_is_success() {
    let mut repo = FixtureRepo::new().unwrap();
    repo.commit("initial", &[Op::write("site.yml", "a: 1\n")])
        .unwrap();
    let out = repominer(&[
        "mine",
        "failure-prone-files",
        path(repo.path()),
        "--language",
        "yaml-config",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["fixing_commits"], serde_json::json!([]));
    assert_eq!(json["fixed_files"], serde_json::json!([]));
    assert_eq!(json["failure_prone_files"], serde_json::json!([]));
}

#[test]
fn unknown_plugin_lists_registered_ones() {
    let sc = scenarios::disjoint_defects().unwrap();
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(sc.repo.path()),
        "--language",
        "cobol",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(
        err.contains("yaml-config") && err.contains("generic"),
        "{err}"
    );
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(repominer(&["mine"]).status.code(), Some(1));
    assert_eq!(
        repominer(&["mine", "everything", ".", "--language", "yaml-config"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(repominer(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(repominer(&["--help"]).status.code(), Some(0));
    assert_eq!(repominer(&["--version"]).status.code(), Some(0));
}

#[test]
fn bad_rules_file_exits_1() {
    let sc = scenarios::disjoint_defects().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let rules = dir.path().join("rules.toml");
    std::fs::write(
        &rules,
        "version = 1\n[message_patterns]\nsecurity = [\"([\"]\n",
    )
    .unwrap();
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(sc.repo.path()),
        "--language",
        "yaml-config",
        "--rules",
        path(&rules),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("security"), "{}", stderr(&out));
}

#[test]
fn repository_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nothing-here");
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(&missing),
        "--language",
        "yaml-config",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let sc = scenarios::disjoint_defects().unwrap();
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(sc.repo.path()),
        "--language",
        "yaml-config",
        "--branch",
        "nope",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown branch"));

    let url = format!("file://{}", missing.display());
    let out = repominer(&["mine", "fixing-commits", &url, "--language", "yaml-config"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn extract_with_labels() {
    let sc = scenarios::disjoint_defects().unwrap();
    sc.repo.tag("v1", &sc.c(3)).unwrap();
    sc.repo.tag("v2", &sc.c(8)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let csv = dir.path().join("data.csv");
    let repo = path(sc.repo.path());
    let out = repominer(&[
        "mine",
        "failure-prone-files",
        repo,
        "--language",
        "yaml-config",
        "--out",
        path(&report),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = repominer(&[
        "extract-metrics",
        repo,
        "--language",
        "yaml-config",
        "--fpf",
        path(&report),
        "--metrics",
        "product",
        "--out",
        path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out).trim(), "rows: 6, failure-prone: 2");
    let text = std::fs::read_to_string(&csv).unwrap();
    let positives: Vec<&str> = text
        .lines()
        .skip(1)
        .filter(|l| l.split(',').nth(4) == Some("1"))
        .collect();
    assert_eq!(positives.len(), 2);
    assert!(positives.iter().all(|l| l.starts_with("tasks/main.yml,")));
}

#[test]
fn extract_errors() {
    let sc = scenarios::disjoint_defects().unwrap();
    sc.repo.tag("v1", &sc.c(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let repo = path(sc.repo.path());
    let delta_only = repominer(&[
        "extract-metrics",
        repo,
        "--language",
        "yaml-config",
        "--metrics",
        "delta",
        "--out",
        path(&csv),
    ]);
    assert_eq!(delta_only.status.code(), Some(1));
    let missing = repominer(&[
        "extract-metrics",
        repo,
        "--language",
        "yaml-config",
        "--fpf",
        path(&dir.path().join("absent.json")),
        "--out",
        path(&csv),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(!csv.exists());
}

#[test]
fn release_without_language_files_gives_header_only() {
    let mut repo = FixtureRepo::new().unwrap();
    let c1 = repo
        .commit("initial", &[Op::write("README.md", "hello\n")])
        .unwrap();
    repo.tag("v1", &c1).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("data.csv");
    let out = repominer(&[
        "extract-metrics",
        path(repo.path()),
        "--language",
        "yaml-config",
        "--out",
        path(&csv),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.ends_with('\n') && !text.contains('\r'));
}

#[test]
fn clone_dir_is_reused_and_runs_are_reproducible() {
    let sc = scenarios::overlapping_defects().unwrap();
    sc.repo.tag("v1", &sc.c(5)).unwrap();
    sc.repo.tag("v2", &sc.c(9)).unwrap();
    let url = format!("file://{}", sc.repo.path().display());
    let dir = tempfile::tempdir().unwrap();
    let clone = dir.path().join("clone");
    let run = |n: usize| {
        let report = dir.path().join(format!("r{n}.json"));
        let csv = dir.path().join(format!("d{n}.csv"));
        let json = dir.path().join(format!("d{n}.json"));
        let out = repominer(&[
            "mine",
            "failure-prone-files",
            &url,
            "--language",
            "yaml-config",
            "--clone-dir",
            path(&clone),
            "--out",
            path(&report),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        let out = repominer(&[
            "extract-metrics",
            &url,
            "--language",
            "yaml-config",
            "--clone-dir",
            path(&clone),
            "--fpf",
            path(&report),
            "--out",
            path(&csv),
            "--json",
            path(&json),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        [report, csv, json].map(|p| std::fs::read(p).unwrap())
    };
    assert_eq!(run(1), run(2));
}

#[test]
fn generic_plugin_needs_extensions() {
    let sc = scenarios::disjoint_defects().unwrap();
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(sc.repo.path()),
        "--language",
        "generic",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let out = repominer(&[
        "mine",
        "fixing-commits",
        path(sc.repo.path()),
        "--language",
        "generic",
        "--ext",
        "yml,yaml",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
}
