use std::collections::{BTreeMap, BTreeSet};

use repominer_core::classifier::{DefectCategory, RuleSet};
use repominer_core::git::{
    open_session, ChangeKind, CommitId, RepositorySession, RepositorySource,
};
use repominer_core::miner::{
    identify_fixed_files, identify_fixing_commits, label_snapshots, merge_rule, FixedFile,
    IntervalMerge,
};
use repominer_core::plugin::{GenericExtensionPlugin, YamlConfigPlugin};
use repominer_core::szz::{bug_introducing_commit, SzzQuery};
use repominer_core::Error;
use repominer_fixtures::scenarios::{self, DEFECT_FILE};
use repominer_fixtures::synthetic::{SyntheticConfig, SyntheticHistory};
use repominer_fixtures::{lines, FixtureRepo, Op};

fn id(s: &str) -> CommitId {
    s.parse().unwrap()
}

fn session(repo: &FixtureRepo) -> RepositorySession {
    open_session(&RepositorySource::local(repo.path())).unwrap()
}

fn triples(fixed: &[FixedFile]) -> Vec<(String, String, String)> {
    fixed
        .iter()
        .map(|f| (f.filepath.clone(), f.fic.to_string(), f.bic.to_string()))
        .collect()
}

#[test]
fn disjoint_defects_are_recorded_separately() {
    let sc = scenarios::disjoint_defects().unwrap();
    let s = session(&sc.repo);
    let plugin = YamlConfigPlugin;
    let fixing = identify_fixing_commits(&s, &plugin, &RuleSet::default());
    let ids: Vec<String> = fixing.iter().map(|r| r.commit_id.to_string()).collect();
    assert_eq!(ids, vec![sc.c(9), sc.c(4)]);

    let fixed = identify_fixed_files(&s, &fixing, &plugin).unwrap();
    assert_eq!(
        triples(&fixed),
        vec![
            (DEFECT_FILE.into(), sc.c(9), sc.c(8)),
            (DEFECT_FILE.into(), sc.c(4), sc.c(1)),
        ]
    );

    let snaps = label_snapshots(&s, &fixed, &plugin).unwrap();
    let got: Vec<(String, String)> = snaps
        .iter()
        .map(|f| (f.commit_id.to_string(), f.fixing_commit_id.to_string()))
        .collect();
    assert_eq!(
        got,
        vec![
            (sc.c(1), sc.c(4)),
            (sc.c(2), sc.c(4)),
            (sc.c(3), sc.c(4)),
            (sc.c(8), sc.c(9))
        ]
    );
    assert!(snaps.iter().all(|f| f.filepath == DEFECT_FILE));
}

#[test]
fn nested_defect_widens_the_interval() {
    let sc = scenarios::overlapping_defects().unwrap();
    let s = session(&sc.repo);
    let plugin = YamlConfigPlugin;
    let fixing = identify_fixing_commits(&s, &plugin, &RuleSet::default());
    assert_eq!(fixing.len(), 2);
    let fixed = identify_fixed_files(&s, &fixing, &plugin).unwrap();
    assert_eq!(
        triples(&fixed),
        vec![(DEFECT_FILE.into(), sc.c(9), sc.c(4))]
    );
    let snaps = label_snapshots(&s, &fixed, &plugin).unwrap();
    let got: Vec<String> = snaps.iter().map(|f| f.commit_id.to_string()).collect();
    assert_eq!(got, (4..=8).map(|n| sc.c(n)).collect::<Vec<_>>());
}

#[test]
fn fixing_commit_categories() {
    let mut repo = FixtureRepo::new().unwrap();
    repo.commit(
        "initial",
        &[
            Op::write("tasks/main.yml", "a: 1\n"),
            Op::write("notes.txt", "x\n"),
        ],
    )
    .unwrap();
    let c2 = repo
        .commit(
            "fix config default",
            &[Op::write("tasks/main.yml", "a: 2\n")],
        )
        .unwrap();
    repo.commit("fix typo", &[Op::write("notes.txt", "y\n")])
        .unwrap();
    let s = session(&repo);
    let fixing = identify_fixing_commits(&s, &YamlConfigPlugin, &RuleSet::default());
    assert_eq!(fixing.len(), 1);
    assert_eq!(fixing[0].commit_id.as_str(), c2);
    assert_eq!(
        fixing[0].categories,
        BTreeSet::from([DefectCategory::ConfigurationData])
    );
}

#[test]
fn no_gated_messages() {
    let mut repo = FixtureRepo::new().unwrap();
    repo.commit("initial", &[Op::write("tasks/main.yml", "a: 1\n")])
        .unwrap();
    repo.commit("tweak value", &[Op::write("tasks/main.yml", "a: 2\n")])
        .unwrap();
    let s = session(&repo);
    assert!(identify_fixing_commits(&s, &YamlConfigPlugin, &RuleSet::default()).is_empty());
    assert!(identify_fixed_files(&s, &[], &YamlConfigPlugin)
        .unwrap()
        .is_empty());
}

#[test]
fn added_file_is_not_a_fixed_file() {
    let mut repo = FixtureRepo::new().unwrap();
    repo.commit("initial", &[Op::write("tasks/main.yml", "a: 1\n")])
        .unwrap();
    repo.commit(
        "fix missing config",
        &[Op::write("tasks/extra.yml", "b: 1\n")],
    )
    .unwrap();
    let s = session(&repo);
    let fixing = identify_fixing_commits(&s, &YamlConfigPlugin, &RuleSet::default());
    assert_eq!(fixing.len(), 1);
    assert!(identify_fixed_files(&s, &fixing, &YamlConfigPlugin)
        .unwrap()
        .is_empty());
}

#[test]
fn pure_addition_fix_is_skipped() {
    let mut repo = FixtureRepo::new().unwrap();
    repo.commit("initial", &[Op::write("tasks/main.yml", "a: 1\n")])
        .unwrap();
    repo.commit(
        "fix missing setting",
        &[Op::write("tasks/main.yml", "a: 1\nb: 2\n")],
    )
    .unwrap();
    let s = session(&repo);
    let fixing = identify_fixing_commits(&s, &YamlConfigPlugin, &RuleSet::default());
    assert_eq!(fixing.len(), 1);
    assert!(identify_fixed_files(&s, &fixing, &YamlConfigPlugin)
        .unwrap()
        .is_empty());
}

#[test]
fn snapshots_of_short_intervals() {
    let mut repo = FixtureRepo::new().unwrap();
    for i in 1..=9 {
        repo.commit(
            &format!("c{i}"),
            &[Op::write("tasks/main.yml", format!("v: {i}\n"))],
        )
        .unwrap();
    }
    let c = |n: usize| id(&repo.commits()[n - 1]);
    let s = session(&repo);
    let ff = FixedFile {
        filepath: "tasks/main.yml".into(),
        fic: c(6),
        bic: c(4),
        aliases: BTreeSet::new(),
    };
    let snaps = label_snapshots(&s, std::slice::from_ref(&ff), &YamlConfigPlugin).unwrap();
    let got: Vec<&CommitId> = snaps.iter().map(|f| &f.commit_id).collect();
    assert_eq!(got, vec![&c(4), &c(5)]);
    assert!(snaps.iter().all(|f| f.fixing_commit_id == c(6)));

    let minimal = FixedFile { bic: c(5), ..ff };
    assert_eq!(
        label_snapshots(&s, &[minimal], &YamlConfigPlugin)
            .unwrap()
            .len(),
        1
    );
}

#[test]
fn snapshots_follow_renames() {
    let mut repo = FixtureRepo::new().unwrap();
    let c1 = repo
        .commit(
            "initial",
            &[Op::write(
                "tasks/old.yml",
                lines(&["a: 1", "b: 2", "c: 3", "d: 4"]),
            )],
        )
        .unwrap();
    let c2 = repo
        .commit("move", &[Op::rename("tasks/old.yml", "tasks/new.yml")])
        .unwrap();
    let c3 = repo
        .commit(
            "fix config value",
            &[Op::write(
                "tasks/new.yml",
                lines(&["a: 10", "b: 2", "c: 3", "d: 4"]),
            )],
        )
        .unwrap();
    let s = session(&repo);
    let fixing = identify_fixing_commits(&s, &YamlConfigPlugin, &RuleSet::default());
    let fixed = identify_fixed_files(&s, &fixing, &YamlConfigPlugin).unwrap();
    assert_eq!(fixed.len(), 1);
    assert_eq!(fixed[0].bic.as_str(), c1);
    assert_eq!(fixed[0].fic.as_str(), c3);
    assert_eq!(
        fixed[0].aliases,
        BTreeSet::from(["tasks/new.yml".to_string(), "tasks/old.yml".to_string()])
    );
    let snaps: BTreeSet<(String, String)> = label_snapshots(&s, &fixed, &YamlConfigPlugin)
        .unwrap()
        .into_iter()
        .map(|f| (f.filepath, f.commit_id.to_string()))
        .collect();
    assert_eq!(
        snaps,
        BTreeSet::from([
            ("tasks/old.yml".to_string(), c1),
            ("tasks/new.yml".to_string(), c2)
        ])
    );
}

#[test]
fn generic_plugin_filters_by_extension() {
    let mut repo = FixtureRepo::new().unwrap();
    repo.commit(
        "initial",
        &[
            Op::write("src/app.py", "x = 1\n"),
            Op::write("conf.yml", "a: 1\n"),
        ],
    )
    .unwrap();
    repo.commit("fix bug in app", &[Op::write("src/app.py", "x = 2\n")])
        .unwrap();
    repo.commit("fix config", &[Op::write("conf.yml", "a: 2\n")])
        .unwrap();
    let s = session(&repo);
    let py = GenericExtensionPlugin::new(&["py"], Some("#".into())).unwrap();
    // "fix bug in app" carries no category under the default rules except through the diff.
    let fixing = identify_fixing_commits(&s, &py, &RuleSet::default());
    assert_eq!(fixing.len(), 1);
    assert_eq!(fixing[0].commit_id.to_string(), repo.commits()[1]);
}

#[test]
fn szz_picks_the_oldest_blamed_commit() {
    let mut repo = FixtureRepo::new().unwrap();
    let c1 = repo
        .commit(
            "c1",
            &[Op::write("tasks/a.yml", lines(&["a: 1", "b: 1", "c: 1"]))],
        )
        .unwrap();
    let c2 = repo
        .commit(
            "c2",
            &[Op::write("tasks/a.yml", lines(&["a: 1", "b: 2", "c: 1"]))],
        )
        .unwrap();
    let c3 = repo
        .commit(
            "fix",
            &[Op::write("tasks/a.yml", lines(&["a: 9", "b: 9", "c: 1"]))],
        )
        .unwrap();
    let s = session(&repo);
    let change = &s.commit(&id(&c3)).unwrap().changes[0];
    let query = SzzQuery {
        fixing_commit_id: id(&c3),
        filepath: "tasks/a.yml".into(),
        deleted_lines: change.deleted_lines.clone(),
    };
    assert_eq!(
        bug_introducing_commit(&s, &query, &YamlConfigPlugin).unwrap(),
        id(&c1)
    );

    let only_b = SzzQuery {
        deleted_lines: vec![(2, "b: 2".into())],
        ..query.clone()
    };
    assert_eq!(
        bug_introducing_commit(&s, &only_b, &YamlConfigPlugin).unwrap(),
        id(&c2)
    );

    let comments = SzzQuery {
        deleted_lines: vec![(2, "  # b".into()), (3, "   ".into())],
        ..query.clone()
    };
    assert!(matches!(
        bug_introducing_commit(&s, &comments, &YamlConfigPlugin),
        Err(Error::NoBlameAnchor { .. })
    ));

    let root = SzzQuery {
        fixing_commit_id: id(&c1),
        deleted_lines: vec![(1, "a: 1".into())],
        ..query
    };
    assert!(matches!(
        bug_introducing_commit(&s, &root, &YamlConfigPlugin),
        Err(Error::NoBlameAnchor { .. })
    ));
}

#[test]
fn merge_rule_cases() {
    assert_eq!(merge_rule(None, 1, 5), IntervalMerge::Append);
    // Older, disjoint defect.
    assert_eq!(merge_rule(Some(7), 0, 3), IntervalMerge::Append);
    // Recorded bic strictly inside the new interval.
    assert_eq!(merge_rule(Some(4), 3, 5), IntervalMerge::ExtendBic);
    // New interval contained in the recorded one.
    assert_eq!(merge_rule(Some(2), 3, 5), IntervalMerge::Keep);
    // Fix commit is the recorded bic.
    assert_eq!(merge_rule(Some(5), 3, 5), IntervalMerge::Keep);
    assert_eq!(merge_rule(Some(3), 3, 5), IntervalMerge::Keep);
}

/// Pipeline output in commit indices, checked against the ground-truth
/// oracle of the synthetic history.
fn check_synthetic(seed: u64, cfg: &SyntheticConfig) {
    let h = SyntheticHistory::generate(seed, cfg).unwrap();
    let s = open_session(&RepositorySource::local(h.repo.path())).unwrap();
    let plugin = YamlConfigPlugin;
    let idx = |c: &CommitId| h.index_of(c.as_str()).unwrap();

    let fixing = identify_fixing_commits(&s, &plugin, &RuleSet::default());
    let want: Vec<usize> = (0..h.commits.len())
        .rev()
        .filter(|&i| h.is_fix(i))
        .collect();
    assert_eq!(
        fixing.iter().map(|r| idx(&r.commit_id)).collect::<Vec<_>>(),
        want,
        "seed {seed}"
    );

    let fixed = identify_fixed_files(&s, &fixing, &plugin).unwrap();
    let got: Vec<(String, usize, usize)> = fixed
        .iter()
        .map(|f| (f.filepath.clone(), idx(&f.bic), idx(&f.fic)))
        .collect();
    assert_eq!(got, h.oracle_intervals(), "seed {seed}");

    let snaps: BTreeSet<(String, usize, usize)> = label_snapshots(&s, &fixed, &plugin)
        .unwrap()
        .into_iter()
        .map(|f| (f.filepath, idx(&f.commit_id), idx(&f.fixing_commit_id)))
        .collect();
    assert_eq!(snaps, h.oracle_snapshots(), "seed {seed}");
}

#[test]
fn synthetic_histories_match_oracle() {
    let cfg = SyntheticConfig {
        commits: 40,
        rename_prob: 0.15,
        ..Default::default()
    };
    for seed in 0..30 {
        check_synthetic(seed, &cfg);
    }
}

#[test]
fn szz_matches_last_writer_on_every_modification() {
    for seed in 100..120 {
        let h = SyntheticHistory::generate(seed, &SyntheticConfig::default()).unwrap();
        let s = open_session(&RepositorySource::local(h.repo.path())).unwrap();
        let mut checked = BTreeMap::new();
        for (i, commit) in s.history().iter().enumerate() {
            for change in commit
                .changes
                .iter()
                .filter(|c| c.change_kind == ChangeKind::Modified)
            {
                let Some(want) = h.oracle_bic(i, change.path()) else {
                    continue;
                };
                let query = SzzQuery {
                    fixing_commit_id: commit.id.clone(),
                    filepath: change.path().to_string(),
                    deleted_lines: change.deleted_lines.clone(),
                };
                let got = bug_introducing_commit(&s, &query, &YamlConfigPlugin).unwrap();
                assert_eq!(got.as_str(), h.commits[want].id, "seed {seed} commit {i}");
                checked.insert((i, change.path().to_string()), want);
            }
        }
        assert!(!checked.is_empty());
    }
}
