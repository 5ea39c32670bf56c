//! Hand-scripted nine-commit histories for the defect-interval merge rules.
//!
//! Both scenarios edit one task file, `tasks/main.yml`, plus two unrelated
//! YAML files. Only the two fixing commits carry a message that passes the
//! default fix gate.

use crate::{lines, Error, FixtureRepo, Op};

pub const DEFECT_FILE: &str = "tasks/main.yml";
pub const HANDLERS: &str = "handlers/main.yml";
pub const SITE: &str = "site.yml";

pub struct Scenario {
    pub repo: FixtureRepo,
}

impl Scenario {
    /// Commit id of `C<n>`, 1-based.
    pub fn c(&self, n: usize) -> String {
        self.repo.commits()[n - 1].clone()
    }
}

/// Two disjoint defects on the same file: `C1` introduces one that `C4`
/// fixes, `C8` introduces another that `C9` fixes.
///
/// Expected: fixed files `(A, fic=C9, bic=C8)` then `(A, fic=C4, bic=C1)`;
/// failure-prone snapshots at C1, C2, C3 and C8.
pub fn disjoint_defects() -> Result<Scenario, Error> {
    let mut repo = FixtureRepo::new()?;
    let a1 = ["- name: one", "  shell: echo bug1", "  become: true"];
    repo.commit("initial playbook", &[Op::write(DEFECT_FILE, lines(&a1))])?;
    repo.commit(
        "add handlers",
        &[Op::write(
            HANDLERS,
            lines(&["- name: reload", "  debug: msg=reload"]),
        )],
    )?;
    repo.commit(
        "add site playbook",
        &[Op::write(SITE, lines(&["- hosts: all", "  roles: [web]"]))],
    )?;
    let a4 = ["- name: one", "  shell: echo fixed1", "  become: true"];
    repo.commit(
        "fix config default in shell task",
        &[Op::write(DEFECT_FILE, lines(&a4))],
    )?;
    repo.commit(
        "update handlers",
        &[Op::write(
            HANDLERS,
            lines(&["- name: reload", "  debug: msg=reloaded"]),
        )],
    )?;
    repo.commit(
        "extend site",
        &[Op::write(
            SITE,
            lines(&["- hosts: all", "  roles: [web, db]"]),
        )],
    )?;
    repo.commit(
        "tidy handlers",
        &[Op::write(
            HANDLERS,
            lines(&["- name: reload", "  debug: msg=done"]),
        )],
    )?;
    let a8 = [
        "- name: one",
        "  shell: echo fixed1",
        "  become: true",
        "  when: flag",
    ];
    repo.commit(
        "add condition to task",
        &[Op::write(DEFECT_FILE, lines(&a8))],
    )?;
    let a9 = [
        "- name: one",
        "  shell: echo fixed1",
        "  become: true",
        "  when: flag | bool",
    ];
    repo.commit(
        "fix boolean condition",
        &[Op::write(DEFECT_FILE, lines(&a9))],
    )?;
    Ok(Scenario { repo })
}

/// Nested defects: `C9` fixes a line written in `C5`, `C6` fixes a line
/// written in `C4`.
///
/// Expected: one fixed file `(A, fic=C9, bic=C4)`; failure-prone snapshots
/// at C4 through C8.
pub fn overlapping_defects() -> Result<Scenario, Error> {
    let mut repo = FixtureRepo::new()?;
    let base = ["- name: base", "  debug: msg=one"];
    repo.commit("initial playbook", &[Op::write(DEFECT_FILE, lines(&base))])?;
    repo.commit(
        "add handlers",
        &[Op::write(
            HANDLERS,
            lines(&["- name: reload", "  debug: msg=reload"]),
        )],
    )?;
    repo.commit(
        "add site playbook",
        &[Op::write(SITE, lines(&["- hosts: all", "  roles: [web]"]))],
    )?;
    let a4 = ["- name: base", "  debug: msg=one", "  shell: cmd4"];
    repo.commit("run cmd4", &[Op::write(DEFECT_FILE, lines(&a4))])?;
    let a5 = [
        "- name: base",
        "  debug: msg=one",
        "  shell: cmd4",
        "  shell: cmd5",
    ];
    repo.commit("run cmd5", &[Op::write(DEFECT_FILE, lines(&a5))])?;
    let a6 = [
        "- name: base",
        "  debug: msg=one",
        "  shell: cmd4 --safe",
        "  shell: cmd5",
    ];
    repo.commit("fix service restart", &[Op::write(DEFECT_FILE, lines(&a6))])?;
    repo.commit(
        "update handlers",
        &[Op::write(
            HANDLERS,
            lines(&["- name: reload", "  debug: msg=reloaded"]),
        )],
    )?;
    repo.commit(
        "extend site",
        &[Op::write(
            SITE,
            lines(&["- hosts: all", "  roles: [web, db]"]),
        )],
    )?;
    let a9 = [
        "- name: base",
        "  debug: msg=one",
        "  shell: cmd4 --safe",
        "  shell: cmd5 --safe",
    ];
    repo.commit(
        "fix service restart again",
        &[Op::write(DEFECT_FILE, lines(&a9))],
    )?;
    Ok(Scenario { repo })
}
