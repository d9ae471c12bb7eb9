use std::process::{Command, Output};

fn feynhopf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feynhopf")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

#[test]
fn one_loop_vacuum_polarization() {
    // a single fermion bubble; swapping its two photon legs is its only automorphism, so sym = 2/2! = 1
    let o = feynhopf(&["--theory", "qed", "--Lmax", "1", "enumerate", "photon"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1, "{out}");
    assert!(lines[0].starts_with("L=1 sym=1 d=[psibarApsi:2] "), "{out}");
}

#[test]
fn mass_insertions_enter_at_the_next_window() {
    // frozen from the enumeration at Lmax=2: the bubble plus one mass insertion
    let o = feynhopf(&["--theory", "qed", "--Lmax", "2", "--format", "records", "enumerate", "photon", "--loops", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut summary: Vec<(String, String)> = out
        .lines()
        .map(|l| {
            let field = |k: &str| l.split('\t').find_map(|f| f.strip_prefix(k)).unwrap_or_default().to_string();
            (field("sym:"), field("degree:"))
        })
        .collect();
    summary.sort();
    assert_eq!(
        summary,
        vec![("1".into(), "psibarApsi:2".into()), ("1/2".into(), "psibarApsi:2,psibarpsi:1".into())]
    );
    assert!(out.lines().all(|l| l.starts_with("graph:") && l.contains("\tresidue:photon\tloops:1\t")));
}

#[test]
fn loops_zero_lists_nothing() {
    let o = feynhopf(&["--theory", "qed", "--Lmax", "1", "enumerate", "photon", "--loops", "0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn usage_errors_exit_3() {
    for args in [
        &["--theory", "qed", "enumerate", "gluon"][..],
        &["--theory", "qed", "check", "nope"],
        &["--theory", "qed", "master"],
        &["--theory", "qed", "check", "master"],
        &["--theory", "/nonexistent/theory.json", "check", "coassoc"],
        &["--Lmax", "x", "check", "coassoc"],
    ] {
        assert_eq!(feynhopf(args).status.code(), Some(3), "{args:?}");
    }
}

#[test]
fn help_exits_0() {
    assert_eq!(feynhopf(&["--help"]).status.code(), Some(0));
}

#[test]
fn records_format() {
    let o = feynhopf(&["--theory", "qed", "--Lmax", "1", "--format", "records", "check", "coassoc"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("check:coassoc\t")), "{out}");
    assert!(out.contains("check:coassoc\tslice:antipode L=1\tstatus:PASS\n"));
    assert!(out.ends_with("check:coassoc\tstatus:PASS\n"));
}

#[test]
fn report_all_skips_master_without_a_bv_action() {
    let o = feynhopf(&["--theory", "qed", "--Lmax", "1", "report-all"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.starts_with("# theory=qed Lmax=1 order=4 zmax=4 seed=1\n"), "{out}");
    assert!(out.contains("# skipped master:"));
    assert!(!out.contains("== master =="));
}

#[test]
fn theory_files_load_from_disk() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../feynhopf/theories/qed.json");
    let o = feynhopf(&["--theory", path, "--Lmax", "1", "check", "hopf-ideal"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}
