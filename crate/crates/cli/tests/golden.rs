//! Byte-for-byte comparisons of command output against `tests/golden/`.
//! Run with `UPDATE_GOLDEN=1` to rewrite the files.

mod common;

use common::{golden_dir, run, CASES};

#[test]
fn outputs_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut mismatches = Vec::new();
    for (name, args) in CASES {
        let (stdout, code) = run(args);
        let expected_code = if name.starts_with("lemma1") { 3 } else { 0 };
        assert_eq!(code, expected_code, "{name}: exit code");
        let path = golden_dir().join(name);
        if update {
            std::fs::write(&path, &stdout).unwrap();
            continue;
        }
        let golden = std::fs::read(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
        if golden != stdout {
            mismatches.push(*name);
        }
    }
    assert!(
        mismatches.is_empty(),
        "output differs from golden: {mismatches:?}"
    );
}

#[test]
fn worker_count_does_not_change_output() {
    for args in [
        &["alpha-scan", "--max-n", "7"][..],
        &["alpha", "--n", "8", "--format", "csv"][..],
        &["area", "--perm", "digit-swap:3", "--oracle-samples", "2000"][..],
    ] {
        let one = run(&[args, &["--workers", "1"]].concat());
        let eight = run(&[args, &["--workers", "8"]].concat());
        assert_eq!(one, eight, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["area", "--perm", "1,1,2"]).1, 1);
    assert_eq!(run(&["area", "--perm", "identity"]).1, 1);
    assert_eq!(run(&["nonsense"]).1, 1);
    assert_eq!(run(&["alpha", "--n", "11", "--exhaustive"]).1, 1);
    assert_eq!(run(&["cantor", "--t", "-1"]).1, 1);
    assert_eq!(
        run(&["area", "--perm", "1,3,2", "-o", "/nonexistent/dir/out.txt"]).1,
        1
    );
    assert_eq!(
        run(&["render", "gasket", "--depth", "1", "--format", "json"]).1,
        1
    );
    assert_eq!(run(&["--help"]).1, 0);
    assert_eq!(run(&["--version"]).1, 0);
    assert_eq!(run(&["verify", "weighted-sum", "--n", "4,1000"]).1, 0);
    assert_eq!(run(&["verify", "lemma1"]).1, 3);
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("trapmeasure-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("area.json");
    let (stdout, _) = run(&["area", "--perm", "1,3,2", "--format", "json"]);
    let (empty, code) = run(&[
        "area",
        "--perm",
        "1,3,2",
        "--format",
        "json",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(empty.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}
