//! Golden cases and a runner shared by the integration tests.

use std::path::PathBuf;
use std::process::Command;

/// File name under `tests/golden/` and the arguments that produce it.
pub const CASES: &[(&str, &[&str])] = &[
    ("area_base.txt", &["area", "--perm", "1,3,2"]),
    (
        "area_reversal.json",
        &["area", "--n", "5", "--perm", "reversal", "--format", "json"],
    ),
    (
        "area_digit_swap.csv",
        &["area", "--perm", "digit-swap:2", "--format", "csv"],
    ),
    (
        "slice_half.json",
        &["slice", "--perm", "1,3,2", "--y", "1/2"],
    ),
    (
        "slice_profile.csv",
        &["slice", "--perm", "2,4,1,3", "--profile"],
    ),
    ("alpha_2.json", &["alpha", "--n", "2"]),
    ("alpha_4.csv", &["alpha", "--n", "4", "--format", "csv"]),
    (
        "alpha_heuristic.json",
        &["alpha", "--n", "12", "--budget", "2000", "--seed", "7"],
    ),
    ("alpha_scan.csv", &["alpha-scan", "--max-n", "6"]),
    (
        "alpha_scan.json",
        &["alpha-scan", "--max-n", "5", "--format", "json"],
    ),
    ("sigma3.csv", &["sigma3", "--max-m", "3"]),
    ("sigma_n_10.json", &["sigma-n", "--n", "10"]),
    (
        "cantor_half.csv",
        &["cantor", "--t", "1/2", "--depth-max", "5"],
    ),
    (
        "cantor_digits.json",
        &[
            "cantor",
            "--digits",
            "0,1,2",
            "--depth-max",
            "2",
            "--format",
            "json",
        ],
    ),
    (
        "slice_measure.csv",
        &["slice-measure", "--grid", "6", "--depth", "4"],
    ),
    (
        "favard.csv",
        &["favard", "--depth-max", "3", "--quad-points", "512"],
    ),
    (
        "lemma1.csv",
        &["verify", "lemma1", "--depth-max", "2", "--grid", "5"],
    ),
    ("lemma2.json", &["verify", "lemma2", "--format", "json"]),
    (
        "weighted_sum.csv",
        &["verify", "weighted-sum", "--n", "4,10,40"],
    ),
    ("trapezoid.svg", &["render", "trapezoid", "--perm", "1,3,2"]),
    ("gasket.svg", &["render", "gasket", "--depth", "2"]),
];

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("golden")
}

/// Runs the binary, returning stdout and the exit code.
pub fn run(args: &[&str]) -> (Vec<u8>, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_trapmeasure"))
        .args(args)
        .env_remove("TRAPMEASURE_THREADS")
        .output()
        .expect("binary runs");
    (out.stdout, out.status.code().unwrap_or(-1))
}
