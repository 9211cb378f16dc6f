//! Black-box checks of the `pframe` binary: command wiring, file artifacts,
//! and exit codes (0 ok, 1 failed comparison, 2 bad input).

use std::path::Path;
use std::process::{Command, Output};

fn pframe<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_pframe")).args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_reports_a_cell_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("best.json");
    let trace = dir.path().join("trace.csv");
    let out = pframe([
        "solve",
        "--m",
        "3",
        "--n",
        "2",
        "--p",
        "2",
        "--seed",
        "5",
        "--runs",
        "2",
        "--max-sweeps",
        "4000",
        "--out",
        path_str(&config),
        "--trace-out",
        path_str(&trace),
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("best potential 0.750000"), "{text}");
    assert!(text.contains("closed form 3/4"), "{text}");
    assert!(text.contains("simplex"), "{text}");

    let config_text = std::fs::read_to_string(&config).unwrap();
    assert!(config_text.contains("\"field\""));
    let trace_text = std::fs::read_to_string(&trace).unwrap();
    assert!(trace_text.starts_with("proposal,potential,delta_step"));
}

#[test]
fn sweep_requires_a_seed() {
    let out = pframe(["sweep", "--m-range", "2..3", "--n-range", "2..2", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_artifacts_feed_check_diff_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("table.json");
    let csv = dir.path().join("table.csv");
    let out = pframe([
        "sweep",
        "--m-range",
        "3..8",
        "--n-range",
        "2..2",
        "--p",
        "2",
        "--seed",
        "9",
        "--runs-per-cell",
        "2",
        "--max-sweeps",
        "4000",
        "--out",
        path_str(&json),
        "--csv",
        path_str(&csv),
    ]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout_of(&out).contains("6 cells solved"));

    let csv_text = std::fs::read_to_string(&csv).unwrap();
    assert!(csv_text.starts_with(
        "m,n,p,field,best_potential,spread,simplex,coherence_mean,analytic_num,analytic_den,abs_gap"
    ));
    assert_eq!(csv_text.lines().count(), 7);

    let out = pframe(["check", "--artifact", path_str(&json)]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout_of(&out).contains("ALL OK"));

    let out = pframe([
        "diff",
        "--artifact",
        path_str(&json),
        "--axis",
        "m",
        "--fixed",
        "2",
        "--p",
        "2",
    ]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert_eq!(text.matches("D = 0.500000000").count(), 4, "{text}");

    let out = pframe(["fit", "--artifact", path_str(&json), "--n", "2", "--p", "2"]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("0.250000000 m^2"), "{text}");
    assert!(text.contains("exact leading coefficient 1/4"), "{text}");
}

#[test]
fn check_flags_tampered_artifacts_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("table.json");
    let out = pframe([
        "sweep",
        "--m-range",
        "3..4",
        "--n-range",
        "2..2",
        "--p",
        "2",
        "--seed",
        "3",
        "--runs-per-cell",
        "1",
        "--max-sweeps",
        "4000",
        "--out",
        path_str(&json),
    ]);
    assert!(out.status.success(), "{out:?}");

    let mut artifact: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    artifact["cells"][0]["best_potential"] = serde_json::json!(99.9);
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&artifact).unwrap()).unwrap();

    let out = pframe(["check", "--artifact", path_str(&tampered)]);
    assert_eq!(out.status.code(), Some(1), "{out:?}");
    assert!(stdout_of(&out).contains("FAIL"));
}

#[test]
fn exact_prints_rationals_and_domain_notes() {
    let out = pframe(["exact", "p2", "--m", "10", "--n", "3"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("35/3"));

    let out = pframe(["exact", "p6n2", "--m", "7"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("21/8") && text.contains("outside the closed-form domain"), "{text}");

    let out = pframe(["exact", "moment", "--k", "2", "--n", "3"]);
    assert!(stdout_of(&out).contains("1/6"));

    let out = pframe(["exact", "leading-coeff", "--p", "4", "--n", "3"]);
    assert!(stdout_of(&out).contains("1/12"));

    // a form without its required flag is a usage error
    let out = pframe(["exact", "p2", "--m", "10"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn construct_chain_builds_and_lifts_sphere_points() {
    let dir = tempfile::tempdir().unwrap();

    let out = pframe(["construct", "tight-frame", "--m", "7", "--n", "3", "--field", "R"]);
    assert!(out.status.success());
    assert!(stdout_of(&out).contains("14/3"));

    let pts = dir.path().join("pts.json");
    let cfg = dir.path().join("cfg.json");
    let out = pframe(["construct", "double", "--r", "4", "--out", path_str(&pts)]);
    assert!(out.status.success(), "{out:?}");
    assert!(stdout_of(&out).contains("8 sphere points"));

    let out = pframe(["construct", "lift", "--input", path_str(&pts), "--out", path_str(&cfg)]);
    assert!(out.status.success(), "{out:?}");
    let text = stdout_of(&out);
    assert!(text.contains("p=6 potential 4.000000000000"), "{text}");
    assert!(cfg.exists());

    let c9 = dir.path().join("c9.json");
    let out = pframe(["construct", "cosine", "--m", "9", "--out", path_str(&c9)]);
    assert!(out.status.success());
    let out = pframe(["construct", "lift", "--input", path_str(&c9)]);
    assert!(stdout_of(&out).contains("p=4 potential 9.000000000000"));

    let h4 = dir.path().join("h4.json");
    let out = pframe(["construct", "hadamard4", "--out", path_str(&h4)]);
    assert!(out.status.success());
    let out = pframe(["construct", "lift", "--input", path_str(&h4)]);
    assert!(stdout_of(&out).contains("p=4 potential 0.666666666667"));
}

#[test]
fn input_errors_exit_two() {
    let out = pframe(["check", "--artifact", "/nonexistent/table.json"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    let out = pframe(["solve", "--m", "0", "--n", "1", "--p", "2"]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");

    let out = pframe([
        "sweep",
        "--m-range",
        "8..3",
        "--n-range",
        "2..2",
        "--p",
        "2",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2), "{out:?}");
}
