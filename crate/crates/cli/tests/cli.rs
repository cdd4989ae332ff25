//! End-to-end tests of the compiled binary: exit codes, output formats,
//! determinism, and the hand-computable statistics anchors.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_switchprox"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary launches")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

// ---------------------------------------------------------------------------
// ssm-verify
// ---------------------------------------------------------------------------

#[test]
fn ssm_verify_passes_every_default_cell() {
    let dir = tempdir().expect("tempdir");
    let out = run_in(dir.path(), &["ssm-verify"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    // 3 catalog entries x 3 accuracy targets, all passing.
    assert_eq!(text.matches(" pass").count(), 9, "{text}");
    assert!(!text.contains("FAIL"), "{text}");
}

#[test]
fn ssm_verify_rejects_nonpositive_tau() {
    let dir = tempdir().expect("tempdir");
    let out = run_in(dir.path(), &["ssm-verify", "--tau", "0"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("tau"), "{}", stderr(&out));
}

#[test]
fn ssm_verify_rejects_unknown_id() {
    let dir = tempdir().expect("tempdir");
    let out = run_in(dir.path(), &["ssm-verify", "--id", "nope"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("nope"), "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// run-spr
// ---------------------------------------------------------------------------

const SMALL_RUN: &[&str] = &["run-spr", "--outer-k", "5", "--inner-t", "200", "--seed", "3"];

#[test]
fn run_spr_writes_deterministic_trajectory_and_accounting() {
    let dir = tempdir().expect("tempdir");
    let out1 = run_in(dir.path(), &[SMALL_RUN, &["--out", "a.csv"]].concat());
    assert_exit(&out1, 0);
    let out2 = run_in(dir.path(), &[SMALL_RUN, &["--out", "b.csv"]].concat());
    assert_exit(&out2, 0);

    let a = fs::read(dir.path().join("a.csv")).expect("first trajectory written");
    let b = fs::read(dir.path().join("b.csv")).expect("second trajectory written");
    assert_eq!(a, b, "same seed and spec must produce identical bytes");

    let text = String::from_utf8(a).expect("csv is utf-8");
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some(
            "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,comp_slack,inner_T,stop_reason"
        )
    );
    // Budget stop at K=5: rows k=0..=5, final row labeled.
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[5].ends_with(",budget"), "{}", rows[5]);

    // The printed accounting: one stepping subgradient per inner iteration,
    // two oracle calls per inner iteration, across 5 completed solves.
    let summary = stdout(&out1);
    assert!(summary.contains("stop_reason: budget"), "{summary}");
    assert!(summary.contains("subgradient_evals: 1000"), "{summary}");
    assert!(summary.contains("oracle_calls: 2000"), "{summary}");
    assert!(summary.contains("final_lambda_hat: "), "{summary}");
    assert!(summary.contains("final_fj_residual: "), "{summary}");
    assert!(summary.contains("final_kkt_residual: "), "{summary}");

    // The sidecar records the run parameters for later aggregation.
    let meta = fs::read_to_string(dir.path().join("a.csv.meta.json")).expect("sidecar written");
    assert!(meta.contains("\"p\": 24.0"), "{meta}");
    assert!(meta.contains("\"inner_t\": 200"), "{meta}");
}

#[test]
fn run_spr_flags_override_config_fields() {
    let dir = tempdir().expect("tempdir");
    fs::write(
        dir.path().join("spec.json"),
        "{\"p\": 26, \"outer_k\": 3, \"seed\": 7, \"inner_t\": 100}",
    )
    .expect("config written");
    let out = run_in(
        dir.path(),
        &[
            "run-spr",
            "--config",
            "spec.json",
            "--p",
            "24",
            "--out",
            "t.csv",
        ],
    );
    assert_exit(&out, 0);
    let meta = fs::read_to_string(dir.path().join("t.csv.meta.json")).expect("sidecar written");
    assert!(meta.contains("\"p\": 24.0"), "flag must win: {meta}");
    assert!(meta.contains("\"outer_k\": 3"), "config must apply: {meta}");
    assert!(meta.contains("\"seed\": 7"), "config must apply: {meta}");
}

#[test]
fn run_spr_rejects_unknown_config_fields() {
    let dir = tempdir().expect("tempdir");
    fs::write(dir.path().join("spec.json"), "{\"bogus\": 1}").expect("config written");
    let out = run_in(dir.path(), &["run-spr", "--config", "spec.json"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("bogus"), "{}", stderr(&out));
}

#[test]
fn run_spr_reports_exhausted_start_sampling() {
    // A budget this small rejects every sampled start: each coordinate
    // contributes a positive penalty with probability one.
    let dir = tempdir().expect("tempdir");
    let out = run_in(dir.path(), &["run-spr", "--p", "0.001", "--out", "t.csv"]);
    assert_exit(&out, 2);
    assert!(
        stderr(&out).contains("no feasible start"),
        "{}",
        stderr(&out)
    );
}

// ---------------------------------------------------------------------------
// sweep-p
// ---------------------------------------------------------------------------

#[test]
fn sweep_p_output_is_identical_across_worker_counts() {
    let dir = tempdir().expect("tempdir");
    let base = &[
        "sweep-p",
        "--p-grid",
        "23,24",
        "--replicates",
        "2",
        "--outer-k",
        "3",
        "--inner-t",
        "100",
    ];
    let out1 = run_in(
        dir.path(),
        &[base as &[&str], &["--workers", "1", "--out", "w1.csv"]].concat(),
    );
    assert_exit(&out1, 0);
    let out2 = run_in(
        dir.path(),
        &[base as &[&str], &["--workers", "4", "--out", "w4.csv"]].concat(),
    );
    assert_exit(&out2, 0);

    let w1 = fs::read(dir.path().join("w1.csv")).expect("sweep written");
    let w4 = fs::read(dir.path().join("w4.csv")).expect("sweep written");
    assert_eq!(w1, w4, "pool size must not affect the emitted bytes");

    let text = String::from_utf8(w1).expect("csv is utf-8");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p,lambda_mean,lambda_min,lambda_max,diverged,replicates"
    );
    assert_eq!(lines.len(), 3, "one row per grid point: {text}");
    for row in &lines[1..] {
        assert!(row.ends_with(",2"), "replicate count column: {row}");
    }
}

#[test]
fn sweep_p_rejects_degenerate_specs() {
    let dir = tempdir().expect("tempdir");
    let out = run_in(
        dir.path(),
        &["sweep-p", "--p-grid", "24", "--replicates", "0"],
    );
    assert_exit(&out, 2);

    fs::write(dir.path().join("spec.json"), "{\"p_grid\": []}").expect("config written");
    let out = run_in(dir.path(), &["sweep-p", "--config", "spec.json"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("nonempty"), "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

/// A miniature trajectory whose residual columns hold `value` on the final
/// row, which every checkpoint clamps to.
fn write_fixture(dir: &Path, name: &str, value: f64) {
    let header =
        "k,f,g,step_norm,fj_residual,kkt_residual,lambda_hat,gamma0_hat,comp_slack,inner_T,stop_reason";
    let mut text = format!("{header}\n");
    for k in 0..3 {
        let stop = if k == 2 { "non_decrease" } else { "" };
        let step = if k == 2 { "" } else { "1.0e0" };
        text.push_str(&format!(
            "{k},1.0e0,-1.0e0,{step},{value:e},{value:e},0.0e0,1.0e0,0.0e0,200,{stop}\n"
        ));
    }
    fs::write(dir.join(name), text).expect("fixture written");
    fs::write(dir.join(format!("{name}.meta.json")), "{\"p\": 24.0}\n")
        .expect("fixture sidecar written");
}

#[test]
fn stats_matches_hand_computed_aggregates() {
    let dir = tempdir().expect("tempdir");
    write_fixture(dir.path(), "r1.csv", 1.0);
    write_fixture(dir.path(), "r2.csv", 3.0);

    // Residuals {1, 3}: median 2, mean 2, unbiased variance 2.
    let out = run_in(dir.path(), &["stats", "r1.csv", "r2.csv"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "p,inner_t,kt_budget,runs,fj_median,fj_mean,fj_var,kkt_median,kkt_mean,kkt_var"
    );
    // Checkpoints K ∈ {50, 100, 200} at T = 200: budgets 10⁴, 2·10⁴, 4·10⁴.
    assert_eq!(lines.len(), 4, "{text}");
    for (row, kt) in lines[1..].iter().zip(["10000", "20000", "40000"]) {
        let expected = format!(
            "2.4000000000000000e1,200,{kt},2,\
             2.0000000000000000e0,2.0000000000000000e0,2.0000000000000000e0,\
             2.0000000000000000e0,2.0000000000000000e0,2.0000000000000000e0"
        );
        assert_eq!(*row, expected);
    }

    // A single run: median = mean, variance exactly zero.
    let out = run_in(dir.path(), &["stats", "r1.csv"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    for row in text.lines().skip(1) {
        assert!(
            row.contains(",1.0000000000000000e0,1.0000000000000000e0,0.0000000000000000e0,"),
            "{row}"
        );
    }
}

#[test]
fn stats_writes_identical_bytes_on_repeat() {
    let dir = tempdir().expect("tempdir");
    write_fixture(dir.path(), "r1.csv", 1.0);
    write_fixture(dir.path(), "r2.csv", 3.0);
    let out = run_in(
        dir.path(),
        &["stats", "r1.csv", "r2.csv", "--out", "s1.csv"],
    );
    assert_exit(&out, 0);
    let out = run_in(
        dir.path(),
        &["stats", "r1.csv", "r2.csv", "--out", "s2.csv"],
    );
    assert_exit(&out, 0);
    let s1 = fs::read(dir.path().join("s1.csv")).expect("stats written");
    let s2 = fs::read(dir.path().join("s2.csv")).expect("stats written");
    assert_eq!(s1, s2);
}

#[test]
fn stats_names_file_and_line_on_parse_errors() {
    let dir = tempdir().expect("tempdir");
    write_fixture(dir.path(), "good.csv", 1.0);
    let good = fs::read_to_string(dir.path().join("good.csv")).expect("fixture readable");
    let corrupted = good.replace("\n1,", "\nx,");
    assert_ne!(good, corrupted, "corruption must hit row k=1");
    fs::write(dir.path().join("bad.csv"), corrupted).expect("corrupt fixture written");
    fs::copy(
        dir.path().join("good.csv.meta.json"),
        dir.path().join("bad.csv.meta.json"),
    )
    .expect("sidecar copied");

    let out = run_in(dir.path(), &["stats", "bad.csv"]);
    assert_exit(&out, 2);
    // Row k=1 sits on line 3 (after the header and the k=0 row).
    assert!(stderr(&out).contains("bad.csv:3"), "{}", stderr(&out));

    let out = run_in(dir.path(), &["stats", "missing.csv"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("missing.csv"), "{}", stderr(&out));
}

#[test]
fn stats_requires_the_sidecar_for_grouping() {
    let dir = tempdir().expect("tempdir");
    write_fixture(dir.path(), "r1.csv", 1.0);
    fs::remove_file(dir.path().join("r1.csv.meta.json")).expect("sidecar removed");
    let out = run_in(dir.path(), &["stats", "r1.csv"]);
    assert_exit(&out, 2);
    assert!(stderr(&out).contains("meta.json"), "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// end-to-end: run-spr output feeds stats
// ---------------------------------------------------------------------------

#[test]
fn trajectories_flow_into_stats_groups() {
    let dir = tempdir().expect("tempdir");
    for seed in ["1", "2"] {
        let out = run_in(
            dir.path(),
            &[
                "run-spr",
                "--outer-k",
                "4",
                "--inner-t",
                "150",
                "--seed",
                seed,
                "--out",
                &format!("s{seed}.csv"),
            ],
        );
        assert_exit(&out, 0);
    }
    let out = run_in(dir.path(), &["stats", "s1.csv", "s2.csv"]);
    assert_exit(&out, 0);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    // One group per checkpoint, each aggregating both runs at T = 150.
    assert_eq!(lines.len(), 4, "{text}");
    for (row, kt) in lines[1..].iter().zip(["7500", "15000", "30000"]) {
        assert!(
            row.starts_with(&format!("2.4000000000000000e1,150,{kt},2,")),
            "{row}"
        );
    }
}
