//! End-to-end tests of the gridcoal binary: exit codes, file outputs,
//! and byte-level determinism of the emitted CSVs.

use std::path::Path;
use std::process::{Command, Output};

fn gridcoal(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridcoal"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn gen_is_deterministic_and_summarized() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridcoal(&["gen", "--n", "50", "--seed", "7", "--out", "a.toml"], dir.path());
    assert_success(&out);
    let summary = String::from_utf8_lossy(&out.stdout);
    assert!(summary.contains("n=50"), "{summary}");
    assert!(summary.contains("Deficit"), "{summary}");
    let out = gridcoal(&["gen", "--n", "50", "--seed", "7", "--out", "b.toml"], dir.path());
    assert_success(&out);
    assert_eq!(read(dir.path(), "a.toml"), read(dir.path(), "b.toml"));
    let text = String::from_utf8(read(dir.path(), "a.toml")).unwrap();
    assert_eq!(text.matches("[[microgrid]]").count(), 50);
}

#[test]
fn gen_rejects_zero_members_with_usage_exit() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridcoal(&["gen", "--n", "0", "--out", "x.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_the_three_csvs_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&gridcoal(
        &["gen", "--n", "10", "--seed", "3", "--out", "s.toml"],
        dir.path(),
    ));
    let out = gridcoal(
        &["run", "--scenario", "s.toml", "--seed", "42", "--out-dir", "r1"],
        dir.path(),
    );
    assert_success(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("best objective"), "{stdout}");
    assert!(stdout.contains("wall time"), "{stdout}");
    assert_success(&gridcoal(
        &["run", "--scenario", "s.toml", "--seed", "42", "--out-dir", "r2"],
        dir.path(),
    ));
    for name in ["coalition.csv", "allocation.csv", "trace.csv"] {
        assert_eq!(
            read(&dir.path().join("r1"), name),
            read(&dir.path().join("r2"), name),
            "{name} differs between identical seeded runs"
        );
    }
}

#[test]
fn run_reports_missing_scenario_with_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridcoal(&["run", "--scenario", "nope.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope.toml"));
}

#[test]
fn verify_rejects_oversized_communities_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&gridcoal(
        &["gen", "--n", "25", "--seed", "1", "--out", "s.toml"],
        dir.path(),
    ));
    let out = gridcoal(&["verify", "--scenario", "s.toml", "--seeds", "2"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_single_microgrid_hits_always() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&gridcoal(
        &[
            "gen", "--n", "1", "--seed", "1", "--market-fraction", "1.0", "--out", "s.toml",
        ],
        dir.path(),
    ));
    let out = gridcoal(&["verify", "--scenario", "s.toml", "--seeds", "5"], dir.path());
    assert_success(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("hit rate 1.000"));
}

#[test]
fn shapley_exact_respects_the_size_limit() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&gridcoal(
        &["gen", "--n", "25", "--seed", "1", "--out", "s.toml"],
        dir.path(),
    ));
    let out = gridcoal(
        &["shapley", "--scenario", "s.toml", "--method", "exact"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));
    // Auto mode falls back to the sampled estimator.
    let out = gridcoal(
        &["shapley", "--scenario", "s.toml", "--permutations", "200", "--out", "alloc.csv"],
        dir.path(),
    );
    assert_success(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("Sampled"));
}

#[test]
fn sweep_outputs_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&gridcoal(
        &["gen", "--n", "8", "--seed", "2", "--out", "s.toml"],
        dir.path(),
    ));
    let args = |out: &'static str| {
        [
            "sweep",
            "--scenario",
            "s.toml",
            "--axis",
            "cooling",
            "--repeats",
            "2",
            "--pop-size",
            "10",
            "--generations",
            "10",
            "--out-dir",
            out,
        ]
    };
    assert_success(&gridcoal(&args("w1"), dir.path()));
    assert_success(&gridcoal(&args("w2"), dir.path()));
    for name in ["runs.csv", "sweep_summary.csv"] {
        assert_eq!(
            read(&dir.path().join("w1"), name),
            read(&dir.path().join("w2"), name),
            "{name} differs between identical sweeps"
        );
    }
    assert!(dir.path().join("w1/timings.csv").exists());
}

#[test]
fn stability_writes_one_trace_per_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_success(&gridcoal(
        &["gen", "--n", "8", "--seed", "2", "--out", "s.toml"],
        dir.path(),
    ));
    let out = gridcoal(
        &[
            "stability",
            "--scenario",
            "s.toml",
            "--runs",
            "5",
            "--generations",
            "15",
            "--pop-size",
            "10",
            "--out-dir",
            "stab",
        ],
        dir.path(),
    );
    assert_success(&out);
    for i in 0..5 {
        assert!(dir.path().join(format!("stab/trace_run{i}.csv")).exists());
    }
    assert!(dir.path().join("stab/stability_summary.csv").exists());
}

#[test]
fn config_file_applies_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.toml"),
        "format = \"gridcoal-config/v1\"\npop_size = 11\ngenerations = 13\n",
    )
    .unwrap();
    assert_success(&gridcoal(
        &["gen", "--n", "6", "--seed", "2", "--out", "s.toml"],
        dir.path(),
    ));
    assert_success(&gridcoal(
        &[
            "run",
            "--scenario",
            "s.toml",
            "--config",
            "cfg.toml",
            "--generations",
            "17",
            "--out-dir",
            "out",
        ],
        dir.path(),
    ));
    let trace = String::from_utf8(read(&dir.path().join("out"), "trace.csv")).unwrap();
    // Effective config echoed into the header: file pop_size, flag generations.
    assert!(trace.contains("pop_size=11"), "{trace}");
    assert!(trace.contains("generations=17"), "{trace}");
    let generations = trace.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(generations, 17);
}

#[test]
fn ingest_builds_a_scenario_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from(
        "prosumer,datetime,prod,cons,price\n",
    );
    for prosumer in ["p1", "p2"] {
        for quarter in 0..4 {
            csv.push_str(&format!(
                "{prosumer},2021-05-01 13:{:02}:00,{},0.2,0.45\n",
                quarter * 15,
                0.3 + quarter as f64 * 0.1,
            ));
        }
    }
    // p3 has an incomplete hour and must be excluded with a warning.
    csv.push_str("p3,2021-05-01 13:00:00,0.5,0.1,0.45\n");
    std::fs::write(dir.path().join("data.csv"), csv).unwrap();
    std::fs::write(
        dir.path().join("mapping.toml"),
        r#"format = "gridcoal-mapping/v1"

[columns]
prosumer_id = "prosumer"
timestamp = "datetime"
timestamp_format = "%Y-%m-%d %H:%M:%S"
energy_produced = "prod"
energy_consumed = "cons"
price = "price"

[battery_defaults]
capacity_kwh = 12.0
stored_fraction = 0.4
cycle_seed = 9
"#,
    )
    .unwrap();
    let out = gridcoal(
        &[
            "ingest",
            "--input",
            "data.csv",
            "--mapping",
            "mapping.toml",
            "--hour",
            "2021-05-01 13:00:00",
            "--market-quantity",
            "-5.0",
            "--out",
            "scenario.toml",
        ],
        dir.path(),
    );
    assert_success(&out);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("p3"), "expected dropped-hour warning, got: {stderr}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("2 microgrids"), "{stdout}");
    // The scenario is loadable and carries the dataset's mean price.
    let text = std::fs::read_to_string(dir.path().join("scenario.toml")).unwrap();
    assert!(text.contains("price_per_kwh = 0.45"), "{text}");
    assert!(text.contains("kind = \"ingested\""), "{text}");
}
