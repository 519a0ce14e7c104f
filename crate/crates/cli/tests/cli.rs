//! Exit-code and artifact contracts of the command-line driver.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_disclin"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("disclin_cli_{}_{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn minimize_smoke_run_writes_artifacts() {
    let dir = scratch("smoke");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "nx = 32\nny = 32\neps = 0.5\nxi = 0.5\nmu = 10\nmax_iters = 40\n").unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["minimize", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    for name in ["trace.csv", "final_k.field", "final_b.field", "summary.csv"] {
        assert!(out.join(name).is_file(), "missing artifact {name}");
    }
    assert!(out.join("manifest.txt").is_file());
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn malformed_config_exits_2() {
    let dir = scratch("badcfg");
    let cfg = dir.join("bad.cfg");
    std::fs::write(&cfg, "nx = 32\nnot_a_key = 1\n").unwrap();
    let output = bin()
        .args(["minimize", "--config", cfg.to_str().unwrap(), "--out", dir.join("o").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown key"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn missing_config_and_unknown_flag_exit_2() {
    let status = bin().arg("minimize").status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().args(["minimize", "--frobnicate"]).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let status = bin().arg("unknowncmd").status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unwritable_output_dir_exits_1() {
    let dir = scratch("rowrite");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "nx = 32\nny = 32\neps = 0.5\nxi = 0.5\nmax_iters = 5\n").unwrap();
    let status = bin()
        .args(["minimize", "--config", cfg.to_str().unwrap(), "--out", "/proc/disclin_forbidden"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn envelope_sweep_vanishes_inside_the_ball() {
    let dir = scratch("env");
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "envelope_r_max = 4.0\nenvelope_step = 0.05\n").unwrap();
    let out = dir.join("out");
    let status = bin()
        .args(["envelope", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("envelope.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        let (r, lower, upper, well) = (cols[0], cols[1], cols[2], cols[3]);
        rows += 1;
        assert!(lower >= 0.0 && lower <= upper + 1e-15);
        assert!(upper <= well + 1e-12);
        if r <= 2.0 {
            assert!(upper <= 1e-12, "upper bound {upper} at r = {r}");
        }
        if (r - 3.0).abs() < 1e-9 {
            assert!(upper <= 0.9 + 1e-12);
        }
        if r == 0.0 {
            assert_eq!((lower, upper), (0.0, 0.0));
        }
    }
    assert_eq!(rows, 81);
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn scaling_row_counts_match_eps_list() {
    let dir = scratch("scaling");
    let cfg = dir.join("run.cfg");
    // small grid and budget; this is a contract test, not a physics run
    std::fs::write(
        &cfg,
        "nx = 48\nny = 48\neps = 1.0\nxi = 0.25\nmu = 10\nmax_iters = 15\neps_list = 1.0\nenergy_ratio_cap = 100\n",
    )
    .unwrap();
    let out1 = dir.join("one");
    let status = bin()
        .args(["scaling", "--config", cfg.to_str().unwrap(), "--out", out1.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out1.join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2); // header + one record

    std::fs::write(
        &cfg,
        "nx = 48\nny = 48\neps = 1.0\nxi = 0.25\nmu = 10\nmax_iters = 15\neps_list = 1.0, 0.75, 0.5\nenergy_ratio_cap = 100\n",
    )
    .unwrap();
    let out3 = dir.join("three");
    let status = bin()
        .args(["scaling", "--config", cfg.to_str().unwrap(), "--out", out3.to_str().unwrap()])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out3.join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4); // header + three records
    for i in 0..3 {
        assert!(out3.join(format!("profile_{i}.csv")).is_file());
        assert!(out3.join(format!("final_k_{i}.field")).is_file());
    }
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn scaling_failure_preserves_partial_records_and_exits_1() {
    let dir = scratch("scalfail");
    let cfg = dir.join("run.cfg");
    // an energy-ratio cap that must trip after the runs complete
    std::fs::write(
        &cfg,
        "nx = 32\nny = 32\neps = 1.0\nxi = 0.25\nmu = 10\nmax_iters = 10\neps_list = 1.0, 0.5\nenergy_ratio_cap = 1.000001\n",
    )
    .unwrap();
    let out = dir.join("out");
    let output = bin()
        .args(["scaling", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("records preserved"));
    let partial = std::fs::read_to_string(out.join("scaling_partial.csv")).unwrap();
    assert_eq!(partial.lines().count(), 3); // header + both completed records
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn check_subcommand_passes_on_fresh_build() {
    let output = bin().args(["check", "--seed", "11"]).output().unwrap();
    assert_eq!(output.status.code(), Some(0), "{}", String::from_utf8_lossy(&output.stdout));
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("all checks passed"));
}
