//! Command-line driver for disclination energy experiments.
//!
//! Subcommands: minimize, envelope, scaling, check.
//! Flags: `--config <path>`, `--out <dir>`, `--seed <u64>`.
//! Exit codes: 0 success, 1 runtime error, 2 configuration/usage error.

mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use disclin_core::analysis::{
    compatibility_residual, curl_measure_check, jump_profile, rescale_to_layer, scaling_study,
    trace_coincidence_residual, ScalingConfig, ScalingRecord,
};

use disclin_core::energy::{energy, rescaled_layer_energy, EnergyReport};
use disclin_core::envelope::QwEnvelope;
use disclin_core::io::{save_tensor, save_vector};
use disclin_core::minimize::{charge, disclination_ansatz, minimize};
use disclin_core::selfcheck;

use config::{parse_config, RunConfig};

struct Cli {
    command: String,
    config_path: Option<PathBuf>,
    out_dir: PathBuf,
    seed: Option<u64>,
}

const USAGE: &str =
    "usage: disclin <minimize|envelope|scaling|check> [--config <path>] [--out <dir>] [--seed <u64>]";

fn parse_args(args: &[String]) -> Result<Cli, String> {
    if args.is_empty() {
        return Err(USAGE.into());
    }
    let command = args[0].clone();
    if !matches!(command.as_str(), "minimize" | "envelope" | "scaling" | "check") {
        return Err(format!("unknown subcommand '{command}'\n{USAGE}"));
    }
    let mut cli = Cli { command, config_path: None, out_dir: PathBuf::from("out"), seed: None };
    let mut it = args[1..].iter();
    while let Some(flag) = it.next() {
        let mut take = |what: &str| {
            it.next()
                .cloned()
                .ok_or_else(|| format!("flag {what} needs a value\n{USAGE}"))
        };
        match flag.as_str() {
            "--config" => cli.config_path = Some(PathBuf::from(take("--config")?)),
            "--out" => cli.out_dir = PathBuf::from(take("--out")?),
            "--seed" => {
                cli.seed = Some(
                    take("--seed")?
                        .parse()
                        .map_err(|_| format!("--seed expects an unsigned integer\n{USAGE}"))?,
                )
            }
            other => return Err(format!("unknown flag '{other}'\n{USAGE}")),
        }
    }
    Ok(cli)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match parse_args(&args) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };

    let (mut cfg, cfg_bytes) = match &cli.config_path {
        Some(path) => {
            let text = match fs::read_to_string(path) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read config {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            };
            match parse_config(&text) {
                Ok(c) => (c, text.into_bytes()),
                Err(msg) => {
                    eprintln!("config error in {}: {msg}", path.display());
                    return ExitCode::from(2);
                }
            }
        }
        None => {
            if cli.command != "check" {
                eprintln!("subcommand '{}' requires --config <path>\n{USAGE}", cli.command);
                return ExitCode::from(2);
            }
            (RunConfig::default(), Vec::new())
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let result = match cli.command.as_str() {
        "minimize" => cmd_minimize(&cfg, &cli.out_dir, &cfg_bytes),
        "envelope" => cmd_envelope(&cfg, &cli.out_dir, &cfg_bytes),
        "scaling" => cmd_scaling(&cfg, &cli.out_dir, &cfg_bytes),
        "check" => cmd_check(&cfg),
        _ => unreachable!(),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn ensure_out(dir: &Path) -> Result<(), String> {
    fs::create_dir_all(dir)
        .map_err(|e| format!("cannot create output dir {}: {e}", dir.display()))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"ok").map_err(|e| format!("output dir {} not writable: {e}", dir.display()))?;
    let _ = fs::remove_file(&probe);
    Ok(())
}

fn write_manifest(dir: &Path, command: &str, cfg: &RunConfig, cfg_bytes: &[u8]) -> Result<(), String> {
    let mut f = fs::File::create(dir.join("manifest.txt"))
        .map_err(|e| format!("cannot write manifest: {e}"))?;
    let body = format!(
        "command={command}\nversion={}\nconfig_hash={:016x}\npotential={}\nseed={}\n",
        env!("CARGO_PKG_VERSION"),
        fnv1a(cfg_bytes),
        cfg.potential.name(),
        cfg.seed
    );
    f.write_all(body.as_bytes()).map_err(|e| format!("cannot write manifest: {e}"))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn cmd_minimize(cfg: &RunConfig, out: &Path, cfg_bytes: &[u8]) -> Result<ExitCode, String> {
    ensure_out(out)?;
    let grid = disclin_core::Grid2::domain(cfg.nx, cfg.ny).map_err(|e| e.to_string())?;
    let params = cfg.model_params().map_err(|e| e.to_string())?;
    let mcfg = cfg.minimize_config();

    let (k0, b0) = disclination_ansatz(grid, &params, cfg.sign).map_err(|e| e.to_string())?;
    let trace = minimize(&k0, &b0, &params, &mcfg).map_err(|f| f.to_string())?;

    fs::write(out.join("trace.csv"), trace.to_csv()).map_err(|e| e.to_string())?;
    save_vector(&out.join("final_k.field"), &trace.final_k).map_err(|e| e.to_string())?;
    save_tensor(&out.join("final_b.field"), &trace.final_b).map_err(|e| e.to_string())?;

    // diagnostics on the minimized state
    let geom = params.layer().map_err(|e| e.to_string())?;
    let (kt, bt) =
        rescale_to_layer(&trace.final_k, &trace.final_b, &params).map_err(|e| e.to_string())?;
    let profile = jump_profile(&kt);
    let alpha = disclin_core::analysis::layer_frame_scaled_curl(&bt, params.eps);
    let compat = compatibility_residual(&profile, &alpha).map_err(|e| e.to_string())?;
    let trace_res =
        trace_coincidence_residual(&trace.final_k, &profile, &geom).map_err(|e| e.to_string())?;
    let curlm = curl_measure_check(&profile, &trace.final_k, &geom).map_err(|e| e.to_string())?;
    let rep = energy(&trace.final_k, &trace.final_b, &params).map_err(|e| e.to_string())?;
    let layer_rep = rescaled_layer_energy(&kt, &bt, &params).map_err(|e| e.to_string())?;
    let q = charge(&trace.final_b);
    let qn = (q[0] * q[0] + q[1] * q[1]).sqrt();

    let mut summary = String::new();
    summary.push_str(&format!(
        "{},layer_total,charge_x,charge_y,charge_abs,jump_endpoint,compat_sup,compat_endpoint_gap,trace_residual,curl_measure\n",
        EnergyReport::csv_header()
    ));
    summary.push_str(&format!(
        "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
        rep.csv_row(),
        layer_rep.total,
        q[0],
        q[1],
        qn,
        profile.endpoint_norm(),
        compat.sup_residual,
        compat.endpoint_gap,
        trace_res,
        curlm
    ));
    fs::write(out.join("summary.csv"), summary).map_err(|e| e.to_string())?;
    write_manifest(out, "minimize", cfg, cfg_bytes)?;

    println!(
        "minimize: total = {:.6e}, |charge| = {:.4}, jump endpoint = {:.4}, artifacts in {}",
        rep.total,
        qn,
        profile.endpoint_norm(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_envelope(cfg: &RunConfig, out: &Path, cfg_bytes: &[u8]) -> Result<ExitCode, String> {
    ensure_out(out)?;
    let env =
        QwEnvelope::build(cfg.potential, cfg.envelope_depth, cfg.envelope_r_max.max(9.0), 9216);
    let mut csv = String::from("r,lower,upper,well,width\n");
    let steps = (cfg.envelope_r_max / cfg.envelope_step).round() as usize;
    for i in 0..=steps {
        let r = i as f64 * cfg.envelope_step;
        let br = env.bracket_radial(r);
        csv.push_str(&format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}\n",
            r,
            br.lower,
            br.upper,
            cfg.potential.value(r),
            br.width()
        ));
    }
    fs::write(out.join("envelope.csv"), csv).map_err(|e| e.to_string())?;
    write_manifest(out, "envelope", cfg, cfg_bytes)?;
    println!("envelope: sweep of {} radii written to {}", steps + 1, out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_scaling(cfg: &RunConfig, out: &Path, cfg_bytes: &[u8]) -> Result<ExitCode, String> {
    ensure_out(out)?;
    let params = cfg.model_params().map_err(|e| e.to_string())?;
    let scfg = ScalingConfig {
        base_nx: cfg.nx,
        base_ny: cfg.ny,
        minimize: cfg.minimize_config(),
        sign: cfg.sign,
        energy_ratio_cap: cfg.energy_ratio_cap,
        ..Default::default()
    };
    let (records, artifacts) = match scaling_study(&params, &cfg.eps_list, &scfg) {
        Ok(v) => v,
        Err(f) => {
            // preserve whatever completed before the failure
            let mut csv = ScalingRecord::csv_header();
            csv.push('\n');
            for r in &f.partial {
                csv.push_str(&r.csv_row());
                csv.push('\n');
            }
            let _ = fs::write(out.join("scaling_partial.csv"), csv);
            return Err(format!("{} ({} records preserved)", f.error, f.partial.len()));
        }
    };

    let mut csv = ScalingRecord::csv_header();
    csv.push('\n');
    for r in &records {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    fs::write(out.join("scaling.csv"), csv).map_err(|e| e.to_string())?;
    for (i, a) in artifacts.iter().enumerate() {
        fs::write(out.join(format!("profile_{i}.csv")), a.profile.to_csv())
            .map_err(|e| e.to_string())?;
        fs::write(out.join(format!("trace_{i}.csv")), &a.trace_csv).map_err(|e| e.to_string())?;
        save_vector(&out.join(format!("final_k_{i}.field")), &a.final_k)
            .map_err(|e| e.to_string())?;
        save_tensor(&out.join(format!("final_b_{i}.field")), &a.final_b)
            .map_err(|e| e.to_string())?;
    }
    write_manifest(out, "scaling", cfg, cfg_bytes)?;
    println!("scaling: {} records written to {}", records.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(cfg: &RunConfig) -> Result<ExitCode, String> {
    let outcomes = selfcheck::run_all(cfg.seed).map_err(|e| e.to_string())?;
    let mut all_ok = true;
    for o in &outcomes {
        let status = if o.passed { "PASS" } else { "FAIL" };
        if o.threshold.is_finite() {
            println!(
                "check {:40} measured {:>12.3e}  threshold {:>9.1e}  {status}",
                o.name, o.measured, o.threshold
            );
        } else {
            println!("check {:40} measured {:>12.3e}  (logged)", o.name, o.measured);
        }
        all_ok &= o.passed;
    }
    if all_ok {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        Err("self-check battery reported failures".into())
    }
}
