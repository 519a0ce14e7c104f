//! Flat key = value run configuration. Unknown keys are errors so a config
//! file always means what it says.

use disclin_core::minimize::{Anchor, MinimizeConfig, StepRule};
use disclin_core::params::ModelParams;
use disclin_core::potential::WellPotential;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub nx: usize,
    pub ny: usize,
    pub eps: f64,
    pub xi: f64,
    pub potential: WellPotential,
    pub mu: Vec<f64>,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step: String,
    pub step_size: f64,
    pub use_relaxed: bool,
    pub alternating: bool,
    pub anchor: bool,
    pub anchor_x: f64,
    pub anchor_y: f64,
    pub anchor_kx: f64,
    pub anchor_ky: f64,
    pub anchor_weight: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub sign: i32,
    pub eps_list: Vec<f64>,
    pub energy_ratio_cap: f64,
    pub envelope_r_max: f64,
    pub envelope_step: f64,
    pub envelope_depth: usize,
    pub cg_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            nx: 64,
            ny: 64,
            eps: 0.5,
            xi: 0.25,
            potential: WellPotential::Rational,
            mu: vec![10.0, 100.0, 1000.0],
            max_iters: 500,
            grad_tol: 1e-7,
            step: "backtracking".into(),
            step_size: 1e-3,
            use_relaxed: false,
            alternating: false,
            anchor: true,
            anchor_x: -0.9,
            anchor_y: -0.9,
            anchor_kx: 1.0,
            anchor_ky: 0.0,
            anchor_weight: 10.0,
            noise_sigma: 0.0,
            seed: 0,
            sign: 1,
            eps_list: vec![0.5, 0.25, 0.125],
            energy_ratio_cap: 10.0,
            envelope_r_max: 4.0,
            envelope_step: 0.05,
            envelope_depth: 3,
            cg_tol: 1e-11,
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value, got '{raw}'", lineno + 1))?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| format!("line {}: bad {what} value '{value}'", lineno + 1);
        match key {
            "nx" => cfg.nx = value.parse().map_err(|_| bad("nx"))?,
            "ny" => cfg.ny = value.parse().map_err(|_| bad("ny"))?,
            "eps" => cfg.eps = value.parse().map_err(|_| bad("eps"))?,
            "xi" => cfg.xi = value.parse().map_err(|_| bad("xi"))?,
            "potential" => {
                cfg.potential = match value {
                    "rational" => WellPotential::Rational,
                    "piecewise" => WellPotential::PiecewiseQuadratic,
                    other => return Err(format!("line {}: unknown potential '{other}'", lineno + 1)),
                }
            }
            "mu" => cfg.mu = parse_list(value).map_err(|_| bad("mu"))?,
            "max_iters" => cfg.max_iters = value.parse().map_err(|_| bad("max_iters"))?,
            "grad_tol" => cfg.grad_tol = value.parse().map_err(|_| bad("grad_tol"))?,
            "step" => match value {
                "backtracking" | "fixed" => cfg.step = value.into(),
                other => return Err(format!("line {}: unknown step rule '{other}'", lineno + 1)),
            },
            "step_size" => cfg.step_size = value.parse().map_err(|_| bad("step_size"))?,
            "use_relaxed" => cfg.use_relaxed = parse_bool(value).map_err(|_| bad("use_relaxed"))?,
            "alternating" => cfg.alternating = parse_bool(value).map_err(|_| bad("alternating"))?,
            "anchor" => cfg.anchor = parse_bool(value).map_err(|_| bad("anchor"))?,
            "anchor_x" => cfg.anchor_x = value.parse().map_err(|_| bad("anchor_x"))?,
            "anchor_y" => cfg.anchor_y = value.parse().map_err(|_| bad("anchor_y"))?,
            "anchor_kx" => cfg.anchor_kx = value.parse().map_err(|_| bad("anchor_kx"))?,
            "anchor_ky" => cfg.anchor_ky = value.parse().map_err(|_| bad("anchor_ky"))?,
            "anchor_weight" => cfg.anchor_weight = value.parse().map_err(|_| bad("anchor_weight"))?,
            "noise_sigma" => cfg.noise_sigma = value.parse().map_err(|_| bad("noise_sigma"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
            "sign" => {
                cfg.sign = value.parse().map_err(|_| bad("sign"))?;
                if cfg.sign != 1 && cfg.sign != -1 {
                    return Err(format!("line {}: sign must be 1 or -1", lineno + 1));
                }
            }
            "eps_list" => cfg.eps_list = parse_list(value).map_err(|_| bad("eps_list"))?,
            "energy_ratio_cap" => {
                cfg.energy_ratio_cap = value.parse().map_err(|_| bad("energy_ratio_cap"))?
            }
            "envelope_r_max" => {
                cfg.envelope_r_max = value.parse().map_err(|_| bad("envelope_r_max"))?
            }
            "envelope_step" => cfg.envelope_step = value.parse().map_err(|_| bad("envelope_step"))?,
            "envelope_depth" => {
                cfg.envelope_depth = value.parse().map_err(|_| bad("envelope_depth"))?
            }
            "cg_tol" => cfg.cg_tol = value.parse().map_err(|_| bad("cg_tol"))?,
            other => return Err(format!("line {}: unknown key '{other}'", lineno + 1)),
        }
    }
    Ok(cfg)
}

fn parse_bool(v: &str) -> Result<bool, ()> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(()),
    }
}

fn parse_list(v: &str) -> Result<Vec<f64>, ()> {
    v.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| ()))
        .collect()
}

impl RunConfig {
    pub fn model_params(&self) -> Result<ModelParams, disclin_core::Error> {
        let mut p = ModelParams::new(self.eps, self.xi)?;
        p.potential = self.potential;
        p.charge_penalty_weight = self.mu.last().copied().unwrap_or(0.0);
        p.tolerances.cg_tol = self.cg_tol;
        Ok(p)
    }

    pub fn minimize_config(&self) -> MinimizeConfig {
        MinimizeConfig {
            max_iters: self.max_iters,
            grad_tol: self.grad_tol,
            step: if self.step == "fixed" {
                StepRule::Fixed { size: self.step_size }
            } else {
                StepRule::Backtracking { init: 1.0 }
            },
            mu_schedule: self.mu.clone(),
            anchor: if self.anchor {
                Some(Anchor {
                    x: self.anchor_x,
                    y: self.anchor_y,
                    value: [self.anchor_kx, self.anchor_ky],
                    weight: self.anchor_weight,
                })
            } else {
                None
            },
            use_relaxed: self.use_relaxed,
            alternating: self.alternating,
            noise_sigma: self.noise_sigma,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_config() {
        let cfg = parse_config("nx = 32\nny = 32\neps = 0.5\nxi = 0.5\n# comment\nmu = 10, 100\n").unwrap();
        assert_eq!(cfg.nx, 32);
        assert_eq!(cfg.mu, vec![10.0, 100.0]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(parse_config("frobnicate = 7\n").is_err());
        assert!(parse_config("nx = notanumber\n").is_err());
        assert!(parse_config("potential = cubic\n").is_err());
        assert!(parse_config("nx 32\n").is_err());
    }
}
