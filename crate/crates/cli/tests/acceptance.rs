//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `--nocapture` to see them alongside cargo's own summary).
//!
//! Criterion 7's π-flip indicator is asserted exactly as specified and is
//! expected to fail: converged minimizers of this energy carry the free
//! 2-radian rotation across the layer (the well of W at 2 does not
//! distinguish the chord flip from a 2-radian rotation at unit length), and
//! the quadratic curl term prefers spreading the defect charge along the
//! layer, so the interior cross-section indicator settles near cos 2 ≈ −0.42
//! rather than below −0.9. All other sub-criteria of 7 pass.

use std::process::Command;

use disclin_core::analysis::{scaling_study, ScalingConfig};
use disclin_core::diffops::{boundary_circulation, grad};
use disclin_core::energy::relaxed_energy;
use disclin_core::envelope::shared_envelope;
use disclin_core::grid::Grid2;
use disclin_core::minimize::{charge, disclination_ansatz, MinimizeConfig};
use disclin_core::params::ModelParams;
use disclin_core::selfcheck;
use disclin_core::synth;

const SEED: u64 = 20240;

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} ({detail})",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_gradient_correctness() {
    let worst = selfcheck::gradient_fd_error(SEED, 20, 20).unwrap();
    report(
        "1 gradient correctness",
        worst < 1e-6,
        &format!("max relative error vs central differences = {worst:.3e}, tol 1e-6"),
    );
}

#[test]
fn criterion_2_helmholtz_identity() {
    let h = selfcheck::helmholtz_identity_errors(SEED, 10).unwrap();
    let ok = h.identity_rel < 1e-8 && h.div_rel < 1e-8 && h.orthogonality_rel < 1e-8;
    report(
        "2 helmholtz identity",
        ok,
        &format!(
            "|I−E|/(1+E) = {:.3e}, div p = {:.3e}, orthogonality = {:.3e}, tol 1e-8",
            h.identity_rel, h.div_rel, h.orthogonality_rel
        ),
    );
}

#[test]
fn criterion_3_envelope_vanishing() {
    let e = selfcheck::envelope_certificates(SEED, 1000, 1000);
    let ok = e.certificate_residual < 1e-12
        && e.inside_upper == 0.0
        && e.ordering_violation <= 0.0
        && e.upper_above_profile <= 1e-12;
    report(
        "3 envelope vanishing",
        ok,
        &format!(
            "certificate residual = {:.3e} (tol 1e-12), upper inside ball = {:.1e}, ordering violation = {:.1e}, upper−W = {:.1e}",
            e.certificate_residual, e.inside_upper, e.ordering_violation, e.upper_above_profile
        ),
    );
}

#[test]
fn criterion_4_defect_free_collapse() {
    let g = Grid2::square(64).unwrap();
    // unit field with a named gradient bound; ε chosen from the bound
    let grad_bound = 4.0;
    let k = synth::smooth_unit_field(g, 0.8).unwrap();
    let xi = 0.5;
    let eps = 2.0 / (xi * grad_bound + 1.0);
    let mut params = ModelParams::new(eps, xi).unwrap();
    params.eps = eps;
    let b = grad(&k);
    let env = shared_envelope(params.potential, 3);
    let rep = relaxed_energy(&k, &b, &params, &env).unwrap();
    let tol = 1e-6 * 4.0; // |Ω| = 4
    report(
        "4 defect-free collapse",
        rep.total < tol,
        &format!("relaxed energy with B = ∇k is {:.3e}, tol {tol:.1e}", rep.total),
    );
}

#[test]
fn criterion_5_charge_quantization() {
    let mut errs = Vec::new();
    let mut stokes_ok = true;
    for n in [64usize, 128, 256] {
        let g = Grid2::square(n).unwrap();
        let p = ModelParams::new(0.5, 0.5).unwrap();
        let (_, b0) = disclination_ansatz(g, &p, 1).unwrap();
        let q = charge(&b0);
        let circ = boundary_circulation(&b0);
        let scale = 1.0 / (g.hx * g.hy);
        stokes_ok &= (q[0] - circ[0]).abs() < 1e-12 * scale && (q[1] - circ[1]).abs() < 1e-12 * scale;
        errs.push(((q[0] * q[0] + q[1] * q[1]).sqrt() - 2.0).abs());
    }
    let decreasing = errs[1] < errs[0] && errs[2] < errs[1];
    let ok = stokes_ok && decreasing && errs[2] < 0.05;
    report(
        "5 charge quantization",
        ok,
        &format!(
            "| |charge|−2 | = {:.4e} / {:.4e} / {:.4e} at 64²/128²/256² (decreasing, < 0.05), stokes identity exact: {stokes_ok}",
            errs[0], errs[1], errs[2]
        ),
    );
}

#[test]
fn criterion_6_stencil_identities() {
    let s = selfcheck::stencil_identities(SEED).unwrap();
    let ok = s.curl_grad < 1e-12 && s.grad_adjoint_rel < 1e-12 && s.div_adjoint_rel < 1e-12;
    report(
        "6 stencil identities",
        ok,
        &format!(
            "curl∘grad = {:.3e}, grad adjoint = {:.3e}, div adjoint = {:.3e}, tol 1e-12",
            s.curl_grad, s.grad_adjoint_rel, s.div_adjoint_rel
        ),
    );
}

#[test]
fn criterion_7_end_to_end_minimization() {
    let params = ModelParams::new(0.5, 0.25).unwrap();
    let cfg = ScalingConfig {
        base_nx: 128,
        base_ny: 128,
        minimize: MinimizeConfig {
            max_iters: 2000,
            grad_tol: 1e-9,
            mu_schedule: vec![10.0, 100.0, 1000.0],
            ..Default::default()
        },
        ..Default::default()
    };
    let eps_list = [0.5, 0.25, 0.125];
    let (records, artifacts) = scaling_study(&params, &eps_list, &cfg).expect("runs terminate");

    // π-flip indicator one cell row beyond the layer on each side at x₁ = 0.5
    let mut flips = Vec::new();
    for (r, a) in records.iter().zip(&artifacts) {
        let g = a.final_k.grid;
        let h = 0.5 * r.eps * params.xi;
        let ja = (0..=g.ny).position(|j| g.node_y(j) > h + 1e-12).unwrap() + 1;
        let jb = (0..=g.ny).rev().find(|&j| g.node_y(j) < -h - 1e-12).unwrap() - 1;
        let i = ((0.5 - g.x_min) / g.hx).round() as usize;
        let above = a.final_k.get(i, ja);
        let below = a.final_k.get(i, jb);
        flips.push(above[0] * below[0] + above[1] * below[1]);
    }

    let charge_ok = records.iter().all(|r| r.charge_gap < 0.05);
    let jump_ok = records.last().unwrap().jump_endpoint_gap < 0.1;
    let compat = [
        records[0].compatibility_sup,
        records[1].compatibility_sup,
        records[2].compatibility_sup,
    ];
    let compat_ok = compat[1] <= compat[0] && compat[2] <= compat[1];
    let trace_ok = records.last().unwrap().trace_residual < 0.1;
    let flip_ok = flips.iter().all(|&f| f < -0.9);

    println!(
        "criterion 7 detail: charge gaps = {:.2e}/{:.2e}/{:.2e} (< 0.05: {charge_ok}), \
         jump endpoint gap = {:.3e} (< 0.1: {jump_ok}), \
         compatibility = {:.4}/{:.4}/{:.4} (nonincreasing: {compat_ok}), \
         trace residual = {:.4} (< 0.1: {trace_ok}), \
         flip indicator = {:.3}/{:.3}/{:.3} (< −0.9: {flip_ok})",
        records[0].charge_gap,
        records[1].charge_gap,
        records[2].charge_gap,
        records.last().unwrap().jump_endpoint_gap,
        compat[0],
        compat[1],
        compat[2],
        records.last().unwrap().trace_residual,
        flips[0],
        flips[1],
        flips[2]
    );
    let all = charge_ok && jump_ok && compat_ok && trace_ok && flip_ok;
    report(
        "7 end-to-end minimization",
        all,
        &format!(
            "charge {charge_ok}, jump endpoint {jump_ok}, compatibility monotone {compat_ok}, trace {trace_ok}, pi-flip {flip_ok} \
             (flip settles near cos 2 ≈ −0.42: the well at 2 admits a free 2-radian rotation and the quadratic curl term spreads the charge along the layer)"
        ),
    );
}

#[test]
fn criterion_8_curl_measure_identity() {
    use disclin_core::analysis::{curl_measure_check, jump_profile};
    use disclin_core::field::VectorField;

    let p = ModelParams::new(0.5, 0.5).unwrap();
    let geom = p.layer().unwrap();
    let g = Grid2::square(256).unwrap();
    let w = geom.half_height();
    let slope = [0.8, -0.4];
    let gfun = move |x: f64| {
        let t = synth::taper(x, -0.48, -0.3);
        [t * (1.2 + slope[0] * x), t * (0.5 + slope[1] * x)]
    };
    let base = |x: f64| [0.25 * x.sin(), 0.1 * (2.0 * x).cos()];
    let k = synth::prescribed_jump_field(g, w, gfun, base).unwrap();
    let lg = Grid2::new(192, 16, -p.xi, 1.0, -0.5 * p.xi, 0.5 * p.xi).unwrap();
    let kt = VectorField::sample(lg, |x, y| {
        let r = synth::jump_ramp(y, 0.5 * p.xi);
        let gv = gfun(x);
        let bv = base(x);
        [bv[0] + r * gv[0], bv[1] + r * gv[1]]
    })
    .unwrap();
    let profile = jump_profile(&kt);
    let worst = curl_measure_check(&profile, &k, &geom).unwrap();
    report(
        "8 curl-measure identity",
        worst < 1e-4,
        &format!("max discrepancy over the 8 test functions = {worst:.3e}, tol 1e-4"),
    );
}

#[test]
fn criterion_9_determinism() {
    let dir = std::env::temp_dir().join(format!("disclin_det_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("det.cfg");
    std::fs::write(
        &cfg_path,
        "nx = 32\nny = 32\neps = 0.5\nxi = 0.5\nmu = 10, 100\nmax_iters = 120\nseed = 42\nnoise_sigma = 0.05\n",
    )
    .unwrap();
    let run = |out: &str| {
        let out_dir = dir.join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_disclin"))
            .args([
                "minimize",
                "--config",
                cfg_path.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        out_dir
    };
    let a = run("a");
    let b = run("b");
    let mut identical = true;
    for name in ["trace.csv", "summary.csv", "final_k.field", "final_b.field", "manifest.txt"] {
        let fa = std::fs::read(a.join(name)).unwrap();
        let fb = std::fs::read(b.join(name)).unwrap();
        identical &= fa == fb;
    }
    let _ = std::fs::remove_dir_all(&dir);
    report(
        "9 determinism",
        identical,
        "two identical-config runs produced byte-identical CSVs and field dumps",
    );
}
