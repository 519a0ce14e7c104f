//! Synthetic field constructions shared by the self-check battery, the
//! diagnostics, and the test suites.

use crate::error::Result;
use crate::field::{TensorField, VectorField};
use crate::grid::Grid2;
use crate::rng::SplitMix64;

/// Low-frequency random trigonometric vector field around a constant offset.
pub fn smooth_vector_field(grid: Grid2, seed: u64, offset: [f64; 2], amp: f64) -> VectorField {
    let mut rng = SplitMix64::new(seed);
    let coef: Vec<f64> = (0..16).map(|_| rng.range(-1.0, 1.0)).collect();
    VectorField::sample(grid, |x, y| {
        let mut out = offset;
        for c in 0..2 {
            let b = 8 * c;
            out[c] += amp
                * 0.25
                * (coef[b] * (x + 0.3 * y).sin()
                    + coef[b + 1] * (2.0 * x - y).cos()
                    + coef[b + 2] * (y + 0.7).sin()
                    + coef[b + 3] * (x * y).cos()
                    + coef[b + 4] * (1.5 * y).sin()
                    + coef[b + 5] * (0.5 * x - 1.2 * y).cos()
                    + coef[b + 6] * (x - 0.4).sin()
                    + coef[b + 7] * (2.3 * y + 0.9 * x).cos());
        }
        out
    })
    .expect("trigonometric samples are finite")
}

/// Low-frequency random trigonometric tensor field.
pub fn smooth_tensor_field(grid: Grid2, seed: u64, amp: f64) -> TensorField {
    let mut rng = SplitMix64::new(seed);
    let coef: Vec<f64> = (0..24).map(|_| rng.range(-1.0, 1.0)).collect();
    TensorField::sample(grid, |x, y| {
        let mut m = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let b = 6 * (2 * r + c);
                m[r][c] = amp
                    * (coef[b] * (x + 0.4 * y).sin()
                        + coef[b + 1] * (1.7 * y - x).cos()
                        + coef[b + 2] * (0.6 * x).sin()
                        + coef[b + 3])
                    / 3.0
                    + amp * 0.1 * (coef[b + 4] * x + coef[b + 5] * y);
            }
        }
        m
    })
    .expect("trigonometric samples are finite")
}

/// Unit-length director k = (cos ψ, sin ψ) with ψ = a·sin(πx)sin(πy);
/// |∇k| = |∇ψ| ≤ a·π·√2 pointwise.
pub fn smooth_unit_field(grid: Grid2, phase_amplitude: f64) -> Result<VectorField> {
    let pi = std::f64::consts::PI;
    VectorField::sample(grid, |x, y| {
        let psi = phase_amplitude * (pi * x).sin() * (pi * y).sin();
        [psi.cos(), psi.sin()]
    })
}

/// Piecewise-linear vertical transition: 0 below −w, 1 above w.
pub fn jump_ramp(y: f64, w: f64) -> f64 {
    if y <= -w {
        0.0
    } else if y >= w {
        1.0
    } else {
        (y + w) / (2.0 * w)
    }
}

/// C² taper from 0 at x0 to 1 at x1 (quintic smoothstep).
pub fn taper(x: f64, x0: f64, x1: f64) -> f64 {
    if x <= x0 {
        0.0
    } else if x >= x1 {
        1.0
    } else {
        let s = (x - x0) / (x1 - x0);
        s * s * s * (10.0 - 15.0 * s + 6.0 * s * s)
    }
}

/// Field with a prescribed vertical jump profile: base(x) + g(x)·ramp(y, w).
/// The base depends on x only, so the trace jump across the band |y| ≤ w is
/// exactly g(x).
pub fn prescribed_jump_field<G, B>(grid: Grid2, w: f64, g: G, base: B) -> Result<VectorField>
where
    G: Fn(f64) -> [f64; 2],
    B: Fn(f64) -> [f64; 2],
{
    VectorField::sample(grid, |x, y| {
        let r = jump_ramp(y, w);
        let gv = g(x);
        let bv = base(x);
        [bv[0] + r * gv[0], bv[1] + r * gv[1]]
    })
}
