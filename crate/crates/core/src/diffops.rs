//! Discrete differential operators on the node/cell staggering.
//!
//! Conventions:
//! - `grad` maps node vector fields to cell-centered tensors by bilinear
//!   cell differencing (exact on affine fields).
//! - `curl_rowwise` maps cell tensors to node vectors; the value at an
//!   interior node is the circulation of each tensor row around the node's
//!   dual cell divided by the cell area. Boundary nodes carry 0: the curl is
//!   an interior quantity, and this is what makes the discrete Stokes
//!   identity and curl∘grad = 0 exact.
//! - `div_rowwise` is the pointwise divergence (centered in the interior,
//!   one-sided at the boundary). The adjoint-exact weak divergence used by
//!   the Neumann solver is `grad_adjoint`.

use crate::field::{TensorField, VectorField};
use crate::grid::Grid2;

/// ∇k at cell centers: entry (i, j) holds ∂_j k_i.
pub fn grad(k: &VectorField) -> TensorField {
    scaled_grad(k, 1.0)
}

/// Anisotropically scaled gradient [∂₁, (1/ε)∂₂].
pub fn scaled_grad(k: &VectorField, eps: f64) -> TensorField {
    assert!(eps > 0.0, "scaled_grad needs eps > 0");
    let g = k.grid;
    let mut out = TensorField::zeros(g);
    let sx = 1.0 / (2.0 * g.hx);
    let sy = 1.0 / (2.0 * g.hy * eps);
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let n00 = k.get(cx, cy);
            let n10 = k.get(cx + 1, cy);
            let n01 = k.get(cx, cy + 1);
            let n11 = k.get(cx + 1, cy + 1);
            let mut m = [[0.0; 2]; 2];
            for i in 0..2 {
                m[i][0] = (n10[i] + n11[i] - n00[i] - n01[i]) * sx;
                m[i][1] = (n01[i] + n11[i] - n00[i] - n10[i]) * sy;
            }
            out.set(cx, cy, m);
        }
    }
    out
}

/// Exact transpose of [`grad`] (plain transpose; the uniform quadrature
/// weight hx·hy cancels between the node and cell inner products).
pub fn grad_adjoint(t: &TensorField) -> VectorField {
    let g = t.grid;
    let mut out = VectorField::zeros(g);
    let sx = 1.0 / (2.0 * g.hx);
    let sy = 1.0 / (2.0 * g.hy);
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let m = t.get(cx, cy);
            for i in 0..2 {
                let gx = m[i][0] * sx;
                let gy = m[i][1] * sy;
                let i00 = 2 * g.node_index(cx, cy) + i;
                let i10 = 2 * g.node_index(cx + 1, cy) + i;
                let i01 = 2 * g.node_index(cx, cy + 1) + i;
                let i11 = 2 * g.node_index(cx + 1, cy + 1) + i;
                out.data[i00] += -gx - gy;
                out.data[i10] += gx - gy;
                out.data[i01] += -gx + gy;
                out.data[i11] += gx + gy;
            }
        }
    }
    out
}

/// Row-wise 2D curl ∂₁B^{i2} − ∂₂B^{i1} at nodes; boundary ring is 0.
pub fn curl_rowwise(b: &TensorField) -> VectorField {
    scaled_curl(b, 1.0)
}

/// Scaled curl ∂₁B^{i2} − (1/ε)∂₂B^{i1}.
pub fn scaled_curl(b: &TensorField, eps: f64) -> VectorField {
    assert!(eps > 0.0, "scaled_curl needs eps > 0");
    let g = b.grid;
    let mut out = VectorField::zeros(g);
    let sx = 1.0 / (2.0 * g.hx);
    let sy = 1.0 / (2.0 * g.hy * eps);
    for a in 1..g.nx {
        for bn in 1..g.ny {
            let sw = b.get(a - 1, bn - 1);
            let se = b.get(a, bn - 1);
            let nw = b.get(a - 1, bn);
            let ne = b.get(a, bn);
            let mut v = [0.0; 2];
            for i in 0..2 {
                let d1 = (se[i][1] + ne[i][1] - sw[i][1] - nw[i][1]) * sx;
                let d2 = (nw[i][0] + ne[i][0] - sw[i][0] - se[i][0]) * sy;
                v[i] = d1 - d2;
            }
            out.set(a, bn, v);
        }
    }
    out
}

/// Exact transpose of [`curl_rowwise`]; only interior node values scatter.
pub fn curl_adjoint(v: &VectorField) -> TensorField {
    let g = v.grid;
    let mut out = TensorField::zeros(g);
    let sx = 1.0 / (2.0 * g.hx);
    let sy = 1.0 / (2.0 * g.hy);
    for a in 1..g.nx {
        for bn in 1..g.ny {
            let val = v.get(a, bn);
            for i in 0..2 {
                let vx = val[i] * sx;
                let vy = val[i] * sy;
                // column 2 entries pick up +∂₁ᵀ, column 1 entries −∂₂ᵀ
                let idx = |cx: usize, cy: usize, col: usize| 4 * g.cell_index(cx, cy) + 2 * i + col;
                out.data[idx(a, bn - 1, 1)] += vx;
                out.data[idx(a, bn, 1)] += vx;
                out.data[idx(a - 1, bn - 1, 1)] -= vx;
                out.data[idx(a - 1, bn, 1)] -= vx;
                out.data[idx(a - 1, bn, 0)] -= vy;
                out.data[idx(a, bn, 0)] -= vy;
                out.data[idx(a - 1, bn - 1, 0)] += vy;
                out.data[idx(a, bn - 1, 0)] += vy;
            }
        }
    }
    out
}

/// Pointwise row-wise divergence ∂₁B^{i1} + ∂₂B^{i2} at nodes, centered in
/// the interior and one-sided at the boundary (kills constants everywhere).
pub fn div_rowwise(b: &TensorField) -> VectorField {
    let g = b.grid;
    debug_assert!(g.nx >= 2 && g.ny >= 2, "div_rowwise needs at least 2 cells per direction");
    let mut out = VectorField::zeros(g);
    for a in 0..=g.nx {
        let (cw, ce) = clamp_pair(a, g.nx);
        for bn in 0..=g.ny {
            let (cs, cn) = clamp_pair(bn, g.ny);
            let mut v = [0.0; 2];
            for i in 0..2 {
                // average over the available transverse pair, difference over
                // the available normal pair.
                let col = |cx: usize| -> f64 {
                    if bn == 0 {
                        b.get(cx, 0)[i][0]
                    } else if bn == g.ny {
                        b.get(cx, g.ny - 1)[i][0]
                    } else {
                        0.5 * (b.get(cx, bn - 1)[i][0] + b.get(cx, bn)[i][0])
                    }
                };
                let row = |cy: usize| -> f64 {
                    if a == 0 {
                        b.get(0, cy)[i][1]
                    } else if a == g.nx {
                        b.get(g.nx - 1, cy)[i][1]
                    } else {
                        0.5 * (b.get(a - 1, cy)[i][1] + b.get(a, cy)[i][1])
                    }
                };
                let dx = (col(ce) - col(cw)) / ((ce - cw) as f64 * g.hx);
                let dy = (row(cn) - row(cs)) / ((cn - cs) as f64 * g.hy);
                v[i] = dx + dy;
            }
            out.set(a, bn, v);
        }
    }
    out
}

fn clamp_pair(a: usize, n: usize) -> (usize, usize) {
    if a == 0 {
        (0, 1)
    } else if a == n {
        (n - 2, n - 1)
    } else {
        (a - 1, a)
    }
}

/// L² inner product of cell tensors (midpoint quadrature).
pub fn inner_cells(a: &TensorField, b: &TensorField) -> f64 {
    debug_assert_eq!(a.grid, b.grid);
    a.grid.cell_area() * a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum::<f64>()
}

/// L² inner product of node vectors (uniform node weights).
pub fn inner_nodes(a: &VectorField, b: &VectorField) -> f64 {
    debug_assert_eq!(a.grid, b.grid);
    a.grid.cell_area() * a.data.iter().zip(&b.data).map(|(x, y)| x * y).sum::<f64>()
}

pub fn norm_cells(a: &TensorField) -> f64 {
    inner_cells(a, a).sqrt()
}

pub fn norm_nodes(a: &VectorField) -> f64 {
    inner_nodes(a, a).sqrt()
}

/// First-difference (h¹) seminorm of a cell tensor, used for the measured
/// div+curl constant diagnostic.
pub fn h1_seminorm_cells(t: &TensorField) -> f64 {
    let g = t.grid;
    let mut acc = 0.0;
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let m = t.get(cx, cy);
            if cx + 1 < g.nx {
                let r = t.get(cx + 1, cy);
                for i in 0..2 {
                    for j in 0..2 {
                        let d = (r[i][j] - m[i][j]) / g.hx;
                        acc += d * d;
                    }
                }
            }
            if cy + 1 < g.ny {
                let u = t.get(cx, cy + 1);
                for i in 0..2 {
                    for j in 0..2 {
                        let d = (u[i][j] - m[i][j]) / g.hy;
                        acc += d * d;
                    }
                }
            }
        }
    }
    (g.cell_area() * acc).sqrt()
}

/// Measured constant of the first-order bound
/// ‖p‖_{h¹} ≤ C (‖p‖ + ‖curl p‖) for a given divergence-free p.
/// Diagnostic only; the constant depends on the grid.
pub fn div_curl_bound_constant(p: &TensorField) -> f64 {
    let num = h1_seminorm_cells(p);
    let den = norm_cells(p) + norm_nodes(&curl_rowwise(p));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Interior-node quadrature of the row-wise curl; by discrete Stokes this
/// equals the trapezoidal circulation of the tensor rows around the ring of
/// outermost cell centers, see [`boundary_circulation`].
pub fn integral_curl(b: &TensorField) -> [f64; 2] {
    integral_scaled_curl(b, 1.0)
}

pub fn integral_scaled_curl(b: &TensorField, eps: f64) -> [f64; 2] {
    let c = scaled_curl(b, eps);
    let g = b.grid;
    let mut out = [0.0; 2];
    for a in 1..g.nx {
        for bn in 1..g.ny {
            let v = c.get(a, bn);
            out[0] += v[0];
            out[1] += v[1];
        }
    }
    out[0] *= g.cell_area();
    out[1] *= g.cell_area();
    out
}

/// Trapezoidal circulation of each tensor row around the closed ring through
/// the outermost cell centers (the independent Stokes-side of the charge).
pub fn boundary_circulation(b: &TensorField) -> [f64; 2] {
    boundary_circulation_scaled(b, 1.0)
}

/// Circulation consistent with the scaled curl: the vertical legs pick up
/// the 1/ε weight on the B^{i1} component.
pub fn boundary_circulation_scaled(b: &TensorField, eps: f64) -> [f64; 2] {
    let g = b.grid;
    let nx = g.nx;
    let ny = g.ny;
    let mut out = [0.0; 2];
    for i in 0..2 {
        let mut acc = 0.0;
        // bottom edge, left→right: +∫ B^{i1} dx / ε
        for cx in 0..nx {
            let w = trap_w(cx, nx);
            acc += w * b.get(cx, 0)[i][0] * g.hx / eps;
        }
        // right edge, bottom→top: +∫ B^{i2} dy
        for cy in 0..ny {
            let w = trap_w(cy, ny);
            acc += w * b.get(nx - 1, cy)[i][1] * g.hy;
        }
        // top edge, right→left: −∫ B^{i1} dx / ε
        for cx in 0..nx {
            let w = trap_w(cx, nx);
            acc -= w * b.get(cx, ny - 1)[i][0] * g.hx / eps;
        }
        // left edge, top→bottom: −∫ B^{i2} dy
        for cy in 0..ny {
            let w = trap_w(cy, ny);
            acc -= w * b.get(0, cy)[i][1] * g.hy;
        }
        out[i] = acc;
    }
    out
}

fn trap_w(c: usize, n: usize) -> f64 {
    if c == 0 || c == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Scalar-component gradient used by the Neumann solver: node scalars to
/// (gx, gy) cell pairs, same stencil as [`grad`].
pub(crate) fn grad_scalar(g: &Grid2, z: &[f64], gx: &mut [f64], gy: &mut [f64]) {
    let sx = 1.0 / (2.0 * g.hx);
    let sy = 1.0 / (2.0 * g.hy);
    let w = g.nx + 1;
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let n00 = z[cy * w + cx];
            let n10 = z[cy * w + cx + 1];
            let n01 = z[(cy + 1) * w + cx];
            let n11 = z[(cy + 1) * w + cx + 1];
            let c = cy * g.nx + cx;
            gx[c] = (n10 + n11 - n00 - n01) * sx;
            gy[c] = (n01 + n11 - n00 - n10) * sy;
        }
    }
}

pub(crate) fn grad_scalar_adjoint(g: &Grid2, gx: &[f64], gy: &[f64], out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let sx = 1.0 / (2.0 * g.hx);
    let sy = 1.0 / (2.0 * g.hy);
    let w = g.nx + 1;
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let c = cy * g.nx + cx;
            let ax = gx[c] * sx;
            let ay = gy[c] * sy;
            out[cy * w + cx] += -ax - ay;
            out[cy * w + cx + 1] += ax - ay;
            out[(cy + 1) * w + cx] += -ax + ay;
            out[(cy + 1) * w + cx + 1] += ax + ay;
        }
    }
}
