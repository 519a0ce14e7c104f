//! Row-wise Helmholtz decomposition B = p + ∇z on the grid.
//!
//! Each row of B is split by solving the discrete Neumann problem
//! Gᵀ G z = Gᵀ B_row with conjugate gradient on the grad-adjoint Laplacian
//! Gᵀ G. Compatibility of the Neumann data holds discretely by construction
//! because the right-hand side and the operator come from the same adjoint
//! identity. The divergence-free part is p = B − ∇z; its weak divergence and
//! its orthogonality defect against every discrete gradient are both equal to
//! the final CG residual.
//!
//! The kernel of G on a tensor-product grid is two-dimensional per component
//! (constants and the node checkerboard), so the solver projects both modes
//! out of the iterates; z is returned with zero mean per component.

use crate::diffops::{grad, grad_scalar, grad_scalar_adjoint};
use crate::error::{Error, Result};
use crate::field::{TensorField, VectorField};
use crate::grid::Grid2;

#[derive(Clone, Debug)]
pub struct HelmholtzResult {
    /// Divergence-free part.
    pub p: TensorField,
    /// Row-wise potential, zero mean per component.
    pub z: VectorField,
    pub grad_z: TensorField,
    /// Max relative CG residual over the two rows; bounds the weak
    /// divergence of p and its non-orthogonality against gradients.
    pub residual: f64,
    pub iterations: usize,
}

pub fn helmholtz(b: &TensorField, tol: f64) -> Result<HelmholtzResult> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::Param(format!("helmholtz tolerance must be positive, got {tol}")));
    }
    let g = b.grid;
    let n_nodes = g.n_nodes();
    let n_cells = g.n_cells();
    let mut z = VectorField::zeros(g);
    let mut worst_res = 0.0f64;
    let mut total_iters = 0;

    let mut rhs = vec![0.0; n_nodes];
    let mut gx = vec![0.0; n_cells];
    let mut gy = vec![0.0; n_cells];
    for row in 0..2 {
        for cy in 0..g.ny {
            for cx in 0..g.nx {
                let m = b.get(cx, cy);
                let c = g.cell_index(cx, cy);
                gx[c] = m[row][0];
                gy[c] = m[row][1];
            }
        }
        grad_scalar_adjoint(&g, &gx, &gy, &mut rhs);
        let max_iters = iter_cap(&g);
        let sol = cg_neumann(&g, &rhs, tol, max_iters)?;
        worst_res = worst_res.max(sol.rel_residual);
        total_iters += sol.iterations;
        for (idx, v) in sol.x.iter().enumerate() {
            z.data[2 * idx + row] = *v;
        }
    }

    let grad_z = grad(&z);
    let mut p = b.clone();
    for (pv, gv) in p.data.iter_mut().zip(&grad_z.data) {
        *pv -= gv;
    }
    Ok(HelmholtzResult { p, z, grad_z, residual: worst_res, iterations: total_iters })
}

fn iter_cap(g: &Grid2) -> usize {
    40 * (g.nx + g.ny) + 200
}

pub(crate) struct CgSolution {
    pub x: Vec<f64>,
    pub rel_residual: f64,
    pub iterations: usize,
}

/// Conjugate gradient for Gᵀ G x = b on node scalars, with constants and the
/// checkerboard mode projected out of every iterate.
pub(crate) fn cg_neumann(g: &Grid2, b: &[f64], tol: f64, max_iters: usize) -> Result<CgSolution> {
    let n = g.n_nodes();
    let mut rhs = b.to_vec();
    project_kernel(g, &mut rhs);
    let b_norm = l2(&rhs);
    if b_norm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], rel_residual: 0.0, iterations: 0 });
    }

    let mut x = vec![0.0; n];
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut gx = vec![0.0; g.n_cells()];
    let mut gy = vec![0.0; g.n_cells()];
    let mut rs = dot(&r, &r);
    let mut history = Vec::new();

    for it in 0..max_iters {
        grad_scalar(g, &p, &mut gx, &mut gy);
        grad_scalar_adjoint(g, &gx, &gy, &mut ap);
        project_kernel(g, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Solver {
                message: format!("CG lost positive-definiteness (pᵀAp = {pap:.3e})"),
                residual_history: history,
            });
        }
        let alpha = rs / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        project_kernel(g, &mut r);
        let rs_new = dot(&r, &r);
        let rel = rs_new.sqrt() / b_norm;
        history.push(rel);
        if rel <= tol {
            project_kernel(g, &mut x);
            return Ok(CgSolution { x, rel_residual: rel, iterations: it + 1 });
        }
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::Solver {
        message: format!("CG did not reach tol {tol:.1e} within {max_iters} iterations"),
        residual_history: history,
    })
}

/// Remove the span of {1, checkerboard} (non-orthogonal pair when both cell
/// counts are even; solved via the 2×2 Gram system).
pub(crate) fn project_kernel(g: &Grid2, v: &mut [f64]) {
    let w = g.nx + 1;
    let n = v.len() as f64;
    let mut s1 = 0.0;
    let mut sc = 0.0;
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let val = v[j * w + i];
            s1 += val;
            sc += val * chk(i, j);
        }
    }
    // Gram matrix [[n, t], [t, n]] with t = Σ χ.
    let t = (if g.nx % 2 == 0 { 1.0 } else { 0.0 }) * (if g.ny % 2 == 0 { 1.0 } else { 0.0 });
    let det = n * n - t * t;
    let a = (n * s1 - t * sc) / det;
    let c = (n * sc - t * s1) / det;
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            v[j * w + i] -= a + c * chk(i, j);
        }
    }
}

#[inline]
fn chk(i: usize, j: usize) -> f64 {
    if (i + j) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn l2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
