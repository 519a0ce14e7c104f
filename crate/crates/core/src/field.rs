//! Sampled vector and tensor fields.

use crate::error::{Error, Result};
use crate::grid::Grid2;

/// ℝ²-valued field sampled at grid nodes, row-major with the two components
/// interleaved: `data[2·(j·(nx+1)+i) + c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub grid: Grid2,
    pub data: Vec<f64>,
}

/// ℝ^{2×2}-valued field sampled at cell centers, row-major with the four
/// entries interleaved as `data[4·(cy·nx+cx) + 2·r + c]` for row r, column c.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub grid: Grid2,
    pub data: Vec<f64>,
}

impl VectorField {
    pub fn zeros(grid: Grid2) -> Self {
        VectorField { grid, data: vec![0.0; 2 * grid.n_nodes()] }
    }

    /// Sample `f(x, y) -> [f64; 2]` at every node, rejecting non-finite
    /// values with their location.
    pub fn sample<F: Fn(f64, f64) -> [f64; 2]>(grid: Grid2, f: F) -> Result<Self> {
        let mut out = Self::zeros(grid);
        for j in 0..=grid.ny {
            for i in 0..=grid.nx {
                let v = f(grid.node_x(i), grid.node_y(j));
                if !v[0].is_finite() || !v[1].is_finite() {
                    return Err(Error::NonFinite { what: "vector sample", i, j });
                }
                let idx = 2 * grid.node_index(i, j);
                out.data[idx] = v[0];
                out.data[idx + 1] = v[1];
            }
        }
        Ok(out)
    }

    /// Like [`VectorField::sample`], but a node that coincides with the
    /// origin is evaluated half a cell away, at (hx/2, hy/2). Ansatz
    /// functions with a point singularity at the origin stay finite this way.
    pub fn sample_offset_origin<F: Fn(f64, f64) -> [f64; 2]>(grid: Grid2, f: F) -> Result<Self> {
        Self::sample(grid, |x, y| {
            let (xo, yo) = offset_origin(grid, x, y);
            f(xo, yo)
        })
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> [f64; 2] {
        let idx = 2 * self.grid.node_index(i, j);
        [self.data[idx], self.data[idx + 1]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: [f64; 2]) {
        let idx = 2 * self.grid.node_index(i, j);
        self.data[idx] = v[0];
        self.data[idx + 1] = v[1];
    }

    /// Bilinear interpolation of the nodal values at an arbitrary point of
    /// the domain (clamped to the grid extents).
    pub fn interp(&self, x: f64, y: f64) -> [f64; 2] {
        let g = &self.grid;
        let (i0, tx) = locate(x, g.x_min, g.hx, g.nx);
        let (j0, ty) = locate(y, g.y_min, g.hy, g.ny);
        let mut out = [0.0; 2];
        for c in 0..2 {
            let v00 = self.data[2 * g.node_index(i0, j0) + c];
            let v10 = self.data[2 * g.node_index(i0 + 1, j0) + c];
            let v01 = self.data[2 * g.node_index(i0, j0 + 1) + c];
            let v11 = self.data[2 * g.node_index(i0 + 1, j0 + 1) + c];
            out[c] = (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl TensorField {
    pub fn zeros(grid: Grid2) -> Self {
        TensorField { grid, data: vec![0.0; 4 * grid.n_cells()] }
    }

    /// Sample `f(x, y) -> [[f64; 2]; 2]` (rows × columns) at cell centers.
    pub fn sample<F: Fn(f64, f64) -> [[f64; 2]; 2]>(grid: Grid2, f: F) -> Result<Self> {
        let mut out = Self::zeros(grid);
        for cy in 0..grid.ny {
            for cx in 0..grid.nx {
                let m = f(grid.cell_x(cx), grid.cell_y(cy));
                let idx = 4 * grid.cell_index(cx, cy);
                for r in 0..2 {
                    for c in 0..2 {
                        let v = m[r][c];
                        if !v.is_finite() {
                            return Err(Error::NonFinite { what: "tensor sample", i: cx, j: cy });
                        }
                        out.data[idx + 2 * r + c] = v;
                    }
                }
            }
        }
        Ok(out)
    }

    #[inline]
    pub fn get(&self, cx: usize, cy: usize) -> [[f64; 2]; 2] {
        let idx = 4 * self.grid.cell_index(cx, cy);
        [
            [self.data[idx], self.data[idx + 1]],
            [self.data[idx + 2], self.data[idx + 3]],
        ]
    }

    #[inline]
    pub fn set(&mut self, cx: usize, cy: usize, m: [[f64; 2]; 2]) {
        let idx = 4 * self.grid.cell_index(cx, cy);
        self.data[idx] = m[0][0];
        self.data[idx + 1] = m[0][1];
        self.data[idx + 2] = m[1][0];
        self.data[idx + 3] = m[1][1];
    }

    /// Bilinear interpolation on the cell-center lattice (constant
    /// extrapolation in the half-cell fringe next to the boundary).
    pub fn interp(&self, x: f64, y: f64) -> [[f64; 2]; 2] {
        let g = &self.grid;
        let (cx0, tx) = locate(x, g.x_min + 0.5 * g.hx, g.hx, g.nx.saturating_sub(1).max(1));
        let (cy0, ty) = locate(y, g.y_min + 0.5 * g.hy, g.hy, g.ny.saturating_sub(1).max(1));
        let cx1 = (cx0 + 1).min(g.nx - 1);
        let cy1 = (cy0 + 1).min(g.ny - 1);
        let cx0 = cx0.min(g.nx - 1);
        let cy0 = cy0.min(g.ny - 1);
        let mut out = [[0.0; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                let k = 2 * r + c;
                let v00 = self.data[4 * g.cell_index(cx0, cy0) + k];
                let v10 = self.data[4 * g.cell_index(cx1, cy0) + k];
                let v01 = self.data[4 * g.cell_index(cx0, cy1) + k];
                let v11 = self.data[4 * g.cell_index(cx1, cy1) + k];
                out[r][c] =
                    (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11);
            }
        }
        out
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Frobenius norm of a 2×2 matrix.
#[inline]
pub fn frob(m: &[[f64; 2]; 2]) -> f64 {
    (m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1]).sqrt()
}

/// Nudge an exact-origin sample half a cell off the singularity.
#[inline]
pub fn offset_origin(grid: Grid2, x: f64, y: f64) -> (f64, f64) {
    let tol = 1e-14 * (grid.hx + grid.hy);
    if x.abs() <= tol && y.abs() <= tol {
        (0.5 * grid.hx, 0.5 * grid.hy)
    } else {
        (x, y)
    }
}

/// Polar angle in [0, 2π) with the branch cut along the positive x-axis.
#[inline]
pub fn polar_angle(x: f64, y: f64) -> f64 {
    let a = y.atan2(x);
    if a < 0.0 {
        a + 2.0 * std::f64::consts::PI
    } else {
        a
    }
}

fn locate(p: f64, origin: f64, h: f64, n: usize) -> (usize, f64) {
    let s = (p - origin) / h;
    let mut i = s.floor() as isize;
    if i < 0 {
        i = 0;
    }
    if i as usize >= n {
        i = n as isize - 1;
    }
    let t = (s - i as f64).clamp(0.0, 1.0);
    (i as usize, t)
}
