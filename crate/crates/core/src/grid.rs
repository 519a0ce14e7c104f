//! Uniform rectangular grids.

use crate::error::{Error, Result};

/// Uniform rectangular grid with `nx × ny` cells over
/// `[x_min, x_max] × [y_min, y_max]`.
///
/// Staggering convention used throughout the crate: director-like vector
/// fields live on the `(nx+1)(ny+1)` nodes, distortion-like tensor fields on
/// the `nx·ny` cell centers, and node-valued derived quantities (curl,
/// divergence) carry meaningful values on interior nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub hx: f64,
    pub hy: f64,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::Grid(format!("cell counts must be positive, got {nx}×{ny}")));
        }
        let hx = (x_max - x_min) / nx as f64;
        let hy = (y_max - y_min) / ny as f64;
        if !hx.is_finite() || !hy.is_finite() || hx <= 0.0 || hy <= 0.0 {
            return Err(Error::Grid(format!(
                "degenerate extents [{x_min}, {x_max}] × [{y_min}, {y_max}]"
            )));
        }
        Ok(Grid2 { nx, ny, x_min, x_max, y_min, y_max, hx, hy })
    }

    /// Grid over the reference domain (-1, 1)².
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, -1.0, 1.0, -1.0, 1.0)
    }

    /// Grid over (-1, 1)² with independent cell counts.
    pub fn domain(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, -1.0, 1.0, -1.0, 1.0)
    }

    #[inline]
    pub fn node_x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.hx
    }

    #[inline]
    pub fn node_y(&self, j: usize) -> f64 {
        self.y_min + j as f64 * self.hy
    }

    #[inline]
    pub fn cell_x(&self, cx: usize) -> f64 {
        self.x_min + (cx as f64 + 0.5) * self.hx
    }

    #[inline]
    pub fn cell_y(&self, cy: usize) -> f64 {
        self.y_min + (cy as f64 + 0.5) * self.hy
    }

    #[inline]
    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    #[inline]
    pub fn cell_index(&self, cx: usize, cy: usize) -> usize {
        cy * self.nx + cx
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx * self.hy
    }

    #[inline]
    pub fn is_interior_node(&self, i: usize, j: usize) -> bool {
        i > 0 && i < self.nx && j > 0 && j < self.ny
    }

    /// Fraction of a full cell neighborhood adjacent to node (i, j):
    /// 1 interior, 1/2 on edges, 1/4 at corners. Used when node densities
    /// are averaged onto cells for the midpoint quadrature.
    #[inline]
    pub fn node_cell_fraction(&self, i: usize, j: usize) -> f64 {
        let fx = if i == 0 || i == self.nx { 0.5 } else { 1.0 };
        let fy = if j == 0 || j == self.ny { 0.5 } else { 1.0 };
        fx * fy
    }

    pub fn same_layout(&self, other: &Grid2) -> bool {
        self == other
    }

    pub fn check_same(&self, other: &Grid2, what: &str) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::Grid(format!(
                "{what}: grid mismatch ({}×{} on [{}, {}]×[{}, {}] vs {}×{} on [{}, {}]×[{}, {}])",
                self.nx, self.ny, self.x_min, self.x_max, self.y_min, self.y_max,
                other.nx, other.ny, other.x_min, other.x_max, other.y_min, other.y_max
            )))
        }
    }
}
