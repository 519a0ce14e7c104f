//! Layer geometry: the thin rectangle supporting the singular distortion.

use crate::error::{Error, Result};
use crate::grid::Grid2;

/// Minimum number of cell rows across the layer height required for the
/// layer terms to be meaningful.
pub const MIN_LAYER_ROWS: f64 = 4.0;

/// The support rectangle `(-ξ, 1) × (-εξ/2, εξ/2)` of the distortion field
/// inside the reference domain (-1, 1)².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerGeometry {
    pub eps: f64,
    pub xi: f64,
}

impl LayerGeometry {
    pub fn new(eps: f64, xi: f64) -> Result<Self> {
        if !eps.is_finite() || !xi.is_finite() || eps <= 0.0 || xi <= 0.0 {
            return Err(Error::Layer(format!("eps and xi must be positive, got ({eps}, {xi})")));
        }
        if xi >= 1.0 || eps * xi >= 2.0 {
            return Err(Error::Layer(format!(
                "layer (-{xi}, 1) × (±{}) exceeds the domain (-1,1)²; need xi < 1 and eps*xi < 2",
                0.5 * eps * xi
            )));
        }
        Ok(LayerGeometry { eps, xi })
    }

    /// Extent as (x_lo, x_hi, y_lo, y_hi).
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        let h = 0.5 * self.eps * self.xi;
        (-self.xi, 1.0, -h, h)
    }

    pub fn half_height(&self) -> f64 {
        0.5 * self.eps * self.xi
    }

    /// Half-open membership test used for cell centers:
    /// a point belongs to the layer iff it lies in [-ξ, 1) × [-εξ/2, εξ/2).
    #[inline]
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let h = self.half_height();
        x >= -self.xi && x < 1.0 && y >= -h && y < h
    }

    /// Require at least [`MIN_LAYER_ROWS`] cell rows across the layer height.
    pub fn require_resolved(&self, grid: &Grid2) -> Result<()> {
        let rows = self.eps * self.xi / grid.hy;
        if rows + 1e-12 < MIN_LAYER_ROWS {
            return Err(Error::Layer(format!(
                "layer height {:.6} spans only {:.2} cell rows (hy = {:.6}); need at least {}",
                self.eps * self.xi,
                rows,
                grid.hy,
                MIN_LAYER_ROWS
            )));
        }
        Ok(())
    }

    /// 0/1 indicator over cell centers.
    pub fn cell_mask(&self, grid: &Grid2) -> Result<Vec<f64>> {
        let (_, x_hi, _, _) = self.extent();
        if x_hi > grid.x_max + 1e-15
            || -self.xi < grid.x_min - 1e-15
            || self.half_height() > grid.y_max + 1e-15
        {
            return Err(Error::Layer("layer exceeds the grid extents".into()));
        }
        let mut mask = vec![0.0; grid.n_cells()];
        for cy in 0..grid.ny {
            for cx in 0..grid.nx {
                if self.contains(grid.cell_x(cx), grid.cell_y(cy)) {
                    mask[grid.cell_index(cx, cy)] = 1.0;
                }
            }
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership() {
        let geom = LayerGeometry::new(1.0, 0.5).unwrap();
        assert!(geom.contains(0.0, 0.0));
        assert!(!geom.contains(-0.9, 0.0));
        assert!(!geom.contains(0.0, 0.3));
    }

    #[test]
    fn rejects_oversized_layer() {
        assert!(LayerGeometry::new(1.0, 1.0).is_err());
        assert!(LayerGeometry::new(4.0, 0.6).is_err());
        assert!(LayerGeometry::new(-1.0, 0.5).is_err());
    }

    #[test]
    fn mask_area_matches_analytic_area() {
        let g = Grid2::square(64).unwrap();
        let geom = LayerGeometry::new(1.0, 0.5).unwrap();
        let mask = geom.cell_mask(&g).unwrap();
        let area: f64 = mask.iter().sum::<f64>() * g.cell_area();
        let exact = (1.0 + geom.xi) * geom.eps * geom.xi;
        // One cell row of area across the layer length.
        assert!((area - exact).abs() <= (1.0 + geom.xi) * g.hy, "{area} vs {exact}");
    }

    #[test]
    fn mask_idempotent_and_monotone_in_eps() {
        let g = Grid2::square(32).unwrap();
        let lo = LayerGeometry::new(0.5, 0.5).unwrap();
        let hi = LayerGeometry::new(1.0, 0.5).unwrap();
        let m1 = lo.cell_mask(&g).unwrap();
        let m2 = lo.cell_mask(&g).unwrap();
        assert_eq!(m1, m2);
        let big = hi.cell_mask(&g).unwrap();
        assert!(m1.iter().zip(big.iter()).all(|(a, b)| a <= b));
    }

    #[test]
    fn resolution_requirement() {
        let g = Grid2::square(32).unwrap();
        assert!(LayerGeometry::new(1.0, 0.5).unwrap().require_resolved(&g).is_ok());
        assert!(LayerGeometry::new(0.25, 0.25).unwrap().require_resolved(&g).is_err());
    }
}
