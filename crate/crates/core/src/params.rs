//! Model parameters shared by the energy, minimizer, and diagnostics.

use crate::error::{Error, Result};
use crate::layer::LayerGeometry;
use crate::potential::WellPotential;

/// Smoothing floor used inside gradient formulas only: norms are evaluated
/// as sqrt(|v|² + δ²) so the densities stay differentiable at v = 0.
/// Energies always use the exact norm.
pub const NORM_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug)]
pub struct Tolerances {
    /// Relative residual target for the Neumann-Poisson conjugate gradient.
    pub cg_tol: f64,
    /// Tolerance for the Helmholtz-form energy identity check.
    pub identity_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { cg_tol: 1e-11, identity_tol: 1e-8 }
    }
}

/// Scales, potential, and optional penalty terms of the model energy.
#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub eps: f64,
    pub xi: f64,
    pub potential: WellPotential,
    /// Weight μ of the quadratic charge penalty used by the minimizer.
    pub charge_penalty_weight: f64,
    /// Optional small-order divergence penalty ε³|div B|², off by default.
    pub div_penalty: bool,
    pub tolerances: Tolerances,
}

impl ModelParams {
    pub fn new(eps: f64, xi: f64) -> Result<Self> {
        if !eps.is_finite() || !xi.is_finite() || eps <= 0.0 || xi <= 0.0 {
            return Err(Error::Param(format!("eps and xi must be positive, got ({eps}, {xi})")));
        }
        Ok(ModelParams {
            eps,
            xi,
            potential: WellPotential::default(),
            charge_penalty_weight: 0.0,
            div_penalty: false,
            tolerances: Tolerances::default(),
        })
    }

    pub fn with_potential(mut self, potential: WellPotential) -> Self {
        self.potential = potential;
        self
    }

    pub fn with_charge_penalty(mut self, mu: f64) -> Self {
        self.charge_penalty_weight = mu;
        self
    }

    pub fn layer(&self) -> Result<LayerGeometry> {
        LayerGeometry::new(self.eps, self.xi)
    }

    pub fn validate(&self) -> Result<()> {
        if self.charge_penalty_weight < 0.0 {
            return Err(Error::Param("charge penalty weight must be nonnegative".into()));
        }
        Ok(())
    }
}
