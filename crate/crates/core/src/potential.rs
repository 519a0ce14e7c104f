//! Double-well potentials on [0, ∞) with wells at 0 and 2.

/// Nonconvex double-well profile with zeros exactly at 0 and 2 and quadratic
/// growth at infinity.
///
/// The default profile is `W(x) = x²(x−2)² / (1 + x²)`, which is smooth, has
/// `W'(0) = W'(2) = 0`, and satisfies `x²/C − C ≤ W(x) ≤ C(1 + x²)` with
/// C = 10 on all of [0, ∞). A piecewise-quadratic alternative is provided so
/// results can be checked against a different well shape between the wells.
#[derive(Clone, Copy, Debug, Default)]
pub enum WellPotential {
    /// x²(x−2)²/(1+x²)
    #[default]
    Rational,
    /// min(x², (x−2)²); kink at x = 1.
    PiecewiseQuadratic,
    /// User-supplied profile and derivative.
    Custom {
        value: fn(f64) -> f64,
        derivative: fn(f64) -> f64,
    },
}

/// Location of the nonzero well.
pub const WELL_OUTER: f64 = 2.0;

impl WellPotential {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            WellPotential::Rational => {
                let d = x - 2.0;
                x * x * d * d / (1.0 + x * x)
            }
            WellPotential::PiecewiseQuadratic => {
                let a = x * x;
                let d = (x - 2.0) * (x - 2.0);
                a.min(d)
            }
            WellPotential::Custom { value, .. } => value(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            WellPotential::Rational => {
                // d/dx [x²(x−2)²/(1+x²)] = 2x(x−2)(x³+2x−2)/(1+x²)²
                let q = 1.0 + x * x;
                2.0 * x * (x - 2.0) * (x * x * x + 2.0 * x - 2.0) / (q * q)
            }
            WellPotential::PiecewiseQuadratic => {
                if x < 1.0 {
                    2.0 * x
                } else {
                    2.0 * (x - 2.0)
                }
            }
            WellPotential::Custom { derivative, .. } => derivative(x),
        }
    }

    pub fn well_outer(&self) -> f64 {
        WELL_OUTER
    }

    pub fn name(&self) -> &'static str {
        match self {
            WellPotential::Rational => "rational",
            WellPotential::PiecewiseQuadratic => "piecewise-quadratic",
            WellPotential::Custom { .. } => "custom",
        }
    }
}

/// The default concrete well profile.
pub fn make_default_potential() -> WellPotential {
    WellPotential::Rational
}
