//! Two-sided certified brackets for the quasiconvex envelope of the radial
//! well density W(|·|) on 2×2 matrices.
//!
//! Lower bound: the 1D convex envelope of the even extension of the profile,
//! evaluated at |p| (the envelope dominates it for every matrix argument).
//!
//! Upper bound: rank-one lamination. Inside the closed ball of radius 2 a
//! single lamination step writes p as a convex combination of two matrices on
//! the sphere 2S where W vanishes, so the bound is exactly 0. Outside the
//! ball the bound is a depth-limited recursion on a radial table: chords from
//! p along rank-one directions are parameterized by the inner product
//! s = ⟨p, a⊗b⟩, and restricting s to [0, |p|/√2] keeps every grid value
//! admissible for every orientation (the top singular value of any 2×2
//! matrix is at least |p|/√2), which makes the bound a function of |p| alone
//! and valid for all matrices of that norm. Off-grid radii are evaluated by
//! rounding up plus a Lipschitz slack, so the certification survives the
//! discretization.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::field::frob;
use crate::potential::WellPotential;

/// Bracket [lower, upper] for the envelope value at a matrix of norm
/// `argument_norm`, with 0 ≤ lower ≤ upper ≤ W(argument_norm).
#[derive(Clone, Copy, Debug)]
pub struct EnvelopeBracket {
    pub lower: f64,
    pub upper: f64,
    pub argument_norm: f64,
}

impl EnvelopeBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// One rank-one lamination step: p ± λ±(a⊗b) both on the sphere of radius 2,
/// recombining to p with weight t.
#[derive(Clone, Copy, Debug)]
pub struct LaminationStep {
    pub lam_plus: f64,
    pub lam_minus: f64,
    pub t: f64,
    pub value: f64,
    /// |t·p₊ + (1−t)·p₋ − p| in Frobenius norm.
    pub recombination_residual: f64,
    /// max deviation of |p±| from 2.
    pub sphere_residual: f64,
}

/// Solve |p ± λ(a⊗b)| = 2 for positive roots and combine the well values at
/// the two sphere points. Returns `None` when no positive pair of roots
/// exists, which only happens outside the guaranteed ball |p| > 2.
pub fn lamination_step(
    p: &[[f64; 2]; 2],
    a: [f64; 2],
    b: [f64; 2],
    w: &WellPotential,
) -> Option<LaminationStep> {
    let d = [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
    let dn = frob(&d);
    debug_assert!((dn - 1.0).abs() < 1e-12, "direction must be a unit rank-one matrix");
    let s = p[0][0] * d[0][0] + p[0][1] * d[0][1] + p[1][0] * d[1][0] + p[1][1] * d[1][1];
    let r2 = p[0][0] * p[0][0] + p[0][1] * p[0][1] + p[1][0] * p[1][0] + p[1][1] * p[1][1];
    let disc = s * s + 4.0 - r2;
    if disc < 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let lam_plus = -s + root;
    let lam_minus = s + root;
    if lam_plus < 0.0 || lam_minus < 0.0 {
        return None;
    }
    let denom = lam_plus + lam_minus;
    let t = if denom > 0.0 { lam_minus / denom } else { 0.5 };

    let mut p_plus = *p;
    let mut p_minus = *p;
    let mut recomb = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            p_plus[r][c] += lam_plus * d[r][c];
            p_minus[r][c] -= lam_minus * d[r][c];
            let back = t * p_plus[r][c] + (1.0 - t) * p_minus[r][c] - p[r][c];
            recomb += back * back;
        }
    }
    let np = frob(&p_plus);
    let nm = frob(&p_minus);
    let value = t * w.value(np) + (1.0 - t) * w.value(nm);
    Some(LaminationStep {
        lam_plus,
        lam_minus,
        t,
        value,
        recombination_residual: recomb.sqrt(),
        sphere_residual: (np - 2.0).abs().max((nm - 2.0).abs()),
    })
}

/// Piecewise-linear lower convex envelope of the even extension of the well
/// profile, restricted to r ≥ 0. The samples include the wells 0 and ±2
/// exactly, so the envelope is identically zero on [0, 2].
#[derive(Clone, Debug)]
pub struct ConvexProfile {
    pub r_max: f64,
    /// Sampling step used; the envelope is accurate to O(Lip·step).
    pub step: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

pub fn convex_envelope_profile(w: &WellPotential, r_max: f64, n: usize) -> ConvexProfile {
    assert!(n >= 64, "need at least 64 samples");
    assert!(r_max >= 4.0, "need r_max ≥ 4");
    let step = r_max / n as f64;
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(2 * n + 4);
    for i in 0..=(2 * n) {
        let r = -r_max + i as f64 * step;
        pts.push((r, w.value(r.abs())));
    }
    for r in [-2.0, 0.0, 2.0] {
        pts.push((r, w.value(r.abs())));
    }
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);

    // lower hull, monotone chain
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for &(x, y) in &pts {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((x, y));
    }
    let xs = hull.iter().map(|p| p.0).collect();
    let ys = hull.iter().map(|p| p.1).collect();
    ConvexProfile { r_max, step, xs, ys }
}

impl ConvexProfile {
    /// Envelope value at radius r ≥ 0 (clamped to the table range).
    pub fn value(&self, r: f64) -> f64 {
        let r = r.clamp(0.0, self.r_max);
        let idx = match self.xs.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
            Ok(i) => return self.ys[i],
            Err(i) => i,
        };
        if idx == 0 {
            return self.ys[0];
        }
        if idx >= self.xs.len() {
            return *self.ys.last().unwrap();
        }
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (y0, y1) = (self.ys[idx - 1], self.ys[idx]);
        y0 + (y1 - y0) * (r - x0) / (x1 - x0)
    }

    pub fn is_nondecreasing_beyond_outer_well(&self) -> bool {
        let mut prev = f64::NEG_INFINITY;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            if *x >= 2.0 - 1e-12 {
                if *y < prev - 1e-12 {
                    return false;
                }
                prev = *y;
            }
        }
        true
    }
}

/// Number of inner-product classes in the lamination direction grid.
const N_DIRECTIONS: usize = 16;
const N_OUTWARD_STEPS: usize = 48;

/// Radial envelope bracket oracle: a lamination upper-bound table together
/// with the convex-profile lower bound.
#[derive(Clone, Debug)]
pub struct QwEnvelope {
    pub well: WellPotential,
    pub depth: usize,
    pub r_max: f64,
    dr: f64,
    /// Lipschitz bound of the profile on [0, r_max].
    lip: f64,
    table: Vec<f64>,
    hull: ConvexProfile,
}

impl QwEnvelope {
    pub fn build(well: WellPotential, depth: usize, r_max: f64, n_r: usize) -> Self {
        assert!(depth >= 1);
        assert!(r_max > 2.0 && n_r >= 256);
        let dr = r_max / n_r as f64;
        let lip = (0..=4 * n_r)
            .map(|i| well.derivative(i as f64 * dr / 4.0).abs())
            .fold(0.0, f64::max);

        // level 0: the profile itself
        let mut table: Vec<f64> = (0..=n_r).map(|i| well.value(i as f64 * dr)).collect();
        for _ in 0..depth {
            table = lamination_level(&table, dr, lip, r_max);
        }
        let hull = convex_envelope_profile(&well, r_max, n_r.max(4096));
        QwEnvelope { well, depth, r_max, dr, lip, table, hull }
    }

    /// Default oracle for the given potential (depth 3, radius 9).
    pub fn with_default_resolution(well: WellPotential) -> Self {
        Self::build(well, 3, 9.0, 9216)
    }

    /// Certified upper bound as a function of the Frobenius norm alone.
    pub fn upper_radial(&self, r: f64) -> f64 {
        if r <= 2.0 {
            return 0.0;
        }
        let direct = self.well.value(r);
        let i = ((r / self.dr).ceil() as usize).min(self.table.len() - 1);
        direct.min(self.table[i] + self.lip * self.dr)
    }

    /// Slope of the upper bound in the radial direction (piecewise constant,
    /// zero inside the vanishing ball). Used by descent on the relaxed energy.
    pub fn upper_radial_slope(&self, r: f64) -> f64 {
        if r <= 2.0 {
            return 0.0;
        }
        let h = self.dr;
        (self.upper_radial(r + 0.5 * h) - self.upper_radial((r - 0.5 * h).max(2.0))) / h
    }

    /// Conservative convex-envelope lower bound (sampling slack subtracted).
    pub fn lower_radial(&self, r: f64) -> f64 {
        (self.hull.value(r) - self.lip * self.hull.step).max(0.0)
    }

    pub fn bracket_radial(&self, r: f64) -> EnvelopeBracket {
        EnvelopeBracket { lower: self.lower_radial(r), upper: self.upper_radial(r), argument_norm: r }
    }

    pub fn bracket(&self, p: &[[f64; 2]; 2]) -> EnvelopeBracket {
        self.bracket_radial(frob(p))
    }

    /// Upper-bound value at a matrix argument (the working value of the
    /// envelope used by the relaxed energy).
    pub fn upper(&self, p: &[[f64; 2]; 2]) -> f64 {
        self.upper_radial(frob(p))
    }
}

/// One recursion level of the radial lamination table.
fn lamination_level(prev: &[f64], dr: f64, lip: f64, r_max: f64) -> Vec<f64> {
    let n = prev.len() - 1;
    let eval_prev = |rho: f64| -> f64 {
        if rho <= 2.0 {
            return 0.0;
        }
        let i = ((rho / dr).ceil() as usize).min(n);
        prev[i] + lip * dr
    };
    let mut out = vec![0.0; n + 1];
    for (i, slot) in out.iter_mut().enumerate() {
        let r = i as f64 * dr;
        if r <= 2.0 {
            continue;
        }
        let mut best = prev[i];
        let s_hi = r / std::f64::consts::SQRT_2;
        let s_lo = (r * r - 4.0).max(0.0).sqrt();
        if s_lo <= s_hi {
            for js in 0..N_DIRECTIONS {
                let s = s_lo + (s_hi - s_lo) * js as f64 / (N_DIRECTIONS - 1) as f64;
                let disc = s * s - (r * r - 4.0);
                if disc < 0.0 {
                    continue;
                }
                // first crossing of the sphere of radius 2 along the inward ray
                let v = s - disc.sqrt();
                if v <= 0.0 {
                    continue;
                }
                for ju in 0..N_OUTWARD_STEPS {
                    let frac = (ju + 1) as f64 / N_OUTWARD_STEPS as f64;
                    let u = dr + (2.0 * r_max) * frac * frac;
                    let rho_plus = (r * r + 2.0 * u * s + u * u).sqrt();
                    if rho_plus > r_max {
                        break;
                    }
                    let val = v * eval_prev(rho_plus) / (u + v);
                    if val < best {
                        best = val;
                    }
                }
            }
        }
        *slot = best;
    }
    out
}

type CacheKey = (u8, usize);
static DEFAULT_CACHE: OnceLock<Mutex<HashMap<CacheKey, Arc<QwEnvelope>>>> = OnceLock::new();

/// Shared oracle for the built-in potentials (custom profiles build fresh).
/// Concurrent callers receive the same table.
pub fn shared_envelope(well: WellPotential, depth: usize) -> Arc<QwEnvelope> {
    let key = match well {
        WellPotential::Rational => Some((0u8, depth)),
        WellPotential::PiecewiseQuadratic => Some((1u8, depth)),
        WellPotential::Custom { .. } => None,
    };
    match key {
        Some(k) => {
            let cache = DEFAULT_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
            let mut guard = cache.lock().unwrap();
            guard
                .entry(k)
                .or_insert_with(|| Arc::new(QwEnvelope::build(well, depth, 9.0, 9216)))
                .clone()
        }
        None => Arc::new(QwEnvelope::build(well, depth, 9.0, 9216)),
    }
}

/// Bracket for Q(W(|·|)) at a 2×2 matrix argument.
pub fn qw_bracket(p: &[[f64; 2]; 2], well: WellPotential, depth: usize) -> EnvelopeBracket {
    shared_envelope(well, depth).bracket(p)
}
