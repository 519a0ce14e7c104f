//! Assembly of the disclination energy, its relaxation, the Helmholtz-form
//! functional, and exact gradients of the discrete quadrature sum.
//!
//! Quadrature is the midpoint rule at cell centers. Densities that live on
//! nodes ((|k|−1)² and |curl·|²) are averaged onto each cell with equal
//! corner weights, which keeps every term a smooth function of the degrees of
//! freedom and the gradients exact.

use crate::diffops::{
    curl_adjoint, curl_rowwise, div_rowwise, grad, grad_adjoint, integral_curl, scaled_curl,
    scaled_grad,
};
use crate::envelope::QwEnvelope;
use crate::error::{Error, Result};
use crate::field::{frob, TensorField, VectorField};

use crate::helmholtz::{helmholtz, HelmholtzResult};
use crate::params::{ModelParams, NORM_FLOOR};

/// Itemized energy values. `total` is the sum of the four densities plus the
/// optional divergence penalty; `bulk + layer = total` with the split taken
/// cell-by-cell over the layer mask.
#[derive(Clone, Copy, Debug, Default)]
pub struct EnergyReport {
    pub unit_penalty: f64,
    pub elastic: f64,
    pub curl_term: f64,
    pub well_term: f64,
    pub div_penalty: f64,
    pub total: f64,
    pub bulk: f64,
    pub layer: f64,
    /// | |∫ curl B| − 2 |, the defect-charge constraint residual.
    pub charge_residual: f64,
    pub relaxed_well_term: Option<f64>,
}

impl EnergyReport {
    pub fn csv_header() -> &'static str {
        "unit_penalty,elastic,curl_term,well_term,div_penalty,total,bulk,layer,charge_residual,relaxed_well_term"
    }

    pub fn csv_row(&self) -> String {
        let relaxed = match self.relaxed_well_term {
            Some(v) => format!("{v:.12e}"),
            None => String::new(),
        };
        format!(
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{}",
            self.unit_penalty,
            self.elastic,
            self.curl_term,
            self.well_term,
            self.div_penalty,
            self.total,
            self.bulk,
            self.layer,
            self.charge_residual,
            relaxed
        )
    }
}

/// Which well density enters the energy: the bare potential W(εξ|B|) or the
/// envelope working value (the certified upper bound, ≤ W pointwise).
#[derive(Clone, Copy)]
pub enum WellModel<'a> {
    Bare,
    Relaxed(&'a QwEnvelope),
}

impl WellModel<'_> {
    fn value(&self, params: &ModelParams, scaled_norm: f64) -> f64 {
        match self {
            WellModel::Bare => params.potential.value(scaled_norm),
            WellModel::Relaxed(env) => env.upper_radial(scaled_norm),
        }
    }

    fn slope(&self, params: &ModelParams, scaled_norm: f64) -> f64 {
        match self {
            WellModel::Bare => params.potential.derivative(scaled_norm),
            WellModel::Relaxed(env) => env.upper_radial_slope(scaled_norm),
        }
    }
}

/// E[k, B] with the bare well.
pub fn energy(k: &VectorField, b: &TensorField, params: &ModelParams) -> Result<EnergyReport> {
    energy_with(k, b, params, WellModel::Bare)
}

/// Relaxed energy: the well density is replaced by the envelope oracle value
/// at εξB. Records the relaxed well term.
pub fn relaxed_energy(
    k: &VectorField,
    b: &TensorField,
    params: &ModelParams,
    qw: &QwEnvelope,
) -> Result<EnergyReport> {
    let mut rep = energy_with(k, b, params, WellModel::Relaxed(qw))?;
    rep.relaxed_well_term = Some(rep.well_term);
    Ok(rep)
}

pub fn energy_with(
    k: &VectorField,
    b: &TensorField,
    params: &ModelParams,
    well: WellModel<'_>,
) -> Result<EnergyReport> {
    k.grid.check_same(&b.grid, "energy")?;
    params.validate()?;
    let g = k.grid;
    let exz = params.eps * params.xi * params.xi;
    let sxi = params.eps * params.xi;

    let gk = grad(k);
    let cb = curl_rowwise(b);
    let db = if params.div_penalty { Some(div_rowwise(b)) } else { None };
    // The split is reported when the layer geometry fits the grid domain;
    // otherwise everything is bulk (e.g. at the ε = ξ = 1 normalization the
    // support constraint is not in play).
    let mask = params.layer().and_then(|geom| geom.cell_mask(&g)).ok();

    let nodes_w = g.nx + 1;
    let mut unit_density = vec![0.0; g.n_nodes()];
    let mut curl_density = vec![0.0; g.n_nodes()];
    let mut div_density = vec![0.0; g.n_nodes()];
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let n = j * nodes_w + i;
            let kv = [k.data[2 * n], k.data[2 * n + 1]];
            let d = (kv[0] * kv[0] + kv[1] * kv[1]).sqrt() - 1.0;
            unit_density[n] = d * d;
            let cv = [cb.data[2 * n], cb.data[2 * n + 1]];
            curl_density[n] = cv[0] * cv[0] + cv[1] * cv[1];
            if let Some(dv) = &db {
                let w = [dv.data[2 * n], dv.data[2 * n + 1]];
                div_density[n] = w[0] * w[0] + w[1] * w[1];
            }
        }
    }

    let area = g.cell_area();
    let eps3 = params.eps.powi(3);
    let mut rep = EnergyReport::default();
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let n00 = cy * nodes_w + cx;
            let n10 = n00 + 1;
            let n01 = n00 + nodes_w;
            let n11 = n01 + 1;
            let avg4 =
                |d: &[f64]| 0.25 * (d[n00] + d[n10] + d[n01] + d[n11]);

            let unit_c = avg4(&unit_density) / exz;
            let m = b.get(cx, cy);
            let gm = gk.get(cx, cy);
            let mut el = 0.0;
            for r in 0..2 {
                for c in 0..2 {
                    let d = gm[r][c] - m[r][c];
                    el += d * d;
                }
            }
            let curl_c = exz * avg4(&curl_density);
            let well_c = well.value(params, sxi * frob(&m)) / exz;
            let div_c = if db.is_some() { eps3 * avg4(&div_density) } else { 0.0 };

            for (val, what) in [
                (unit_c, "unit penalty density"),
                (el, "elastic density"),
                (curl_c, "curl density"),
                (well_c, "well density"),
                (div_c, "divergence penalty density"),
            ] {
                if !val.is_finite() {
                    return Err(Error::NonFinite { what, i: cx, j: cy });
                }
            }

            rep.unit_penalty += area * unit_c;
            rep.elastic += area * el;
            rep.curl_term += area * curl_c;
            rep.well_term += area * well_c;
            rep.div_penalty += area * div_c;
            let cell_total = area * (unit_c + el + curl_c + well_c + div_c);
            let in_layer = mask
                .as_ref()
                .map(|m| m[g.cell_index(cx, cy)] > 0.5)
                .unwrap_or(false);
            if in_layer {
                rep.layer += cell_total;
            } else {
                rep.bulk += cell_total;
            }
        }
    }
    rep.total = rep.unit_penalty + rep.elastic + rep.curl_term + rep.well_term + rep.div_penalty;
    let q = integral_curl(b);
    rep.charge_residual = ((q[0] * q[0] + q[1] * q[1]).sqrt() - 2.0).abs();
    Ok(rep)
}

/// Exact gradient (dE/dk, dE/dB) of the discrete energy sum. Norms inside the
/// derivative formulas use the smoothing floor [`NORM_FLOOR`]; energies use
/// the exact norm.
pub fn energy_gradient(
    k: &VectorField,
    b: &TensorField,
    params: &ModelParams,
) -> Result<(VectorField, TensorField)> {
    energy_gradient_with(k, b, params, WellModel::Bare)
}

pub fn energy_gradient_with(
    k: &VectorField,
    b: &TensorField,
    params: &ModelParams,
    well: WellModel<'_>,
) -> Result<(VectorField, TensorField)> {
    k.grid.check_same(&b.grid, "energy_gradient")?;
    let g = k.grid;
    let exz = params.eps * params.xi * params.xi;
    let sxi = params.eps * params.xi;
    let area = g.cell_area();
    let delta2 = NORM_FLOOR * NORM_FLOOR;

    let mut gk_out = VectorField::zeros(g);
    let mut gb_out = TensorField::zeros(g);

    // unit penalty, node-local
    for j in 0..=g.ny {
        for i in 0..=g.nx {
            let w = g.node_cell_fraction(i, j) * area / exz;
            let kv = k.get(i, j);
            let m = (kv[0] * kv[0] + kv[1] * kv[1] + delta2).sqrt();
            let coeff = w * 2.0 * (m - 1.0) / m;
            let idx = 2 * g.node_index(i, j);
            gk_out.data[idx] += coeff * kv[0];
            gk_out.data[idx + 1] += coeff * kv[1];
        }
    }

    // elastic: 2(∇k − B) pulled back through the gradient stencil
    let gk = grad(k);
    let mut resid = gk;
    for (rv, bv) in resid.data.iter_mut().zip(&b.data) {
        *rv -= bv;
    }
    let pulled = grad_adjoint(&resid);
    for (out, v) in gk_out.data.iter_mut().zip(&pulled.data) {
        *out += 2.0 * area * v;
    }
    for (out, rv) in gb_out.data.iter_mut().zip(&resid.data) {
        *out -= 2.0 * area * rv;
    }

    // curl term; interior node weights are all 1
    let mut cb = curl_rowwise(b);
    for v in cb.data.iter_mut() {
        *v *= 2.0 * exz * area;
    }
    let pulled = curl_adjoint(&cb);
    for (out, v) in gb_out.data.iter_mut().zip(&pulled.data) {
        *out += v;
    }

    // well term: radial derivative at εξ|B| per cell
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let idx = 4 * g.cell_index(cx, cy);
            let r2 = (0..4).map(|e| b.data[idx + e] * b.data[idx + e]).sum::<f64>();
            let rd = (r2 + delta2).sqrt();
            let coeff = area / exz * well.slope(params, sxi * rd) * sxi / rd;
            for e in 0..4 {
                gb_out.data[idx + e] += coeff * b.data[idx + e];
            }
        }
    }

    if params.div_penalty {
        let mut dv = div_rowwise(b);
        for j in 0..=g.ny {
            for i in 0..=g.nx {
                let w = g.node_cell_fraction(i, j) * area * params.eps.powi(3) * 2.0;
                let idx = 2 * g.node_index(i, j);
                dv.data[idx] *= w;
                dv.data[idx + 1] *= w;
            }
        }
        let pulled = div_adjoint(&dv);
        for (out, v) in gb_out.data.iter_mut().zip(&pulled.data) {
            *out += v;
        }
    }

    if !gk_out.all_finite() || !gb_out.all_finite() {
        return Err(Error::NonFinite { what: "energy gradient", i: 0, j: 0 });
    }
    Ok((gk_out, gb_out))
}

/// Exact transpose of [`div_rowwise`]; mirrors its clamped stencils.
fn div_adjoint(v: &VectorField) -> TensorField {
    let g = v.grid;
    let mut out = TensorField::zeros(g);
    for a in 0..=g.nx {
        let (cw, ce) = clamp_pair(a, g.nx);
        let dx = (ce - cw) as f64 * g.hx;
        for bn in 0..=g.ny {
            let (cs, cn) = clamp_pair(bn, g.ny);
            let dy = (cn - cs) as f64 * g.hy;
            let val = v.get(a, bn);
            let rows: [(usize, f64); 2] = if bn == 0 {
                [(0, 1.0), (0, 0.0)]
            } else if bn == g.ny {
                [(g.ny - 1, 1.0), (0, 0.0)]
            } else {
                [(bn - 1, 0.5), (bn, 0.5)]
            };
            let cols: [(usize, f64); 2] = if a == 0 {
                [(0, 1.0), (0, 0.0)]
            } else if a == g.nx {
                [(g.nx - 1, 1.0), (0, 0.0)]
            } else {
                [(a - 1, 0.5), (a, 0.5)]
            };
            for i in 0..2 {
                for &(cy, wr) in &rows {
                    out.data[4 * g.cell_index(ce, cy) + 2 * i] += val[i] * wr / dx;
                    out.data[4 * g.cell_index(cw, cy) + 2 * i] -= val[i] * wr / dx;
                }
                for &(cx, wc) in &cols {
                    out.data[4 * g.cell_index(cx, cn) + 2 * i + 1] += val[i] * wc / dy;
                    out.data[4 * g.cell_index(cx, cs) + 2 * i + 1] -= val[i] * wc / dy;
                }
            }
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

#[derive(Clone, Debug)]
pub struct HelmholtzForm {
    pub i_value: f64,
    pub energy_value: f64,
    /// k − z, the shifted director entering the decoupled functional.
    pub k_shift: VectorField,
    pub decomposition: HelmholtzResult,
}

/// Evaluate the decoupled functional
/// I[k̃, z, p] = ∫ (|k̃+z|−1)² + |∇k̃|² + |p|² + |curl p|² + W(|∇z + p|)
/// at k̃ = k − z with (p, z) the row-wise Helmholtz decomposition of B, and
/// verify it reproduces the energy at ε = ξ = 1. The check is structural: a
/// violation is an error, not a warning.
pub fn helmholtz_form(
    k: &VectorField,
    b: &TensorField,
    params: &ModelParams,
) -> Result<HelmholtzForm> {
    if (params.eps - 1.0).abs() > 1e-12 || (params.xi - 1.0).abs() > 1e-12 {
        return Err(Error::Param(format!(
            "helmholtz_form is defined at eps = xi = 1, got ({}, {})",
            params.eps, params.xi
        )));
    }
    k.grid.check_same(&b.grid, "helmholtz_form")?;
    let g = k.grid;
    let dec = helmholtz(b, params.tolerances.cg_tol)?;

    let mut k_shift = k.clone();
    for (kv, zv) in k_shift.data.iter_mut().zip(&dec.z.data) {
        *kv -= zv;
    }

    let gks = grad(&k_shift);
    let cp = curl_rowwise(&dec.p);
    let nodes_w = g.nx + 1;
    let area = g.cell_area();
    let mut i_value = 0.0;
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let n00 = cy * nodes_w + cx;
            let corners = [n00, n00 + 1, n00 + nodes_w, n00 + nodes_w + 1];
            let mut unit = 0.0;
            let mut curl = 0.0;
            for n in corners {
                let kt = [
                    k_shift.data[2 * n] + dec.z.data[2 * n],
                    k_shift.data[2 * n + 1] + dec.z.data[2 * n + 1],
                ];
                let d = (kt[0] * kt[0] + kt[1] * kt[1]).sqrt() - 1.0;
                unit += d * d;
                let cv = [cp.data[2 * n], cp.data[2 * n + 1]];
                curl += cv[0] * cv[0] + cv[1] * cv[1];
            }
            unit *= 0.25;
            curl *= 0.25;

            let gm = gks.get(cx, cy);
            let pm = dec.p.get(cx, cy);
            let zm = dec.grad_z.get(cx, cy);
            let mut el = 0.0;
            let mut p2 = 0.0;
            let mut wellarg = 0.0;
            for r in 0..2 {
                for c in 0..2 {
                    el += gm[r][c] * gm[r][c];
                    p2 += pm[r][c] * pm[r][c];
                    let s = zm[r][c] + pm[r][c];
                    wellarg += s * s;
                }
            }
            i_value += area * (unit + el + p2 + curl + params.potential.value(wellarg.sqrt()));
        }
    }

    let e = energy(k, b, params)?.total;
    let tol = params.tolerances.identity_tol;
    if (i_value - e).abs() > tol * (1.0 + e) {
        return Err(Error::Identity {
            what: "helmholtz-form energy identity",
            left: i_value,
            right: e,
            tol,
        });
    }
    Ok(HelmholtzForm { i_value, energy_value: e, k_shift, decomposition: dec })
}

/// Layer energy after the thin-layer change of variables, evaluated on a
/// grid over (−ξ, 1) × (−ξ/2, ξ/2):
/// ∫ (|k̃|−1)²/ξ² + ε|∇_ε k̃ − B̃/ε|² + ξ²|curl_ε B̃|² + W(ξ|B̃|)/ξ².
pub fn rescaled_layer_energy(
    kt: &VectorField,
    bt: &TensorField,
    params: &ModelParams,
) -> Result<EnergyReport> {
    kt.grid.check_same(&bt.grid, "rescaled_layer_energy")?;
    let g = kt.grid;
    let xi = params.xi;
    let eps = params.eps;
    let frame_ok = (g.x_min + xi).abs() < 1e-9
        && (g.x_max - 1.0).abs() < 1e-9
        && (g.y_min + 0.5 * xi).abs() < 1e-9
        && (g.y_max - 0.5 * xi).abs() < 1e-9;
    if !frame_ok {
        return Err(Error::Grid(format!(
            "rescaled_layer_energy expects the layer frame (−{xi}, 1) × (±{}), got [{}, {}]×[{}, {}]",
            0.5 * xi,
            g.x_min,
            g.x_max,
            g.y_min,
            g.y_max
        )));
    }

    let gk = scaled_grad(kt, eps);
    let cb = scaled_curl(bt, eps);
    let nodes_w = g.nx + 1;
    let area = g.cell_area();
    let mut rep = EnergyReport::default();
    for cy in 0..g.ny {
        for cx in 0..g.nx {
            let n00 = cy * nodes_w + cx;
            let corners = [n00, n00 + 1, n00 + nodes_w, n00 + nodes_w + 1];
            let mut unit = 0.0;
            let mut curl = 0.0;
            for n in corners {
                let kv = [kt.data[2 * n], kt.data[2 * n + 1]];
                let d = (kv[0] * kv[0] + kv[1] * kv[1]).sqrt() - 1.0;
                unit += d * d;
                let cv = [cb.data[2 * n], cb.data[2 * n + 1]];
                curl += cv[0] * cv[0] + cv[1] * cv[1];
            }
            unit *= 0.25 / (xi * xi);
            curl *= 0.25 * xi * xi;

            let gm = gk.get(cx, cy);
            let bm = bt.get(cx, cy);
            let mut el = 0.0;
            for r in 0..2 {
                for c in 0..2 {
                    let d = gm[r][c] - bm[r][c] / eps;
                    el += d * d;
                }
            }
            el *= eps;
            let well = params.potential.value(xi * frob(&bm)) / (xi * xi);
            for (val, what) in [
                (unit, "rescaled unit density"),
                (el, "rescaled elastic density"),
                (curl, "rescaled curl density"),
                (well, "rescaled well density"),
            ] {
                if !val.is_finite() {
                    return Err(Error::NonFinite { what, i: cx, j: cy });
                }
            }
            rep.unit_penalty += area * unit;
            rep.elastic += area * el;
            rep.curl_term += area * curl;
            rep.well_term += area * well;
        }
    }
    rep.total = rep.unit_penalty + rep.elastic + rep.curl_term + rep.well_term;
    rep.layer = rep.total;
    let q = crate::diffops::integral_scaled_curl(bt, eps);
    rep.charge_residual = ((q[0] * q[0] + q[1] * q[1]).sqrt() - 2.0).abs();
    Ok(rep)
}
