//! Browser bindings. Each operation returns a [`Series`]: a row-major table of
//! numbers plus a text note for the page.

use nscert::certify::{thresholds, ConstantsLedger};
use nscert::convergence::{interpolation_study, observed_order};
use nscert::expr::FieldExpression;
use nscert::fespace::build_spaces;
use nscert::mesh::{build_box_mesh, BoxExtents};
use nscert::norms::energy_ledger;
use nscert::stepper::run;
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    data: Vec<f64>,
    stride: usize,
    note: String,
}

#[wasm_bindgen]
impl Series {
    pub fn data(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn note(&self) -> String {
        self.note.clone()
    }
}

impl Series {
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.stride)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Rows `(M, log10 phi(M), log10 |log10 tau_M|, log10 |log10 h_M|)` on a
/// log-spaced grid of `M`.
pub fn threshold_curve_impl(constants: &[f64], m_min: f64, m_max: f64, points: usize) -> Result<Series, String> {
    if constants.len() != 6 {
        return Err("expected C0, C1, C1star, C2, C3, C9".into());
    }
    if !(m_min > 0.0 && m_max > m_min && (2..=2000).contains(&points)) {
        return Err("need 0 < M_min < M_max and 2..2000 points".into());
    }
    let mut l = ConstantsLedger::all_ones(1.0);
    for (name, v) in ["C0", "C1", "C1star", "C2", "C3", "C9"].iter().zip(constants) {
        l.set(name, *v, "demo input").map_err(err)?;
    }
    let mut data = Vec::with_capacity(4 * points);
    for i in 0..points {
        let m = m_min * (m_max / m_min).powf(i as f64 / (points - 1) as f64);
        let th = thresholds(m, &l).map_err(err)?;
        data.extend([
            m,
            th.ln_phi_m / std::f64::consts::LN_10,
            th.log10_tau_m().log10_abs(),
            th.log10_h_m().log10_abs(),
        ]);
    }
    let last = thresholds(m_max, &l).map_err(err)?;
    let note = format!("at M = {m_max}: log10 tau_M = {:.4}, log10 h_M = {:.4}", last.log10_tau_m(), last.log10_h_m());
    Ok(Series { data, stride: 4, note })
}

/// Rows `(t, energy, energy + accumulated dissipation)` for an unforced run on
/// the unit cube.
pub fn energy_run_impl(u0: &str, cells: usize, tau: f64, mu: f64, steps: usize) -> Result<Series, String> {
    if !(1..=3).contains(&cells) || !(1..=200).contains(&steps) {
        return Err("demo limits: 1..3 cells per side, 1..200 steps".into());
    }
    let u0 = FieldExpression::resolve(u0).map_err(err)?;
    if u0.arity() != 3 {
        return Err("u0 must be a vector field".into());
    }
    let mesh = build_box_mesh(cells, cells, cells, BoxExtents::unit_cube()).map_err(err)?;
    let space = build_spaces(&mesh);
    let traj = run(&u0, tau, steps, mu, None, &space, &mesh).map_err(err)?;
    let mut data = Vec::with_capacity(3 * (steps + 1));
    let mut dissipated = 0.0;
    for (k, d) in traj.diagnostics.iter().enumerate() {
        if k > 0 {
            dissipated += tau * mu * d.grad_sq;
        }
        data.extend([d.time, d.energy, d.energy + dissipated]);
    }
    let ledger = energy_ledger(&traj);
    let note = format!("energy ledger: {} (min slack {:.3e})", ledger.status.label(), ledger.min_slack);
    Ok(Series { data, stride: 3, note })
}

/// Rows `(n, h, L2 error, H1 seminorm error)` of Lagrange interpolation.
pub fn interpolation_impl(expr: &str, max_cells: usize) -> Result<Series, String> {
    if !(3..=6).contains(&max_cells) {
        return Err("max cells per side must be 3..6".into());
    }
    let f = FieldExpression::resolve(expr).map_err(err)?;
    if f.arity() != 3 {
        return Err("expected a vector field `(a, b, c)` or a catalog name".into());
    }
    let cells: Vec<usize> = (1..=max_cells).collect();
    let t = interpolation_study(&f, &cells, BoxExtents::unit_cube()).map_err(err)?;
    let mut data = vec![];
    for (i, n) in cells.iter().enumerate() {
        data.extend([*n as f64, t.values[i], t.errors[0][i], t.errors[1][i]]);
    }
    // Orders from the finest three levels.
    let k = cells.len() - 3;
    let note = format!(
        "observed orders (finest three levels): L2 {:.3}, H1 seminorm {:.3}",
        observed_order(&t.values[k..], &t.errors[0][k..]),
        observed_order(&t.values[k..], &t.errors[1][k..])
    );
    Ok(Series { data, stride: 4, note })
}

#[wasm_bindgen]
pub fn threshold_curve(constants: Vec<f64>, m_min: f64, m_max: f64, points: usize) -> Result<Series, JsError> {
    threshold_curve_impl(&constants, m_min, m_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn energy_run(u0: &str, cells: usize, tau: f64, mu: f64, steps: usize) -> Result<Series, JsError> {
    energy_run_impl(u0, cells, tau, mu, steps).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn interpolation(expr: &str, max_cells: usize) -> Result<Series, JsError> {
    interpolation_impl(expr, max_cells).map_err(|e| JsError::new(&e))
}
