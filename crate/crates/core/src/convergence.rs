//! Refinement studies: interpolation, manufactured solutions in space and in time.

use std::fmt::Write as _;

use crate::expr::{manufactured_forcing, FieldExpression};
use crate::fespace::{build_spaces, interpolate_at};
use crate::mesh::{build_box_mesh, BoxExtents};
use crate::norms::field_errors;
use crate::stepper::{run_from, RunOptions, Trajectory};
use crate::{Error, Result};

/// Least-squares slope of `ln e` against `ln x`.
pub fn observed_order(x: &[f64], e: &[f64]) -> f64 {
    assert_eq!(x.len(), e.len());
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let le: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let me = le.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&le).map(|(a, b)| (a - mx) * (b - me)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Orders between consecutive entries.
pub fn pairwise_orders(x: &[f64], e: &[f64]) -> Vec<f64> {
    x.windows(2)
        .zip(e.windows(2))
        .map(|(x, e)| (e[1] / e[0]).ln() / (x[1] / x[0]).ln())
        .collect()
}

/// Error table over a refinement parameter (`h` or `tau`).
#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub name: String,
    pub parameter: &'static str,
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
    pub columns: Vec<String>,
    /// `errors[k][i]`: column `k` at refinement level `i`.
    pub errors: Vec<Vec<f64>>,
    pub orders: Vec<f64>,
}

impl StudyTable {
    fn new(name: &str, parameter: &'static str, columns: &[&str]) -> Self {
        StudyTable {
            name: name.into(),
            parameter,
            cells: vec![],
            values: vec![],
            columns: columns.iter().map(|s| s.to_string()).collect(),
            errors: vec![vec![]; columns.len()],
            orders: vec![],
        }
    }

    fn push(&mut self, cells: usize, value: f64, errs: &[f64]) {
        self.cells.push(cells);
        self.values.push(value);
        for (col, e) in self.errors.iter_mut().zip(errs) {
            col.push(*e);
        }
    }

    fn finish(mut self) -> Self {
        self.orders = self.errors.iter().map(|e| observed_order(&self.values, e)).collect();
        self
    }

    pub fn order(&self, column: &str) -> Option<f64> {
        self.columns.iter().position(|c| c == column).map(|k| self.orders[k])
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("study,n,{}", self.parameter);
        for c in &self.columns {
            let _ = write!(s, ",{c}");
        }
        s.push('\n');
        for i in 0..self.values.len() {
            let _ = write!(s, "{},{},{:.16e}", self.name, self.cells[i], self.values[i]);
            for col in &self.errors {
                let _ = write!(s, ",{:.16e}", col[i]);
            }
            s.push('\n');
        }
        let _ = write!(s, "{},order,", self.name);
        for o in &self.orders {
            let _ = write!(s, ",{o:.6}");
        }
        s.push('\n');
        s
    }
}

fn check_levels(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidArgument("a convergence study needs at least 3 levels".into()));
    }
    Ok(())
}

/// Interpolation errors in L2 and the H1 seminorm on unit-box meshes.
pub fn interpolation_study(expr: &FieldExpression, cells: &[usize], extents: BoxExtents) -> Result<StudyTable> {
    check_levels(cells.len())?;
    let mut t = StudyTable::new("interpolation", "h", &["l2", "h1semi"]);
    for &n in cells {
        let mesh = build_box_mesh(n, n, n, extents)?;
        let space = build_spaces(&mesh);
        let f = interpolate_at(expr, &space, 0.0)?;
        let e = field_errors(&f, &space, expr, None, 0.0)?;
        t.push(n, mesh.h, &[e.velocity_l2, e.velocity_h1semi]);
    }
    Ok(t.finish())
}

/// An exact solution `(w, q)` of the forced equations.
#[derive(Debug, Clone)]
pub struct ManufacturedCase {
    pub velocity: FieldExpression,
    pub pressure: FieldExpression,
    pub mu: f64,
    pub t_final: f64,
}

impl ManufacturedCase {
    /// Steady vortex pair.
    pub fn vortex(mu: f64, t_final: f64) -> Self {
        ManufacturedCase {
            velocity: FieldExpression::catalog("vortex"),
            pressure: FieldExpression::catalog("vortex_pressure"),
            mu,
            t_final,
        }
    }

    /// Vortex pair modulated by `cos(8 pi t)`.
    pub fn vortex_pulse(mu: f64, t_final: f64) -> Self {
        ManufacturedCase {
            velocity: FieldExpression::catalog("vortex_pulse"),
            pressure: FieldExpression::catalog("vortex_pulse_pressure"),
            mu,
            t_final,
        }
    }
}

/// Number of steps `N` with `|N tau - T| <= 1e-12 T`.
pub fn step_count(tau: f64, t_final: f64) -> Result<usize> {
    if !(tau > 0.0 && t_final > 0.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} and T = {t_final} must be positive")));
    }
    let n = (t_final / tau).round();
    if n < 1.0 || (n * tau - t_final).abs() > 1e-12 * t_final {
        return Err(Error::InvalidArgument(format!("T = {t_final} is not a multiple of tau = {tau}")));
    }
    Ok(n as usize)
}

/// Manufactured run and its per-level velocity L2 errors `|u^n - w(t_n)|`.
#[derive(Debug, Clone)]
pub struct ManufacturedRun {
    pub trajectory: Trajectory,
    pub errors: Vec<f64>,
    pub h: f64,
}

impl ManufacturedRun {
    /// `L^inf(0,T; L2)` velocity error over the piecewise-constant reconstruction.
    pub fn linf_l2(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }
}

pub fn manufactured_run(case: &ManufacturedCase, cells: usize, tau: f64, extents: BoxExtents) -> Result<ManufacturedRun> {
    let mesh = build_box_mesh(cells, cells, cells, extents)?;
    let space = build_spaces(&mesh);
    let forcing = manufactured_forcing(&case.velocity, &case.pressure, case.mu)?;
    let steps = step_count(tau, case.t_final)?;
    let mut u0 = interpolate_at(&case.velocity, &space, 0.0)?;
    u0.zero_boundary(&space);
    let traj = run_from(u0, tau, steps, case.mu, Some(&forcing), &space, &mesh, RunOptions::default())?;
    let errors = traj
        .levels
        .iter()
        .zip(&traj.level_steps)
        .map(|(f, &n)| Ok(field_errors(f, &space, &case.velocity, None, traj.time(n))?.velocity_l2))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ManufacturedRun { trajectory: traj, errors, h: mesh.h })
}

/// Spatial order at fixed `tau`.
pub fn manufactured_space_study(case: &ManufacturedCase, tau: f64, cells: &[usize], extents: BoxExtents) -> Result<StudyTable> {
    check_levels(cells.len())?;
    let mut t = StudyTable::new("manufactured_space", "h", &["linf_l2"]);
    for &n in cells {
        let r = manufactured_run(case, n, tau, extents)?;
        t.push(n, r.h, &[r.linf_l2()]);
    }
    Ok(t.finish())
}

/// Temporal order at a fixed mesh.
pub fn manufactured_time_study(case: &ManufacturedCase, cells: usize, taus: &[f64], extents: BoxExtents) -> Result<StudyTable> {
    check_levels(taus.len())?;
    let mut t = StudyTable::new("manufactured_time", "tau", &["linf_l2"]);
    for &tau in taus {
        let r = manufactured_run(case, cells, tau, extents)?;
        t.push(cells, tau, &[r.linf_l2()]);
    }
    Ok(t.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn least_squares_slope() {
        let x = [1.0, 0.5, 0.25];
        let e: Vec<f64> = x.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((observed_order(&x, &e) - 2.0).abs() < 1e-12);
        assert!(pairwise_orders(&x, &e).iter().all(|o| (o - 2.0).abs() < 1e-12));
    }

    #[test]
    fn step_counts() {
        assert_eq!(step_count(0.01, 0.1).unwrap(), 10);
        assert!(step_count(0.03, 0.1).is_err());
        assert!(step_count(-0.1, 1.0).is_err());
    }

    #[test]
    fn quadratic_fields_are_interpolated_exactly() {
        let q = FieldExpression::parse("(x^2, y*z, 1 - x*y)").unwrap();
        let t = interpolation_study(&q, &[1, 2, 3], BoxExtents::unit_cube()).unwrap();
        assert!(t.errors[0].iter().all(|&e| e < 1e-12));
    }
}
