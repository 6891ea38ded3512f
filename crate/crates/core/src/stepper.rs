//! The linearized implicit scheme: given `u^n`, find `(u^{n+1}, p^{n+1})` with
//!
//! ```text
//! (u^{n+1} - u^n)/tau + c(u^n; u^{n+1}, .) + mu (grad u^{n+1}, grad .) - (p^{n+1}, div .) = (f(t_{n+1}), .)
//! (div u^{n+1}, q) = 0
//! ```
//!
//! where `c` is the skew-symmetrized convection. One saddle solve per step.

use std::fmt::Write as _;

use crate::assembly::{assemble_convection, assemble_forcing, StaticOperators};
use crate::expr::FieldExpression;
use crate::fespace::{interpolate_at, DiscreteField, SpacePair, Tabulation};
use crate::mesh::TetMesh;
use crate::norms::{field_norm_with, norm_tabulation, NormKind};
use crate::solver::{SaddleSolver, RESIDUAL_TOL};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Bound on `|B u^{n+1}|_inf` accepted after a step (scaled by `max(1, |grad u|)`).
pub const DIVERGENCE_TOL: f64 = 1e-9;

/// Per-level record. Level 0 is the initial field, with zero residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub time: f64,
    /// `1/2 |u|^2_{L2}`
    pub energy: f64,
    /// `|grad u|^2_{L2}`
    pub grad_sq: f64,
    pub l4: f64,
    pub residual: f64,
    /// `|B u|_inf`
    pub divergence: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "step,time,energy,grad_sq,l4,residual,divergence";

impl StepDiagnostics {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            self.step, self.time, self.energy, self.grad_sq, self.l4, self.residual, self.divergence
        )
    }
}

/// Time levels of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub tau: f64,
    pub mu: f64,
    pub num_steps: usize,
    pub t_final: f64,
    /// Stored levels; with stride `k` these are `u^0, u^k, u^2k, ...` and always `u^N`.
    pub levels: Vec<DiscreteField>,
    pub level_steps: Vec<usize>,
    pub stride: usize,
    /// One entry per level `0..=N`, stored or not.
    pub diagnostics: Vec<StepDiagnostics>,
    /// True when a forcing term was applied.
    pub forced: bool,
}

impl Trajectory {
    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    /// Stored level `n`, if kept.
    pub fn level(&self, n: usize) -> Option<&DiscreteField> {
        self.level_steps.binary_search(&n).ok().map(|k| &self.levels[k])
    }

    pub fn initial(&self) -> &DiscreteField {
        &self.levels[0]
    }

    pub fn last(&self) -> &DiscreteField {
        self.levels.last().expect("trajectory has u^0")
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from(DIAGNOSTICS_HEADER);
        s.push('\n');
        for d in &self.diagnostics {
            let _ = writeln!(s, "{}", d.csv_row());
        }
        s
    }

    /// Largest `|B u^n|_inf` over the accepted steps.
    pub fn max_divergence(&self) -> f64 {
        self.diagnostics.iter().skip(1).map(|d| d.divergence).fold(0.0, f64::max)
    }

    pub fn max_residual(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.residual).fold(0.0, f64::max)
    }
}

/// Piecewise-constant reconstruction: `u^n` on `(t_{n-1}, t_n]`, and `u^0` at `t = 0`.
pub fn reconstruct(traj: &Trajectory, t: f64) -> Result<&DiscreteField> {
    let n = level_index(traj, t)?;
    traj.level(n).ok_or_else(|| {
        Error::InvalidArgument(format!("level {n} was not stored (stride {})", traj.stride))
    })
}

/// Level index `n` with `t` in `(t_{n-1}, t_n]`.
pub fn level_index(traj: &Trajectory, t: f64) -> Result<usize> {
    let slack = 1e-12 * traj.t_final.max(traj.tau);
    if !t.is_finite() || t < 0.0 || t > traj.t_final + slack {
        return Err(Error::TimeOutOfRange(t));
    }
    if t == 0.0 {
        return Ok(0);
    }
    // Ratios within 1e-9 of an integer are treated as the right endpoint.
    let n = (t / traj.tau - 1e-9).ceil().max(1.0) as usize;
    Ok(n.min(traj.num_steps))
}

/// Operators and solver state reused across steps of one run.
pub struct Stepper<'a> {
    space: &'a SpacePair,
    mesh: &'a TetMesh,
    tau: f64,
    mu: f64,
    ops: StaticOperators,
    mass_i: CsrMatrix,
    stiff_i: CsrMatrix,
    div_i: CsrMatrix,
    solver: SaddleSolver,
    tab: Tabulation,
}

impl<'a> Stepper<'a> {
    pub fn new(space: &'a SpacePair, mesh: &'a TetMesh, tau: f64, mu: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidArgument(format!("tau must be positive, got {tau}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be positive, got {mu}")));
        }
        let ops = StaticOperators::new(space, mesh);
        let ni = space.num_interior();
        let np = space.pressure_dofs();
        let rows: Vec<Option<usize>> = (0..np).map(Some).collect();
        Ok(Stepper {
            mass_i: ops.mass.restrict(&space.interior_index, ni, &space.interior_index, ni),
            stiff_i: ops.stiffness.restrict(&space.interior_index, ni, &space.interior_index, ni),
            div_i: ops.divergence.restrict(&rows, np, &space.interior_index, ni),
            ops,
            space,
            mesh,
            tau,
            mu,
            solver: SaddleSolver::new(),
            tab: norm_tabulation(),
        })
    }

    pub fn set_solver_tolerance(&mut self, tol: f64) {
        self.solver = SaddleSolver::with_tolerance(tol);
    }

    pub fn operators(&self) -> &StaticOperators {
        &self.ops
    }

    /// Advances `prev` by one step with forcing evaluated at the new time.
    pub fn advance(&mut self, prev: &DiscreteField, forcing: Option<&FieldExpression>) -> Result<(DiscreteField, f64)> {
        let space = self.space;
        let t_new = prev.time + self.tau;
        let conv = assemble_convection(prev, space, self.mesh);
        let ni = space.num_interior();
        let conv_i = conv.restrict(&space.interior_index, ni, &space.interior_index, ni);
        let a = CsrMatrix::linear_combination(&[
            (1.0 / self.tau, &self.mass_i),
            (1.0, &conv_i),
            (self.mu, &self.stiff_i),
        ]);
        let mut rhs: Vec<f64> = space
            .restrict(&self.ops.mass.matvec(&prev.velocity))
            .into_iter()
            .map(|v| v / self.tau)
            .collect();
        if let Some(f) = forcing {
            let load = space.restrict(&assemble_forcing(f, t_new, space, self.mesh)?);
            rhs.iter_mut().zip(load).for_each(|(r, l)| *r += l);
        }
        let sol = self.solver.solve(&a, &self.div_i, &self.ops.pressure_mean, &rhs)?;
        let field = DiscreteField {
            velocity: space.expand(&sol.velocity),
            pressure: sol.pressure,
            time: t_new,
        };
        Ok((field, sol.residual))
    }

    pub fn diagnostics(&self, field: &DiscreteField, step: usize, residual: f64) -> StepDiagnostics {
        let u = &field.velocity;
        let divergence = self.ops.divergence.matvec(u).iter().fold(0.0f64, |m, v| m.max(v.abs()));
        StepDiagnostics {
            step,
            time: field.time,
            energy: 0.5 * self.ops.mass.bilinear(u, u),
            grad_sq: self.ops.stiffness.bilinear(u, u),
            l4: field_norm_with(&self.tab, field, self.space, NormKind::L4),
            residual,
            divergence,
        }
    }
}

/// One step of the scheme from `u_prev`.
pub fn step(
    u_prev: &DiscreteField,
    tau: f64,
    mu: f64,
    forcing: Option<&FieldExpression>,
    space: &SpacePair,
    mesh: &TetMesh,
) -> Result<DiscreteField> {
    let mut s = Stepper::new(space, mesh, tau, mu)?;
    s.advance(u_prev, forcing).map(|(f, _)| f)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Keep every `stride`-th level in memory (diagnostics are kept for all).
    pub stride: usize,
    /// Relative residual tolerance of each saddle solve.
    pub solver_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { stride: 1, solver_tol: RESIDUAL_TOL }
    }
}

/// Runs `num_steps` steps from the Lagrange interpolant of `u0` (boundary dofs zeroed).
pub fn run(
    u0: &FieldExpression,
    tau: f64,
    num_steps: usize,
    mu: f64,
    forcing: Option<&FieldExpression>,
    space: &SpacePair,
    mesh: &TetMesh,
) -> Result<Trajectory> {
    let mut init = interpolate_at(u0, space, 0.0)?;
    init.zero_boundary(space);
    run_from(init, tau, num_steps, mu, forcing, space, mesh, RunOptions::default())
}

/// Runs from an explicit initial field.
#[allow(clippy::too_many_arguments)]
pub fn run_from(
    init: DiscreteField,
    tau: f64,
    num_steps: usize,
    mu: f64,
    forcing: Option<&FieldExpression>,
    space: &SpacePair,
    mesh: &TetMesh,
    opts: RunOptions,
) -> Result<Trajectory> {
    if !(opts.solver_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("solver tolerance must be positive, got {}", opts.solver_tol)));
    }
    let mut stepper = Stepper::new(space, mesh, tau, mu)?;
    stepper.set_solver_tolerance(opts.solver_tol);
    let stride = opts.stride.max(1);
    let mut init = init;
    init.time = 0.0;
    let mut diagnostics = vec![stepper.diagnostics(&init, 0, 0.0)];
    let mut levels = vec![init];
    let mut level_steps = vec![0];
    let mut current = levels[0].clone();
    for n in 1..=num_steps {
        let (mut next, residual) = stepper
            .advance(&current, forcing)
            .map_err(|e| Error::Step { step: n, source: Box::new(e) })?;
        // Time stamps are n * tau, not accumulated sums.
        next.time = n as f64 * tau;
        let d = stepper.diagnostics(&next, n, residual);
        let scale = d.grad_sq.sqrt().max(1.0);
        if !(d.divergence <= DIVERGENCE_TOL * scale) {
            return Err(Error::Step {
                step: n,
                source: Box::new(Error::Solver {
                    msg: format!("discrete divergence {:.3e} above {DIVERGENCE_TOL:.0e}", d.divergence),
                    residuals: vec![residual],
                }),
            });
        }
        diagnostics.push(d);
        if n % stride == 0 || n == num_steps {
            levels.push(next.clone());
            level_steps.push(n);
        }
        current = next;
    }
    Ok(Trajectory {
        tau,
        mu,
        num_steps,
        t_final: num_steps as f64 * tau,
        levels,
        level_steps,
        stride,
        diagnostics,
        forced: forcing.is_some(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fespace::build_spaces;
    use crate::mesh::{build_box_mesh, BoxExtents};

    fn setup(n: usize) -> (TetMesh, SpacePair) {
        let m = build_box_mesh(n, n, n, BoxExtents::unit_cube()).unwrap();
        let s = build_spaces(&m);
        (m, s)
    }

    #[test]
    fn zero_data_stays_zero() {
        let (m, s) = setup(2);
        let traj = run(&FieldExpression::catalog("zero"), 0.01, 5, 1.0, None, &s, &m).unwrap();
        assert_eq!(traj.levels.len(), 6);
        for f in &traj.levels {
            assert!(f.velocity.iter().all(|&v| v == 0.0));
            assert!(f.pressure.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn single_step_energy_estimate() {
        let (m, s) = setup(2);
        let mut u0 = interpolate_at(&FieldExpression::catalog("sine"), &s, 0.0).unwrap();
        u0.zero_boundary(&s);
        let mut st = Stepper::new(&s, &m, 0.01, 1.0).unwrap();
        let d0 = st.diagnostics(&u0, 0, 0.0);
        let (u1, res) = st.advance(&u0, None).unwrap();
        let d1 = st.diagnostics(&u1, 1, res);
        assert!(d1.energy + 0.01 * d1.grad_sq <= d0.energy + 1e-10);
        assert!(d1.divergence <= DIVERGENCE_TOL);
        let mean: f64 = st.operators().pressure_mean.iter().zip(&u1.pressure).map(|(a, b)| a * b).sum();
        assert!(mean.abs() <= 1e-12 * u1.pressure.iter().map(|p| p.abs()).fold(1.0, f64::max));
    }

    #[test]
    fn reconstruction_slabs() {
        let (m, s) = setup(2);
        let traj = run_from(DiscreteField::zeros(&s, 0.0), 0.1, 5, 1.0, None, &s, &m, RunOptions::default()).unwrap();
        assert_eq!(level_index(&traj, 0.0).unwrap(), 0);
        assert_eq!(level_index(&traj, traj.time(3)).unwrap(), 3);
        assert_eq!(level_index(&traj, traj.time(3) - 0.05).unwrap(), 3);
        assert_eq!(level_index(&traj, 1e-15).unwrap(), 1);
        assert_eq!(level_index(&traj, 0.5).unwrap(), 5);
        assert!(matches!(level_index(&traj, 0.51), Err(Error::TimeOutOfRange(_))));
        assert!(matches!(level_index(&traj, -0.01), Err(Error::TimeOutOfRange(_))));
        assert_eq!(reconstruct(&traj, 0.3).unwrap().time, traj.time(3));
    }

    #[test]
    fn thinning_keeps_diagnostics() {
        let (m, s) = setup(2);
        let mut u0 = interpolate_at(&FieldExpression::catalog("rotation"), &s, 0.0).unwrap();
        u0.zero_boundary(&s);
        let full = run_from(u0.clone(), 0.01, 5, 1.0, None, &s, &m, RunOptions::default()).unwrap();
        let thin = run_from(u0, 0.01, 5, 1.0, None, &s, &m, RunOptions { stride: 2, ..RunOptions::default() }).unwrap();
        assert_eq!(thin.level_steps, vec![0, 2, 4, 5]);
        assert_eq!(full.diagnostics, thin.diagnostics);
        assert_eq!(full.last(), thin.last());
        assert!(reconstruct(&thin, thin.time(3)).is_err());
    }

    #[test]
    fn rejects_bad_parameters() {
        let (m, s) = setup(1);
        assert!(Stepper::new(&s, &m, 0.0, 1.0).is_err());
        assert!(Stepper::new(&s, &m, 0.1, -1.0).is_err());
    }
}
