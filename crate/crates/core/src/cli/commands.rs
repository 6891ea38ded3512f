//! Subcommand bodies. Each writes its files under the output directory and
//! returns a short stdout summary.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{ForcingSpec, RunConfig, StudyKind};
use crate::certify::{certify, Certificate};
use crate::convergence::{interpolation_study, manufactured_space_study, manufactured_time_study, ManufacturedCase};
use crate::expr::{manufactured_forcing, FieldExpression};
use crate::fespace::{build_spaces, interpolate_at, DiscreteField, SpacePair};
use crate::mesh::{build_box_mesh, quality_report, refine_uniform, TetMesh};
use crate::norms::{energy_ledger, field_errors, NormReport};
use crate::projection::{project_discrete, projection_convergence_study, stokes_ritz_project};
use crate::stepper::{run_from, RunOptions, Trajectory, DIAGNOSTICS_HEADER};
use crate::vtk::{write_field_vtk, write_mesh_vtk};
use crate::{Error, Result};

/// Settings from the command line that are not part of the config file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub out: PathBuf,
    pub threads: usize,
    pub seed: u64,
}

impl Context {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn prepare(&self) -> Result<()> {
        fs::create_dir_all(&self.out)?;
        Ok(())
    }
}

pub fn build_mesh(cfg: &RunConfig) -> Result<TetMesh> {
    let [nx, ny, nz] = cfg.cells;
    let mut mesh = build_box_mesh(nx, ny, nz, cfg.extents())?;
    for _ in 0..cfg.refine {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

/// Random interior nodal values in `[-1, 1]`, projected onto the discretely
/// divergence-free subspace.
pub fn random_initial_field(space: &SpacePair, mesh: &TetMesh, seed: u64) -> Result<DiscreteField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut velocity = vec![0.0; space.velocity_dofs()];
    for &d in &space.interior_dofs {
        velocity[d] = rng.random_range(-1.0..1.0);
    }
    let w = DiscreteField::with_velocity(space, velocity, 0.0);
    let mut f = project_discrete(&w, space, mesh)?.field;
    f.pressure.iter_mut().for_each(|p| *p = 0.0);
    Ok(f)
}

/// A completed run with everything needed by the writers.
pub struct RunOutput {
    pub mesh: TetMesh,
    pub space: SpacePair,
    pub trajectory: Trajectory,
    pub u0: Option<FieldExpression>,
    /// Per-level velocity L2 error against `u0` for manufactured runs.
    pub errors: Option<Vec<(usize, f64)>>,
}

pub fn execute_run(cfg: &RunConfig, ctx: &Context) -> Result<RunOutput> {
    let mesh = build_mesh(cfg)?;
    let space = build_spaces(&mesh);
    let (u0, init) = if cfg.is_random_u0() {
        (None, random_initial_field(&space, &mesh, ctx.seed)?)
    } else {
        let e = cfg.velocity_expr()?;
        let mut f = interpolate_at(&e, &space, 0.0)?;
        f.zero_boundary(&space);
        (Some(e), f)
    };
    let forcing = match &cfg.forcing {
        ForcingSpec::None => None,
        ForcingSpec::Manufactured => {
            let w = u0.as_ref().expect("manufactured forcing needs a closed-form u0");
            Some(manufactured_forcing(w, &cfg.pressure_expr()?, cfg.mu)?)
        }
        ForcingSpec::Expression(text) => Some(FieldExpression::resolve(text)?),
    };
    let opts = RunOptions { stride: cfg.thin, solver_tol: cfg.solver_tol };
    let trajectory = run_from(init, cfg.tau, cfg.num_steps, cfg.mu, forcing.as_ref(), &space, &mesh, opts)?;
    let errors = match (&cfg.forcing, &u0) {
        (ForcingSpec::Manufactured, Some(w)) => Some(
            trajectory
                .levels
                .iter()
                .zip(&trajectory.level_steps)
                .map(|(f, &n)| Ok((n, field_errors(f, &space, w, None, trajectory.time(n))?.velocity_l2)))
                .collect::<Result<Vec<_>>>()?,
        ),
        _ => None,
    };
    Ok(RunOutput { mesh, space, trajectory, u0, errors })
}

/// Diagnostics CSV, with an `error_l2` column for manufactured runs
/// (empty for levels not kept in memory).
pub fn diagnostics_csv(run: &RunOutput) -> String {
    let Some(errors) = &run.errors else {
        return run.trajectory.diagnostics_csv();
    };
    let mut s = format!("{DIAGNOSTICS_HEADER},error_l2\n");
    for d in &run.trajectory.diagnostics {
        match errors.iter().find(|(n, _)| *n == d.step) {
            Some((_, e)) => {
                let _ = writeln!(s, "{},{e:.16e}", d.csv_row());
            }
            None => {
                let _ = writeln!(s, "{},", d.csv_row());
            }
        }
    }
    s
}

fn write_common(cfg: &RunConfig, ctx: &Context, run: &RunOutput) -> Result<()> {
    fs::write(ctx.file("config.txt"), cfg.echo())?;
    fs::write(ctx.file("diagnostics.csv"), diagnostics_csv(run))?;
    if let Some(u0) = &run.u0 {
        fs::write(ctx.file("norms.csv"), NormReport::new(&run.trajectory, u0, &run.space)?.to_csv())?;
    }
    if cfg.vtk_stride > 0 {
        for (f, &n) in run.trajectory.levels.iter().zip(&run.trajectory.level_steps) {
            if n % cfg.vtk_stride == 0 {
                write_field_vtk(&ctx.file(&format!("field_{n:06}.vtk")), f, &run.space, &run.mesh)?;
            }
        }
    }
    Ok(())
}

pub fn cmd_run(cfg: &RunConfig, ctx: &Context) -> Result<String> {
    ctx.prepare()?;
    let run = execute_run(cfg, ctx)?;
    write_common(cfg, ctx, &run)?;
    let t = &run.trajectory;
    let ledger = energy_ledger(t);
    let last = t.diagnostics.last().expect("diagnostics");
    let mut s = String::new();
    let _ = writeln!(s, "steps: {}", t.num_steps);
    let _ = writeln!(s, "h: {:.6e}", run.mesh.h);
    let _ = writeln!(s, "final_energy: {:.6e}", last.energy);
    let _ = writeln!(s, "max_residual: {:.3e}", t.max_residual());
    let _ = writeln!(s, "max_divergence: {:.3e}", t.max_divergence());
    let _ = writeln!(s, "energy_ledger: {}", ledger.status.label());
    if let Some(errors) = &run.errors {
        let max = errors.iter().map(|(_, e)| *e).fold(0.0, f64::max);
        let _ = writeln!(s, "max_error_l2: {max:.6e}");
    }
    let _ = writeln!(s, "threads: {}", ctx.threads);
    let _ = writeln!(s, "output: {}", ctx.out.display());
    Ok(s)
}

pub fn run_certificate(cfg: &RunConfig, ctx: &Context) -> Result<(RunOutput, Certificate)> {
    if cfg.is_random_u0() {
        return Err(Error::Config("certify needs a closed-form `u0` (its H2 norm enters M)".into()));
    }
    let run = execute_run(cfg, ctx)?;
    let u0 = run.u0.as_ref().expect("closed-form u0");
    let cert = certify(&run.trajectory, u0, &run.space, run.mesh.h, &cfg.ledger(), cfg.m)?;
    Ok((run, cert))
}

pub fn cmd_certify(cfg: &RunConfig, ctx: &Context) -> Result<String> {
    ctx.prepare()?;
    let (run, cert) = run_certificate(cfg, ctx)?;
    write_common(cfg, ctx, &run)?;
    let report = NormReport::new(&run.trajectory, run.u0.as_ref().expect("u0"), &run.space)?;
    let mut text = cert.to_text();
    let _ = writeln!(text, "threads: {}", ctx.threads);
    text.push_str("# norm summary\n");
    text.push_str(&report.summary());
    fs::write(ctx.file("certificate.txt"), &text)?;
    fs::write(ctx.file("certificate.csv"), cert.to_csv())?;
    Ok(format!(
        "verdict: {}\nm: {}\nbound: {:.6e}\noutput: {}\n",
        cert.verdict,
        cert.m,
        cert.bound,
        ctx.out.display()
    ))
}

pub fn cmd_convergence(cfg: &RunConfig, ctx: &Context, levels: Option<&[usize]>) -> Result<String> {
    ctx.prepare()?;
    let c = &cfg.convergence;
    let levels = levels.unwrap_or(&c.levels);
    if levels.len() < 3 {
        return Err(Error::InvalidArgument("a convergence study needs at least 3 levels".into()));
    }
    let ext = cfg.extents();
    let mut csv = String::new();
    let mut summary = String::new();
    if c.study.includes(StudyKind::Interpolation) {
        let t = interpolation_study(&FieldExpression::resolve(&c.interp_field)?, levels, ext)?;
        let _ = writeln!(summary, "interpolation orders: l2 {:.4}, h1semi {:.4}", t.orders[0], t.orders[1]);
        csv.push_str(&t.to_csv());
    }
    let (w, p) = (FieldExpression::resolve(&c.velocity)?, FieldExpression::resolve(&c.pressure)?);
    if c.study.includes(StudyKind::Projection) {
        let st = projection_convergence_study(&w, &p, levels, ext)?;
        let _ = writeln!(
            summary,
            "projection orders: velocity_l2 {:.4}, velocity_h1 {:.4}, pressure_l2 {:.4}",
            st.orders[0], st.orders[1], st.orders[2]
        );
        let body = st.to_csv();
        let _ = writeln!(csv, "study,{}", body.lines().next().unwrap_or(""));
        for line in body.lines().skip(1) {
            let _ = writeln!(csv, "projection,{line}");
        }
    }
    if c.study.includes(StudyKind::Space) {
        let case = ManufacturedCase { velocity: w.clone(), pressure: p.clone(), mu: c.space_mu, t_final: c.space_t };
        let t = manufactured_space_study(&case, c.space_tau, levels, ext)?;
        let _ = writeln!(summary, "manufactured spatial order: {:.4}", t.orders[0]);
        csv.push_str(&t.to_csv());
    }
    if c.study.includes(StudyKind::Time) {
        let case = ManufacturedCase {
            velocity: FieldExpression::resolve(&c.time_velocity)?,
            pressure: FieldExpression::resolve(&c.time_pressure)?,
            mu: c.time_mu,
            t_final: c.time_t,
        };
        let t = manufactured_time_study(&case, c.time_cells, &c.taus, ext)?;
        let _ = writeln!(summary, "manufactured temporal order: {:.4}", t.orders[0]);
        csv.push_str(&t.to_csv());
    }
    fs::write(ctx.file("convergence.csv"), &csv)?;
    let _ = writeln!(summary, "output: {}", ctx.out.display());
    Ok(summary)
}

pub fn cmd_project(cfg: &RunConfig, ctx: &Context) -> Result<String> {
    ctx.prepare()?;
    if cfg.is_random_u0() {
        return Err(Error::Config("project needs a closed-form `u0`".into()));
    }
    let mesh = build_mesh(cfg)?;
    let space = build_spaces(&mesh);
    let (w, p) = (cfg.velocity_expr()?, cfg.pressure_expr()?);
    let r = stokes_ritz_project(&w, &p, &space, &mesh)?;
    let e = field_errors(&r.field, &space, &w, Some(&p), 0.0)?;
    let csv = format!(
        "h,residual,divergence,velocity_l2,velocity_h1,pressure_l2\n{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
        mesh.h,
        r.residual,
        r.divergence,
        e.velocity_l2,
        e.velocity_h1(),
        e.pressure_l2
    );
    fs::write(ctx.file("projection.csv"), &csv)?;
    write_field_vtk(&ctx.file("projection.vtk"), &r.field, &space, &mesh)?;
    Ok(format!(
        "velocity_l2: {:.6e}\nvelocity_h1: {:.6e}\npressure_l2: {:.6e}\nresidual: {:.3e}\ndivergence: {:.3e}\noutput: {}\n",
        e.velocity_l2,
        e.velocity_h1(),
        e.pressure_l2,
        r.residual,
        r.divergence,
        ctx.out.display()
    ))
}

pub fn mesh_info_text(mesh: &TetMesh) -> String {
    let q = quality_report(mesh);
    let space = build_spaces(mesh);
    format!(
        "vertices: {}\ntets: {}\nboundary_faces: {}\nh: {:.16e}\nvolume: {:.16e}\nmax_diam: {:.16e}\nmin_diam: {:.16e}\ndiam_ratio: {:.16e}\nshape_regularity: {:.16e}\nvelocity_dofs: {}\ninterior_velocity_dofs: {}\npressure_dofs: {}\n",
        mesh.num_vertices(),
        mesh.num_tets(),
        mesh.boundary_faces.len(),
        mesh.h,
        mesh.total_volume(),
        q.max_diam,
        q.min_diam,
        q.diam_ratio,
        q.shape_regularity,
        space.velocity_dofs(),
        space.num_interior(),
        space.pressure_dofs()
    )
}

pub fn cmd_mesh_info(cfg: &RunConfig, ctx: &Context) -> Result<String> {
    ctx.prepare()?;
    let mesh = build_mesh(cfg)?;
    let text = mesh_info_text(&mesh);
    fs::write(ctx.file("mesh_info.txt"), &text)?;
    write_mesh_vtk(&ctx.file("mesh.vtk"), &mesh)?;
    Ok(text)
}

/// Output directory: `--out` wins over the config's `out`.
pub fn resolve_out(cfg: &RunConfig, flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&cfg.out))
}
