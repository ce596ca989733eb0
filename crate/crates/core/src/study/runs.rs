use super::{DiagnosticsRow, RunConfig, SolverKind, SweepRow};
use crate::assembly::{assemble_global, broken_h1_distance, broken_h1_norm, Material, Source};
use crate::ddm::{estimate_gamma, gmres_solve, lambda_bounds, richardson_solve, DdmProblem, HistoryEntry, Reference};
use crate::error::{invalid, Error, Result};
use crate::impedance::ImpedanceKind;
use crate::linsolve::{gmres_monitored, norm_c, GmresSettings};
use crate::mesh::{generate_disk_mesh, partition_mesh, read_msh, Decomposition, Mesh, Partition};
use crate::C64;
use log::info;

pub fn build_mesh(config: &RunConfig) -> Result<Mesh> {
    match &config.mesh_file {
        Some(path) => read_msh(&std::fs::read_to_string(path)?),
        None => generate_disk_mesh(config.radius, config.mesh_size()),
    }
}

/// Homogeneous unit `μ`, or `μ = 1 + mu_r` inside the centred inclusion.
pub fn build_material(config: &RunConfig, mesh: &Mesh) -> Result<Material> {
    Material::with_inclusion(mesh, config.kappa_complex(), config.mu_r, config.inclusion_radius)
}

pub fn build_source(config: &RunConfig, mesh: &Mesh) -> Source {
    Source::plane_wave(mesh, config.kappa_complex())
}

pub fn build_partition(config: &RunConfig, mesh: &Mesh) -> Result<Partition> {
    partition_mesh(mesh, config.j, &config.partition)
}

/// Mesh, partition, material and load assembled with the configured
/// impedance.
pub fn build_problem(config: &RunConfig) -> Result<DdmProblem> {
    build_problem_with(config, config.impedance)
}

fn build_problem_with(config: &RunConfig, kind: ImpedanceKind) -> Result<DdmProblem> {
    config.validate()?;
    let mesh = build_mesh(config)?;
    let partition = build_partition(config, &mesh)?;
    let material = build_material(config, &mesh)?;
    let source = build_source(config, &mesh);
    let spec = config.impedance_spec_for(kind)?;
    DdmProblem::new(mesh, partition, material, source, &spec)
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    pub stagnated: bool,
    pub final_error: f64,
    pub history: Vec<HistoryEntry>,
}

/// Decomposed solve; the error reference is `reference` when given (global
/// node values), otherwise a fresh direct solve.
pub fn run_solve(config: &RunConfig, reference: Option<Vec<C64>>) -> Result<SolveReport> {
    let problem = build_problem(config)?;
    solve_problem(&problem, config, reference)
}

fn solve_problem(problem: &DdmProblem, config: &RunConfig, reference: Option<Vec<C64>>) -> Result<SolveReport> {
    let reference = match reference {
        Some(global) => {
            if global.len() != problem.mesh().num_nodes() {
                return Err(invalid(format!(
                    "reference holds {} values, mesh has {} nodes",
                    global.len(),
                    problem.mesh().num_nodes()
                )));
            }
            problem.reference_from_global(global)
        }
        None => problem.compute_reference()?,
    };
    let solver = config.solver_config();
    let state = match config.solver {
        SolverKind::Richardson => richardson_solve(problem, &solver, &reference)?,
        SolverKind::Gmres => gmres_solve(problem, &solver, &reference)?,
    };
    Ok(SolveReport {
        iterations: state.iteration,
        converged: state.converged,
        stagnated: state.stagnated,
        final_error: state.final_error(),
        history: state.history,
    })
}

#[derive(Debug, Clone)]
pub struct DirectReport {
    pub solution: Vec<C64>,
    /// `‖b − Au‖ / ‖b‖` of the direct solve.
    pub residual: f64,
    /// Restarted GMRES iterations on the undecomposed system until the
    /// H1 relative error reaches `tol`.
    pub gmres_iterations: usize,
    pub gmres_converged: bool,
}

/// Direct solve of the undecomposed system plus the unpreconditioned GMRES
/// baseline on the same matrix.
pub fn run_direct(config: &RunConfig) -> Result<DirectReport> {
    config.validate()?;
    let mesh = build_mesh(config)?;
    let material = build_material(config, &mesh)?;
    let source = build_source(config, &mesh);
    let global = assemble_global(&mesh, &material, &source)?;
    let solution = global.solve()?;
    let au = global.a.mul_vec(&solution);
    let bnorm = norm_c(&global.f);
    let diff: Vec<C64> = au.iter().zip(&global.f).map(|(x, y)| x - y).collect();
    let residual = if bnorm > 0.0 { norm_c(&diff) / bnorm } else { norm_c(&diff) };

    let single = Decomposition::new(&mesh, &Partition::single(&mesh))?;
    let reference = vec![solution.clone()];
    let ref_norm = broken_h1_norm(&mesh, &single, &material, &reference)?;
    let settings =
        GmresSettings { restart: config.restart, max_iter: config.max_iter, tol: 0.0, track_iterates: true };
    let mut iterations = 0;
    let mut converged = ref_norm == 0.0;
    if !converged {
        let outcome = gmres_monitored(&global.a, &global.f, None, settings, |step| {
            let Some(x) = step.iterate else { return false };
            let d = broken_h1_distance(&mesh, &single, &material, &[x.to_vec()], &reference).unwrap_or(f64::INFINITY);
            iterations = step.iteration;
            if d / ref_norm <= config.tol {
                converged = true;
            }
            converged
        });
        iterations = iterations.max(outcome.iterations);
    }
    info!("direct solve residual {residual:.3e}; undecomposed gmres {iterations} iterations");
    Ok(DirectReport { solution, residual, gmres_iterations: iterations, gmres_converged: converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    NLambda,
    /// Wave number with `h²κ³ = (2π/20)²`, i.e. `N_λ = 20 √κ`.
    Kappa,
    /// Subdomain count on a fixed domain.
    J,
    /// Subdomain count with the radius growing like `√J`.
    JWeak,
    MuR,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n_lambda" | "N_lambda" => Ok(SweepAxis::NLambda),
            "kappa" => Ok(SweepAxis::Kappa),
            "j" | "J" => Ok(SweepAxis::J),
            "j_weak" | "J_weak" => Ok(SweepAxis::JWeak),
            "mu_r" => Ok(SweepAxis::MuR),
            _ => Err(invalid(format!("unknown sweep axis `{s}` (n_lambda, kappa, j, j_weak, mu_r)"))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SweepAxis::NLambda => "n_lambda",
            SweepAxis::Kappa => "kappa",
            SweepAxis::J => "j",
            SweepAxis::JWeak => "j_weak",
            SweepAxis::MuR => "mu_r",
        })
    }
}

impl SweepAxis {
    /// Configuration of the sweep member at `value`.
    pub fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut c = base.clone();
        let as_count = |v: f64| -> Result<usize> {
            if v >= 1.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                Err(invalid(format!("subdomain count must be a positive integer, got {v}")))
            }
        };
        match self {
            SweepAxis::NLambda => c.n_lambda = value,
            SweepAxis::Kappa => {
                c.kappa = value;
                c.n_lambda = 20.0 * value.sqrt();
                c.h = None;
            }
            SweepAxis::J => c.j = as_count(value)?,
            SweepAxis::JWeak => {
                c.j = as_count(value)?;
                c.radius = base.radius * value.sqrt();
            }
            SweepAxis::MuR => c.mu_r = value,
        }
        c.validate()?;
        Ok(c)
    }
}

/// One row per value and impedance, plus an undecomposed GMRES row
/// (impedance `none`) per value when `baseline` is set. The direct
/// reference is computed once per value and shared across impedances.
pub fn run_sweep(
    base: &RunConfig,
    axis: SweepAxis,
    values: &[f64],
    impedances: &[ImpedanceKind],
    baseline: bool,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &value in values {
        let member = axis.apply(base, value)?;
        let context = |e: Error| invalid(format!("sweep member {axis}={value}: {e}"));
        let mut reference: Option<Reference> = None;
        for &kind in impedances {
            let problem = build_problem_with(&member, kind).map_err(context)?;
            let global = match &reference {
                Some(r) => r.global.clone(),
                None => {
                    let r = problem.compute_reference().map_err(context)?;
                    let g = r.global.clone();
                    reference = Some(r);
                    g
                }
            };
            let report = solve_problem(&problem, &member, Some(global)).map_err(context)?;
            info!("{axis}={value} {kind}: {} iterations, error {:.3e}", report.iterations, report.final_error);
            rows.push(SweepRow {
                axis: axis.to_string(),
                value,
                impedance: kind.to_string(),
                solver: member.solver.to_string(),
                iterations: report.iterations,
                converged: report.converged,
                final_error: report.final_error,
            });
        }
        if baseline {
            let direct = run_direct(&member).map_err(context)?;
            rows.push(SweepRow {
                axis: axis.to_string(),
                value,
                impedance: "none".to_string(),
                solver: SolverKind::Gmres.to_string(),
                iterations: direct.gmres_iterations,
                converged: direct.gmres_converged,
                final_error: f64::NAN,
            });
        }
    }
    Ok(rows)
}

/// `γ`, `λ±` and the Richardson rate bound for each impedance.
pub fn run_diagnostics(config: &RunConfig, impedances: &[ImpedanceKind]) -> Result<Vec<DiagnosticsRow>> {
    let mut rows = Vec::new();
    for &kind in impedances {
        let problem = build_problem_with(config, kind)?;
        let gamma = estimate_gamma(&problem)?;
        let (lambda_minus, lambda_plus) = lambda_bounds(&problem)?;
        let r = config.r;
        let rate_bound = (1.0 - r * (1.0 - r) * gamma * gamma).max(0.0).sqrt();
        rows.push(DiagnosticsRow { impedance: kind.to_string(), gamma, lambda_minus, lambda_plus, rate_bound });
    }
    Ok(rows)
}
