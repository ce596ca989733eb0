//! Richardson and GMRES solvers for the skeleton system, with the
//! convergence criterion taken on the reconstructed volume solution.

use super::{DdmProblem, DdmState, ErrorSampling, HistoryEntry, Reference, SolverConfig};
use crate::error::Result;
use crate::linsolve::{gmres_monitored, norm_c, GmresSettings};
use crate::skeleton::MultiTrace;
use crate::C64;
use log::{debug, info};

/// Relaxed fixed-point iteration `p ← (1−r)p − rΠ(p + 2iu|Σ)` from `p = 0`.
pub fn richardson_solve(problem: &DdmProblem, config: &SolverConfig, reference: &Reference) -> Result<DdmState> {
    let p0 = MultiTrace::zeros(problem.skeleton());
    richardson_solve_from(problem, config, reference, p0)
}

/// Richardson from a given initial trace `p0`.
///
/// History entry `n` holds the error of `u^n` and the `t_h`-norm of the
/// skeleton residual `f − (Id + ΠS)p^n`.
pub fn richardson_solve_from(
    problem: &DdmProblem,
    config: &SolverConfig,
    reference: &Reference,
    p0: MultiTrace,
) -> Result<DdmState> {
    config.validate()?;
    let imp = problem.impedance();
    let mut p = p0;
    let mut u = problem.reconstruct_volume(&p)?;
    let mut err = problem.relative_error(&u, reference)?;
    let mut history = vec![HistoryEntry { iteration: 0, relative_error: err, residual: f64::NAN }];
    let mut n = 0;
    while err > config.tol && n < config.max_iter {
        let next = problem.richardson_step(&p, &u, config.r);
        // p^{n+1} − p^n = r (f − (Id + ΠS) p^n)
        history[n].residual = imp.th_norm(&(&next - &p))? / config.r;
        p = next;
        u = problem.reconstruct_volume(&p)?;
        err = problem.relative_error(&u, reference)?;
        n += 1;
        history.push(HistoryEntry { iteration: n, relative_error: err, residual: f64::NAN });
        if n % 100 == 0 {
            debug!("richardson iteration {n}: relative error {err:.3e}");
        }
    }
    let residual = &problem.skeleton_rhs() - &problem.skeleton_matvec(&p)?;
    history[n].residual = imp.th_norm(&residual)?;
    let converged = err <= config.tol;
    info!("richardson stopped after {n} iterations, error {err:.3e}, converged {converged}");
    Ok(DdmState { p, u, iteration: n, history, converged, stagnated: false })
}

/// Restarted GMRES on the concatenated skeleton unknown with the Euclidean
/// inner product, stopped on the volume error.
pub fn gmres_solve(problem: &DdmProblem, config: &SolverConfig, reference: &Reference) -> Result<DdmState> {
    config.validate()?;
    let map = problem.skeleton();
    let rhs = problem.skeleton_rhs();
    let b = rhs.flatten();
    let bnorm = norm_c(&b);

    let zero = MultiTrace::zeros(map);
    let u0 = problem.reconstruct_volume(&zero)?;
    let err0 = problem.relative_error(&u0, reference)?;
    let mut history = vec![HistoryEntry { iteration: 0, relative_error: err0, residual: 1.0 }];
    if err0 <= config.tol || bnorm == 0.0 {
        return Ok(DdmState { p: zero, u: u0, iteration: 0, history, converged: err0 <= config.tol, stagnated: false });
    }

    let dim = map.total_trace_dofs();
    let apply = |x: &[C64]| -> Vec<C64> {
        let p = MultiTrace::from_flat(map, x).expect("flat iterate has skeleton shape");
        problem.skeleton_matvec(&p).expect("shape checked").flatten()
    };
    let settings = GmresSettings { restart: config.restart, max_iter: config.max_iter, tol: 0.0, track_iterates: true };
    let mut best: Option<(Vec<C64>, Vec<Vec<C64>>)> = None;
    let mut failure = None;
    let outcome = gmres_monitored(&(dim, apply), &b, None, settings, |step| {
        let sample = match config.sampling {
            ErrorSampling::EveryIteration => true,
            ErrorSampling::EveryRestart => step.iteration % config.restart == 0,
        };
        if !sample {
            return false;
        }
        let Some(x) = step.iterate else { return false };
        let p = MultiTrace::from_flat(map, x).expect("flat iterate has skeleton shape");
        let result = problem.reconstruct_volume(&p).and_then(|u| problem.relative_error(&u, reference).map(|e| (u, e)));
        match result {
            Ok((u, err)) => {
                history.push(HistoryEntry { iteration: step.iteration, relative_error: err, residual: step.relative_residual });
                if step.iteration % 100 == 0 {
                    debug!("gmres iteration {}: relative error {err:.3e}", step.iteration);
                }
                let done = err <= config.tol;
                if done {
                    best = Some((x.to_vec(), u));
                }
                done
            }
            Err(e) => {
                failure = Some(e);
                true
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let (x, u, converged) = match best {
        Some((x, u)) => (x, u, true),
        None => {
            let p = MultiTrace::from_flat(map, &outcome.x)?;
            let u = problem.reconstruct_volume(&p)?;
            let err = problem.relative_error(&u, reference)?;
            if history.last().map(|h| h.iteration) != Some(outcome.iterations) {
                let res = outcome.residual_history.last().copied().unwrap_or(f64::NAN);
                history.push(HistoryEntry { iteration: outcome.iterations, relative_error: err, residual: res });
            }
            (outcome.x.clone(), u, err <= config.tol)
        }
    };
    let iteration = history.last().map_or(0, |h| h.iteration);
    info!("gmres stopped after {iteration} iterations, converged {converged}, stagnated {}", outcome.stagnated);
    Ok(DdmState {
        p: MultiTrace::from_flat(map, &x)?,
        u,
        iteration,
        history,
        converged,
        stagnated: outcome.stagnated || outcome.breakdown,
    })
}
