//! Restarted GMRES with modified Gram–Schmidt Arnoldi and complex Givens
//! rotations.

use super::{dot_c, norm_c, CsrMatrix};
use crate::C64;

/// Square complex operator applied matrix-free.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Vec<C64>;
}

impl LinearOperator for CsrMatrix<C64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        self.mul_vec(x)
    }
}

impl<F: Fn(&[C64]) -> Vec<C64>> LinearOperator for (usize, F) {
    fn dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &[C64]) -> Vec<C64> {
        (self.1)(x)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GmresSettings {
    /// Krylov dimension before restart.
    pub restart: usize,
    /// Cap on the total number of operator applications.
    pub max_iter: usize,
    /// Stop when `||b - A x|| <= tol ||b||`. Zero disables the test.
    pub tol: f64,
    /// Form the current iterate after every Arnoldi step for the monitor.
    pub track_iterates: bool,
}

impl Default for GmresSettings {
    fn default() -> Self {
        Self { restart: 20, max_iter: 1000, tol: 1e-10, track_iterates: false }
    }
}

/// Snapshot handed to the monitor after each Arnoldi step.
pub struct GmresStep<'a> {
    pub iteration: usize,
    /// Relative residual estimate from the least-squares recurrence.
    pub relative_residual: f64,
    /// Current iterate, present when `track_iterates` is set.
    pub iterate: Option<&'a [C64]>,
}

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    /// Final iterate (the best one of the last cycle).
    pub x: Vec<C64>,
    /// Relative residual estimates, starting with the initial residual.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// No residual reduction over a full restart cycle.
    pub stagnated: bool,
    /// Arnoldi breakdown before the residual test was met.
    pub breakdown: bool,
}

/// Plain residual-based restarted GMRES from a zero initial guess.
pub fn gmres(op: &dyn LinearOperator, b: &[C64], settings: GmresSettings) -> GmresOutcome {
    gmres_monitored(op, b, None, settings, |_| false)
}

/// Restarted GMRES; `monitor` may request termination by returning `true`,
/// which counts as convergence.
pub fn gmres_monitored(
    op: &dyn LinearOperator,
    b: &[C64],
    x0: Option<&[C64]>,
    settings: GmresSettings,
    mut monitor: impl FnMut(&GmresStep) -> bool,
) -> GmresOutcome {
    let n = op.dim();
    assert_eq!(b.len(), n);
    let restart = settings.restart.max(1).min(n.max(1));
    let zero = C64::new(0.0, 0.0);
    let mut x: Vec<C64> = match x0 {
        Some(v) => v.to_vec(),
        None => vec![zero; n],
    };
    let bnorm = norm_c(b);
    let mut outcome = GmresOutcome {
        x: Vec::new(),
        residual_history: Vec::new(),
        iterations: 0,
        converged: false,
        stagnated: false,
        breakdown: false,
    };
    let scale = if bnorm > 0.0 { bnorm } else { 1.0 };

    loop {
        let ax = op.apply(&x);
        let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        let beta = norm_c(&r);
        if outcome.residual_history.is_empty() {
            outcome.residual_history.push(beta / scale);
        }
        if beta == 0.0 || beta / scale <= settings.tol {
            outcome.converged = true;
            break;
        }
        if outcome.iterations >= settings.max_iter {
            break;
        }

        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(restart + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        let mut h = vec![vec![zero; restart]; restart + 1];
        let mut cs = vec![0.0f64; restart];
        let mut sn = vec![zero; restart];
        let mut g = vec![zero; restart + 1];
        g[0] = C64::new(beta, 0.0);
        let mut steps = 0;
        let mut res = beta;
        let mut stop = false;

        for k in 0..restart {
            if outcome.iterations >= settings.max_iter {
                break;
            }
            let mut w = op.apply(&basis[k]);
            outcome.iterations += 1;
            for i in 0..=k {
                let hik = dot_c(&w, &basis[i]);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(&basis[i]) {
                    *wj -= hik * vj;
                }
            }
            let wnorm = norm_c(&w);
            h[k + 1][k] = C64::new(wnorm, 0.0);
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i].conj() * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            steps = k + 1;
            res = g[k + 1].norm();
            outcome.residual_history.push(res / scale);

            let col_scale = h[k][k].norm().max(f64::MIN_POSITIVE);
            let happy = wnorm <= 1e-14 * col_scale;
            let tol_met = res / scale <= settings.tol;

            let mut current: Option<Vec<C64>> = None;
            if settings.track_iterates {
                current = Some(update(&x, &basis, &h, &g, steps));
            }
            let step = GmresStep {
                iteration: outcome.iterations,
                relative_residual: res / scale,
                iterate: current.as_deref(),
            };
            if monitor(&step) {
                outcome.converged = true;
                stop = true;
                if let Some(c) = current {
                    x = c;
                    steps = 0;
                }
                break;
            }
            if tol_met {
                outcome.converged = true;
                stop = true;
                break;
            }
            if happy {
                // invariant subspace reached: the iterate is exact up to round-off
                if res <= 1e-10 * scale {
                    outcome.converged = true;
                } else {
                    outcome.breakdown = true;
                }
                stop = true;
                break;
            }
            basis.push(w.iter().map(|v| v / wnorm).collect());
        }
        if steps > 0 {
            x = update(&x, &basis, &h, &g, steps);
        }
        if stop {
            break;
        }
        if outcome.iterations >= settings.max_iter {
            break;
        }
        if res >= beta * (1.0 - 1e-13) {
            outcome.stagnated = true;
            break;
        }
    }
    outcome.x = x;
    outcome
}

fn givens(a: C64, b: C64) -> (f64, C64) {
    let (na, nb) = (a.norm(), b.norm());
    if nb == 0.0 {
        return (1.0, C64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, b.conj() / nb);
    }
    let d = na.hypot(nb);
    (na / d, (a / na) * b.conj() / d)
}

fn update(x: &[C64], basis: &[Vec<C64>], h: &[Vec<C64>], g: &[C64], k: usize) -> Vec<C64> {
    let mut y = vec![C64::new(0.0, 0.0); k];
    for i in (0..k).rev() {
        let mut s = g[i];
        for j in i + 1..k {
            s -= h[i][j] * y[j];
        }
        y[i] = s / h[i][i];
    }
    let mut out = x.to_vec();
    for (yi, v) in y.iter().zip(basis) {
        for (o, vj) in out.iter_mut().zip(v) {
            *o += yi * vj;
        }
    }
    out
}
