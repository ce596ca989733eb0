//! Dense spectral diagnostics of the skeleton operator on small problems.

use super::DdmProblem;
use crate::error::{Error, Result};
use crate::impedance::{build_schur, compute_lambda_bounds};
use crate::linsolve::dense::DENSE_CAP;
use crate::skeleton::MultiTrace;
use crate::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;

/// `Id + ΠS` as a dense matrix on the concatenated blocks.
pub fn dense_skeleton_operator(problem: &DdmProblem) -> Result<DMatrix<C64>> {
    let map = problem.skeleton();
    let n = map.total_trace_dofs();
    if n > DENSE_CAP {
        return Err(Error::Resource(format!("multi-trace dimension {n} exceeds the dense cap {DENSE_CAP}")));
    }
    let cols: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[k] = C64::new(1.0, 0.0);
            let p = MultiTrace::from_flat(map, &e)?;
            Ok(problem.skeleton_matvec(&p)?.flatten())
        })
        .collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(n, n, |r, c| cols[c][r]))
}

/// Lower Cholesky factor of `blockdiag(T_j)`.
fn block_cholesky(problem: &DdmProblem) -> Result<DMatrix<f64>> {
    let t = &problem.impedance().t;
    let n: usize = t.iter().map(|b| b.nrows()).sum();
    let mut l = DMatrix::zeros(n, n);
    let mut off = 0;
    for (j, tj) in t.iter().enumerate() {
        let ch = nalgebra::Cholesky::new(tj.clone()).ok_or(Error::NotSpd { pivot: j, size: tj.nrows() })?;
        let lj = ch.l();
        l.view_mut((off, off), (tj.nrows(), tj.nrows())).copy_from(&lj);
        off += tj.nrows();
    }
    Ok(l)
}

/// `Lᵀ A L⁻ᵀ`: the operator in coordinates where `t_h` is Euclidean.
fn th_operator(problem: &DdmProblem) -> Result<DMatrix<C64>> {
    let a = dense_skeleton_operator(problem)?;
    let l = block_cholesky(problem)?.map(|x| C64::new(x, 0.0));
    let la = l.transpose() * a;
    // C = (LᵀA) L⁻ᵀ  ⇔  Cᵀ = L⁻¹ (LᵀA)ᵀ
    let ct = l.solve_lower_triangular(&la.transpose()).ok_or(Error::Singular { pivot: 0, size: l.nrows() })?;
    Ok(ct.transpose())
}

/// Smallest and largest singular values of `Id + ΠS` in the `t_h` norm.
pub fn th_singular_values(problem: &DdmProblem) -> Result<(f64, f64)> {
    let c = th_operator(problem)?;
    let s = c.singular_values();
    Ok((s.min(), s.max()))
}

/// `γ = inf ‖(Id+ΠS)w‖_{t_h} / ‖w‖_{t_h}`.
pub fn estimate_gamma(problem: &DdmProblem) -> Result<f64> {
    th_singular_values(problem).map(|(lo, _)| lo)
}

/// `Re t_h(p, (Id+ΠS)p) / ‖p‖²_{t_h}`.
pub fn coercivity_ratio(problem: &DdmProblem, p: &MultiTrace) -> Result<f64> {
    let ap = problem.skeleton_matvec(p)?;
    let imp = problem.impedance();
    let num = imp.th_inner(&ap, p)?.re;
    let den = imp.th_inner(p, p)?.re;
    Ok(num / den)
}

/// `(λ⁻, λ⁺)`: extreme ratios `‖w‖_{t_h} / ‖w‖_{ρ_h}` with `ρ_h` given by
/// the harmonic-extension energy.
pub fn lambda_bounds(problem: &DdmProblem) -> Result<(f64, f64)> {
    let kinf = problem.material().kappa_inf();
    let mesh = problem.mesh();
    let schur: Vec<DMatrix<f64>> = problem
        .decomposition()
        .layouts
        .par_iter()
        .map(|l| build_schur(mesh, l, kinf))
        .collect::<Result<_>>()?;
    compute_lambda_bounds(&problem.impedance().t, &schur)
}

#[cfg(test)]
mod tests {
    use super::super::tests::problem;
    use super::*;
    use crate::impedance::ImpedanceKind;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_in_range_and_coercivity() {
        let pb = problem(C64::new(2.0, 0.0), 3, ImpedanceKind::M, 0.3);
        let (gamma, top) = th_singular_values(&pb).unwrap();
        assert!(gamma > 0.0 && gamma <= 2.0);
        assert!(top <= 2.0 + 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let p = MultiTrace::random(pb.skeleton(), &mut rng);
            assert!(coercivity_ratio(&pb, &p).unwrap() >= gamma * gamma / 2.0 - 1e-10);
        }
    }

    #[test]
    fn schur_impedance_has_unit_lambdas() {
        let pb = problem(C64::new(1.0, 0.0), 3, ImpedanceKind::Lambda, 0.3);
        let (lo, hi) = lambda_bounds(&pb).unwrap();
        assert!((lo - 1.0).abs() < 1e-10 && (hi - 1.0).abs() < 1e-10);
    }
}
