//! Optimized Schwarz engine on the skeleton: local Robin solves, the
//! scattering operator, the skeleton system `(Id + Π S) p = f`, and its
//! Richardson and GMRES solvers.

mod drivers;
mod spectral;

pub use drivers::{gmres_solve, richardson_solve, richardson_solve_from};
pub use spectral::{coercivity_ratio, dense_skeleton_operator, estimate_gamma, lambda_bounds, th_singular_values};

use crate::assembly::{assemble_global, assemble_local, broken_h1_distance, broken_h1_norm, restrict_to_subdomains};
use crate::assembly::{LocalProblem, Material, Source};
use crate::error::{invalid, Error, Result};
use crate::exchange::gather;
use crate::impedance::{ImpedanceMatrices, ImpedanceSpec};
use crate::linsolve::{BandLu, CsrMatrix, TripletBuilder};
use crate::mesh::{Decomposition, Mesh, Partition};
use crate::skeleton::{build_skeleton_map, MultiTrace, SkeletonMap};
use crate::C64;
use rayon::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

/// When the GMRES driver evaluates the volume error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorSampling {
    EveryIteration,
    EveryRestart,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Richardson relaxation, in (0, 1).
    pub r: f64,
    /// Target relative broken-H1 error against the reference solution.
    pub tol: f64,
    pub max_iter: usize,
    /// GMRES restart length.
    pub restart: usize,
    pub sampling: ErrorSampling,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { r: 0.5, tol: 1e-8, max_iter: 100_000, restart: 20, sampling: ErrorSampling::EveryIteration }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(invalid(format!("relaxation r = {} must lie in (0, 1)", self.r)));
        }
        if !(self.tol > 0.0) {
            return Err(invalid(format!("tolerance {} must be positive", self.tol)));
        }
        if self.restart == 0 || self.max_iter == 0 {
            return Err(invalid("restart and max_iter must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub relative_error: f64,
    /// Skeleton residual: `t_h`-norm for Richardson, relative Euclidean
    /// estimate for GMRES.
    pub residual: f64,
}

/// Iterate of a skeleton solve and its convergence record.
#[derive(Debug, Clone)]
pub struct DdmState {
    pub p: MultiTrace,
    pub u: Vec<Vec<C64>>,
    pub iteration: usize,
    pub history: Vec<HistoryEntry>,
    pub converged: bool,
    pub stagnated: bool,
}

impl DdmState {
    pub fn final_error(&self) -> f64 {
        self.history.last().map_or(f64::NAN, |h| h.relative_error)
    }
}

/// Undecomposed direct solution, restricted to each subdomain.
#[derive(Debug, Clone)]
pub struct Reference {
    pub global: Vec<C64>,
    pub local: Vec<Vec<C64>>,
    pub norm: f64,
}

/// Fully assembled decomposed problem.
pub struct DdmProblem {
    mesh: Mesh,
    partition: Partition,
    decomposition: Decomposition,
    material: Material,
    source: Source,
    map: SkeletonMap,
    imp: ImpedanceMatrices,
    local: Vec<LocalProblem>,
    robin: Vec<BandLu<C64>>,
}

impl std::fmt::Debug for DdmProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DdmProblem")
            .field("subdomains", &self.local.len())
            .field("skeleton_dofs", &self.map.num_skeleton_dofs())
            .finish()
    }
}

/// `A_j − i B_j^* T_j B_j`.
pub fn robin_matrix(local: &LocalProblem, t: &nalgebra::DMatrix<f64>) -> CsrMatrix<C64> {
    let n = local.num_volume_dofs();
    let mut tb = TripletBuilder::with_capacity(n, n, local.a.nnz() + t.len());
    for (r, c, v) in local.a.triplets() {
        tb.push(r, c, v);
    }
    let idx = &local.trace_index;
    for c in 0..t.ncols() {
        for r in 0..t.nrows() {
            let v = t[(r, c)];
            if v != 0.0 {
                tb.push(idx[r], idx[c], -I * v);
            }
        }
    }
    tb.build()
}

impl DdmProblem {
    pub fn new(mesh: Mesh, partition: Partition, material: Material, source: Source, spec: &ImpedanceSpec) -> Result<Self> {
        let decomposition = Decomposition::new(&mesh, &partition)?;
        let map = build_skeleton_map(&decomposition);
        let imp = ImpedanceMatrices::build(&mesh, &decomposition, &map, spec, material.kappa_inf())?;
        let nsub = partition.num_subdomains();
        let local = (0..nsub)
            .into_par_iter()
            .map(|j| assemble_local(&mesh, &decomposition, j, &material, &source))
            .collect::<Result<Vec<_>>>()?;
        let robin = local
            .par_iter()
            .zip(imp.t.par_iter())
            .enumerate()
            .map(|(j, (lp, t))| {
                BandLu::factor(&robin_matrix(lp, t))
                    .map_err(|e| Error::LocalFactorization { subdomain: j + 1, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DdmProblem { mesh, partition, decomposition, material, source, map, imp, local, robin })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn material(&self) -> &Material {
        &self.material
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn skeleton(&self) -> &SkeletonMap {
        &self.map
    }

    pub fn impedance(&self) -> &ImpedanceMatrices {
        &self.imp
    }

    pub fn local_problems(&self) -> &[LocalProblem] {
        &self.local
    }

    pub fn num_subdomains(&self) -> usize {
        self.local.len()
    }

    /// Direct solve of the undecomposed problem.
    pub fn compute_reference(&self) -> Result<Reference> {
        let global = assemble_global(&self.mesh, &self.material, &self.source)?.solve()?;
        Ok(self.reference_from_global(global))
    }

    pub fn reference_from_global(&self, global: Vec<C64>) -> Reference {
        let local = restrict_to_subdomains(&self.decomposition, &global);
        let norm = broken_h1_norm(&self.mesh, &self.decomposition, &self.material, &local).unwrap_or(f64::NAN);
        Reference { global, local, norm }
    }

    /// Relative broken-H1 error; absolute when the reference vanishes.
    pub fn relative_error(&self, u: &[Vec<C64>], reference: &Reference) -> Result<f64> {
        let d = broken_h1_distance(&self.mesh, &self.decomposition, &self.material, u, &reference.local)?;
        Ok(if reference.norm > 0.0 { d / reference.norm } else { d })
    }

    pub fn broken_h1_norm(&self, u: &[Vec<C64>]) -> Result<f64> {
        broken_h1_norm(&self.mesh, &self.decomposition, &self.material, u)
    }

    fn check(&self, p: &MultiTrace) -> Result<()> {
        if p.blocks.len() != self.map.num_subdomains()
            || p.blocks.iter().enumerate().any(|(j, b)| b.len() != self.map.block_size(j))
        {
            return Err(invalid("multi-trace shape does not match the skeleton"));
        }
        Ok(())
    }

    /// Solves `(A_j − iB_j^*T_jB_j) u = B_j^*T_j p_j (+ f_j)` on every subdomain.
    fn local_solves(&self, p: Option<&MultiTrace>, with_load: bool) -> Vec<Vec<C64>> {
        (0..self.num_subdomains())
            .into_par_iter()
            .map(|j| {
                let lp = &self.local[j];
                let mut rhs = match p {
                    Some(p) => lp.lift(&self.imp.apply_block(j, &p.blocks[j])),
                    None => vec![C64::new(0.0, 0.0); lp.num_volume_dofs()],
                };
                if with_load {
                    for (r, f) in rhs.iter_mut().zip(&lp.f) {
                        *r += f;
                    }
                }
                self.robin[j].solve(&rhs)
            })
            .collect()
    }

    /// `u_j = (A_j − iB_j^*T_jB_j)⁻¹ (B_j^*T_j p_j + f_j)`.
    pub fn reconstruct_volume(&self, p: &MultiTrace) -> Result<Vec<Vec<C64>>> {
        self.check(p)?;
        Ok(self.local_solves(Some(p), true))
    }

    /// Local solves with the load only, `p = 0`.
    pub fn free_solution(&self) -> Vec<Vec<C64>> {
        self.local_solves(None, true)
    }

    fn traces(&self, u: &[Vec<C64>]) -> Vec<Vec<C64>> {
        u.iter().zip(&self.local).map(|(uj, lp)| lp.trace(uj)).collect()
    }

    /// `S(p)_j = p_j + 2i B_j w_j`, `w_j = (A_j − iB_j^*T_jB_j)⁻¹ B_j^*T_j p_j`.
    pub fn apply_scattering(&self, p: &MultiTrace) -> Result<MultiTrace> {
        self.check(p)?;
        let w = self.local_solves(Some(p), false);
        let blocks = p
            .blocks
            .iter()
            .zip(self.traces(&w))
            .map(|(pj, bw)| pj.iter().zip(&bw).map(|(a, b)| a + 2.0 * I * b).collect())
            .collect();
        Ok(MultiTrace { blocks })
    }

    /// `Σ_j Q_j^* T_j x_j` in subdomain order, then `T_Σ⁻¹`.
    fn sigma_solve(&self, x: &[Vec<C64>]) -> Vec<C64> {
        let tx: Vec<Vec<C64>> = x.par_iter().enumerate().map(|(j, xj)| self.imp.apply_block(j, xj)).collect();
        self.imp.solve_sigma(&gather(&self.map, &tx))
    }

    /// Right-hand side of the skeleton system, `−2i Π(u_*|Σ)`.
    pub fn skeleton_rhs(&self) -> MultiTrace {
        let u = self.free_solution();
        let bu = self.traces(&u);
        let x: Vec<Vec<C64>> = bu.iter().map(|b| b.iter().map(|v| 2.0 * I * v).collect()).collect();
        let v = self.sigma_solve(&x);
        let blocks = x
            .into_iter()
            .enumerate()
            .map(|(j, bj)| bj.iter().zip(self.map.skeleton_index(j)).map(|(b, &k)| b - 2.0 * v[k]).collect())
            .collect();
        MultiTrace { blocks }
    }

    /// `(Id + Π S) p`.
    pub fn skeleton_matvec(&self, p: &MultiTrace) -> Result<MultiTrace> {
        self.check(p)?;
        let u = self.local_solves(Some(p), false);
        let bu = self.traces(&u);
        let x: Vec<Vec<C64>> =
            p.blocks.iter().zip(&bu).map(|(pj, b)| pj.iter().zip(b).map(|(a, c)| a + 2.0 * I * c).collect()).collect();
        let v = self.sigma_solve(&x);
        let blocks = bu
            .iter()
            .enumerate()
            .map(|(j, b)| b.iter().zip(self.map.skeleton_index(j)).map(|(c, &k)| -2.0 * I * c + 2.0 * v[k]).collect())
            .collect();
        Ok(MultiTrace { blocks })
    }

    /// One relaxed step `p ← p + 2r(iBu − Qv)` with `v = T_Σ⁻¹ Σ Q^*T(p + 2iBu)`,
    /// for the volume iterate `u` belonging to `p`.
    fn richardson_step(&self, p: &MultiTrace, u: &[Vec<C64>], r: f64) -> MultiTrace {
        let bu = self.traces(u);
        let x: Vec<Vec<C64>> =
            p.blocks.iter().zip(&bu).map(|(pj, b)| pj.iter().zip(b).map(|(a, c)| a + 2.0 * I * c).collect()).collect();
        let v = self.sigma_solve(&x);
        let blocks = p
            .blocks
            .iter()
            .zip(&bu)
            .enumerate()
            .map(|(j, (pj, b))| {
                pj.iter()
                    .zip(b)
                    .zip(self.map.skeleton_index(j))
                    .map(|((a, c), &k)| a + 2.0 * r * (I * c - v[k]))
                    .collect()
            })
            .collect();
        MultiTrace { blocks }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::apply_pi;
    use crate::impedance::ImpedanceKind;
    use crate::mesh::{generate_disk_mesh, partition_mesh, PartitionMethod};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn problem(kappa: C64, j: usize, kind: ImpedanceKind, h: f64) -> DdmProblem {
        let mesh = generate_disk_mesh(1.0, h).unwrap();
        let part = if j == 1 { Partition::single(&mesh) } else { partition_mesh(&mesh, j, &PartitionMethod::GraphGrowing).unwrap() };
        let mat = Material::homogeneous(&mesh, 1.0, kappa).unwrap();
        let src = Source::plane_wave(&mesh, kappa);
        let spec = ImpedanceSpec::for_wavenumber(kind, kappa.norm()).unwrap();
        DdmProblem::new(mesh, part, mat, src, &spec).unwrap()
    }

    #[test]
    fn single_domain_robin_adds_impedance_mass() {
        let k = 2.0;
        let pb = problem(C64::new(k, 0.0), 1, ImpedanceKind::M, 0.25);
        let lp = &pb.local_problems()[0];
        let r = robin_matrix(lp, &pb.impedance().t[0]);
        // −iκ edge mass appears twice: once from the Robin condition, once from T = κ M
        for (row, col, v) in r.triplets() {
            let delta = v - lp.a.get(row, col);
            let (gr, gc) = (lp.trace_index.binary_search(&row), lp.trace_index.binary_search(&col));
            match (gr, gc) {
                (Ok(a), Ok(b)) => assert!((delta + I * pb.impedance().t[0][(a, b)]).norm() < 1e-14),
                _ => assert_eq!(delta, C64::new(0.0, 0.0)),
            }
        }
    }

    #[test]
    fn zero_trace_gives_zero_solution() {
        let pb = problem(C64::new(2.0, 0.0), 3, ImpedanceKind::K, 0.25);
        let z = MultiTrace::zeros(pb.skeleton());
        assert!(pb.apply_scattering(&z).unwrap().euclidean_norm() == 0.0);
        assert!(pb.skeleton_matvec(&z).unwrap().euclidean_norm() == 0.0);
        let w = pb.local_solves(Some(&z), false);
        assert!(w.iter().flatten().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn local_energy_identity() {
        let pb = problem(C64::new(3.0, 0.0), 3, ImpedanceKind::W, 0.25);
        let p = MultiTrace::random(pb.skeleton(), &mut ChaCha8Rng::seed_from_u64(1));
        let u = pb.local_solves(Some(&p), false);
        for j in 0..3 {
            let lp = &pb.local_problems()[j];
            let au = lp.a.mul_vec(&u[j]);
            let lhs: C64 = u[j].iter().zip(&au).map(|(a, b)| a.conj() * b).sum();
            let bu = lp.trace(&u[j]);
            let tbu = pb.impedance().apply_block(j, &bu);
            let tp = pb.impedance().apply_block(j, &p.blocks[j]);
            let n2: f64 = bu.iter().zip(&tbu).map(|(a, b)| (a.conj() * b).re).sum();
            let cross: C64 = bu.iter().zip(&tp).map(|(a, b)| a.conj() * b).sum();
            assert!((lhs.im - (n2 + cross.im)).abs() <= 1e-10 * (n2 + lhs.norm()));
        }
    }

    #[test]
    fn two_path_matvec_and_rhs() {
        for kind in [ImpedanceKind::M, ImpedanceKind::Lambda] {
            let pb = problem(C64::new(2.0, 0.0), 4, kind, 0.2);
            let p = MultiTrace::random(pb.skeleton(), &mut ChaCha8Rng::seed_from_u64(2));
            let alg = pb.skeleton_matvec(&p).unwrap();
            let comp = &p + &apply_pi(pb.skeleton(), pb.impedance(), &pb.apply_scattering(&p).unwrap()).unwrap();
            assert!((&alg - &comp).euclidean_norm() <= 1e-12 * comp.euclidean_norm());

            let rhs = pb.skeleton_rhs();
            let ustar = MultiTrace { blocks: pb.traces(&pb.free_solution()) };
            let alt = apply_pi(pb.skeleton(), pb.impedance(), &ustar).unwrap().scaled(-2.0 * I);
            assert!((&rhs - &alt).euclidean_norm() <= 1e-12 * alt.euclidean_norm());
            assert!(pb.impedance().th_norm(&rhs).unwrap() > 0.0);
        }
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let mesh = generate_disk_mesh(1.0, 0.3).unwrap();
        let part = partition_mesh(&mesh, 2, &PartitionMethod::GraphGrowing).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(1.0, 0.0)).unwrap();
        let src = Source::zero(&mesh);
        let pb = DdmProblem::new(mesh, part, mat, src, &ImpedanceSpec::Despres { kappa_r: 1.0 }).unwrap();
        assert_eq!(pb.skeleton_rhs().euclidean_norm(), 0.0);
        let u = pb.reconstruct_volume(&MultiTrace::zeros(pb.skeleton())).unwrap();
        assert!(u.iter().flatten().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn scattering_contracts() {
        for kappa in [C64::new(3.0, 0.0), C64::new(3.0, 0.5)] {
            let pb = problem(kappa, 4, ImpedanceKind::K, 0.2);
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            for _ in 0..20 {
                let p = MultiTrace::random(pb.skeleton(), &mut rng);
                let s = pb.apply_scattering(&p).unwrap();
                let (ns, np) = (pb.impedance().th_norm(&s).unwrap(), pb.impedance().th_norm(&p).unwrap());
                assert!(ns <= (1.0 + 1e-11) * np);
            }
        }
    }

    #[test]
    fn interior_block_conserves_energy() {
        // inner disk of an onion split: real κ, no contact with ∂Ω
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let part = partition_mesh(&mesh, 2, &PartitionMethod::Onion).unwrap();
        let kappa = C64::new(2.0, 0.0);
        let mat = Material::homogeneous(&mesh, 1.0, kappa).unwrap();
        let pb = DdmProblem::new(mesh, part, mat, Source::zero(&generate_disk_mesh(1.0, 0.2).unwrap()), &ImpedanceSpec::Despres { kappa_r: 2.0 }).unwrap();
        let mut p = MultiTrace::random(pb.skeleton(), &mut ChaCha8Rng::seed_from_u64(4));
        p.blocks[1].iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
        let s = pb.apply_scattering(&p).unwrap();
        let t = pb.impedance();
        let block_norm = |m: &MultiTrace| {
            let tp = t.apply_block(0, &m.blocks[0]);
            m.blocks[0].iter().zip(&tp).map(|(a, b)| (a.conj() * b).re).sum::<f64>().sqrt()
        };
        assert!((block_norm(&s) - block_norm(&p)).abs() <= 1e-10 * block_norm(&p));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { r: 1.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { restart: 0, ..Default::default() }.validate().is_err());
    }
}
