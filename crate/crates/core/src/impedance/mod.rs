//! Transmission impedances `T_j` on the subdomain boundaries, the skeleton
//! Gram matrix `T_Σ = Σ_j Q_j^* T_j Q_j` and the `t_h` inner product.

mod hypersingular;
mod kernel;

pub use hypersingular::hypersingular_matrix;
pub use kernel::{bessel_k0, screened_kernel};

use crate::assembly::h1_matrix;
use crate::error::{invalid, Error, Result};
use crate::linsolve::dense::{dense_sym_generalized_eigs, DENSE_CAP};
use crate::linsolve::{BandCholesky, CsrMatrix, TripletBuilder};
use crate::mesh::{dist, Decomposition, Mesh, SubdomainLayout};
use crate::skeleton::{MultiTrace, SkeletonMap};
use crate::C64;
use nalgebra::DMatrix;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImpedanceKind {
    M,
    K,
    W,
    Lambda,
}

impl std::str::FromStr for ImpedanceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "M" | "m" => Ok(ImpedanceKind::M),
            "K" | "k" => Ok(ImpedanceKind::K),
            "W" | "w" => Ok(ImpedanceKind::W),
            "Lambda" | "lambda" | "Λ" => Ok(ImpedanceKind::Lambda),
            _ => Err(invalid(format!("unknown impedance `{s}` (expected M, K, W or Lambda)"))),
        }
    }
}

impl std::fmt::Display for ImpedanceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ImpedanceKind::M => "M",
            ImpedanceKind::K => "K",
            ImpedanceKind::W => "W",
            ImpedanceKind::Lambda => "Lambda",
        })
    }
}

/// Impedance operator with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImpedanceSpec {
    /// `κ_R` × boundary mass.
    Despres { kappa_r: f64 },
    /// `a` × tangential stiffness + `b` × boundary mass.
    SecondOrder { a: f64, b: f64 },
    /// Screened hypersingular form with weight `a` and screening length `δ`.
    Hypersingular { a: f64, delta: f64 },
    /// Discrete harmonic-extension energy in the `κ_∞`-weighted H1 norm.
    Schur,
}

impl ImpedanceSpec {
    /// Default parameters for wavenumber magnitude `k`: `κ_R = k`;
    /// `a = 1/(2k)`, `b = k`; `a = k²`, `δ = 1/k`.
    pub fn for_wavenumber(kind: ImpedanceKind, k: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(invalid(format!("impedance defaults need a positive wavenumber, got {k}")));
        }
        let spec = match kind {
            ImpedanceKind::M => ImpedanceSpec::Despres { kappa_r: k },
            ImpedanceKind::K => ImpedanceSpec::SecondOrder { a: 1.0 / (2.0 * k), b: k },
            ImpedanceKind::W => ImpedanceSpec::Hypersingular { a: k * k, delta: 1.0 / k },
            ImpedanceKind::Lambda => ImpedanceSpec::Schur,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn kind(&self) -> ImpedanceKind {
        match self {
            ImpedanceSpec::Despres { .. } => ImpedanceKind::M,
            ImpedanceSpec::SecondOrder { .. } => ImpedanceKind::K,
            ImpedanceSpec::Hypersingular { .. } => ImpedanceKind::W,
            ImpedanceSpec::Schur => ImpedanceKind::Lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        let good = match *self {
            ImpedanceSpec::Despres { kappa_r } => ok(kappa_r),
            ImpedanceSpec::SecondOrder { a, b } => ok(a) && ok(b),
            ImpedanceSpec::Hypersingular { a, delta } => ok(a) && ok(delta),
            ImpedanceSpec::Schur => true,
        };
        if good {
            Ok(())
        } else {
            Err(invalid(format!("impedance parameters must be positive: {self:?}")))
        }
    }
}

fn boundary_points(mesh: &Mesh, layout: &SubdomainLayout) -> Vec<[f64; 2]> {
    layout.boundary_nodes.iter().map(|&v| mesh.nodes()[v]).collect()
}

/// Mass and tangential stiffness of the P1 boundary polyline, local
/// boundary numbering.
fn boundary_mass_stiffness(mesh: &Mesh, layout: &SubdomainLayout, mass_w: f64, stiff_w: f64) -> DMatrix<f64> {
    let n = layout.num_boundary_dofs();
    let mut t = DMatrix::zeros(n, n);
    for e in layout.local_boundary_edges() {
        let len = dist(mesh.nodes()[layout.boundary_nodes[e[0]]], mesh.nodes()[layout.boundary_nodes[e[1]]]);
        let m = [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]];
        let k = [[1.0 / len, -1.0 / len], [-1.0 / len, 1.0 / len]];
        for a in 0..2 {
            for b in 0..2 {
                t[(e[a], e[b])] += mass_w * m[a][b] + stiff_w * k[a][b];
            }
        }
    }
    t
}

pub fn build_despres(mesh: &Mesh, layout: &SubdomainLayout, kappa_r: f64) -> DMatrix<f64> {
    boundary_mass_stiffness(mesh, layout, kappa_r, 0.0)
}

pub fn build_second_order(mesh: &Mesh, layout: &SubdomainLayout, a: f64, b: f64) -> DMatrix<f64> {
    boundary_mass_stiffness(mesh, layout, b, a)
}

pub fn build_hypersingular(mesh: &Mesh, layout: &SubdomainLayout, a: f64, delta: f64) -> Result<DMatrix<f64>> {
    let edges = layout.local_boundary_edges();
    let mut degree = vec![(0u32, 0u32); layout.num_boundary_dofs()];
    for e in &edges {
        degree[e[0]].0 += 1;
        degree[e[1]].1 += 1;
    }
    if degree.iter().any(|&(o, i)| o != i || o == 0) {
        return Err(invalid("boundary polyline is not closed"));
    }
    Ok(hypersingular_matrix(&boundary_points(mesh, layout), &edges, a, delta))
}

/// Schur complement onto Γ_j of the matrix of `∫∇u·∇v + κ_∞²∫uv` on Ω_j.
pub fn build_schur(mesh: &Mesh, layout: &SubdomainLayout, kappa_inf: f64) -> Result<DMatrix<f64>> {
    let h = h1_matrix(mesh, layout, kappa_inf);
    schur_complement(&h, &layout.trace_index)
}

/// `H_ΓΓ − H_ΓI H_II⁻¹ H_IΓ` for the symmetric matrix `h` and the given
/// boundary rows.
pub fn schur_complement(h: &CsrMatrix<f64>, boundary: &[usize]) -> Result<DMatrix<f64>> {
    let n = h.nrows();
    let nb = boundary.len();
    // position in the boundary list, or in the interior list (encoded past nb)
    let mut slot = vec![usize::MAX; n];
    for (k, &v) in boundary.iter().enumerate() {
        slot[v] = k;
    }
    let mut interior = Vec::new();
    for (v, s) in slot.iter_mut().enumerate() {
        if *s == usize::MAX {
            *s = nb + interior.len();
            interior.push(v);
        }
    }
    let ni = interior.len();
    let mut t = DMatrix::zeros(nb, nb);
    let mut hii = TripletBuilder::new(ni, ni);
    // H_IΓ columns, stored per boundary DOF
    let mut hig: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nb];
    for (r, c, v) in h.triplets() {
        match (slot[r] < nb, slot[c] < nb) {
            (true, true) => t[(slot[r], slot[c])] += v,
            (false, false) => hii.push(slot[r] - nb, slot[c] - nb, v),
            (false, true) => hig[slot[c]].push((slot[r] - nb, v)),
            (true, false) => {}
        }
    }
    if ni == 0 {
        return Ok(t);
    }
    let chol = BandCholesky::factor(&hii.build())?;
    let cols: Vec<Vec<f64>> = hig
        .par_iter()
        .map(|col| {
            let mut rhs = vec![0.0; ni];
            for &(i, v) in col {
                rhs[i] = v;
            }
            chol.solve(&rhs)
        })
        .collect();
    for (c, x) in cols.iter().enumerate() {
        for (r, col) in hig.iter().enumerate() {
            // (H_ΓI x)_r = Σ_i H_{r i} x_i = Σ_i H_{i r} x_i by symmetry
            let s: f64 = col.iter().map(|&(i, v)| v * x[i]).sum();
            t[(r, c)] -= s;
        }
    }
    let tt = t.transpose();
    Ok((t + tt) * 0.5)
}

pub fn build_local_impedance(
    mesh: &Mesh,
    layout: &SubdomainLayout,
    spec: &ImpedanceSpec,
    kappa_inf: f64,
) -> Result<DMatrix<f64>> {
    spec.validate()?;
    match *spec {
        ImpedanceSpec::Despres { kappa_r } => Ok(build_despres(mesh, layout, kappa_r)),
        ImpedanceSpec::SecondOrder { a, b } => Ok(build_second_order(mesh, layout, a, b)),
        ImpedanceSpec::Hypersingular { a, delta } => build_hypersingular(mesh, layout, a, delta),
        ImpedanceSpec::Schur => build_schur(mesh, layout, kappa_inf),
    }
}

/// Local impedances, the skeleton Gram matrix and its factorization.
#[derive(Debug, Clone)]
pub struct ImpedanceMatrices {
    pub t: Vec<DMatrix<f64>>,
    pub t_sigma: CsrMatrix<f64>,
    t_sigma_factor: BandCholesky,
}

impl ImpedanceMatrices {
    pub fn build(
        mesh: &Mesh,
        decomposition: &Decomposition,
        map: &SkeletonMap,
        spec: &ImpedanceSpec,
        kappa_inf: f64,
    ) -> Result<Self> {
        let t = decomposition
            .layouts
            .par_iter()
            .map(|l| build_local_impedance(mesh, l, spec, kappa_inf))
            .collect::<Result<Vec<_>>>()?;
        Self::from_blocks(map, t)
    }

    /// Checks every block is SPD, assembles and factors `T_Σ`.
    pub fn from_blocks(map: &SkeletonMap, t: Vec<DMatrix<f64>>) -> Result<Self> {
        if t.len() != map.num_subdomains() {
            return Err(invalid(format!("{} impedance blocks for {} subdomains", t.len(), map.num_subdomains())));
        }
        for (j, tj) in t.iter().enumerate() {
            let n = map.block_size(j);
            if tj.nrows() != n || tj.ncols() != n {
                return Err(invalid(format!("impedance block {} has shape {:?}, expected {n}", j + 1, tj.shape())));
            }
            if nalgebra::Cholesky::new(tj.clone()).is_none() {
                return Err(Error::NotSpd { pivot: j, size: n });
            }
        }
        let ns = map.num_skeleton_dofs();
        let mut tb = TripletBuilder::new(ns, ns);
        for (j, tj) in t.iter().enumerate() {
            let idx = map.skeleton_index(j);
            for c in 0..tj.ncols() {
                for r in 0..tj.nrows() {
                    let v = tj[(r, c)];
                    if v != 0.0 {
                        tb.push(idx[r], idx[c], v);
                    }
                }
            }
        }
        let t_sigma = tb.build();
        let t_sigma_factor = BandCholesky::factor(&t_sigma)?;
        Ok(ImpedanceMatrices { t, t_sigma, t_sigma_factor })
    }

    pub fn num_blocks(&self) -> usize {
        self.t.len()
    }

    /// `T_j x` for a complex block vector.
    pub fn apply_block(&self, j: usize, x: &[C64]) -> Vec<C64> {
        let tj = &self.t[j];
        let n = tj.nrows();
        assert_eq!(x.len(), n);
        let mut y = vec![C64::new(0.0, 0.0); n];
        for c in 0..n {
            let xc = x[c];
            if xc.re == 0.0 && xc.im == 0.0 {
                continue;
            }
            let col = tj.column(c);
            for (yr, &v) in y.iter_mut().zip(col.iter()) {
                *yr += xc * v;
            }
        }
        y
    }

    /// `T_Σ⁻¹ g`.
    pub fn solve_sigma(&self, g: &[C64]) -> Vec<C64> {
        self.t_sigma_factor.solve(g)
    }

    /// `t_h(p, q) = Σ_j q_j^* T_j p_j`.
    pub fn th_inner(&self, p: &MultiTrace, q: &MultiTrace) -> Result<C64> {
        if p.blocks.len() != self.t.len() || !p.same_shape(q) {
            return Err(invalid("multi-trace shapes do not match the impedance"));
        }
        let mut s = C64::new(0.0, 0.0);
        for (j, (pj, qj)) in p.blocks.iter().zip(&q.blocks).enumerate() {
            if pj.len() != self.t[j].nrows() {
                return Err(invalid(format!("block {} length mismatch", j + 1)));
            }
            let tp = self.apply_block(j, pj);
            s += qj.iter().zip(&tp).map(|(a, b)| a.conj() * b).sum::<C64>();
        }
        Ok(s)
    }

    pub fn th_norm(&self, p: &MultiTrace) -> Result<f64> {
        Ok(self.th_inner(p, p)?.re.max(0.0).sqrt())
    }
}

/// `(sqrt λ_min, sqrt λ_max)` of the pencil `(blockdiag T_j, blockdiag S_j)`.
pub fn compute_lambda_bounds(t: &[DMatrix<f64>], schur: &[DMatrix<f64>]) -> Result<(f64, f64)> {
    if t.len() != schur.len() {
        return Err(invalid("block counts differ"));
    }
    let total: usize = t.iter().map(|b| b.nrows()).sum();
    if total > DENSE_CAP {
        return Err(Error::Resource(format!("multi-trace dimension {total} exceeds the dense cap {DENSE_CAP}")));
    }
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (a, b) in t.iter().zip(schur) {
        let (l, h) = dense_sym_generalized_eigs(a, b)?;
        lo = lo.min(l);
        hi = hi.max(h);
    }
    Ok((lo.max(0.0).sqrt(), hi.sqrt()))
}
