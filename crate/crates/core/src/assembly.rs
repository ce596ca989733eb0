//! P1 Galerkin matrices and load vectors of the Helmholtz form
//! `∫ μ∇u·∇v̄ − κ²uv̄ − i∫_∂Ω κuv̄` on the whole mesh or one subdomain.

use crate::error::{invalid, Result};
use crate::linsolve::{BandLu, CsrMatrix, TripletBuilder};
use crate::mesh::{dist, Decomposition, Mesh, Point, SubdomainLayout};
use crate::C64;
use std::sync::Arc;

/// Per-element coefficients, constant on each triangle.
#[derive(Debug, Clone, PartialEq)]
pub struct Material {
    mu: Vec<f64>,
    kappa: Vec<C64>,
    kappa_inf: f64,
}

impl Material {
    pub fn new(mu: Vec<f64>, kappa: Vec<C64>) -> Result<Self> {
        if mu.len() != kappa.len() {
            return Err(invalid("mu and kappa lengths differ"));
        }
        if let Some(t) = mu.iter().position(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(invalid(format!("mu must be positive and finite (element {t})")));
        }
        if let Some(t) = kappa.iter().position(|k| !(k.re >= 0.0 && k.im >= 0.0 && k.norm().is_finite())) {
            return Err(invalid(format!("kappa must have non-negative real and imaginary parts (element {t})")));
        }
        let kappa_inf = kappa.iter().map(|k| k.norm()).fold(1.0, f64::max);
        Ok(Material { mu, kappa, kappa_inf })
    }

    pub fn homogeneous(mesh: &Mesh, mu: f64, kappa: C64) -> Result<Self> {
        Material::new(vec![mu; mesh.num_triangles()], vec![kappa; mesh.num_triangles()])
    }

    /// Coefficients sampled at element centroids.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(Point, i32) -> (f64, C64)) -> Result<Self> {
        let (mu, kappa) =
            (0..mesh.num_triangles()).map(|t| f(mesh.centroid(t), mesh.element_region()[t])).unzip();
        Material::new(mu, kappa)
    }

    /// `μ = 1 + contrast` for centroids within `radius` of the origin, 1 elsewhere.
    pub fn with_inclusion(mesh: &Mesh, kappa: C64, contrast: f64, radius: f64) -> Result<Self> {
        Material::from_fn(mesh, |c, _| {
            let mu = if c[0].hypot(c[1]) <= radius { 1.0 + contrast } else { 1.0 };
            (mu, kappa)
        })
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn kappa(&self) -> &[C64] {
        &self.kappa
    }

    /// `max(1, max |κ|)`.
    pub fn kappa_inf(&self) -> f64 {
        self.kappa_inf
    }
}

pub type BoundaryData = Arc<dyn Fn(Point, Point) -> C64 + Send + Sync>;

/// Right-hand side: per-element constant `f` and boundary data `g(x, n)`
/// with `n` the outward unit normal.
#[derive(Clone)]
pub struct Source {
    pub volume: Vec<C64>,
    pub boundary: Option<BoundaryData>,
}

impl std::fmt::Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Source").field("volume", &self.volume.len()).field("boundary", &self.boundary.is_some()).finish()
    }
}

impl Source {
    pub fn zero(mesh: &Mesh) -> Self {
        Source { volume: vec![C64::new(0.0, 0.0); mesh.num_triangles()], boundary: None }
    }

    pub fn volume(mesh: &Mesh, f: C64) -> Self {
        Source { volume: vec![f; mesh.num_triangles()], boundary: None }
    }

    /// Robin data `(∂_n − iκ) e^{iκx}` of a plane wave travelling along x,
    /// assuming `μ = 1` on the boundary.
    pub fn plane_wave(mesh: &Mesh, kappa: C64) -> Self {
        let i = C64::new(0.0, 1.0);
        let g: BoundaryData = Arc::new(move |x: Point, n: Point| i * kappa * (n[0] - 1.0) * (i * kappa * x[0]).exp());
        Source { volume: vec![C64::new(0.0, 0.0); mesh.num_triangles()], boundary: Some(g) }
    }
}

/// Exact P1 stiffness of a triangle: `(e_a·e_b) / (4|T|)` with `e_a` the
/// edge opposite vertex `a`.
pub fn element_stiffness(p: [Point; 3]) -> [[f64; 3]; 3] {
    let area = crate::mesh::signed_area(p[0], p[1], p[2]);
    let e: Vec<[f64; 2]> =
        (0..3).map(|a| [p[(a + 2) % 3][0] - p[(a + 1) % 3][0], p[(a + 2) % 3][1] - p[(a + 1) % 3][1]]).collect();
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = (e[a][0] * e[b][0] + e[a][1] * e[b][1]) / (4.0 * area);
        }
    }
    k
}

/// Exact P1 mass of a triangle: `|T|/12 · (1 + δ_ab)`.
pub fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let mut m = [[area / 12.0; 3]; 3];
    for (a, row) in m.iter_mut().enumerate() {
        row[a] = area / 6.0;
    }
    m
}

/// P1 mass on a segment of length `len`.
pub fn edge_mass(len: f64) -> [[f64; 2]; 2] {
    [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]]
}

fn outward_normal(p: Point, q: Point) -> Point {
    // boundary edges run with the domain on the left
    let l = dist(p, q);
    [(q[1] - p[1]) / l, -(q[0] - p[0]) / l]
}

/// Volume and physical-boundary contributions over a set of elements and
/// edges, numbered through `index`.
struct Assembler<'a> {
    mesh: &'a Mesh,
    material: &'a Material,
    source: &'a Source,
}

impl<'a> Assembler<'a> {
    fn assemble(
        &self,
        n: usize,
        elements: &[usize],
        robin_edges: impl Iterator<Item = ([usize; 2], usize)>,
        index: impl Fn(usize) -> usize,
    ) -> (CsrMatrix<C64>, Vec<C64>) {
        let mesh = self.mesh;
        let mut tb = TripletBuilder::with_capacity(n, n, 9 * elements.len());
        let mut f = vec![C64::new(0.0, 0.0); n];
        for &t in elements {
            let tri = mesh.triangles()[t];
            let p = tri.map(|v| mesh.nodes()[v]);
            let k = element_stiffness(p);
            let area = mesh.area(t);
            let m = element_mass(area);
            let (mu, kap) = (self.material.mu[t], self.material.kappa[t]);
            let k2 = kap * kap;
            let idx = tri.map(&index);
            for a in 0..3 {
                for b in 0..3 {
                    tb.push(idx[a], idx[b], C64::new(mu * k[a][b], 0.0) - k2 * m[a][b]);
                }
                f[idx[a]] += self.source.volume[t] * (area / 3.0);
            }
        }
        let i = C64::new(0.0, 1.0);
        let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
        for (e, t) in robin_edges {
            let (p, q) = (mesh.nodes()[e[0]], mesh.nodes()[e[1]]);
            let len = dist(p, q);
            let em = edge_mass(len);
            let kap = self.material.kappa[t];
            let idx = e.map(&index);
            for a in 0..2 {
                for b in 0..2 {
                    tb.push(idx[a], idx[b], -i * kap * em[a][b]);
                }
            }
            if let Some(g) = &self.source.boundary {
                let n = outward_normal(p, q);
                for &s in &gauss {
                    let x = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                    let gv = g(x, n) * (0.5 * len);
                    f[idx[0]] += gv * (1.0 - s);
                    f[idx[1]] += gv * s;
                }
            }
        }
        (tb.build(), f)
    }
}

/// Undecomposed system `A u = f`.
#[derive(Debug, Clone)]
pub struct GlobalProblem {
    pub a: CsrMatrix<C64>,
    pub f: Vec<C64>,
}

impl GlobalProblem {
    /// Direct sparse solve.
    pub fn solve(&self) -> Result<Vec<C64>> {
        Ok(BandLu::factor(&self.a)?.solve(&self.f))
    }
}

pub fn assemble_global(mesh: &Mesh, material: &Material, source: &Source) -> Result<GlobalProblem> {
    check_inputs(mesh, material, source)?;
    let asm = Assembler { mesh, material, source };
    let elements: Vec<usize> = (0..mesh.num_triangles()).collect();
    let owners = mesh.boundary_edge_triangles();
    let edges = mesh.boundary_edges().iter().copied().zip(owners);
    let (a, f) = asm.assemble(mesh.num_nodes(), &elements, edges, |v| v);
    Ok(GlobalProblem { a, f })
}

fn check_inputs(mesh: &Mesh, material: &Material, source: &Source) -> Result<()> {
    if material.mu.len() != mesh.num_triangles() {
        return Err(invalid("material does not match the mesh"));
    }
    if source.volume.len() != mesh.num_triangles() {
        return Err(invalid("volume source does not match the mesh"));
    }
    Ok(())
}

/// Local Robin-free system on Ω_j in local volume numbering
/// (global node order restricted to Ω_j). The trace matrix `B_j` is stored
/// as the volume index of each boundary DOF.
#[derive(Debug, Clone)]
pub struct LocalProblem {
    pub a: CsrMatrix<C64>,
    pub f: Vec<C64>,
    pub trace_index: Vec<usize>,
}

impl LocalProblem {
    pub fn num_volume_dofs(&self) -> usize {
        self.f.len()
    }

    pub fn num_boundary_dofs(&self) -> usize {
        self.trace_index.len()
    }

    /// `B_j u`.
    pub fn trace(&self, u: &[C64]) -> Vec<C64> {
        self.trace_index.iter().map(|&k| u[k]).collect()
    }

    /// `B_j^* w`.
    pub fn lift(&self, w: &[C64]) -> Vec<C64> {
        let mut u = vec![C64::new(0.0, 0.0); self.num_volume_dofs()];
        for (&k, &x) in self.trace_index.iter().zip(w) {
            u[k] += x;
        }
        u
    }

    /// `B_j` as an explicit boolean matrix.
    pub fn trace_matrix(&self) -> CsrMatrix<f64> {
        assemble_trace_matrix(self.num_volume_dofs(), &self.trace_index)
    }
}

pub fn assemble_trace_matrix(num_volume: usize, trace_index: &[usize]) -> CsrMatrix<f64> {
    let mut tb = TripletBuilder::with_capacity(trace_index.len(), num_volume, trace_index.len());
    for (r, &c) in trace_index.iter().enumerate() {
        tb.push(r, c, 1.0);
    }
    tb.build()
}

pub fn assemble_local(
    mesh: &Mesh,
    decomposition: &Decomposition,
    j: usize,
    material: &Material,
    source: &Source,
) -> Result<LocalProblem> {
    check_inputs(mesh, material, source)?;
    if j >= decomposition.num_subdomains() {
        return Err(invalid(format!("subdomain {} out of range", j + 1)));
    }
    let layout = decomposition.layout(j);
    if layout.elements.is_empty() {
        return Err(invalid(format!("subdomain {} has no elements", j + 1)));
    }
    let asm = Assembler { mesh, material, source };
    let (a, f) = asm.assemble(layout.num_volume_dofs(), &layout.elements, layout.physical_edges(), |v| {
        layout.local_index(v).expect("node in subdomain")
    });
    Ok(LocalProblem { a, f, trace_index: layout.trace_index.clone() })
}

/// Restricts a global nodal vector to each subdomain.
pub fn restrict_to_subdomains(decomposition: &Decomposition, u: &[C64]) -> Vec<Vec<C64>> {
    decomposition.layouts.iter().map(|l| l.volume_nodes.iter().map(|&v| u[v]).collect()).collect()
}

/// Real SPD matrix of `∫∇u·∇v + w²∫uv` on the elements of one subdomain,
/// in local numbering.
pub fn h1_matrix(mesh: &Mesh, layout: &SubdomainLayout, weight: f64) -> CsrMatrix<f64> {
    let n = layout.num_volume_dofs();
    let mut tb = TripletBuilder::with_capacity(n, n, 9 * layout.elements.len());
    for (&t, idx) in layout.elements.iter().zip(layout.local_triangles(mesh)) {
        let p = mesh.triangles()[t].map(|v| mesh.nodes()[v]);
        let k = element_stiffness(p);
        let m = element_mass(mesh.area(t));
        for a in 0..3 {
            for b in 0..3 {
                tb.push(idx[a], idx[b], k[a][b] + weight * weight * m[a][b]);
            }
        }
    }
    tb.build()
}

fn element_h1_sq(mesh: &Mesh, t: usize, vals: [C64; 3], weight2: f64) -> f64 {
    let p = mesh.triangles()[t].map(|v| mesh.nodes()[v]);
    let k = element_stiffness(p);
    let m = element_mass(mesh.area(t));
    let mut s = 0.0;
    for a in 0..3 {
        for b in 0..3 {
            s += (vals[a].conj() * vals[b]).re * (k[a][b] + weight2 * m[a][b]);
        }
    }
    s
}

/// `sqrt(Σ_j ‖∇u_j‖² + κ_∞²‖u_j‖²)` over the subdomains, exact for P1.
pub fn broken_h1_norm(mesh: &Mesh, decomposition: &Decomposition, material: &Material, u: &[Vec<C64>]) -> Result<f64> {
    if u.len() != decomposition.num_subdomains() {
        return Err(invalid(format!("{} volume vectors for {} subdomains", u.len(), decomposition.num_subdomains())));
    }
    let w2 = material.kappa_inf * material.kappa_inf;
    let mut total = 0.0;
    for (j, (layout, uj)) in decomposition.layouts.iter().zip(u).enumerate() {
        if uj.len() != layout.num_volume_dofs() {
            return Err(invalid(format!(
                "subdomain {} vector has length {}, expected {}",
                j + 1,
                uj.len(),
                layout.num_volume_dofs()
            )));
        }
        for (&t, idx) in layout.elements.iter().zip(layout.local_triangles(mesh)) {
            total += element_h1_sq(mesh, t, idx.map(|k| uj[k]), w2);
        }
    }
    Ok(total.max(0.0).sqrt())
}

/// Broken H1 norm of `u − reference`, with the reference given per subdomain.
pub fn broken_h1_distance(
    mesh: &Mesh,
    decomposition: &Decomposition,
    material: &Material,
    u: &[Vec<C64>],
    reference: &[Vec<C64>],
) -> Result<f64> {
    if u.len() != reference.len() {
        return Err(invalid("volume vector counts differ"));
    }
    let diff: Vec<Vec<C64>> =
        u.iter().zip(reference).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
    broken_h1_norm(mesh, decomposition, material, &diff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_disk_mesh, partition_mesh, Partition, PartitionMethod};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_c(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
        (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
    }

    #[test]
    fn reference_triangle_stiffness() {
        let k = element_stiffness([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let exact = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for a in 0..3 {
            for b in 0..3 {
                assert!((k[a][b] - exact[a][b]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn sign_property_and_symmetry() {
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let p = partition_mesh(&mesh, 3, &PartitionMethod::GraphGrowing).unwrap();
        let d = Decomposition::new(&mesh, &p).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(3.0, 0.5)).unwrap();
        let src = Source::zero(&mesh);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for j in 0..3 {
            let lp = assemble_local(&mesh, &d, j, &mat, &src).unwrap();
            assert!(lp.a.symmetry_defect() <= 1e-14 * lp.a.frobenius_norm());
            for _ in 0..100 {
                let u = rand_c(&mut rng, lp.num_volume_dofs());
                let au = lp.a.mul_vec(&u);
                let q: C64 = u.iter().zip(&au).map(|(x, y)| x.conj() * y).sum();
                let n2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
                assert!(q.im <= 1e-12 * n2);
            }
        }
    }

    #[test]
    fn interior_subdomain_is_real() {
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let p = partition_mesh(&mesh, 2, &PartitionMethod::Onion).unwrap();
        let d = Decomposition::new(&mesh, &p).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(2.0, 0.0)).unwrap();
        let lp = assemble_local(&mesh, &d, 0, &mat, &Source::zero(&mesh)).unwrap();
        assert!(lp.a.triplets().all(|(_, _, v)| v.im == 0.0));
    }

    #[test]
    fn subassembly_matches_global() {
        let mesh = generate_disk_mesh(1.0, 0.2).unwrap();
        let p = partition_mesh(&mesh, 4, &PartitionMethod::GraphGrowing).unwrap();
        let d = Decomposition::new(&mesh, &p).unwrap();
        let mat = Material::with_inclusion(&mesh, C64::new(2.0, 0.1), 3.0, 0.5).unwrap();
        let src = Source::plane_wave(&mesh, C64::new(2.0, 0.0));
        let g = assemble_global(&mesh, &mat, &src).unwrap();
        let mut tb = TripletBuilder::new(mesh.num_nodes(), mesh.num_nodes());
        let mut f = vec![C64::new(0.0, 0.0); mesh.num_nodes()];
        for j in 0..4 {
            let lp = assemble_local(&mesh, &d, j, &mat, &src).unwrap();
            let nodes = &d.layout(j).volume_nodes;
            for (r, c, v) in lp.a.triplets() {
                tb.push(nodes[r], nodes[c], v);
            }
            for (k, &v) in lp.f.iter().enumerate() {
                f[nodes[k]] += v;
            }
        }
        let sum = tb.build();
        let scale = g.a.frobenius_norm();
        for (r, c, v) in g.a.triplets() {
            assert!((sum.get(r, c) - v).norm() <= 1e-14 * scale);
        }
        assert_eq!(sum.nnz(), g.a.nnz());
        for (x, y) in f.iter().zip(&g.f) {
            assert!((x - y).norm() <= 1e-14 * (1.0 + y.norm()));
        }
    }

    #[test]
    fn single_subdomain_permutation_consistency() {
        let mesh = generate_disk_mesh(1.0, 0.25).unwrap();
        let d = Decomposition::new(&mesh, &Partition::single(&mesh)).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(1.5, 0.0)).unwrap();
        let src = Source::plane_wave(&mesh, C64::new(1.5, 0.0));
        let g = assemble_global(&mesh, &mat, &src).unwrap();
        let lp = assemble_local(&mesh, &d, 0, &mat, &src).unwrap();
        assert_eq!(lp.a, g.a);
        assert_eq!(lp.f, g.f);
    }

    #[test]
    fn trace_selects_boundary() {
        let mesh = generate_disk_mesh(1.0, 0.25).unwrap();
        let d = Decomposition::new(&mesh, &Partition::single(&mesh)).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(1.0, 0.0)).unwrap();
        let lp = assemble_local(&mesh, &d, 0, &mat, &Source::zero(&mesh)).unwrap();
        let b = lp.trace_matrix();
        let bbt = {
            let bt = b.transpose();
            let dense_b = b.to_dense();
            let dense_bt = bt.to_dense();
            let n = b.nrows();
            let mut out = vec![vec![0.0; n]; n];
            for i in 0..n {
                for k in 0..b.ncols() {
                    if dense_b[i][k] != 0.0 {
                        for j in 0..n {
                            out[i][j] += dense_b[i][k] * dense_bt[k][j];
                        }
                    }
                }
            }
            out
        };
        for (i, row) in bbt.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                assert_eq!(v, if i == j { 1.0 } else { 0.0 });
            }
        }
        assert_eq!(lp.num_boundary_dofs(), mesh.boundary_node_mask().iter().filter(|&&m| m).count());
    }

    #[test]
    fn h1_norms_of_constant_and_linear() {
        let mesh = generate_disk_mesh(1.0, 0.1).unwrap();
        let p = partition_mesh(&mesh, 3, &PartitionMethod::CoordinateBisection).unwrap();
        let d = Decomposition::new(&mesh, &p).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(0.5, 0.0)).unwrap();
        let area: f64 = (0..mesh.num_triangles()).map(|t| mesh.area(t)).sum();
        let ones: Vec<Vec<C64>> = d.layouts.iter().map(|l| vec![C64::new(1.0, 0.0); l.num_volume_dofs()]).collect();
        let n1 = broken_h1_norm(&mesh, &d, &mat, &ones).unwrap();
        assert!((n1 * n1 - area).abs() < 1e-12 * area);
        assert!((n1 * n1 - std::f64::consts::PI).abs() < 0.02 * std::f64::consts::PI);

        // ∫x² over each triangle: |T|/6 (x_a² + x_b² + x_c² + x_a x_b + x_b x_c + x_c x_a)
        let xs: Vec<Vec<C64>> = d
            .layouts
            .iter()
            .map(|l| l.volume_nodes.iter().map(|&v| C64::new(mesh.nodes()[v][0], 0.0)).collect())
            .collect();
        let mut x2 = 0.0;
        for t in 0..mesh.num_triangles() {
            let x = mesh.triangles()[t].map(|v| mesh.nodes()[v][0]);
            x2 += mesh.area(t) / 6.0 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2] + x[0] * x[1] + x[1] * x[2] + x[2] * x[0]);
        }
        let nx = broken_h1_norm(&mesh, &d, &mat, &xs).unwrap();
        assert!((nx * nx - (area + x2)).abs() < 1e-12 * (area + x2));
        let zero: Vec<Vec<C64>> = d.layouts.iter().map(|l| vec![C64::new(0.0, 0.0); l.num_volume_dofs()]).collect();
        assert_eq!(broken_h1_norm(&mesh, &d, &mat, &zero).unwrap(), 0.0);
        assert!(broken_h1_norm(&mesh, &d, &mat, &zero[..2]).is_err());
    }

    #[test]
    fn absorbing_problem_positive() {
        // κ = i makes −κ² = +1, a coercive reaction term
        let mesh = generate_disk_mesh(1.0, 0.1).unwrap();
        let mat = Material::homogeneous(&mesh, 1.0, C64::new(0.0, 1.0)).unwrap();
        let g = assemble_global(&mesh, &mat, &Source::volume(&mesh, C64::new(1.0, 0.0))).unwrap();
        let u = g.solve().unwrap();
        let mask = mesh.boundary_node_mask();
        for (v, x) in u.iter().enumerate() {
            if !mask[v] {
                assert!(x.re > 0.0);
            }
        }
    }

    #[test]
    fn plane_wave_converges_under_refinement() {
        let kappa = C64::new(2.0, 0.0);
        let mut errs = Vec::new();
        for h in [0.2, 0.1, 0.05] {
            let mesh = generate_disk_mesh(1.0, h).unwrap();
            let mat = Material::homogeneous(&mesh, 1.0, kappa).unwrap();
            let g = assemble_global(&mesh, &mat, &Source::plane_wave(&mesh, kappa)).unwrap();
            let u = g.solve().unwrap();
            let d = Decomposition::new(&mesh, &Partition::single(&mesh)).unwrap();
            let exact: Vec<C64> =
                mesh.nodes().iter().map(|p| (C64::new(0.0, 1.0) * kappa * p[0]).exp()).collect();
            let e = broken_h1_distance(&mesh, &d, &mat, &[u], &[exact.clone()]).unwrap();
            let n = broken_h1_norm(&mesh, &d, &mat, &[exact]).unwrap();
            errs.push(e / n);
        }
        assert!(errs[2] < 0.6 * errs[1] && errs[1] < 0.6 * errs[0], "{errs:?}");
        assert!(errs[2] < 0.05);
    }
}
