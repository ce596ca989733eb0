//! Skeleton numbering Σ = ∪Γ_j, the injections `Q_j`, multi-trace vectors and
//! the classical swap of traces across interfaces.

use crate::error::{invalid, Error, Result};
use crate::linsolve::{CsrMatrix, TripletBuilder};
use crate::mesh::{detect_cross_points, Decomposition, Mesh, Partition};
use crate::C64;
use rand::Rng;
use std::ops::{Add, Mul, Sub};

/// Global numbering of the nodes lying on Σ and their local images.
///
/// Skeleton DOFs follow global node order. `Q_j` maps skeleton vectors to
/// Γ_j: `(Q_j v)_l = v[skeleton_index[j][l]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonMap {
    nodes: Vec<usize>,
    skeleton_index: Vec<Vec<usize>>,
    images: Vec<Vec<(usize, usize)>>,
}

pub fn build_skeleton_map(decomposition: &Decomposition) -> SkeletonMap {
    let mut nodes: Vec<usize> =
        decomposition.layouts.iter().flat_map(|l| l.boundary_nodes.iter().copied()).collect();
    nodes.sort_unstable();
    nodes.dedup();
    let mut images = vec![Vec::new(); nodes.len()];
    let skeleton_index = decomposition
        .layouts
        .iter()
        .enumerate()
        .map(|(j, l)| {
            l.boundary_nodes
                .iter()
                .enumerate()
                .map(|(local, v)| {
                    let k = nodes.binary_search(v).unwrap();
                    images[k].push((j, local));
                    k
                })
                .collect()
        })
        .collect();
    SkeletonMap { nodes, skeleton_index, images }
}

impl SkeletonMap {
    pub fn num_skeleton_dofs(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_subdomains(&self) -> usize {
        self.skeleton_index.len()
    }

    /// Mesh node of each skeleton DOF.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn block_size(&self, j: usize) -> usize {
        self.skeleton_index[j].len()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.skeleton_index.iter().map(Vec::len).collect()
    }

    pub fn total_trace_dofs(&self) -> usize {
        self.skeleton_index.iter().map(Vec::len).sum()
    }

    /// Skeleton DOF of each local boundary DOF of Γ_j.
    pub fn skeleton_index(&self, j: usize) -> &[usize] {
        &self.skeleton_index[j]
    }

    /// `(subdomain, local boundary DOF)` images of skeleton DOF `k`.
    pub fn images(&self, k: usize) -> &[(usize, usize)] {
        &self.images[k]
    }

    /// Local boundary DOF of skeleton DOF `k` in Γ_j, if any.
    pub fn local_of(&self, k: usize, j: usize) -> Option<usize> {
        self.images[k].iter().find(|(s, _)| *s == j).map(|&(_, l)| l)
    }

    pub fn multiplicity(&self) -> Vec<usize> {
        self.images.iter().map(Vec::len).collect()
    }

    /// `Q_j v`.
    pub fn restrict(&self, j: usize, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.num_skeleton_dofs() {
            return Err(invalid(format!("skeleton vector length {} != {}", v.len(), self.num_skeleton_dofs())));
        }
        Ok(self.skeleton_index[j].iter().map(|&k| v[k]).collect())
    }

    /// `Q_j^* w`.
    pub fn inject_adjoint(&self, j: usize, w: &[C64]) -> Result<Vec<C64>> {
        let mut out = vec![C64::new(0.0, 0.0); self.num_skeleton_dofs()];
        self.add_adjoint(j, w, &mut out)?;
        Ok(out)
    }

    /// `acc += Q_j^* w`.
    pub fn add_adjoint(&self, j: usize, w: &[C64], acc: &mut [C64]) -> Result<()> {
        if w.len() != self.block_size(j) || acc.len() != self.num_skeleton_dofs() {
            return Err(invalid(format!("block {} length mismatch", j + 1)));
        }
        for (&k, &x) in self.skeleton_index[j].iter().zip(w) {
            acc[k] += x;
        }
        Ok(())
    }

    /// `Q_j` as an explicit boolean `N(Γ_j) × N(Σ)` matrix.
    pub fn q_matrix(&self, j: usize) -> CsrMatrix<f64> {
        let idx = &self.skeleton_index[j];
        let mut tb = TripletBuilder::with_capacity(idx.len(), self.num_skeleton_dofs(), idx.len());
        for (l, &k) in idx.iter().enumerate() {
            tb.push(l, k, 1.0);
        }
        tb.build()
    }

    /// The multi-trace `(Q_1 v, …, Q_J v)` of a skeleton vector.
    pub fn spread(&self, v: &[C64]) -> Result<MultiTrace> {
        let blocks = (0..self.num_subdomains()).map(|j| self.restrict(j, v)).collect::<Result<_>>()?;
        Ok(MultiTrace { blocks })
    }

    /// Largest disagreement between images of one skeleton DOF.
    pub fn single_trace_defect(&self, w: &MultiTrace) -> f64 {
        self.images
            .iter()
            .map(|imgs| {
                let (j0, l0) = imgs[0];
                let first = w.blocks[j0][l0];
                imgs[1..].iter().map(|&(j, l)| (w.blocks[j][l] - first).norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

/// Element of `V_h(Γ_1) × ⋯ × V_h(Γ_J)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiTrace {
    pub blocks: Vec<Vec<C64>>,
}

impl MultiTrace {
    pub fn zeros(map: &SkeletonMap) -> Self {
        MultiTrace { blocks: map.block_sizes().into_iter().map(|n| vec![C64::new(0.0, 0.0); n]).collect() }
    }

    pub fn random(map: &SkeletonMap, rng: &mut impl Rng) -> Self {
        let blocks = map
            .block_sizes()
            .into_iter()
            .map(|n| (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
            .collect();
        MultiTrace { blocks }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flatten(&self) -> Vec<C64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn from_flat(map: &SkeletonMap, flat: &[C64]) -> Result<Self> {
        if flat.len() != map.total_trace_dofs() {
            return Err(invalid(format!("flat vector length {} != {}", flat.len(), map.total_trace_dofs())));
        }
        let mut offset = 0;
        let blocks = map
            .block_sizes()
            .into_iter()
            .map(|n| {
                let b = flat[offset..offset + n].to_vec();
                offset += n;
                b
            })
            .collect();
        Ok(MultiTrace { blocks })
    }

    pub fn same_shape(&self, other: &MultiTrace) -> bool {
        self.blocks.len() == other.blocks.len() && self.blocks.iter().zip(&other.blocks).all(|(a, b)| a.len() == b.len())
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: C64, other: &MultiTrace) {
        assert!(self.same_shape(other), "multi-trace shape mismatch");
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += alpha * y;
            }
        }
    }

    pub fn scaled(&self, alpha: C64) -> MultiTrace {
        MultiTrace { blocks: self.blocks.iter().map(|b| b.iter().map(|x| alpha * x).collect()).collect() }
    }

    /// Euclidean norm of the concatenated blocks.
    pub fn euclidean_norm(&self) -> f64 {
        self.blocks.iter().flatten().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add for &MultiTrace {
    type Output = MultiTrace;
    fn add(self, rhs: &MultiTrace) -> MultiTrace {
        let mut out = self.clone();
        out.axpy(C64::new(1.0, 0.0), rhs);
        out
    }
}

impl Sub for &MultiTrace {
    type Output = MultiTrace;
    fn sub(self, rhs: &MultiTrace) -> MultiTrace {
        let mut out = self.clone();
        out.axpy(C64::new(-1.0, 0.0), rhs);
        out
    }
}

impl Mul<C64> for &MultiTrace {
    type Output = MultiTrace;
    fn mul(self, rhs: C64) -> MultiTrace {
        self.scaled(rhs)
    }
}

/// Twin of every boundary DOF for the classical exchange: interface DOFs
/// point to the image of the same node in the neighbouring subdomain,
/// DOFs on ∂Ω point to themselves.
#[derive(Debug, Clone)]
pub struct InterfacePairing {
    source: Vec<Vec<(usize, usize)>>,
}

impl InterfacePairing {
    /// Fails with a precondition error when three subdomains meet at a node
    /// or two meet on ∂Ω.
    pub fn new(mesh: &Mesh, partition: &Partition, map: &SkeletonMap) -> Result<Self> {
        let report = detect_cross_points(mesh, partition);
        if !report.is_empty() {
            return Err(Error::Precondition(format!(
                "trace swap undefined with cross-points ({} interior, {} on the boundary)",
                report.interior_cross_points.len(),
                report.boundary_cross_points.len()
            )));
        }
        let mut source: Vec<Vec<(usize, usize)>> =
            map.block_sizes().into_iter().map(|n| vec![(usize::MAX, 0); n]).collect();
        for k in 0..map.num_skeleton_dofs() {
            match *map.images(k) {
                [(j, l)] => source[j][l] = (j, l),
                [(j, l), (i, m)] => {
                    source[j][l] = (i, m);
                    source[i][m] = (j, l);
                }
                _ => {
                    return Err(Error::Precondition(format!("node {} shared by three or more subdomains", map.nodes()[k])))
                }
            }
        }
        Ok(InterfacePairing { source })
    }

    /// `X(w)`: each interface value replaced by its twin's.
    pub fn swap_apply(&self, w: &MultiTrace) -> Result<MultiTrace> {
        if w.blocks.len() != self.source.len() || w.blocks.iter().zip(&self.source).any(|(a, b)| a.len() != b.len()) {
            return Err(invalid("multi-trace shape does not match the pairing"));
        }
        let blocks = self.source.iter().map(|src| src.iter().map(|&(j, l)| w.blocks[j][l]).collect()).collect();
        Ok(MultiTrace { blocks })
    }
}
