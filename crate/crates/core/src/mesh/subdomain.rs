//! Per-subdomain node sets and boundary curves derived from a partition.

use super::{Mesh, Partition};
use crate::error::{invalid, Result};
use std::collections::HashMap;

/// Geometry of one subdomain Ω_j: owned triangles, volume nodes and the
/// closed boundary curve ∂Ω_j (interface and physical parts).
///
/// All node lists hold global node ids in increasing order, which fixes the
/// local numbering.
#[derive(Debug, Clone)]
pub struct SubdomainLayout {
    pub elements: Vec<usize>,
    pub volume_nodes: Vec<usize>,
    pub boundary_nodes: Vec<usize>,
    /// Edges of ∂Ω_j as global node pairs, oriented as in their triangle.
    pub boundary_edges: Vec<[usize; 2]>,
    /// Flags `boundary_edges` that also lie on ∂Ω.
    pub physical_edge: Vec<bool>,
    /// Owned triangle containing each boundary edge.
    pub edge_triangle: Vec<usize>,
    /// Local volume index of each boundary node.
    pub trace_index: Vec<usize>,
}

impl SubdomainLayout {
    pub fn num_volume_dofs(&self) -> usize {
        self.volume_nodes.len()
    }

    pub fn num_boundary_dofs(&self) -> usize {
        self.boundary_nodes.len()
    }

    pub fn local_index(&self, global: usize) -> Option<usize> {
        self.volume_nodes.binary_search(&global).ok()
    }

    pub fn boundary_index(&self, global: usize) -> Option<usize> {
        self.boundary_nodes.binary_search(&global).ok()
    }

    /// Owned triangles in local volume numbering.
    pub fn local_triangles(&self, mesh: &Mesh) -> Vec<[usize; 3]> {
        self.elements
            .iter()
            .map(|&t| {
                let tri = mesh.triangles()[t];
                tri.map(|v| self.local_index(v).expect("triangle node in subdomain"))
            })
            .collect()
    }

    /// Boundary edges in local boundary numbering.
    pub fn local_boundary_edges(&self) -> Vec<[usize; 2]> {
        self.boundary_edges.iter().map(|e| e.map(|v| self.boundary_index(v).unwrap())).collect()
    }

    /// Edges on ∂Ω with their owning triangle.
    pub fn physical_edges(&self) -> impl Iterator<Item = ([usize; 2], usize)> + '_ {
        (0..self.boundary_edges.len())
            .filter(|&k| self.physical_edge[k])
            .map(|k| (self.boundary_edges[k], self.edge_triangle[k]))
    }
}

#[derive(Debug, Clone)]
pub struct Decomposition {
    pub layouts: Vec<SubdomainLayout>,
}

impl Decomposition {
    pub fn new(mesh: &Mesh, partition: &Partition) -> Result<Self> {
        if partition.element_owner().len() != mesh.num_triangles() {
            return Err(invalid("partition does not match the mesh"));
        }
        let nsub = partition.num_subdomains();
        let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in mesh.triangles().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                edge_tris.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }

        let mut elements = vec![Vec::new(); nsub];
        for t in 0..mesh.num_triangles() {
            elements[partition.owner(t)].push(t);
        }
        let layouts = elements
            .into_iter()
            .enumerate()
            .map(|(j, elems)| {
                let mut volume_nodes: Vec<usize> = elems.iter().flat_map(|&t| mesh.triangles()[t]).collect();
                volume_nodes.sort_unstable();
                volume_nodes.dedup();
                let mut edges: Vec<([usize; 2], bool, usize)> = Vec::new();
                for &t in &elems {
                    let tri = mesh.triangles()[t];
                    for k in 0..3 {
                        let (a, b) = (tri[k], tri[(k + 1) % 3]);
                        let ts = &edge_tris[&(a.min(b), a.max(b))];
                        if ts.len() == 1 {
                            edges.push(([a, b], true, t));
                        } else if ts.iter().any(|&s| partition.owner(s) != j) {
                            edges.push(([a, b], false, t));
                        }
                    }
                }
                edges.sort_unstable_by_key(|(e, _, _)| (e[0].min(e[1]), e[0].max(e[1])));
                let mut boundary_nodes: Vec<usize> = edges.iter().flat_map(|(e, _, _)| *e).collect();
                boundary_nodes.sort_unstable();
                boundary_nodes.dedup();
                let trace_index =
                    boundary_nodes.iter().map(|v| volume_nodes.binary_search(v).unwrap()).collect();
                SubdomainLayout {
                    elements: elems,
                    volume_nodes,
                    boundary_nodes,
                    boundary_edges: edges.iter().map(|(e, _, _)| *e).collect(),
                    physical_edge: edges.iter().map(|(_, p, _)| *p).collect(),
                    edge_triangle: edges.iter().map(|(_, _, t)| *t).collect(),
                    trace_index,
                }
            })
            .collect();
        Ok(Decomposition { layouts })
    }

    pub fn num_subdomains(&self) -> usize {
        self.layouts.len()
    }

    pub fn layout(&self, j: usize) -> &SubdomainLayout {
        &self.layouts[j]
    }
}
