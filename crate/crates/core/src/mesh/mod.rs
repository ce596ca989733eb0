//! Conforming 2D triangulations, partitions into subdomains and cross-point
//! detection.

mod msh;
mod partition;
mod subdomain;

pub use msh::{read_msh, read_msh_with_report, write_msh, MshReport};
pub use partition::{
    detect_cross_points, partition_mesh, read_owner_file, write_owner_file, CrossPointReport, Partition,
    PartitionMethod,
};
pub use subdomain::{Decomposition, SubdomainLayout};

use crate::error::{invalid, Error, Result};
use std::collections::HashMap;
use std::f64::consts::PI;

pub type Point = [f64; 2];

/// Node count above which mesh generation refuses to run.
pub const DEFAULT_NODE_CAP: usize = 2_000_000;

/// Conforming triangulation of a polygonal domain.
///
/// Triangles are counter-clockwise. `boundary_edges` holds every edge
/// used by exactly one triangle, oriented as in that triangle, so the
/// boundary is traversed with the domain on the left.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary_edges: Vec<[usize; 2]>,
    element_region: Vec<i32>,
}

pub fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b { (a, b) } else { (b, a) }
}

impl Mesh {
    /// Builds and validates a mesh. Triangles must be counter-clockwise and
    /// non-degenerate, every node must be used, and the triangulation must be
    /// conforming (no edge shared by more than two triangles, consistent
    /// orientation across shared edges, no hanging nodes on the boundary).
    pub fn new(nodes: Vec<Point>, triangles: Vec<[usize; 3]>, element_region: Vec<i32>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(invalid("mesh has no triangles"));
        }
        if element_region.len() != triangles.len() {
            return Err(invalid("element_region length differs from triangle count"));
        }
        let mut used = vec![false; nodes.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nodes.len() {
                    return Err(invalid(format!("triangle {t} references missing node {v}")));
                }
                used[v] = true;
            }
            let area = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(area > 0.0) {
                return Err(invalid(format!("triangle {t} has non-positive signed area {area:e}")));
            }
        }
        if let Some(v) = used.iter().position(|u| !u) {
            return Err(invalid(format!("node {v} is not used by any triangle")));
        }

        let mut edges: HashMap<(usize, usize), (usize, [usize; 2])> = HashMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = edges.entry(edge_key(a, b)).or_insert((0, [a, b]));
                e.0 += 1;
                if e.0 == 2 && e.1 == [a, b] {
                    return Err(invalid(format!("inconsistent orientation across edge ({a}, {b})")));
                }
                if e.0 > 2 {
                    return Err(invalid(format!("edge ({a}, {b}) shared by more than two triangles")));
                }
            }
        }
        let mut boundary_edges: Vec<[usize; 2]> =
            edges.values().filter(|(count, _)| *count == 1).map(|(_, e)| *e).collect();
        boundary_edges.sort_unstable_by_key(|e| edge_key(e[0], e[1]));

        let mesh = Mesh { nodes, triangles, boundary_edges, element_region };
        mesh.check_hanging_nodes()?;
        Ok(mesh)
    }

    fn check_hanging_nodes(&self) -> Result<()> {
        let mut bnodes: Vec<usize> = self.boundary_edges.iter().flatten().copied().collect();
        bnodes.sort_unstable();
        bnodes.dedup();
        for e in &self.boundary_edges {
            let (p, q) = (self.nodes[e[0]], self.nodes[e[1]]);
            let len2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            for &v in &bnodes {
                if v == e[0] || v == e[1] {
                    continue;
                }
                let x = self.nodes[v];
                let t = ((x[0] - p[0]) * (q[0] - p[0]) + (x[1] - p[1]) * (q[1] - p[1])) / len2;
                if t <= 1e-9 || t >= 1.0 - 1e-9 {
                    continue;
                }
                let cross = (x[0] - p[0]) * (q[1] - p[1]) - (x[1] - p[1]) * (q[0] - p[0]);
                if cross.abs() <= 1e-10 * len2 {
                    return Err(invalid(format!("hanging node {v} on edge ({}, {})", e[0], e[1])));
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_edges(&self) -> &[[usize; 2]] {
        &self.boundary_edges
    }

    pub fn element_region(&self) -> &[i32] {
        &self.element_region
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        signed_area(self.nodes[a], self.nodes[b], self.nodes[c])
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.nodes[a], self.nodes[b], self.nodes[c]);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Flags for nodes lying on the physical boundary.
    pub fn boundary_node_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        for e in &self.boundary_edges {
            mask[e[0]] = true;
            mask[e[1]] = true;
        }
        mask
    }

    /// Number of distinct edges.
    pub fn num_edges(&self) -> usize {
        let mut keys: Vec<(usize, usize)> = self
            .triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| edge_key(t[k], t[(k + 1) % 3])))
            .collect();
        keys.sort_unstable();
        keys.dedup();
        keys.len()
    }

    pub fn max_edge_length(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| dist(self.nodes[a], self.nodes[b]))
            .fold(0.0, f64::max)
    }

    /// Triangles sharing an edge with each triangle, sorted.
    pub fn element_adjacency(&self) -> Vec<Vec<usize>> {
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                by_edge.entry(edge_key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
            }
        }
        let mut adj = vec![Vec::new(); self.triangles.len()];
        for ts in by_edge.values() {
            if let [a, b] = ts[..] {
                adj[a].push(b);
                adj[b].push(a);
            }
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    /// Index of the triangle owning each boundary edge.
    pub fn boundary_edge_triangles(&self) -> Vec<usize> {
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                lookup.insert((tri[k], tri[(k + 1) % 3]), t);
            }
        }
        self.boundary_edges.iter().map(|e| lookup[&(e[0], e[1])]).collect()
    }
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Concentric-ring triangulation of the disk of the given radius centred at
/// the origin: rings at radius `i R / n` with `n = ceil(R / h)`, ring `i`
/// carrying `ceil(2π i)` equispaced nodes, consecutive rings stitched by an
/// angular sweep.
pub fn generate_disk_mesh(radius: f64, target_h: f64) -> Result<Mesh> {
    generate_disk_mesh_capped(radius, target_h, DEFAULT_NODE_CAP)
}

pub fn generate_disk_mesh_capped(radius: f64, target_h: f64, node_cap: usize) -> Result<Mesh> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    if !(target_h > 0.0 && target_h < radius) {
        return Err(invalid(format!("target_h must lie in (0, radius), got {target_h}")));
    }
    let rings = (radius / target_h).ceil() as usize;
    let ring_size = |i: usize| -> usize { if i == 0 { 1 } else { (2.0 * PI * i as f64).ceil() as usize } };
    let estimate: usize = (0..=rings).map(ring_size).sum();
    if estimate > node_cap {
        return Err(Error::Resource(format!("disk mesh needs {estimate} nodes, cap is {node_cap}")));
    }

    let mut nodes: Vec<Point> = Vec::with_capacity(estimate);
    let mut ring_start = Vec::with_capacity(rings + 1);
    for i in 0..=rings {
        ring_start.push(nodes.len());
        let m = ring_size(i);
        let r = radius * i as f64 / rings as f64;
        for k in 0..m {
            let theta = 2.0 * PI * k as f64 / m as f64;
            nodes.push([r * theta.cos(), r * theta.sin()]);
        }
    }

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for i in 1..=rings {
        let (m_in, m_out) = (ring_size(i - 1), ring_size(i));
        let inner = |a: usize| ring_start[i - 1] + a % m_in;
        let outer = |b: usize| ring_start[i] + b % m_out;
        let (mut a, mut b) = (0usize, 0usize);
        let a_end = if m_in == 1 { 0 } else { m_in };
        while a < a_end || b < m_out {
            // close the strip with the shorter of the two candidate diagonals
            let advance_outer = b < m_out
                && (a >= a_end || dist(nodes[inner(a)], nodes[outer(b + 1)]) <= dist(nodes[inner(a + 1)], nodes[outer(b)]));
            if advance_outer {
                triangles.push([inner(a), outer(b), outer(b + 1)]);
                b += 1;
            } else {
                triangles.push([inner(a), outer(b), inner(a + 1)]);
                a += 1;
            }
        }
    }
    for t in &mut triangles {
        if signed_area(nodes[t[0]], nodes[t[1]], nodes[t[2]]) < 0.0 {
            t.swap(1, 2);
        }
    }
    let regions = vec![0; triangles.len()];
    Mesh::new(nodes, triangles, regions)
}

/// Two-triangle unit square `[0,1]^2`, refined `n` times per side.
pub fn generate_square_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(invalid("square mesh needs n >= 1"));
    }
    let h = 1.0 / n as f64;
    let mut nodes = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            nodes.push([i as f64 * h, j as f64 * h]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::new();
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    let regions = vec![0; triangles.len()];
    Mesh::new(nodes, triangles, regions)
}
