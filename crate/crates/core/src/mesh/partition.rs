//! Element partitions, partitioners and cross-point detection.

use super::Mesh;
use crate::error::{invalid, Error, Result};
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Assignment of every triangle to one of `J` subdomains.
///
/// Owners are stored 0-based; the owner file format is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    num_subdomains: usize,
    element_owner: Vec<usize>,
}

impl Partition {
    /// Validates that every owner is below `num_subdomains` and that every
    /// subdomain owns at least one triangle.
    pub fn new(num_subdomains: usize, element_owner: Vec<usize>) -> Result<Self> {
        if num_subdomains == 0 {
            return Err(invalid("number of subdomains must be positive"));
        }
        let mut counts = vec![0usize; num_subdomains];
        for (t, &o) in element_owner.iter().enumerate() {
            if o >= num_subdomains {
                return Err(invalid(format!("triangle {t} owned by subdomain {} of {num_subdomains}", o + 1)));
            }
            counts[o] += 1;
        }
        if let Some(j) = counts.iter().position(|&c| c == 0) {
            return Err(invalid(format!("subdomain {} owns no triangle", j + 1)));
        }
        Ok(Partition { num_subdomains, element_owner })
    }

    pub fn single(mesh: &Mesh) -> Self {
        Partition { num_subdomains: 1, element_owner: vec![0; mesh.num_triangles()] }
    }

    pub fn num_subdomains(&self) -> usize {
        self.num_subdomains
    }

    pub fn element_owner(&self) -> &[usize] {
        &self.element_owner
    }

    pub fn owner(&self, t: usize) -> usize {
        self.element_owner[t]
    }

    pub fn subdomain_sizes(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.num_subdomains];
        for &o in &self.element_owner {
            counts[o] += 1;
        }
        counts
    }

    fn check_mesh(&self, mesh: &Mesh) -> Result<()> {
        if self.element_owner.len() != mesh.num_triangles() {
            return Err(invalid(format!(
                "partition covers {} triangles, mesh has {}",
                self.element_owner.len(),
                mesh.num_triangles()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartitionMethod {
    GraphGrowing,
    CoordinateBisection,
    Onion,
    FromFile(PathBuf),
}

impl std::str::FromStr for PartitionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph-growing" | "graph" => Ok(PartitionMethod::GraphGrowing),
            "coordinate-bisection" | "rcb" => Ok(PartitionMethod::CoordinateBisection),
            "onion" => Ok(PartitionMethod::Onion),
            _ => match s.strip_prefix("file:") {
                Some(p) => Ok(PartitionMethod::FromFile(PathBuf::from(p))),
                None => Err(invalid(format!("unknown partition method `{s}`"))),
            },
        }
    }
}

impl std::fmt::Display for PartitionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PartitionMethod::GraphGrowing => f.write_str("graph-growing"),
            PartitionMethod::CoordinateBisection => f.write_str("coordinate-bisection"),
            PartitionMethod::Onion => f.write_str("onion"),
            PartitionMethod::FromFile(p) => write!(f, "file:{}", p.display()),
        }
    }
}

pub fn partition_mesh(mesh: &Mesh, num_subdomains: usize, method: &PartitionMethod) -> Result<Partition> {
    let n = mesh.num_triangles();
    if num_subdomains == 0 {
        return Err(invalid("number of subdomains must be positive"));
    }
    if num_subdomains > n {
        return Err(invalid(format!("{num_subdomains} subdomains requested for {n} triangles")));
    }
    let part = match method {
        PartitionMethod::GraphGrowing => graph_growing(mesh, num_subdomains),
        PartitionMethod::CoordinateBisection => coordinate_bisection(mesh, num_subdomains),
        PartitionMethod::Onion => onion(mesh, num_subdomains)?,
        PartitionMethod::FromFile(path) => {
            let p = read_owner_file(path)?;
            if p.num_subdomains() != num_subdomains {
                return Err(invalid(format!(
                    "owner file defines {} subdomains, {num_subdomains} requested",
                    p.num_subdomains()
                )));
            }
            p
        }
    };
    part.check_mesh(mesh)?;
    Ok(part)
}

/// Recursive greedy graph growing: each split grows a BFS region from a
/// pseudo-peripheral element of the current set until it holds its share
/// of the elements, then both halves are split again.
fn graph_growing(mesh: &Mesh, num_subdomains: usize) -> Partition {
    let adj = mesh.element_adjacency();
    let mut owner = vec![0usize; mesh.num_triangles()];
    let elems: Vec<usize> = (0..mesh.num_triangles()).collect();
    let mut mark = vec![usize::MAX; mesh.num_triangles()];
    grow_split(&adj, elems, 0, num_subdomains, &mut owner, &mut mark);
    Partition { num_subdomains, element_owner: owner }
}

/// BFS restricted to elements with `mark == tag`, from `start`; returns the
/// visit order.
fn restricted_bfs(adj: &[Vec<usize>], start: usize, tag: usize, mark: &[usize]) -> Vec<usize> {
    let mut seen = vec![start];
    let mut visited = std::collections::HashSet::from([start]);
    let mut head = 0;
    while head < seen.len() {
        let v = seen[head];
        head += 1;
        for &w in &adj[v] {
            if mark[w] == tag && visited.insert(w) {
                seen.push(w);
            }
        }
    }
    seen
}

fn grow_split(adj: &[Vec<usize>], elems: Vec<usize>, first: usize, parts: usize, owner: &mut [usize], mark: &mut [usize]) {
    if parts == 1 {
        for &t in &elems {
            owner[t] = first;
        }
        return;
    }
    let tag = first;
    for &t in &elems {
        mark[t] = tag;
    }
    // pseudo-peripheral seed: farthest element from the farthest element of elems[0]
    let order = restricted_bfs(adj, elems[0], tag, mark);
    let seed = *restricted_bfs(adj, *order.last().unwrap(), tag, mark).last().unwrap();

    let left_parts = parts / 2;
    let want = elems.len() * left_parts / parts;
    let mut left = Vec::with_capacity(want);
    let grown = tag + usize::MAX / 2;
    let mut queue = VecDeque::from([seed]);
    mark[seed] = grown;
    let mut next_unvisited = 0;
    while left.len() < want {
        let v = match queue.pop_front() {
            Some(v) => v,
            None => {
                // current component exhausted: restart from the next free element
                while mark[elems[next_unvisited]] != tag {
                    next_unvisited += 1;
                }
                let v = elems[next_unvisited];
                mark[v] = grown;
                v
            }
        };
        left.push(v);
        for &w in &adj[v] {
            if mark[w] == tag {
                mark[w] = grown;
                queue.push_back(w);
            }
        }
    }
    // queued but not taken elements go back to the right-hand set
    for v in queue {
        mark[v] = tag;
    }
    let right: Vec<usize> = elems.iter().copied().filter(|&t| mark[t] == tag).collect();
    for &t in &left {
        mark[t] = usize::MAX;
    }
    for &t in &right {
        mark[t] = usize::MAX;
    }
    grow_split(adj, left, first, left_parts, owner, mark);
    grow_split(adj, right, first + left_parts, parts - left_parts, owner, mark);
}

fn coordinate_bisection(mesh: &Mesh, num_subdomains: usize) -> Partition {
    let centroids: Vec<[f64; 2]> = (0..mesh.num_triangles()).map(|t| mesh.centroid(t)).collect();
    let mut owner = vec![0usize; centroids.len()];
    let mut elems: Vec<usize> = (0..centroids.len()).collect();
    bisect(&centroids, &mut elems, 0, num_subdomains, &mut owner);
    Partition { num_subdomains, element_owner: owner }
}

fn bisect(c: &[[f64; 2]], elems: &mut [usize], first: usize, parts: usize, owner: &mut [usize]) {
    if parts == 1 {
        for &t in elems.iter() {
            owner[t] = first;
        }
        return;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &t in elems.iter() {
        for d in 0..2 {
            lo[d] = lo[d].min(c[t][d]);
            hi[d] = hi[d].max(c[t][d]);
        }
    }
    let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
    elems.sort_by(|&a, &b| c[a][axis].total_cmp(&c[b][axis]).then(c[a][1 - axis].total_cmp(&c[b][1 - axis])).then(a.cmp(&b)));
    let left_parts = parts / 2;
    let split = elems.len() * left_parts / parts;
    let (left, right) = elems.split_at_mut(split);
    bisect(c, left, first, left_parts, owner);
    bisect(c, right, first + left_parts, parts - left_parts, owner);
}

/// Concentric bands of equal radial width by centroid radius.
fn onion(mesh: &Mesh, num_subdomains: usize) -> Result<Partition> {
    let radius: Vec<f64> = (0..mesh.num_triangles()).map(|t| mesh.centroid(t)).map(|c| c[0].hypot(c[1])).collect();
    let rmax = mesh.nodes().iter().map(|p| p[0].hypot(p[1])).fold(0.0, f64::max);
    let owner: Vec<usize> =
        radius.iter().map(|&r| ((r / rmax * num_subdomains as f64).floor() as usize).min(num_subdomains - 1)).collect();
    Partition::new(num_subdomains, owner).map_err(|e| invalid(format!("onion partition: {e}")))
}

pub fn write_owner_file(path: &Path, partition: &Partition) -> Result<()> {
    let mut s = String::with_capacity(partition.element_owner.len() * 3);
    for &o in &partition.element_owner {
        let _ = writeln!(s, "{}", o + 1);
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Reads one 1-based owner index per line; the number of subdomains is the
/// largest index found.
pub fn read_owner_file(path: &Path) -> Result<Partition> {
    let text = std::fs::read_to_string(path)?;
    parse_owners(&text)
}

pub(crate) fn parse_owners(text: &str) -> Result<Partition> {
    let mut owners = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.is_empty() {
            continue;
        }
        let o: usize = l.parse().map_err(|_| Error::Parse { line: i + 1, msg: format!("invalid owner `{l}`") })?;
        if o == 0 {
            return Err(Error::Parse { line: i + 1, msg: "owner indices are 1-based".into() });
        }
        owners.push(o - 1);
    }
    let j = owners.iter().max().map_or(0, |m| m + 1);
    Partition::new(j, owners)
}

/// Nodes where three or more subdomains meet, and boundary nodes where two
/// or more meet.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CrossPointReport {
    pub interior_cross_points: Vec<usize>,
    pub boundary_cross_points: Vec<usize>,
}

impl CrossPointReport {
    pub fn is_empty(&self) -> bool {
        self.interior_cross_points.is_empty() && self.boundary_cross_points.is_empty()
    }
}

pub fn detect_cross_points(mesh: &Mesh, partition: &Partition) -> CrossPointReport {
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); mesh.num_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let o = partition.owner(t);
        for &v in tri {
            if !owners[v].contains(&o) {
                owners[v].push(o);
            }
        }
    }
    let on_boundary = mesh.boundary_node_mask();
    let mut report = CrossPointReport::default();
    for (v, os) in owners.iter().enumerate() {
        if on_boundary[v] {
            if os.len() >= 2 {
                report.boundary_cross_points.push(v);
            }
        } else if os.len() >= 3 {
            report.interior_cross_points.push(v);
        }
    }
    report
}
