//! Gmsh MSH 2.2 ASCII subset: `$MeshFormat`, `$Nodes`, `$Elements`.
//! Element type 2 (3-node triangle) and type 1 (2-node line) are honoured,
//! everything else is skipped and counted.

use super::{signed_area, Mesh, Point};
use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Side information gathered while reading an MSH document.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MshReport {
    pub nodes_read: usize,
    pub elements_read: usize,
    pub line_elements: usize,
    /// Line elements that are not boundary edges of the triangulation.
    pub interior_line_elements: usize,
    /// Elements of types other than 1 and 2.
    pub skipped_elements: usize,
    /// Clockwise triangles flipped to counter-clockwise.
    pub reoriented_triangles: usize,
    /// Nodes not referenced by any triangle.
    pub dropped_nodes: usize,
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            let l = l.trim();
            self.last = i + 1;
            if !l.is_empty() {
                return Some((i + 1, l));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        self.next_line()
            .ok_or_else(|| Error::Parse { line: self.last + 1, msg: format!("unexpected end of document, expected {what}") })
    }
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("invalid {what} `{tok}`")))
}

fn expect_end(lines: &mut Lines, name: &str) -> Result<()> {
    let (ln, l) = lines.expect(&format!("$End{name}"))?;
    if l != format!("$End{name}") {
        return Err(perr(ln, format!("expected $End{name}, found `{l}`")));
    }
    Ok(())
}

pub fn read_msh(text: &str) -> Result<Mesh> {
    read_msh_with_report(text).map(|(m, _)| m)
}

/// Parses an MSH 2.2 ASCII document. The boundary of the returned mesh is
/// always recomputed from triangle incidence; line elements are only
/// cross-checked and counted.
pub fn read_msh_with_report(text: &str) -> Result<(Mesh, MshReport)> {
    let mut lines = Lines { inner: text.lines().enumerate(), last: 0 };
    let mut report = MshReport::default();
    let mut saw_format = false;
    let mut nodes: Option<Vec<Point>> = None;
    let mut triangles: Vec<([usize; 3], i32, usize)> = Vec::new();
    let mut line_elems: Vec<[usize; 2]> = Vec::new();

    while let Some((ln, header)) = lines.next_line() {
        match header {
            "$MeshFormat" => {
                let (ln, l) = lines.expect("format line")?;
                let mut it = l.split_whitespace();
                let version: String = parse_num(it.next(), ln, "version")?;
                if version != "2.2" && version != "2.20" {
                    return Err(perr(ln, format!("unsupported MSH version {version}")));
                }
                let file_type: u32 = parse_num(it.next(), ln, "file type")?;
                if file_type != 0 {
                    return Err(perr(ln, "binary MSH files are not supported"));
                }
                expect_end(&mut lines, "MeshFormat")?;
                saw_format = true;
            }
            "$Nodes" => {
                if !saw_format {
                    return Err(perr(ln, "$Nodes before $MeshFormat"));
                }
                let (ln, l) = lines.expect("node count")?;
                let count: usize = parse_num(Some(l), ln, "node count")?;
                let mut pts = Vec::with_capacity(count);
                for k in 0..count {
                    let (ln, l) = lines.expect("node record")?;
                    let mut it = l.split_whitespace();
                    let id: usize = parse_num(it.next(), ln, "node id")?;
                    if id != k + 1 {
                        return Err(perr(ln, format!("non-contiguous node id {id}, expected {}", k + 1)));
                    }
                    let x: f64 = parse_num(it.next(), ln, "x coordinate")?;
                    let y: f64 = parse_num(it.next(), ln, "y coordinate")?;
                    pts.push([x, y]);
                }
                expect_end(&mut lines, "Nodes")?;
                report.nodes_read = count;
                nodes = Some(pts);
            }
            "$Elements" => {
                let n_nodes = match &nodes {
                    Some(p) => p.len(),
                    None => return Err(perr(ln, "$Elements before $Nodes")),
                };
                let (ln, l) = lines.expect("element count")?;
                let count: usize = parse_num(Some(l), ln, "element count")?;
                for _ in 0..count {
                    let (ln, l) = lines.expect("element record")?;
                    let toks: Vec<&str> = l.split_whitespace().collect();
                    let mut it = toks.iter().copied();
                    let _id: usize = parse_num(it.next(), ln, "element id")?;
                    let etype: u32 = parse_num(it.next(), ln, "element type")?;
                    let ntags: usize = parse_num(it.next(), ln, "tag count")?;
                    let mut tags = Vec::with_capacity(ntags);
                    for _ in 0..ntags {
                        tags.push(parse_num::<i32>(it.next(), ln, "tag")?);
                    }
                    let arity = match etype {
                        1 => 2,
                        2 => 3,
                        _ => {
                            report.skipped_elements += 1;
                            continue;
                        }
                    };
                    let mut vs = [0usize; 3];
                    for v in vs.iter_mut().take(arity) {
                        let id: usize = parse_num(it.next(), ln, "element node")?;
                        if id == 0 || id > n_nodes {
                            return Err(perr(ln, format!("element references unknown node {id}")));
                        }
                        *v = id - 1;
                    }
                    if etype == 2 {
                        triangles.push((vs, tags.first().copied().unwrap_or(0), ln));
                    } else {
                        line_elems.push([vs[0], vs[1]]);
                    }
                }
                expect_end(&mut lines, "Elements")?;
                report.elements_read = count;
            }
            h if h.starts_with("$End") => return Err(perr(ln, format!("unmatched section terminator `{h}`"))),
            h if h.starts_with('$') => {
                let name = &h[1..];
                loop {
                    let (_, l) = lines.expect(&format!("$End{name}"))?;
                    if l == format!("$End{name}") {
                        break;
                    }
                }
            }
            other => return Err(perr(ln, format!("expected a section header, found `{other}`"))),
        }
    }

    if !saw_format {
        return Err(perr(lines.last.max(1), "missing $MeshFormat section"));
    }
    let pts = nodes.ok_or_else(|| perr(lines.last.max(1), "missing $Nodes section"))?;
    if triangles.is_empty() {
        return Err(perr(lines.last.max(1), "no triangle elements"));
    }

    // compact to nodes that triangles actually use
    let mut remap = vec![usize::MAX; pts.len()];
    let mut kept = Vec::new();
    for (tri, _, _) in &triangles {
        for &v in tri {
            if remap[v] == usize::MAX {
                remap[v] = usize::MAX - 1;
            }
        }
    }
    for (v, r) in remap.iter_mut().enumerate() {
        if *r != usize::MAX {
            *r = kept.len();
            kept.push(pts[v]);
        }
    }
    report.dropped_nodes = pts.len() - kept.len();

    let mut tris = Vec::with_capacity(triangles.len());
    let mut regions = Vec::with_capacity(triangles.len());
    for (tri, tag, ln) in &triangles {
        let mut t = [remap[tri[0]], remap[tri[1]], remap[tri[2]]];
        let area = signed_area(kept[t[0]], kept[t[1]], kept[t[2]]);
        if area == 0.0 {
            return Err(perr(*ln, "degenerate triangle"));
        }
        if area < 0.0 {
            t.swap(1, 2);
            report.reoriented_triangles += 1;
        }
        tris.push(t);
        regions.push(*tag);
    }
    let mesh = Mesh::new(kept, tris, regions)?;

    let mut bset: Vec<(usize, usize)> =
        mesh.boundary_edges().iter().map(|e| (e[0].min(e[1]), e[0].max(e[1]))).collect();
    bset.sort_unstable();
    report.line_elements = line_elems.len();
    report.interior_line_elements = line_elems
        .iter()
        .filter(|e| {
            let (a, b) = (remap[e[0]], remap[e[1]]);
            a == usize::MAX || b == usize::MAX || bset.binary_search(&(a.min(b), a.max(b))).is_err()
        })
        .count();
    Ok((mesh, report))
}

/// Serializes a mesh as MSH 2.2 ASCII: boundary edges as type-1 elements
/// with physical tag 1, then triangles as type-2 elements tagged with their
/// region.
pub fn write_msh(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.num_nodes());
    for (i, p) in mesh.nodes().iter().enumerate() {
        let _ = writeln!(s, "{} {:.17e} {:.17e} 0", i + 1, p[0], p[1]);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.boundary_edges().len() + mesh.num_triangles());
    let mut id = 1;
    for e in mesh.boundary_edges() {
        let _ = writeln!(s, "{id} 1 2 1 1 {} {}", e[0] + 1, e[1] + 1);
        id += 1;
    }
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let r = mesh.element_region()[t];
        let _ = writeln!(s, "{id} 2 2 {r} {r} {} {} {}", tri[0] + 1, tri[1] + 1, tri[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_disk_mesh;

    const MINIMAL: &str = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n\
$Elements\n1\n1 2 2 7 1 1 2 3\n$EndElements\n";

    #[test]
    fn minimal_triangle() {
        let (mesh, report) = read_msh_with_report(MINIMAL).unwrap();
        assert_eq!(mesh.num_triangles(), 1);
        assert_eq!(mesh.boundary_edges().len(), 3);
        assert_eq!(mesh.element_region(), &[7]);
        assert_eq!(report.line_elements, 0);
    }

    #[test]
    fn rejects_version_four() {
        let doc = MINIMAL.replace("2.2 0 8", "4.1 0 8");
        match read_msh(&doc) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("unsupported MSH version"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header_names_line() {
        let doc = MINIMAL.replace("$EndNodes", "$EndNodez");
        assert!(matches!(read_msh(&doc), Err(Error::Parse { line: 9, .. })));
    }

    #[test]
    fn non_contiguous_nodes() {
        let doc = MINIMAL.replace("2 1 0 0", "5 1 0 0");
        assert!(matches!(read_msh(&doc), Err(Error::Parse { line: 7, .. })));
    }

    #[test]
    fn skips_points_and_flips_clockwise() {
        let doc = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n1\n2 1 \"dom\"\n$EndPhysicalNames\n\
$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 5 5 0\n$EndNodes\n$Elements\n4\n1 15 2 0 1 1\n2 1 2 0 1 1 2\n\
3 2 2 1 1 1 3 2\n4 4 2 0 1 1 2 3 4\n$EndElements\n";
        let (mesh, report) = read_msh_with_report(doc).unwrap();
        assert_eq!(report.skipped_elements, 2);
        assert_eq!(report.reoriented_triangles, 1);
        assert_eq!(report.dropped_nodes, 1);
        assert_eq!(report.line_elements, 1);
        assert_eq!(report.interior_line_elements, 0);
        assert!(mesh.area(0) > 0.0);
    }

    #[test]
    fn exported_disk_counts() {
        let h = 2.0 * std::f64::consts::PI / 20.0;
        let mesh = generate_disk_mesh(1.0, h).unwrap();
        let text = write_msh(&mesh);
        let (back, report) = read_msh_with_report(&text).unwrap();
        assert_eq!(report.nodes_read, mesh.num_nodes());
        assert_eq!(report.elements_read, mesh.num_triangles() + mesh.boundary_edges().len());
        assert_eq!(back, mesh);
    }
}
