//! Gmsh MSH 2.2 (ASCII) and a plain line-oriented dump format.
//!
//! Dump lines are `p x y`, `t i j k` and `b i j D|N`; blank lines and lines
//! starting with `#` are skipped. Coordinates are written in shortest
//! round-trip form, so a dump reloads bit-for-bit.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{orient2d, BoundaryEdge, BoundaryTag, Mesh, MeshError, Point2, Triangle};

/// Physical group used for Dirichlet edges in MSH files.
pub const PHYSICAL_DIRICHLET: i64 = 1;
/// Physical group used for Neumann edges in MSH files.
pub const PHYSICAL_NEUMANN: i64 = 2;

const MSH_LINE: u32 = 1;
const MSH_TRIANGLE: u32 = 2;
const MSH_POINT: u32 = 15;

fn perr(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::Parse { line, message: message.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self { inner: text.lines().enumerate(), last: 0 }
    }

    /// Next non-empty line with its 1-based number.
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.inner.by_ref() {
            self.last = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), MeshError> {
        self.next().ok_or_else(|| perr(self.last + 1, format!("unexpected end of file, expected {what}")))
    }

    fn expect_exact(&mut self, tag: &str) -> Result<(), MeshError> {
        let (n, l) = self.expect(tag)?;
        if l != tag {
            return Err(perr(n, format!("expected {tag}, found {l:?}")));
        }
        Ok(())
    }
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, MeshError> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse().map_err(|_| perr(line, format!("invalid {what} {tok:?}")))
}

/// Parses an ASCII MSH 2.2 file.
///
/// Node ids may be arbitrary; triangles with clockwise node order are
/// reoriented. Line elements tag boundary edges through their physical group
/// (1 Dirichlet, 2 Neumann). Without any line elements all boundary edges are
/// Neumann. Point elements are ignored; other element types are rejected.
pub fn import_msh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines::new(text);
    lines.expect_exact("$MeshFormat")?;
    let (n, fmt) = lines.expect("format line")?;
    let mut tok = fmt.split_whitespace();
    let version: String = parse(tok.next(), n, "version")?;
    let file_type: u32 = parse(tok.next(), n, "file type")?;
    if !version.starts_with("2.") {
        return Err(perr(n, format!("unsupported MSH version {version}")));
    }
    if file_type != 0 {
        return Err(perr(n, "binary MSH files are not supported"));
    }
    lines.expect_exact("$EndMeshFormat")?;

    let mut points = Vec::new();
    let mut node_index: HashMap<i64, usize> = HashMap::new();
    let mut triangles = Vec::new();
    let mut tagged: Vec<(usize, [usize; 2], BoundaryTag)> = Vec::new();
    let mut saw_nodes = false;
    let mut saw_elements = false;

    while let Some((n, header)) = lines.next() {
        match header {
            "$Nodes" => {
                let (cn, c) = lines.expect("node count")?;
                let count: usize = parse(Some(c), cn, "node count")?;
                for _ in 0..count {
                    let (ln, l) = lines.expect("node")?;
                    let mut tok = l.split_whitespace();
                    let id: i64 = parse(tok.next(), ln, "node id")?;
                    let x: f64 = parse(tok.next(), ln, "x coordinate")?;
                    let y: f64 = parse(tok.next(), ln, "y coordinate")?;
                    if node_index.insert(id, points.len()).is_some() {
                        return Err(perr(ln, format!("duplicate node id {id}")));
                    }
                    points.push(Point2::new(x, y));
                }
                lines.expect_exact("$EndNodes")?;
                saw_nodes = true;
            }
            "$Elements" => {
                if !saw_nodes {
                    return Err(perr(n, "$Elements before $Nodes"));
                }
                let (cn, c) = lines.expect("element count")?;
                let count: usize = parse(Some(c), cn, "element count")?;
                for _ in 0..count {
                    let (ln, l) = lines.expect("element")?;
                    let mut tok = l.split_whitespace();
                    let _id: i64 = parse(tok.next(), ln, "element id")?;
                    let ty: u32 = parse(tok.next(), ln, "element type")?;
                    let ntags: usize = parse(tok.next(), ln, "tag count")?;
                    let tags: Vec<i64> =
                        (0..ntags).map(|_| parse(tok.next(), ln, "element tag")).collect::<Result<_, _>>()?;
                    let node = |tok: Option<&str>| -> Result<usize, MeshError> {
                        let id: i64 = parse(tok, ln, "node reference")?;
                        node_index.get(&id).copied().ok_or_else(|| perr(ln, format!("unknown node {id}")))
                    };
                    match ty {
                        MSH_POINT => {}
                        MSH_LINE => {
                            let a = node(tok.next())?;
                            let b = node(tok.next())?;
                            let tag = match tags.first() {
                                Some(&PHYSICAL_DIRICHLET) => BoundaryTag::Dirichlet,
                                Some(&PHYSICAL_NEUMANN) => BoundaryTag::Neumann,
                                Some(p) => return Err(perr(ln, format!("unknown physical group {p} on line element"))),
                                None => return Err(perr(ln, "line element without physical group")),
                            };
                            tagged.push((ln, [a, b], tag));
                        }
                        MSH_TRIANGLE => {
                            let a = node(tok.next())?;
                            let mut b = node(tok.next())?;
                            let mut c = node(tok.next())?;
                            if orient2d(&points[a], &points[b], &points[c]) < 0.0 {
                                std::mem::swap(&mut b, &mut c);
                            }
                            triangles.push(Triangle::new(a, b, c));
                        }
                        other => return Err(perr(ln, format!("unsupported element type {other}"))),
                    }
                }
                lines.expect_exact("$EndElements")?;
                saw_elements = true;
            }
            s if s.starts_with("$End") => return Err(perr(n, format!("unexpected {s}"))),
            s if s.starts_with('$') => {
                // Skip unknown sections.
                let end = format!("$End{}", &s[1..]);
                loop {
                    let (_, l) = lines.expect(&end)?;
                    if l == end {
                        break;
                    }
                }
            }
            s => return Err(perr(n, format!("unexpected content {s:?}"))),
        }
    }
    if !saw_elements {
        return Err(perr(lines.last, "missing $Elements section"));
    }
    // Unused nodes such as geometry points would break vertex numbering downstream.
    let mut used = vec![false; points.len()];
    for t in &triangles {
        for &v in &t.v {
            used[v] = true;
        }
    }
    if let Some(&(ln, _, _)) = tagged.iter().find(|(_, [a, b], _)| !used[*a] || !used[*b]) {
        return Err(perr(ln, "line element references a node outside every triangle"));
    }
    let mut remap = vec![usize::MAX; points.len()];
    let mut kept = Vec::new();
    for (i, p) in points.iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(*p);
        }
    }
    let triangles: Vec<Triangle> =
        triangles.iter().map(|t| Triangle::new(remap[t.v[0]], remap[t.v[1]], remap[t.v[2]])).collect();
    if tagged.is_empty() {
        Mesh::from_triangles(kept, triangles)
    } else {
        let boundary = tagged
            .iter()
            .map(|&(_, [a, b], tag)| BoundaryEdge { endpoints: [remap[a], remap[b]], tag })
            .collect();
        Mesh::new(kept, triangles, boundary)
    }
}

/// Writes an ASCII MSH 2.2 file with boundary line elements.
pub fn export_msh(mesh: &Mesh) -> String {
    let mut s = String::new();
    s.push_str("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n");
    let _ = writeln!(s, "{}", mesh.points().len());
    for (i, p) in mesh.points().iter().enumerate() {
        let _ = writeln!(s, "{} {:?} {:?} 0", i + 1, p.x, p.y);
    }
    s.push_str("$EndNodes\n$Elements\n");
    let _ = writeln!(s, "{}", mesh.boundary().len() + mesh.triangles().len());
    let mut id = 1;
    for e in mesh.boundary() {
        let phys = match e.tag {
            BoundaryTag::Dirichlet => PHYSICAL_DIRICHLET,
            BoundaryTag::Neumann => PHYSICAL_NEUMANN,
        };
        let _ = writeln!(s, "{id} {MSH_LINE} 2 {phys} {phys} {} {}", e.endpoints[0] + 1, e.endpoints[1] + 1);
        id += 1;
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "{id} {MSH_TRIANGLE} 2 0 0 {} {} {}", t.v[0] + 1, t.v[1] + 1, t.v[2] + 1);
        id += 1;
    }
    s.push_str("$EndElements\n");
    s
}

/// Serializes a mesh in the dump format.
pub fn write_dump(mesh: &Mesh) -> String {
    let mut s = String::new();
    for p in mesh.points() {
        let _ = writeln!(s, "p {:?} {:?}", p.x, p.y);
    }
    for t in mesh.triangles() {
        let _ = writeln!(s, "t {} {} {}", t.v[0], t.v[1], t.v[2]);
    }
    for e in mesh.boundary() {
        let tag = match e.tag {
            BoundaryTag::Dirichlet => 'D',
            BoundaryTag::Neumann => 'N',
        };
        let _ = writeln!(s, "b {} {} {tag}", e.endpoints[0], e.endpoints[1]);
    }
    s
}

/// Parses the dump format.
pub fn read_dump(text: &str) -> Result<Mesh, MeshError> {
    let mut points = Vec::new();
    let mut triangles = Vec::new();
    let mut boundary = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let l = raw.trim();
        if l.is_empty() || l.starts_with('#') {
            continue;
        }
        let mut tok = l.split_whitespace();
        match tok.next() {
            Some("p") => points.push(Point2::new(parse(tok.next(), n, "x")?, parse(tok.next(), n, "y")?)),
            Some("t") => triangles.push(Triangle::new(
                parse(tok.next(), n, "vertex")?,
                parse(tok.next(), n, "vertex")?,
                parse(tok.next(), n, "vertex")?,
            )),
            Some("b") => {
                let a = parse(tok.next(), n, "vertex")?;
                let b = parse(tok.next(), n, "vertex")?;
                let tag = match tok.next() {
                    Some("D") => BoundaryTag::Dirichlet,
                    Some("N") => BoundaryTag::Neumann,
                    other => return Err(perr(n, format!("invalid boundary tag {other:?}"))),
                };
                boundary.push(BoundaryEdge { endpoints: [a, b], tag });
            }
            Some(k) => return Err(perr(n, format!("unknown record {k:?}"))),
            None => unreachable!(),
        }
        if let Some(extra) = tok.next() {
            return Err(perr(n, format!("trailing token {extra:?}")));
        }
    }
    if boundary.is_empty() {
        Mesh::from_triangles(points, triangles)
    } else {
        Mesh::new(points, triangles, boundary)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{delaunay_triangulate, generate_structured, Rect};

    fn mixed_strip() -> Mesh {
        generate_structured(8, 2, Rect::new(-10.0, 10.0, -1.0, 1.0)).unwrap().tag_boundary(|p| {
            if (p.x.abs() - 10.0).abs() < 1e-12 {
                BoundaryTag::Dirichlet
            } else {
                BoundaryTag::Neumann
            }
        })
    }

    #[test]
    fn msh_round_trip_keeps_tags() {
        let m = mixed_strip();
        let back = import_msh(&export_msh(&m)).unwrap();
        assert_eq!(back, m);
        let dirichlet = back.boundary().iter().filter(|e| e.tag == BoundaryTag::Dirichlet).count();
        assert_eq!(dirichlet, 4);
    }

    #[test]
    fn dump_round_trip_is_exact() {
        let m = delaunay_triangulate(
            &[Point2::new(0.1, -0.3), Point2::new(2.7, 0.0), Point2::new(1.9, 1.3), Point2::new(-0.4, 0.9)],
            0.3,
        )
        .unwrap();
        assert_eq!(read_dump(&write_dump(&m)).unwrap(), m);
    }

    #[test]
    fn clockwise_msh_triangle_is_reoriented() {
        let text = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n10 0 0 0\n20 1 0 0\n30 0 1 0\n$EndNodes\n\
                    $Elements\n1\n1 2 2 0 0 10 30 20\n$EndElements\n";
        let m = import_msh(text).unwrap();
        assert_eq!(m.triangles().len(), 1);
        assert!(m.triangle_area(0) > 0.0);
        assert!(m.boundary().iter().all(|e| e.tag == BoundaryTag::Neumann));
    }

    #[test]
    fn msh_errors_carry_line_numbers() {
        let bad_type = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n3\n1 0 0 0\n2 1 0 0\n3 0 1 0\n$EndNodes\n\
                        $Elements\n1\n1 4 2 0 0 1 2 3\n$EndElements\n";
        assert!(matches!(import_msh(bad_type), Err(MeshError::Parse { line: 12, .. })));
        let bad_ref = bad_type.replace("1 4 2 0 0 1 2 3", "1 2 2 0 0 1 2 9");
        assert!(matches!(import_msh(&bad_ref), Err(MeshError::Parse { line: 12, .. })));
        let bad_num = bad_type.replace("2 1 0 0", "2 x 0 0");
        assert!(matches!(import_msh(&bad_num), Err(MeshError::Parse { line: 7, .. })));
        assert!(matches!(import_msh("$MeshFormat\n4.1 0 8\n"), Err(MeshError::Parse { line: 2, .. })));
    }

    #[test]
    fn dump_errors() {
        assert!(matches!(read_dump("p 0 0\nq 1\n"), Err(MeshError::Parse { line: 2, .. })));
        assert!(matches!(read_dump("p 0 0\np 1 0\np 0 1\nt 0 1 2\nb 0 1 X\n"), Err(MeshError::Parse { line: 5, .. })));
        assert!(read_dump("p 0 0\np 1 0\np 0 1\nt 0 1 5\n").is_err());
    }
}
