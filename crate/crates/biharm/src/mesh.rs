//! Conforming triangular meshes: storage, adjacency, point location, and
//! longest-edge bisection with recursive conformity closure.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{BiharmError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2)).sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct Triangle {
    /// Vertex ids in counter-clockwise order.
    pub vertices: [usize; 3],
    /// Local index of the refinement edge; edge i is opposite vertex i.
    pub refinement_edge: usize,
    /// Ancestor in the mesh this one was refined from, when applicable.
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Edge {
    /// Endpoint vertex ids, lower id first.
    pub vertices: [usize; 2],
    /// Adjacent triangles; the one with the higher id acts as K+ for
    /// orientation purposes.
    pub triangles: (usize, Option<usize>),
    pub is_boundary: bool,
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    pub boundary_vertex: Vec<bool>,
    /// triangle_edges[t][i] is the edge opposite local vertex i of triangle t.
    pub triangle_edges: Vec<[usize; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocationClass {
    Interior,
    Edge,
    Vertex,
}

#[derive(Debug, Clone, Copy)]
pub struct Location {
    pub triangle: usize,
    pub bary: [f64; 3],
    pub class: LocationClass,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

fn signed_area(v: &[Point2], t: &[usize; 3]) -> f64 {
    let (a, b, c) = (v[t[0]], v[t[1]], v[t[2]]);
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Local index of the longest edge, ties broken by the smallest global id of
/// the opposite vertex.
fn longest_edge_local(v: &[Point2], tri: &[usize; 3]) -> usize {
    let mut lens = [0.0; 3];
    for i in 0..3 {
        lens[i] = v[tri[(i + 1) % 3]].dist(&v[tri[(i + 2) % 3]]);
    }
    let max = lens[0].max(lens[1]).max(lens[2]);
    let tol = 1e-12 * max;
    let mut best = usize::MAX;
    for i in 0..3 {
        if lens[i] >= max - tol && (best == usize::MAX || tri[i] < tri[best]) {
            best = i;
        }
    }
    best
}

impl Mesh {
    /// Build a mesh from vertex coordinates and CCW triangle connectivity,
    /// deriving all adjacency and boundary information.
    pub fn assemble(
        vertices: Vec<Point2>,
        triangles: Vec<[usize; 3]>,
        parents: Vec<Option<usize>>,
    ) -> Result<Mesh> {
        assert_eq!(parents.len(), triangles.len());
        for (i, t) in triangles.iter().enumerate() {
            for &vid in t {
                if vid >= vertices.len() {
                    return Err(BiharmError::Parse(format!(
                        "triangle {i} references vertex {vid} out of range"
                    )));
                }
            }
            if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(BiharmError::Parse(format!(
                    "triangle {i} repeats a vertex: {t:?}"
                )));
            }
            if signed_area(&vertices, t) <= 0.0 {
                return Err(BiharmError::Parse(format!(
                    "triangle {i} {t:?} is inverted or degenerate"
                )));
            }
        }
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut triangle_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (ti, t) in triangles.iter().enumerate() {
            for i in 0..3 {
                let a = t[(i + 1) % 3];
                let b = t[(i + 2) % 3];
                let key = edge_key(a, b);
                let eid = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        vertices: [key.0, key.1],
                        triangles: (ti, None),
                        is_boundary: false,
                        length: vertices[key.0].dist(&vertices[key.1]),
                    });
                    edges.len() - 1
                });
                triangle_edges[ti][i] = eid;
                let e = &mut edges[eid];
                if e.triangles.0 != ti {
                    if e.triangles.1.is_some() {
                        return Err(BiharmError::NonConforming(format!(
                            "edge {:?} is shared by more than two triangles",
                            e.vertices
                        )));
                    }
                    e.triangles.1 = Some(ti);
                }
            }
        }
        let mut boundary_vertex = vec![false; vertices.len()];
        for e in &mut edges {
            e.is_boundary = e.triangles.1.is_none();
            if e.is_boundary {
                boundary_vertex[e.vertices[0]] = true;
                boundary_vertex[e.vertices[1]] = true;
            }
        }
        let tris = triangles
            .iter()
            .zip(parents)
            .map(|(t, parent)| Triangle {
                vertices: *t,
                refinement_edge: longest_edge_local(&vertices, t),
                parent,
            })
            .collect();
        Ok(Mesh {
            vertices,
            triangles: tris,
            edges,
            boundary_vertex,
            triangle_edges,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        let v = &self.triangles[t].vertices;
        [
            [self.vertices[v[0]].x, self.vertices[v[0]].y],
            [self.vertices[v[1]].x, self.vertices[v[1]].y],
            [self.vertices[v[2]].x, self.vertices[v[2]].y],
        ]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t].vertices)
    }

    pub fn triangle_diameter(&self, t: usize) -> f64 {
        let v = &self.triangles[t].vertices;
        let mut d: f64 = 0.0;
        for i in 0..3 {
            d = d.max(self.vertices[v[i]].dist(&self.vertices[v[(i + 1) % 3]]));
        }
        d
    }

    pub fn min_angle(&self, t: usize) -> f64 {
        let c = self.triangle_coords(t);
        let mut best = f64::MAX;
        for i in 0..3 {
            let a = c[i];
            let b = c[(i + 1) % 3];
            let d = c[(i + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let w = [d[0] - a[0], d[1] - a[1]];
            let dot = u[0] * w[0] + u[1] * w[1];
            let cross = u[0] * w[1] - u[1] * w[0];
            best = best.min(cross.atan2(dot).abs());
        }
        best
    }

    pub fn domain_area(&self) -> f64 {
        (0..self.triangle_count()).map(|t| self.triangle_area(t)).sum()
    }

    /// Check the conformity invariants; used by tests and after refinement.
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.edges.iter().enumerate() {
            let expect = self.vertices[e.vertices[0]].dist(&self.vertices[e.vertices[1]]);
            if (e.length - expect).abs() > 1e-12 * (1.0 + expect) {
                return Err(BiharmError::NonConforming(format!(
                    "edge {i} length mismatch"
                )));
            }
            if e.is_boundary != e.triangles.1.is_none() {
                return Err(BiharmError::NonConforming(format!(
                    "edge {i} boundary flag inconsistent"
                )));
            }
        }
        for t in 0..self.triangle_count() {
            if self.triangle_area(t) <= 0.0 {
                return Err(BiharmError::NonConforming(format!("triangle {t} inverted")));
            }
        }
        // No hanging nodes: every vertex used by an edge of each incident
        // triangle; conformity is structural by construction, but verify the
        // edge adjacency counts add up.
        let mut incidence = vec![0usize; self.edges.len()];
        for te in &self.triangle_edges {
            for &e in te {
                incidence[e] += 1;
            }
        }
        for (i, (&n, e)) in incidence.iter().zip(&self.edges).enumerate() {
            let expect = if e.is_boundary { 1 } else { 2 };
            if n != expect {
                return Err(BiharmError::NonConforming(format!(
                    "edge {i} has {n} incident triangles, expected {expect}"
                )));
            }
        }
        Ok(())
    }

    /// Midpoint subdivision of every triangle into four similar children.
    pub fn uniform_refine(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> usize {
            let key = edge_key(a, b);
            *midpoint.entry(key).or_insert_with(|| {
                let p = Point2::new(
                    0.5 * (vertices[a].x + vertices[b].x),
                    0.5 * (vertices[a].y + vertices[b].y),
                );
                vertices.push(p);
                vertices.len() - 1
            })
        };
        let mut tris = Vec::with_capacity(4 * self.triangle_count());
        let mut parents = Vec::with_capacity(4 * self.triangle_count());
        for (ti, t) in self.triangles.iter().enumerate() {
            let [v0, v1, v2] = t.vertices;
            let m01 = mid(v0, v1, &mut vertices);
            let m12 = mid(v1, v2, &mut vertices);
            let m20 = mid(v2, v0, &mut vertices);
            tris.push([v0, m01, m20]);
            tris.push([m01, v1, m12]);
            tris.push([m20, m12, v2]);
            tris.push([m01, m12, m20]);
            parents.extend([Some(ti); 4]);
        }
        Mesh::assemble(vertices, tris, parents).expect("uniform refinement stays conforming")
    }

    /// Bisect every marked triangle through its refinement edge, recursively
    /// bisecting neighbors as needed to keep the mesh conforming.
    pub fn bisect(&self, marked: &[usize]) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut tris: Vec<Option<[usize; 3]>> =
            self.triangles.iter().map(|t| Some(t.vertices)).collect();
        // Ancestor in `self` for every working triangle.
        let mut ancestor: Vec<usize> = (0..tris.len()).collect();
        let mut created = vec![false; tris.len()];
        let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let key = edge_key(t.vertices[(i + 1) % 3], t.vertices[(i + 2) % 3]);
                edge_map.entry(key).or_default().push(ti);
            }
        }
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();

        fn split(
            t: usize,
            a: usize,
            b: usize,
            vertices: &mut Vec<Point2>,
            tris: &mut Vec<Option<[usize; 3]>>,
            ancestor: &mut Vec<usize>,
            created: &mut Vec<bool>,
            edge_map: &mut HashMap<(usize, usize), Vec<usize>>,
            midpoint: &mut HashMap<(usize, usize), usize>,
        ) {
            let tv = tris[t].expect("splitting a live triangle");
            let i = (0..3)
                .find(|&i| edge_key(tv[(i + 1) % 3], tv[(i + 2) % 3]) == edge_key(a, b))
                .expect("refinement edge belongs to the triangle");
            let key = edge_key(a, b);
            let m = *midpoint.entry(key).or_insert_with(|| {
                let pa = vertices[key.0];
                let pb = vertices[key.1];
                vertices.push(Point2::new(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)));
                vertices.len() - 1
            });
            let (vi, va, vb) = (tv[i], tv[(i + 1) % 3], tv[(i + 2) % 3]);
            for j in 0..3 {
                let k = edge_key(tv[(j + 1) % 3], tv[(j + 2) % 3]);
                edge_map.get_mut(&k).unwrap().retain(|&x| x != t);
            }
            tris[t] = None;
            for child in [[vi, va, m], [vi, m, vb]] {
                let id = tris.len();
                tris.push(Some(child));
                ancestor.push(ancestor[t]);
                created.push(true);
                for j in 0..3 {
                    let k = edge_key(child[(j + 1) % 3], child[(j + 2) % 3]);
                    edge_map.entry(k).or_default().push(id);
                }
            }
        }

        for &seed in marked {
            assert!(seed < self.triangle_count(), "marked id out of range");
            let mut stack = vec![seed];
            let mut guard = 0usize;
            while let Some(&top) = stack.last() {
                guard += 1;
                assert!(
                    guard < 64 * (tris.len() + 16),
                    "bisection closure failed to terminate"
                );
                if tris[top].is_none() {
                    stack.pop();
                    continue;
                }
                let tv = tris[top].unwrap();
                let le = longest_edge_local(&vertices, &tv);
                let (a, b) = (tv[(le + 1) % 3], tv[(le + 2) % 3]);
                let key = edge_key(a, b);
                let neighbor = edge_map[&key].iter().copied().find(|&x| x != top);
                match neighbor {
                    None => {
                        split(
                            top, a, b, &mut vertices, &mut tris, &mut ancestor, &mut created,
                            &mut edge_map, &mut midpoint,
                        );
                        stack.pop();
                    }
                    Some(n) => {
                        let nv = tris[n].unwrap();
                        let nle = longest_edge_local(&vertices, &nv);
                        let nlen =
                            vertices[nv[(nle + 1) % 3]].dist(&vertices[nv[(nle + 2) % 3]]);
                        let shared = vertices[a].dist(&vertices[b]);
                        if shared >= nlen - 1e-12 * nlen {
                            // The shared edge is (a) longest edge of the
                            // neighbor too; split both through it.
                            split(
                                top, a, b, &mut vertices, &mut tris, &mut ancestor,
                                &mut created, &mut edge_map, &mut midpoint,
                            );
                            split(
                                n, a, b, &mut vertices, &mut tris, &mut ancestor,
                                &mut created, &mut edge_map, &mut midpoint,
                            );
                            stack.pop();
                        } else {
                            stack.push(n);
                        }
                    }
                }
            }
        }

        let mut out_tris = Vec::new();
        let mut out_parents = Vec::new();
        for (i, t) in tris.iter().enumerate() {
            if let Some(tv) = t {
                out_tris.push(*tv);
                out_parents.push(if created[i] {
                    Some(ancestor[i])
                } else {
                    self.triangles[i].parent
                });
            }
        }
        Mesh::assemble(vertices, out_tris, out_parents)
            .expect("bisection closure stays conforming")
    }

    /// Build an acceleration structure for repeated point location.
    pub fn locator(&self) -> PointLocator<'_> {
        PointLocator::new(self)
    }

    /// One-off point location; builds a locator internally.
    pub fn locate_point(&self, p: Point2) -> Result<Location> {
        self.locator().locate(p)
    }

    /// Serialize in the text format accepted by `load_mesh`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.vertex_count(), self.triangle_count());
        for (v, &b) in self.vertices.iter().zip(&self.boundary_vertex) {
            let _ = writeln!(s, "{:.17e} {:.17e} {}", v.x, v.y, u8::from(b));
        }
        for t in &self.triangles {
            let _ = writeln!(s, "{} {} {}", t.vertices[0], t.vertices[1], t.vertices[2]);
        }
        s
    }
}

/// Parse the text mesh format: `nv nt`, nv lines `x y boundary_flag`, nt
/// lines `v0 v1 v2` (0-based, CCW). `#` starts a comment.
pub fn load_mesh(text: &str) -> Result<Mesh> {
    let mut tokens = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace().map(String::from))
        .collect::<Vec<_>>()
        .into_iter();
    let mut next = |what: &str| {
        tokens
            .next()
            .ok_or_else(|| BiharmError::Parse(format!("unexpected end of input reading {what}")))
    };
    let nv: usize = next("vertex count")?
        .parse()
        .map_err(|e| BiharmError::Parse(format!("vertex count: {e}")))?;
    let nt: usize = next("triangle count")?
        .parse()
        .map_err(|e| BiharmError::Parse(format!("triangle count: {e}")))?;
    let mut vertices = Vec::with_capacity(nv);
    let mut flags = Vec::with_capacity(nv);
    for i in 0..nv {
        let x: f64 = next("x")?
            .parse()
            .map_err(|e| BiharmError::Parse(format!("vertex {i} x: {e}")))?;
        let y: f64 = next("y")?
            .parse()
            .map_err(|e| BiharmError::Parse(format!("vertex {i} y: {e}")))?;
        let flag: u8 = next("boundary flag")?
            .parse()
            .map_err(|e| BiharmError::Parse(format!("vertex {i} boundary flag: {e}")))?;
        if !x.is_finite() || !y.is_finite() {
            return Err(BiharmError::Parse(format!("vertex {i} has non-finite coordinates")));
        }
        vertices.push(Point2::new(x, y));
        flags.push(flag != 0);
    }
    let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
    for (i, v) in vertices.iter().enumerate() {
        if let Some(j) = seen.insert((v.x.to_bits(), v.y.to_bits()), i) {
            return Err(BiharmError::Parse(format!(
                "vertices {j} and {i} are duplicates at ({}, {})",
                v.x, v.y
            )));
        }
    }
    let mut tris = Vec::with_capacity(nt);
    for i in 0..nt {
        let mut t = [0usize; 3];
        for slot in &mut t {
            *slot = next("triangle vertex")?
                .parse()
                .map_err(|e| BiharmError::Parse(format!("triangle {i}: {e}")))?;
        }
        tris.push(t);
    }
    if tokens.next().is_some() {
        return Err(BiharmError::Parse("trailing tokens after triangle list".into()));
    }
    let mesh = Mesh::assemble(vertices, tris, vec![None; nt])?;
    for (i, (&flag, &computed)) in flags.iter().zip(&mesh.boundary_vertex).enumerate() {
        if flag != computed {
            return Err(BiharmError::Parse(format!(
                "vertex {i} boundary flag {} disagrees with the mesh topology",
                u8::from(flag)
            )));
        }
    }
    Ok(mesh)
}

/// Uniform-grid spatial index over triangle bounding boxes.
pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    nx: usize,
    ny: usize,
    min: [f64; 2],
    inv_cell: [f64; 2],
    cells: Vec<Vec<u32>>,
    tol: f64,
}

impl<'a> PointLocator<'a> {
    fn new(mesh: &'a Mesh) -> Self {
        let mut min = [f64::MAX; 2];
        let mut max = [f64::MIN; 2];
        for v in &mesh.vertices {
            min[0] = min[0].min(v.x);
            min[1] = min[1].min(v.y);
            max[0] = max[0].max(v.x);
            max[1] = max[1].max(v.y);
        }
        let n = ((mesh.triangle_count() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let (nx, ny) = (n, n);
        let span = [
            (max[0] - min[0]).max(f64::MIN_POSITIVE),
            (max[1] - min[1]).max(f64::MIN_POSITIVE),
        ];
        let inv_cell = [nx as f64 / span[0], ny as f64 / span[1]];
        let mut cells = vec![Vec::new(); nx * ny];
        for t in 0..mesh.triangle_count() {
            let c = mesh.triangle_coords(t);
            let txmin = c.iter().map(|p| p[0]).fold(f64::MAX, f64::min);
            let txmax = c.iter().map(|p| p[0]).fold(f64::MIN, f64::max);
            let tymin = c.iter().map(|p| p[1]).fold(f64::MAX, f64::min);
            let tymax = c.iter().map(|p| p[1]).fold(f64::MIN, f64::max);
            let i0 = (((txmin - min[0]) * inv_cell[0]) as isize).clamp(0, nx as isize - 1) as usize;
            let i1 = (((txmax - min[0]) * inv_cell[0]) as isize).clamp(0, nx as isize - 1) as usize;
            let j0 = (((tymin - min[1]) * inv_cell[1]) as isize).clamp(0, ny as isize - 1) as usize;
            let j1 = (((tymax - min[1]) * inv_cell[1]) as isize).clamp(0, ny as isize - 1) as usize;
            for j in j0..=j1 {
                for i in i0..=i1 {
                    cells[j * nx + i].push(t as u32);
                }
            }
        }
        let tol = 1e-12 * span[0].max(span[1]);
        PointLocator {
            mesh,
            nx,
            ny,
            min,
            inv_cell,
            cells,
            tol,
        }
    }

    pub fn locate(&self, p: Point2) -> Result<Location> {
        let err = || BiharmError::Location { x: p.x, y: p.y };
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(err());
        }
        let i = (((p.x - self.min[0]) * self.inv_cell[0]) as isize)
            .clamp(0, self.nx as isize - 1) as usize;
        let j = (((p.y - self.min[1]) * self.inv_cell[1]) as isize)
            .clamp(0, self.ny as isize - 1) as usize;
        let mut best: Option<Location> = None;
        for &t in &self.cells[j * self.nx + i] {
            let t = t as usize;
            if let Some(bary) = self.barycentric(t, p) {
                if best.map_or(true, |b| t < b.triangle) {
                    let zeros = bary.iter().filter(|&&b| b.abs() <= 1e-10).count();
                    let class = match zeros {
                        0 => LocationClass::Interior,
                        1 => LocationClass::Edge,
                        _ => LocationClass::Vertex,
                    };
                    best = Some(Location {
                        triangle: t,
                        bary,
                        class,
                    });
                }
            }
        }
        best.ok_or_else(err)
    }

    fn barycentric(&self, t: usize, p: Point2) -> Option<[f64; 3]> {
        let c = self.mesh.triangle_coords(t);
        let denom = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1])
            - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
        let b0 = ((c[1][0] - p.x) * (c[2][1] - p.y) - (c[2][0] - p.x) * (c[1][1] - p.y)) / denom;
        let b1 = ((c[2][0] - p.x) * (c[0][1] - p.y) - (c[0][0] - p.x) * (c[2][1] - p.y)) / denom;
        let b2 = 1.0 - b0 - b1;
        let scale = self.tol / self.mesh.triangle_diameter(t).max(f64::MIN_POSITIVE);
        let tol = 1e-12_f64.max(scale);
        if b0 >= -tol && b1 >= -tol && b2 >= -tol {
            Some([b0, b1, b2])
        } else {
            None
        }
    }
}
