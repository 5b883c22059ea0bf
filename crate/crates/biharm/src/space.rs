//! Continuous Lagrange finite element spaces on a triangulation.
//!
//! Global dof numbering is structural: vertex dofs first (one per mesh
//! vertex), then m-1 dofs per edge ordered from the endpoint with the
//! smaller vertex id, then the element-interior lattice dofs. Shared dofs
//! are identified across elements, which gives C0 continuity.

use crate::basis::{self, AffineMap, PhysDerivs, ReferenceBasis};
use crate::error::Result;
use crate::mesh::{Mesh, Point2};

#[derive(Clone)]
pub struct FeSpace {
    pub mesh: Mesh,
    pub degree: usize,
    pub n_dofs: usize,
    /// element_dofs[t][i] is the global dof of local lattice node i.
    pub element_dofs: Vec<Vec<usize>>,
    /// Physical coordinates of every global dof (its lattice node).
    pub dof_points: Vec<Point2>,
    /// Value dofs sitting on the domain boundary.
    pub boundary_dof: Vec<bool>,
    pub basis: &'static ReferenceBasis,
}

impl FeSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Result<FeSpace> {
        let basis = basis::reference_basis(degree)?;
        let m = degree;
        let nv = mesh.vertex_count();
        let ne = mesh.edges.len();
        let nt = mesh.triangle_count();
        let per_edge = m - 1;
        let per_tri = (m - 1) * (m - 2) / 2;
        let n_dofs = nv + per_edge * ne + per_tri * nt;
        let mut element_dofs = Vec::with_capacity(nt);
        let mut dof_points = vec![Point2::new(f64::NAN, f64::NAN); n_dofs];
        let mut boundary_dof = vec![false; n_dofs];
        for (vid, v) in mesh.vertices.iter().enumerate() {
            dof_points[vid] = *v;
            boundary_dof[vid] = mesh.boundary_vertex[vid];
        }
        for t in 0..nt {
            let tv = mesh.triangles[t].vertices;
            let coords = mesh.triangle_coords(t);
            let mut dofs = Vec::with_capacity(basis.node_count);
            let mut interior_seen = 0usize;
            for &[a0, a1, a2] in &basis.node_bary {
                let a = [a0, a1, a2];
                let dof = if let Some(i) = (0..3).find(|&i| a[i] == m) {
                    tv[i]
                } else if let Some(k) = (0..3).find(|&k| a[k] == 0) {
                    let eid = mesh.triangle_edges[t][k];
                    let p = (k + 1) % 3;
                    let q = (k + 2) % 3;
                    let lo = mesh.edges[eid].vertices[0];
                    let steps_from_lo = if tv[p] == lo { a[q] } else { a[p] };
                    nv + eid * per_edge + (steps_from_lo - 1)
                } else {
                    let dof = nv + ne * per_edge + t * per_tri + interior_seen;
                    interior_seen += 1;
                    dof
                };
                let x = (a[0] as f64 * coords[0][0]
                    + a[1] as f64 * coords[1][0]
                    + a[2] as f64 * coords[2][0])
                    / m as f64;
                let y = (a[0] as f64 * coords[0][1]
                    + a[1] as f64 * coords[1][1]
                    + a[2] as f64 * coords[2][1])
                    / m as f64;
                let p = Point2::new(x, y);
                let prev = dof_points[dof];
                if prev.x.is_nan() {
                    dof_points[dof] = p;
                } else {
                    debug_assert!(prev.dist(&p) < 1e-9, "dof point mismatch at dof {dof}");
                }
                dofs.push(dof);
            }
            debug_assert_eq!(interior_seen, per_tri);
            element_dofs.push(dofs);
        }
        for (eid, e) in mesh.edges.iter().enumerate() {
            if e.is_boundary {
                for s in 0..per_edge {
                    boundary_dof[nv + eid * per_edge + s] = true;
                }
            }
        }
        Ok(FeSpace {
            mesh,
            degree,
            n_dofs,
            element_dofs,
            dof_points,
            boundary_dof,
            basis,
        })
    }

    pub fn element_map(&self, t: usize) -> AffineMap {
        AffineMap::from_vertices(self.mesh.triangle_coords(t))
            .expect("mesh triangles are positively oriented")
    }

    /// Evaluate the discrete function with coefficients `u` on element `t`
    /// at reference point `rp`, with physical derivatives through `order`.
    pub fn eval_local(&self, u: &[f64], t: usize, rp: [f64; 2], order: usize) -> PhysDerivs {
        let map = self.element_map(t);
        let refs = self.basis.eval(rp, order);
        let mut out = PhysDerivs::default();
        for (i, r) in refs.iter().enumerate() {
            let c = u[self.element_dofs[t][i]];
            if c == 0.0 {
                continue;
            }
            let p = basis::push_forward(&map, r, order);
            out.value += c * p.value;
            for a in 0..2 {
                out.grad[a] += c * p.grad[a];
                out.grad_laplacian[a] += c * p.grad_laplacian[a];
            }
            for b in 0..3 {
                out.hess[b] += c * p.hess[b];
            }
            out.laplacian += c * p.laplacian;
            out.bilaplacian += c * p.bilaplacian;
        }
        out
    }

    /// Interpolate a scalar function at every dof point.
    pub fn interpolate(&self, f: impl Fn(Point2) -> f64) -> Vec<f64> {
        self.dof_points.iter().map(|&p| f(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::load_mesh;

    fn square() -> Mesh {
        load_mesh("4 2\n0 0 1\n1 0 1\n1 1 1\n0 1 1\n0 1 2\n0 2 3\n").unwrap()
    }

    #[test]
    fn dof_counts_match_lattice_formula() {
        for m in 2..=4 {
            let mesh = square().uniform_refine();
            let nv = mesh.vertex_count();
            let ne = mesh.edges.len();
            let nt = mesh.triangle_count();
            let space = FeSpace::new(mesh, m).unwrap();
            assert_eq!(
                space.n_dofs,
                nv + (m - 1) * ne + (m - 1) * (m - 2) / 2 * nt
            );
        }
    }

    #[test]
    fn continuity_across_interior_edges() {
        for m in 2..=4 {
            let mesh = square().uniform_refine();
            let space = FeSpace::new(mesh, m).unwrap();
            // Deterministic pseudo-random coefficients.
            let u: Vec<f64> = (0..space.n_dofs)
                .map(|i| ((i * 2654435761) % 1000) as f64 / 1000.0 - 0.5)
                .collect();
            for (eid, e) in space.mesh.edges.iter().enumerate() {
                let Some(t2) = e.triangles.1 else { continue };
                let t1 = e.triangles.0;
                let _ = eid;
                let a = space.mesh.vertices[e.vertices[0]];
                let b = space.mesh.vertices[e.vertices[1]];
                for s in [0.2, 0.55, 0.9] {
                    let p = [a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)];
                    let r1 = space.element_map(t1).to_reference(p);
                    let r2 = space.element_map(t2).to_reference(p);
                    let v1 = space.eval_local(&u, t1, r1, 0).value;
                    let v2 = space.eval_local(&u, t2, r2, 0).value;
                    assert!(
                        (v1 - v2).abs() < 1e-10,
                        "m={m} edge {:?}: {v1} vs {v2}",
                        e.vertices
                    );
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        for m in 2..=4usize {
            let mesh = square().uniform_refine();
            let space = FeSpace::new(mesh, m).unwrap();
            let f = |p: Point2| 1.0 + p.x + p.y * p.y + if m >= 3 { p.x * p.x * p.y } else { 0.0 };
            let u = space.interpolate(f);
            for t in 0..space.mesh.triangle_count() {
                let d = space.eval_local(&u, t, [0.21, 0.33], 0);
                let map = space.element_map(t);
                let x = map.to_physical([0.21, 0.33]);
                assert!((d.value - f(Point2::new(x[0], x[1]))).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn boundary_dofs_on_boundary_only() {
        let mesh = square().uniform_refine();
        let space = FeSpace::new(mesh, 3).unwrap();
        for (i, &b) in space.boundary_dof.iter().enumerate() {
            let p = space.dof_points[i];
            let on_boundary = p.x.abs() < 1e-12
                || (p.x - 1.0).abs() < 1e-12
                || p.y.abs() < 1e-12
                || (p.y - 1.0).abs() < 1e-12;
            assert_eq!(b, on_boundary, "dof {i} at ({}, {})", p.x, p.y);
        }
    }

    #[test]
    fn dof_points_are_consistent() {
        let mesh = square().uniform_refine().uniform_refine();
        let space = FeSpace::new(mesh, 4).unwrap();
        for p in &space.dof_points {
            assert!(p.x.is_finite() && p.y.is_finite());
        }
    }
}
