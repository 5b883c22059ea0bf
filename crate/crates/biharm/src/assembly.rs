//! Assembly of the C0 interior penalty system for the four boundary-condition
//! variants.
//!
//! The bilinear form is
//! `sum_K int (Lap u Lap v + mu1 grad u . grad v + mu2 u v)`
//! `- sum_e int ({Lap u}[grad v] + {Lap v}[grad u]) + sum_e (beta/h_e) int [grad u][grad v]`,
//! with the edge sums over all edges, except for the Navier variant which
//! penalizes interior edges only. Jumps are oriented by the normal pointing
//! out of the higher-indexed adjacent triangle.

use crate::basis::{push_forward, PhysDerivs};
use crate::error::Result;
use crate::mesh::Point2;
use crate::problem::{BcVariant, ProblemSpec};
use crate::quadrature::{self, graded_triangle_points};
use crate::space::FeSpace;
use crate::sparse::SymmetricCsr;

/// Dyadic grading depth used for singular source terms.
pub const GRADED_LEVELS: usize = 12;

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: SymmetricCsr,
    pub rhs: Vec<f64>,
    /// Prescribed value per dof after strong boundary conditions.
    pub constrained: Vec<Option<f64>>,
    /// Zero-mean constraint functional c_i = int phi_i (neumann variant).
    pub mean_constraint: Option<Vec<f64>>,
}

/// Geometry of one edge as used by the penalty terms.
pub struct EdgeContext {
    pub edge: usize,
    pub h: f64,
    /// Unit normal pointing out of `plus`.
    pub normal: [f64; 2],
    /// Higher-indexed adjacent triangle (K+), or the only one on the boundary.
    pub plus: usize,
    pub minus: Option<usize>,
    pub a: Point2,
    pub b: Point2,
}

impl EdgeContext {
    pub fn new(space: &FeSpace, eid: usize) -> Self {
        let e = &space.mesh.edges[eid];
        let (plus, minus) = match e.triangles.1 {
            Some(t2) => {
                let t1 = e.triangles.0;
                (t1.max(t2), Some(t1.min(t2)))
            }
            None => (e.triangles.0, None),
        };
        let a = space.mesh.vertices[e.vertices[0]];
        let b = space.mesh.vertices[e.vertices[1]];
        let h = e.length;
        let mut normal = [(b.y - a.y) / h, -(b.x - a.x) / h];
        // Flip so the normal points away from the opposite vertex of K+.
        let tv = space.mesh.triangles[plus].vertices;
        let opp = tv
            .iter()
            .copied()
            .find(|v| *v != e.vertices[0] && *v != e.vertices[1])
            .expect("triangle has a vertex off the edge");
        let ov = space.mesh.vertices[opp];
        if (ov.x - a.x) * normal[0] + (ov.y - a.y) * normal[1] > 0.0 {
            normal[0] = -normal[0];
            normal[1] = -normal[1];
        }
        EdgeContext {
            edge: eid,
            h,
            normal,
            plus,
            minus,
            a,
            b,
        }
    }

    pub fn point_at(&self, s: f64) -> [f64; 2] {
        [
            self.a.x + s * (self.b.x - self.a.x),
            self.a.y + s * (self.b.y - self.a.y),
        ]
    }
}

fn penalized_edges(space: &FeSpace, spec: &ProblemSpec) -> Vec<usize> {
    (0..space.mesh.edges.len())
        .filter(|&e| spec.penalize_boundary_edges() || !space.mesh.edges[e].is_boundary)
        .collect()
}

/// Combined dof list over the elements adjacent to an edge, K+ dofs first.
fn edge_dof_union(space: &FeSpace, ctx: &EdgeContext) -> Vec<usize> {
    let mut dofs = space.element_dofs[ctx.plus].clone();
    if let Some(minus) = ctx.minus {
        for &d in &space.element_dofs[minus] {
            if !dofs.contains(&d) {
                dofs.push(d);
            }
        }
    }
    dofs
}

/// Jump of the normal gradient and average of the Laplacian of every basis
/// function in the union list, at one physical point on the edge.
fn edge_traces(
    space: &FeSpace,
    ctx: &EdgeContext,
    union: &[usize],
    x: [f64; 2],
) -> (Vec<f64>, Vec<f64>) {
    let mut jump = vec![0.0; union.len()];
    let mut avg = vec![0.0; union.len()];
    let sides: &[(usize, f64)] = match ctx.minus {
        Some(minus) => &[(ctx.plus, 1.0), (minus, -1.0)],
        None => &[(ctx.plus, 1.0)],
    };
    let weight = if ctx.minus.is_some() { 0.5 } else { 1.0 };
    for &(t, sign) in sides {
        let map = space.element_map(t);
        let refs = space.basis.eval(map.to_reference(x), 2);
        for (i, r) in refs.iter().enumerate() {
            let p = push_forward(&map, r, 2);
            let dof = space.element_dofs[t][i];
            let c = union.iter().position(|&d| d == dof).unwrap();
            jump[c] += sign * (p.grad[0] * ctx.normal[0] + p.grad[1] * ctx.normal[1]);
            avg[c] += weight * p.laplacian;
        }
    }
    (jump, avg)
}

/// Assemble the stiffness matrix of the bilinear form.
pub fn assemble_bilinear(space: &FeSpace, spec: &ProblemSpec) -> Result<SymmetricCsr> {
    spec.validate()?;
    let m = space.degree;
    let edges = penalized_edges(space, spec);
    let edge_unions: Vec<(EdgeContext, Vec<usize>)> = edges
        .iter()
        .map(|&e| {
            let ctx = EdgeContext::new(space, e);
            let union = edge_dof_union(space, &ctx);
            (ctx, union)
        })
        .collect();
    let mut matrix = SymmetricCsr::from_cliques(
        space.n_dofs,
        space
            .element_dofs
            .iter()
            .map(|d| d.as_slice().to_vec())
            .chain(edge_unions.iter().map(|(_, u)| u.clone())),
    );

    let volume_rule = quadrature::triangle_rule(2 * m + 2)?;
    let n_loc = space.basis.node_count;
    let mut phys: Vec<Vec<PhysDerivs>> = Vec::new();
    for t in 0..space.mesh.triangle_count() {
        let map = space.element_map(t);
        phys.clear();
        for p in &volume_rule.points {
            let refs = space.basis.eval(*p, 2);
            phys.push(refs.iter().map(|r| push_forward(&map, r, 2)).collect());
        }
        let dofs = &space.element_dofs[t];
        for i in 0..n_loc {
            for j in 0..=i {
                let mut acc = 0.0;
                for (q, w) in volume_rule.weights.iter().enumerate() {
                    let (a, b) = (&phys[q][i], &phys[q][j]);
                    acc += w
                        * (a.laplacian * b.laplacian
                            + spec.mu1 * (a.grad[0] * b.grad[0] + a.grad[1] * b.grad[1])
                            + spec.mu2 * a.value * b.value);
                }
                matrix.add(dofs[i], dofs[j], acc * map.det);
            }
        }
    }

    let edge_rule = quadrature::segment_rule(2 * m)?;
    for (ctx, union) in &edge_unions {
        let n = union.len();
        let mut local = vec![0.0; n * n];
        for (s, w) in edge_rule.points.iter().zip(&edge_rule.weights) {
            let x = ctx.point_at(*s);
            let (jump, avg) = edge_traces(space, ctx, union, x);
            let wl = w * ctx.h;
            for i in 0..n {
                for j in 0..=i {
                    local[i * n + j] += wl
                        * (-(avg[i] * jump[j] + avg[j] * jump[i])
                            + spec.beta / ctx.h * jump[i] * jump[j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..=i {
                matrix.add(union[i], union[j], local[i * n + j]);
            }
        }
    }
    Ok(matrix)
}

/// Point-load contributions: rhs_i += sum of w phi_i(x_load).
pub fn assemble_point_loads(space: &FeSpace, spec: &ProblemSpec) -> Result<Vec<f64>> {
    let mut rhs = vec![0.0; space.n_dofs];
    let locator = space.mesh.locator();
    for &(x, w) in &spec.point_loads {
        let loc = locator.locate(x)?;
        let rp = [loc.bary[1], loc.bary[2]];
        let vals = space.basis.eval(rp, 0);
        for (i, v) in vals.iter().enumerate() {
            rhs[space.element_dofs[loc.triangle][i]] += w * v.value;
        }
    }
    Ok(rhs)
}

/// Volume source and non-homogeneous boundary-data contributions.
pub fn assemble_source_and_boundary(space: &FeSpace, spec: &ProblemSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let m = space.degree;
    let mut rhs = vec![0.0; space.n_dofs];
    if let Some(f) = &spec.source {
        let rule = quadrature::triangle_rule(2 * m + 2)?;
        let singular = match spec.source_singularity {
            Some(p) => {
                let locator = space.mesh.locator();
                Some((p, locator.locate(p)?))
            }
            None => None,
        };
        for t in 0..space.mesh.triangle_count() {
            let map = space.element_map(t);
            let graded = match &singular {
                Some((p, loc)) if loc.triangle == t => Some(*p),
                Some((p, _)) => {
                    // The singular point can touch several elements when it
                    // sits on a shared edge or vertex; grade all of them.
                    let r = map.to_reference([p.x, p.y]);
                    let inside =
                        r[0] >= -1e-12 && r[1] >= -1e-12 && r[0] + r[1] <= 1.0 + 1e-12;
                    inside.then_some(*p)
                }
                None => None,
            };
            let dofs = &space.element_dofs[t];
            if let Some(p) = graded {
                for (x, w) in
                    graded_triangle_points(space.mesh.triangle_coords(t), [p.x, p.y], GRADED_LEVELS, &rule)
                {
                    let fv = f(Point2::new(x[0], x[1]));
                    let vals = space.basis.eval(map.to_reference(x), 0);
                    for (i, v) in vals.iter().enumerate() {
                        rhs[dofs[i]] += w * fv * v.value;
                    }
                }
            } else {
                for (p, w) in rule.points.iter().zip(&rule.weights) {
                    let x = map.to_physical(*p);
                    let fv = f(Point2::new(x[0], x[1]));
                    let vals = space.basis.eval(*p, 0);
                    for (i, v) in vals.iter().enumerate() {
                        rhs[dofs[i]] += w * map.det * fv * v.value;
                    }
                }
            }
        }
    }
    match spec.bc {
        BcVariant::Dirichlet => {
            let gn = spec.g_n.as_ref().unwrap();
            boundary_edge_loop(space, |ctx, union, x, w, traces| {
                let gv = gn(Point2::new(x[0], x[1]));
                for (c, &dof) in union.iter().enumerate() {
                    rhs[dof] += w
                        * gv
                        * (-traces.1[c] + spec.beta / ctx.h * traces.0[c]);
                }
            })?;
        }
        BcVariant::Navier => {
            let gb = spec.g_b.as_ref().unwrap();
            boundary_edge_loop(space, |_ctx, union, x, w, traces| {
                let gv = gb(Point2::new(x[0], x[1]));
                for (c, &dof) in union.iter().enumerate() {
                    rhs[dof] += w * gv * traces.0[c];
                }
            })?;
        }
        BcVariant::Clamped | BcVariant::Neumann => {}
    }
    Ok(rhs)
}

/// Visit every boundary edge with its quadrature points and basis traces.
/// The callback receives (ctx, union dofs, physical point, physical weight,
/// (normal-gradient traces, laplacian traces)).
fn boundary_edge_loop(
    space: &FeSpace,
    mut body: impl FnMut(&EdgeContext, &[usize], [f64; 2], f64, &(Vec<f64>, Vec<f64>)),
) -> Result<()> {
    let rule = quadrature::segment_rule(2 * space.degree)?;
    for eid in 0..space.mesh.edges.len() {
        if !space.mesh.edges[eid].is_boundary {
            continue;
        }
        let ctx = EdgeContext::new(space, eid);
        let union = edge_dof_union(space, &ctx);
        for (s, w) in rule.points.iter().zip(&rule.weights) {
            let x = ctx.point_at(*s);
            let traces = edge_traces(space, &ctx, &union, x);
            body(&ctx, &union, x, w * ctx.h, &traces);
        }
    }
    Ok(())
}

/// Fix boundary value dofs to the interpolated boundary data and eliminate
/// them symmetrically (known columns moved to the rhs, unit diagonal).
pub fn apply_dirichlet_values(space: &FeSpace, spec: &ProblemSpec, system: &mut LinearSystem) {
    assert!(spec.has_strong_boundary_values());
    for (dof, &on_boundary) in space.boundary_dof.iter().enumerate() {
        if !on_boundary {
            continue;
        }
        let value = match (&spec.bc, &spec.g) {
            (BcVariant::Clamped, _) => 0.0,
            (_, Some(g)) => g(space.dof_points[dof]),
            _ => 0.0,
        };
        system.constrained[dof] = Some(value);
    }
    eliminate_constrained(system);
}

fn eliminate_constrained(system: &mut LinearSystem) {
    let a = &mut system.matrix;
    for i in 0..a.n {
        for k in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.col_idx[k] as usize;
            match (system.constrained[i], system.constrained[j]) {
                (Some(_), Some(_)) => {
                    a.values[k] = if i == j { 1.0 } else { 0.0 };
                }
                (Some(vi), None) => {
                    system.rhs[j] -= a.values[k] * vi;
                    a.values[k] = 0.0;
                }
                (None, Some(vj)) => {
                    system.rhs[i] -= a.values[k] * vj;
                    a.values[k] = 0.0;
                }
                (None, None) => {}
            }
        }
    }
    for (i, c) in system.constrained.iter().enumerate() {
        if let Some(v) = c {
            system.rhs[i] = *v;
        }
    }
}

/// Attach the zero-mean constraint functional c_i = int phi_i.
pub fn apply_zero_mean(space: &FeSpace, system: &mut LinearSystem) -> Result<()> {
    let rule = quadrature::triangle_rule(space.degree)?;
    let mut c = vec![0.0; space.n_dofs];
    for t in 0..space.mesh.triangle_count() {
        let map = space.element_map(t);
        let dofs = &space.element_dofs[t];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let vals = space.basis.eval(*p, 0);
            for (i, v) in vals.iter().enumerate() {
                c[dofs[i]] += w * map.det * v.value;
            }
        }
    }
    system.mean_constraint = Some(c);
    Ok(())
}

/// Full pipeline: bilinear form, load vector, boundary data, constraints.
pub fn assemble_system(space: &FeSpace, spec: &ProblemSpec) -> Result<LinearSystem> {
    spec.validate()?;
    let matrix = assemble_bilinear(space, spec)?;
    let mut rhs = assemble_point_loads(space, spec)?;
    for (r, s) in rhs.iter_mut().zip(assemble_source_and_boundary(space, spec)?) {
        *r += s;
    }
    let mut system = LinearSystem {
        matrix,
        rhs,
        constrained: vec![None; space.n_dofs],
        mean_constraint: None,
    };
    match spec.bc {
        BcVariant::Neumann => apply_zero_mean(space, &mut system)?,
        _ => apply_dirichlet_values(space, spec, &mut system),
    }
    Ok(system)
}

/// Replace the point-load part of the right-hand side by a precomputed
/// regularized load vector, then apply the same constraints.
pub fn assemble_system_with_rhs(
    space: &FeSpace,
    spec: &ProblemSpec,
    load_rhs: &[f64],
) -> Result<LinearSystem> {
    spec.validate()?;
    let matrix = assemble_bilinear(space, spec)?;
    let mut rhs = load_rhs.to_vec();
    for (r, s) in rhs.iter_mut().zip(assemble_source_and_boundary(space, spec)?) {
        *r += s;
    }
    let mut system = LinearSystem {
        matrix,
        rhs,
        constrained: vec![None; space.n_dofs],
        mean_constraint: None,
    };
    match spec.bc {
        BcVariant::Neumann => apply_zero_mean(space, &mut system)?,
        _ => apply_dirichlet_values(space, spec, &mut system),
    }
    Ok(system)
}
