//! Error norms for convergence studies.
//!
//! The energy error is the broken H2 seminorm of u - u_h plus the
//! beta/h_e-weighted squared normal-gradient jumps over the penalized edge
//! set; exact solutions are smooth across edges so only the discrete jumps
//! contribute there. Quadrature is graded dyadically toward a designated
//! singular point of the exact solution.

use std::sync::Arc;

use crate::assembly::EdgeContext;
use crate::error::{BiharmError, Result};
use crate::mesh::Point2;
use crate::problem::ProblemSpec;
use crate::quadrature::{self, graded_triangle_points, MAX_TRIANGLE_DEGREE};
use crate::space::FeSpace;

/// Grading depth toward the singular point for error quadrature.
pub const ERROR_GRADED_LEVELS: usize = 12;

/// Exact solution with the derivatives the energy norm needs.
#[derive(Clone)]
pub struct ExactSolution {
    pub value: Arc<dyn Fn(Point2) -> f64 + Send + Sync>,
    pub gradient: Arc<dyn Fn(Point2) -> [f64; 2] + Send + Sync>,
    /// Second derivatives (u_xx, u_xy, u_yy).
    pub hessian: Arc<dyn Fn(Point2) -> [f64; 3] + Send + Sync>,
    /// Point the derivatives blow up at, if any; quadrature grades toward it.
    pub singularity: Option<Point2>,
}

impl ExactSolution {
    /// Smooth exact solution from closures for value, gradient, hessian.
    pub fn smooth(
        value: impl Fn(Point2) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(Point2) -> [f64; 2] + Send + Sync + 'static,
        hessian: impl Fn(Point2) -> [f64; 3] + Send + Sync + 'static,
    ) -> Self {
        ExactSolution {
            value: Arc::new(value),
            gradient: Arc::new(gradient),
            hessian: Arc::new(hessian),
            singularity: None,
        }
    }
}

/// Energy norm of u - u_h; see module docs.
pub fn energy_error(
    space: &FeSpace,
    u_h: &[f64],
    exact: &ExactSolution,
    spec: &ProblemSpec,
) -> Result<f64> {
    energy_error_with_depth(space, u_h, exact, spec, ERROR_GRADED_LEVELS, 2 * space.degree + 4)
}

/// Broken H2 seminorm of u - u_h, without the edge penalty terms. This is
/// the measure the convergence-rate tables use.
pub fn h2_error(space: &FeSpace, u_h: &[f64], exact: &ExactSolution) -> Result<f64> {
    let spec = ProblemSpec::clamped_point_load(Point2::new(0.0, 0.0), 1.0);
    error_with_depth(
        space,
        u_h,
        exact,
        &spec,
        ERROR_GRADED_LEVELS,
        2 * space.degree + 4,
        false,
    )
}

/// Depth-configurable variant used by the self-validation tests.
pub fn energy_error_with_depth(
    space: &FeSpace,
    u_h: &[f64],
    exact: &ExactSolution,
    spec: &ProblemSpec,
    graded_levels: usize,
    quad_degree: usize,
) -> Result<f64> {
    error_with_depth(space, u_h, exact, spec, graded_levels, quad_degree, true)
}

fn error_with_depth(
    space: &FeSpace,
    u_h: &[f64],
    exact: &ExactSolution,
    spec: &ProblemSpec,
    graded_levels: usize,
    quad_degree: usize,
    include_jumps: bool,
) -> Result<f64> {
    let rule = quadrature::triangle_rule(quad_degree.min(MAX_TRIANGLE_DEGREE))?;
    let mut acc = 0.0;
    for t in 0..space.mesh.triangle_count() {
        let map = space.element_map(t);
        let term = |x: [f64; 2]| -> f64 {
            let d = space.eval_local(u_h, t, map.to_reference(x), 2);
            let he = (exact.hessian)(Point2::new(x[0], x[1]));
            let exx = he[0] - d.hess[0];
            let exy = he[1] - d.hess[1];
            let eyy = he[2] - d.hess[2];
            exx * exx + 2.0 * exy * exy + eyy * eyy
        };
        let graded = exact.singularity.and_then(|p| {
            let r = map.to_reference([p.x, p.y]);
            let inside = r[0] >= -1e-12 && r[1] >= -1e-12 && r[0] + r[1] <= 1.0 + 1e-12;
            inside.then_some(p)
        });
        if let Some(p) = graded {
            for (x, w) in graded_triangle_points(
                space.mesh.triangle_coords(t),
                [p.x, p.y],
                graded_levels,
                &rule,
            ) {
                acc += w * term(x);
            }
        } else {
            for (rp, w) in rule.points.iter().zip(&rule.weights) {
                acc += w * map.det * term(map.to_physical(*rp));
            }
        }
    }

    if !include_jumps {
        return Ok(acc.sqrt());
    }
    let seg = quadrature::segment_rule(2 * space.degree + 4)?;
    for eid in 0..space.mesh.edges.len() {
        let is_boundary = space.mesh.edges[eid].is_boundary;
        if is_boundary && !spec.penalize_boundary_edges() {
            continue;
        }
        let ctx = EdgeContext::new(space, eid);
        let mut j = 0.0;
        for (s, w) in seg.points.iter().zip(&seg.weights) {
            let x = ctx.point_at(*s);
            let dp = space.eval_local(u_h, ctx.plus, space.element_map(ctx.plus).to_reference(x), 1);
            let mut jump = dp.grad[0] * ctx.normal[0] + dp.grad[1] * ctx.normal[1];
            if let Some(minus) = ctx.minus {
                let dm = space.eval_local(u_h, minus, space.element_map(minus).to_reference(x), 1);
                jump -= dm.grad[0] * ctx.normal[0] + dm.grad[1] * ctx.normal[1];
            } else {
                // The exact trace enters only on boundary edges.
                let g = (exact.gradient)(Point2::new(x[0], x[1]));
                jump = (g[0] * ctx.normal[0] + g[1] * ctx.normal[1]) - jump;
            }
            j += w * ctx.h * jump * jump;
        }
        acc += spec.beta / ctx.h * j;
    }
    Ok(acc.sqrt())
}

/// Broken H2 seminorm of u_fine - u_coarse, integrated on the fine mesh with
/// the coarse solution evaluated through point location. The coarse mesh must
/// be an ancestor of the fine one.
pub fn discrete_difference_error(
    fine: &FeSpace,
    u_fine: &[f64],
    coarse: &FeSpace,
    u_coarse: &[f64],
) -> Result<f64> {
    let rule = quadrature::triangle_rule((2 * fine.degree.max(coarse.degree)).min(MAX_TRIANGLE_DEGREE))?;
    let locator = coarse.mesh.locator();
    let nonnested = || BiharmError::Geometry("meshes are not nested".into());
    let mut acc = 0.0;
    for t in 0..fine.mesh.triangle_count() {
        let map = fine.element_map(t);
        let coords = fine.mesh.triangle_coords(t);
        let bx = (coords[0][0] + coords[1][0] + coords[2][0]) / 3.0;
        let by = (coords[0][1] + coords[1][1] + coords[2][1]) / 3.0;
        let loc = locator
            .locate(Point2::new(bx, by))
            .map_err(|_| nonnested())?;
        let ct = loc.triangle;
        let cmap = coarse.element_map(ct);
        // Nestedness: every vertex of the fine element lies in that coarse
        // element (up to roundoff).
        for c in &coords {
            let r = cmap.to_reference(*c);
            if r[0] < -1e-9 || r[1] < -1e-9 || r[0] + r[1] > 1.0 + 1e-9 {
                return Err(nonnested());
            }
        }
        for (rp, w) in rule.points.iter().zip(&rule.weights) {
            let x = map.to_physical(*rp);
            let df = fine.eval_local(u_fine, t, *rp, 2);
            let dc = coarse.eval_local(u_coarse, ct, cmap.to_reference(x), 2);
            let exx = df.hess[0] - dc.hess[0];
            let exy = df.hess[1] - dc.hess[1];
            let eyy = df.hess[2] - dc.hess[2];
            acc += w * map.det * (exx * exx + 2.0 * exy * exy + eyy * eyy);
        }
    }
    Ok(acc.sqrt())
}

/// Convergence rate between consecutive errors: log2(prev / curr).
/// Nonpositive inputs have no meaningful rate.
pub fn rate(prev: f64, curr: f64) -> Option<f64> {
    if prev > 0.0 && curr > 0.0 {
        Some((prev / curr).log2())
    } else {
        None
    }
}
