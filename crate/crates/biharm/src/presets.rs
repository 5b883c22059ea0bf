//! Ready-made benchmark problems: an L-shaped clamped plate with a point
//! load, square plates with a known shifted fundamental solution under
//! Dirichlet or Navier conditions, and a Neumann pair of balanced loads.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{BiharmError, Result};
use crate::mesh::{Mesh, Point2};
use crate::norms::ExactSolution;
use crate::problem::{BcVariant, ProblemSpec, ScalarField};

/// A benchmark instance: problem data, initial mesh, and the exact solution
/// when one is known in closed form.
pub struct PresetProblem {
    pub name: String,
    pub spec: ProblemSpec,
    pub mesh: Mesh,
    pub exact: Option<ExactSolution>,
}

/// Criss-cross mesh on the tensor grid `xs` x `ys`: every retained cell is
/// split into four triangles around its barycenter.
fn criss_cross(xs: &[f64], ys: &[f64], keep: impl Fn(f64, f64) -> bool) -> Result<Mesh> {
    let nx = xs.len();
    let mut vertices: Vec<Point2> = Vec::new();
    for &y in ys {
        for &x in xs {
            vertices.push(Point2::new(x, y));
        }
    }
    let node = |i: usize, j: usize| j * nx + i;
    let mut triangles = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let cx = 0.5 * (xs[i] + xs[i + 1]);
            let cy = 0.5 * (ys[j] + ys[j + 1]);
            if !keep(cx, cy) {
                continue;
            }
            let c = vertices.len();
            vertices.push(Point2::new(cx, cy));
            let (ll, lr, ur, ul) = (node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1));
            triangles.push([ll, lr, c]);
            triangles.push([lr, ur, c]);
            triangles.push([ur, ul, c]);
            triangles.push([ul, ll, c]);
        }
    }
    // Grid nodes inside a dropped region belong to no triangle; compact them
    // away so every vertex carries a dof.
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for t in &mut triangles {
        for v in t.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = kept.len();
                kept.push(vertices[*v]);
            }
            *v = remap[*v];
        }
    }
    let parents = vec![None; triangles.len()];
    Mesh::assemble(kept, triangles, parents)
}

fn pi_grid() -> Vec<f64> {
    vec![-2.0 * PI, -PI, 0.0, PI, 2.0 * PI]
}

/// Clamped plate on the L-shaped domain (-2pi,2pi)^2 minus the fourth
/// quadrant, unit point load at (-pi, pi), criss-cross starting mesh of 48
/// triangles.
pub fn lshape_clamped(beta: f64) -> Result<PresetProblem> {
    let g = pi_grid();
    let mesh = criss_cross(&g, &g, |cx, cy| !(cx > 0.0 && cy < 0.0))?;
    let spec = ProblemSpec::clamped_point_load(Point2::new(-PI, PI), beta);
    Ok(PresetProblem {
        name: "lshape-clamped".into(),
        spec,
        mesh,
        exact: None,
    })
}

/// Load placements on the square exercising the three relevant positions
/// of a point load relative to the mesh: a grid node, the interior of an
/// interior edge, and the interior of an element.
pub fn square_case_point(case: usize) -> Result<Point2> {
    match case {
        1 => Ok(Point2::new(0.0, 0.0)),
        2 => Ok(Point2::new(-(7.0f64).sqrt(), -PI)),
        3 => Ok(Point2::new(5.0f64.sqrt(), 8.0f64.sqrt())),
        _ => Err(BiharmError::Config(format!(
            "case must be 1, 2 or 3, got {case}"
        ))),
    }
}

/// Shifted fundamental solution of the bilaplacian,
/// u(x) = |x - x0|^2 ln|x - x0| / (8 pi), with its derivatives.
fn fundamental_shift(x0: Point2) -> ExactSolution {
    let val = move |p: Point2| {
        let (dx, dy) = (p.x - x0.x, p.y - x0.y);
        let rho = dx * dx + dy * dy;
        if rho <= f64::MIN_POSITIVE {
            0.0
        } else {
            rho * rho.ln() / (16.0 * PI)
        }
    };
    let grad = move |p: Point2| {
        let (dx, dy) = (p.x - x0.x, p.y - x0.y);
        let rho = dx * dx + dy * dy;
        if rho <= f64::MIN_POSITIVE {
            return [0.0, 0.0];
        }
        let s = (rho.ln() + 1.0) / (8.0 * PI);
        [dx * s, dy * s]
    };
    let hess = move |p: Point2| {
        let (dx, dy) = (p.x - x0.x, p.y - x0.y);
        let rho = dx * dx + dy * dy;
        if rho <= f64::MIN_POSITIVE {
            return [0.0, 0.0, 0.0];
        }
        let s = (rho.ln() + 1.0) / (8.0 * PI);
        let q = 1.0 / (4.0 * PI * rho);
        [s + dx * dx * q, dx * dy * q, s + dy * dy * q]
    };
    ExactSolution {
        value: Arc::new(val),
        gradient: Arc::new(grad),
        hessian: Arc::new(hess),
        singularity: Some(x0),
    }
}

/// Laplacian of the shifted fundamental solution, (ln|x - x0|^2 + 2)/(4 pi).
fn fundamental_laplacian(x0: Point2) -> impl Fn(Point2) -> f64 + Send + Sync + Copy {
    move |p: Point2| {
        let (dx, dy) = (p.x - x0.x, p.y - x0.y);
        let rho = dx * dx + dy * dy;
        if rho <= f64::MIN_POSITIVE {
            0.0
        } else {
            (rho.ln() + 2.0) / (4.0 * PI)
        }
    }
}

/// Outward unit normal of the square (-2pi, 2pi)^2 at a boundary point.
fn square_normal(p: Point2) -> [f64; 2] {
    let l = 2.0 * PI;
    let tol = 1e-9;
    if (p.x - l).abs() < tol {
        [1.0, 0.0]
    } else if (p.x + l).abs() < tol {
        [-1.0, 0.0]
    } else if (p.y - l).abs() < tol {
        [0.0, 1.0]
    } else {
        [0.0, -1.0]
    }
}

fn square_problem(bc: BcVariant, case: usize, beta: f64) -> Result<PresetProblem> {
    let g = pi_grid();
    let mesh = criss_cross(&g, &g, |_, _| true)?;
    let x0 = square_case_point(case)?;
    let exact = fundamental_shift(x0);
    let (mu1, mu2) = (1.0, 1.0);
    let lap = fundamental_laplacian(x0);
    let uval = exact.value.clone();
    let f: ScalarField = Arc::new(move |p| mu2 * uval(p) - mu1 * lap(p));
    let g_val: ScalarField = {
        let uval = exact.value.clone();
        Arc::new(move |p| uval(p))
    };
    let mut spec = ProblemSpec {
        bc,
        mu1,
        mu2,
        beta,
        point_loads: vec![(x0, 1.0)],
        source: Some(f),
        source_singularity: Some(x0),
        g: Some(g_val),
        g_n: None,
        g_b: None,
    };
    let name = match bc {
        BcVariant::Dirichlet => {
            let ugrad = exact.gradient.clone();
            spec.g_n = Some(Arc::new(move |p| {
                let n = square_normal(p);
                let gr = ugrad(p);
                gr[0] * n[0] + gr[1] * n[1]
            }));
            "square-dirichlet"
        }
        BcVariant::Navier => {
            spec.g_b = Some(Arc::new(lap));
            "square-navier"
        }
        _ => {
            return Err(BiharmError::Config(
                "square benchmark supports dirichlet and navier variants".into(),
            ))
        }
    };
    Ok(PresetProblem {
        name: format!("{name}-case{case}"),
        spec,
        mesh,
        exact: Some(exact),
    })
}

/// Square plate with non-homogeneous clamped data matching the shifted
/// fundamental solution.
pub fn square_dirichlet(case: usize, beta: f64) -> Result<PresetProblem> {
    square_problem(BcVariant::Dirichlet, case, beta)
}

/// Simply supported square plate with the same exact solution.
pub fn square_navier(case: usize, beta: f64) -> Result<PresetProblem> {
    square_problem(BcVariant::Navier, case, beta)
}

/// Square plate with natural boundary conditions and two balancing point
/// loads; the solution is fixed by a zero-mean constraint.
pub fn square_neumann(beta: f64) -> Result<PresetProblem> {
    let g = pi_grid();
    let mesh = criss_cross(&g, &g, |_, _| true)?;
    let mut spec = ProblemSpec::clamped_point_load(Point2::new(PI, 0.0), beta);
    spec.bc = BcVariant::Neumann;
    spec.point_loads = vec![
        (Point2::new(PI, 0.0), 1.0),
        (Point2::new(-PI, 0.0), -1.0),
    ];
    Ok(PresetProblem {
        name: "square-neumann".into(),
        spec,
        mesh,
        exact: None,
    })
}

/// Look a preset up by its command-line name. `case` selects the load
/// placement for the square benchmarks and is ignored otherwise.
pub fn by_name(name: &str, case: usize, beta: f64) -> Result<PresetProblem> {
    match name {
        "lshape-clamped" => lshape_clamped(beta),
        "square-dirichlet" => square_dirichlet(case, beta),
        "square-navier" => square_navier(case, beta),
        "square-neumann" => square_neumann(beta),
        _ => Err(BiharmError::Config(format!(
            "unknown preset {name:?}; available: lshape-clamped, \
             square-dirichlet, square-navier, square-neumann"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::LocationClass;

    #[test]
    fn lshape_mesh_shape() {
        let p = lshape_clamped(40.0).unwrap();
        assert_eq!(p.mesh.triangle_count(), 48);
        assert!((p.mesh.domain_area() - 12.0 * PI * PI).abs() < 1e-9);
        p.mesh.validate().unwrap();
        p.spec.validate().unwrap();
        // The reentrant corner is a boundary vertex.
        let corner = p
            .mesh
            .vertices
            .iter()
            .position(|v| v.x.abs() < 1e-12 && v.y.abs() < 1e-12)
            .unwrap();
        assert!(p.mesh.boundary_vertex[corner]);
        // The load sits inside the domain.
        p.mesh.locate_point(p.spec.point_loads[0].0).unwrap();
    }

    #[test]
    fn square_mesh_shape() {
        let p = square_dirichlet(1, 40.0).unwrap();
        assert_eq!(p.mesh.triangle_count(), 64);
        assert!((p.mesh.domain_area() - 16.0 * PI * PI).abs() < 1e-9);
        p.mesh.validate().unwrap();
        p.spec.validate().unwrap();
    }

    #[test]
    fn case_points_hit_node_edge_interior() {
        let p = square_dirichlet(1, 40.0).unwrap();
        let classes: Vec<LocationClass> = (1..=3)
            .map(|c| {
                p.mesh
                    .locate_point(square_case_point(c).unwrap())
                    .unwrap()
                    .class
            })
            .collect();
        assert_eq!(
            classes,
            vec![
                LocationClass::Vertex,
                LocationClass::Edge,
                LocationClass::Interior
            ]
        );
        assert!(square_case_point(0).is_err());
        assert!(square_case_point(4).is_err());
    }

    #[test]
    fn exact_derivatives_are_consistent() {
        // Finite differences of the closed forms at a generic point.
        let x0 = square_case_point(3).unwrap();
        let e = fundamental_shift(x0);
        let p = Point2::new(-1.3, 0.7);
        let h = 1e-6;
        let gx = ((e.value)(Point2::new(p.x + h, p.y)) - (e.value)(Point2::new(p.x - h, p.y)))
            / (2.0 * h);
        let gy = ((e.value)(Point2::new(p.x, p.y + h)) - (e.value)(Point2::new(p.x, p.y - h)))
            / (2.0 * h);
        let g = (e.gradient)(p);
        assert!((gx - g[0]).abs() < 1e-8 && (gy - g[1]).abs() < 1e-8);
        let hxx = ((e.gradient)(Point2::new(p.x + h, p.y))[0]
            - (e.gradient)(Point2::new(p.x - h, p.y))[0])
            / (2.0 * h);
        let hxy = ((e.gradient)(Point2::new(p.x, p.y + h))[0]
            - (e.gradient)(Point2::new(p.x, p.y - h))[0])
            / (2.0 * h);
        let hyy = ((e.gradient)(Point2::new(p.x, p.y + h))[1]
            - (e.gradient)(Point2::new(p.x, p.y - h))[1])
            / (2.0 * h);
        let hh = (e.hessian)(p);
        assert!((hxx - hh[0]).abs() < 1e-7);
        assert!((hxy - hh[1]).abs() < 1e-7);
        assert!((hyy - hh[2]).abs() < 1e-7);
        // Trace of the hessian equals the closed-form laplacian.
        let lap = fundamental_laplacian(x0)(p);
        assert!((hh[0] + hh[2] - lap).abs() < 1e-12);
    }

    #[test]
    fn source_matches_operator_remainder() {
        // With biharmonic part exactly the point load, the residual source is
        // f = mu2 u - mu1 laplacian(u).
        let p = square_navier(2, 40.0).unwrap();
        let x0 = square_case_point(2).unwrap();
        let e = fundamental_shift(x0);
        let q = Point2::new(2.0, -4.0);
        let f = p.spec.source.as_ref().unwrap()(q);
        let expect = (e.value)(q) - fundamental_laplacian(x0)(q);
        assert!((f - expect).abs() < 1e-14);
        // Navier boundary data is the laplacian trace.
        let b = Point2::new(2.0 * PI, 1.0);
        let gb = p.spec.g_b.as_ref().unwrap()(b);
        assert!((gb - fundamental_laplacian(x0)(b)).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_normal_data_dispatches_by_side() {
        let p = square_dirichlet(3, 40.0).unwrap();
        let x0 = square_case_point(3).unwrap();
        let e = fundamental_shift(x0);
        let gn = p.spec.g_n.as_ref().unwrap();
        let l = 2.0 * PI;
        let samples = [
            (Point2::new(l, 0.3), [1.0, 0.0]),
            (Point2::new(-l, -1.2), [-1.0, 0.0]),
            (Point2::new(0.4, l), [0.0, 1.0]),
            (Point2::new(-2.0, -l), [0.0, -1.0]),
        ];
        for (pt, n) in samples {
            let g = (e.gradient)(pt);
            assert!((gn(pt) - (g[0] * n[0] + g[1] * n[1])).abs() < 1e-14);
        }
    }

    #[test]
    fn neumann_preset_balances() {
        let p = square_neumann(40.0).unwrap();
        p.spec.validate().unwrap();
        assert!(p.exact.is_none());
        assert_eq!(p.mesh.triangle_count(), 64);
    }

    #[test]
    fn lookup_by_name() {
        assert!(by_name("lshape-clamped", 1, 40.0).is_ok());
        assert!(by_name("square-navier", 3, 40.0).is_ok());
        assert!(by_name("nope", 1, 40.0).is_err());
        assert!(by_name("square-dirichlet", 9, 40.0).is_err());
    }
}
