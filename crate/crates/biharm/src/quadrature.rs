//! Gauss quadrature on the unit segment and the reference triangle.
//!
//! Triangle rules are Gauss product rules on collapsed (Duffy) coordinates:
//! exact to the requested polynomial degree, with all points inside the
//! element and positive weights.

use crate::error::{BiharmError, Result};

pub const MAX_TRIANGLE_DEGREE: usize = 14;

/// Quadrature rule on the unit segment [0, 1].
#[derive(Debug, Clone)]
pub struct SegmentRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// Quadrature rule on the reference triangle (0,0), (1,0), (0,1).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

/// Gauss-Legendre nodes and weights on [0, 1], exact through degree 2n-1.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut points = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Root of P_n on (-1, 1) by Newton from the Chebyshev-like guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (_, d2) = legendre_with_derivative(n, x);
                dp = d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        points[n - 1 - i] = 0.5 * (x + 1.0);
        weights[n - 1 - i] = 0.5 * w;
    }
    (points, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule on [0, 1] exact to the requested degree.
pub fn segment_rule(exact_degree: usize) -> Result<SegmentRule> {
    if exact_degree > 199 {
        return Err(BiharmError::Config(format!(
            "segment rule degree {exact_degree} out of range"
        )));
    }
    let n = exact_degree / 2 + 1;
    let (points, weights) = gauss_legendre_unit(n);
    Ok(SegmentRule {
        points,
        weights,
        exact_degree,
    })
}

/// Gauss product rule on the reference triangle exact to the requested degree.
pub fn triangle_rule(exact_degree: usize) -> Result<TriangleRule> {
    if exact_degree < 1 || exact_degree > MAX_TRIANGLE_DEGREE {
        return Err(BiharmError::Config(format!(
            "triangle rule degree {exact_degree} outside 1..={MAX_TRIANGLE_DEGREE}"
        )));
    }
    // Collapsed coordinates: x = u (1 - v), y = v, dx dy = (1 - v) du dv.
    // The integrand gains one degree in v from the Jacobian.
    let nu = exact_degree / 2 + 1;
    let nv = (exact_degree + 1) / 2 + 1;
    let (pu, wu) = gauss_legendre_unit(nu);
    let (pv, wv) = gauss_legendre_unit(nv);
    let mut points = Vec::with_capacity(nu * nv);
    let mut weights = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            points.push([pu[i] * (1.0 - pv[j]), pv[j]]);
            weights.push(wu[i] * wv[j] * (1.0 - pv[j]));
        }
    }
    Ok(TriangleRule {
        points,
        weights,
        exact_degree,
    })
}

/// Composite rule on a physical triangle, graded dyadically toward a
/// singular point on or inside it. Returns physical points with weights.
///
/// The triangle is first split by connecting `x0` to its vertices; each
/// resulting subtriangle (with `x0` as apex) is covered by `levels` annular
/// layers shrinking geometrically toward `x0`, plus an innermost cap, each
/// integrated with `rule`. Integrable singularities (log-type and worse,
/// up to r^-s with s < 2) converge geometrically in `levels`.
pub fn graded_triangle_points(
    coords: [[f64; 2]; 3],
    x0: [f64; 2],
    levels: usize,
    rule: &TriangleRule,
) -> Vec<([f64; 2], f64)> {
    let area2 = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    };
    let total = area2(coords[0], coords[1], coords[2]);
    let mut out = Vec::new();
    let push_tri = |a: [f64; 2], b: [f64; 2], c: [f64; 2], out: &mut Vec<([f64; 2], f64)>| {
        let mut s = area2(a, b, c);
        let (b, c) = if s < 0.0 {
            s = -s;
            (c, b)
        } else {
            (b, c)
        };
        if s <= 1e-14 * total.abs() {
            return;
        }
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let x = a[0] + (b[0] - a[0]) * p[0] + (c[0] - a[0]) * p[1];
            let y = a[1] + (b[1] - a[1]) * p[0] + (c[1] - a[1]) * p[1];
            out.push(([x, y], w * s));
        }
    };
    for i in 0..3 {
        let vi = coords[i];
        let vj = coords[(i + 1) % 3];
        // Subtriangle (x0, vi, vj); skipped when x0 is collinear with the edge.
        let on_edge = |s: f64| {
            [
                x0[0] + s * (vi[0] - x0[0]),
                x0[1] + s * (vi[1] - x0[1]),
            ]
        };
        let on_edge_j = |s: f64| {
            [
                x0[0] + s * (vj[0] - x0[0]),
                x0[1] + s * (vj[1] - x0[1]),
            ]
        };
        let mut outer = 1.0;
        for _ in 0..levels {
            let inner = 0.5 * outer;
            let (a1, b1) = (on_edge(outer), on_edge_j(outer));
            let (a0, b0) = (on_edge(inner), on_edge_j(inner));
            push_tri(a1, b1, b0, &mut out);
            push_tri(a1, b0, a0, &mut out);
            outer = inner;
        }
        push_tri(x0, on_edge(outer), on_edge_j(outer), &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Exact monomial integral over the reference triangle:
    /// int x^a y^b = a! b! / (a + b + 2)!.
    fn monomial_integral(a: usize, b: usize) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn segment_rule_constant() {
        let r = segment_rule(0).unwrap();
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn segment_rule_quartic_three_points() {
        let r = segment_rule(4).unwrap();
        assert_eq!(r.points.len(), 3);
        let v: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(4))
            .sum();
        assert!((v - 0.2).abs() < 1e-15);
    }

    #[test]
    fn segment_rule_degree_seven() {
        let r = segment_rule(7).unwrap();
        assert_eq!(r.points.len(), 4);
        let v: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(x, w)| w * x.powi(7))
            .sum();
        assert!((v - 0.125).abs() < 1e-15);
    }

    #[test]
    fn segment_rules_integrate_all_monomials() {
        for d in 0..=20 {
            let r = segment_rule(d).unwrap();
            for a in 0..=d {
                let v: f64 = r
                    .points
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(a as i32))
                    .sum();
                let exact = 1.0 / (a as f64 + 1.0);
                assert!(
                    (v - exact).abs() < 1e-14,
                    "degree {d} monomial x^{a}: {v} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn triangle_rule_measure() {
        for d in 1..=MAX_TRIANGLE_DEGREE {
            let r = triangle_rule(d).unwrap();
            let total: f64 = r.weights.iter().sum();
            assert!((total - 0.5).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn triangle_rule_x2y2() {
        let r = triangle_rule(4).unwrap();
        let v: f64 = r
            .points
            .iter()
            .zip(&r.weights)
            .map(|(p, w)| w * p[0] * p[0] * p[1] * p[1])
            .sum();
        assert!((v - 1.0 / 180.0).abs() < 1e-15);
    }

    #[test]
    fn triangle_rules_match_factorial_formula() {
        for d in 1..=MAX_TRIANGLE_DEGREE {
            let r = triangle_rule(d).unwrap();
            for a in 0..=d {
                for b in 0..=(d - a) {
                    let v: f64 = r
                        .points
                        .iter()
                        .zip(&r.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32))
                        .sum();
                    let exact = monomial_integral(a, b);
                    assert!(
                        (v - exact).abs() < 1e-13 * (1.0 + exact.abs()),
                        "degree {d} monomial x^{a} y^{b}: {v} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn triangle_rule_points_inside() {
        for d in 1..=MAX_TRIANGLE_DEGREE {
            let r = triangle_rule(d).unwrap();
            for (p, w) in r.points.iter().zip(&r.weights) {
                assert!(*w > 0.0);
                assert!(p[0] > 0.0 && p[1] > 0.0 && p[0] + p[1] < 1.0);
            }
        }
    }

    #[test]
    fn triangle_rule_rejects_out_of_range() {
        assert!(triangle_rule(0).is_err());
        assert!(triangle_rule(MAX_TRIANGLE_DEGREE + 1).is_err());
    }

    #[test]
    fn graded_rule_reproduces_smooth_integrals() {
        let rule = triangle_rule(6).unwrap();
        let coords = [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]];
        // x0 interior.
        let pts = graded_triangle_points(coords, [0.5, 0.5], 10, &rule);
        let total: f64 = pts.iter().map(|(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-12, "area = {total}");
        let vx: f64 = pts.iter().map(|(p, w)| w * p[0] * p[0]).sum();
        // Scaling x -> 2x, y -> 2y maps the reference monomial integral
        // 2!0!/4! = 1/12 to 2^2 * 4 * 1/12.
        let exact = 16.0 / 12.0;
        assert!((vx - exact).abs() < 1e-11, "{vx} vs {exact}");
    }

    #[test]
    fn graded_rule_handles_vertex_singularity() {
        // int_T log|x| over the unit reference triangle with the singularity
        // at the origin; exact value -3/4 - pi/4 ... computed analytically:
        // int_0^{pi/2} int_0^{r(t)} ln(r) r dr dt with the hypotenuse
        // boundary. Compare against a very deep grading as the oracle.
        let rule = triangle_rule(12).unwrap();
        let coords = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let f = |p: [f64; 2]| (p[0] * p[0] + p[1] * p[1]).sqrt().ln();
        let shallow: f64 = graded_triangle_points(coords, [0.0, 0.0], 12, &rule)
            .iter()
            .map(|(p, w)| w * f(*p))
            .sum();
        let deep: f64 = graded_triangle_points(coords, [0.0, 0.0], 26, &rule)
            .iter()
            .map(|(p, w)| w * f(*p))
            .sum();
        assert!(
            (shallow - deep).abs() < 1e-7,
            "graded integral unstable: {shallow} vs {deep}"
        );
    }
}
