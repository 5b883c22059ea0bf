//! Element-local polynomial regularization of Dirac loads.
//!
//! Each point load `w delta_{x0}` is replaced by a polynomial `delta_h` of
//! the space's degree supported on the element containing `x0`, defined by
//! matching all polynomial moments: `int_K delta_h q = w q(x0)` for every
//! `q` of that degree. Testing the regularized load against the continuous
//! basis then reproduces the point evaluations exactly, so the discrete
//! solution is unchanged; the regularization only enters the corresponding
//! error estimator.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::mesh::Point2;
use crate::quadrature;
use crate::space::FeSpace;

/// One regularized point load: local basis coefficients on its element.
#[derive(Debug, Clone)]
pub struct DeltaProjection {
    pub triangle: usize,
    pub coeffs: Vec<f64>,
    pub weight: f64,
}

impl DeltaProjection {
    /// Value of delta_h at a reference point of its element.
    pub fn eval_ref(&self, space: &FeSpace, rp: [f64; 2]) -> f64 {
        space
            .basis
            .eval(rp, 0)
            .iter()
            .zip(&self.coeffs)
            .map(|(v, c)| v.value * c)
            .sum()
    }
}

/// Moment-matching projection of `w delta_{x0}` onto the element found by
/// point location.
pub fn project_delta(space: &FeSpace, x0: Point2, weight: f64) -> Result<DeltaProjection> {
    let loc = space.mesh.locate_point(x0)?;
    let t = loc.triangle;
    let map = space.element_map(t);
    let n = space.basis.node_count;
    let rule = quadrature::triangle_rule(2 * space.degree)?;
    let mut mass = DMatrix::<f64>::zeros(n, n);
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let vals = space.basis.eval(*p, 0);
        for i in 0..n {
            for j in 0..n {
                mass[(i, j)] += w * map.det * vals[i].value * vals[j].value;
            }
        }
    }
    let rp = [loc.bary[1], loc.bary[2]];
    let point_vals = space.basis.eval(rp, 0);
    let rhs = DVector::from_iterator(n, point_vals.iter().map(|v| weight * v.value));
    let coeffs = mass
        .lu()
        .solve(&rhs)
        .expect("element mass matrix is invertible");
    Ok(DeltaProjection {
        triangle: t,
        coeffs: coeffs.iter().copied().collect(),
        weight,
    })
}

/// Load vector of the regularized Diracs: rhs_i = int delta_h phi_i.
pub fn assemble_regularized_rhs(
    space: &FeSpace,
    projections: &[DeltaProjection],
) -> Result<Vec<f64>> {
    let mut rhs = vec![0.0; space.n_dofs];
    let rule = quadrature::triangle_rule(2 * space.degree)?;
    for d in projections {
        let map = space.element_map(d.triangle);
        let dofs = &space.element_dofs[d.triangle];
        for (p, w) in rule.points.iter().zip(&rule.weights) {
            let vals = space.basis.eval(*p, 0);
            let dv: f64 = vals.iter().zip(&d.coeffs).map(|(v, c)| v.value * c).sum();
            for (i, v) in vals.iter().enumerate() {
                rhs[dofs[i]] += w * map.det * dv * v.value;
            }
        }
    }
    Ok(rhs)
}

/// L2 norm of delta_h over its element.
pub fn delta_l2_norm(space: &FeSpace, d: &DeltaProjection) -> Result<f64> {
    let map = space.element_map(d.triangle);
    let rule = quadrature::triangle_rule(2 * space.degree)?;
    let mut acc = 0.0;
    for (p, w) in rule.points.iter().zip(&rule.weights) {
        let v = d.eval_ref(space, *p);
        acc += w * map.det * v * v;
    }
    Ok(acc.sqrt())
}
