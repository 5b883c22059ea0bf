//! Problem descriptions: operator coefficients, boundary-condition variant,
//! point loads and data callbacks.

use std::sync::Arc;

use crate::error::{BiharmError, Result};
use crate::mesh::Point2;

pub type ScalarField = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcVariant {
    /// u = 0 and du/dn = 0 on the boundary.
    Clamped,
    /// u = g and du/dn = g_N on the boundary (non-homogeneous clamped data).
    Dirichlet,
    /// u = g strongly, Laplacian boundary data g_B weakly (simply supported).
    Navier,
    /// Homogeneous natural boundary data with a zero-mean constraint.
    Neumann,
}

/// Fourth-order model problem
/// `Laplacian^2 u - mu1 Laplacian u + mu2 u = sum_i w_i delta_{x_i} + f`.
#[derive(Clone)]
pub struct ProblemSpec {
    pub bc: BcVariant,
    pub mu1: f64,
    pub mu2: f64,
    /// Interior penalty parameter.
    pub beta: f64,
    pub point_loads: Vec<(Point2, f64)>,
    pub source: Option<ScalarField>,
    /// Location of a non-smooth point of `source`, if any; quadrature for the
    /// load vector is graded toward it.
    pub source_singularity: Option<Point2>,
    /// Boundary value u = g (dirichlet/navier).
    pub g: Option<ScalarField>,
    /// Boundary normal derivative data (dirichlet).
    pub g_n: Option<ScalarField>,
    /// Boundary Laplacian data (navier).
    pub g_b: Option<ScalarField>,
}

impl ProblemSpec {
    /// Default penalty for degree m, large enough for coercivity on
    /// shape-regular meshes.
    pub fn default_beta(m: usize) -> f64 {
        10.0 * (m * m) as f64
    }

    /// Homogeneous clamped plate with a unit point load.
    pub fn clamped_point_load(x0: Point2, beta: f64) -> Self {
        ProblemSpec {
            bc: BcVariant::Clamped,
            mu1: 0.0,
            mu2: 0.0,
            beta,
            point_loads: vec![(x0, 1.0)],
            source: None,
            source_singularity: None,
            g: None,
            g_n: None,
            g_b: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(BiharmError::Config(format!(
                "penalty beta must be positive, got {}",
                self.beta
            )));
        }
        if self.mu1 < 0.0 || self.mu2 < 0.0 {
            return Err(BiharmError::Config(
                "operator coefficients mu1, mu2 must be nonnegative".into(),
            ));
        }
        match self.bc {
            BcVariant::Neumann => {
                let total: f64 = self.point_loads.iter().map(|(_, w)| w).sum();
                let scale: f64 = self.point_loads.iter().map(|(_, w)| w.abs()).sum();
                if total.abs() > 1e-12 * scale.max(1.0) {
                    return Err(BiharmError::Config(format!(
                        "neumann point-load weights must sum to zero for solvability, got {total}"
                    )));
                }
                if self.g.is_some() || self.g_n.is_some() || self.g_b.is_some() {
                    return Err(BiharmError::Config(
                        "neumann variant takes no boundary data callbacks".into(),
                    ));
                }
            }
            BcVariant::Dirichlet => {
                if self.g.is_none() || self.g_n.is_none() {
                    return Err(BiharmError::Config(
                        "dirichlet variant requires boundary callbacks g and g_n".into(),
                    ));
                }
                if self.g_b.is_some() {
                    return Err(BiharmError::Config(
                        "dirichlet variant does not use g_b".into(),
                    ));
                }
            }
            BcVariant::Navier => {
                if self.g.is_none() || self.g_b.is_none() {
                    return Err(BiharmError::Config(
                        "navier variant requires boundary callbacks g and g_b".into(),
                    ));
                }
                if self.g_n.is_some() {
                    return Err(BiharmError::Config(
                        "navier variant does not use g_n".into(),
                    ));
                }
            }
            BcVariant::Clamped => {
                if self.g.is_some() || self.g_n.is_some() || self.g_b.is_some() {
                    return Err(BiharmError::Config(
                        "clamped variant is homogeneous; no boundary callbacks".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Edges carrying penalty and consistency terms: all edges except for the
    /// navier variant, which penalizes interior edges only.
    pub fn penalize_boundary_edges(&self) -> bool {
        self.bc != BcVariant::Navier
    }

    /// Whether boundary value dofs are constrained strongly.
    pub fn has_strong_boundary_values(&self) -> bool {
        self.bc != BcVariant::Neumann
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumann_weights_must_balance() {
        let mut spec = ProblemSpec::clamped_point_load(Point2::new(0.5, 0.5), 40.0);
        spec.bc = BcVariant::Neumann;
        assert!(spec.validate().is_err());
        spec.point_loads = vec![
            (Point2::new(0.25, 0.5), -1.0),
            (Point2::new(0.75, 0.5), 1.0),
        ];
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn beta_must_be_positive() {
        let spec = ProblemSpec::clamped_point_load(Point2::new(0.5, 0.5), 0.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn dirichlet_requires_callbacks() {
        let mut spec = ProblemSpec::clamped_point_load(Point2::new(0.5, 0.5), 40.0);
        spec.bc = BcVariant::Dirichlet;
        assert!(spec.validate().is_err());
        spec.g = Some(Arc::new(|_| 0.0));
        spec.g_n = Some(Arc::new(|_| 0.0));
        assert!(spec.validate().is_ok());
    }
}
