//! Lagrange bases P2-P4 on the reference triangle with exact derivatives
//! through fourth order, plus affine push-forward to physical elements.
//!
//! Nodes sit on the equispaced lattice of the reference triangle with
//! vertices (0,0), (1,0), (0,1). Basis polynomials are recovered in the
//! monomial form by inverting the nodal Vandermonde matrix; derivatives are
//! taken on the monomial coefficients, so no differencing is involved.

use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{BiharmError, Result};

/// Highest derivative order carried by the evaluation tables.
pub const MAX_DERIV_ORDER: usize = 4;

/// Bivariate polynomial as a dense coefficient grid c[p][q] for x^p y^q.
#[derive(Debug, Clone)]
struct PolyGrid {
    side: usize,
    c: Vec<f64>,
}

impl PolyGrid {
    fn zero(side: usize) -> Self {
        PolyGrid {
            side,
            c: vec![0.0; side * side],
        }
    }

    fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in x, then y.
        let mut acc = 0.0;
        for p in (0..self.side).rev() {
            let mut row = 0.0;
            for q in (0..self.side).rev() {
                row = row * y + self.c[p * self.side + q];
            }
            acc = acc * x + row;
        }
        acc
    }

    fn derivative(&self, dx: usize, dy: usize) -> PolyGrid {
        let mut out = PolyGrid::zero(self.side);
        for p in dx..self.side {
            for q in dy..self.side {
                let mut factor = 1.0;
                for k in 0..dx {
                    factor *= (p - k) as f64;
                }
                for k in 0..dy {
                    factor *= (q - k) as f64;
                }
                out.c[(p - dx) * self.side + (q - dy)] = factor * self.c[p * self.side + q];
            }
        }
        out
    }
}

/// Reference-triangle derivative tensors of one shape function at one point.
///
/// Symmetric tensors are stored by the number of eta-derivatives:
/// `hess = [d_xx, d_xy, d_yy]`, `third = [d_xxx, d_xxy, d_xyy, d_yyy]`, etc.
#[derive(Debug, Clone, Copy, Default)]
pub struct RefDerivs {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
    pub third: [f64; 4],
    pub fourth: [f64; 5],
}

/// Lagrange basis of degree m on the reference triangle.
pub struct ReferenceBasis {
    pub degree: usize,
    pub node_count: usize,
    /// Reference coordinates of the lattice nodes.
    pub nodes: Vec<[f64; 2]>,
    /// Barycentric lattice indices (a0, a1, a2), a0 + a1 + a2 = m, matching
    /// vertices (0,0), (1,0), (0,1) respectively.
    pub node_bary: Vec<[usize; 3]>,
    /// derivs[i][a * (MAX_DERIV_ORDER+1) + b] = d^a_x d^b_y phi_i.
    derivs: Vec<Vec<PolyGrid>>,
}

impl ReferenceBasis {
    fn build(m: usize) -> Self {
        let n = (m + 1) * (m + 2) / 2;
        let mut nodes = Vec::with_capacity(n);
        let mut node_bary = Vec::with_capacity(n);
        for a2 in 0..=m {
            for a1 in 0..=(m - a2) {
                let a0 = m - a1 - a2;
                node_bary.push([a0, a1, a2]);
                nodes.push([a1 as f64 / m as f64, a2 as f64 / m as f64]);
            }
        }
        // Monomial list in the same lattice order: x^p y^q, p + q <= m.
        let mut monos = Vec::with_capacity(n);
        for q in 0..=m {
            for p in 0..=(m - q) {
                monos.push((p, q));
            }
        }
        let v = DMatrix::from_fn(n, n, |i, k| {
            let (p, q) = monos[k];
            nodes[i][0].powi(p as i32) * nodes[i][1].powi(q as i32)
        });
        let vinv = v.try_inverse().expect("nodal Vandermonde is invertible");
        let side = MAX_DERIV_ORDER.max(m) + 1;
        let nd = MAX_DERIV_ORDER + 1;
        let mut derivs = Vec::with_capacity(n);
        for j in 0..n {
            let mut base = PolyGrid::zero(side);
            for (k, &(p, q)) in monos.iter().enumerate() {
                base.c[p * side + q] = vinv[(k, j)];
            }
            let mut table = Vec::with_capacity(nd * nd);
            for a in 0..nd {
                for b in 0..nd {
                    table.push(if a + b <= MAX_DERIV_ORDER {
                        base.derivative(a, b)
                    } else {
                        PolyGrid::zero(1)
                    });
                }
            }
            derivs.push(table);
        }
        ReferenceBasis {
            degree: m,
            node_count: n,
            nodes,
            node_bary,
            derivs,
        }
    }

    /// Evaluate derivative tensors of every shape function at a reference
    /// point, through the requested order (0..=4).
    pub fn eval(&self, p: [f64; 2], order: usize) -> Vec<RefDerivs> {
        assert!(order <= MAX_DERIV_ORDER);
        let nd = MAX_DERIV_ORDER + 1;
        let mut out = Vec::with_capacity(self.node_count);
        for table in &self.derivs {
            let mut d = RefDerivs::default();
            d.value = table[0].eval(p[0], p[1]);
            if order >= 1 {
                d.grad = [table[nd].eval(p[0], p[1]), table[1].eval(p[0], p[1])];
            }
            if order >= 2 {
                for b in 0..=2 {
                    d.hess[b] = table[(2 - b) * nd + b].eval(p[0], p[1]);
                }
            }
            if order >= 3 {
                for b in 0..=3 {
                    d.third[b] = table[(3 - b) * nd + b].eval(p[0], p[1]);
                }
            }
            if order >= 4 {
                for b in 0..=4 {
                    d.fourth[b] = table[(4 - b) * nd + b].eval(p[0], p[1]);
                }
            }
            out.push(d);
        }
        out
    }
}

static BASES: [OnceLock<ReferenceBasis>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];

/// Shared reference basis for degree m in {2, 3, 4}.
pub fn reference_basis(m: usize) -> Result<&'static ReferenceBasis> {
    if !(2..=4).contains(&m) {
        return Err(BiharmError::Config(format!(
            "unsupported polynomial degree {m}; expected 2, 3 or 4"
        )));
    }
    Ok(BASES[m - 2].get_or_init(|| ReferenceBasis::build(m)))
}

/// Evaluate all shape functions of degree m at a reference point.
pub fn basis_eval(m: usize, p: [f64; 2], order: usize) -> Result<Vec<RefDerivs>> {
    Ok(reference_basis(m)?.eval(p, order))
}

/// Affine map from the reference triangle to a physical triangle.
#[derive(Debug, Clone, Copy)]
pub struct AffineMap {
    /// Jacobian columns are the physical edge vectors v1-v0 and v2-v0.
    pub jacobian: [[f64; 2]; 2],
    /// Inverse Jacobian; inv[i][a] = d xi_i / d x_a.
    pub inverse: [[f64; 2]; 2],
    pub det: f64,
    pub origin: [f64; 2],
}

impl AffineMap {
    pub fn from_vertices(v: [[f64; 2]; 3]) -> Result<Self> {
        let j = [
            [v[1][0] - v[0][0], v[2][0] - v[0][0]],
            [v[1][1] - v[0][1], v[2][1] - v[0][1]],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det <= 0.0 {
            return Err(BiharmError::Geometry(format!(
                "triangle with vertices {v:?} is degenerate or inverted (det = {det})"
            )));
        }
        let inverse = [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ];
        Ok(AffineMap {
            jacobian: j,
            inverse,
            det,
            origin: v[0],
        })
    }

    pub fn to_physical(&self, r: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + self.jacobian[0][0] * r[0] + self.jacobian[0][1] * r[1],
            self.origin[1] + self.jacobian[1][0] * r[0] + self.jacobian[1][1] * r[1],
        ]
    }

    pub fn to_reference(&self, p: [f64; 2]) -> [f64; 2] {
        let dx = p[0] - self.origin[0];
        let dy = p[1] - self.origin[1];
        [
            self.inverse[0][0] * dx + self.inverse[0][1] * dy,
            self.inverse[1][0] * dx + self.inverse[1][1] * dy,
        ]
    }
}

/// Physical-space derivatives of one shape function at one point.
#[derive(Debug, Clone, Copy, Default)]
pub struct PhysDerivs {
    pub value: f64,
    pub grad: [f64; 2],
    /// [d_xx, d_xy, d_yy] in physical coordinates.
    pub hess: [f64; 3],
    pub laplacian: f64,
    pub grad_laplacian: [f64; 2],
    pub bilaplacian: f64,
}

/// Chain rule with the constant element Jacobian, through the given order.
/// Order 2 fills the Hessian and Laplacian, 3 adds grad of the Laplacian,
/// 4 adds the bilaplacian.
pub fn push_forward(map: &AffineMap, r: &RefDerivs, order: usize) -> PhysDerivs {
    let b = &map.inverse;
    // metric[i][j] = sum_a B[i][a] B[j][a]
    let metric = [
        [
            b[0][0] * b[0][0] + b[0][1] * b[0][1],
            b[0][0] * b[1][0] + b[0][1] * b[1][1],
        ],
        [
            b[1][0] * b[0][0] + b[1][1] * b[0][1],
            b[1][0] * b[1][0] + b[1][1] * b[1][1],
        ],
    ];
    let mut out = PhysDerivs {
        value: r.value,
        ..Default::default()
    };
    if order >= 1 {
        for a in 0..2 {
            out.grad[a] = b[0][a] * r.grad[0] + b[1][a] * r.grad[1];
        }
    }
    if order >= 2 {
        for a in 0..2 {
            for c in a..2 {
                let mut s = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        s += b[i][a] * b[j][c] * r.hess[i + j];
                    }
                }
                out.hess[a + c] = s;
            }
        }
        out.laplacian = out.hess[0] + out.hess[2];
    }
    if order >= 3 {
        for a in 0..2 {
            let mut s = 0.0;
            for i in 0..2 {
                let mut inner = 0.0;
                for j in 0..2 {
                    for k in 0..2 {
                        inner += metric[j][k] * r.third[i + j + k];
                    }
                }
                s += b[i][a] * inner;
            }
            out.grad_laplacian[a] = s;
        }
    }
    if order >= 4 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        s += metric[i][j] * metric[k][l] * r.fourth[i + j + k + l];
                    }
                }
            }
        }
        out.bilaplacian = s;
    }
    out
}
