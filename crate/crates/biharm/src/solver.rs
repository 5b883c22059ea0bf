//! Sparse Cholesky solution of the assembled systems.
//!
//! The lower-triangle CSR storage is handed to faer as a CSC upper-triangle
//! view without copying the values. Constrained systems are expected to be
//! already eliminated (unit rows); the zero-mean variant is handled by
//! grounding one dof of the consistent singular system and shifting the
//! result back onto the constraint.

use faer::linalg::solvers::Solve;
use faer::reborrow::Reborrow;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Mat, Par, Side};

use crate::assembly::LinearSystem;
use crate::error::{BiharmError, Result};
use crate::sparse::SymmetricCsr;

/// Environment variable selecting the number of solver threads.
pub const THREADS_ENV: &str = "BIHARM_THREADS";

/// Residual target for iterative refinement.
pub const REFINE_TOL: f64 = 1e-10;
const MAX_REFINE: usize = 5;

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    /// |b - A x| / |b| in the euclidean norm (0 when b = 0).
    pub relative_residual: f64,
    pub refinement_steps: usize,
    /// Lagrange multiplier of the zero-mean constraint, when present.
    pub multiplier: Option<f64>,
}

fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(1)
}

struct Factorization {
    llt: Llt<u32, f64>,
}

impl Factorization {
    /// Factor the symmetric matrix; lower-CSR arrays are reinterpreted as an
    /// upper-CSC view.
    fn new(a: &SymmetricCsr, col_ptr: &[u32]) -> Result<Factorization> {
        let n = a.n;
        let par = match thread_count() {
            1 => Par::Seq,
            t => Par::rayon(t),
        };
        faer::set_global_parallelism(par);
        let sym_ref = SymbolicSparseColMatRef::<u32>::new_checked(n, n, col_ptr, None, &a.col_idx);
        let view = SparseColMatRef::<u32, f64>::new(sym_ref, &a.values);
        let symbolic = SymbolicLlt::try_new(view.symbolic(), Side::Upper)
            .map_err(|e| BiharmError::Solver(format!("symbolic factorization failed: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(symbolic, view.rb(), Side::Upper).map_err(|e| {
            BiharmError::Solver(format!(
                "cholesky factorization failed (matrix not positive definite?): {e:?}"
            ))
        })?;
        Ok(Factorization { llt })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut rhs = Mat::<f64>::zeros(n, 1);
        for (i, v) in b.iter().enumerate() {
            rhs[(i, 0)] = *v;
        }
        let x = self.llt.solve(&rhs);
        (0..n).map(|i| x[(i, 0)]).collect()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn col_ptr_u32(a: &SymmetricCsr) -> Result<Vec<u32>> {
    if a.nnz_lower() > u32::MAX as usize {
        return Err(BiharmError::Solver(format!(
            "matrix with {} stored entries exceeds 32-bit index range",
            a.nnz_lower()
        )));
    }
    Ok(a.row_ptr.iter().map(|&p| p as u32).collect())
}

/// Factor + solve + iterative refinement for a definite system.
fn solve_definite(a: &SymmetricCsr, b: &[f64]) -> Result<(Vec<f64>, f64, usize)> {
    let col_ptr = col_ptr_u32(a)?;
    let fac = Factorization::new(a, &col_ptr)?;
    let mut x = fac.solve(b);
    let b_norm = norm(b);
    let mut steps = 0;
    let mut rel = 0.0;
    for _ in 0..=MAX_REFINE {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        rel = if b_norm > 0.0 { norm(&r) / b_norm } else { norm(&r) };
        if rel <= REFINE_TOL || steps == MAX_REFINE {
            break;
        }
        let d = fac.solve(&r);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        steps += 1;
    }
    Ok((x, rel, steps))
}

/// Solve the assembled linear system.
pub fn solve(system: &LinearSystem) -> Result<SolveReport> {
    match &system.mean_constraint {
        None => {
            let (solution, relative_residual, refinement_steps) =
                solve_definite(&system.matrix, &system.rhs)?;
            Ok(SolveReport {
                solution,
                relative_residual,
                refinement_steps,
                multiplier: None,
            })
        }
        Some(c) => solve_with_zero_mean(system, c),
    }
}

/// Singular consistent system with kernel = constants: subtract the
/// multiplier component from the rhs, ground dof 0, solve, then shift the
/// solution onto the zero-mean constraint.
fn solve_with_zero_mean(system: &LinearSystem, c: &[f64]) -> Result<SolveReport> {
    let a = &system.matrix;
    let b = &system.rhs;
    let volume: f64 = c.iter().sum();
    if volume <= 0.0 {
        return Err(BiharmError::Solver(
            "zero-mean constraint has nonpositive volume".into(),
        ));
    }
    let lambda: f64 = b.iter().sum::<f64>() / volume;
    let b_mod: Vec<f64> = b.iter().zip(c).map(|(bi, ci)| bi - lambda * ci).collect();

    // Grounded copy: row/column 0 replaced by the identity.
    let mut g = a.clone();
    for i in 0..g.n {
        for k in g.row_ptr[i]..g.row_ptr[i + 1] {
            let j = g.col_idx[k] as usize;
            if i == 0 || j == 0 {
                g.values[k] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    let mut bg = b_mod.clone();
    bg[0] = 0.0;
    let (mut x, _, refinement_steps) = solve_definite(&g, &bg)?;

    // Shift onto c . x = 0.
    let shift = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum::<f64>() / volume;
    for xi in &mut x {
        *xi -= shift;
    }

    // Residual and multiplier against the original singular system.
    let ax = a.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let c_norm2: f64 = c.iter().map(|ci| ci * ci).sum();
    let multiplier = r.iter().zip(c).map(|(ri, ci)| ri * ci).sum::<f64>() / c_norm2;
    let r_perp: Vec<f64> = r.iter().zip(c).map(|(ri, ci)| ri - multiplier * ci).collect();
    let b_norm = norm(b);
    let relative_residual = if b_norm > 0.0 {
        norm(&r_perp) / b_norm
    } else {
        norm(&r_perp)
    };
    Ok(SolveReport {
        solution: x,
        relative_residual,
        refinement_steps,
        multiplier: Some(multiplier),
    })
}
