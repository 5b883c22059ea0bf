//! Corner-singularity exponents for the clamped plate.
//!
//! At a corner of interior angle omega the solution behaves like
//! r^{1+z} with z a root of `sin^2(z omega) = z^2 sin^2(omega)` in the right
//! half plane. The smallest real part alpha0 limits the convergence rate
//! attainable on uniform meshes.

use num_complex::Complex64;

use crate::error::{BiharmError, Result};

pub const OMEGA_MIN: f64 = std::f64::consts::PI / 3.0;
pub const OMEGA_MAX: f64 = 2.0 * std::f64::consts::PI;

const RESIDUAL_TOL: f64 = 1e-10;
const DEDUP_TOL: f64 = 1e-6;
const NEWTON_TOL: f64 = 1e-13;
const MAX_NEWTON: usize = 100;
const GRID: usize = 50;
const RE_MAX: f64 = 5.0;
const IM_MAX: f64 = 5.0;

#[derive(Debug, Clone)]
pub struct ExponentResult {
    pub omega: f64,
    /// Retained characteristic roots with positive real part, sorted by
    /// real part; only the Im >= 0 representative of each conjugate pair.
    pub roots: Vec<Complex64>,
    /// Smallest real part among the roots.
    pub alpha0: f64,
}

fn characteristic(z: Complex64, omega: f64, sin_omega: f64) -> Complex64 {
    let s = (z * omega).sin();
    s * s - z * z * sin_omega * sin_omega
}

fn characteristic_deriv(z: Complex64, omega: f64, sin_omega: f64) -> Complex64 {
    let zw = z * omega;
    2.0 * omega * zw.sin() * zw.cos() - 2.0 * z * sin_omega * sin_omega
}

/// Find all characteristic roots in the window Re in (0, 5], Im in [0, 5]
/// by Newton iteration from a dense seed grid.
pub fn singular_exponent(omega: f64) -> Result<ExponentResult> {
    if !(OMEGA_MIN..OMEGA_MAX).contains(&omega) {
        return Err(BiharmError::Config(format!(
            "interior angle {omega} outside [pi/3, 2 pi)"
        )));
    }
    let sin_omega = omega.sin();
    // z = 1 solves the equation identically; it corresponds to the trivial
    // r^2 mode and is kept only in the degenerate case sin(omega) = 0, where
    // the equation collapses to sin^2(z omega) = 0 and z = 1 is genuine.
    let keep_unit_root = sin_omega.abs() <= 1e-12;
    let mut roots: Vec<Complex64> = Vec::new();
    for i in 0..GRID {
        for j in 0..GRID {
            let re = RE_MAX * (i as f64 + 1.0) / GRID as f64;
            let im = IM_MAX * j as f64 / (GRID - 1) as f64;
            let mut z = Complex64::new(re, im);
            let mut converged = false;
            for _ in 0..MAX_NEWTON {
                let f = characteristic(z, omega, sin_omega);
                let df = characteristic_deriv(z, omega, sin_omega);
                if df.norm() == 0.0 {
                    break;
                }
                let step = f / df;
                z -= step;
                if step.norm() < NEWTON_TOL {
                    converged = true;
                    break;
                }
            }
            if !converged {
                continue;
            }
            if characteristic(z, omega, sin_omega).norm() > RESIDUAL_TOL {
                continue;
            }
            // Conjugate symmetry: fold onto the upper half plane.
            if z.im < 0.0 {
                z = z.conj();
            }
            if z.re <= 1e-9 || z.re > RE_MAX + 1e-9 || z.im > IM_MAX + 1e-9 {
                continue;
            }
            if !keep_unit_root && (z - Complex64::new(1.0, 0.0)).norm() < DEDUP_TOL {
                continue;
            }
            if roots.iter().all(|r| (r - z).norm() > DEDUP_TOL) {
                roots.push(z);
            }
        }
    }
    if roots.is_empty() {
        return Err(BiharmError::SearchWindow { omega });
    }
    roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    let alpha0 = roots[0].re;
    Ok(ExponentResult { omega, roots, alpha0 })
}

/// Energy-norm rate attainable on uniform meshes: min(1, alpha0).
pub fn regularity_index(omega: f64) -> Result<f64> {
    Ok(singular_exponent(omega)?.alpha0.min(1.0))
}

/// Sample alpha0 over [pi/3, 2 pi) for plotting.
pub fn sweep(samples: usize) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::with_capacity(samples);
    for k in 0..samples {
        let omega = OMEGA_MIN
            + (OMEGA_MAX - OMEGA_MIN) * k as f64 / samples as f64;
        out.push((omega, singular_exponent(omega)?.alpha0));
    }
    Ok(out)
}
