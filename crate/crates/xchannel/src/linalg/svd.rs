//! Singular values via one-sided Jacobi, robust for small singular values.

use num_complex::Complex64;

use super::matrix::{vec_dot, CMatrix};
use super::LinalgError;

const MAX_SWEEPS: usize = 60;

/// Singular values of `a`, sorted descending.
pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    a.check_finite()?;
    // work on the shape with fewer columns
    let work = if a.rows() >= a.cols() {
        a.clone()
    } else {
        a.adjoint()
    };
    let n = work.cols();
    let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| work.col(j)).collect();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma = vec_dot(&cols[p], &cols[q]);
                let g = gamma.norm();
                let thresh = 1e-15 * (alpha * beta).sqrt();
                if g <= thresh {
                    continue;
                }
                off = off.max(g / (alpha * beta).sqrt().max(1e-300));
                // de-phase so the pair behaves like the real symmetric case
                let phase = gamma / g;
                let phi = 0.5 * (2.0 * g).atan2(alpha - beta);
                let (c, s) = (phi.cos(), phi.sin());
                for i in 0..cols[p].len() {
                    let x = cols[p][i];
                    let y = cols[q][i] / phase;
                    cols[p][i] = c * x + s * y;
                    cols[q][i] = -s * x + c * y;
                }
            }
        }
        if off < 1e-14 {
            converged = true;
            break;
        }
    }
    if !converged {
        // measure the residual orthogonality for the error report
        let mut worst = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let g = vec_dot(&cols[p], &cols[q]).norm();
                worst = worst.max(g / (alpha * beta).sqrt().max(1e-300));
            }
        }
        return Err(LinalgError::NonConvergence { residual: worst });
    }

    let mut sigma: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    sigma.sort_by(|a, b| b.total_cmp(a));
    Ok(sigma)
}

/// Ratio sigma_max / sigma_min. Returns +infinity when the smallest singular
/// value underflows 1e-12 of the largest (numerically rank deficient).
pub fn cond_number(a: &CMatrix) -> Result<f64, LinalgError> {
    let sigma = singular_values(a)?;
    let smax = sigma[0];
    let smin = *sigma.last().unwrap();
    if smax == 0.0 || smin < 1e-12 * smax {
        return Ok(f64::INFINITY);
    }
    Ok(smax / smin)
}

/// Number of singular values at or above `rel_tol` times the largest.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> Result<usize, LinalgError> {
    assert!(rel_tol > 0.0 && rel_tol < 1.0, "rel_tol must be in (0,1)");
    let sigma = singular_values(a)?;
    let smax = sigma[0];
    if smax == 0.0 {
        return Ok(0);
    }
    Ok(sigma.iter().filter(|&&s| s >= rel_tol * smax).count())
}
