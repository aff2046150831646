//! Eigendecomposition of general complex matrices.
//!
//! Householder reduction to Hessenberg form followed by explicitly shifted
//! QR iteration (Wilkinson shift) to a complex Schur form `A = Q T Q^H`,
//! then triangular back-substitution for the eigenvectors.

use num_complex::Complex64;

use super::matrix::{vec_norm, CMatrix};
use super::LinalgError;

/// Eigenvalue together with a unit-norm eigenvector.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Eigendecomposition of a square complex matrix.
///
/// Pairs are sorted by descending eigenvalue magnitude. Each eigenvector has
/// unit norm and its largest-magnitude entry is made real and positive, so
/// the output is deterministic for identical input.
pub fn eig(a: &CMatrix) -> Result<Vec<EigenPair>, LinalgError> {
    eig_with_tol(a, 1e-8)
}

pub fn eig_with_tol(a: &CMatrix, tol: f64) -> Result<Vec<EigenPair>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare);
    }
    a.check_finite()?;
    let n = a.rows();
    let norm_a = a.frobenius_norm();

    let (mut t, mut q) = hessenberg(a);
    schur(&mut t, &mut q)?;

    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| {
            let y = triangular_eigvec(&t, k);
            let mut v = q.mul_vec(&y);
            let nrm = vec_norm(&v);
            for z in v.iter_mut() {
                *z /= nrm;
            }
            fix_phase(&mut v);
            EigenPair {
                value: t[(k, k)],
                vector: v,
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.value.norm().total_cmp(&a.value.norm()));

    // residual contract
    let mut worst = 0.0f64;
    for p in &pairs {
        let av = a.mul_vec(&p.vector);
        let r: f64 = av
            .iter()
            .zip(&p.vector)
            .map(|(x, v)| (x - p.value * v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(r);
    }
    if worst > tol * norm_a.max(1e-300) {
        return Err(LinalgError::NonConvergence { residual: worst });
    }
    Ok(pairs)
}

/// Reduce to upper Hessenberg form: A = Q H Q^H. Returns (H, Q).
fn hessenberg(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        // Householder vector zeroing h[k+2.., k]
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = vec_norm(&x);
        if xnorm == 0.0 {
            continue;
        }
        let x0 = x[0];
        let sign = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let mut v = x;
        v[0] += sign * xnorm;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // left: rows k+1.., all columns
        for j in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(m, &vm)| vm.conj() * h[(k + 1 + m, j)])
                .sum();
            let s = s * beta;
            for (m, &vm) in v.iter().enumerate() {
                h[(k + 1 + m, j)] -= vm * s;
            }
        }
        // right: columns k+1.., all rows
        for i in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(m, &vm)| h[(i, k + 1 + m)] * vm)
                .sum();
            let s = s * beta;
            for (m, &vm) in v.iter().enumerate() {
                h[(i, k + 1 + m)] -= s * vm.conj();
            }
        }
        // accumulate Q (right-multiply)
        for i in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(m, &vm)| q[(i, k + 1 + m)] * vm)
                .sum();
            let s = s * beta;
            for (m, &vm) in v.iter().enumerate() {
                q[(i, k + 1 + m)] -= s * vm.conj();
            }
        }
    }
    (h, q)
}

/// Unitary 2x2 rotation [[c, s], [-conj(s), c]] with real c that maps
/// (a, b) to (r, 0).
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let na = a.norm();
    let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
    if r == 0.0 || b.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if na == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let c = na / r;
    let s = a / na * b.conj() / r;
    (c, s)
}

/// In-place QR iteration driving the Hessenberg matrix to upper triangular
/// Schur form, accumulating the unitary similarity into `q`.
fn schur(h: &mut CMatrix, q: &mut CMatrix) -> Result<(), LinalgError> {
    let n = h.rows();
    if n == 1 {
        return Ok(());
    }
    let mut hi = n - 1;
    let mut iter_in_block = 0usize;
    loop {
        // deflate converged subdiagonals from the bottom
        while hi > 0 {
            let small = 1e-16 * (h[(hi - 1, hi - 1)].norm() + h[(hi, hi)].norm()).max(1e-300);
            if h[(hi, hi - 1)].norm() <= small {
                h[(hi, hi - 1)] = Complex64::new(0.0, 0.0);
                hi -= 1;
                iter_in_block = 0;
            } else {
                break;
            }
        }
        if hi == 0 {
            return Ok(());
        }
        // active block [lo..=hi]
        let mut lo = hi;
        while lo > 0 {
            let small = 1e-16 * (h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm()).max(1e-300);
            if h[(lo, lo - 1)].norm() <= small {
                h[(lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }

        iter_in_block += 1;
        if iter_in_block > MAX_SWEEPS_PER_EIGENVALUE {
            let worst = (1..n).map(|i| h[(i, i - 1)].norm()).fold(0.0, f64::max);
            return Err(LinalgError::NonConvergence { residual: worst });
        }

        let sigma = if iter_in_block % 15 == 0 {
            // exceptional shift to break symmetric stalls
            h[(hi, hi)] + Complex64::new(h[(hi, hi - 1)].norm(), 0.0)
        } else {
            wilkinson_shift(h, hi)
        };

        // explicit shifted QR step on the block
        for i in lo..=hi {
            h[(i, i)] -= sigma;
        }
        let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
        for i in lo..hi {
            let (c, s) = givens(h[(i, i)], h[(i + 1, i)]);
            // rows i, i+1; columns i..n
            for j in i..n {
                let x = h[(i, j)];
                let y = h[(i + 1, j)];
                h[(i, j)] = c * x + s * y;
                h[(i + 1, j)] = -s.conj() * x + c * y;
            }
            rots.push((c, s));
        }
        for (idx, &(c, s)) in rots.iter().enumerate() {
            let i = lo + idx;
            // columns i, i+1; rows 0..=i+1
            for r in 0..=(i + 1).min(n - 1) {
                let x = h[(r, i)];
                let y = h[(r, i + 1)];
                h[(r, i)] = x * c + y * s.conj();
                h[(r, i + 1)] = -x * s + y * c;
            }
            for r in 0..n {
                let x = q[(r, i)];
                let y = q[(r, i + 1)];
                q[(r, i)] = x * c + y * s.conj();
                q[(r, i + 1)] = -x * s + y * c;
            }
        }
        for i in lo..=hi {
            h[(i, i)] += sigma;
        }
    }
}

/// Eigenvalue of the trailing 2x2 of the active block closest to h[hi, hi].
fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h[(hi - 1, hi - 1)];
    let b = h[(hi - 1, hi)];
    let c = h[(hi, hi - 1)];
    let d = h[(hi, hi)];
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = (tr + disc) / 2.0;
    let l2 = (tr - disc) / 2.0;
    if (l1 - d).norm() < (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Eigenvector of upper-triangular `t` for the eigenvalue at position `k`,
/// by back-substitution with a perturbation guard on near-equal diagonals.
fn triangular_eigvec(t: &CMatrix, k: usize) -> Vec<Complex64> {
    let n = t.rows();
    let lambda = t[(k, k)];
    let scale = t.frobenius_norm().max(1e-300);
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    y[k] = Complex64::new(1.0, 0.0);
    for i in (0..k).rev() {
        let s: Complex64 = ((i + 1)..=k).map(|j| t[(i, j)] * y[j]).sum();
        let mut denom = t[(i, i)] - lambda;
        if denom.norm() < 1e-300 + 1e-16 * scale {
            denom = Complex64::new(1e-16 * scale, 0.0);
        }
        y[i] = -s / denom;
    }
    y
}

/// Multiply by a unit phase so the largest-magnitude entry is real positive.
pub(crate) fn fix_phase(v: &mut [Complex64]) {
    let (idx, _) = v
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .unwrap();
    let z = v[idx];
    if z.norm() == 0.0 {
        return;
    }
    let phase = z.conj() / z.norm();
    for w in v.iter_mut() {
        *w *= phase;
    }
}
