use num_complex::Complex64;

use super::matrix::{vec_dot, vec_norm};
use super::LinalgError;

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// Returns an orthonormal set spanning the same space as the input. Fails
/// with `DependentInput` when a residual underflows before normalization.
pub fn gram_schmidt(cols: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>, LinalgError> {
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(cols.len());
    for col in cols {
        let input_norm = vec_norm(col);
        if input_norm == 0.0 {
            return Err(LinalgError::DependentInput);
        }
        let mut v = col.clone();
        for _ in 0..2 {
            for q in &out {
                let proj = vec_dot(q, &v);
                for (x, qi) in v.iter_mut().zip(q) {
                    *x -= proj * qi;
                }
            }
        }
        let r = vec_norm(&v);
        if r < 1e-12 * input_norm {
            return Err(LinalgError::DependentInput);
        }
        for x in v.iter_mut() {
            *x /= r;
        }
        out.push(v);
    }
    Ok(out)
}
