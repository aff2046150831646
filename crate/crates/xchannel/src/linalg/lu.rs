use num_complex::Complex64;

use super::matrix::CMatrix;
use super::LinalgError;

/// LU factorization with partial pivoting, stored in-place.
pub struct Lu {
    lu: CMatrix,
    perm: Vec<usize>,
    scale: f64,
}

impl Lu {
    pub fn factor(a: &CMatrix) -> Result<Lu, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare);
        }
        a.check_finite()?;
        let n = a.rows();
        let scale = a.frobenius_norm();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // pivot row
            let (p, pmag) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .unwrap();
            if pmag <= 1e-12 * scale {
                return Err(LinalgError::SingularMatrix);
            }
            if p != k {
                perm.swap(k, p);
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let piv = lu[(k, k)];
            for i in (k + 1)..n {
                let m = lu[(i, k)] / piv;
                lu[(i, k)] = m;
                for j in (k + 1)..n {
                    let s = m * lu[(k, j)];
                    lu[(i, j)] -= s;
                }
            }
        }
        Ok(Lu { lu, perm, scale })
    }

    pub fn n(&self) -> usize {
        self.lu.rows()
    }

    /// Solves A x = b.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n();
        assert_eq!(b.len(), n);
        // apply permutation, forward substitute (unit lower), back substitute
        let mut y: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                let s = self.lu[(i, j)] * y[j];
                y[i] -= s;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                let s = self.lu[(i, j)] * y[j];
                y[i] -= s;
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }

    pub fn solve_mat(&self, b: &CMatrix) -> CMatrix {
        assert_eq!(b.rows(), self.n());
        let cols: Vec<Vec<Complex64>> = (0..b.cols()).map(|j| self.solve_vec(&b.col(j))).collect();
        CMatrix::from_cols(&cols)
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve_mat(&CMatrix::identity(self.n()))
    }

    #[allow(dead_code)]
    pub fn norm_scale(&self) -> f64 {
        self.scale
    }
}

/// Matrix inverse via partial-pivot LU.
pub fn inverse(a: &CMatrix) -> Result<CMatrix, LinalgError> {
    Ok(Lu::factor(a)?.inverse())
}
