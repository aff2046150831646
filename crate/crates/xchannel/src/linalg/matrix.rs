use num_complex::Complex64;
use std::fmt;

use super::LinalgError;

/// Dense complex matrix, row-major storage.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(rows * cols, data.len(), "entry count mismatch");
        CMatrix { rows, cols, data }
    }

    /// Builds a matrix whose j-th column is `cols[j]`.
    pub fn from_cols(cols: &[Vec<Complex64>]) -> Self {
        assert!(!cols.is_empty());
        let n = cols[0].len();
        assert!(cols.iter().all(|c| c.len() == n), "ragged columns");
        let mut m = Self::zeros(n, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, &z) in c.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Complex64> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn set_col(&mut self, j: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mul_vec");
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)] * v[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix::from_rows(self.rows, self.cols, data)
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        let data = self.data.iter().map(|z| z * s).collect();
        CMatrix::from_rows(self.rows, self.cols, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LinalgError::NonFinite)
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

// ── free vector helpers ──────────────────────────────────────────────

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Hermitian inner product <u, v> = u^H v.
pub fn vec_dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn vec_normalize(v: &[Complex64]) -> Vec<Complex64> {
    let n = vec_norm(v);
    v.iter().map(|z| z / n).collect()
}

pub fn vec_sub(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

pub fn vec_scale(v: &[Complex64], s: Complex64) -> Vec<Complex64> {
    v.iter().map(|z| z * s).collect()
}

/// sin of the principal angle between the lines spanned by u and v, equal to
/// sqrt(1 - |u^H v|^2 / (|u|^2 |v|^2)). Zero iff collinear, one iff
/// orthogonal. Evaluated as the normalized projection residual
/// |v - u (u^H v) / |u|^2| / |v|, which keeps full precision near zero where
/// the cancellation in 1 - cos^2 would floor the result at sqrt(eps).
pub fn collinearity_residual(u: &[Complex64], v: &[Complex64]) -> Result<f64, LinalgError> {
    let nu = vec_norm(u);
    let nv = vec_norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(LinalgError::ZeroVector);
    }
    let coef = vec_dot(u, v) / (nu * nu);
    let resid: f64 = v
        .iter()
        .zip(u)
        .map(|(vi, ui)| (vi - coef * ui).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok((resid / nv).min(1.0))
}
