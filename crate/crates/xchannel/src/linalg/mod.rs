//! Dense complex linear-algebra kernel: eigendecomposition, singular values,
//! LU inversion, Gram-Schmidt, condition numbers, rank, and collinearity.
//!
//! All operations are pure functions over immutable values.

pub mod eig;
pub mod gram_schmidt;
pub mod lu;
pub mod matrix;
pub mod svd;

pub use eig::{eig, eig_with_tol, EigenPair};
pub use gram_schmidt::gram_schmidt;
pub use lu::{inverse, Lu};
pub use matrix::{
    collinearity_residual, vec_dot, vec_norm, vec_normalize, vec_scale, vec_sub, CMatrix,
};
pub use svd::{cond_number, numerical_rank, singular_values};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinalgError {
    #[error("matrix is not square")]
    NotSquare,
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is numerically singular")]
    SingularMatrix,
    #[error("iteration failed to converge (achieved residual {residual:.3e})")]
    NonConvergence { residual: f64 },
    #[error("matrix is numerically rank deficient")]
    RankDeficient,
    #[error("input vectors are numerically dependent")]
    DependentInput,
    #[error("zero vector where a nonzero vector is required")]
    ZeroVector,
}

#[cfg(test)]
pub(crate) mod test_support {
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::CMatrix;

    /// Standard complex Gaussian test matrix with a fixed seed.
    pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..rows * cols)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        CMatrix::from_rows(rows, cols, data)
    }

    pub fn random_vector(dim: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        (0..dim)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect()
    }
}
