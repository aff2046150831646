//! Eigenvector-chain beamformer construction.
//!
//! Each chain 3-cycle composes three inverse-channel transfer factors into
//! an M x M matrix whose eigenvectors close the cycle; picking one of the 2K
//! eigenvectors per chain and propagating it along the cycle yields a full
//! set of 3K aligned beamformers.

use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::latin::{alignment_pairs, extract_chains, AlignmentScheme, BfId, Chain, LatinError};
use crate::linalg::{
    collinearity_residual, eig, numerical_rank, vec_norm, CMatrix, EigenPair, LinalgError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BeamformError {
    #[error("channel matrix H[{rx}][{tx}] is numerically singular")]
    SingularChannel { rx: usize, tx: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Latin(#[from] LatinError),
    #[error("choice index {0} out of range for set space of size {1}")]
    OutOfRange(u64, u64),
}

/// The composed cycle matrix of one chain plus the two anchor transfer maps.
#[derive(Debug, Clone)]
pub struct ChainMatrix {
    pub chain: Chain,
    /// Product of the three transfer factors around the cycle; eigenvectors
    /// of `e` are the valid anchor beamformers.
    pub e: CMatrix,
    /// Maps the anchor eigenvector to the two non-anchor beamformers, via
    /// the anchor's own edges.
    pub transfer_maps: [(BfId, CMatrix); 2],
}

fn transfer(
    ch: &ChannelRealization,
    receiver: usize,
    from_tx: usize,
    to_tx: usize,
) -> Result<CMatrix, BeamformError> {
    let inv = ch
        .h_inv(receiver, to_tx)
        .ok_or(BeamformError::SingularChannel {
            rx: receiver,
            tx: to_tx,
        })?;
    Ok(inv.mul(ch.h(receiver, from_tx)))
}

/// Composes the cycle matrix E and the anchor transfer maps of one chain.
pub fn chain_matrix(chain: &Chain, ch: &ChannelRealization) -> Result<ChainMatrix, BeamformError> {
    let [e0, e1, e2] = &chain.edges;
    // forward steps b0 -> b1 -> b2, then the closing edge back to b0
    let m01 = transfer(ch, e0.receiver, e0.from.tx, e0.to.tx)?;
    let m12 = transfer(ch, e1.receiver, e1.from.tx, e1.to.tx)?;
    let m20 = transfer(ch, e2.receiver, e2.from.tx, e2.to.tx)?;
    let e = m20.mul(&m12).mul(&m01);
    // the anchor also reaches b2 directly by reversing the closing edge
    let m02 = transfer(ch, e2.receiver, e2.to.tx, e2.from.tx)?;
    Ok(ChainMatrix {
        chain: chain.clone(),
        e,
        transfer_maps: [(e0.to, m01), (e2.from, m02)],
    })
}

/// Per-scheme construction state: chains, cycle matrices, and their
/// eigendecompositions, computed once and reused across all (2K)^K choices.
pub struct SchemeContext {
    pub scheme: AlignmentScheme,
    pub chain_matrices: Vec<ChainMatrix>,
    pub eigenpairs: Vec<Vec<EigenPair>>,
}

impl SchemeContext {
    pub fn new(scheme: AlignmentScheme, ch: &ChannelRealization) -> Result<Self, BeamformError> {
        let chains = extract_chains(&scheme)?;
        let chain_matrices: Vec<ChainMatrix> = chains
            .iter()
            .map(|c| chain_matrix(c, ch))
            .collect::<Result<_, _>>()?;
        let eigenpairs = chain_matrices
            .iter()
            .map(|cm| eig(&cm.e).map_err(BeamformError::from))
            .collect::<Result<_, _>>()?;
        Ok(SchemeContext {
            scheme,
            chain_matrices,
            eigenpairs,
        })
    }

    pub fn k(&self) -> usize {
        self.scheme.k()
    }

    /// Size of the beamformer-set space, (2K)^K.
    pub fn set_space_size(&self) -> u64 {
        let k = self.k() as u64;
        (2 * k).pow(k as u32)
    }

    /// Builds the beamformer set for one eigenvector choice (one index per
    /// chain, each in 0..2K, ordered by descending eigenvalue magnitude).
    pub fn build(&self, choice: &[usize]) -> Result<BeamformerSet, BeamformError> {
        let k = self.k();
        assert_eq!(choice.len(), k, "one eigenvector index per chain");
        let space = self.set_space_size();
        if choice.iter().any(|&c| c >= 2 * k) {
            return Err(BeamformError::OutOfRange(space, space));
        }
        let mut vectors: Vec<Vec<Complex64>> = vec![Vec::new(); 3 * k];
        for (ci, (cm, &sel)) in self.chain_matrices.iter().zip(choice).enumerate() {
            let anchor = cm.chain.beamformers[0];
            let v = self.eigenpairs[ci][sel].vector.clone();
            for (id, map) in &cm.transfer_maps {
                let w = map.mul_vec(&v);
                let n = vec_norm(&w);
                vectors[id.flat(k)] = w.iter().map(|z| z / n).collect();
            }
            vectors[anchor.flat(k)] = v;
        }
        Ok(BeamformerSet {
            scheme_id: self.scheme.source,
            choice: choice.to_vec(),
            k,
            vectors,
        })
    }

    pub fn build_index(&self, index: u64) -> Result<BeamformerSet, BeamformError> {
        let choice = index_to_choice(index, self.k())?;
        self.build(&choice)
    }
}

/// 3K unit-norm beamforming vectors produced from one eigenvector choice per
/// chain.
#[derive(Debug, Clone)]
pub struct BeamformerSet {
    pub scheme_id: crate::latin::SchemeId,
    pub choice: Vec<usize>,
    k: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl BeamformerSet {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn vector(&self, id: BfId) -> &[Complex64] {
        &self.vectors[id.flat(self.k)]
    }

    pub fn vector_mut(&mut self, id: BfId) -> &mut Vec<Complex64> {
        &mut self.vectors[id.flat(self.k)]
    }
}

/// One-shot construction: chains, cycle matrices, eigendecomposition, and
/// propagation for a single choice.
pub fn build_beamformers(
    scheme: &AlignmentScheme,
    ch: &ChannelRealization,
    choice: &[usize],
) -> Result<BeamformerSet, BeamformError> {
    SchemeContext::new(scheme.clone(), ch)?.build(choice)
}

/// Mixed-radix (base 2K, K digits, most significant first) decoding of a set
/// index into a per-chain eigenvector choice.
pub fn index_to_choice(index: u64, k: usize) -> Result<Vec<usize>, BeamformError> {
    let base = 2 * k as u64;
    let space = base.pow(k as u32);
    if index >= space {
        return Err(BeamformError::OutOfRange(index, space));
    }
    let mut digits = vec![0usize; k];
    let mut rem = index;
    for d in digits.iter_mut().rev() {
        *d = (rem % base) as usize;
        rem /= base;
    }
    Ok(digits)
}

pub fn choice_to_index(choice: &[usize], k: usize) -> u64 {
    let base = 2 * k as u64;
    choice
        .iter()
        .fold(0u64, |acc, &d| acc * base + d as u64)
}

/// Per-receiver alignment check results.
#[derive(Debug, Clone)]
pub struct ReceiverValidation {
    pub receiver: usize,
    /// Largest collinearity residual over the K aligned pairs.
    pub max_pair_residual: f64,
    /// Smallest principal-angle sine among the K aligned interference
    /// directions (requirement that distinct pairs stay non-collinear).
    pub min_direction_angle: f64,
    /// Numerical rank of the 2K interference columns (must be K).
    pub interference_rank: usize,
    /// Numerical rank of the full signal space (must be 2K).
    pub full_rank: usize,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub k: usize,
    pub tol: f64,
    pub receivers: Vec<ReceiverValidation>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.receivers.iter().all(|r| {
            r.max_pair_residual < self.tol
                && r.interference_rank == self.k
                && r.full_rank == 2 * self.k
                && r.min_direction_angle > 1e-4
        })
    }

    pub fn max_residual(&self) -> f64 {
        self.receivers
            .iter()
            .map(|r| r.max_pair_residual)
            .fold(0.0, f64::max)
    }

    pub fn csv_rows(&self) -> Vec<String> {
        self.receivers
            .iter()
            .map(|r| {
                format!(
                    "{},{:.3e},{},{}",
                    r.receiver + 1,
                    r.max_pair_residual,
                    r.interference_rank,
                    r.full_rank
                )
            })
            .collect()
    }
}

/// Checks the three alignment requirements of a constructed set: pairwise
/// span equalities, K-dimensional interference space, and full signal rank.
pub fn validate_ia(
    set: &BeamformerSet,
    scheme: &AlignmentScheme,
    ch: &ChannelRealization,
    tol: f64,
) -> ValidationReport {
    let k = set.k();
    let mut receivers = Vec::with_capacity(3);
    for rx in 0..3 {
        let pairs = alignment_pairs(scheme, rx);
        let mut max_pair_residual = 0.0f64;
        let mut directions: Vec<Vec<Complex64>> = Vec::with_capacity(k);
        let mut interference_cols: Vec<Vec<Complex64>> = Vec::with_capacity(2 * k);
        for p in &pairs {
            let (a, b) = p.members;
            let da = ch.h(rx, a.tx).mul_vec(set.vector(a));
            let db = ch.h(rx, b.tx).mul_vec(set.vector(b));
            let r = collinearity_residual(&da, &db).unwrap_or(1.0);
            max_pair_residual = max_pair_residual.max(r);
            directions.push(da.clone());
            interference_cols.push(da);
            interference_cols.push(db);
        }
        let mut min_direction_angle = f64::INFINITY;
        for i in 0..directions.len() {
            for j in (i + 1)..directions.len() {
                let r = collinearity_residual(&directions[i], &directions[j]).unwrap_or(0.0);
                min_direction_angle = min_direction_angle.min(r);
            }
        }
        let interference = CMatrix::from_cols(&interference_cols);
        let interference_rank = numerical_rank(&interference, 1e-6).unwrap_or(0);
        // full space: K desired columns plus the K aligned directions
        let mut full_cols: Vec<Vec<Complex64>> = (0..k)
            .map(|tx| ch.h(rx, tx).mul_vec(set.vector(BfId::new(rx, tx))))
            .collect();
        full_cols.extend(directions);
        let full = CMatrix::from_cols(&full_cols);
        let full_rank = numerical_rank(&full, 1e-6).unwrap_or(0);
        receivers.push(ReceiverValidation {
            receiver: rx,
            max_pair_residual,
            min_direction_angle,
            interference_rank,
            full_rank,
        });
    }
    ValidationReport { k, tol, receivers }
}

/// Propagates `v` once around the full cycle of `cm` and reports how far the
/// result is from a scalar multiple of `v`.
pub fn cycle_closure_residual(cm: &ChainMatrix, v: &[Complex64]) -> f64 {
    let w = cm.e.mul_vec(v);
    collinearity_residual(v, &w).unwrap_or(1.0)
}

/// Identity-channel context helper used in tests and smoke checks.
pub fn identity_channel(k: usize) -> ChannelRealization {
    // draw a real realization for the bookkeeping, then overwrite with I
    let mut ch = crate::channel::draw_channel(k, 0, u64::MAX);
    let m = 2 * k;
    let ident = CMatrix::identity(m);
    for rx in 0..3 {
        for tx in 0..k {
            ch.set_h(rx, tx, ident.clone());
        }
    }
    ch
}
