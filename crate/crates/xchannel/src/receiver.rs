//! Per-receiver signal spaces, zero-forcing decoding, stream SNR, sum-rate,
//! and the CN / OCN surrogate metrics.

use num_complex::Complex64;

use crate::beamform::BeamformerSet;
use crate::channel::ChannelRealization;
use crate::latin::{alignment_pairs, AlignmentScheme, BfId};
use crate::linalg::{
    cond_number, gram_schmidt, vec_normalize, CMatrix, LinalgError, Lu,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReceiverError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Signal-space view of one receiver: the 2K x 2K matrix of K desired
/// columns followed by K aligned interference columns, its column-normalized
/// variant, the ZF decoder rows, and the two condition-number surrogates.
#[derive(Debug, Clone)]
pub struct ReceiverSpaces {
    pub receiver: usize,
    pub a: CMatrix,
    pub a_bar: CMatrix,
    /// Unit-norm ZF rows for the K desired streams; empty when degenerate.
    pub zf_rows: Vec<Vec<Complex64>>,
    pub kappa: f64,
    pub ocn: f64,
    /// Set when A is numerically singular; SNRs then read as zero.
    pub degenerate: bool,
}

/// Assembles the receiver-`rx` signal space of a constructed set.
///
/// Desired column j is H[rx][j] v_{rx,j}. Interference column k comes from
/// the k-th aligned pair at this receiver (pairs ordered by smallest member
/// id), represented by its smaller member.
pub fn signal_space(
    set: &BeamformerSet,
    scheme: &AlignmentScheme,
    ch: &ChannelRealization,
    rx: usize,
) -> ReceiverSpaces {
    let k = set.k();
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(2 * k);
    for tx in 0..k {
        cols.push(ch.h(rx, tx).mul_vec(set.vector(BfId::new(rx, tx))));
    }
    for pair in alignment_pairs(scheme, rx) {
        let w = pair.members.0;
        cols.push(ch.h(rx, w.tx).mul_vec(set.vector(w)));
    }
    let a = CMatrix::from_cols(&cols);
    let a_bar = CMatrix::from_cols(&cols.iter().map(|c| vec_normalize(c)).collect::<Vec<_>>());

    match zero_forcing(&a, k) {
        Ok(zf_rows) => {
            let kappa = cond_number(&a_bar).unwrap_or(f64::INFINITY);
            let ocn = ocn(&a_bar, k).unwrap_or(f64::INFINITY);
            ReceiverSpaces {
                receiver: rx,
                a,
                a_bar,
                zf_rows,
                kappa,
                ocn,
                degenerate: false,
            }
        }
        Err(_) => ReceiverSpaces {
            receiver: rx,
            a,
            a_bar,
            zf_rows: Vec::new(),
            kappa: f64::INFINITY,
            ocn: f64::INFINITY,
            degenerate: true,
        },
    }
}

/// Unit-norm ZF decoder rows for the first `k` columns of `a`: row j is the
/// j-th row of A^-1, renormalized, so it nulls every other column exactly.
pub fn zero_forcing(a: &CMatrix, k: usize) -> Result<Vec<Vec<Complex64>>, ReceiverError> {
    let lu = Lu::factor(a)?;
    let inv = lu.inverse();
    Ok((0..k).map(|j| vec_normalize(&inv.row(j))).collect())
}

/// Post-ZF amplitude |R . H v| of one desired stream.
pub fn stream_amplitude(r: &[Complex64], h: &CMatrix, v: &[Complex64]) -> f64 {
    let hv = h.mul_vec(v);
    r.iter()
        .zip(&hv)
        .map(|(ri, x)| ri * x)
        .sum::<Complex64>()
        .norm()
}

/// Post-ZF SNR P_stream |R . H v|^2 with unit-variance noise.
pub fn stream_snr(r: &[Complex64], h: &CMatrix, v: &[Complex64], p_stream: f64) -> f64 {
    let amp = stream_amplitude(r, h, v);
    p_stream * amp * amp
}

/// Post-ZF amplitudes and surrogates for all 3K streams of one set,
/// receiver-major (receiver 0 streams first).
#[derive(Debug, Clone)]
pub struct SetMetrics {
    pub amplitudes: Vec<f64>,
    pub kappas: [f64; 3],
    pub ocns: [f64; 3],
    pub degenerate: bool,
}

impl SetMetrics {
    pub fn min_amplitude(&self) -> f64 {
        self.amplitudes.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn snrs(&self, p_stream: f64) -> Vec<f64> {
        self.amplitudes.iter().map(|a| p_stream * a * a).collect()
    }

    pub fn sum_rate(&self, p_stream: f64) -> f64 {
        sum_rate(&self.snrs(p_stream))
    }
}

/// Evaluates every receiver of a set: ZF amplitudes plus kappa and OCN.
pub fn set_metrics(
    set: &BeamformerSet,
    scheme: &AlignmentScheme,
    ch: &ChannelRealization,
) -> SetMetrics {
    let k = set.k();
    let mut amplitudes = Vec::with_capacity(3 * k);
    let mut kappas = [f64::INFINITY; 3];
    let mut ocns = [f64::INFINITY; 3];
    let mut degenerate = false;
    for rx in 0..3 {
        let spaces = signal_space(set, scheme, ch, rx);
        kappas[rx] = spaces.kappa;
        ocns[rx] = spaces.ocn;
        if spaces.degenerate {
            degenerate = true;
            amplitudes.extend(std::iter::repeat_n(0.0, k));
            continue;
        }
        for tx in 0..k {
            let id = BfId::new(rx, tx);
            amplitudes.push(stream_amplitude(
                &spaces.zf_rows[tx],
                ch.h(rx, tx),
                set.vector(id),
            ));
        }
    }
    SetMetrics {
        amplitudes,
        kappas,
        ocns,
        degenerate,
    }
}

/// Surrogate-only evaluation: the three per-receiver condition numbers
/// without any ZF solve. One factorization per receiver.
pub fn surrogate_metrics(
    set: &BeamformerSet,
    scheme: &AlignmentScheme,
    ch: &ChannelRealization,
) -> ([f64; 3], [f64; 3]) {
    let k = set.k();
    let mut kappas = [f64::INFINITY; 3];
    let mut ocns = [f64::INFINITY; 3];
    for rx in 0..3 {
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(2 * k);
        for tx in 0..k {
            cols.push(vec_normalize(
                &ch.h(rx, tx).mul_vec(set.vector(BfId::new(rx, tx))),
            ));
        }
        for pair in alignment_pairs(scheme, rx) {
            let w = pair.members.0;
            cols.push(vec_normalize(&ch.h(rx, w.tx).mul_vec(set.vector(w))));
        }
        let a_bar = CMatrix::from_cols(&cols);
        kappas[rx] = cond_number(&a_bar).unwrap_or(f64::INFINITY);
        ocns[rx] = ocn(&a_bar, k).unwrap_or(f64::INFINITY);
    }
    (kappas, ocns)
}

/// Sum of log2(1 + SNR) over all streams.
pub fn sum_rate(snrs: &[f64]) -> f64 {
    snrs.iter().map(|s| (1.0 + s).log2()).sum()
}

/// Orthogonalized condition number: the CN of the normalized signal space
/// after replacing its K interference columns with a Gram-Schmidt
/// orthonormal basis, so interference-interference angles drop out.
pub fn ocn(a_bar: &CMatrix, k: usize) -> Result<f64, LinalgError> {
    let desired: Vec<Vec<Complex64>> = (0..k).map(|j| a_bar.col(j)).collect();
    let interference: Vec<Vec<Complex64>> = (k..2 * k).map(|j| a_bar.col(j)).collect();
    let q = gram_schmidt(&interference)?;
    let mut cols = desired;
    cols.extend(q);
    cond_number(&CMatrix::from_cols(&cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamform::SchemeContext;
    use crate::channel::draw_channel;
    use crate::latin::{enumerate_fixed_first_row, scheme_from_columns};
    use crate::linalg::test_support::{random_matrix, random_vector};
    use crate::linalg::{numerical_rank, vec_dot, vec_norm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn context(seed: u64) -> (SchemeContext, ChannelRealization) {
        let squares = enumerate_fixed_first_row(3).unwrap();
        let scheme = scheme_from_columns(&squares[0], 0, [0, 1, 2]).unwrap();
        let ch = draw_channel(3, seed, 0);
        (SchemeContext::new(scheme, &ch).unwrap(), ch)
    }

    #[test]
    fn zero_forcing_identity_and_unitary() {
        let i = CMatrix::identity(4);
        let rows = zero_forcing(&i, 2).unwrap();
        for (j, r) in rows.iter().enumerate() {
            for (m, &z) in r.iter().enumerate() {
                let want = if m == j { 1.0 } else { 0.0 };
                assert!((z - c(want, 0.0)).norm() < 1e-12);
            }
        }
        // unitary: rows of inverse are conjugated columns
        let a = random_matrix(5, 5, 2);
        let cols: Vec<_> = (0..5).map(|j| a.col(j)).collect();
        let q = CMatrix::from_cols(&gram_schmidt(&cols).unwrap());
        let rows = zero_forcing(&q, 5).unwrap();
        for (j, r) in rows.iter().enumerate() {
            let col = q.col(j);
            let diff: f64 = r
                .iter()
                .zip(&col)
                .map(|(x, y)| (x - y.conj()).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff < 1e-9);
        }
    }

    #[test]
    fn zero_forcing_nulling_oracle() {
        let a = random_matrix(6, 6, 5);
        let rows = zero_forcing(&a, 6).unwrap();
        let scale = a.frobenius_norm();
        for (j, r) in rows.iter().enumerate() {
            assert!((vec_norm(r) - 1.0).abs() < 1e-12);
            for m in 0..6 {
                if m == j {
                    continue;
                }
                let leak: Complex64 = r.iter().zip(&a.col(m)).map(|(x, y)| x * y).sum();
                assert!(leak.norm() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn stream_snr_trivial_cases() {
        // R aligned with Hv, |Hv| = 2, P = 1 -> SNR 4
        let h = CMatrix::diag(&[c(2.0, 0.0), c(1.0, 0.0)]);
        let v = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let r_aligned = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!((stream_snr(&r_aligned, &h, &v, 1.0) - 4.0).abs() < 1e-12);
        let r_orth = vec![c(0.0, 0.0), c(1.0, 0.0)];
        assert!(stream_snr(&r_orth, &h, &v, 1.0) < 1e-15);
    }

    #[test]
    fn stream_snr_matches_quadratic_form() {
        let h = random_matrix(4, 4, 8);
        let v = vec_normalize(&random_vector(4, 9));
        let r = vec_normalize(&random_vector(4, 10));
        let p = 2.5;
        // independent evaluation: P * R (Hv)(Hv)^H R^H as a 1x1 quadratic form
        let hv = h.mul_vec(&v);
        let rhv: Complex64 = r.iter().zip(&hv).map(|(a, b)| a * b).sum();
        let want = p * (rhv * rhv.conj()).re;
        assert!((stream_snr(&r, &h, &v, p) - want).abs() < 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn sum_rate_trivial_cases() {
        assert_eq!(sum_rate(&[0.0; 9]), 0.0);
        assert!((sum_rate(&[1.0; 9]) - 9.0).abs() < 1e-12);
    }

    #[test]
    fn signal_space_shape_and_ranks() {
        let (sctx, ch) = context(101);
        let set = sctx.build_index(42).unwrap();
        let spaces = signal_space(&set, &sctx.scheme, &ch, 0);
        assert_eq!(spaces.a.rows(), 6);
        assert_eq!(spaces.a.cols(), 6);
        assert!(!spaces.degenerate);
        assert_eq!(numerical_rank(&spaces.a, 1e-9).unwrap(), 6);
        // interference sub-block has rank 3
        let interf = CMatrix::from_cols(&(3..6).map(|j| spaces.a.col(j)).collect::<Vec<_>>());
        assert_eq!(numerical_rank(&interf, 1e-9).unwrap(), 3);
        // normalized columns are unit
        for j in 0..6 {
            assert!((vec_norm(&spaces.a_bar.col(j)) - 1.0).abs() < 1e-12);
        }
        assert!(spaces.kappa >= 1.0);
        assert!(spaces.ocn >= 1.0);
    }

    #[test]
    fn kappa_unchanged_by_column_scaling() {
        let (sctx, ch) = context(102);
        let set = sctx.build_index(7).unwrap();
        let spaces = signal_space(&set, &sctx.scheme, &ch, 1);
        // rescale an original column and renormalize: kappa must not move
        let mut cols: Vec<Vec<Complex64>> = (0..6).map(|j| spaces.a.col(j)).collect();
        cols[2] = crate::linalg::vec_scale(&cols[2], c(-3.0, 4.0));
        let rebuilt =
            CMatrix::from_cols(&cols.iter().map(|c| vec_normalize(c)).collect::<Vec<_>>());
        let kappa2 = cond_number(&rebuilt).unwrap();
        assert!((kappa2 - spaces.kappa).abs() < 1e-9 * spaces.kappa);
    }

    #[test]
    fn representative_choice_invariance() {
        // using the other pair member for each interference column changes
        // kappa and ocn only within collinearity tolerance
        let (sctx, ch) = context(103);
        let set = sctx.build_index(99).unwrap();
        for rx in 0..3 {
            let spaces = signal_space(&set, &sctx.scheme, &ch, rx);
            let mut cols: Vec<Vec<Complex64>> = (0..3)
                .map(|tx| {
                    vec_normalize(&ch.h(rx, tx).mul_vec(set.vector(BfId::new(rx, tx))))
                })
                .collect();
            for pair in alignment_pairs(&sctx.scheme, rx) {
                let w = pair.members.1; // second member this time
                cols.push(vec_normalize(&ch.h(rx, w.tx).mul_vec(set.vector(w))));
            }
            let alt = CMatrix::from_cols(&cols);
            let kappa_alt = cond_number(&alt).unwrap();
            let ocn_alt = ocn(&alt, 3).unwrap();
            assert!(
                (kappa_alt - spaces.kappa).abs() < 1e-6 * spaces.kappa,
                "rx {rx}: {} vs {}",
                kappa_alt,
                spaces.kappa
            );
            assert!((ocn_alt - spaces.ocn).abs() < 1e-6 * spaces.ocn);
        }
    }

    #[test]
    fn ocn_trivial_and_reordering_invariance() {
        // fully orthonormal A_bar -> kappa = ocn = 1
        let a = random_matrix(6, 6, 21);
        let cols: Vec<_> = (0..6).map(|j| a.col(j)).collect();
        let q = CMatrix::from_cols(&gram_schmidt(&cols).unwrap());
        assert!((ocn(&q, 3).unwrap() - 1.0).abs() < 1e-9);

        let (sctx, ch) = context(104);
        let set = sctx.build_index(11).unwrap();
        let spaces = signal_space(&set, &sctx.scheme, &ch, 2);
        let mut cols: Vec<Vec<Complex64>> = (0..6).map(|j| spaces.a_bar.col(j)).collect();
        cols.swap(3, 5);
        cols.swap(4, 3);
        let permuted = CMatrix::from_cols(&cols);
        let v = ocn(&permuted, 3).unwrap();
        assert!(
            (v - spaces.ocn).abs() < 1e-9 * spaces.ocn,
            "{v} vs {}",
            spaces.ocn
        );
    }

    #[test]
    fn set_metrics_consistent_with_direct_recomputation() {
        let (sctx, ch) = context(105);
        let set = sctx.build_index(123).unwrap();
        let metrics = set_metrics(&set, &sctx.scheme, &ch);
        assert_eq!(metrics.amplitudes.len(), 9);
        for rx in 0..3 {
            let spaces = signal_space(&set, &sctx.scheme, &ch, rx);
            for tx in 0..3 {
                let amp = stream_amplitude(
                    &spaces.zf_rows[tx],
                    ch.h(rx, tx),
                    set.vector(BfId::new(rx, tx)),
                );
                assert!((metrics.amplitudes[rx * 3 + tx] - amp).abs() < 1e-12);
            }
            assert!((metrics.kappas[rx] - spaces.kappa).abs() < 1e-9 * spaces.kappa);
        }
        // surrogate-only path agrees
        let (kappas, ocns) = surrogate_metrics(&set, &sctx.scheme, &ch);
        for rx in 0..3 {
            assert!((kappas[rx] - metrics.kappas[rx]).abs() < 1e-9 * kappas[rx]);
            assert!((ocns[rx] - metrics.ocns[rx]).abs() < 1e-9 * ocns[rx]);
        }
        // sum-rate additivity over per-stream rates
        let p = 4.0;
        let direct: f64 = metrics
            .snrs(p)
            .iter()
            .map(|s| (1.0 + s).log2())
            .sum();
        assert!((metrics.sum_rate(p) - direct).abs() < 1e-12);
    }

    #[test]
    fn zf_rows_null_interference_signals_not_just_representatives() {
        let (sctx, ch) = context(106);
        let set = sctx.build_index(200).unwrap();
        for rx in 0..3 {
            let spaces = signal_space(&set, &sctx.scheme, &ch, rx);
            let scale = spaces.a.frobenius_norm();
            for r in &spaces.zf_rows {
                for pair in alignment_pairs(&sctx.scheme, rx) {
                    for m in [pair.members.0, pair.members.1] {
                        let sig = ch.h(rx, m.tx).mul_vec(set.vector(m));
                        let leak: Complex64 = r.iter().zip(&sig).map(|(x, y)| x * y).sum();
                        assert!(leak.norm() < 1e-7 * scale, "leak {}", leak.norm());
                    }
                }
            }
        }
    }

    #[test]
    fn dot_helper_is_hermitian() {
        let u = random_vector(4, 30);
        let v = random_vector(4, 31);
        let a = vec_dot(&u, &v);
        let b = vec_dot(&v, &u).conj();
        assert!((a - b).norm() < 1e-14);
    }
}
