//! Gray-mapped QPSK and the per-draw link simulation.

use num_complex::Complex64;
use rand::Rng;

use crate::beamform::BeamformerSet;
use crate::channel::{awgn, ChannelRealization};
use crate::latin::{AlignmentScheme, BfId};
use crate::linalg::CMatrix;
use crate::receiver::signal_space;

/// Unit-energy Gray-mapped QPSK constellation point for a 2-bit symbol.
pub fn qpsk_point(sym: u8) -> Complex64 {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    // Gray order: 00 -> (+,+), 01 -> (-,+), 11 -> (-,-), 10 -> (+,-)
    match sym & 0b11 {
        0b00 => Complex64::new(a, a),
        0b01 => Complex64::new(-a, a),
        0b11 => Complex64::new(-a, -a),
        _ => Complex64::new(a, -a),
    }
}

/// Nearest-neighbor QPSK decision (quadrant slicer).
pub fn qpsk_detect(z: Complex64) -> u8 {
    match (z.re < 0.0, z.im < 0.0) {
        (false, false) => 0b00,
        (true, false) => 0b01,
        (true, true) => 0b11,
        (false, true) => 0b10,
    }
}

/// Precomputed transmission state for one (channel, beamformer set) pair:
/// the effective stream-to-receiver maps and the ZF decode coefficients.
pub struct Link {
    k: usize,
    /// g[rx]: M x 3K map from the stacked stream vector to receiver rx.
    g: Vec<CMatrix>,
    /// zf[rx][tx]: unit-norm decoder row for stream (rx, tx).
    zf: Vec<Vec<Vec<Complex64>>>,
    /// gain[rx][tx]: complex coefficient of the desired symbol after ZF
    /// (before the sqrt(P/3) power factor).
    gain: Vec<Vec<Complex64>>,
    pub degenerate: bool,
}

impl Link {
    pub fn new(set: &BeamformerSet, scheme: &AlignmentScheme, ch: &ChannelRealization) -> Link {
        let k = set.k();
        let m = ch.antennas();
        let mut g = Vec::with_capacity(3);
        let mut zf = Vec::with_capacity(3);
        let mut gain = Vec::with_capacity(3);
        let mut degenerate = false;
        for rx in 0..3 {
            // columns ordered stream-major: (target receiver t, transmitter j)
            let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(3 * k);
            for t in 0..3 {
                for tx in 0..k {
                    cols.push(ch.h(rx, tx).mul_vec(set.vector(BfId::new(t, tx))));
                }
            }
            g.push(CMatrix::from_cols(&cols));
            let spaces = signal_space(set, scheme, ch, rx);
            degenerate |= spaces.degenerate;
            let mut gains_rx = Vec::with_capacity(k);
            if spaces.degenerate {
                zf.push(vec![vec![Complex64::ZERO; m]; k]);
                gains_rx.resize(k, Complex64::ZERO);
            } else {
                for tx in 0..k {
                    let hv = ch.h(rx, tx).mul_vec(set.vector(BfId::new(rx, tx)));
                    let c: Complex64 = spaces.zf_rows[tx]
                        .iter()
                        .zip(&hv)
                        .map(|(r, x)| r * x)
                        .sum();
                    gains_rx.push(c);
                }
                zf.push(spaces.zf_rows);
            }
            gain.push(gains_rx);
        }
        Link {
            k,
            g,
            zf,
            gain,
            degenerate,
        }
    }

    /// Transmits `symbols` QPSK periods on all 3K streams at per-stream
    /// power `p_stream`, returning (symbol errors, symbols sent). Noise is
    /// skipped when `with_noise` is false (the exactness debug mode).
    pub fn run_symbols<R: Rng>(
        &self,
        symbols: u64,
        p_stream: f64,
        with_noise: bool,
        rng: &mut R,
    ) -> (u64, u64) {
        let k = self.k;
        let m = self.g[0].rows();
        let amp = p_stream.sqrt();
        let mut errors = 0u64;
        let mut sent = 0u64;
        for _ in 0..symbols {
            let tx_syms: Vec<u8> = (0..3 * k).map(|_| rng.random_range(0..4u8)).collect();
            let s: Vec<Complex64> = tx_syms
                .iter()
                .map(|&x| qpsk_point(x) * amp)
                .collect();
            for rx in 0..3 {
                let mut y = self.g[rx].mul_vec(&s);
                if with_noise {
                    let n = awgn(m, rng);
                    for (yi, ni) in y.iter_mut().zip(n) {
                        *yi += ni;
                    }
                }
                for tx in 0..k {
                    let c = self.gain[rx][tx];
                    sent += 1;
                    if c.norm() == 0.0 {
                        // degenerate receiver: count as error
                        errors += 1;
                        continue;
                    }
                    let z: Complex64 = self.zf[rx][tx]
                        .iter()
                        .zip(&y)
                        .map(|(r, x)| r * x)
                        .sum();
                    let detected = qpsk_detect(z / (c * amp));
                    if detected != tx_syms[rx * k + tx] {
                        errors += 1;
                    }
                }
            }
        }
        (errors, sent)
    }

    /// Mean transmitted energy per transmitter per symbol period, by direct
    /// accumulation over random symbols.
    pub fn empirical_tx_energy<R: Rng>(
        &self,
        set: &BeamformerSet,
        symbols: u64,
        p_stream: f64,
        rng: &mut R,
    ) -> f64 {
        let k = self.k;
        let amp = p_stream.sqrt();
        let mut total = 0.0;
        for _ in 0..symbols {
            for tx in 0..k {
                let mut x = vec![Complex64::ZERO; 2 * k];
                for t in 0..3 {
                    let s = qpsk_point(rng.random_range(0..4u8)) * amp;
                    for (xi, vi) in x.iter_mut().zip(set.vector(BfId::new(t, tx))) {
                        *xi += vi * s;
                    }
                }
                total += x.iter().map(|z| z.norm_sqr()).sum::<f64>();
            }
        }
        total / (symbols * k as u64) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beamform::SchemeContext;
    use crate::channel::{draw_channel, noise_rng};
    use crate::latin::{enumerate_fixed_first_row, scheme_from_columns};

    #[test]
    fn qpsk_roundtrip_and_gray_distance() {
        for sym in 0..4u8 {
            assert_eq!(qpsk_detect(qpsk_point(sym)), sym);
            assert!((qpsk_point(sym).norm() - 1.0).abs() < 1e-15);
        }
        // adjacent quadrants differ in exactly one bit
        let neighbors = [(0b00u8, 0b01u8), (0b01, 0b11), (0b11, 0b10), (0b10, 0b00)];
        for (a, b) in neighbors {
            assert_eq!((a ^ b).count_ones(), 1);
        }
    }

    fn link(seed: u64) -> (Link, BeamformerSet, SchemeContext, ChannelRealization) {
        let squares = enumerate_fixed_first_row(3).unwrap();
        let scheme = scheme_from_columns(&squares[0], 0, [0, 1, 2]).unwrap();
        let ch = draw_channel(3, seed, 0);
        let sctx = SchemeContext::new(scheme, &ch).unwrap();
        let set = sctx.build_index(64).unwrap();
        let l = Link::new(&set, &sctx.scheme, &ch);
        (l, set, sctx, ch)
    }

    #[test]
    fn noise_free_transmission_is_exact() {
        let (l, _, _, _) = link(201);
        let mut rng = noise_rng(201, 0);
        let (errors, sent) = l.run_symbols(500, 100.0, false, &mut rng);
        assert_eq!(errors, 0);
        assert_eq!(sent, 500 * 9);
    }

    #[test]
    fn high_noise_causes_errors() {
        let (l, _, _, _) = link(202);
        let mut rng = noise_rng(202, 0);
        let (errors, _) = l.run_symbols(500, 1e-4, true, &mut rng);
        assert!(errors > 0);
    }

    #[test]
    fn per_transmitter_energy_matches_power_budget() {
        let (l, set, _, _) = link(203);
        let mut rng = noise_rng(203, 1);
        let p_total = 6.0;
        let e = l.empirical_tx_energy(&set, 2000, p_total / 3.0, &mut rng);
        // three unit-norm beamformers at P/3 each; cross terms average out
        assert!((e - p_total).abs() < 0.02 * p_total, "energy {e}");
    }
}
