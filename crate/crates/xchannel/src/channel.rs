//! Seeded i.i.d. flat-Rayleigh channel realizations for the K x 3 X network.
//!
//! Every draw gets its own counter-keyed RNG stream, so parallel and serial
//! generation of the same (seed, draw_index) agree bit-exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::CMatrix;

/// Stream purposes carved out of one 64-bit seed.
const STREAM_CHANNEL: u64 = 0;
const STREAM_NOISE: u64 = 1;
const STREAM_SELECT: u64 = 2;

/// One fading draw: the 3 x K grid of 2K x 2K channel matrices.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub k: usize,
    pub seed: u64,
    pub draw_index: u64,
    /// h[i][j] is the channel from transmitter j to receiver i.
    h: Vec<CMatrix>,
    inv: Vec<Option<CMatrix>>,
}

impl ChannelRealization {
    pub fn antennas(&self) -> usize {
        2 * self.k
    }

    pub fn h(&self, rx: usize, tx: usize) -> &CMatrix {
        &self.h[rx * self.k + tx]
    }

    /// Inverse of H[rx][tx], computed once on construction. Rayleigh draws
    /// are invertible with probability 1; a singular draw leaves `None` and
    /// callers surface `SingularChannel`.
    pub fn h_inv(&self, rx: usize, tx: usize) -> Option<&CMatrix> {
        self.inv[rx * self.k + tx].as_ref()
    }

    /// Replaces one channel matrix and refreshes its cached inverse.
    /// Debug/test hook for synthetic channels.
    pub fn set_h(&mut self, rx: usize, tx: usize, m: CMatrix) {
        let idx = rx * self.k + tx;
        self.inv[idx] = crate::linalg::inverse(&m).ok();
        self.h[idx] = m;
    }
}

fn stream_rng(seed: u64, draw_index: u64, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw_index.wrapping_mul(4).wrapping_add(purpose));
    rng
}

/// One complex Gaussian entry: zero mean, unit total variance
/// (variance 1/2 per real/imaginary part).
fn cn01<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Deterministic Rayleigh-fading draw for (seed, draw_index).
pub fn draw_channel(k: usize, seed: u64, draw_index: u64) -> ChannelRealization {
    assert!(k >= 3, "K must be at least 3");
    let m = 2 * k;
    let mut rng = stream_rng(seed, draw_index, STREAM_CHANNEL);
    let mut h = Vec::with_capacity(3 * k);
    for _rx in 0..3 {
        for _tx in 0..k {
            let data: Vec<Complex64> = (0..m * m).map(|_| cn01(&mut rng)).collect();
            h.push(CMatrix::from_rows(m, m, data));
        }
    }
    let inv = h
        .iter()
        .map(|m| crate::linalg::inverse(m).ok())
        .collect();
    ChannelRealization {
        k,
        seed,
        draw_index,
        h,
        inv,
    }
}

/// RNG stream for the AWGN of one draw.
pub fn noise_rng(seed: u64, draw_index: u64) -> ChaCha8Rng {
    stream_rng(seed, draw_index, STREAM_NOISE)
}

/// RNG stream for randomized selection within one draw.
pub fn selection_rng(seed: u64, draw_index: u64) -> ChaCha8Rng {
    stream_rng(seed, draw_index, STREAM_SELECT)
}

/// Circularly symmetric white Gaussian noise, unit variance per entry.
pub fn awgn<R: Rng>(dim: usize, rng: &mut R) -> Vec<Complex64> {
    assert!(dim >= 1, "noise dimension must be positive");
    (0..dim).map(|_| cn01(rng)).collect()
}
