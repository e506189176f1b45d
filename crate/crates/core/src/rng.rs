//! Counter-based random streams and the pinned Gaussian sampler.
//!
//! Every simulated frame draws from its own ChaCha8 stream keyed by
//! `(master_seed, frame_index)`: the key is `ChaCha8Rng::seed_from_u64(master_seed)`
//! and the stream id is the frame index. Frames are therefore independent of
//! which worker runs them or in what order.
//!
//! Complex normals use Box-Muller on two consecutive `u64` draws `a`, `b`:
//!
//! ```text
//! u1 = ((a >> 11) + 1) * 2^-53        in (0, 1]
//! u2 = (b >> 11) * 2^-53              in [0, 1)
//! z  = sqrt(-ln u1) * (cos(2 pi u2) + j sin(2 pi u2))
//! ```
//!
//! which yields `CN(0, 1)` (variance 1/2 per real component).

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TWO_POW_MINUS_53: f64 = 1.0 / (1u64 << 53) as f64;

/// The random stream for one frame of one simulation.
pub fn frame_stream(master_seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(frame_index);
    rng
}

/// One circularly-symmetric complex Gaussian sample with unit variance.
pub fn complex_normal<R: RngCore + ?Sized>(rng: &mut R) -> Complex64 {
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * TWO_POW_MINUS_53;
    let u2 = (rng.next_u64() >> 11) as f64 * TWO_POW_MINUS_53;
    let r = (-u1.ln()).sqrt();
    let (s, c) = (TAU * u2).sin_cos();
    Complex64::new(r * c, r * s)
}

/// `len` uniformly random bits, 64 per `u64` draw, MSB first.
pub fn random_bits<R: RngCore + ?Sized>(rng: &mut R, len: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(len);
    while bits.len() < len {
        let word = rng.next_u64();
        let take = (len - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> (63 - i)) & 1) as u8));
    }
    bits
}
