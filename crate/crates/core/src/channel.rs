//! Flat Rayleigh fading with additive white Gaussian noise.
//!
//! The SNR is the average received SNR per receive antenna. Transmit vectors
//! have unit average energy and fading gains are `CN(0, 1)`, so the received
//! signal power per antenna averages to one and the complex noise variance is
//! `sigma2 = 10^(-snr_db / 10)`. `snr_db = +inf` is the noiseless mode.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::RngCore;

use crate::codec::TransmitVector;
use crate::error::{Error, Result};
use crate::rng::complex_normal;

/// An `Nr x N` matrix of channel gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    h: DMatrix<Complex64>,
}

impl ChannelRealization {
    pub fn from_matrix(h: DMatrix<Complex64>) -> Self {
        ChannelRealization { h }
    }

    /// Builds from row-major entries.
    pub fn from_row_slice(nr: usize, n: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != nr * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} channel entries for {nr}x{n}, got {}",
                nr * n,
                entries.len()
            )));
        }
        Ok(ChannelRealization {
            h: DMatrix::from_row_slice(nr, n, entries),
        })
    }

    /// Ones on the main diagonal, zeros elsewhere.
    pub fn identity(nr: usize, n: usize) -> Self {
        ChannelRealization {
            h: DMatrix::identity(nr, n),
        }
    }

    pub fn nr(&self) -> usize {
        self.h.nrows()
    }

    pub fn n(&self) -> usize {
        self.h.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.h[(row, col)]
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        ChannelRealization {
            h: self.h.map(|v| v * factor),
        }
    }

    /// `H x` for a dense transmit vector.
    pub fn mul_dense(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "transmit vector has {} entries, channel has {} columns",
                x.len(),
                self.n()
            )));
        }
        let y = &self.h * DVector::from_column_slice(x);
        Ok(y.iter().copied().collect())
    }
}

/// Noise level derived from an SNR in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    snr_db: f64,
    sigma2: f64,
}

impl NoiseSpec {
    /// Finite SNR, or `f64::INFINITY` for the noiseless mode.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        if snr_db.is_nan() || snr_db == f64::NEG_INFINITY {
            return Err(Error::InvalidConfig(format!("invalid SNR {snr_db} dB")));
        }
        let sigma2 = if snr_db == f64::INFINITY {
            0.0
        } else {
            10f64.powf(-snr_db / 10.0)
        };
        Ok(NoiseSpec { snr_db, sigma2 })
    }

    pub fn noiseless() -> Self {
        NoiseSpec {
            snr_db: f64::INFINITY,
            sigma2: 0.0,
        }
    }

    pub fn snr_db(&self) -> f64 {
        self.snr_db
    }

    /// Complex noise variance per receive antenna.
    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma2 == 0.0
    }
}

/// Eb/N0 in dB for a given per-antenna SNR and spectral efficiency `eta`.
pub fn ebn0_db(snr_db: f64, eta: usize) -> f64 {
    snr_db - 10.0 * (eta as f64).log10()
}

/// Draws an `Nr x N` matrix of i.i.d. `CN(0, 1)` gains, row-major draw order.
pub fn sample_channel<R: RngCore + ?Sized>(nr: usize, n: usize, rng: &mut R) -> ChannelRealization {
    let entries: Vec<Complex64> = (0..nr * n).map(|_| complex_normal(rng)).collect();
    ChannelRealization {
        h: DMatrix::from_row_slice(nr, n, &entries),
    }
}

/// `y = H x + n` with `n ~ CN(0, sigma2 I)`.
///
/// Noise samples are drawn even in the noiseless mode so the stream position
/// after this call does not depend on the SNR.
pub fn apply_channel<R: RngCore + ?Sized>(
    h: &ChannelRealization,
    x: &TransmitVector,
    noise: &NoiseSpec,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let mut y = h.mul_dense(&x.dense())?;
    let sigma = noise.sigma2.sqrt();
    for v in y.iter_mut() {
        let z = complex_normal(rng);
        if sigma > 0.0 {
            *v += z * sigma;
        }
    }
    Ok(y)
}
