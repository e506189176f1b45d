//! Receivers: joint maximum likelihood, per-group zero forcing, and the
//! matched-filter (MRRC) antenna detector for pure spatial modulation.
//!
//! All detectors assume perfect channel knowledge and break ties
//! deterministically: ML by smallest frame value, the others by lowest
//! group or antenna index.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::channel::ChannelRealization;
use crate::codec::{check_cap, decode, BitFrame, Scheme, SmSmxConfig, DEFAULT_ENUMERATION_CAP};
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Relative singular-value threshold below which a group submatrix is singular.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Detector {
    Ml,
    TwoStage,
    SmMrrc,
}

impl Detector {
    pub fn as_str(self) -> &'static str {
        match self {
            Detector::Ml => "ml",
            Detector::TwoStage => "two_stage",
            Detector::SmMrrc => "sm_mrrc",
        }
    }

    /// Checks that this detector can run on `cfg`.
    pub fn check_compatible(self, cfg: &SmSmxConfig) -> Result<()> {
        match self {
            Detector::SmMrrc if cfg.scheme() != Scheme::PureSm => Err(Error::SchemeMismatch {
                detector: self.to_string(),
                scheme: cfg.scheme().to_string(),
            }),
            Detector::TwoStage if cfg.nr() < cfg.k() => Err(Error::InvalidConfig(format!(
                "two_stage needs Nr >= K (Nr = {}, K = {})",
                cfg.nr(),
                cfg.k()
            ))),
            Detector::Ml => check_cap(cfg, DEFAULT_ENUMERATION_CAP),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Detector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Detector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ml" => Ok(Detector::Ml),
            "two_stage" => Ok(Detector::TwoStage),
            "sm_mrrc" => Ok(Detector::SmMrrc),
            other => Err(Error::InvalidConfig(format!(
                "unknown detector '{other}' (expected ml, two_stage or sm_mrrc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub group: usize,
    pub symbol_labels: Vec<Vec<u8>>,
    pub frame: BitFrame,
    /// Residual energy `||y - H x_hat||^2`.
    pub metric: f64,
}

impl DetectionResult {
    fn new(
        cfg: &SmSmxConfig,
        c: &Constellation,
        group: usize,
        point_indices: &[usize],
        metric: f64,
    ) -> Result<Self> {
        let symbol_labels: Vec<Vec<u8>> = point_indices.iter().map(|&p| c.label_bits(p)).collect();
        let frame = decode(cfg, group, &symbol_labels)?;
        Ok(DetectionResult {
            group,
            symbol_labels,
            frame,
            metric,
        })
    }
}

fn check_dims(y: &[Complex64], h: &ChannelRealization, cfg: &SmSmxConfig, c: &Constellation) -> Result<()> {
    cfg.check_constellation(c)?;
    if h.nr() != cfg.nr() || h.n() != cfg.n() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}, configuration expects {}x{}",
            h.nr(),
            h.n(),
            cfg.nr(),
            cfg.n()
        )));
    }
    if y.len() != cfg.nr() {
        return Err(Error::DimensionMismatch(format!(
            "received vector has {} entries, expected {}",
            y.len(),
            cfg.nr()
        )));
    }
    Ok(())
}

/// Dispatches to the selected detector.
pub fn detect(
    detector: Detector,
    y: &[Complex64],
    h: &ChannelRealization,
    cfg: &SmSmxConfig,
    c: &Constellation,
) -> Result<DetectionResult> {
    match detector {
        Detector::Ml => ml_detect(y, h, cfg, c),
        Detector::TwoStage => two_stage_detect(y, h, cfg, c),
        Detector::SmMrrc => sm_mrrc_detect(y, h, cfg, c),
    }
}

/// Joint ML detection over the full codebook with the default enumeration cap.
pub fn ml_detect(
    y: &[Complex64],
    h: &ChannelRealization,
    cfg: &SmSmxConfig,
    c: &Constellation,
) -> Result<DetectionResult> {
    ml_detect_with_cap(y, h, cfg, c, DEFAULT_ENUMERATION_CAP)
}

/// Joint ML detection: argmin over all `(group, symbols)` of `||y - H x||^2`.
///
/// Hypotheses are visited in ascending frame order and only a strictly
/// smaller metric replaces the incumbent.
pub fn ml_detect_with_cap(
    y: &[Complex64],
    h: &ChannelRealization,
    cfg: &SmSmxConfig,
    c: &Constellation,
    cap: u64,
) -> Result<DetectionResult> {
    check_dims(y, h, cfg, c)?;
    check_cap(cfg, cap)?;

    let nr = cfg.nr();
    let k = cfg.k();
    let m = cfg.m() as usize;
    let bps = cfg.bits_per_symbol();
    let scale = 1.0 / (k as f64).sqrt();

    // contrib[(antenna * M + point) * Nr + row] = H[row, antenna] * point / sqrt(K)
    let mut contrib = vec![Complex64::new(0.0, 0.0); cfg.n() * m * nr];
    for ant in 0..cfg.n() {
        for p in 0..m {
            let s = c.point(p) * scale;
            for row in 0..nr {
                contrib[(ant * m + p) * nr + row] = h.get(row, ant) * s;
            }
        }
    }

    let payloads = 1usize << (k * bps);
    let mut best_metric = f64::INFINITY;
    let mut best = (0usize, vec![0usize; k]);
    let mut points = vec![0usize; k];
    let mut residual = vec![Complex64::new(0.0, 0.0); nr];
    for g in 0..cfg.groups() {
        for payload in 0..payloads {
            residual.copy_from_slice(y);
            for (j, point) in points.iter_mut().enumerate() {
                let label = (payload >> (bps * (k - 1 - j))) & (m - 1);
                *point = c.index_of_label(label as u32);
                let base = ((g * k + j) * m + *point) * nr;
                for (r, v) in residual.iter_mut().zip(&contrib[base..base + nr]) {
                    *r -= v;
                }
            }
            let metric: f64 = residual.iter().map(|r| r.norm_sqr()).sum();
            if metric < best_metric {
                best_metric = metric;
                best.0 = g;
                best.1.copy_from_slice(&points);
            }
        }
    }
    DetectionResult::new(cfg, c, best.0, &best.1, best_metric)
}

/// Per-group zero forcing followed by residual comparison across groups.
///
/// For each group the ZF estimate `pinv(H_g) y` is rescaled by `sqrt(K)`,
/// sliced to the nearest constellation points, and scored by its residual.
pub fn two_stage_detect(
    y: &[Complex64],
    h: &ChannelRealization,
    cfg: &SmSmxConfig,
    c: &Constellation,
) -> Result<DetectionResult> {
    check_dims(y, h, cfg, c)?;
    let k = cfg.k();
    if cfg.nr() < k {
        return Err(Error::DimensionMismatch(format!(
            "zero forcing needs Nr >= K (Nr = {}, K = {k})",
            cfg.nr()
        )));
    }
    let scale = (k as f64).sqrt();
    let yv = DVector::from_column_slice(y);

    let mut best_metric = f64::INFINITY;
    let mut best = (0usize, vec![0usize; k]);
    for g in 0..cfg.groups() {
        let hg: DMatrix<Complex64> = h.matrix().columns(g * k, k).into_owned();
        let svd = hg.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smax <= 0.0 || smax.is_nan() || smin < RANK_TOLERANCE * smax {
            return Err(Error::RankDeficient { group: g });
        }
        let pinv = svd
            .pseudo_inverse(RANK_TOLERANCE * smax)
            .map_err(|_| Error::RankDeficient { group: g })?;
        let estimate = pinv * &yv;
        let points: Vec<usize> = estimate.iter().map(|&s| c.nearest_index(s * scale)).collect();
        let quantized = DVector::from_iterator(k, points.iter().map(|&p| c.point(p) / scale));
        let metric = (&yv - hg * quantized).norm_squared();
        if metric < best_metric {
            best_metric = metric;
            best = (g, points);
        }
    }
    DetectionResult::new(cfg, c, best.0, &best.1, best_metric)
}

/// Matched-filter antenna detection for pure spatial modulation.
///
/// Picks `argmax_j |h_j^H y| / ||h_j||`, then demaps `h^H y / ||h||^2`.
pub fn sm_mrrc_detect(
    y: &[Complex64],
    h: &ChannelRealization,
    cfg: &SmSmxConfig,
    c: &Constellation,
) -> Result<DetectionResult> {
    Detector::SmMrrc.check_compatible(cfg)?;
    check_dims(y, h, cfg, c)?;

    let column = |j: usize| h.matrix().column(j);
    let correlate = |j: usize| -> (Complex64, f64) {
        let col = column(j);
        let dot: Complex64 = col.iter().zip(y).map(|(hv, yv)| hv.conj() * yv).sum();
        (dot, col.norm_squared())
    };

    let mut best_ant = 0;
    let mut best_score = f64::NEG_INFINITY;
    for j in 0..cfg.n() {
        let (dot, energy) = correlate(j);
        let score = if energy > 0.0 { dot.norm() / energy.sqrt() } else { 0.0 };
        if score > best_score {
            best_score = score;
            best_ant = j;
        }
    }
    let (dot, energy) = correlate(best_ant);
    let combined = if energy > 0.0 { dot / energy } else { Complex64::new(0.0, 0.0) };
    let point = c.nearest_index(combined);
    let s = c.point(point);
    let metric: f64 = column(best_ant)
        .iter()
        .zip(y)
        .map(|(hv, yv)| (yv - hv * s).norm_sqr())
        .sum();
    DetectionResult::new(cfg, c, best_ant, &[point], metric)
}
