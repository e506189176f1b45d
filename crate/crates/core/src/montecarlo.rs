//! End-to-end frame simulation and SNR sweeps.
//!
//! Frame `i` of a point draws its bits, channel and noise (in that order)
//! from [`frame_stream`]`(master_seed, i)`. Frames are grouped into chunks of
//! [`CHUNK_FRAMES`]; chunks run in parallel but the early-stopping rule is
//! applied to chunks in index order, so every [`ErrorRecord`] depends only on
//! the point definition and never on the worker count.

use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{apply_channel, sample_channel, ChannelRealization, NoiseSpec};
use crate::codec::{encode, BitFrame, SmSmxConfig};
use crate::constellation::Constellation;
use crate::detection::{detect, Detector};
use crate::error::{Error, Result};
use crate::rng::{frame_stream, random_bits};

/// Frames per stopping-rule chunk.
pub const CHUNK_FRAMES: u64 = 1024;
pub const DEFAULT_MAX_FRAMES: u64 = 100_000;
pub const DEFAULT_TARGET_BIT_ERRORS: u64 = 200;

/// Channel model used by a simulation point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fading {
    /// Fresh i.i.d. `CN(0, 1)` gains every frame.
    #[default]
    Rayleigh,
    /// Fixed identity matrix. Used as an AWGN-only reference.
    Unit,
}

/// One point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub cfg: SmSmxConfig,
    pub detector: Detector,
    pub snr_db: f64,
    pub master_seed: u64,
    pub max_frames: u64,
    /// Stop once this many bit errors have accumulated; 0 disables early stopping.
    pub target_bit_errors: u64,
    pub fading: Fading,
}

impl SimPoint {
    pub fn new(cfg: SmSmxConfig, detector: Detector, snr_db: f64, master_seed: u64) -> Self {
        SimPoint {
            cfg,
            detector,
            snr_db,
            master_seed,
            max_frames: DEFAULT_MAX_FRAMES,
            target_bit_errors: DEFAULT_TARGET_BIT_ERRORS,
            fading: Fading::Rayleigh,
        }
    }

    pub fn with_frames(mut self, max_frames: u64, target_bit_errors: u64) -> Self {
        self.max_frames = max_frames;
        self.target_bit_errors = target_bit_errors;
        self
    }

    pub fn with_fading(mut self, fading: Fading) -> Self {
        self.fading = fading;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_frames == 0 {
            return Err(Error::InvalidConfig("max_frames must be at least 1".into()));
        }
        NoiseSpec::from_snr_db(self.snr_db)?;
        self.detector.check_compatible(&self.cfg)
    }
}

/// Error counts of a single frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    pub bit_errors: usize,
    pub group_error: bool,
    /// Active-antenna positions whose detected label differs from the sent one.
    pub symbol_errors: usize,
}

/// Accumulated statistics at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRecord {
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub group_errors: u64,
    pub symbol_errors: u64,
    pub eta: usize,
    pub ber: f64,
    pub fer: f64,
    pub elapsed_seconds: f64,
}

impl ErrorRecord {
    /// Binomial standard error of the BER estimate.
    pub fn ber_standard_error(&self) -> f64 {
        let bits = (self.frames * self.eta as u64) as f64;
        (self.ber * (1.0 - self.ber) / bits).sqrt()
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    frames: u64,
    bit_errors: u64,
    frame_errors: u64,
    group_errors: u64,
    symbol_errors: u64,
}

impl Tally {
    fn add_frame(&mut self, o: FrameOutcome) {
        self.frames += 1;
        self.bit_errors += o.bit_errors as u64;
        self.frame_errors += u64::from(o.bit_errors > 0);
        self.group_errors += u64::from(o.group_error);
        self.symbol_errors += o.symbol_errors as u64;
    }

    fn merge(&mut self, other: &Tally) {
        self.frames += other.frames;
        self.bit_errors += other.bit_errors;
        self.frame_errors += other.frame_errors;
        self.group_errors += other.group_errors;
        self.symbol_errors += other.symbol_errors;
    }

    fn into_record(self, eta: usize, elapsed_seconds: f64) -> ErrorRecord {
        let bits = (self.frames * eta as u64) as f64;
        ErrorRecord {
            frames: self.frames,
            bit_errors: self.bit_errors,
            frame_errors: self.frame_errors,
            group_errors: self.group_errors,
            symbol_errors: self.symbol_errors,
            eta,
            ber: self.bit_errors as f64 / bits,
            fer: self.frame_errors as f64 / self.frames as f64,
            elapsed_seconds,
        }
    }
}

/// Progress notification, emitted after each batch of chunks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub point_index: usize,
    pub snr_db: f64,
    pub frames: u64,
    pub bit_errors: u64,
}

pub type ProgressHook<'a> = &'a (dyn Fn(&Progress) + Sync);

struct FrameRunner<'a> {
    point: &'a SimPoint,
    constellation: Constellation,
    noise: NoiseSpec,
    eta: usize,
}

impl<'a> FrameRunner<'a> {
    fn new(point: &'a SimPoint) -> Result<Self> {
        point.validate()?;
        Ok(FrameRunner {
            point,
            constellation: point.cfg.constellation(),
            noise: NoiseSpec::from_snr_db(point.snr_db)?,
            eta: point.cfg.bits_per_frame(),
        })
    }

    fn run(&self, frame_index: u64) -> Result<FrameOutcome> {
        let cfg = &self.point.cfg;
        let c = &self.constellation;
        let mut rng = frame_stream(self.point.master_seed, frame_index);
        let frame = BitFrame::new(random_bits(&mut rng, self.eta));
        let x = encode(cfg, &frame, c)?;
        let h = match self.point.fading {
            Fading::Rayleigh => sample_channel(cfg.nr(), cfg.n(), &mut rng),
            Fading::Unit => ChannelRealization::identity(cfg.nr(), cfg.n()),
        };
        let y = apply_channel(&h, &x, &self.noise, &mut rng)?;
        let detected = detect(self.point.detector, &y, &h, cfg, c)?;

        let symbol_errors = x
            .point_indices()
            .iter()
            .zip(&detected.symbol_labels)
            .filter(|(&p, label)| &c.label_bits(p) != *label)
            .count();
        Ok(FrameOutcome {
            bit_errors: frame.hamming_distance(&detected.frame),
            group_error: detected.group != x.group(),
            symbol_errors,
        })
    }

    fn run_chunk(&self, chunk: u64) -> Result<Tally> {
        let start = chunk * CHUNK_FRAMES;
        let end = (start + CHUNK_FRAMES).min(self.point.max_frames);
        let mut tally = Tally::default();
        for i in start..end {
            tally.add_frame(self.run(i)?);
        }
        Ok(tally)
    }
}

/// Simulates a single frame of `point`.
pub fn run_frame(point: &SimPoint, frame_index: u64) -> Result<FrameOutcome> {
    FrameRunner::new(point)?.run(frame_index)
}

pub fn run_point(point: &SimPoint) -> Result<ErrorRecord> {
    run_point_with_progress(point, 0, None)
}

/// Runs `point` until `max_frames` or the bit-error target is reached.
///
/// `point_index` is only forwarded to `progress`.
pub fn run_point_with_progress(
    point: &SimPoint,
    point_index: usize,
    progress: Option<ProgressHook<'_>>,
) -> Result<ErrorRecord> {
    let started = Instant::now();
    let runner = FrameRunner::new(point)?;
    let total_chunks = point.max_frames.div_ceil(CHUNK_FRAMES);
    let batch = (rayon::current_num_threads() as u64 * 2).max(1);

    let mut tally = Tally::default();
    let mut next = 0u64;
    'outer: while next < total_chunks {
        let end = (next + batch).min(total_chunks);
        let tallies: Vec<Result<Tally>> = (next..end)
            .into_par_iter()
            .map(|chunk| runner.run_chunk(chunk))
            .collect();
        for t in tallies {
            tally.merge(&t?);
            if point.target_bit_errors > 0 && tally.bit_errors >= point.target_bit_errors {
                break 'outer;
            }
        }
        next = end;
        if let Some(hook) = progress {
            hook(&Progress {
                point_index,
                snr_db: point.snr_db,
                frames: tally.frames,
                bit_errors: tally.bit_errors,
            });
        }
    }
    Ok(tally.into_record(runner.eta, started.elapsed().as_secs_f64()))
}

/// A sweep that stopped on an error.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("sweep aborted at point {failed_index}: {source}")]
pub struct SweepError {
    /// Records of every point before the failing one, in input order.
    pub completed: Vec<ErrorRecord>,
    pub failed_index: usize,
    pub source: Error,
}

pub fn run_sweep(points: &[SimPoint]) -> Result<Vec<ErrorRecord>, SweepError> {
    run_sweep_with_progress(points, None)
}

/// Runs every point; records are returned in input order.
pub fn run_sweep_with_progress(
    points: &[SimPoint],
    progress: Option<ProgressHook<'_>>,
) -> Result<Vec<ErrorRecord>, SweepError> {
    if points.is_empty() {
        return Err(SweepError {
            completed: Vec::new(),
            failed_index: 0,
            source: Error::InvalidConfig("sweep needs at least one point".into()),
        });
    }
    for (i, p) in points.iter().enumerate() {
        p.validate().map_err(|source| SweepError {
            completed: Vec::new(),
            failed_index: i,
            source,
        })?;
    }
    let results: Vec<Result<ErrorRecord>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| run_point_with_progress(p, i, progress))
        .collect();

    let mut completed = Vec::with_capacity(points.len());
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => completed.push(rec),
            Err(source) => {
                return Err(SweepError {
                    completed,
                    failed_index: i,
                    source,
                })
            }
        }
    }
    Ok(completed)
}
