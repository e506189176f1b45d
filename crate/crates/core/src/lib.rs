//! Link-level simulator for spatial modulation combined with spatial
//! multiplexing (SM-SMX) over flat Rayleigh fading MIMO channels.
//!
//! `N` transmit antennas are split into `N/K` aligned groups of `K` antennas.
//! Each channel use, leading bits pick the active group and the remaining bits
//! are carried by `K` QAM symbols multiplexed over that group, so only `K` RF
//! chains are needed. Pure spatial modulation (`K = 1`) and pure spatial
//! multiplexing (`K = N`) are provided as baselines.
//!
//! ```
//! use smsmx::{Scheme, SmSmxConfig};
//!
//! let cfg = SmSmxConfig::new(4, 2, 4, 4, Scheme::SmSmx).unwrap();
//! assert_eq!(cfg.bits_per_frame(), 5);
//! ```

pub mod channel;
pub mod cli;
pub mod codec;
pub mod constellation;
pub mod detection;
mod error;
pub mod montecarlo;
pub mod rng;

pub use channel::{apply_channel, ebn0_db, sample_channel, ChannelRealization, NoiseSpec};
pub use codec::{
    bits_per_frame, decode, encode, enumerate_codebook, BitFrame, Scheme, SmSmxConfig,
    TransmitVector, DEFAULT_ENUMERATION_CAP,
};
pub use constellation::Constellation;
pub use detection::{
    detect, ml_detect, ml_detect_with_cap, sm_mrrc_detect, two_stage_detect, DetectionResult,
    Detector,
};
pub use error::{Error, Result};
pub use montecarlo::{
    run_frame, run_point, run_sweep, ErrorRecord, Fading, FrameOutcome, SimPoint, SweepError,
};
