//! Bit partitioning for spatial modulation / spatial multiplexing.
//!
//! A frame of `eta = log2(N/K) + K log2(M)` bits is split into a group index
//! (read big-endian from the leading `log2(N/K)` bits) that picks one of the
//! `N/K` aligned antenna groups `{gK, .., gK + K - 1}`, followed by `K` blocks
//! of `log2(M)` bits, each mapped to a constellation point. Symbol `j` is sent
//! from antenna `gK + j` scaled by `1/sqrt(K)` so the transmit energy averages
//! to one for every `K`.
//!
//! Pure spatial modulation (`K = 1`) and pure spatial multiplexing (`K = N`)
//! are the two degenerate cases and share the same code path.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::constellation::{bits_to_label, label_to_bits, Constellation};
use crate::error::{Error, Result};

/// Default upper bound on `2^eta` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    SmSmx,
    PureSm,
    PureSmx,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::SmSmx => "sm_smx",
            Scheme::PureSm => "pure_sm",
            Scheme::PureSmx => "pure_smx",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sm_smx" => Ok(Scheme::SmSmx),
            "pure_sm" => Ok(Scheme::PureSm),
            "pure_smx" => Ok(Scheme::PureSmx),
            other => Err(Error::InvalidConfig(format!(
                "unknown scheme '{other}' (expected sm_smx, pure_sm or pure_smx)"
            ))),
        }
    }
}

/// Validated scheme parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SmSmxConfig {
    n: usize,
    k: usize,
    m: u32,
    nr: usize,
    scheme: Scheme,
}

impl SmSmxConfig {
    /// `n` transmit antennas, `k` RF chains, `m`-QAM, `nr` receive antennas.
    pub fn new(n: usize, k: usize, m: u32, nr: usize, scheme: Scheme) -> Result<Self> {
        let invalid = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if n == 0 {
            return invalid("N must be at least 1");
        }
        if k == 0 {
            return invalid("K must be at least 1");
        }
        if nr == 0 {
            return invalid("Nr must be at least 1");
        }
        if !n.is_multiple_of(k) {
            return invalid("K must divide N");
        }
        if !(n / k).is_power_of_two() {
            return invalid("N/K must be a power of two");
        }
        match scheme {
            Scheme::PureSm if k != 1 => return invalid("pure_sm requires K = 1"),
            Scheme::PureSmx if k != n => return invalid("pure_smx requires K = N"),
            _ => {}
        }
        if !matches!(m, 2 | 4 | 16 | 64) {
            return Err(Error::UnsupportedOrder(m));
        }
        Ok(SmSmxConfig {
            n,
            k,
            m,
            nr,
            scheme,
        })
    }

    /// Same as [`new`](Self::new) with `Nr = N`.
    pub fn with_default_receivers(n: usize, k: usize, m: u32, scheme: Scheme) -> Result<Self> {
        Self::new(n, k, m, n, scheme)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Active antennas per frame, which is also the RF-chain count.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn nr(&self) -> usize {
        self.nr
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn groups(&self) -> usize {
        self.n / self.k
    }

    pub fn group_bits(&self) -> usize {
        self.groups().trailing_zeros() as usize
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.m.trailing_zeros() as usize
    }

    /// Bits conveyed per channel use.
    pub fn bits_per_frame(&self) -> usize {
        self.group_bits() + self.k * self.bits_per_symbol()
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::new(self.m).expect("order validated at construction")
    }

    pub(crate) fn check_constellation(&self, c: &Constellation) -> Result<()> {
        if c.order() != self.m {
            return Err(Error::DimensionMismatch(format!(
                "constellation order {} does not match configured M = {}",
                c.order(),
                self.m
            )));
        }
        Ok(())
    }
}

/// Bits conveyed per channel use: `log2(N/K) + K log2(M)`.
pub fn bits_per_frame(cfg: &SmSmxConfig) -> usize {
    cfg.bits_per_frame()
}

/// A frame of information bits, one `u8` (0 or 1) per bit, MSB first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitFrame(Vec<u8>);

impl BitFrame {
    pub fn new(bits: Vec<u8>) -> Self {
        BitFrame(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    /// The low `len` bits of `value`, big-endian.
    pub fn from_u64(value: u64, len: usize) -> Self {
        BitFrame(
            (0..len)
                .rev()
                .map(|s| if s < 64 { ((value >> s) & 1) as u8 } else { 0 })
                .collect(),
        )
    }

    /// Big-endian integer value, if the frame fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        (self.0.len() <= 64).then(|| self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn hamming_distance(&self, other: &BitFrame) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
            + self.0.len().abs_diff(other.0.len())
    }
}

impl fmt::Display for BitFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for BitFrame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidConfig(format!("invalid bit '{other}'"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitFrame)
    }
}

/// Sparse transmit vector: one active group carrying `K` scaled symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitVector {
    n: usize,
    group: usize,
    point_indices: Vec<usize>,
    symbols: Vec<Complex64>,
}

impl TransmitVector {
    pub fn group(&self) -> usize {
        self.group
    }

    /// The `K` transmitted values, already scaled by `1/sqrt(K)`.
    pub fn symbols(&self) -> &[Complex64] {
        &self.symbols
    }

    /// Constellation point index carried on each active antenna.
    pub fn point_indices(&self) -> &[usize] {
        &self.point_indices
    }

    pub fn active_antennas(&self) -> std::ops::Range<usize> {
        let k = self.symbols.len();
        self.group * k..(self.group + 1) * k
    }

    /// Length-`N` dense form.
    pub fn dense(&self) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.n];
        for (slot, &s) in x[self.active_antennas()].iter_mut().zip(&self.symbols) {
            *slot = s;
        }
        x
    }

    pub fn energy(&self) -> f64 {
        self.symbols.iter().map(|s| s.norm_sqr()).sum()
    }
}

fn build_vector(
    cfg: &SmSmxConfig,
    c: &Constellation,
    group: usize,
    point_indices: Vec<usize>,
) -> TransmitVector {
    let scale = 1.0 / (cfg.k as f64).sqrt();
    let symbols = point_indices.iter().map(|&i| c.point(i) * scale).collect();
    TransmitVector {
        n: cfg.n,
        group,
        point_indices,
        symbols,
    }
}

/// Maps one frame to its transmit vector.
pub fn encode(cfg: &SmSmxConfig, frame: &BitFrame, c: &Constellation) -> Result<TransmitVector> {
    cfg.check_constellation(c)?;
    let eta = cfg.bits_per_frame();
    if frame.len() != eta {
        return Err(Error::LengthMismatch {
            expected: eta,
            got: frame.len(),
        });
    }
    let bits = frame.bits();
    let (group_bits, payload) = bits.split_at(cfg.group_bits());
    let group = bits_to_label(group_bits) as usize;
    let point_indices = payload
        .chunks(cfg.bits_per_symbol())
        .map(|chunk| c.index_of_label(bits_to_label(chunk)))
        .collect();
    Ok(build_vector(cfg, c, group, point_indices))
}

/// Reassembles a frame from a group index and `K` symbol labels.
pub fn decode(cfg: &SmSmxConfig, group: usize, symbol_labels: &[Vec<u8>]) -> Result<BitFrame> {
    if group >= cfg.groups() {
        return Err(Error::GroupOutOfRange {
            group,
            groups: cfg.groups(),
        });
    }
    if symbol_labels.len() != cfg.k {
        return Err(Error::LengthMismatch {
            expected: cfg.k,
            got: symbol_labels.len(),
        });
    }
    let mut bits = label_to_bits(group as u32, cfg.group_bits());
    for label in symbol_labels {
        if label.len() != cfg.bits_per_symbol() {
            return Err(Error::LengthMismatch {
                expected: cfg.bits_per_symbol(),
                got: label.len(),
            });
        }
        bits.extend_from_slice(label);
    }
    Ok(BitFrame::new(bits))
}

pub(crate) fn check_cap(cfg: &SmSmxConfig, cap: u64) -> Result<()> {
    let eta = cfg.bits_per_frame();
    if eta >= 64 || (1u64 << eta) > cap {
        return Err(Error::CapExceeded { eta, cap });
    }
    Ok(())
}

/// Every frame with its encoding, in ascending frame order.
pub fn enumerate_codebook(
    cfg: &SmSmxConfig,
    c: &Constellation,
    cap: u64,
) -> Result<Vec<(BitFrame, TransmitVector)>> {
    cfg.check_constellation(c)?;
    check_cap(cfg, cap)?;
    let eta = cfg.bits_per_frame();
    (0..1u64 << eta)
        .map(|v| {
            let frame = BitFrame::from_u64(v, eta);
            encode(cfg, &frame, c).map(|x| (frame, x))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flagship() -> (SmSmxConfig, Constellation) {
        let cfg = SmSmxConfig::new(4, 2, 4, 4, Scheme::SmSmx).unwrap();
        let c = cfg.constellation();
        (cfg, c)
    }

    #[test]
    fn spectral_efficiency() {
        let (cfg, _) = flagship();
        assert_eq!(bits_per_frame(&cfg), 5);
        let sm = SmSmxConfig::new(4, 1, 4, 4, Scheme::PureSm).unwrap();
        assert_eq!(bits_per_frame(&sm), 4);
        let full = SmSmxConfig::new(4, 4, 4, 4, Scheme::SmSmx).unwrap();
        let smx = SmSmxConfig::new(4, 4, 4, 4, Scheme::PureSmx).unwrap();
        assert_eq!(bits_per_frame(&full), 8);
        assert_eq!(bits_per_frame(&smx), 8);
    }

    #[test]
    fn config_validation() {
        let err = |r: Result<SmSmxConfig>| match r {
            Err(Error::InvalidConfig(msg)) => msg,
            other => panic!("expected InvalidConfig, got {other:?}"),
        };
        assert_eq!(err(SmSmxConfig::new(4, 3, 4, 4, Scheme::SmSmx)), "K must divide N");
        assert_eq!(
            err(SmSmxConfig::new(6, 2, 4, 4, Scheme::SmSmx)),
            "N/K must be a power of two"
        );
        assert_eq!(err(SmSmxConfig::new(4, 2, 4, 4, Scheme::PureSm)), "pure_sm requires K = 1");
        assert_eq!(err(SmSmxConfig::new(4, 2, 4, 4, Scheme::PureSmx)), "pure_smx requires K = N");
        assert_eq!(err(SmSmxConfig::new(3, 1, 4, 4, Scheme::PureSm)), "N/K must be a power of two");
        assert_eq!(err(SmSmxConfig::new(4, 2, 4, 0, Scheme::SmSmx)), "Nr must be at least 1");
        assert_eq!(
            SmSmxConfig::new(4, 2, 8, 4, Scheme::SmSmx),
            Err(Error::UnsupportedOrder(8))
        );
        let cfg = SmSmxConfig::new(8, 2, 4, 8, Scheme::SmSmx).unwrap();
        assert_eq!(cfg.groups(), 4);
        assert_eq!(cfg.group_bits(), 2);
    }

    #[test]
    fn encode_all_zero_frame() {
        let (cfg, c) = flagship();
        let x = encode(&cfg, &"00000".parse().unwrap(), &c).unwrap();
        assert_eq!(x.group(), 0);
        let expected = c.map_bits(&[0, 0]).unwrap() * (1.0 / 2f64.sqrt());
        let dense = x.dense();
        assert_eq!(dense[0], expected);
        assert_eq!(dense[1], expected);
        assert_eq!(dense[2], Complex64::new(0.0, 0.0));
        assert_eq!(dense[3], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn leading_one_selects_second_group() {
        let (cfg, c) = flagship();
        for payload in 0..16u64 {
            let frame = BitFrame::from_u64(16 | payload, 5);
            let x = encode(&cfg, &frame, &c).unwrap();
            assert_eq!(x.active_antennas(), 2..4);
            let dense = x.dense();
            assert!(dense[0].norm() == 0.0 && dense[1].norm() == 0.0);
            assert!(dense[2].norm() > 0.0 && dense[3].norm() > 0.0);
        }
    }

    #[test]
    fn pure_sm_is_unscaled_single_antenna() {
        let cfg = SmSmxConfig::new(4, 1, 4, 4, Scheme::PureSm).unwrap();
        let c = cfg.constellation();
        let frame: BitFrame = "1001".parse().unwrap();
        let x = encode(&cfg, &frame, &c).unwrap();
        let dense = x.dense();
        assert_eq!(dense.iter().filter(|v| v.norm() > 0.0).count(), 1);
        assert_eq!(dense[2], c.map_bits(&[0, 1]).unwrap());
    }

    #[test]
    fn encode_rejects_wrong_length() {
        let (cfg, c) = flagship();
        assert_eq!(
            encode(&cfg, &"0000".parse().unwrap(), &c),
            Err(Error::LengthMismatch { expected: 5, got: 4 })
        );
    }

    #[test]
    fn decode_examples() {
        let (cfg, _) = flagship();
        let f = decode(&cfg, 0, &[vec![0, 0], vec![0, 0]]).unwrap();
        assert_eq!(f.to_string(), "00000");
        let f = decode(&cfg, 1, &[vec![1, 1], vec![1, 0]]).unwrap();
        assert_eq!(f.to_string(), "11110");
        assert_eq!(
            decode(&cfg, 2, &[vec![0, 0], vec![0, 0]]),
            Err(Error::GroupOutOfRange { group: 2, groups: 2 })
        );
        assert_eq!(
            decode(&cfg, 0, &[vec![0, 0, 0], vec![0, 0]]),
            Err(Error::LengthMismatch { expected: 2, got: 3 })
        );
    }

    #[test]
    fn codebook_roundtrip_and_shape() {
        let (cfg, c) = flagship();
        let book = enumerate_codebook(&cfg, &c, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(book.len(), 32);
        for (i, (frame, x)) in book.iter().enumerate() {
            assert_eq!(frame.to_u64(), Some(i as u64));
            let labels: Vec<Vec<u8>> = x.point_indices().iter().map(|&p| c.label_bits(p)).collect();
            assert_eq!(&decode(&cfg, x.group(), &labels).unwrap(), frame);
            assert_eq!(x.dense().iter().filter(|v| v.norm() > 0.0).count(), 2);
        }
        // pairwise distinctness
        for i in 0..book.len() {
            for j in i + 1..book.len() {
                assert_ne!(book[i].1.dense(), book[j].1.dense());
            }
        }
    }

    #[test]
    fn codebook_cap() {
        let (cfg, c) = flagship();
        assert_eq!(
            enumerate_codebook(&cfg, &c, 16),
            Err(Error::CapExceeded { eta: 5, cap: 16 })
        );
        assert!(enumerate_codebook(&cfg, &c, 32).is_ok());
    }

    #[test]
    fn codebook_power_is_unit_on_average() {
        for (n, k, m) in [(4, 2, 4), (8, 2, 16), (4, 4, 16), (8, 1, 64), (2, 1, 2)] {
            let cfg = SmSmxConfig::new(n, k, m, n, Scheme::SmSmx).unwrap();
            let c = cfg.constellation();
            let book = enumerate_codebook(&cfg, &c, DEFAULT_ENUMERATION_CAP).unwrap();
            let avg = book.iter().map(|(_, x)| x.energy()).sum::<f64>() / book.len() as f64;
            assert!((avg - 1.0).abs() < 1e-12, "({n},{k},{m}) avg {avg}");
        }
    }

    #[test]
    fn degenerate_schemes_share_codebooks() {
        let dense = |cfg: SmSmxConfig| {
            let c = cfg.constellation();
            enumerate_codebook(&cfg, &c, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .into_iter()
                .map(|(_, x)| x.dense())
                .collect::<Vec<_>>()
        };
        assert_eq!(
            dense(SmSmxConfig::new(4, 4, 4, 4, Scheme::SmSmx).unwrap()),
            dense(SmSmxConfig::new(4, 4, 4, 4, Scheme::PureSmx).unwrap())
        );
        assert_eq!(
            dense(SmSmxConfig::new(8, 1, 16, 4, Scheme::SmSmx).unwrap()),
            dense(SmSmxConfig::new(8, 1, 16, 4, Scheme::PureSm).unwrap())
        );
    }

    #[test]
    fn bitframe_parsing_and_integers() {
        let f: BitFrame = "10110".parse().unwrap();
        assert_eq!(f.to_u64(), Some(22));
        assert_eq!(BitFrame::from_u64(22, 5), f);
        assert!("10a".parse::<BitFrame>().is_err());
        assert_eq!(f.hamming_distance(&"00111".parse().unwrap()), 2);
    }
}
