//! Run configuration files, CSV output and codebook tables.
//!
//! Configuration files are line based:
//!
//! ```text
//! # flagship configuration
//! n = 4
//! k = 2
//! m = 4
//! nr = 4
//! scheme = sm_smx          # sm_smx | pure_sm | pure_smx
//! detector = ml            # ml | two_stage | sm_mrrc
//! snr = 0:2:20             # start:step:stop in dB, or a single value / inf
//! seed = 42
//! max_frames = 100000
//! target_bit_errors = 200  # 0 disables early stopping
//! out = results.csv
//! ```
//!
//! `n` and `k` are required. Defaults: `m = 4`, `nr = n`, `scheme = sm_smx`,
//! `detector = ml`, `snr = 0:2:20`, `seed = 0`, `max_frames = 100000`,
//! `target_bit_errors = 200`, output to stdout.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;

use crate::channel::ebn0_db;
use crate::codec::{enumerate_codebook, Scheme, SmSmxConfig};
use crate::constellation::Constellation;
use crate::detection::Detector;
use crate::error::{Error, Result};
use crate::montecarlo::{
    ErrorRecord, SimPoint, DEFAULT_MAX_FRAMES, DEFAULT_TARGET_BIT_ERRORS,
};

pub const CSV_HEADER: &str =
    "scheme,detector,n,k,m,nr,eta,snr_db,ebn0_db,frames,bit_errors,ber,group_errors,fer,seed";

const KEYS: [&str; 11] = [
    "n",
    "k",
    "m",
    "nr",
    "scheme",
    "detector",
    "snr",
    "seed",
    "max_frames",
    "target_bit_errors",
    "out",
];

/// SNR grid in dB: `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SnrGrid {
    pub fn single(snr_db: f64) -> Self {
        SnrGrid {
            start: snr_db,
            stop: snr_db,
            step: 1.0,
        }
    }

    /// Parses `start:step:stop` or a single value (`inf` allowed).
    pub fn parse(text: &str) -> Result<Self> {
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidConfig(format!("invalid number '{}' in SNR grid", s.trim())))
        };
        let parts: Vec<&str> = text.split(':').collect();
        let grid = match parts.as_slice() {
            [single] => SnrGrid::single(num(single)?),
            [start, step, stop] => SnrGrid {
                start: num(start)?,
                step: num(step)?,
                stop: num(stop)?,
            },
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "SNR grid '{text}' must be start:step:stop or a single value"
                )))
            }
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if self.start.is_nan() || self.stop.is_nan() || self.step.is_nan() {
            return invalid("SNR values must be numbers");
        }
        if self.step <= 0.0 || !self.step.is_finite() {
            return invalid("SNR step must be positive");
        }
        if self.start > self.stop {
            return invalid("SNR start must not exceed stop");
        }
        if self.start == f64::NEG_INFINITY {
            return invalid("SNR must not be -inf");
        }
        if self.start != self.stop && !(self.start.is_finite() && self.stop.is_finite()) {
            return invalid("an infinite SNR must be given as a single value");
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        if self.start == self.stop {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }

    pub fn render(&self) -> String {
        if self.start == self.stop && self.step == 1.0 {
            format!("{}", self.start)
        } else {
            format!("{}:{}:{}", self.start, self.step, self.stop)
        }
    }
}

/// A fully validated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub config: SmSmxConfig,
    pub detector: Detector,
    pub snr: SnrGrid,
    pub max_frames: u64,
    pub target_bit_errors: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunSpec {
    /// One simulation point per SNR grid value.
    pub fn points(&self) -> Vec<SimPoint> {
        self.snr
            .points()
            .into_iter()
            .map(|snr| {
                SimPoint::new(self.config, self.detector, snr, self.seed)
                    .with_frames(self.max_frames, self.target_bit_errors)
            })
            .collect()
    }

    /// Renders the spec in the configuration file format.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut s = format!(
            "n = {}\nk = {}\nm = {}\nnr = {}\nscheme = {}\ndetector = {}\nsnr = {}\nseed = {}\nmax_frames = {}\ntarget_bit_errors = {}\n",
            c.n(),
            c.k(),
            c.m(),
            c.nr(),
            c.scheme(),
            self.detector,
            self.snr.render(),
            self.seed,
            self.max_frames,
            self.target_bit_errors,
        );
        if let Some(out) = &self.out {
            s.push_str(&format!("out = {}\n", out.display()));
        }
        s
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub snr: Option<String>,
    pub detector: Option<Detector>,
}

pub fn parse_config(text: &str) -> Result<RunSpec> {
    parse_config_with_overrides(text, &Overrides::default())
}

pub fn parse_config_with_overrides(text: &str, overrides: &Overrides) -> Result<RunSpec> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected 'key = value', found '{line}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line: line_no,
                message: format!("unknown key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("missing value for '{key}'"),
            });
        }
        if entries.insert(key, (line_no, value)).is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("duplicate key '{key}'"),
            });
        }
    }

    fn field<T: std::str::FromStr>(
        entries: &HashMap<&str, (usize, &str)>,
        key: &str,
    ) -> Result<Option<T>> {
        match entries.get(key) {
            None => Ok(None),
            Some(&(line, value)) => value.parse().map(Some).map_err(|_| Error::Parse {
                line,
                message: format!("invalid value '{value}' for '{key}'"),
            }),
        }
    }
    let required = |key: &str| -> Result<usize> {
        field(&entries, key)?
            .ok_or_else(|| Error::InvalidConfig(format!("missing required key '{key}'")))
    };

    let n = required("n")?;
    let k = required("k")?;
    let m: u32 = field(&entries, "m")?.unwrap_or(4);
    let nr: usize = field(&entries, "nr")?.unwrap_or(n);
    let scheme = match entries.get("scheme") {
        Some(&(line, v)) => v.parse::<Scheme>().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?,
        None => Scheme::SmSmx,
    };
    let detector = match (overrides.detector, entries.get("detector")) {
        (Some(d), _) => d,
        (None, Some(&(line, v))) => v.parse::<Detector>().map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?,
        (None, None) => Detector::Ml,
    };
    let snr = match (&overrides.snr, entries.get("snr")) {
        (Some(s), _) => SnrGrid::parse(s)?,
        (None, Some(&(line, v))) => SnrGrid::parse(v).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?,
        (None, None) => SnrGrid {
            start: 0.0,
            step: 2.0,
            stop: 20.0,
        },
    };
    let seed = match overrides.seed {
        Some(s) => s,
        None => field(&entries, "seed")?.unwrap_or(0),
    };
    let max_frames: u64 = field(&entries, "max_frames")?.unwrap_or(DEFAULT_MAX_FRAMES);
    let target_bit_errors: u64 =
        field(&entries, "target_bit_errors")?.unwrap_or(DEFAULT_TARGET_BIT_ERRORS);
    let out = overrides
        .out
        .clone()
        .or_else(|| entries.get("out").map(|&(_, v)| PathBuf::from(v)));

    let config = SmSmxConfig::new(n, k, m, nr, scheme)?;
    if max_frames == 0 {
        return Err(Error::InvalidConfig("max_frames must be at least 1".into()));
    }
    detector.check_compatible(&config)?;

    Ok(RunSpec {
        config,
        detector,
        snr,
        max_frames,
        target_bit_errors,
        seed,
        out,
    })
}

/// Formats like C's `%.{precision}g`.
pub fn format_sig(x: f64, precision: usize) -> String {
    let precision = precision.max(1);
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", precision - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= precision as i32 {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (precision as i32 - 1 - exp).max(0) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn g6(x: f64) -> String {
    format_sig(x, 6)
}

/// Writes the CSV header and one row per `(point, record)`.
pub fn emit_csv<W: Write>(rows: &[(SimPoint, ErrorRecord)], out: &mut W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for (p, r) in rows {
        let c = &p.cfg;
        let eta = c.bits_per_frame();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            c.scheme(),
            p.detector,
            c.n(),
            c.k(),
            c.m(),
            c.nr(),
            eta,
            g6(p.snr_db),
            g6(ebn0_db(p.snr_db, eta)),
            r.frames,
            r.bit_errors,
            g6(r.ber),
            r.group_errors,
            g6(r.fer),
            p.master_seed,
        )?;
    }
    Ok(())
}

fn format_complex(z: num_complex::Complex64) -> String {
    format!("{:.4}{:+.4}j", z.re, z.im)
}

/// Writes a `frame | group | antennas | symbols` table of the whole codebook.
pub fn dump_mapping_table<W: Write>(
    cfg: &SmSmxConfig,
    c: &Constellation,
    out: &mut W,
    cap: u64,
) -> Result<()> {
    let book = enumerate_codebook(cfg, c, cap)?;
    writeln!(out, "frame | group | antennas | symbols")?;
    for (frame, x) in &book {
        let antennas: Vec<String> = x.active_antennas().map(|a| a.to_string()).collect();
        let symbols: Vec<String> = x.symbols().iter().map(|&s| format_complex(s)).collect();
        writeln!(
            out,
            "{frame} | {} | {} | {}",
            x.group(),
            antennas.join(","),
            symbols.join(" ")
        )?;
    }
    Ok(())
}
