//! C ABI for the smsmx link simulator.
//!
//! Objects cross the boundary as opaque handles (`SmsmxLink`, `SmsmxRunSpec`)
//! that must be released with their `_free` function. Every fallible call
//! returns an `SmsmxStatus`; on failure a description is available from
//! `smsmx_last_error_message` on the same thread until the next failing call.
//!
//! Bits are passed as one byte per bit (0 or 1), most significant first.
//! Channel matrices are `Nr x N`, row-major. Schemes and detectors are the
//! `SMSMX_SCHEME_*` and `SMSMX_DETECTOR_*` constants.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use num_complex::Complex64;
use smsmx::cli::{self, RunSpec};
use smsmx::{
    detect, encode, BitFrame, ChannelRealization, Constellation, Detector, Error, Scheme,
    SimPoint, SmSmxConfig,
};

pub const SMSMX_SCHEME_SM_SMX: u32 = 0;
pub const SMSMX_SCHEME_PURE_SM: u32 = 1;
pub const SMSMX_SCHEME_PURE_SMX: u32 = 2;

pub const SMSMX_DETECTOR_ML: u32 = 0;
pub const SMSMX_DETECTOR_TWO_STAGE: u32 = 1;
pub const SMSMX_DETECTOR_SM_MRRC: u32 = 2;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmsmxStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidConfig = 3,
    UnsupportedOrder = 4,
    LengthMismatch = 5,
    GroupOutOfRange = 6,
    CapExceeded = 7,
    DimensionMismatch = 8,
    RankDeficient = 9,
    SchemeMismatch = 10,
    Parse = 11,
    Io = 12,
    Panic = 13,
}

impl From<&Error> for SmsmxStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::UnsupportedOrder(_) => SmsmxStatus::UnsupportedOrder,
            Error::LengthMismatch { .. } => SmsmxStatus::LengthMismatch,
            Error::InvalidConfig(_) => SmsmxStatus::InvalidConfig,
            Error::GroupOutOfRange { .. } => SmsmxStatus::GroupOutOfRange,
            Error::CapExceeded { .. } => SmsmxStatus::CapExceeded,
            Error::DimensionMismatch(_) => SmsmxStatus::DimensionMismatch,
            Error::RankDeficient { .. } => SmsmxStatus::RankDeficient,
            Error::SchemeMismatch { .. } => SmsmxStatus::SchemeMismatch,
            Error::Parse { .. } => SmsmxStatus::Parse,
            Error::Io(_) => SmsmxStatus::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmsmxComplex {
    pub re: f64,
    pub im: f64,
}

impl From<SmsmxComplex> for Complex64 {
    fn from(c: SmsmxComplex) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for SmsmxComplex {
    fn from(c: Complex64) -> Self {
        SmsmxComplex { re: c.re, im: c.im }
    }
}

/// Statistics of one simulated SNR point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SmsmxErrorRecord {
    pub frames: u64,
    pub bit_errors: u64,
    pub frame_errors: u64,
    pub group_errors: u64,
    pub symbol_errors: u64,
    pub eta: u32,
    pub ber: f64,
    pub fer: f64,
    pub elapsed_seconds: f64,
}

/// Opaque scheme configuration plus its constellation.
pub struct SmsmxLink {
    cfg: SmSmxConfig,
    constellation: Constellation,
}

/// Opaque parsed run configuration.
pub struct SmsmxRunSpec {
    spec: RunSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SmsmxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(SmsmxStatus::from(&e), e.to_string())
    }
}

fn fail<T>(status: SmsmxStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SmsmxStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SmsmxStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            SmsmxStatus::Panic
        }
    }
}

fn scheme_from(code: u32) -> Result<Scheme, Failure> {
    match code {
        SMSMX_SCHEME_SM_SMX => Ok(Scheme::SmSmx),
        SMSMX_SCHEME_PURE_SM => Ok(Scheme::PureSm),
        SMSMX_SCHEME_PURE_SMX => Ok(Scheme::PureSmx),
        other => fail(SmsmxStatus::InvalidArgument, format!("unknown scheme code {other}")),
    }
}

fn detector_from(code: u32) -> Result<Detector, Failure> {
    match code {
        SMSMX_DETECTOR_ML => Ok(Detector::Ml),
        SMSMX_DETECTOR_TWO_STAGE => Ok(Detector::TwoStage),
        SMSMX_DETECTOR_SM_MRRC => Ok(Detector::SmMrrc),
        other => fail(SmsmxStatus::InvalidArgument, format!("unknown detector code {other}")),
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure(SmsmxStatus::NullPointer, format!("{what} is null")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return fail(SmsmxStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, what: &str) -> Result<&'a mut [T], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return fail(SmsmxStatus::NullPointer, format!("{what} is null"));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn check_len(what: &str, expected: usize, got: usize) -> Result<(), Failure> {
    if expected != got {
        return fail(
            SmsmxStatus::LengthMismatch,
            format!("{what}: expected {expected} entries, got {got}"),
        );
    }
    Ok(())
}

/// Message of the last failing call on this thread, or NULL if none.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn smsmx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn smsmx_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a link handle for `n` transmit antennas, `k` RF chains, `m`-QAM
/// and `nr` receive antennas.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_new(
    n: u32,
    k: u32,
    m: u32,
    nr: u32,
    scheme: u32,
    out: *mut *mut SmsmxLink,
) -> SmsmxStatus {
    guard(|| {
        if out.is_null() {
            return fail(SmsmxStatus::NullPointer, "out is null");
        }
        let cfg = SmSmxConfig::new(n as usize, k as usize, m, nr as usize, scheme_from(scheme)?)?;
        let link = SmsmxLink {
            cfg,
            constellation: cfg.constellation(),
        };
        *out = Box::into_raw(Box::new(link));
        Ok(())
    })
}

/// Releases a link handle. NULL is ignored.
///
/// # Safety
/// `link` must come from `smsmx_link_new` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_free(link: *mut SmsmxLink) {
    if !link.is_null() {
        drop(Box::from_raw(link));
    }
}

/// Bits per channel use, or 0 for a NULL handle.
///
/// # Safety
/// `link` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_bits_per_frame(link: *const SmsmxLink) -> u32 {
    link.as_ref().map_or(0, |l| l.cfg.bits_per_frame() as u32)
}

/// Active antennas (RF chains) per channel use, or 0 for a NULL handle.
///
/// # Safety
/// `link` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_rf_chains(link: *const SmsmxLink) -> u32 {
    link.as_ref().map_or(0, |l| l.cfg.k() as u32)
}

/// Transmit antenna count, or 0 for a NULL handle.
///
/// # Safety
/// `link` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_tx_antennas(link: *const SmsmxLink) -> u32 {
    link.as_ref().map_or(0, |l| l.cfg.n() as u32)
}

/// Receive antenna count, or 0 for a NULL handle.
///
/// # Safety
/// `link` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_rx_antennas(link: *const SmsmxLink) -> u32 {
    link.as_ref().map_or(0, |l| l.cfg.nr() as u32)
}

/// Encodes one frame of `bits_len` bits into a dense transmit vector of
/// `out_len` (= N) entries.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_encode(
    link: *const SmsmxLink,
    bits: *const u8,
    bits_len: usize,
    out: *mut SmsmxComplex,
    out_len: usize,
) -> SmsmxStatus {
    guard(|| {
        let link = deref(link, "link")?;
        let bits = slice(bits, bits_len, "bits")?;
        let out = slice_mut(out, out_len, "out")?;
        check_len("out", link.cfg.n(), out_len)?;
        let x = encode(&link.cfg, &BitFrame::new(bits.to_vec()), &link.constellation)?;
        for (slot, v) in out.iter_mut().zip(x.dense()) {
            *slot = v.into();
        }
        Ok(())
    })
}

/// Detects one frame from the received vector `y` (Nr entries) and channel
/// `h` (Nr x N, row-major). Writes the frame bits, the group index and the
/// residual metric; `out_group` and `out_metric` may be NULL.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn smsmx_link_detect(
    link: *const SmsmxLink,
    detector: u32,
    y: *const SmsmxComplex,
    y_len: usize,
    h: *const SmsmxComplex,
    h_len: usize,
    out_bits: *mut u8,
    bits_len: usize,
    out_group: *mut u32,
    out_metric: *mut f64,
) -> SmsmxStatus {
    guard(|| {
        let link = deref(link, "link")?;
        let detector = detector_from(detector)?;
        let (nr, n) = (link.cfg.nr(), link.cfg.n());
        check_len("y", nr, y_len)?;
        check_len("h", nr * n, h_len)?;
        check_len("out_bits", link.cfg.bits_per_frame(), bits_len)?;
        let y: Vec<Complex64> = slice(y, y_len, "y")?.iter().map(|&v| v.into()).collect();
        let h: Vec<Complex64> = slice(h, h_len, "h")?.iter().map(|&v| v.into()).collect();
        let out_bits = slice_mut(out_bits, bits_len, "out_bits")?;
        let h = ChannelRealization::from_row_slice(nr, n, &h)?;
        let r = detect(detector, &y, &h, &link.cfg, &link.constellation)?;
        out_bits.copy_from_slice(r.frame.bits());
        if !out_group.is_null() {
            *out_group = r.group as u32;
        }
        if !out_metric.is_null() {
            *out_metric = r.metric;
        }
        Ok(())
    })
}

/// Simulates one SNR point over Rayleigh fading. `snr_db` may be +INFINITY
/// for the noiseless mode; `target_bit_errors = 0` disables early stopping.
///
/// # Safety
/// `link` must be a live handle and `out` valid for one record.
#[no_mangle]
pub unsafe extern "C" fn smsmx_simulate_point(
    link: *const SmsmxLink,
    detector: u32,
    snr_db: f64,
    master_seed: u64,
    max_frames: u64,
    target_bit_errors: u64,
    out: *mut SmsmxErrorRecord,
) -> SmsmxStatus {
    guard(|| {
        let link = deref(link, "link")?;
        if out.is_null() {
            return fail(SmsmxStatus::NullPointer, "out is null");
        }
        let point = SimPoint::new(link.cfg, detector_from(detector)?, snr_db, master_seed)
            .with_frames(max_frames, target_bit_errors);
        let r = smsmx::run_point(&point)?;
        *out = SmsmxErrorRecord {
            frames: r.frames,
            bit_errors: r.bit_errors,
            frame_errors: r.frame_errors,
            group_errors: r.group_errors,
            symbol_errors: r.symbol_errors,
            eta: r.eta as u32,
            ber: r.ber,
            fer: r.fer,
            elapsed_seconds: r.elapsed_seconds,
        };
        Ok(())
    })
}

/// Parses and validates a configuration document.
///
/// # Safety
/// `text` must be a NUL-terminated UTF-8 string; `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_run_spec_parse(
    text: *const c_char,
    out: *mut *mut SmsmxRunSpec,
) -> SmsmxStatus {
    guard(|| {
        if text.is_null() || out.is_null() {
            return fail(SmsmxStatus::NullPointer, "text or out is null");
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .or_else(|_| fail(SmsmxStatus::InvalidArgument, "config text is not UTF-8"))?;
        let spec = cli::parse_config(text)?;
        *out = Box::into_raw(Box::new(SmsmxRunSpec { spec }));
        Ok(())
    })
}

/// Releases a run spec handle. NULL is ignored.
///
/// # Safety
/// `spec` must come from `smsmx_run_spec_parse` and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn smsmx_run_spec_free(spec: *mut SmsmxRunSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// Number of SNR points in the spec's grid, or 0 for NULL.
///
/// # Safety
/// `spec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_run_spec_num_points(spec: *const SmsmxRunSpec) -> usize {
    spec.as_ref().map_or(0, |s| s.spec.snr.points().len())
}

/// Creates a link handle matching the spec's scheme parameters.
///
/// # Safety
/// `spec` must be a live handle; `out` valid for one handle.
#[no_mangle]
pub unsafe extern "C" fn smsmx_run_spec_link(
    spec: *const SmsmxRunSpec,
    out: *mut *mut SmsmxLink,
) -> SmsmxStatus {
    guard(|| {
        let spec = deref(spec, "spec")?;
        if out.is_null() {
            return fail(SmsmxStatus::NullPointer, "out is null");
        }
        let cfg = spec.spec.config;
        *out = Box::into_raw(Box::new(SmsmxLink {
            cfg,
            constellation: cfg.constellation(),
        }));
        Ok(())
    })
}

/// Runs the full sweep and writes the CSV to `path`. Rows of points that
/// completed before a failure are still written.
///
/// # Safety
/// `spec` must be a live handle; `path` a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn smsmx_run_spec_write_csv(
    spec: *const SmsmxRunSpec,
    path: *const c_char,
) -> SmsmxStatus {
    guard(|| {
        let spec = &deref(spec, "spec")?.spec;
        if path.is_null() {
            return fail(SmsmxStatus::NullPointer, "path is null");
        }
        let path = PathBuf::from(
            CStr::from_ptr(path)
                .to_str()
                .or_else(|_| fail(SmsmxStatus::InvalidArgument, "path is not UTF-8"))?,
        );
        let points = spec.points();
        let (records, failure) = match smsmx::run_sweep(&points) {
            Ok(r) => (r, None),
            Err(e) => (e.completed, Some(e.source)),
        };
        let rows: Vec<_> = points.into_iter().zip(records).collect();
        let mut file = std::fs::File::create(&path).map_err(Error::from)?;
        cli::emit_csv(&rows, &mut file)?;
        match failure {
            Some(e) => Err(e.into()),
            None => Ok(()),
        }
    })
}
