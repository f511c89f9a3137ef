//! C ABI over `dsr-core`.
//!
//! Every entry point returns a [`DsrStatus`]; results go through out
//! pointers. On failure a message is kept per thread and can be read with
//! [`dsr_last_error_message`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use dsr_core::dct::{build_kernel, dct2d_rowcol, max_coefficient, DctCoefficients};
use dsr_core::metrics::{aggregate, psnr, FrameReport};
use dsr_core::rate::{next_state, srt_storage, ControllerParams, TileState};
use dsr_core::replay::{ReplayConfig, ReplaySession};
use dsr_core::{Color, Error, Frame, TILE_SIZE};

/// Result code of every call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DsrStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    Index = -3,
    Io = -4,
    Format = -5,
    BufferTooSmall = -6,
    Panic = -99,
}

/// Per-frame statistics of a replay step.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DsrFrameStats {
    pub frame_index: u64,
    pub mse: f64,
    /// `INFINITY` for an exact frame.
    pub psnr_db: f64,
    pub shader_invocations: u64,
    pub baseline_invocations: u64,
    /// Tiles per state, in encoding order.
    pub state_histogram: [u64; 5],
}

/// Totals over every frame pushed so far.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DsrSummary {
    pub frames: u64,
    pub mean_psnr_db: f64,
    pub invocation_ratio: f64,
    pub savings: f64,
    pub shader_invocations: u64,
    pub baseline_invocations: u64,
}

/// Opaque replay session.
pub struct DsrReplay {
    session: ReplaySession,
    width: usize,
    height: usize,
    tile_count: usize,
    reports: Vec<FrameReport>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(DsrStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidArgument(_) => DsrStatus::InvalidArgument,
            Error::Index { .. } => DsrStatus::Index,
            Error::Io { .. } => DsrStatus::Io,
            Error::Format { .. } => DsrStatus::Format,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DsrStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(DsrStatus::InvalidArgument, msg.into())
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DsrStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsrStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DsrStatus::Panic
        }
    }
}

fn params(t: f64, d: u32) -> Result<ControllerParams, Failure> {
    Ok(ControllerParams::new(t, d as usize)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dsr_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`, truncating
/// and always NUL-terminating when `len > 0`. Returns the full message
/// length including the terminator, or 0 if there is no message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dsr_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            return 0;
        };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n - 1) = 0;
        }
        bytes.len()
    })
}

/// Creates a replay session for `width × height` RGBA frames.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn dsr_replay_new(
    width: u32,
    height: u32,
    t: f64,
    d: u32,
    out: *mut *mut DsrReplay,
) -> DsrStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if width == 0 || height == 0 {
            return Err(invalid(format!(
                "frame size {width}x{height} must be positive"
            )));
        }
        let session = ReplaySession::new(ReplayConfig::new(params(t, d)?))?;
        let (w, h) = (width as usize, height as usize);
        let handle = DsrReplay {
            session,
            width: w,
            height: h,
            tile_count: w.div_ceil(TILE_SIZE) * h.div_ceil(TILE_SIZE),
            reports: Vec::new(),
        };
        *out = Box::into_raw(Box::new(handle));
        Ok(())
    })
}

/// Releases a session. Null is ignored.
///
/// # Safety
/// `handle` must be null or come from [`dsr_replay_new`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn dsr_replay_free(handle: *mut DsrReplay) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Replays one reference frame (`width * height * 4` RGBA bytes). The
/// simulated frame is written to `out_rgba` and statistics to `out_stats`;
/// both may be null.
///
/// # Safety
/// `handle` must be live; `rgba` must point to `len` readable bytes;
/// `out_rgba`, if not null, to `out_len` writable bytes; `out_stats`, if
/// not null, to one writable [`DsrFrameStats`].
#[no_mangle]
pub unsafe extern "C" fn dsr_replay_push_frame(
    handle: *mut DsrReplay,
    rgba: *const u8,
    len: usize,
    out_rgba: *mut u8,
    out_len: usize,
    out_stats: *mut DsrFrameStats,
) -> DsrStatus {
    guard(|| {
        let h = handle.as_mut().ok_or_else(|| null("handle"))?;
        if rgba.is_null() {
            return Err(null("rgba"));
        }
        let expected = h.width * h.height * 4;
        if len != expected {
            return Err(invalid(format!(
                "frame has {len} bytes, expected {expected}"
            )));
        }
        if !out_rgba.is_null() && out_len < expected {
            return Err(Failure(
                DsrStatus::BufferTooSmall,
                format!("output buffer has {out_len} bytes, needs {expected}"),
            ));
        }
        let src = std::slice::from_raw_parts(rgba, len);
        let pixels = src
            .chunks_exact(4)
            .map(|p| Color::new(p[0], p[1], p[2], p[3]))
            .collect();
        let frame = Frame::new(h.width, h.height, pixels)?;
        let step = h.session.step(&frame)?;
        if !out_rgba.is_null() {
            let dst = std::slice::from_raw_parts_mut(out_rgba, expected);
            for (d, p) in dst.chunks_exact_mut(4).zip(step.output.pixels()) {
                d.copy_from_slice(&[p.r, p.g, p.b, p.a]);
            }
        }
        if let Some(s) = out_stats.as_mut() {
            let r = &step.report;
            *s = DsrFrameStats {
                frame_index: r.frame_index as u64,
                mse: r.mse,
                psnr_db: r.psnr_db,
                shader_invocations: r.shader_invocations,
                baseline_invocations: r.baseline_invocations,
                state_histogram: r.rate_histogram.0,
            };
        }
        h.reports.push(step.report);
        Ok(())
    })
}

/// Number of 16×16 tiles per frame.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsr_replay_tile_count(
    handle: *const DsrReplay,
    out: *mut usize,
) -> DsrStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        *out.as_mut().ok_or_else(|| null("out"))? = h.tile_count;
        Ok(())
    })
}

/// Writes the 3-bit state code of every tile for the next frame, one byte
/// per tile, row-major.
///
/// # Safety
/// `handle` must be live; `out` must point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn dsr_replay_tile_states(
    handle: *const DsrReplay,
    out: *mut u8,
    len: usize,
) -> DsrStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if len < h.tile_count {
            return Err(Failure(
                DsrStatus::BufferTooSmall,
                format!("buffer holds {len} states, needs {}", h.tile_count),
            ));
        }
        let dst = std::slice::from_raw_parts_mut(out, h.tile_count);
        let table = h.session.table();
        for (i, d) in dst.iter_mut().enumerate() {
            // Before the first frame every tile is at full rate.
            *d = if table.tile_count() == 0 {
                TileState::Full.encode()
            } else {
                table.state(i).encode()
            };
        }
        Ok(())
    })
}

/// Totals over the frames pushed so far.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn dsr_replay_summary(
    handle: *const DsrReplay,
    out: *mut DsrSummary,
) -> DsrStatus {
    guard(|| {
        let h = handle.as_ref().ok_or_else(|| null("handle"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = aggregate(h.reports.clone())?.summary;
        *out = DsrSummary {
            frames: h.reports.len() as u64,
            mean_psnr_db: s.mean_psnr_db,
            invocation_ratio: s.invocation_ratio,
            savings: s.savings,
            shader_invocations: s.shader_invocations,
            baseline_invocations: s.baseline_invocations,
        };
        Ok(())
    })
}

/// 2D DCT of a row-major 16×16 block. `input` and `output` hold 256
/// values each and may not overlap.
///
/// # Safety
/// Both pointers must reference 256 valid `double`s.
#[no_mangle]
pub unsafe extern "C" fn dsr_dct2d(input: *const f64, output: *mut f64) -> DsrStatus {
    guard(|| {
        if input.is_null() {
            return Err(null("input"));
        }
        if output.is_null() {
            return Err(null("output"));
        }
        let x = std::slice::from_raw_parts(input, TILE_SIZE * TILE_SIZE);
        let kernel = build_kernel(TILE_SIZE)?;
        let (c, _) = dct2d_rowcol(x, &kernel)?;
        ptr::copy_nonoverlapping(c.as_slice().as_ptr(), output, TILE_SIZE * TILE_SIZE);
        Ok(())
    })
}

/// Largest |coefficient| of a 16×16 spectrum outside its `d` lowest
/// anti-diagonals.
///
/// # Safety
/// `coeffs` must reference 256 valid `double`s and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn dsr_max_coefficient(
    coeffs: *const f64,
    d: u32,
    out: *mut f64,
) -> DsrStatus {
    guard(|| {
        if coeffs.is_null() {
            return Err(null("coeffs"));
        }
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let c = std::slice::from_raw_parts(coeffs, TILE_SIZE * TILE_SIZE).to_vec();
        *out = max_coefficient(&DctCoefficients::from_vec(TILE_SIZE, c)?, d as usize)?;
        Ok(())
    })
}

/// One controller transition on 3-bit state codes.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dsr_next_state(
    state: u8,
    max_c: f64,
    t: f64,
    d: u32,
    out: *mut u8,
) -> DsrStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = TileState::decode(state)?;
        *out = next_state(s, max_c, &params(t, d)?).encode();
        Ok(())
    })
}

/// Bits needed to store the rate table for `tile_count` tiles.
#[no_mangle]
pub extern "C" fn dsr_srt_storage_bits(tile_count: u64) -> u64 {
    srt_storage(tile_count as usize).bits
}

/// PSNR in dB of an 8-bit MSE; `INFINITY` for zero.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dsr_psnr(mse: f64, out: *mut f64) -> DsrStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = psnr(mse)?;
        Ok(())
    })
}
