//! C ABI over `ris-core`.
//!
//! Every fallible function returns a [`RisStatus`]; on failure a
//! description is kept per thread and can be copied out with
//! [`ris_last_error_message`]. Objects are opaque handles created by
//! `*_new`/`*_from_*` functions and released with the matching `*_free`.
//! Strings passed in are NUL-terminated UTF-8. Output strings are copied
//! into caller buffers, NUL included; when the buffer is too short the call
//! fails with `RIS_STATUS_BUFFER_TOO_SMALL` and `needed` reports the size.
//!
//! Panics never cross the boundary; they surface as `RIS_STATUS_PANIC`.
//!
//! # Safety
//!
//! Pointer arguments are checked for null and otherwise trusted: handles
//! must come from this library and not be used after `*_free`, buffers must
//! hold the stated number of bytes, and a handle must not be used from two
//! threads at once.

#![allow(clippy::not_unsafe_ptr_arg_deref)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use ris_core::protocol::frame::encode_frame;
use ris_core::protocol::{crc8, Emulator, VirtualChannel};
use ris_core::solver::{channel_gain, Scene};
use ris_core::surface::{ideal_phase_profile, quantize_1bit};
use ris_core::{
    ElementResponse, IdealResponse, Pattern, ReflectionModel, StateTag, SurfaceGeometry, Vec3,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RisStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    OutOfRange = 4,
    BufferTooSmall = 5,
    Solver = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisGeometry {
    pub nx: u32,
    pub ny: u32,
    pub pitch_x_mm: f64,
    pub pitch_y_mm: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RisWorstCase {
    pub off_db: f64,
    pub off_freq_ghz: f64,
    pub on_db: f64,
    pub on_freq_ghz: f64,
    pub phase_difference_deg: f64,
    pub phase_difference_freq_ghz: f64,
}

/// Measured element response.
pub struct RisResponse(ElementResponse);

/// Binary pattern with its geometry.
pub struct RisPattern {
    geometry: SurfaceGeometry,
    pattern: Pattern,
}

/// Device emulator with a queue of encoded responses.
pub struct RisEmulator {
    emulator: Emulator,
    output: Vec<u8>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RisStatus, String);

impl Failure {
    fn new(status: RisStatus, msg: impl Into<String>) -> Self {
        Self(status, msg.into())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RisStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            RisStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RisStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass pointers obtained from this library or valid
    // caller-owned storage; null is rejected here.
    unsafe { p.as_ref() }
        .ok_or_else(|| Failure::new(RisStatus::NullPointer, format!("{name} is null")))
}

fn non_null_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as in `non_null`, with exclusive access promised by the caller.
    unsafe { p.as_mut() }
        .ok_or_else(|| Failure::new(RisStatus::NullPointer, format!("{name} is null")))
}

fn c_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            RisStatus::NullPointer,
            format!("{name} is null"),
        ));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Failure::new(RisStatus::Parse, format!("{name} is not UTF-8")))
}

fn bytes<'a>(p: *const u8, len: usize, name: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(
            RisStatus::NullPointer,
            format!("{name} is null"),
        ));
    }
    // SAFETY: caller guarantees `len` readable bytes at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn geometry(g: RisGeometry) -> Result<SurfaceGeometry, Failure> {
    SurfaceGeometry::new(g.nx as usize, g.ny as usize, g.pitch_x_mm, g.pitch_y_mm)
        .map_err(|e| Failure::new(RisStatus::InvalidArgument, e.to_string()))
}

fn vec3(p: *const f64, name: &str) -> Result<Vec3, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            RisStatus::NullPointer,
            format!("{name} is null"),
        ));
    }
    // SAFETY: caller passes three doubles.
    let v = unsafe { std::slice::from_raw_parts(p, 3) };
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn state(on: bool) -> StateTag {
    StateTag::from_bit(on)
}

fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    let slot = non_null_mut(out, name)?;
    *slot = value;
    Ok(())
}

fn copy_out(src: &[u8], buf: *mut u8, cap: usize, needed: *mut usize) -> Result<(), Failure> {
    if !needed.is_null() {
        // SAFETY: non-null caller-provided slot.
        unsafe { *needed = src.len() };
    }
    if cap < src.len() {
        return Err(Failure::new(
            RisStatus::BufferTooSmall,
            format!("buffer holds {cap} bytes, {} needed", src.len()),
        ));
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(Failure::new(RisStatus::NullPointer, "buffer is null"));
    }
    // SAFETY: `buf` has room for `cap >= src.len()` bytes.
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len()) };
    Ok(())
}

fn copy_str(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Failure> {
    let mut v = s.as_bytes().to_vec();
    v.push(0);
    copy_out(&v, buf.cast(), cap, needed)
}

fn invalid(e: impl std::fmt::Display) -> Failure {
    Failure::new(RisStatus::InvalidArgument, e.to_string())
}

fn out_of_range(e: impl std::fmt::Display) -> Failure {
    Failure::new(RisStatus::OutOfRange, e.to_string())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ris_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy the calling thread's last error message; empty after a successful
/// call. Pass `cap == 0` to learn the size through `needed`.
#[no_mangle]
pub extern "C" fn ris_last_error_message(
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> RisStatus {
    let msg = LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map(|c| c.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    match catch_unwind(AssertUnwindSafe(|| copy_str(&msg, buf, cap, needed))) {
        Ok(Ok(())) => RisStatus::Ok,
        Ok(Err(Failure(status, _))) => status,
        Err(_) => RisStatus::Panic,
    }
}

/// The 16 x 16, 20 mm x 13 mm prototype lattice.
#[no_mangle]
pub extern "C" fn ris_geometry_default() -> RisGeometry {
    RisGeometry {
        nx: 16,
        ny: 16,
        pitch_x_mm: 20.0,
        pitch_y_mm: 13.0,
    }
}

#[no_mangle]
pub extern "C" fn ris_response_anchored(out: *mut *mut RisResponse) -> RisStatus {
    guard(|| {
        non_null_mut(out, "out")?;
        write_out(
            out,
            Box::into_raw(Box::new(RisResponse(ElementResponse::anchored()))),
            "out",
        )
    })
}

/// Parse CSV text. `warnings` (nullable) receives the number of stated
/// phase differences that disagree with the recomputed ones.
#[no_mangle]
pub extern "C" fn ris_response_from_csv(
    text: *const c_char,
    out: *mut *mut RisResponse,
    warnings: *mut u32,
) -> RisStatus {
    guard(|| {
        let text = c_str(text, "text")?;
        non_null_mut(out, "out")?;
        let ingested = ElementResponse::from_csv(text)
            .map_err(|e| Failure::new(RisStatus::Parse, e.to_string()))?;
        if !warnings.is_null() {
            // SAFETY: non-null caller slot.
            unsafe { *warnings = ingested.warnings.len() as u32 };
        }
        write_out(
            out,
            Box::into_raw(Box::new(RisResponse(ingested.response))),
            "out",
        )
    })
}

#[no_mangle]
pub extern "C" fn ris_response_free(response: *mut RisResponse) {
    if !response.is_null() {
        // SAFETY: handle created by this library and not yet freed.
        drop(unsafe { Box::from_raw(response) });
    }
}

#[no_mangle]
pub extern "C" fn ris_response_gamma(
    response: *const RisResponse,
    freq_ghz: f64,
    on: bool,
    out: *mut RisComplex,
) -> RisStatus {
    guard(|| {
        let r = non_null(response, "response")?;
        let g = r.0.gamma(freq_ghz, state(on)).map_err(out_of_range)?;
        write_out(out, RisComplex { re: g.re, im: g.im }, "out")
    })
}

/// Wrapped OFF/ON phase difference in [0, 180] degrees.
#[no_mangle]
pub extern "C" fn ris_response_phase_difference(
    response: *const RisResponse,
    freq_ghz: f64,
    out: *mut f64,
) -> RisStatus {
    guard(|| {
        let r = non_null(response, "response")?;
        let d = r.0.phase_difference(freq_ghz).map_err(out_of_range)?;
        write_out(out, d, "out")
    })
}

#[no_mangle]
pub extern "C" fn ris_response_worst_case(
    response: *const RisResponse,
    lo_ghz: f64,
    hi_ghz: f64,
    out: *mut RisWorstCase,
) -> RisStatus {
    guard(|| {
        let r = non_null(response, "response")?;
        let wc = r.0.worst_case(lo_ghz, hi_ghz).map_err(out_of_range)?;
        write_out(
            out,
            RisWorstCase {
                off_db: wc.off_db.value,
                off_freq_ghz: wc.off_db.freq_ghz,
                on_db: wc.on_db.value,
                on_freq_ghz: wc.on_db.freq_ghz,
                phase_difference_deg: wc.phase_difference_deg.value,
                phase_difference_freq_ghz: wc.phase_difference_deg.freq_ghz,
            },
            "out",
        )
    })
}

fn new_pattern(
    geometry: SurfaceGeometry,
    pattern: Pattern,
    out: *mut *mut RisPattern,
) -> Result<(), Failure> {
    write_out(
        out,
        Box::into_raw(Box::new(RisPattern { geometry, pattern })),
        "out",
    )
}

/// All-OFF pattern.
#[no_mangle]
pub extern "C" fn ris_pattern_new(geom: RisGeometry, out: *mut *mut RisPattern) -> RisStatus {
    guard(|| {
        non_null_mut(out, "out")?;
        let g = geometry(geom)?;
        let p = Pattern::uniform(&g, StateTag::Off);
        new_pattern(g, p, out)
    })
}

#[no_mangle]
pub extern "C" fn ris_pattern_from_hex(
    geom: RisGeometry,
    hex: *const c_char,
    out: *mut *mut RisPattern,
) -> RisStatus {
    guard(|| {
        non_null_mut(out, "out")?;
        let g = geometry(geom)?;
        let p = Pattern::from_hex(c_str(hex, "hex")?, &g)
            .map_err(|e| Failure::new(RisStatus::Parse, e.to_string()))?;
        new_pattern(g, p, out)
    })
}

#[no_mangle]
pub extern "C" fn ris_pattern_free(pattern: *mut RisPattern) {
    if !pattern.is_null() {
        // SAFETY: handle created by this library and not yet freed.
        drop(unsafe { Box::from_raw(pattern) });
    }
}

#[no_mangle]
pub extern "C" fn ris_pattern_len(pattern: *const RisPattern) -> usize {
    // SAFETY: null or a live handle.
    unsafe { pattern.as_ref() }.map_or(0, |p| p.pattern.len())
}

#[no_mangle]
pub extern "C" fn ris_pattern_get(
    pattern: *const RisPattern,
    index: usize,
    out: *mut bool,
) -> RisStatus {
    guard(|| {
        let p = non_null(pattern, "pattern")?;
        if index >= p.pattern.len() {
            return Err(out_of_range(format!(
                "index {index} >= {}",
                p.pattern.len()
            )));
        }
        write_out(out, p.pattern.get(index), "out")
    })
}

#[no_mangle]
pub extern "C" fn ris_pattern_set(pattern: *mut RisPattern, index: usize, on: bool) -> RisStatus {
    guard(|| {
        let p = non_null_mut(pattern, "pattern")?;
        if index >= p.pattern.len() {
            return Err(out_of_range(format!(
                "index {index} >= {}",
                p.pattern.len()
            )));
        }
        p.pattern.set(index, on);
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ris_pattern_to_hex(
    pattern: *const RisPattern,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> RisStatus {
    guard(|| {
        let p = non_null(pattern, "pattern")?;
        copy_str(&p.pattern.to_hex(), buf, cap, needed)
    })
}

/// Quantized steering pattern toward `(theta, phi)` for a plane wave
/// arriving from `(inc_theta, inc_phi)`, all in degrees. A null `response`
/// selects an ideal 0/180 degree element.
#[no_mangle]
pub extern "C" fn ris_steer(
    geom: RisGeometry,
    response: *const RisResponse,
    freq_ghz: f64,
    inc_theta_deg: f64,
    inc_phi_deg: f64,
    theta_deg: f64,
    phi_deg: f64,
    out: *mut *mut RisPattern,
) -> RisStatus {
    guard(|| {
        non_null_mut(out, "out")?;
        let g = geometry(geom)?;
        let incident = -Vec3::from_angles(inc_theta_deg, inc_phi_deg);
        let target = Vec3::from_angles(theta_deg, phi_deg);
        let profile = ideal_phase_profile(&g, incident, target, freq_ghz).map_err(invalid)?;
        // SAFETY: null or a live handle.
        let pattern = match unsafe { response.as_ref() } {
            Some(r) => quantize_1bit(&profile, &r.0, freq_ghz),
            None => quantize_1bit(&profile, &IdealResponse::binary(), freq_ghz),
        }
        .map_err(out_of_range)?;
        new_pattern(g, pattern, out)
    })
}

/// TX-RIS-RX complex gain for point antennas at `tx` and `rx` (three
/// doubles each, meters).
#[no_mangle]
pub extern "C" fn ris_channel_gain(
    pattern: *const RisPattern,
    response: *const RisResponse,
    tx: *const f64,
    rx: *const f64,
    freq_ghz: f64,
    element_factor_q: f64,
    out: *mut RisComplex,
) -> RisStatus {
    guard(|| {
        let p = non_null(pattern, "pattern")?;
        let r = non_null(response, "response")?;
        let scene =
            Scene::spherical(vec3(tx, "tx")?, vec3(rx, "rx")?, freq_ghz).with_q(element_factor_q);
        let g = channel_gain(&p.geometry, &p.pattern, &r.0, &scene)
            .map_err(|e| Failure::new(RisStatus::Solver, e.to_string()))?;
        write_out(
            out,
            RisComplex {
                re: g.gain.re,
                im: g.gain.im,
            },
            "out",
        )
    })
}

/// CRC-8 (polynomial 0x07, init 0). A null pointer with `len == 0` is the
/// empty message.
#[no_mangle]
pub extern "C" fn ris_crc8(data: *const u8, len: usize) -> u8 {
    match bytes(data, len, "data") {
        Ok(b) => crc8(b),
        Err(_) => 0,
    }
}

/// Encode one frame into `buf`. `needed` receives the frame length.
#[no_mangle]
pub extern "C" fn ris_frame_encode(
    opcode: u8,
    payload: *const u8,
    len: usize,
    buf: *mut u8,
    cap: usize,
    needed: *mut usize,
) -> RisStatus {
    guard(|| {
        let payload = bytes(payload, len, "payload")?;
        let frame = encode_frame(opcode, payload).map_err(invalid)?;
        copy_out(&frame, buf, cap, needed)
    })
}

#[no_mangle]
pub extern "C" fn ris_emulator_new(geom: RisGeometry, out: *mut *mut RisEmulator) -> RisStatus {
    guard(|| {
        non_null_mut(out, "out")?;
        let emulator = Emulator::new(geometry(geom)?).map_err(invalid)?;
        write_out(
            out,
            Box::into_raw(Box::new(RisEmulator {
                emulator,
                output: Vec::new(),
            })),
            "out",
        )
    })
}

#[no_mangle]
pub extern "C" fn ris_emulator_free(emulator: *mut RisEmulator) {
    if !emulator.is_null() {
        // SAFETY: handle created by this library and not yet freed.
        drop(unsafe { Box::from_raw(emulator) });
    }
}

/// Attach a solver-backed channel so GET_RSSI answers. The response is
/// copied; the caller keeps ownership of its handle.
#[no_mangle]
pub extern "C" fn ris_emulator_set_channel(
    emulator: *mut RisEmulator,
    response: *const RisResponse,
    tx: *const f64,
    rx: *const f64,
    freq_ghz: f64,
    element_factor_q: f64,
) -> RisStatus {
    guard(|| {
        let e = non_null_mut(emulator, "emulator")?;
        let r = non_null(response, "response")?;
        let scene =
            Scene::spherical(vec3(tx, "tx")?, vec3(rx, "rx")?, freq_ghz).with_q(element_factor_q);
        let channel = VirtualChannel::new(scene, Arc::new(r.0.clone()));
        let current = std::mem::take(&mut e.emulator);
        let geometry = *current.geometry();
        match current.with_channel(channel) {
            Ok(next) => {
                e.emulator = next;
                Ok(())
            }
            Err(err) => {
                // The rejected emulator is gone; restore a fresh one with the
                // same geometry rather than leaving the default in place.
                e.emulator = Emulator::new(geometry).map_err(invalid)?;
                Err(Failure::new(RisStatus::Solver, err.to_string()))
            }
        }
    })
}

/// Feed raw bytes; responses are queued for [`ris_emulator_read`].
#[no_mangle]
pub extern "C" fn ris_emulator_process(
    emulator: *mut RisEmulator,
    data: *const u8,
    len: usize,
) -> RisStatus {
    guard(|| {
        let e = non_null_mut(emulator, "emulator")?;
        let input = bytes(data, len, "data")?;
        let out = e.emulator.process(input);
        e.output.extend(out);
        Ok(())
    })
}

/// Drain up to `cap` queued response bytes; `written` receives the count.
#[no_mangle]
pub extern "C" fn ris_emulator_read(
    emulator: *mut RisEmulator,
    buf: *mut u8,
    cap: usize,
    written: *mut usize,
) -> RisStatus {
    guard(|| {
        let e = non_null_mut(emulator, "emulator")?;
        non_null_mut(written, "written")?;
        let n = cap.min(e.output.len());
        if n > 0 && buf.is_null() {
            return Err(Failure::new(RisStatus::NullPointer, "buffer is null"));
        }
        copy_out(&e.output[..n], buf, cap, ptr::null_mut())?;
        e.output.drain(..n);
        write_out(written, n, "written")
    })
}

#[no_mangle]
pub extern "C" fn ris_emulator_pattern_hex(
    emulator: *const RisEmulator,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> RisStatus {
    guard(|| {
        let e = non_null(emulator, "emulator")?;
        copy_str(&e.emulator.pattern().to_hex(), buf, cap, needed)
    })
}
