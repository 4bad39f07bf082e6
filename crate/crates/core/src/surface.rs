//! Surface lattice, binary element patterns and 1-bit phase synthesis.
//!
//! Elements are indexed row-major, `i = r * nx + c`, with columns running
//! along x (pitch `pitch_x_mm`) and rows along y (pitch `pitch_y_mm`). The
//! lattice is centered on the origin in the z = 0 plane.

use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::response::{wrap_deg, ReflectionModel, ResponseError, StateTag};
use crate::units::wavelength_m;
use crate::vector::Vec3;

/// Unit-cell pitch along x, mm.
pub const DEFAULT_PITCH_X_MM: f64 = 20.0;
/// Unit-cell pitch along y, mm.
pub const DEFAULT_PITCH_Y_MM: f64 = 13.0;
/// Elements per side of the prototype.
pub const DEFAULT_SIDE: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("hex pattern must be {expected} characters, got {found}")]
    HexLength { expected: usize, found: usize },
    #[error("invalid hex digit {digit:?} at position {position}")]
    HexDigit { position: usize, digit: char },
    #[error("pattern is {found_nx}x{found_ny}, geometry is {nx}x{ny}")]
    Mismatch {
        nx: usize,
        ny: usize,
        found_nx: usize,
        found_ny: usize,
    },
    #[error("{0} direction has zero length")]
    ZeroDirection(&'static str),
    #[error("stripe period must be at least 1")]
    ZeroPeriod,
    #[error("frequency must be finite and positive, got {0} GHz")]
    Frequency(f64),
    #[error(transparent)]
    Response(#[from] ResponseError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGeometry {
    nx: usize,
    ny: usize,
    pitch_x_mm: f64,
    pitch_y_mm: f64,
}

impl Default for SurfaceGeometry {
    fn default() -> Self {
        Self::prototype()
    }
}

impl SurfaceGeometry {
    pub fn new(
        nx: usize,
        ny: usize,
        pitch_x_mm: f64,
        pitch_y_mm: f64,
    ) -> Result<Self, SurfaceError> {
        if nx == 0 || ny == 0 {
            return Err(SurfaceError::Geometry(format!(
                "element counts must be at least 1, got {nx}x{ny}"
            )));
        }
        for p in [pitch_x_mm, pitch_y_mm] {
            if !(p.is_finite() && p > 0.0) {
                return Err(SurfaceError::Geometry(format!(
                    "pitch must be positive, got {p} mm"
                )));
            }
        }
        Ok(Self {
            nx,
            ny,
            pitch_x_mm,
            pitch_y_mm,
        })
    }

    /// 16 x 16 elements at 20.00 mm x 13.00 mm.
    pub fn prototype() -> Self {
        Self {
            nx: DEFAULT_SIDE,
            ny: DEFAULT_SIDE,
            pitch_x_mm: DEFAULT_PITCH_X_MM,
            pitch_y_mm: DEFAULT_PITCH_Y_MM,
        }
    }

    /// Same pitch, different element counts.
    pub fn with_size(nx: usize, ny: usize) -> Result<Self, SurfaceError> {
        Self::new(nx, ny, DEFAULT_PITCH_X_MM, DEFAULT_PITCH_Y_MM)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn pitch_x_mm(&self) -> f64 {
        self.pitch_x_mm
    }

    pub fn pitch_y_mm(&self) -> f64 {
        self.pitch_y_mm
    }

    pub fn element_count(&self) -> usize {
        self.nx * self.ny
    }

    /// Bytes needed to pack one bit per element.
    pub fn packed_len(&self) -> usize {
        self.element_count().div_ceil(8)
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.nx + col
    }

    /// Center of element `(row, col)` in meters.
    pub fn position(&self, row: usize, col: usize) -> Vec3 {
        let x = (col as f64 - (self.nx as f64 - 1.0) / 2.0) * self.pitch_x_mm;
        let y = (row as f64 - (self.ny as f64 - 1.0) / 2.0) * self.pitch_y_mm;
        Vec3::new(x * 1e-3, y * 1e-3, 0.0)
    }

    /// All element centers in index order.
    pub fn positions(&self) -> Vec<Vec3> {
        (0..self.ny)
            .flat_map(|r| (0..self.nx).map(move |c| (r, c)))
            .map(|(r, c)| self.position(r, c))
            .collect()
    }

    /// Largest extent of the aperture, meters.
    pub fn diagonal_m(&self) -> f64 {
        let w = self.nx as f64 * self.pitch_x_mm * 1e-3;
        let h = self.ny as f64 * self.pitch_y_mm * 1e-3;
        w.hypot(h)
    }

    pub fn max_pitch_m(&self) -> f64 {
        self.pitch_x_mm.max(self.pitch_y_mm) * 1e-3
    }
}

/// One bit per element, `false` = OFF, `true` = ON.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pattern {
    nx: usize,
    ny: usize,
    bits: Vec<bool>,
}

impl Pattern {
    pub fn from_bits(geometry: &SurfaceGeometry, bits: Vec<bool>) -> Result<Self, SurfaceError> {
        if bits.len() != geometry.element_count() {
            return Err(SurfaceError::Geometry(format!(
                "pattern needs {} bits, got {}",
                geometry.element_count(),
                bits.len()
            )));
        }
        Ok(Self {
            nx: geometry.nx,
            ny: geometry.ny,
            bits,
        })
    }

    pub fn uniform(geometry: &SurfaceGeometry, state: StateTag) -> Self {
        Self {
            nx: geometry.nx,
            ny: geometry.ny,
            bits: vec![state.bit(); geometry.element_count()],
        }
    }

    /// ON where `(row + col)` is odd.
    pub fn checkerboard(geometry: &SurfaceGeometry) -> Self {
        Self::from_fn(geometry, |r, c| (r + c) % 2 == 1)
    }

    /// Vertical stripes `period` columns wide, starting OFF.
    pub fn column_stripes(geometry: &SurfaceGeometry, period: usize) -> Result<Self, SurfaceError> {
        if period == 0 {
            return Err(SurfaceError::ZeroPeriod);
        }
        Ok(Self::from_fn(geometry, |_, c| (c / period) % 2 == 1))
    }

    pub fn from_fn(geometry: &SurfaceGeometry, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(geometry.element_count());
        for r in 0..geometry.ny {
            for c in 0..geometry.nx {
                bits.push(f(r, c));
            }
        }
        Self {
            nx: geometry.nx,
            ny: geometry.ny,
            bits,
        }
    }

    /// Bit `i` of the pattern is bit `i` of `value`. Requires at most 64
    /// elements.
    pub fn from_index_value(geometry: &SurfaceGeometry, value: u64) -> Self {
        let n = geometry.element_count();
        assert!(n <= 64, "pattern of {n} bits does not fit in u64");
        let bits = (0..n).map(|i| value >> i & 1 == 1).collect();
        Self {
            nx: geometry.nx,
            ny: geometry.ny,
            bits,
        }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, index: usize) -> bool {
        self.bits[index]
    }

    pub fn state(&self, index: usize) -> StateTag {
        StateTag::from_bit(self.bits[index])
    }

    pub fn set(&mut self, index: usize, on: bool) {
        self.bits[index] = on;
    }

    pub fn flip(&mut self, index: usize) {
        self.bits[index] = !self.bits[index];
    }

    pub fn count_on(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn complement(&self) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn matches(&self, geometry: &SurfaceGeometry) -> Result<(), SurfaceError> {
        if self.nx == geometry.nx && self.ny == geometry.ny {
            Ok(())
        } else {
            Err(SurfaceError::Mismatch {
                nx: geometry.nx,
                ny: geometry.ny,
                found_nx: self.nx,
                found_ny: self.ny,
            })
        }
    }

    /// Pack row-major, LSB first within each byte.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.bits.len().div_ceil(8)];
        for (i, _) in self.bits.iter().enumerate().filter(|(_, &b)| b) {
            out[i / 8] |= 1 << (i % 8);
        }
        out
    }

    /// Inverse of [`Pattern::to_bytes`]. Padding bits in the last byte are
    /// ignored.
    pub fn from_bytes(geometry: &SurfaceGeometry, bytes: &[u8]) -> Result<Self, SurfaceError> {
        if bytes.len() != geometry.packed_len() {
            return Err(SurfaceError::Geometry(format!(
                "packed pattern needs {} bytes, got {}",
                geometry.packed_len(),
                bytes.len()
            )));
        }
        let bits = (0..geometry.element_count())
            .map(|i| bytes[i / 8] >> (i % 8) & 1 == 1)
            .collect();
        Ok(Self {
            nx: geometry.nx,
            ny: geometry.ny,
            bits,
        })
    }

    /// Lowercase hex of the packed bytes, byte 0 first.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(2 * self.bits.len().div_ceil(8));
        for b in self.to_bytes() {
            let _ = write!(s, "{b:02x}");
        }
        s
    }

    pub fn from_hex(text: &str, geometry: &SurfaceGeometry) -> Result<Self, SurfaceError> {
        let expected = 2 * geometry.packed_len();
        let chars: Vec<char> = text.chars().collect();
        if chars.len() != expected {
            return Err(SurfaceError::HexLength {
                expected,
                found: chars.len(),
            });
        }
        let mut bytes = Vec::with_capacity(geometry.packed_len());
        for (pair_index, pair) in chars.chunks(2).enumerate() {
            let mut byte = 0u8;
            for (k, &ch) in pair.iter().enumerate() {
                let nibble = ch.to_digit(16).ok_or(SurfaceError::HexDigit {
                    position: 2 * pair_index + k,
                    digit: ch,
                })?;
                byte = byte << 4 | nibble as u8;
            }
            bytes.push(byte);
        }
        Self::from_bytes(geometry, &bytes)
    }

    /// One text row per element row, `#` for ON and `.` for OFF.
    pub fn ascii_art(&self) -> String {
        let mut s = String::with_capacity((self.nx + 1) * self.ny);
        for row in self.bits.chunks(self.nx) {
            s.extend(row.iter().map(|&b| if b { '#' } else { '.' }));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Desired reflection phase per element, degrees, same indexing as
/// [`Pattern`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    nx: usize,
    ny: usize,
    phases_deg: Vec<f64>,
}

impl PhaseProfile {
    pub fn new(geometry: &SurfaceGeometry, phases_deg: Vec<f64>) -> Result<Self, SurfaceError> {
        if phases_deg.len() != geometry.element_count() {
            return Err(SurfaceError::Geometry(format!(
                "profile needs {} values, got {}",
                geometry.element_count(),
                phases_deg.len()
            )));
        }
        if let Some(bad) = phases_deg.iter().find(|p| !p.is_finite()) {
            return Err(SurfaceError::Geometry(format!("non-finite phase {bad}")));
        }
        Ok(Self {
            nx: geometry.nx,
            ny: geometry.ny,
            phases_deg,
        })
    }

    pub fn phases_deg(&self) -> &[f64] {
        &self.phases_deg
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            nx: self.nx,
            ny: self.ny,
            phases_deg: self.phases_deg.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Element phases that redirect a plane wave travelling along
/// `incident_dir` (TX toward surface) into `target_dir` (surface toward RX).
///
/// With propagation phase `exp(-j k d)`, element `i` sees the path
/// `(k_inc - k_tgt) . p_i`, so the compensating phase is
/// `(360 / lambda) * (k_inc - k_tgt) . p_i`. Defined modulo 360.
pub fn ideal_phase_profile(
    geometry: &SurfaceGeometry,
    incident_dir: Vec3,
    target_dir: Vec3,
    freq_ghz: f64,
) -> Result<PhaseProfile, SurfaceError> {
    if !(freq_ghz.is_finite() && freq_ghz > 0.0) {
        return Err(SurfaceError::Frequency(freq_ghz));
    }
    let k_inc = incident_dir
        .normalized()
        .ok_or(SurfaceError::ZeroDirection("incident"))?;
    let k_tgt = target_dir
        .normalized()
        .ok_or(SurfaceError::ZeroDirection("target"))?;
    let scale = 360.0 / wavelength_m(freq_ghz);
    let delta = k_inc - k_tgt;
    let phases_deg = geometry
        .positions()
        .into_iter()
        .map(|p| scale * delta.dot(p))
        .collect();
    Ok(PhaseProfile {
        nx: geometry.nx,
        ny: geometry.ny,
        phases_deg,
    })
}

/// Choose, per element, the state whose reflection phase at `freq_ghz` is
/// circularly closest to the desired phase. Ties go to OFF.
pub fn quantize_1bit(
    profile: &PhaseProfile,
    model: &(impl ReflectionModel + ?Sized),
    freq_ghz: f64,
) -> Result<Pattern, SurfaceError> {
    let off = model.gamma(freq_ghz, StateTag::Off)?.arg().to_degrees();
    let on = model.gamma(freq_ghz, StateTag::On)?.arg().to_degrees();
    let bits = profile
        .phases_deg
        .iter()
        .map(|&desired| wrap_deg(desired - on) < wrap_deg(desired - off))
        .collect();
    Ok(Pattern {
        nx: profile.nx,
        ny: profile.ny,
        bits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::IdealResponse;
    use crate::units::wavelength_mm;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn g16() -> SurfaceGeometry {
        SurfaceGeometry::prototype()
    }

    #[test]
    fn geometry_validation() {
        assert!(SurfaceGeometry::new(0, 4, 20.0, 13.0).is_err());
        assert!(SurfaceGeometry::new(4, 4, 0.0, 13.0).is_err());
        assert!(SurfaceGeometry::new(4, 4, 20.0, f64::NAN).is_err());
        let g = SurfaceGeometry::new(3, 4, 20.0, 13.0).unwrap();
        assert_eq!(g.element_count(), 12);
        assert_eq!(g.packed_len(), 2);
    }

    #[test]
    fn positions_are_centered() {
        let g = g16();
        let p00 = g.position(0, 0);
        assert!((p00.x + 0.150).abs() < 1e-15);
        assert!((p00.y + 0.0975).abs() < 1e-15);
        let sum = g
            .positions()
            .into_iter()
            .fold(Vec3::default(), |a, b| a + b);
        assert!(sum.norm() < 1e-12);
    }

    #[test]
    fn hex_of_uniform_off() {
        let p = Pattern::uniform(&g16(), StateTag::Off);
        assert_eq!(p.to_hex(), "00".repeat(32));
    }

    #[test]
    fn hex_of_first_element() {
        let mut p = Pattern::uniform(&g16(), StateTag::Off);
        p.set(0, true);
        assert_eq!(p.to_hex(), format!("01{}", "00".repeat(31)));
        p.set(0, false);
        p.set(9, true);
        assert_eq!(&p.to_hex()[..4], "0002");
    }

    #[test]
    fn hex_errors_carry_position() {
        let g = g16();
        assert_eq!(
            Pattern::from_hex("00", &g).unwrap_err(),
            SurfaceError::HexLength {
                expected: 64,
                found: 2
            }
        );
        let mut s = "0".repeat(64);
        s.replace_range(17..18, "g");
        assert_eq!(
            Pattern::from_hex(&s, &g).unwrap_err(),
            SurfaceError::HexDigit {
                position: 17,
                digit: 'g'
            }
        );
        assert!(Pattern::from_hex(&"FF".repeat(32), &g).unwrap().count_on() == 256);
    }

    #[test]
    fn generators() {
        let g = g16();
        assert_eq!(Pattern::uniform(&g, StateTag::On).count_on(), 256);
        let cb = Pattern::checkerboard(&g);
        assert_eq!(cb.count_on(), 128);
        assert!(!cb.get(0) && cb.get(1) && cb.get(16));
        assert_eq!(
            Pattern::column_stripes(&g, 16).unwrap(),
            Pattern::uniform(&g, StateTag::Off)
        );
        let s2 = Pattern::column_stripes(&g, 2).unwrap();
        assert_eq!(&s2.bits()[..6], &[false, false, true, true, false, false]);
        assert_eq!(
            Pattern::column_stripes(&g, 0),
            Err(SurfaceError::ZeroPeriod)
        );
    }

    #[test]
    fn ascii_art_rows() {
        let g = SurfaceGeometry::with_size(3, 2).unwrap();
        assert_eq!(Pattern::checkerboard(&g).ascii_art(), ".#.\n#.#\n");
    }

    #[test]
    fn broadside_profile_is_zero() {
        let p = ideal_phase_profile(
            &g16(),
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.0, 0.0, 1.0),
            5.5,
        )
        .unwrap();
        assert!(p.phases_deg().iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn thirty_degree_column_increment() {
        // Independent: lambda = c0/f = 54.508 mm, 360 * 20 * sin 30 / lambda.
        let lambda: f64 = 299_792_458.0 / 5.5e9 * 1e3;
        let expected = 360.0 * 20.0 * 0.5 / lambda;
        assert!((expected - 66.0).abs() < 0.05);
        assert!((lambda - wavelength_mm(5.5)).abs() < 1e-12);

        let g = g16();
        let p = ideal_phase_profile(
            &g,
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::from_angles(30.0, 0.0),
            5.5,
        )
        .unwrap();
        for r in 0..16 {
            for c in 0..15 {
                let a = p.phases_deg()[g.index(r, c)];
                let b = p.phases_deg()[g.index(r, c + 1)];
                assert!((wrap_deg(b - a) - expected).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn reversing_directions_negates_profile() {
        let g = g16();
        let inc = Vec3::from_angles(20.0, 45.0) * -1.0;
        let tgt = Vec3::from_angles(35.0, 200.0);
        let a = ideal_phase_profile(&g, inc, tgt, 5.4).unwrap();
        let b = ideal_phase_profile(&g, tgt, inc, 5.4).unwrap();
        for (x, z) in a.phases_deg().iter().zip(b.phases_deg()) {
            assert!(wrap_deg(x + z) < 1e-9);
        }
    }

    #[test]
    fn zero_direction_rejected() {
        assert_eq!(
            ideal_phase_profile(&g16(), Vec3::default(), Vec3::new(0.0, 0.0, 1.0), 5.5)
                .unwrap_err(),
            SurfaceError::ZeroDirection("incident")
        );
    }

    #[test]
    fn quantize_zero_profile_and_tie() {
        let g = g16();
        let model = IdealResponse::binary();
        let zero = PhaseProfile::new(&g, vec![0.0; 256]).unwrap();
        assert_eq!(
            quantize_1bit(&zero, &model, 5.5).unwrap(),
            Pattern::uniform(&g, StateTag::Off)
        );
        let ninety = PhaseProfile::new(&g, vec![90.0; 256]).unwrap();
        assert_eq!(
            quantize_1bit(&ninety, &model, 5.5).unwrap(),
            Pattern::uniform(&g, StateTag::Off)
        );
        let near_on = PhaseProfile::new(&g, vec![-170.0; 256]).unwrap();
        assert_eq!(
            quantize_1bit(&near_on, &model, 5.5).unwrap(),
            Pattern::uniform(&g, StateTag::On)
        );
    }

    #[test]
    fn quantize_propagates_out_of_band() {
        let r = crate::response::ElementResponse::anchored();
        let zero = PhaseProfile::new(&g16(), vec![0.0; 256]).unwrap();
        assert!(matches!(
            quantize_1bit(&zero, &r, 6.0),
            Err(SurfaceError::Response(ResponseError::OutOfBand { .. }))
        ));
    }

    // Oracle: evaluate both candidate states per element with an explicit
    // circular distance.
    fn brute_force(profile: &[f64], off_deg: f64, on_deg: f64) -> Vec<bool> {
        fn dist(a: f64, b: f64) -> f64 {
            let d = (a - b) % 360.0;
            let d = if d < 0.0 { d + 360.0 } else { d };
            d.min(360.0 - d)
        }
        profile
            .iter()
            .map(|&p| {
                let candidates = [(false, dist(p, off_deg)), (true, dist(p, on_deg))];
                let mut best = candidates[0];
                for c in &candidates[1..] {
                    if c.1 < best.1 {
                        best = *c;
                    }
                }
                best.0
            })
            .collect()
    }

    proptest! {
        #[test]
        fn hex_round_trip(nx in 1usize..20, ny in 1usize..20, seed in any::<u64>()) {
            let g = SurfaceGeometry::with_size(nx, ny).unwrap();
            let mut state = seed | 1;
            let p = Pattern::from_fn(&g, |_, _| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                state & 1 == 1
            });
            prop_assert_eq!(Pattern::from_hex(&p.to_hex(), &g).unwrap(), p.clone());
            prop_assert_eq!(Pattern::from_hex(&p.to_hex().to_uppercase(), &g).unwrap(), p);
        }

        #[test]
        fn quantize_matches_brute_force(
            phases in prop::collection::vec(-720.0f64..720.0, 256),
            off in -180.0f64..180.0,
            on in -180.0f64..180.0,
        ) {
            let g = g16();
            let model = IdealResponse::new(
                Complex64::from_polar(0.7, off.to_radians()),
                Complex64::from_polar(0.5, on.to_radians()),
            );
            let profile = PhaseProfile::new(&g, phases.clone()).unwrap();
            let got = quantize_1bit(&profile, &model, 5.5).unwrap();
            let off_deg = model.off.arg().to_degrees();
            let on_deg = model.on.arg().to_degrees();
            prop_assert_eq!(got.bits(), &brute_force(&phases, off_deg, on_deg)[..]);
        }

        #[test]
        fn quantize_is_periodic(phases in prop::collection::vec(-360.0f64..360.0, 256)) {
            let g = g16();
            let model = IdealResponse::binary();
            let a = quantize_1bit(&PhaseProfile::new(&g, phases.clone()).unwrap(), &model, 5.5).unwrap();
            let shifted = PhaseProfile::new(&g, phases.iter().map(|p| p + 360.0).collect()).unwrap();
            prop_assert_eq!(a, quantize_1bit(&shifted, &model, 5.5).unwrap());
        }

        #[test]
        fn half_turn_shift_complements(phases in prop::collection::vec(-360.0f64..360.0, 256)) {
            let g = g16();
            let model = IdealResponse::binary();
            let a = quantize_1bit(&PhaseProfile::new(&g, phases.clone()).unwrap(), &model, 5.5).unwrap();
            let b = quantize_1bit(
                &PhaseProfile::new(&g, phases.iter().map(|p| p + 180.0).collect()).unwrap(),
                &model,
                5.5,
            ).unwrap();
            for (i, p) in phases.iter().enumerate() {
                let tie = (wrap_deg(*p) - 90.0).abs() < 1e-9;
                if !tie {
                    prop_assert_eq!(a.get(i), !b.get(i));
                }
            }
        }

        #[test]
        fn profile_scales_with_pitch(theta in 0.0f64..60.0, phi in 0.0f64..360.0) {
            let g1 = SurfaceGeometry::new(8, 8, 10.0, 7.0).unwrap();
            let g2 = SurfaceGeometry::new(8, 8, 20.0, 14.0).unwrap();
            let inc = Vec3::new(0.0, 0.0, -1.0);
            let tgt = Vec3::from_angles(theta, phi);
            let a = ideal_phase_profile(&g1, inc, tgt, 5.5).unwrap();
            let b = ideal_phase_profile(&g2, inc, tgt, 5.5).unwrap();
            for (x, y) in a.phases_deg().iter().zip(b.phases_deg()) {
                prop_assert!(wrap_deg(2.0 * x - y) < 1e-9);
            }
        }
    }
}
