//! Two-state surface reflection data.
//!
//! An [`ElementResponse`] holds the plate-normalized complex reflection
//! coefficient of the surface for both switch states, tabulated over
//! frequency. Between samples the magnitude is interpolated linearly in dB
//! and the phase linearly in unwrapped degrees.
//!
//! [`ANCHORED_CSV`] is the bundled dataset. Its curves are synthetic except
//! at the anchor points (OFF -5.2 dB at 5.56 GHz, ON -4.8 dB at 5.15 GHz,
//! phase difference 180 deg at 5.53 GHz and 92 deg at 5.875 GHz). It is
//! produced by `data/make_anchored_response.py`.

use std::fmt::{self, Write as _};

use num_complex::Complex64;
use thiserror::Error;

use crate::units::{WIFI_BAND_HI_GHZ, WIFI_BAND_LO_GHZ};

/// Bundled dataset, synthetic except at its anchor points.
pub const ANCHORED_CSV: &str = include_str!("../data/anchored_response.csv");

/// Column header of the reflection CSV schema.
pub const CSV_HEADER: &str =
    "freq_ghz,mag_off_db,mag_on_db,phase_off_deg,phase_on_deg,phase_diff_deg";

/// Maximum disagreement between a stated and a recomputed phase difference
/// before ingestion records a warning.
pub const PHASE_DIFF_TOLERANCE_DEG: f64 = 0.5;

/// Frequency step of the dense sweep used by [`ElementResponse::worst_case`].
pub const WORST_CASE_STEP_GHZ: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateTag {
    Off,
    On,
}

impl StateTag {
    pub const ALL: [StateTag; 2] = [StateTag::Off, StateTag::On];

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            StateTag::On
        } else {
            StateTag::Off
        }
    }

    pub fn bit(self) -> bool {
        self == StateTag::On
    }
}

impl fmt::Display for StateTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StateTag::Off => "OFF",
            StateTag::On => "ON",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ResponseError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: expected 5 or 6 columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("line {line}: non-monotonic frequency {freq_ghz} GHz")]
    NonMonotonic { line: usize, freq_ghz: f64 },
    #[error("line {line}: positive magnitude {value_db} dB (data must be plate-normalized)")]
    PositiveMagnitude { line: usize, value_db: f64 },
    #[error("line {line}: frequency must be finite and positive, got {freq_ghz}")]
    BadFrequency { line: usize, freq_ghz: f64 },
    #[error("at least 2 samples are required, found {found}")]
    TooFewSamples { found: usize },
    #[error("{freq_ghz} GHz is outside the band [{lo_ghz}, {hi_ghz}] GHz")]
    OutOfBand {
        freq_ghz: f64,
        lo_ghz: f64,
        hi_ghz: f64,
    },
    #[error("invalid band [{lo_ghz}, {hi_ghz}] GHz: {reason}")]
    InvalidBand {
        lo_ghz: f64,
        hi_ghz: f64,
        reason: &'static str,
    },
}

/// One tabulated frequency point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionSample {
    pub freq_ghz: f64,
    pub mag_off_db: f64,
    pub mag_on_db: f64,
    pub phase_off_deg: f64,
    pub phase_on_deg: f64,
}

impl ReflectionSample {
    pub fn mag_db(&self, state: StateTag) -> f64 {
        match state {
            StateTag::Off => self.mag_off_db,
            StateTag::On => self.mag_on_db,
        }
    }

    pub fn phase_deg(&self, state: StateTag) -> f64 {
        match state {
            StateTag::Off => self.phase_off_deg,
            StateTag::On => self.phase_on_deg,
        }
    }
}

/// Source of per-state complex reflection coefficients.
///
/// Implemented by measured data ([`ElementResponse`]) and by frequency-flat
/// synthetic responses ([`IdealResponse`]) used in analytic tests.
pub trait ReflectionModel {
    fn gamma(&self, freq_ghz: f64, state: StateTag) -> Result<Complex64, ResponseError>;
}

impl<M: ReflectionModel + ?Sized> ReflectionModel for &M {
    fn gamma(&self, freq_ghz: f64, state: StateTag) -> Result<Complex64, ResponseError> {
        (**self).gamma(freq_ghz, state)
    }
}

impl<M: ReflectionModel + ?Sized> ReflectionModel for std::sync::Arc<M> {
    fn gamma(&self, freq_ghz: f64, state: StateTag) -> Result<Complex64, ResponseError> {
        (**self).gamma(freq_ghz, state)
    }
}

/// Frequency-independent two-state response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealResponse {
    pub off: Complex64,
    pub on: Complex64,
}

impl IdealResponse {
    pub fn new(off: Complex64, on: Complex64) -> Self {
        Self { off, on }
    }

    /// Unit magnitude, 0 deg for OFF and 180 deg for ON.
    pub fn binary() -> Self {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0))
    }

    pub fn scaled(self, c: Complex64) -> Self {
        Self::new(self.off * c, self.on * c)
    }
}

impl ReflectionModel for IdealResponse {
    fn gamma(&self, _freq_ghz: f64, state: StateTag) -> Result<Complex64, ResponseError> {
        Ok(match state {
            StateTag::Off => self.off,
            StateTag::On => self.on,
        })
    }
}

/// Fold an angle difference into [0, 180] degrees.
pub fn wrap_deg(x: f64) -> f64 {
    ((x + 180.0).rem_euclid(360.0) - 180.0).abs()
}

/// A note recorded while ingesting otherwise valid data.
#[derive(Debug, Clone, PartialEq)]
pub enum IngestWarning {
    PhaseDifferenceMismatch {
        line: usize,
        freq_ghz: f64,
        stated_deg: f64,
        computed_deg: f64,
    },
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::PhaseDifferenceMismatch {
                line,
                freq_ghz,
                stated_deg,
                computed_deg,
            } => write!(
                f,
                "line {line}: phase difference at {freq_ghz} GHz stated as {stated_deg} deg, \
                 recomputed {computed_deg:.4} deg"
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub response: ElementResponse,
    pub warnings: Vec<IngestWarning>,
}

/// Minimum of one curve over a band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub freq_ghz: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstCase {
    /// Lowest OFF-state magnitude, dB.
    pub off_db: Extremum,
    /// Lowest ON-state magnitude, dB.
    pub on_db: Extremum,
    /// Smallest wrapped phase difference, degrees.
    pub phase_difference_deg: Extremum,
}

/// Tabulated two-state reflection coefficient. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementResponse {
    samples: Vec<ReflectionSample>,
    freqs: Vec<f64>,
    unwrapped_off: Vec<f64>,
    unwrapped_on: Vec<f64>,
    band: (f64, f64),
}

fn unwrap_phases(raw: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for p in raw {
        let next = match out.last() {
            None => p,
            Some(&prev) => p - 360.0 * ((p - prev) / 360.0).round(),
        };
        out.push(next);
    }
    out
}

impl ElementResponse {
    /// Build from samples in increasing frequency order. The active band
    /// defaults to the WiFi band clipped to the sampled range, or the whole
    /// sampled range if the two do not overlap.
    pub fn new(samples: Vec<ReflectionSample>) -> Result<Self, ResponseError> {
        Self::validate(&samples, |i| i + 1)?;
        Ok(Self::from_validated(samples))
    }

    fn validate(
        samples: &[ReflectionSample],
        line_of: impl Fn(usize) -> usize,
    ) -> Result<(), ResponseError> {
        if samples.len() < 2 {
            return Err(ResponseError::TooFewSamples {
                found: samples.len(),
            });
        }
        let mut prev: Option<f64> = None;
        for (i, s) in samples.iter().enumerate() {
            let line = line_of(i);
            if !(s.freq_ghz.is_finite() && s.freq_ghz > 0.0) {
                return Err(ResponseError::BadFrequency {
                    line,
                    freq_ghz: s.freq_ghz,
                });
            }
            if prev.is_some_and(|p| s.freq_ghz <= p) {
                return Err(ResponseError::NonMonotonic {
                    line,
                    freq_ghz: s.freq_ghz,
                });
            }
            prev = Some(s.freq_ghz);
            for m in [s.mag_off_db, s.mag_on_db] {
                if m > 0.0 {
                    return Err(ResponseError::PositiveMagnitude { line, value_db: m });
                }
                if !m.is_finite() {
                    return Err(ResponseError::Parse {
                        line,
                        message: format!("magnitude must be finite, got {m}"),
                    });
                }
            }
            for p in [s.phase_off_deg, s.phase_on_deg] {
                if !p.is_finite() {
                    return Err(ResponseError::Parse {
                        line,
                        message: format!("phase must be finite, got {p}"),
                    });
                }
            }
        }
        Ok(())
    }

    fn from_validated(samples: Vec<ReflectionSample>) -> Self {
        let freqs: Vec<f64> = samples.iter().map(|s| s.freq_ghz).collect();
        let unwrapped_off = unwrap_phases(samples.iter().map(|s| s.phase_off_deg));
        let unwrapped_on = unwrap_phases(samples.iter().map(|s| s.phase_on_deg));
        let (fmin, fmax) = (freqs[0], freqs[freqs.len() - 1]);
        let lo = WIFI_BAND_LO_GHZ.max(fmin);
        let hi = WIFI_BAND_HI_GHZ.min(fmax);
        let band = if lo <= hi { (lo, hi) } else { (fmin, fmax) };
        Self {
            samples,
            freqs,
            unwrapped_off,
            unwrapped_on,
            band,
        }
    }

    /// Parse the reflection CSV schema. The optional sixth column is checked
    /// against the recomputed phase difference and otherwise ignored.
    pub fn from_csv(text: &str) -> Result<Ingested, ResponseError> {
        let mut samples = Vec::new();
        let mut lines = Vec::new();
        let mut stated = Vec::new();
        let mut first_content = true;

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let row = raw.trim_end_matches('\r').trim();
            if row.is_empty() {
                continue;
            }
            let fields: Vec<&str> = row.split(',').map(str::trim).collect();
            if first_content {
                first_content = false;
                if fields[0].parse::<f64>().is_err() {
                    continue;
                }
            }
            if !(5..=6).contains(&fields.len()) {
                return Err(ResponseError::Columns {
                    line,
                    found: fields.len(),
                });
            }
            let mut values = [0.0f64; 6];
            for (slot, field) in values.iter_mut().zip(&fields) {
                *slot = field.parse().map_err(|_| ResponseError::Parse {
                    line,
                    message: format!("not a number: {field:?}"),
                })?;
            }
            samples.push(ReflectionSample {
                freq_ghz: values[0],
                mag_off_db: values[1],
                mag_on_db: values[2],
                phase_off_deg: values[3],
                phase_on_deg: values[4],
            });
            stated.push((fields.len() == 6).then_some(values[5]));
            lines.push(line);
        }

        Self::validate(&samples, |i| lines[i])?;

        let warnings = samples
            .iter()
            .zip(&stated)
            .zip(&lines)
            .filter_map(|((s, stated), &line)| {
                let stated = (*stated)?;
                let computed = wrap_deg(s.phase_off_deg - s.phase_on_deg);
                ((stated - computed).abs() > PHASE_DIFF_TOLERANCE_DEG).then_some(
                    IngestWarning::PhaseDifferenceMismatch {
                        line,
                        freq_ghz: s.freq_ghz,
                        stated_deg: stated,
                        computed_deg: computed,
                    },
                )
            })
            .collect();

        Ok(Ingested {
            response: Self::from_validated(samples),
            warnings,
        })
    }

    /// The bundled anchored dataset.
    pub fn anchored() -> Self {
        Self::from_csv(ANCHORED_CSV)
            .expect("bundled dataset is valid")
            .response
    }

    /// Serialize to the CSV schema, values in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                s.freq_ghz,
                s.mag_off_db,
                s.mag_on_db,
                s.phase_off_deg,
                s.phase_on_deg,
                wrap_deg(s.phase_off_deg - s.phase_on_deg)
            );
        }
        out
    }

    pub fn samples(&self) -> &[ReflectionSample] {
        &self.samples
    }

    /// Active band `(lo, hi)` in GHz.
    pub fn band(&self) -> (f64, f64) {
        self.band
    }

    /// Sampled frequency range `(min, max)` in GHz.
    pub fn data_range(&self) -> (f64, f64) {
        (self.freqs[0], self.freqs[self.freqs.len() - 1])
    }

    /// Copy with a different active band, which must lie inside the sampled
    /// range.
    pub fn with_band(&self, lo_ghz: f64, hi_ghz: f64) -> Result<Self, ResponseError> {
        let (fmin, fmax) = self.data_range();
        if lo_ghz.is_nan() || hi_ghz.is_nan() || lo_ghz > hi_ghz {
            return Err(ResponseError::InvalidBand {
                lo_ghz,
                hi_ghz,
                reason: "lower edge above upper edge",
            });
        }
        if lo_ghz < fmin || hi_ghz > fmax {
            return Err(ResponseError::InvalidBand {
                lo_ghz,
                hi_ghz,
                reason: "band exceeds the sampled frequency range",
            });
        }
        let mut out = self.clone();
        out.band = (lo_ghz, hi_ghz);
        Ok(out)
    }

    fn check_band(&self, freq_ghz: f64) -> Result<(), ResponseError> {
        let (lo, hi) = self.band;
        if freq_ghz >= lo && freq_ghz <= hi {
            Ok(())
        } else {
            Err(ResponseError::OutOfBand {
                freq_ghz,
                lo_ghz: lo,
                hi_ghz: hi,
            })
        }
    }

    fn interpolate(&self, freq_ghz: f64, values: impl Fn(usize) -> f64) -> f64 {
        let upper = self.freqs.partition_point(|&f| f < freq_ghz);
        if upper < self.freqs.len() && self.freqs[upper] == freq_ghz {
            return values(upper);
        }
        let hi = upper.clamp(1, self.freqs.len() - 1);
        let lo = hi - 1;
        let t = (freq_ghz - self.freqs[lo]) / (self.freqs[hi] - self.freqs[lo]);
        let (a, b) = (values(lo), values(hi));
        a + t * (b - a)
    }

    /// Interpolated magnitude in dB.
    pub fn mag_db(&self, freq_ghz: f64, state: StateTag) -> Result<f64, ResponseError> {
        self.check_band(freq_ghz)?;
        Ok(self.interpolate(freq_ghz, |i| self.samples[i].mag_db(state)))
    }

    /// Interpolated phase in degrees, continuous across the band (not wrapped).
    pub fn phase_deg(&self, freq_ghz: f64, state: StateTag) -> Result<f64, ResponseError> {
        self.check_band(freq_ghz)?;
        let unwrapped = match state {
            StateTag::Off => &self.unwrapped_off,
            StateTag::On => &self.unwrapped_on,
        };
        Ok(self.interpolate(freq_ghz, |i| unwrapped[i]))
    }

    /// Wrapped OFF/ON phase difference in [0, 180] degrees.
    pub fn phase_difference(&self, freq_ghz: f64) -> Result<f64, ResponseError> {
        let off = self.phase_deg(freq_ghz, StateTag::Off)?;
        let on = self.phase_deg(freq_ghz, StateTag::On)?;
        Ok(wrap_deg(off - on))
    }

    /// Minima of both magnitudes and of the phase difference over
    /// `[lo_ghz, hi_ghz]`, taken over a sweep of step at most 1 MHz that also
    /// visits every sample node inside the band. Ties keep the lowest
    /// frequency.
    pub fn worst_case(&self, lo_ghz: f64, hi_ghz: f64) -> Result<WorstCase, ResponseError> {
        if lo_ghz.is_nan() || hi_ghz.is_nan() || lo_ghz > hi_ghz {
            return Err(ResponseError::InvalidBand {
                lo_ghz,
                hi_ghz,
                reason: "empty band",
            });
        }
        let (blo, bhi) = self.band;
        if lo_ghz < blo || hi_ghz > bhi {
            return Err(ResponseError::InvalidBand {
                lo_ghz,
                hi_ghz,
                reason: "band exceeds the response band",
            });
        }

        let steps = ((hi_ghz - lo_ghz) / WORST_CASE_STEP_GHZ).ceil() as usize;
        let mut grid: Vec<f64> = if steps == 0 {
            vec![lo_ghz]
        } else {
            (0..=steps)
                .map(|k| lo_ghz + (hi_ghz - lo_ghz) * k as f64 / steps as f64)
                .collect()
        };
        grid.extend(
            self.freqs
                .iter()
                .copied()
                .filter(|&f| f > lo_ghz && f < hi_ghz),
        );
        grid.sort_by(f64::total_cmp);
        grid.dedup();

        let mut off = Extremum {
            freq_ghz: f64::NAN,
            value: f64::INFINITY,
        };
        let mut on = off;
        let mut diff = off;
        let consider = |slot: &mut Extremum, f: f64, v: f64| {
            if v < slot.value {
                *slot = Extremum {
                    freq_ghz: f,
                    value: v,
                };
            }
        };
        for f in grid {
            consider(&mut off, f, self.mag_db(f, StateTag::Off)?);
            consider(&mut on, f, self.mag_db(f, StateTag::On)?);
            consider(&mut diff, f, self.phase_difference(f)?);
        }
        Ok(WorstCase {
            off_db: off,
            on_db: on,
            phase_difference_deg: diff,
        })
    }
}

impl ReflectionModel for ElementResponse {
    fn gamma(&self, freq_ghz: f64, state: StateTag) -> Result<Complex64, ResponseError> {
        let mag = self.mag_db(freq_ghz, state)?;
        let phase = self.phase_deg(freq_ghz, state)?;
        Ok(Complex64::from_polar(
            10f64.powf(mag / 20.0),
            phase.to_radians(),
        ))
    }
}
