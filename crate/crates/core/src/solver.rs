//! Discrete-scatterer field model of the surface.
//!
//! Each element re-radiates the incident wave scaled by its state's
//! reflection coefficient:
//!
//! ```text
//! E = sum_i gamma_i * F_i * exp(-j k (d_in,i + d_out,i))
//! F_i = (cos theta_in,i * cos theta_out,i)^q * S_i
//! ```
//!
//! `S_i = 1` for plane waves and `lambda^2 / ((4 pi)^2 d_in d_out)` for point
//! sources. Propagation over distance `d` contributes `exp(-j k d)`; this is
//! the only place the sign convention is fixed. The plate reference is the
//! same sum with every `gamma_i = 1`, which is what the ingested data is
//! normalized against.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::response::{
    ElementResponse, ReflectionModel, ReflectionSample, ResponseError, StateTag,
};
use crate::surface::{Pattern, SurfaceError, SurfaceGeometry};
use crate::units::{amplitude_db, power_db, wavelength_m, wavenumber};
use crate::vector::Vec3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Response(#[from] ResponseError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid scene: {0}")]
    Scene(String),
    #[error("direction grid is empty")]
    EmptyGrid,
    #[error("invalid grid point theta={theta_deg} phi={phi_deg}: {reason}")]
    GridPoint {
        theta_deg: f64,
        phi_deg: f64,
        reason: &'static str,
    },
    #[error("every direction in the result is degenerate")]
    AllDegenerate,
    #[error("channel gain needs point TX and RX (spherical scene)")]
    NotSpherical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Illumination {
    /// `incident` is the propagation direction of the incoming wave (toward
    /// the surface, z < 0); `observe` points from the surface to the
    /// far-field observer (z > 0).
    PlaneWave { incident: Vec3, observe: Vec3 },
    /// Point transmitter and receiver positions in meters, both in front of
    /// the surface.
    Spherical { tx: Vec3, rx: Vec3 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scene {
    pub illumination: Illumination,
    pub freq_ghz: f64,
    /// Exponent of the cosine element factor.
    pub element_factor_q: f64,
}

impl Scene {
    pub const DEFAULT_Q: f64 = 1.0;

    pub fn plane_wave(incident: Vec3, observe: Vec3, freq_ghz: f64) -> Self {
        Self {
            illumination: Illumination::PlaneWave { incident, observe },
            freq_ghz,
            element_factor_q: Self::DEFAULT_Q,
        }
    }

    /// Normal incidence, observed at broadside.
    pub fn broadside(freq_ghz: f64) -> Self {
        Self::plane_wave(
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.0, 0.0, 1.0),
            freq_ghz,
        )
    }

    pub fn spherical(tx: Vec3, rx: Vec3, freq_ghz: f64) -> Self {
        Self {
            illumination: Illumination::Spherical { tx, rx },
            freq_ghz,
            element_factor_q: Self::DEFAULT_Q,
        }
    }

    pub fn with_q(mut self, q: f64) -> Self {
        self.element_factor_q = q;
        self
    }

    /// Same scene with TX and RX exchanged (plane waves: incident and
    /// observation directions reversed and exchanged).
    pub fn swapped(self) -> Self {
        let illumination = match self.illumination {
            Illumination::Spherical { tx, rx } => Illumination::Spherical { tx: rx, rx: tx },
            Illumination::PlaneWave { incident, observe } => Illumination::PlaneWave {
                incident: -observe,
                observe: -incident,
            },
        };
        Self {
            illumination,
            ..self
        }
    }
}

/// Scene after validation, with normalized directions.
#[derive(Debug, Clone, Copy)]
enum Path {
    Plane { incident: Vec3, observe: Vec3 },
    Point { tx: Vec3, rx: Vec3, lambda: f64 },
}

fn check_common(freq_ghz: f64, q: f64) -> Result<(), SolverError> {
    if !(freq_ghz.is_finite() && freq_ghz > 0.0) {
        return Err(SolverError::Scene(format!(
            "frequency must be positive, got {freq_ghz} GHz"
        )));
    }
    if !(q.is_finite() && q >= 0.0) {
        return Err(SolverError::Scene(format!(
            "element factor exponent must be >= 0, got {q}"
        )));
    }
    Ok(())
}

fn incident_direction(v: Vec3) -> Result<Vec3, SolverError> {
    match v.normalized() {
        Some(d) if d.z < 0.0 => Ok(d),
        Some(_) => Err(SolverError::Scene(
            "incident direction must travel toward the surface (z < 0)".into(),
        )),
        None => Err(SolverError::Scene(
            "incident direction has zero length".into(),
        )),
    }
}

fn observe_direction(v: Vec3) -> Result<Vec3, SolverError> {
    match v.normalized() {
        Some(d) if d.z > 0.0 => Ok(d),
        Some(_) => Err(SolverError::Scene(
            "observation direction must point away from the surface (z > 0)".into(),
        )),
        None => Err(SolverError::Scene(
            "observation direction has zero length".into(),
        )),
    }
}

impl Path {
    fn from_scene(scene: &Scene, geometry: &SurfaceGeometry) -> Result<Self, SolverError> {
        check_common(scene.freq_ghz, scene.element_factor_q)?;
        match scene.illumination {
            Illumination::PlaneWave { incident, observe } => Ok(Path::Plane {
                incident: incident_direction(incident)?,
                observe: observe_direction(observe)?,
            }),
            Illumination::Spherical { tx, rx } => {
                let clearance = geometry.max_pitch_m();
                for (name, p) in [("TX", tx), ("RX", rx)] {
                    if !p.is_finite() || p.z < clearance {
                        return Err(SolverError::Scene(format!(
                            "{name} must be in front of the surface by at least one pitch \
                             ({clearance} m), got z = {}",
                            p.z
                        )));
                    }
                }
                Ok(Path::Point {
                    tx,
                    rx,
                    lambda: wavelength_m(scene.freq_ghz),
                })
            }
        }
    }

    /// `F_i * exp(-j k (d_in + d_out))` for one element.
    fn term(&self, p: Vec3, k: f64, q: f64) -> Complex64 {
        match *self {
            Path::Plane { incident, observe } => {
                let cos = -incident.z * observe.z;
                let amp = if q == 0.0 { 1.0 } else { cos.powf(q) };
                Complex64::from_polar(amp, -k * (incident - observe).dot(p))
            }
            Path::Point { tx, rx, lambda } => {
                let d_in = (tx - p).norm();
                let d_out = (rx - p).norm();
                let cos = (tx.z / d_in) * (rx.z / d_out);
                let f = if q == 0.0 { 1.0 } else { cos.powf(q) };
                let spread = lambda * lambda / ((4.0 * PI).powi(2) * (d_in * d_out));
                Complex64::from_polar(f * spread, -k * (d_in + d_out))
            }
        }
    }

    fn direction(&self) -> Vec3 {
        match *self {
            Path::Plane { observe, .. } => observe,
            Path::Point { rx, .. } => rx.normalized().unwrap_or(Vec3::new(0.0, 0.0, 1.0)),
        }
    }
}

/// Geometric sums split by element state, each accumulated in index order.
#[derive(Debug, Clone, Copy, Default)]
struct Partials {
    off: Complex64,
    on: Complex64,
    reference: Complex64,
}

fn accumulate(positions: &[Vec3], pattern: &Pattern, path: &Path, k: f64, q: f64) -> Partials {
    let mut acc = Partials::default();
    for (i, &p) in positions.iter().enumerate() {
        let t = path.term(p, k, q);
        acc.reference += t;
        if pattern.get(i) {
            acc.on += t;
        } else {
            acc.off += t;
        }
    }
    acc
}

/// Field at one observation direction or point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    /// Unit vector from the surface toward the observer.
    pub direction: Vec3,
    /// Grid label: polar angle, or signed angle for planar cuts.
    pub angle_deg: f64,
    pub amplitude: Complex64,
    /// Same sum with every reflection coefficient equal to one.
    pub reference: Complex64,
}

impl FieldSample {
    pub fn is_degenerate(&self) -> bool {
        let r = self.reference.norm();
        r.is_nan() || r <= 0.0 || !self.amplitude.is_finite()
    }

    /// `amplitude / reference`, or `None` where the reference vanishes.
    pub fn normalized(&self) -> Option<Complex64> {
        if self.is_degenerate() {
            None
        } else {
            Some(self.amplitude / self.reference)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldResult {
    pub samples: Vec<FieldSample>,
}

impl FieldResult {
    /// Every amplitude multiplied by `c`; references unchanged.
    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| FieldSample {
                    amplitude: s.amplitude * c,
                    ..*s
                })
                .collect(),
        }
    }

    /// `angle_deg,mag_db,phase_deg` of the unnormalized amplitude.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_deg,mag_db,phase_deg\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{:.4},{:.6},{:.6}",
                s.angle_deg,
                amplitude_db(s.amplitude.norm()),
                s.amplitude.arg().to_degrees()
            );
        }
        out
    }
}

fn state_gammas(
    model: &(impl ReflectionModel + ?Sized),
    freq_ghz: f64,
) -> Result<(Complex64, Complex64), SolverError> {
    Ok((
        model.gamma(freq_ghz, StateTag::Off)?,
        model.gamma(freq_ghz, StateTag::On)?,
    ))
}

/// Scattered field of `pattern` in `scene`, with its plate reference.
pub fn scattered_field(
    geometry: &SurfaceGeometry,
    pattern: &Pattern,
    model: &(impl ReflectionModel + ?Sized),
    scene: &Scene,
) -> Result<FieldResult, SolverError> {
    pattern.matches(geometry)?;
    let path = Path::from_scene(scene, geometry)?;
    let (g_off, g_on) = state_gammas(model, scene.freq_ghz)?;
    let k = wavenumber(scene.freq_ghz);
    let acc = accumulate(
        &geometry.positions(),
        pattern,
        &path,
        k,
        scene.element_factor_q,
    );
    let direction = path.direction();
    Ok(FieldResult {
        samples: vec![FieldSample {
            direction,
            angle_deg: direction.to_angles().0,
            amplitude: g_off * acc.off + g_on * acc.on,
            reference: acc.reference,
        }],
    })
}

/// Plate-normalized reflection of `pattern` in `scene`.
pub fn normalized_reflection(
    geometry: &SurfaceGeometry,
    pattern: &Pattern,
    model: &(impl ReflectionModel + ?Sized),
    scene: &Scene,
) -> Result<Complex64, SolverError> {
    scattered_field(geometry, pattern, model, scene)?.samples[0]
        .normalized()
        .ok_or(SolverError::AllDegenerate)
}

/// One far-field direction of a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub label_deg: f64,
}

/// Observation directions as (theta from broadside, phi azimuth) in degrees.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DirectionGrid {
    pub points: Vec<GridPoint>,
}

impl DirectionGrid {
    pub fn from_angles(angles: impl IntoIterator<Item = (f64, f64)>) -> Self {
        Self {
            points: angles
                .into_iter()
                .map(|(theta_deg, phi_deg)| GridPoint {
                    theta_deg,
                    phi_deg,
                    label_deg: theta_deg,
                })
                .collect(),
        }
    }

    /// `theta` in `[0, theta_max)` by `theta_step`, `phi` in `[0, 360)` by
    /// `phi_step`; theta-major order.
    pub fn hemisphere(theta_step_deg: f64, phi_step_deg: f64, theta_max_deg: f64) -> Self {
        let nt = (theta_max_deg / theta_step_deg).ceil() as usize;
        let np = (360.0 / phi_step_deg).round() as usize;
        Self::from_angles((0..nt).flat_map(|i| {
            let theta = i as f64 * theta_step_deg;
            (0..np).map(move |j| (theta, j as f64 * phi_step_deg))
        }))
    }

    /// Planar cut through broadside at azimuth `phi_deg`. Negative labels lie
    /// at azimuth `phi_deg + 180`.
    pub fn cut(phi_deg: f64, from_deg: f64, to_deg: f64, step_deg: f64) -> Self {
        let n = ((to_deg - from_deg) / step_deg).round() as usize;
        Self {
            points: (0..=n)
                .map(|i| {
                    let label = from_deg + (to_deg - from_deg) * i as f64 / n.max(1) as f64;
                    GridPoint {
                        theta_deg: label.abs(),
                        phi_deg: if label < 0.0 {
                            (phi_deg + 180.0).rem_euclid(360.0)
                        } else {
                            phi_deg
                        },
                        label_deg: label,
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Far-field pattern of `pattern` under plane-wave illumination from
/// `incident`, one sample per grid direction.
pub fn beam_pattern(
    geometry: &SurfaceGeometry,
    pattern: &Pattern,
    model: &(impl ReflectionModel + ?Sized),
    freq_ghz: f64,
    incident: Vec3,
    element_factor_q: f64,
    grid: &DirectionGrid,
) -> Result<FieldResult, SolverError> {
    if grid.is_empty() {
        return Err(SolverError::EmptyGrid);
    }
    pattern.matches(geometry)?;
    check_common(freq_ghz, element_factor_q)?;
    let incident = incident_direction(incident)?;
    for p in &grid.points {
        if !(p.theta_deg >= 0.0 && p.theta_deg < 90.0) || !p.phi_deg.is_finite() {
            return Err(SolverError::GridPoint {
                theta_deg: p.theta_deg,
                phi_deg: p.phi_deg,
                reason: "theta must lie in [0, 90)",
            });
        }
    }
    let (g_off, g_on) = state_gammas(model, freq_ghz)?;
    let k = wavenumber(freq_ghz);
    let positions = geometry.positions();
    let samples = grid
        .points
        .iter()
        .map(|p| {
            let observe = Vec3::from_angles(p.theta_deg, p.phi_deg);
            let path = Path::Plane { incident, observe };
            let acc = accumulate(&positions, pattern, &path, k, element_factor_q);
            FieldSample {
                direction: observe,
                angle_deg: p.label_deg,
                amplitude: g_off * acc.off + g_on * acc.on,
                reference: acc.reference,
            }
        })
        .collect();
    Ok(FieldResult { samples })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelGain {
    pub gain: Complex64,
}

impl ChannelGain {
    pub fn power(&self) -> f64 {
        self.gain.norm_sqr()
    }

    pub fn power_db(&self) -> f64 {
        power_db(self.power())
    }
}

/// Unnormalized TX-RIS-RX gain for point TX and RX, spreading included.
pub fn channel_gain(
    geometry: &SurfaceGeometry,
    pattern: &Pattern,
    model: &(impl ReflectionModel + ?Sized),
    scene: &Scene,
) -> Result<ChannelGain, SolverError> {
    if !matches!(scene.illumination, Illumination::Spherical { .. }) {
        return Err(SolverError::NotSpherical);
    }
    let field = scattered_field(geometry, pattern, model, scene)?;
    Ok(ChannelGain {
        gain: field.samples[0].amplitude,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub direction: Vec3,
    pub angle_deg: f64,
    pub amplitude: Complex64,
}

/// Strongest non-degenerate sample by scattered amplitude; ties go to the
/// first in grid order.
pub fn peak_direction(result: &FieldResult) -> Result<Peak, SolverError> {
    if result.samples.is_empty() {
        return Err(SolverError::EmptyGrid);
    }
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in result.samples.iter().enumerate() {
        if s.is_degenerate() {
            continue;
        }
        let m = s.amplitude.norm();
        if best.is_none_or(|(_, b)| m > b) {
            best = Some((i, m));
        }
    }
    let (index, _) = best.ok_or(SolverError::AllDegenerate)?;
    let s = result.samples[index];
    Ok(Peak {
        index,
        direction: s.direction,
        angle_deg: s.angle_deg,
        amplitude: s.amplitude,
    })
}

/// Uniform-pattern plate-normalized reflection at broadside for each
/// frequency, in the reflection CSV sample layout.
pub fn reflection_sweep(
    geometry: &SurfaceGeometry,
    response: &ElementResponse,
    freqs_ghz: &[f64],
) -> Result<Vec<ReflectionSample>, SolverError> {
    let all_off = Pattern::uniform(geometry, StateTag::Off);
    let all_on = Pattern::uniform(geometry, StateTag::On);
    freqs_ghz
        .iter()
        .map(|&f| {
            let scene = Scene::broadside(f);
            let off = normalized_reflection(geometry, &all_off, response, &scene)?;
            let on = normalized_reflection(geometry, &all_on, response, &scene)?;
            Ok(ReflectionSample {
                freq_ghz: f,
                mag_off_db: amplitude_db(off.norm()).min(0.0),
                mag_on_db: amplitude_db(on.norm()).min(0.0),
                phase_off_deg: off.arg().to_degrees(),
                phase_on_deg: on.arg().to_degrees(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::IdealResponse;
    use crate::surface::{ideal_phase_profile, quantize_1bit};
    use proptest::prelude::*;

    fn g16() -> SurfaceGeometry {
        SurfaceGeometry::prototype()
    }

    fn rel_err(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn uniform_on_normalizes_to_gamma() {
        let r = ElementResponse::anchored();
        let g = g16();
        let scene = Scene::spherical(Vec3::new(-1.0, 0.3, 2.0), Vec3::new(1.5, -0.2, 3.0), 5.4);
        let n = normalized_reflection(&g, &Pattern::uniform(&g, StateTag::On), &r, &scene).unwrap();
        assert!(rel_err(n, r.gamma(5.4, StateTag::On).unwrap()) < 1e-14);
    }

    #[test]
    fn uniform_off_broadside_worst_case() {
        let r = ElementResponse::anchored();
        let g = g16();
        let n = normalized_reflection(
            &g,
            &Pattern::uniform(&g, StateTag::Off),
            &r,
            &Scene::broadside(5.56),
        )
        .unwrap();
        assert!((amplitude_db(n.norm()) + 5.2).abs() < 1e-9);
    }

    #[test]
    fn checkerboard_cancels_with_antipodal_states() {
        let g = g16();
        let model = IdealResponse::new(Complex64::new(0.6, 0.3), Complex64::new(-0.6, -0.3));
        let f = scattered_field(
            &g,
            &Pattern::checkerboard(&g),
            &model,
            &Scene::broadside(5.5),
        )
        .unwrap();
        assert!(f.samples[0].amplitude.norm() < 1e-12);
        assert!(f.samples[0].normalized().unwrap().norm() < 1e-12);
    }

    #[test]
    fn coherent_sum_of_uniform_surface() {
        let g = g16();
        let grid = DirectionGrid::cut(0.0, -60.0, 60.0, 1.0);
        let model = IdealResponse::binary();
        let res = beam_pattern(
            &g,
            &Pattern::uniform(&g, StateTag::Off),
            &model,
            5.5,
            Vec3::new(0.0, 0.0, -1.0),
            0.0,
            &grid,
        )
        .unwrap();
        let peak = peak_direction(&res).unwrap();
        assert_eq!(peak.angle_deg, 0.0);
        assert!((peak.amplitude.norm() - 256.0).abs() < 1e-9);
        assert!((amplitude_db(peak.amplitude.norm()) - 48.1648).abs() < 1e-3);
    }

    #[test]
    fn steered_thirty_degrees_normal_incidence() {
        let g = g16();
        let model = IdealResponse::binary();
        let inc = Vec3::new(0.0, 0.0, -1.0);
        let target = Vec3::from_angles(30.0, 0.0);
        let profile = ideal_phase_profile(&g, inc, target, 5.5).unwrap();
        let pattern = quantize_1bit(&profile, &model, 5.5).unwrap();
        let grid = DirectionGrid::cut(0.0, -89.0, 89.0, 0.5);
        let res = beam_pattern(&g, &pattern, &model, 5.5, inc, 0.0, &grid).unwrap();
        let peak = peak_direction(&res).unwrap();
        // A real-valued binary pattern radiates a mirror beam of equal
        // strength at normal incidence, so compare the polar angle.
        assert!(
            (peak.angle_deg.abs() - 30.0).abs() <= 1.0,
            "{}",
            peak.angle_deg
        );

        // Oracle: direct sum at candidate angles.
        let k = wavenumber(5.5);
        let direct = |theta: f64| {
            let u = Vec3::from_angles(theta, 0.0);
            g.positions()
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let s = if pattern.get(i) { -1.0 } else { 1.0 };
                    Complex64::from_polar(s, -k * (inc - u).dot(*p))
                })
                .sum::<Complex64>()
                .norm()
        };
        assert!((direct(peak.angle_deg.abs()) - peak.amplitude.norm()).abs() < 1e-9);
        assert!(direct(30.0) > direct(20.0) && direct(30.0) > direct(40.0));
    }

    #[test]
    fn peak_is_invariant_under_scaling() {
        let g = SurfaceGeometry::with_size(6, 5).unwrap();
        let grid = DirectionGrid::hemisphere(5.0, 15.0, 85.0);
        let model = ElementResponse::anchored();
        let res = beam_pattern(
            &g,
            &Pattern::column_stripes(&g, 2).unwrap(),
            &model,
            5.5,
            Vec3::from_angles(20.0, 0.0) * -1.0,
            1.0,
            &grid,
        )
        .unwrap();
        let a = peak_direction(&res).unwrap();
        let b = peak_direction(&res.scaled(Complex64::new(-0.3, 2.0))).unwrap();
        assert_eq!(a.index, b.index);
    }

    #[test]
    fn channel_gain_far_field_distance_law() {
        let g = g16();
        let r = ElementResponse::anchored();
        let p = Pattern::uniform(&g, StateTag::On);
        let tx = Vec3::new(0.0, 0.0, 3.0);
        let ray = Vec3::from_angles(25.0, 40.0);
        let at = |d: f64| {
            channel_gain(&g, &p, &r, &Scene::spherical(tx, ray * d, 5.5))
                .unwrap()
                .power_db()
        };
        let drop = at(100.0) - at(200.0);
        assert!((drop - 6.0).abs() <= 0.2, "{drop}");
    }

    #[test]
    fn zero_reflection_gives_zero_gain() {
        let g = g16();
        let model = IdealResponse::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let scene = Scene::spherical(Vec3::new(0.0, 1.0, 2.0), Vec3::new(1.0, 0.0, 2.0), 5.5);
        let gain = channel_gain(&g, &Pattern::checkerboard(&g), &model, &scene).unwrap();
        assert_eq!(gain.gain, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn invalid_inputs() {
        let g = g16();
        let r = ElementResponse::anchored();
        let p = Pattern::uniform(&g, StateTag::On);
        assert!(matches!(
            scattered_field(&g, &p, &r, &Scene::broadside(6.0)),
            Err(SolverError::Response(ResponseError::OutOfBand { .. }))
        ));
        let small = SurfaceGeometry::with_size(4, 4).unwrap();
        assert!(matches!(
            scattered_field(&small, &p, &r, &Scene::broadside(5.5)),
            Err(SolverError::Surface(SurfaceError::Mismatch { .. }))
        ));
        assert_eq!(
            channel_gain(&g, &p, &r, &Scene::broadside(5.5)).unwrap_err(),
            SolverError::NotSpherical
        );
        let on_plane = Scene::spherical(Vec3::new(0.0, 0.0, 0.005), Vec3::new(0.0, 0.0, 2.0), 5.5);
        assert!(matches!(
            scattered_field(&g, &p, &r, &on_plane),
            Err(SolverError::Scene(_))
        ));
        assert_eq!(
            beam_pattern(
                &g,
                &p,
                &r,
                5.5,
                Vec3::new(0.0, 0.0, -1.0),
                1.0,
                &DirectionGrid::default()
            )
            .unwrap_err(),
            SolverError::EmptyGrid
        );
        assert_eq!(
            peak_direction(&FieldResult { samples: vec![] }).unwrap_err(),
            SolverError::EmptyGrid
        );
        let degenerate = FieldResult {
            samples: vec![FieldSample {
                direction: Vec3::new(0.0, 0.0, 1.0),
                angle_deg: 0.0,
                amplitude: Complex64::new(1.0, 0.0),
                reference: Complex64::new(0.0, 0.0),
            }],
        };
        assert_eq!(
            peak_direction(&degenerate).unwrap_err(),
            SolverError::AllDegenerate
        );
    }

    #[test]
    fn sweep_reproduces_uniform_gamma() {
        let g = g16();
        let r = ElementResponse::anchored();
        let s = reflection_sweep(&g, &r, &[5.15, 5.56]).unwrap();
        assert!((s[0].mag_on_db + 4.8).abs() < 1e-9);
        assert!((s[1].mag_off_db + 5.2).abs() < 1e-9);
    }

    fn arb_scene() -> impl Strategy<Value = Scene> {
        let plane = (
            0.0f64..80.0,
            0.0f64..360.0,
            0.0f64..80.0,
            0.0f64..360.0,
            5.15f64..5.875,
            0.0f64..3.0,
        )
            .prop_map(|(ti, pi, to, po, f, q)| {
                Scene::plane_wave(-Vec3::from_angles(ti, pi), Vec3::from_angles(to, po), f)
                    .with_q(q)
            });
        let point = (
            (-5.0f64..5.0, -5.0f64..5.0, 0.05f64..10.0),
            (-5.0f64..5.0, -5.0f64..5.0, 0.05f64..10.0),
            5.15f64..5.875,
            0.0f64..3.0,
        )
            .prop_map(|(t, r, f, q)| {
                Scene::spherical(Vec3::new(t.0, t.1, t.2), Vec3::new(r.0, r.1, r.2), f).with_q(q)
            });
        prop_oneof![plane, point]
    }

    fn arb_pattern(g: SurfaceGeometry) -> impl Strategy<Value = Pattern> {
        prop::collection::vec(any::<bool>(), g.element_count())
            .prop_map(move |bits| Pattern::from_bits(&g, bits).unwrap())
    }

    proptest! {
        #[test]
        fn uniform_cancellation(scene in arb_scene()) {
            let g = SurfaceGeometry::with_size(8, 6).unwrap();
            let r = ElementResponse::anchored();
            for state in StateTag::ALL {
                let n = normalized_reflection(&g, &Pattern::uniform(&g, state), &r, &scene).unwrap();
                prop_assert!(rel_err(n, r.gamma(scene.freq_ghz, state).unwrap()) < 1e-12);
            }
        }

        #[test]
        fn linear_in_gamma(scene in arb_scene(), p in arb_pattern(SurfaceGeometry::with_size(5, 4).unwrap()),
                           re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let g = SurfaceGeometry::with_size(5, 4).unwrap();
            let base = IdealResponse::new(Complex64::new(0.4, -0.2), Complex64::new(-0.3, 0.5));
            let c = Complex64::new(re, im);
            let a = scattered_field(&g, &p, &base, &scene).unwrap().samples[0];
            let b = scattered_field(&g, &p, &base.scaled(c), &scene).unwrap().samples[0];
            let tol = 1e-12 * (a.reference.norm() * c.norm() + 1e-300);
            prop_assert!((b.amplitude - a.amplitude * c).norm() <= tol * 8.0);
            prop_assert_eq!(a.reference, b.reference);
        }

        #[test]
        fn superposition(scene in arb_scene(), p in arb_pattern(SurfaceGeometry::with_size(5, 4).unwrap())) {
            let g = SurfaceGeometry::with_size(5, 4).unwrap();
            let model = IdealResponse::new(Complex64::new(0.4, -0.2), Complex64::new(-0.3, 0.5));
            let only_on = IdealResponse::new(Complex64::new(0.0, 0.0), model.on);
            let only_off = IdealResponse::new(model.off, Complex64::new(0.0, 0.0));
            let full = scattered_field(&g, &p, &model, &scene).unwrap().samples[0].amplitude;
            let a = scattered_field(&g, &p, &only_on, &scene).unwrap().samples[0].amplitude;
            let b = scattered_field(&g, &p, &only_off, &scene).unwrap().samples[0].amplitude;
            prop_assert!((full - (a + b)).norm() <= 1e-12 * (a.norm() + b.norm() + 1e-300));
        }

        #[test]
        fn complement_negates_with_antipodal_states(scene in arb_scene(), p in arb_pattern(SurfaceGeometry::with_size(5, 4).unwrap())) {
            let g = SurfaceGeometry::with_size(5, 4).unwrap();
            let model = IdealResponse::new(Complex64::new(0.8, 0.1), Complex64::new(-0.8, -0.1));
            let a = scattered_field(&g, &p, &model, &scene).unwrap().samples[0].amplitude;
            let b = scattered_field(&g, &p.complement(), &model, &scene).unwrap().samples[0].amplitude;
            prop_assert_eq!(a, -b);
        }

        #[test]
        fn channel_gain_is_reciprocal(scene in arb_scene(), p in arb_pattern(SurfaceGeometry::with_size(5, 4).unwrap())) {
            prop_assume!(matches!(scene.illumination, Illumination::Spherical { .. }));
            let g = SurfaceGeometry::with_size(5, 4).unwrap();
            let r = ElementResponse::anchored();
            let a = channel_gain(&g, &p, &r, &scene).unwrap();
            let b = channel_gain(&g, &p, &r, &scene.swapped()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
