//! Physical-optics scattering from a flat square plate, in the plane of
//! incidence, plus Poynting-vector and RCS helpers.
//!
//! Angles are measured from the plate normal; the specular direction is
//! `theta_s = theta_i`. The scattered field along the cut is the aperture
//! integral `int_0^a exp(j k (sin theta_i - sin theta_s) x) dx`.

use std::f64::consts::PI;
use std::fmt::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

/// Smallest accepted number of pattern samples.
pub const MIN_SAMPLES: usize = 181;

/// Local maxima below this fraction of the peak, measured as prominence,
/// are treated as numerical ripple.
pub const SIDELOBE_PROMINENCE: f64 = 1e-6;

/// Quadrature nodes per wavelength of plate length.
const QUADRATURE_DENSITY: f64 = 256.0;

/// Floor applied to the dB column of pattern exports.
const DB_FLOOR: f64 = -300.0;

#[derive(Debug, Error, PartialEq)]
pub enum ScatterError {
    #[error("pattern needs at least {MIN_SAMPLES} samples, got {0}")]
    TooFewSamples(usize),
    #[error("invalid plate: {0}")]
    InvalidPlate(String),
    #[error("main lobe is truncated by the {0} edge of the angular domain")]
    MainLobeTruncated(&'static str),
    #[error("incident field must be non-zero")]
    ZeroIncidentField,
    #[error("observation distance must be positive, got {0}")]
    NonPositiveDistance(f64),
}

/// Square plate of side `p` wavelengths under plane-wave incidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSpec {
    pub p: f64,
    /// Wavelength (m).
    pub lambda: f64,
    /// Incidence angle from the normal (rad).
    pub theta_i: f64,
}

impl PlateSpec {
    pub fn new(p: f64, lambda: f64, theta_i: f64) -> Result<Self, ScatterError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(ScatterError::InvalidPlate(format!("p must be positive, got {p}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(ScatterError::InvalidPlate(format!(
                "wavelength must be positive, got {lambda}"
            )));
        }
        if !(0.0..PI / 2.0).contains(&theta_i) {
            return Err(ScatterError::InvalidPlate(format!(
                "incidence angle {theta_i} rad is outside [0, pi/2)"
            )));
        }
        Ok(Self { p, lambda, theta_i })
    }

    pub fn side(&self) -> f64 {
        self.p * self.lambda
    }
}

/// How the aperture integral is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApertureMethod {
    /// `a^2 sinc^2(k u a / 2)`.
    ClosedForm,
    /// Composite Simpson rule on the complex integrand.
    Quadrature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterPattern {
    /// Observation angles, uniform on [-pi/2, pi/2] (rad).
    pub angles: Vec<f64>,
    /// Intensities normalized to a maximum of 1.
    pub values: Vec<f64>,
    /// Largest sampled intensity before normalization (m^2).
    pub peak_intensity: f64,
}

impl ScatterPattern {
    /// Builds a pattern from raw samples, normalizing to the maximum.
    pub fn from_samples(angles: Vec<f64>, raw: Vec<f64>) -> Self {
        let peak = raw.iter().copied().fold(0.0, f64::max);
        let values = if peak > 0.0 {
            raw.iter().map(|v| v / peak).collect()
        } else {
            raw
        };
        Self {
            angles,
            values,
            peak_intensity: peak,
        }
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        best
    }

    pub fn peak_angle(&self) -> f64 {
        self.angles[self.argmax()]
    }

    pub fn spacing(&self) -> f64 {
        PI / (self.angles.len() - 1) as f64
    }

    /// Two-column text (degrees, normalized intensity) with an optional dB
    /// column, six decimals.
    pub fn to_text(&self, with_db: bool) -> String {
        let mut out = String::with_capacity(self.angles.len() * 32);
        for (theta, v) in self.angles.iter().zip(&self.values) {
            write!(out, "{:.6} {:.6}", theta.to_degrees(), v).unwrap();
            if with_db {
                let db = if *v > 0.0 {
                    (10.0 * v.log10()).max(DB_FLOOR)
                } else {
                    DB_FLOOR
                };
                write!(out, " {db:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Uniform angles on [-pi/2, pi/2], exactly antisymmetric about the centre.
pub fn observation_angles(samples: usize) -> Vec<f64> {
    let step = (PI / 2.0) / (samples - 1) as f64;
    (0..samples)
        .map(|j| (2 * j as i64 - (samples as i64 - 1)) as f64 * step)
        .collect()
}

/// `|int_0^a exp(j k u x) dx|^2` in closed form.
fn intensity_closed_form(side: f64, k: f64, u: f64) -> f64 {
    let half_phase = 0.5 * k * u * side;
    let sinc = if half_phase == 0.0 {
        1.0
    } else {
        half_phase.sin() / half_phase
    };
    side * side * sinc * sinc
}

/// The same integral by composite Simpson quadrature.
fn intensity_quadrature(side: f64, k: f64, u: f64, intervals: usize) -> f64 {
    let h = side / intervals as f64;
    let f = |x: f64| Complex64::from_polar(1.0, k * u * x);
    let mut sum = f(0.0) + f(side);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += f(i as f64 * h) * w;
    }
    (sum * (h / 3.0)).norm_sqr()
}

/// In-plane physical-optics pattern using the closed-form kernel.
pub fn po_pattern(plate: &PlateSpec, samples: usize) -> Result<ScatterPattern, ScatterError> {
    po_pattern_with(plate, samples, ApertureMethod::ClosedForm)
}

pub fn po_pattern_with(
    plate: &PlateSpec,
    samples: usize,
    method: ApertureMethod,
) -> Result<ScatterPattern, ScatterError> {
    if samples < MIN_SAMPLES {
        return Err(ScatterError::TooFewSamples(samples));
    }
    let plate = PlateSpec::new(plate.p, plate.lambda, plate.theta_i)?;
    let side = plate.side();
    let k = 2.0 * PI / plate.lambda;
    let sin_i = plate.theta_i.sin();
    let intervals = {
        let n = (QUADRATURE_DENSITY * plate.p).ceil().max(2.0) as usize;
        n + n % 2
    };
    let angles = observation_angles(samples);
    let raw: Vec<f64> = angles
        .par_iter()
        .map(|theta| {
            let u = sin_i - theta.sin();
            match method {
                ApertureMethod::ClosedForm => intensity_closed_form(side, k, u),
                ApertureMethod::Quadrature => intensity_quadrature(side, k, u, intervals),
            }
        })
        .collect();
    Ok(ScatterPattern::from_samples(angles, raw))
}

/// Strict local maxima other than the global maximum whose prominence
/// exceeds [`SIDELOBE_PROMINENCE`] of the peak.
pub fn count_sidelobes(pattern: &ScatterPattern) -> usize {
    let v = &pattern.values;
    if v.len() < 3 {
        return 0;
    }
    let peak = v[pattern.argmax()];
    let threshold = SIDELOBE_PROMINENCE * peak;
    let global = pattern.argmax();
    (1..v.len() - 1)
        .filter(|&i| i != global && v[i] > v[i - 1] && v[i] > v[i + 1])
        .filter(|&i| prominence(v, i) > threshold)
        .count()
}

/// Height of `v[i]` above the higher of the two minima separating it from
/// taller samples (or the ends of the slice).
fn prominence(v: &[f64], i: usize) -> f64 {
    let base = |range: &mut dyn Iterator<Item = usize>| {
        let mut low = v[i];
        for j in range {
            if v[j] > v[i] {
                break;
            }
            low = low.min(v[j]);
        }
        low
    };
    let left = base(&mut (0..i).rev());
    let right = base(&mut (i + 1..v.len()));
    v[i] - left.max(right)
}

/// Half-power beamwidth of the main lobe, interpolating linearly between
/// samples at the 0.5 crossings.
pub fn hpbw(pattern: &ScatterPattern) -> Result<f64, ScatterError> {
    let v = &pattern.values;
    let a = &pattern.angles;
    let peak_idx = pattern.argmax();
    let half = 0.5 * v[peak_idx];
    let crossing = |inside: usize, outside: usize| {
        let t = (v[inside] - half) / (v[inside] - v[outside]);
        a[inside] + t * (a[outside] - a[inside])
    };

    let mut lo = peak_idx;
    while v[lo] >= half {
        if lo == 0 {
            return Err(ScatterError::MainLobeTruncated("lower"));
        }
        lo -= 1;
    }
    let mut hi = peak_idx;
    while v[hi] >= half {
        if hi + 1 == v.len() {
            return Err(ScatterError::MainLobeTruncated("upper"));
        }
        hi += 1;
    }
    Ok(crossing(hi - 1, hi) - crossing(lo + 1, lo))
}

/// Poynting vector `S = E x H` (W/m^2).
pub fn poynting(e: [f64; 3], h: [f64; 3]) -> [f64; 3] {
    [
        e[1] * h[2] - e[2] * h[1],
        e[2] * h[0] - e[0] * h[2],
        e[0] * h[1] - e[1] * h[0],
    ]
}

/// Radar cross-section `4 pi r^2 |E_s|^2 / |E_i|^2` (m^2) at finite range.
pub fn rcs_from_fields(e_scattered: f64, e_incident: f64, r: f64) -> Result<f64, ScatterError> {
    if e_incident == 0.0 {
        return Err(ScatterError::ZeroIncidentField);
    }
    if !(r > 0.0) {
        return Err(ScatterError::NonPositiveDistance(r));
    }
    let ratio = e_scattered / e_incident;
    Ok(4.0 * PI * r * r * ratio * ratio)
}
