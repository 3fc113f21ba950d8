//! Closed-form RF arithmetic: link budget, free-space path loss, refraction
//! and reconfigurable-surface channel gain.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("{0} must be positive and finite, got {1}")]
    NonPositive(&'static str, f64),
    #[error("channel lists differ in length: g has {g}, h has {h}, phi has {phi}")]
    LengthMismatch { g: usize, h: usize, phi: usize },
    #[error("total internal reflection: sin(theta_r) = {0} exceeds 1")]
    TotalInternalReflection(f64),
    #[error("incidence angle {0} rad is outside [0, pi/2)")]
    IncidenceOutOfRange(f64),
    #[error("sweep end {f1} Hz lies below start {f0} Hz")]
    ReversedSweep { f0: f64, f1: f64 },
    #[error("link budget entry `{0}` is not finite")]
    NonFinite(String),
}

fn positive(name: &'static str, v: f64) -> Result<f64, AnalysisError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(AnalysisError::NonPositive(name, v))
    }
}

/// Transmit power plus labelled gains and losses, all in dB / dBm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkBudget {
    pub p_tx: f64,
    pub gains: Vec<(String, f64)>,
    pub losses: Vec<(String, f64)>,
}

impl LinkBudget {
    pub fn new(p_tx: f64) -> Self {
        Self {
            p_tx,
            ..Default::default()
        }
    }

    pub fn gain(mut self, label: impl Into<String>, db: f64) -> Self {
        self.gains.push((label.into(), db));
        self
    }

    pub fn loss(mut self, label: impl Into<String>, db: f64) -> Self {
        self.losses.push((label.into(), db));
        self
    }

    pub fn validate(&self) -> Result<(), AnalysisError> {
        if !self.p_tx.is_finite() {
            return Err(AnalysisError::NonFinite("p_tx".into()));
        }
        match self
            .gains
            .iter()
            .chain(&self.losses)
            .find(|(_, v)| !v.is_finite())
        {
            Some((label, _)) => Err(AnalysisError::NonFinite(label.clone())),
            None => Ok(()),
        }
    }
}

/// `P_RX = P_TX + sum(gains) - sum(losses)` in dBm.
pub fn received_power(budget: &LinkBudget) -> f64 {
    let gains: f64 = budget.gains.iter().map(|(_, g)| g).sum();
    let losses: f64 = budget.losses.iter().map(|(_, l)| l).sum();
    budget.p_tx + gains - losses
}

/// Effective isotropic radiated power, `P_TX - L_TX + G_TX` (dBm).
pub fn eirp(p_tx: f64, l_tx: f64, g_tx: f64) -> f64 {
    p_tx - l_tx + g_tx
}

/// Free-space path loss `20 log10(4 pi d f / c)` in dB.
pub fn fspl(d: f64, f: f64, c: f64) -> Result<f64, AnalysisError> {
    let d = positive("distance", d)?;
    let f = positive("frequency", f)?;
    let c = positive("propagation speed", c)?;
    Ok(20.0 * (4.0 * PI * d * f / c).log10())
}

/// Free-space path loss in wavelength form, `10 log10((4 pi d / lambda)^2)`.
pub fn fspl_wavelength(d: f64, lambda: f64) -> Result<f64, AnalysisError> {
    let d = positive("distance", d)?;
    let lambda = positive("wavelength", lambda)?;
    let ratio = 4.0 * PI * d / lambda;
    Ok(10.0 * (ratio * ratio).log10())
}

/// Refraction angle from Snell's law, `sin(theta_r) = sin(theta_i) n1 / n2`.
pub fn snell_refraction(theta_i: f64, n1: f64, n2: f64) -> Result<f64, AnalysisError> {
    if !(0.0..PI / 2.0).contains(&theta_i) {
        return Err(AnalysisError::IncidenceOutOfRange(theta_i));
    }
    let n1 = positive("n1", n1)?;
    let n2 = positive("n2", n2)?;
    if n1 == n2 {
        return Ok(theta_i);
    }
    let s = theta_i.sin() * n1 / n2;
    if s > 1.0 {
        return Err(AnalysisError::TotalInternalReflection(s));
    }
    Ok(s.asin())
}

/// Power gain of one meta-atom with aperture `area` at distance `d`: `A / (4 pi d^2)`.
pub fn atom_channel_gain(area: f64, d: f64) -> Result<f64, AnalysisError> {
    let area = positive("aperture", area)?;
    let d = positive("distance", d)?;
    Ok(area / (4.0 * PI * d * d))
}

/// End-to-end gain through `m` co-phased atoms, `m^2 A^2 / (4 pi d_g d_h)^2`.
pub fn e2e_channel_gain(area: f64, d_g: f64, d_h: f64, m: u32) -> Result<f64, AnalysisError> {
    let area = positive("aperture", area)?;
    let d_g = positive("d_g", d_g)?;
    let d_h = positive("d_h", d_h)?;
    if m == 0 {
        return Err(AnalysisError::NonPositive("atom count", 0.0));
    }
    let denom = 4.0 * PI * d_g * d_h;
    let single = area * area / (denom * denom);
    let m = m as f64;
    Ok(m * m * single)
}

/// Per-atom channels and phase configuration of a reflecting surface.
#[derive(Debug, Clone, PartialEq)]
pub struct RisChannel {
    pub g: Vec<Complex64>,
    pub h: Vec<Complex64>,
    pub phi: Vec<f64>,
    /// Per-atom aperture (m^2).
    pub area: f64,
    pub d_g: f64,
    pub d_h: f64,
    pub atoms: u32,
}

impl RisChannel {
    pub fn e2e_gain(&self) -> Result<f64, AnalysisError> {
        e2e_channel_gain(self.area, self.d_g, self.d_h, self.atoms)
    }
}

/// `k = sum_n g_n e^{j phi_n} h_n`.
pub fn composite_channel(ch: &RisChannel) -> Result<Complex64, AnalysisError> {
    composite(&ch.g, &ch.h, &ch.phi)
}

pub fn composite(g: &[Complex64], h: &[Complex64], phi: &[f64]) -> Result<Complex64, AnalysisError> {
    if g.len() != h.len() || g.len() != phi.len() {
        return Err(AnalysisError::LengthMismatch {
            g: g.len(),
            h: h.len(),
            phi: phi.len(),
        });
    }
    Ok(g
        .iter()
        .zip(h)
        .zip(phi)
        .map(|((g, h), &p)| g * Complex64::from_polar(1.0, p) * h)
        .sum())
}

/// Phases `phi_n = -arg(g_n h_n)` that co-phase every term of the composite
/// channel, maximizing `|k|`. Atoms with a zero product get phase 0.
pub fn optimal_phases(g: &[Complex64], h: &[Complex64]) -> Result<Vec<f64>, AnalysisError> {
    if g.len() != h.len() {
        return Err(AnalysisError::LengthMismatch {
            g: g.len(),
            h: h.len(),
            phi: g.len(),
        });
    }
    Ok(g.iter()
        .zip(h)
        .map(|(g, h)| {
            let k = g * h;
            if k == Complex64::new(0.0, 0.0) {
                0.0
            } else {
                -k.arg()
            }
        })
        .collect())
}

/// Sidelobe count `2p - 1` of a square plate with side `p` wavelengths,
/// clamped at zero. Intended for `2p` integral; other values are rounded.
pub fn sidelobe_count(p: f64) -> Result<u32, AnalysisError> {
    let p = positive("p", p)?;
    Ok(((2.0 * p).round() - 1.0).max(0.0) as u32)
}

/// Whether `2p` is an integer, the regime where [`sidelobe_count`] is exact.
pub fn is_half_integer(p: f64) -> bool {
    let twice = 2.0 * p;
    (twice - twice.round()).abs() <= 1e-9
}

/// Frequency-sweep point count `(f1 - f0) / df`, rounded when within 1e-9 of
/// an integer and truncated otherwise.
pub fn fem_sweep_points(f0: f64, f1: f64, df: f64) -> Result<u64, AnalysisError> {
    let df = positive("frequency step", df)?;
    if !(f1 >= f0) {
        return Err(AnalysisError::ReversedSweep { f0, f1 });
    }
    let q = (f1 - f0) / df;
    let nearest = q.round();
    Ok(if (q - nearest).abs() <= 1e-9 {
        nearest
    } else {
        q.floor()
    } as u64)
}
