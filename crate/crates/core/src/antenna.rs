//! Planar radiation patterns and direction-dependent antenna gain.
//!
//! Parametric families are power patterns expressed in dB:
//!
//! - cardioid: `10 k log10((1 + cos t) / 2)`
//! - dipole: `10 k log10(|cos t|)`
//!
//! where `t` is the offset from boresight. Every family peaks at 0 dB on
//! boresight and is clamped at [`GAIN_FLOOR_DB`] in its nulls.

use std::fmt;

use crate::error::{Error, Result, Violation};
use crate::geometry::normalize_deg;

/// Lowest relative gain any pattern reports.
pub const GAIN_FLOOR_DB: f64 = -100.0;

/// `10 log10(0.5)`.
pub const HALF_POWER_DB: f64 = -3.010_299_956_639_812;

const CALIBRATION_TOLERANCE_DB: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum PatternFamily {
    Omni,
    Cardioid {
        exponent: f64,
    },
    Dipole {
        exponent: f64,
    },
    /// `(angle_deg, relative_gain_db)` pairs covering [-180, 180].
    Table {
        samples: Vec<(f64, f64)>,
    },
}

/// Families whose shape is set by a single exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParametricFamily {
    Cardioid,
    Dipole,
}

impl ParametricFamily {
    fn name(self) -> &'static str {
        match self {
            ParametricFamily::Cardioid => "cardioid",
            ParametricFamily::Dipole => "dipole",
        }
    }

    fn min_exponent(self) -> f64 {
        match self {
            ParametricFamily::Cardioid => 0.0,
            ParametricFamily::Dipole => 1.0,
        }
    }

    /// Linear power at `offset_rad` for exponent 1.
    fn base(self, offset_rad: f64) -> f64 {
        match self {
            // (1 + cos t) / 2, written to stay accurate near the null
            ParametricFamily::Cardioid => (offset_rad / 2.0).cos().powi(2).min(1.0),
            ParametricFamily::Dipole => offset_rad.cos().abs().min(1.0),
        }
    }

    pub fn with_exponent(self, exponent: f64) -> PatternFamily {
        match self {
            ParametricFamily::Cardioid => PatternFamily::Cardioid { exponent },
            ParametricFamily::Dipole => PatternFamily::Dipole { exponent },
        }
    }
}

impl fmt::Display for ParametricFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PatternFamily {
    pub fn kind(&self) -> &'static str {
        match self {
            PatternFamily::Omni => "omni",
            PatternFamily::Cardioid { .. } => "cardioid",
            PatternFamily::Dipole { .. } => "dipole",
            PatternFamily::Table { .. } => "table",
        }
    }

    pub fn is_omni(&self) -> bool {
        matches!(self, PatternFamily::Omni)
    }

    pub fn validate(&self, path: &str, out: &mut Vec<Violation>) {
        match self {
            PatternFamily::Omni => {}
            PatternFamily::Cardioid { exponent } | PatternFamily::Dipole { exponent } => {
                let min = match self {
                    PatternFamily::Dipole { .. } => ParametricFamily::Dipole.min_exponent(),
                    _ => ParametricFamily::Cardioid.min_exponent(),
                };
                if !exponent.is_finite() || *exponent < min {
                    out.push(Violation::new(
                        format!("{path}.exponent"),
                        format!("must be finite and >= {min}, got {exponent}"),
                    ));
                }
            }
            PatternFamily::Table { samples } => validate_table(samples, &format!("{path}.samples"), out),
        }
    }

    /// Relative gain in dB at `offset_deg` from boresight, within
    /// [`GAIN_FLOOR_DB`, 0].
    pub fn relative_gain_db(&self, offset_deg: f64) -> Result<f64> {
        let offset = normalize_deg(offset_deg)?;
        let raw = match self {
            PatternFamily::Omni => 0.0,
            PatternFamily::Cardioid { exponent } => {
                parametric_db(ParametricFamily::Cardioid, *exponent, offset.to_radians())
            }
            PatternFamily::Dipole { exponent } => {
                parametric_db(ParametricFamily::Dipole, *exponent, offset.to_radians())
            }
            PatternFamily::Table { samples } => interpolate(samples, offset),
        };
        Ok(raw.clamp(GAIN_FLOOR_DB, 0.0))
    }
}

fn parametric_db(family: ParametricFamily, exponent: f64, offset_rad: f64) -> f64 {
    if exponent == 0.0 {
        return 0.0;
    }
    let base = family.base(offset_rad);
    if base <= 0.0 {
        return GAIN_FLOOR_DB;
    }
    10.0 * exponent * base.log10()
}

fn validate_table(samples: &[(f64, f64)], path: &str, out: &mut Vec<Violation>) {
    if samples.len() < 2 {
        out.push(Violation::new(path, "needs at least two samples"));
        return;
    }
    for (i, (a, g)) in samples.iter().enumerate() {
        if !a.is_finite() || !g.is_finite() {
            out.push(Violation::new(format!("{path}[{i}]"), "angle and gain must be finite"));
        } else if *g > 0.0 {
            out.push(Violation::new(
                format!("{path}[{i}]"),
                format!("relative gain must be <= 0 dB, got {g}"),
            ));
        }
    }
    if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
        out.push(Violation::new(path, "angles must be strictly increasing"));
    }
    let first = samples[0];
    let last = samples[samples.len() - 1];
    if first.0 != -180.0 || last.0 != 180.0 {
        out.push(Violation::new(path, "samples must span exactly [-180, 180]"));
    }
    if first.1 != last.1 {
        out.push(Violation::new(
            path,
            "gain at -180 and 180 must be equal (periodic closure)",
        ));
    }
    if !samples.iter().any(|&(a, g)| a == 0.0 && g == 0.0) {
        out.push(Violation::new(path, "must contain the boresight sample (0, 0)"));
    }
}

/// Linear interpolation in dB between the samples bracketing `angle`.
fn interpolate(samples: &[(f64, f64)], angle: f64) -> f64 {
    let idx = samples.partition_point(|&(a, _)| a < angle);
    if idx == 0 {
        return samples[0].1;
    }
    if idx == samples.len() {
        return samples[samples.len() - 1].1;
    }
    let (a1, g1) = samples[idx];
    if a1 == angle {
        return g1;
    }
    let (a0, g0) = samples[idx - 1];
    g0 + (g1 - g0) * (angle - a0) / (a1 - a0)
}

/// Find the exponent that places the half-power points at `±hpbw_deg / 2`.
///
/// Solved by bisection on the exponent until the gain at the half-power
/// angle is within 1e-9 dB of [`HALF_POWER_DB`].
pub fn calibrate_exponent(family: ParametricFamily, hpbw_deg: f64) -> Result<f64> {
    let unachievable = || Error::UnachievableBeamwidth {
        family: family.name(),
        hpbw_deg,
    };
    if !hpbw_deg.is_finite() || hpbw_deg <= 0.0 {
        return Err(unachievable());
    }
    let half = (hpbw_deg / 2.0).to_radians();
    let max_half = match family {
        ParametricFamily::Cardioid => std::f64::consts::PI,
        ParametricFamily::Dipole => std::f64::consts::FRAC_PI_2,
    };
    if half >= max_half {
        return Err(unachievable());
    }
    let base = family.base(half);
    if base <= 0.0 || base >= 1.0 {
        return Err(unachievable());
    }
    let gain_at = |k: f64| 10.0 * k * base.log10();

    let mut lo = family.min_exponent();
    if gain_at(lo) < HALF_POWER_DB - CALIBRATION_TOLERANCE_DB {
        // already narrower than requested at the smallest legal exponent
        return Err(unachievable());
    }
    let mut hi = lo.max(1.0);
    while gain_at(hi) > HALF_POWER_DB {
        lo = hi;
        hi *= 2.0;
        if hi > 1e15 {
            return Err(unachievable());
        }
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let err = gain_at(mid) - HALF_POWER_DB;
        if err.abs() < CALIBRATION_TOLERANCE_DB {
            return Ok(mid);
        }
        if err > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The user-facing antenna description attached to every node.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaConfig {
    pub pattern: PatternFamily,
    /// Boresight direction, normalized into (-180, 180].
    pub orientation_deg: f64,
    pub peak_gain_dbi: f64,
    /// Half-power beamwidth. Determines the exponent of parametric
    /// families; informational for tables; always 360 for omni.
    pub beamwidth_deg: f64,
}

impl AntennaConfig {
    pub fn omni(peak_gain_dbi: f64) -> Self {
        Self {
            pattern: PatternFamily::Omni,
            orientation_deg: 0.0,
            peak_gain_dbi,
            beamwidth_deg: 360.0,
        }
    }

    /// Parametric pattern whose exponent is calibrated from the beamwidth.
    pub fn parametric(
        family: ParametricFamily,
        orientation_deg: f64,
        peak_gain_dbi: f64,
        beamwidth_deg: f64,
    ) -> Result<Self> {
        let exponent = calibrate_exponent(family, beamwidth_deg)?;
        Ok(Self {
            pattern: family.with_exponent(exponent),
            orientation_deg: normalize_deg(orientation_deg)?,
            peak_gain_dbi,
            beamwidth_deg,
        })
    }

    pub fn table(
        samples: Vec<(f64, f64)>,
        orientation_deg: f64,
        peak_gain_dbi: f64,
        beamwidth_deg: f64,
    ) -> Result<Self> {
        let cfg = Self {
            pattern: PatternFamily::Table { samples },
            orientation_deg: normalize_deg(orientation_deg)?,
            peak_gain_dbi,
            beamwidth_deg,
        };
        let mut v = Vec::new();
        cfg.validate("antenna", &mut v);
        if v.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(v))
        }
    }

    /// Same antenna rotated to face `orientation_deg`.
    pub fn facing(mut self, orientation_deg: f64) -> Result<Self> {
        self.orientation_deg = normalize_deg(orientation_deg)?;
        Ok(self)
    }

    pub fn validate(&self, path: &str, out: &mut Vec<Violation>) {
        self.pattern.validate(&format!("{path}.pattern"), out);
        if !self.orientation_deg.is_finite() || self.orientation_deg <= -180.0 || self.orientation_deg > 180.0 {
            out.push(Violation::new(
                format!("{path}.orientation_deg"),
                format!("must lie in (-180, 180], got {}", self.orientation_deg),
            ));
        }
        if !self.peak_gain_dbi.is_finite() {
            out.push(Violation::new(format!("{path}.peak_gain_dbi"), "must be finite"));
        }
        if !self.beamwidth_deg.is_finite() || self.beamwidth_deg <= 0.0 || self.beamwidth_deg > 360.0 {
            out.push(Violation::new(
                format!("{path}.beamwidth_deg"),
                format!("must lie in (0, 360], got {}", self.beamwidth_deg),
            ));
        } else if self.pattern.is_omni() && self.beamwidth_deg != 360.0 {
            out.push(Violation::new(
                format!("{path}.beamwidth_deg"),
                "must be 360 for an omni antenna",
            ));
        }
    }

    /// Absolute gain (dBi) towards the world-frame `bearing_deg`.
    pub fn gain_dbi(&self, bearing_deg: f64) -> Result<f64> {
        let offset = normalize_deg(bearing_deg - self.orientation_deg)?;
        Ok(self.peak_gain_dbi + self.pattern.relative_gain_db(offset)?)
    }

    /// Offset of `bearing_deg` from boresight, in (-180, 180].
    pub fn offset_deg(&self, bearing_deg: f64) -> Result<f64> {
        normalize_deg(bearing_deg - self.orientation_deg)
    }

    /// World-frame `(angle_deg, gain_dbi)` pairs over [-180, 180).
    pub fn sample_pattern(&self, step_deg: f64) -> Result<Vec<(f64, f64)>> {
        let count = samples_per_turn(step_deg)?;
        (0..count)
            .map(|i| {
                let angle = -180.0 + i as f64 * step_deg;
                Ok((angle, self.gain_dbi(angle)?))
            })
            .collect()
    }
}

fn samples_per_turn(step_deg: f64) -> Result<usize> {
    if !step_deg.is_finite() || step_deg <= 0.0 || step_deg > 360.0 {
        return Err(Error::InvalidInput(format!(
            "pattern step must lie in (0, 360], got {step_deg}"
        )));
    }
    let n = (360.0 / step_deg).round();
    if (n * step_deg - 360.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "pattern step {step_deg} does not divide 360"
        )));
    }
    Ok(n as usize)
}

/// CSV rendering of [`AntennaConfig::sample_pattern`] output.
pub fn pattern_csv(samples: &[(f64, f64)]) -> String {
    let mut out = String::from("angle_deg,gain_dbi\n");
    for (a, g) in samples {
        out.push_str(&format!("{a:.6},{g:.6}\n"));
    }
    out
}
