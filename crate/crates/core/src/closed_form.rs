//! Exact translating-graph families used as oracles and barriers.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Margin below the strip half-width at which evaluation is refused, so
/// that `-inf` never leaks into sampled grids.
const STRIP_GUARD: f64 = 1e-12;

/// The closed-form translator families over strips.
///
/// * `GrimReaper`: `log cos y` on `|y| < pi/2`.
/// * `ShiftedGrimReaper(b)`: `log cos y - log cos b`, vanishing on `y = ±b`;
///   requires `0 < b < pi/2`.
/// * `TiltedGrimReaper(b, ±)`: `(2b/pi)^2 log cos(y pi / (2b)) ± x tanθ`
///   over `|y| < b` with `tanθ = sqrt((2b/pi)^2 - 1)`; requires `b >= pi/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ClosedFormFamily {
    GrimReaper,
    ShiftedGrimReaper { b: f64 },
    TiltedGrimReaper { b: f64, positive_tilt: bool },
}

impl ClosedFormFamily {
    pub fn shifted(b: f64) -> Result<Self> {
        if !(b > 0.0 && b < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "shifted grim reaper requires 0 < b < pi/2, got b = {b}"
            )));
        }
        Ok(ClosedFormFamily::ShiftedGrimReaper { b })
    }

    pub fn tilted(b: f64, positive_tilt: bool) -> Result<Self> {
        if !(b >= FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!(
                "tilted grim reaper requires b >= pi/2, got b = {b}"
            )));
        }
        Ok(ClosedFormFamily::TiltedGrimReaper { b, positive_tilt })
    }

    /// Half-width of the strip of definition.
    pub fn strip_half_width(self) -> f64 {
        match self {
            ClosedFormFamily::GrimReaper | ClosedFormFamily::ShiftedGrimReaper { .. } => FRAC_PI_2,
            ClosedFormFamily::TiltedGrimReaper { b, .. } => b,
        }
    }

    fn check_strip(self, y: f64) -> Result<()> {
        let hw = self.strip_half_width();
        if y.abs() >= hw - STRIP_GUARD {
            return Err(Error::OutsideDomain(format!(
                "y = {y} is outside the open strip |y| < {hw}"
            )));
        }
        Ok(())
    }

    pub fn evaluate(self, x: f64, y: f64) -> Result<f64> {
        self.check_strip(y)?;
        Ok(match self {
            ClosedFormFamily::GrimReaper => y.cos().ln(),
            ClosedFormFamily::ShiftedGrimReaper { b } => y.cos().ln() - b.cos().ln(),
            ClosedFormFamily::TiltedGrimReaper { b, positive_tilt } => {
                let k = 2.0 * b / PI;
                let slope = tilt_slope(b).expect("b >= pi/2 checked at construction");
                let tilt = if positive_tilt { slope } else { -slope };
                k * k * (y * PI / (2.0 * b)).cos().ln() + x * tilt
            }
        })
    }

    /// Gradient of the height function.
    pub fn gradient(self, x: f64, y: f64) -> Result<[f64; 2]> {
        self.check_strip(y)?;
        let _ = x;
        Ok(match self {
            ClosedFormFamily::GrimReaper | ClosedFormFamily::ShiftedGrimReaper { .. } => {
                [0.0, -y.tan()]
            }
            ClosedFormFamily::TiltedGrimReaper { b, positive_tilt } => {
                let k = 2.0 * b / PI;
                let slope = tilt_slope(b).expect("b >= pi/2 checked at construction");
                let tilt = if positive_tilt { slope } else { -slope };
                [tilt, -k * (y * PI / (2.0 * b)).tan()]
            }
        })
    }
}

/// Free-function form of [`ClosedFormFamily::evaluate`].
pub fn evaluate(fam: ClosedFormFamily, x: f64, y: f64) -> Result<f64> {
    fam.evaluate(x, y)
}

/// Asymptotic slope `sqrt((2b/pi)^2 - 1)` of the tilted family. Strips with
/// `b < pi/2` carry no complete translating graph, so the slope is undefined
/// there.
pub fn tilt_slope(b: f64) -> Result<f64> {
    if !(b >= FRAC_PI_2) {
        return Err(Error::OutsideDomain(format!(
            "tilt slope undefined for b = {b} < pi/2"
        )));
    }
    let k = 2.0 * b / PI;
    Ok((k * k - 1.0).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grim_reaper_vanishes_on_axis() {
        for x in [-3.0, 0.0, 7.5] {
            assert_eq!(ClosedFormFamily::GrimReaper.evaluate(x, 0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn tilted_at_critical_width_is_grim_reaper() {
        let fam = ClosedFormFamily::tilted(FRAC_PI_2, true).unwrap();
        for &(x, y) in &[(0.0, 0.3), (5.0, -1.2), (-2.0, 0.9)] {
            let a = fam.evaluate(x, y).unwrap();
            let b = ClosedFormFamily::GrimReaper.evaluate(x, y).unwrap();
            assert!((a - b).abs() < 1e-14, "({x},{y}): {a} vs {b}");
        }
    }

    #[test]
    fn shifted_values() {
        let b = std::f64::consts::FRAC_PI_4;
        let fam = ClosedFormFamily::shifted(b).unwrap();
        assert!(fam.evaluate(0.0, b).unwrap().abs() < 1e-15);
        let c = fam.evaluate(0.0, 0.0).unwrap();
        assert!((c - 0.5 * 2.0f64.ln()).abs() < 1e-15);
        assert!((c - 0.34657).abs() < 1e-5);
    }

    #[test]
    fn shifted_vanishes_on_both_walls() {
        let fam = ClosedFormFamily::shifted(0.6).unwrap();
        assert!(fam.evaluate(1.0, 0.6).unwrap().abs() < 1e-15);
        assert!(fam.evaluate(1.0, -0.6).unwrap().abs() < 1e-15);
    }

    #[test]
    fn tilt_slope_values() {
        assert_eq!(tilt_slope(FRAC_PI_2).unwrap(), 0.0);
        assert!((tilt_slope(PI).unwrap() - 3.0f64.sqrt()).abs() < 1e-15);
        assert!((tilt_slope(PI).unwrap() - 1.7320508).abs() < 1e-7);
        assert!(tilt_slope(1.0).is_err());
    }

    #[test]
    fn strip_guard_rejects_walls() {
        assert!(ClosedFormFamily::GrimReaper.evaluate(0.0, FRAC_PI_2).is_err());
        let fam = ClosedFormFamily::tilted(PI, true).unwrap();
        assert!(fam.evaluate(0.0, PI).is_err());
        assert!(fam.evaluate(0.0, PI - 1e-3).is_ok());
    }

    #[test]
    fn evenness_in_y() {
        let fams = [
            ClosedFormFamily::GrimReaper,
            ClosedFormFamily::shifted(0.7).unwrap(),
            ClosedFormFamily::tilted(2.0, true).unwrap(),
        ];
        for fam in fams {
            for y in [0.1, 0.45, 1.1] {
                if y >= fam.strip_half_width() {
                    continue;
                }
                let a = fam.evaluate(1.3, y).unwrap();
                let b = fam.evaluate(1.3, -y).unwrap();
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tilted_is_affine_in_x() {
        let fam = ClosedFormFamily::tilted(PI, true).unwrap();
        let s = tilt_slope(PI).unwrap();
        let base = fam.evaluate(0.0, 0.5).unwrap();
        for x in [1.0, -2.0, 4.5] {
            let v = fam.evaluate(x, 0.5).unwrap();
            assert!((v - base - s * x).abs() < 1e-12);
        }
        let neg = ClosedFormFamily::tilted(PI, false).unwrap();
        assert!((neg.evaluate(1.0, 0.5).unwrap() - base + s).abs() < 1e-12);
    }
}
