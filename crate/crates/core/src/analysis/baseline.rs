//! Checked-in tolerance baseline for grid residuals.
//!
//! Each tolerance is `constant · (scale)^order`, where the constant was
//! measured once on the straight vortex and then multiplied by `margin`.

use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{DefectError, Result};
use crate::params::PhysicalParams;

/// Residuals are evaluated only where the clearance is at least this many `1/m_V`.
pub const EVAL_CLEARANCE: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub order: f64,
    /// Calibrated constant including the safety margin.
    pub constant: f64,
    /// Constant actually measured during calibration.
    pub measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub margin: f64,
    /// `|∂_j F_ji + j_i| ≤ C (m h)^p · m³/|e₀|`
    pub maxwell: Tolerance,
    /// `|∇·j| ≤ C (m h)^p · m⁴/|e₀|`
    pub conservation: Tolerance,
    /// `|∇²_h f| ≤ C h^p / r_min^{p+2}` for a harmonic `f` with core distance `r_min`
    pub harmonic: Tolerance,
}

const BASELINE_JSON: &str = include_str!("../../baseline/tolerances.json");

static BASELINE: LazyLock<Result<Baseline>> = LazyLock::new(|| parse_baseline(BASELINE_JSON));

pub fn parse_baseline(text: &str) -> Result<Baseline> {
    let b: Baseline = serde_json::from_str(text).map_err(|e| DefectError::Baseline(e.to_string()))?;
    for t in [b.maxwell, b.conservation, b.harmonic] {
        if !(t.constant > 0.0 && t.order > 0.0) {
            return Err(DefectError::Baseline(format!("invalid tolerance {t:?}")));
        }
    }
    Ok(b)
}

/// The checked-in baseline.
pub fn baseline() -> Result<&'static Baseline> {
    BASELINE.as_ref().map_err(Clone::clone)
}

impl Baseline {
    pub fn maxwell_tolerance(&self, h: f64, p: &PhysicalParams) -> f64 {
        let m = p.mv();
        self.maxwell.constant * (m * h).powf(self.maxwell.order) * m.powi(3) / p.e0().abs()
    }

    pub fn conservation_tolerance(&self, h: f64, p: &PhysicalParams) -> f64 {
        let m = p.mv();
        self.conservation.constant * (m * h).powf(self.conservation.order) * m.powi(4) / p.e0().abs()
    }

    pub fn harmonic_tolerance(&self, h: f64, r_min: f64) -> f64 {
        let t = self.harmonic;
        t.constant * h.powf(t.order) / r_min.powf(t.order + 2.0)
    }
}

/// Re-measure the constants on the straight vortex over `h ∈ {0.2, 0.1, 0.05}`.
pub fn calibrate(margin: f64) -> Result<Baseline> {
    let mut measured = [0.0f64; 3];
    for h in [0.2, 0.1, 0.05] {
        let r = super::convergence::calibration_residuals(h)?;
        let h2 = h * h;
        measured[0] = measured[0].max(r[0] / h2);
        measured[1] = measured[1].max(r[1] / h2);
        measured[2] = measured[2].max(r[2] * EVAL_CLEARANCE.powi(4) / h2);
    }
    let tol = |m: f64| Tolerance { order: 2.0, constant: margin * m, measured: m };
    Ok(Baseline { margin, maxwell: tol(measured[0]), conservation: tol(measured[1]), harmonic: tol(measured[2]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_reproduces_checked_in_baseline() {
        let b = baseline().unwrap();
        let fresh = calibrate(b.margin).unwrap();
        let json = serde_json::to_string_pretty(&fresh).unwrap();
        for (old, new) in
            [(b.maxwell, fresh.maxwell), (b.conservation, fresh.conservation), (b.harmonic, fresh.harmonic)]
        {
            assert!((old.measured / new.measured - 1.0).abs() < 1e-9, "baseline is stale; recalibrated:\n{json}");
        }
    }

    #[test]
    fn checked_in_baseline_parses() {
        let b = baseline().unwrap();
        assert_eq!(b.maxwell.order, 2.0);
        for t in [b.maxwell, b.conservation, b.harmonic] {
            assert!((t.constant / t.measured - b.margin).abs() < 1e-9);
        }
    }

    #[test]
    fn scaling_with_parameters() {
        let b = baseline().unwrap();
        let p1 = PhysicalParams::new(1.0, 1.0).unwrap();
        let p2 = PhysicalParams::new(2.0, 1.0).unwrap();
        assert!((b.maxwell_tolerance(0.1, &p1) - 2.0 * b.maxwell_tolerance(0.1, &p2)).abs() < 1e-15);
        let t1 = b.maxwell_tolerance(0.1, &p1);
        assert!((b.maxwell_tolerance(0.05, &p1) - t1 / 4.0).abs() < 1e-15);
        assert!(parse_baseline("{}").is_err());
    }
}
