//! Physical couplings shared by every observable.

use serde::{Deserialize, Serialize};

use crate::error::{DefectError, Result};

/// Relative tolerance on `mV² = z_ratio·(e0·ṽ)²` when both sides are supplied.
pub const MASS_RELATION_RTOL: f64 = 1e-12;

/// Gauge coupling and vector mass in natural units (ħ = c = 1).
///
/// When the mass is derived from the renormalization ratio `Z₃/Z_χ` and the
/// order parameter `ṽ`, those inputs are kept alongside for provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    e0: f64,
    mv: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v_tilde: Option<f64>,
}

impl PhysicalParams {
    pub fn new(e0: f64, mv: f64) -> Result<Self> {
        if e0 == 0.0 || !e0.is_finite() {
            return Err(DefectError::ZeroCoupling(e0));
        }
        if !(mv >= 0.0) || !mv.is_finite() {
            return Err(DefectError::NegativeMass(mv));
        }
        Ok(Self { e0, mv, z_ratio: None, v_tilde: None })
    }

    /// Derive `mV = sqrt(z_ratio)·|e0·ṽ|` from the Anderson–Higgs–Kibble relation.
    pub fn from_microscopic(e0: f64, z_ratio: f64, v_tilde: f64) -> Result<Self> {
        if e0 == 0.0 || !e0.is_finite() {
            return Err(DefectError::ZeroCoupling(e0));
        }
        if !(z_ratio > 0.0) || !z_ratio.is_finite() {
            return Err(DefectError::NonPositiveZRatio(z_ratio));
        }
        if !v_tilde.is_finite() {
            return Err(DefectError::NegativeMass(v_tilde));
        }
        let mv = z_ratio.sqrt() * (e0 * v_tilde).abs();
        Ok(Self { e0, mv, z_ratio: Some(z_ratio), v_tilde: Some(v_tilde) })
    }

    /// Accept an explicit mass together with the microscopic inputs, checking they agree.
    pub fn with_microscopic(e0: f64, mv: f64, z_ratio: f64, v_tilde: f64) -> Result<Self> {
        let derived = Self::from_microscopic(e0, z_ratio, v_tilde)?;
        Self::new(e0, mv)?;
        let expected = z_ratio * (e0 * v_tilde).powi(2);
        let given = mv * mv;
        if (given - expected).abs() > MASS_RELATION_RTOL * expected.abs().max(given.abs()) {
            return Err(DefectError::MassRelationViolated { given: mv, expected: derived.mv });
        }
        Ok(Self { mv, ..derived })
    }

    pub fn e0(&self) -> f64 {
        self.e0
    }

    pub fn mv(&self) -> f64 {
        self.mv
    }

    pub fn z_ratio(&self) -> Option<f64> {
        self.z_ratio
    }

    pub fn v_tilde(&self) -> Option<f64> {
        self.v_tilde
    }

    pub fn is_massive(&self) -> bool {
        self.mv > 0.0
    }

    /// Check the stored invariants; used after deserialization.
    pub fn validate(&self) -> Result<()> {
        match (self.z_ratio, self.v_tilde) {
            (Some(z), Some(v)) => Self::with_microscopic(self.e0, self.mv, z, v).map(|_| ()),
            _ => Self::new(self.e0, self.mv).map(|_| ()),
        }
    }
}

pub fn make_params(e0: f64, mv: f64) -> Result<PhysicalParams> {
    PhysicalParams::new(e0, mv)
}

pub fn params_from_microscopic(e0: f64, z_ratio: f64, v_tilde: f64) -> Result<PhysicalParams> {
    PhysicalParams::from_microscopic(e0, z_ratio, v_tilde)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn construction_and_boundaries() {
        let p = make_params(1.0, 1.0).unwrap();
        assert_eq!((p.e0(), p.mv()), (1.0, 1.0));
        let massless = make_params(2.0, 0.0).unwrap();
        assert!(!massless.is_massive());
        assert_eq!(make_params(0.0, 1.0), Err(DefectError::ZeroCoupling(0.0)));
        assert!(matches!(make_params(1.0, -0.5), Err(DefectError::NegativeMass(_))));
        assert!(make_params(1.0, f64::NAN).is_err());
    }

    #[test]
    fn microscopic_relation_examples() {
        // oracle: recompute sqrt(z)*|e0 v| by hand
        for (e0, z, v) in [(1.0, 1.0, 1.0), (2.0, 1.0, 0.5), (1.0, 4.0, 0.5)] {
            let p = params_from_microscopic(e0, z, v).unwrap();
            let expected = (z * e0 * e0 * v * v).sqrt();
            assert!((p.mv() - expected).abs() < 1e-15);
            assert!((p.mv() - 1.0).abs() < 1e-15);
        }
        assert!(matches!(params_from_microscopic(1.0, 0.0, 1.0), Err(DefectError::NonPositiveZRatio(_))));
        assert!(matches!(params_from_microscopic(1.0, -2.0, 1.0), Err(DefectError::NonPositiveZRatio(_))));
    }

    #[test]
    fn explicit_mass_must_match_relation() {
        assert!(PhysicalParams::with_microscopic(2.0, 1.0, 1.0, 0.5).is_ok());
        assert!(matches!(
            PhysicalParams::with_microscopic(2.0, 1.1, 1.0, 0.5),
            Err(DefectError::MassRelationViolated { .. })
        ));
    }

    proptest! {
        #[test]
        fn squared_mass_reproduces_relation(
            e0 in prop_oneof![-10.0..-1e-3f64, 1e-3..10.0f64],
            z in 1e-3..100.0f64,
            v in -10.0..10.0f64,
        ) {
            let p = params_from_microscopic(e0, z, v).unwrap();
            let expected = z * (e0 * v).powi(2);
            let got = p.mv() * p.mv();
            prop_assert!((got - expected).abs() <= 1e-12 * expected.max(f64::MIN_POSITIVE));
            prop_assert!(p.validate().is_ok());
        }
    }
}
