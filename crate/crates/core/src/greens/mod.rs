//! Static Yukawa Green's functions.
//!
//! For time-independent sources the causal propagator reduces to the
//! Green's function `G_m` of `(−∇² + m²)`. Its overall sign is fixed so that
//! the straight vortex yields `F₁₂ = +(m²/e₀)K₀(mρ)`.

mod bessel;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub(crate) use bessel::k0_k1;
pub use bessel::{bessel_k0, bessel_k1};

use crate::error::{DefectError, Result};
use crate::quadrature::integrate_adaptive;
use crate::Vec3;

/// `e^{−m r} / (4π r)`, the 3D Yukawa (screened Coulomb) kernel.
pub fn yukawa3(r: f64, m: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(DefectError::NonPositiveRadius(r));
    }
    Ok((-m * r).exp() / (4.0 * PI * r))
}

/// `K₀(m ρ) / (2π)`, the kernel of `(−∇² + m²)` in the plane.
pub fn yukawa2(rho: f64, m: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(DefectError::NonPositiveRadius(rho));
    }
    if !(m > 0.0) {
        return Err(DefectError::ZeroMass2D);
    }
    Ok(k0_k1(m * rho).0 / (2.0 * PI))
}

/// `∇ₓ G_m(|x − y|)` with `d = x − y`: `−(1 + m|d|) e^{−m|d|} d / (4π |d|³)`.
pub fn yukawa3_gradient(d: &Vec3, m: f64) -> Result<Vec3> {
    let r = d.norm();
    if !(r > 0.0) {
        return Err(DefectError::ZeroDisplacement);
    }
    Ok(d * (-(1.0 + m * r) * (-m * r).exp() / (4.0 * PI * r * r * r)))
}

/// Integrate the 3D kernel along a straight line: `∫_{−L}^{L} G_m(√(ρ² + σ²)) dσ`.
///
/// Tends to [`yukawa2`]`(ρ, m)` from below as `L → ∞`; the missing tail is
/// bounded by `e^{−mL}/(2π mL)`.
pub fn dimension_reduction_check(m: f64, rho: f64, half_length: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(DefectError::ZeroMass2D);
    }
    if !(rho > 0.0) {
        return Err(DefectError::NonPositiveRadius(rho));
    }
    if !(half_length > 0.0) {
        return Err(DefectError::NonPositiveRadius(half_length));
    }
    let kernel = |s: f64| {
        let r = rho.hypot(s);
        (-m * r).exp() / (4.0 * PI * r)
    };
    // panel break at σ = ρ where the kernel turns from flat to decaying
    let split = rho.min(half_length);
    let near = integrate_adaptive(&kernel, 0.0, split, 1e-15, 0.0);
    let far = if half_length > split { integrate_adaptive(&kernel, split, half_length, 1e-15, 0.0) } else { 0.0 };
    Ok(2.0 * (near + far))
}

/// Which kernel and derivative to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dimension {
    Two,
    Three,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivative {
    Value,
    Gradient,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    mass: f64,
    dimension: Dimension,
    derivative: Derivative,
}

impl KernelSpec {
    pub fn new(mass: f64, dimension: Dimension, derivative: Derivative) -> Result<Self> {
        if !(mass >= 0.0) {
            return Err(DefectError::NegativeMass(mass));
        }
        if dimension == Dimension::Two && derivative == Derivative::Gradient {
            return Err(DefectError::InvalidGrid("2D kernel gradient is not provided".into()));
        }
        if dimension == Dimension::Two && mass == 0.0 {
            return Err(DefectError::ZeroMass2D);
        }
        Ok(Self { mass, dimension, derivative })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Kernel value at displacement `d` (for 2D only `(d₁, d₂)` are used).
    pub fn value(&self, d: &Vec3) -> Result<f64> {
        match self.dimension {
            Dimension::Three => yukawa3(d.norm(), self.mass),
            Dimension::Two => yukawa2(d[0].hypot(d[1]), self.mass),
        }
    }

    pub fn gradient(&self, d: &Vec3) -> Result<Vec3> {
        yukawa3_gradient(d, self.mass)
    }
}
