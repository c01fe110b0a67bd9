//! The boson condensation function `f` and its gradient.
//!
//! Around a defect line `f` is path dependent, but `∇f` is single valued:
//!
//! ```text
//! ∇f(x) = ½ ∫ dσ y′(σ) × (x − y(σ)) / |x − y(σ)|³
//! ```
//!
//! For the straight line along x₃ this is `θ̂/ρ` and `f` is the cylindrical angle.

mod residual;
mod topology;

use std::f64::consts::PI;

pub use residual::{harmonic_residual, massless_compatibility, massless_compatibility_masked, CompatibilityReport};
pub(crate) use topology::segment_curve_distance;
pub use topology::{
    charge_by_intersection, continuity_check, winding_number, ClosedSurface, ContinuityReport, LineSourceTensor,
    WindingNumber, TANGENCY_TOL_RAD,
};

use crate::curve::DefectCurve;
use crate::error::{DefectError, Result};
use crate::quadrature::QuadraturePolicy;
use crate::Vec3;

/// `∇f` of the straight vortex on the x₃ axis: `(−x₂/ρ², x₁/ρ², 0)`.
pub fn grad_f_straight(x: &Vec3) -> Result<Vec3> {
    let rho2 = x[0] * x[0] + x[1] * x[1];
    if rho2 == 0.0 {
        return Err(DefectError::OnAxis(*x));
    }
    Ok(Vec3::new(-x[1] / rho2, x[0] / rho2, 0.0))
}

/// Principal branch of the straight-vortex condensation function, `atan2(x₂, x₁)`.
///
/// Values lie in `(−π, π]`; the cut runs along the negative x₁ half-plane and
/// points exactly on it (including `x₂ = −0`) map to `+π`.
pub fn f_straight(x: &Vec3) -> Result<f64> {
    if x[0] == 0.0 && x[1] == 0.0 {
        return Err(DefectError::OnAxis(*x));
    }
    let theta = x[1].atan2(x[0]);
    Ok(if theta == -PI { PI } else { theta })
}

/// `∇f` generated by a single defect curve.
pub fn grad_f_line(curve: &DefectCurve, x: &Vec3, quad: &QuadraturePolicy) -> Result<Vec3> {
    check_point(curve, x, quad)?;
    match curve {
        DefectCurve::StraightZ { through } => grad_f_straight(&Vec3::new(x[0] - through[0], x[1] - through[1], x[2])),
        DefectCurve::Polyline(poly) => {
            let mut acc = Vec3::zeros();
            for (a, b) in poly.segments() {
                let t = (b - a).normalize();
                quad.visit_segment(a, b, x, &mut |y, w| {
                    let d = x - y;
                    let r = d.norm();
                    acc += t.cross(&d) * (w / (r * r * r));
                });
            }
            Ok(acc * 0.5)
        }
    }
}

/// Reject points inside the exclusion radius and too-short infinite-line surrogates.
pub(crate) fn check_point(curve: &DefectCurve, x: &Vec3, quad: &QuadraturePolicy) -> Result<()> {
    let clearance = curve.clearance(x);
    if clearance < quad.exclusion_radius || clearance == 0.0 {
        return Err(DefectError::PointOnCurve { point: *x, clearance, radius: quad.exclusion_radius });
    }
    if quad.min_truncation > 0.0 && curve.has_endpoints() {
        let half_length = 0.5 * curve.length();
        if half_length < quad.min_truncation {
            return Err(DefectError::TruncationTooShort { half_length, required: quad.min_truncation });
        }
    }
    Ok(())
}

/// One additive contribution to the condensation function.
#[derive(Debug, Clone, PartialEq)]
pub enum CondensateSource {
    /// Topologically singular `f` sourced by a defect line.
    Defect(DefectCurve),
    /// Regular harmonic `f = g·x`.
    Linear { gradient: Vec3 },
    /// Regular harmonic `f = x₁² − x₂²`.
    Saddle,
    /// Regular, non-harmonic `f = x_axis²` (its Laplacian is 2).
    Square { axis: usize },
}

impl CondensateSource {
    fn grad(&self, x: &Vec3, quad: &QuadraturePolicy) -> Result<Vec3> {
        match self {
            CondensateSource::Defect(c) => grad_f_line(c, x, quad),
            CondensateSource::Linear { gradient } => Ok(*gradient),
            CondensateSource::Saddle => Ok(Vec3::new(2.0 * x[0], -2.0 * x[1], 0.0)),
            CondensateSource::Square { axis } => {
                let mut g = Vec3::zeros();
                g[*axis] = 2.0 * x[*axis];
                Ok(g)
            }
        }
    }

    fn value(&self, x: &Vec3) -> Option<f64> {
        match self {
            CondensateSource::Defect(DefectCurve::StraightZ { through }) => {
                f_straight(&Vec3::new(x[0] - through[0], x[1] - through[1], x[2])).ok()
            }
            CondensateSource::Defect(DefectCurve::Polyline(_)) => None,
            CondensateSource::Linear { gradient } => Some(gradient.dot(x)),
            CondensateSource::Saddle => Some(x[0] * x[0] - x[1] * x[1]),
            CondensateSource::Square { axis } => Some(x[*axis] * x[*axis]),
        }
    }
}

/// Deferred evaluation of `∇f` for a superposition of sources under a fixed quadrature policy.
///
/// Evaluation is a pure function of the point, so providers can be shared
/// freely across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GradFProvider {
    sources: Vec<CondensateSource>,
    policy: QuadraturePolicy,
}

impl GradFProvider {
    pub fn new(sources: Vec<CondensateSource>, policy: QuadraturePolicy) -> Self {
        Self { sources, policy }
    }

    pub fn for_curve(curve: DefectCurve, policy: QuadraturePolicy) -> Self {
        Self::new(vec![CondensateSource::Defect(curve)], policy)
    }

    pub fn for_curves(curves: impl IntoIterator<Item = DefectCurve>, policy: QuadraturePolicy) -> Self {
        Self::new(curves.into_iter().map(CondensateSource::Defect).collect(), policy)
    }

    /// Regular provider `f = g·x`.
    pub fn linear(gradient: Vec3) -> Self {
        Self::new(vec![CondensateSource::Linear { gradient }], QuadraturePolicy::default())
    }

    pub fn sources(&self) -> &[CondensateSource] {
        &self.sources
    }

    pub fn policy(&self) -> &QuadraturePolicy {
        &self.policy
    }

    pub fn with_policy(mut self, policy: QuadraturePolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn curves(&self) -> impl Iterator<Item = &DefectCurve> {
        self.sources.iter().filter_map(|s| match s {
            CondensateSource::Defect(c) => Some(c),
            _ => None,
        })
    }

    /// True when no source carries a topological singularity.
    pub fn is_regular(&self) -> bool {
        self.curves().next().is_none()
    }

    /// Distance from a polygon to the nearest defect line.
    pub fn contour_clearance(&self, contour: &crate::contour::Contour) -> f64 {
        contour
            .edges()
            .flat_map(|(a, b)| self.curves().map(move |c| segment_curve_distance(c, &a, &b)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance to the nearest defect line (infinite for regular providers).
    pub fn clearance(&self, x: &Vec3) -> f64 {
        self.curves().map(|c| c.clearance(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn grad(&self, x: &Vec3) -> Result<Vec3> {
        let mut total = Vec3::zeros();
        for s in &self.sources {
            total += s.grad(x, &self.policy)?;
        }
        Ok(total)
    }

    /// Closed-form `f` at `x` when every source has one (principal branch for straight lines).
    pub fn reference_value(&self, x: &Vec3) -> Option<f64> {
        self.sources.iter().map(|s| s.value(x)).sum()
    }
}
