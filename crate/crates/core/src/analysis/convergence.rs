//! Empirical convergence orders against closed-form oracles.

use serde::Serialize;

use super::{divergence_field, max_norm, maxwell_residual_field, CheckReport};
use crate::condensate::{grad_f_line, grad_f_straight, harmonic_residual, GradFProvider};
use crate::curve::DefectCurve;
use crate::error::{DefectError, Result};
use crate::fields::{field_strength_line, field_strength_straight, fields_on_grid};
use crate::grid::{FieldGrid, Grid3};
use crate::params::PhysicalParams;
use crate::quadrature::{GaussOrder, QuadraturePolicy};
use crate::Vec3;

/// What to refine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Study {
    /// `∇·∇f` of the straight vortex versus grid spacing.
    HarmonicResidual,
    /// `∂_j F_ji + j_i` of the straight vortex versus grid spacing.
    MaxwellResidual { params: PhysicalParams },
    /// `∇·j` of the straight vortex versus grid spacing.
    CurrentConservation { params: PhysicalParams },
    /// `∇f` of a segment `[−L, L]` on the x₃ axis versus `L`, at distance `rho`.
    GradFTruncation { rho: f64 },
    /// `F₁₂` of the truncated axis (`L = 40/m`) versus segment length, without refinement.
    FieldStrengthStep { rho: f64, params: PhysicalParams, order: GaussOrder },
}

impl Study {
    pub fn name(&self) -> &'static str {
        match self {
            Study::HarmonicResidual => "harmonic_residual",
            Study::MaxwellResidual { .. } => "maxwell_residual",
            Study::CurrentConservation { .. } => "current_conservation",
            Study::GradFTruncation { .. } => "grad_f_truncation",
            Study::FieldStrengthStep { .. } => "field_strength_step",
        }
    }

    /// Errors shrink as the resolution grows (truncation length) rather than shrinks.
    fn grows(&self) -> bool {
        matches!(self, Study::GradFTruncation { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub study: Study,
    pub resolutions: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope `p` of `log error` against `log h` (or `−log L`).
    pub order: f64,
}

impl ConvergenceStudy {
    /// Passes when the fitted order is within `tolerance` of `expected`.
    pub fn report(&self, expected: f64, tolerance: f64) -> CheckReport {
        CheckReport::evaluate(format!("convergence/{}", self.study.name()), (self.order - expected).abs(), tolerance)
            .with_meta("order", self.order)
            .with_meta("expected_order", expected)
            .with_meta("resolutions", &self.resolutions)
            .with_meta("errors", &self.errors)
    }
}

/// Fit the convergence order of `study` over at least three resolutions.
pub fn convergence_study(study: &Study, resolutions: &[f64]) -> Result<ConvergenceStudy> {
    if resolutions.len() < 3 {
        return Err(DefectError::TooFewResolutions(resolutions.len()));
    }
    if let Some(&bad) = resolutions.iter().find(|r| !(**r > 0.0)) {
        return Err(DefectError::BadStep(bad));
    }
    let errors = match study {
        Study::HarmonicResidual | Study::MaxwellResidual { .. } | Study::CurrentConservation { .. } => {
            grid_errors(study, resolutions)?
        }
        Study::GradFTruncation { rho } => {
            let x = Vec3::new(*rho, 0.0, 0.0);
            let exact = grad_f_straight(&x)?;
            resolutions
                .iter()
                .map(|&l| {
                    let n = (2.0 * l).ceil().max(1.0) as usize;
                    let seg = DefectCurve::segment(Vec3::new(0.0, 0.0, -l), Vec3::new(0.0, 0.0, l), n)?;
                    Ok((grad_f_line(&seg, &x, &QuadraturePolicy::default())? - exact).norm())
                })
                .collect::<Result<Vec<_>>>()?
        }
        Study::FieldStrengthStep { rho, params, order } => {
            let x = Vec3::new(*rho, 0.0, 0.0);
            let exact = field_strength_straight(*rho, params)?;
            let policy = QuadraturePolicy { refine_ratio: 0.0, ..QuadraturePolicy::default() }.with_order(*order);
            resolutions
                .iter()
                .map(|&s| {
                    let line = DefectCurve::z_axis_surrogate(40.0 / params.mv(), s)?;
                    Ok((field_strength_line(&line, params, &x, &policy)?.f12 - exact).abs())
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let sign = if study.grows() { -1.0 } else { 1.0 };
    let xs: Vec<f64> = resolutions.iter().map(|r| sign * r.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(ConvergenceStudy { study: *study, resolutions: resolutions.to_vec(), errors, order: slope(&xs, &ys) })
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Box `x₁ ∈ [0.6, 3.0]`, `x₂ ∈ [−1.2, 1.2]` at `x₃ = 0`, clear of the axis by at least three coarse spacings.
const STUDY_ORIGIN: [f64; 2] = [0.6, -1.2];
const STUDY_EXTENT: f64 = 2.4;

fn grid_errors(study: &Study, hs: &[f64]) -> Result<Vec<f64>> {
    let coarse = hs.iter().cloned().fold(0.0, f64::max);
    let cells = STUDY_EXTENT / coarse;
    if (cells - cells.round()).abs() > 1e-9 {
        return Err(DefectError::InvalidGrid(format!("{coarse} does not divide the study box {STUDY_EXTENT}")));
    }
    let nc = cells.round() as usize + 1;
    let mut out = Vec::with_capacity(hs.len());
    for &h in hs {
        let ratio = coarse / h;
        if (ratio - ratio.round()).abs() > 1e-9 {
            return Err(DefectError::InvalidGrid(format!("{h} does not divide the coarsest spacing {coarse}")));
        }
        let n = (STUDY_EXTENT / h).round() as usize + 1;
        let grid = Grid3::new([STUDY_ORIGIN[0], STUDY_ORIGIN[1], -h], h, [n, n, 3])?;
        let residual = study_residual(study, &grid)?;
        let mut worst: f64 = 0.0;
        for i in 1..nc - 1 {
            for j in 1..nc - 1 {
                let x = Vec3::new(STUDY_ORIGIN[0] + i as f64 * coarse, STUDY_ORIGIN[1] + j as f64 * coarse, 0.0);
                let p = grid.locate(&x).ok_or(DefectError::GridMismatch)?;
                worst = residual.at(p).iter().fold(worst, |w, v| w.max(v.abs()));
            }
        }
        out.push(worst);
    }
    Ok(out)
}

fn study_residual(study: &Study, grid: &Grid3) -> Result<FieldGrid> {
    let gf = GradFProvider::for_curve(DefectCurve::straight_z(), QuadraturePolicy::default());
    match study {
        Study::HarmonicResidual => harmonic_residual(&gf, grid),
        Study::MaxwellResidual { params } => {
            let obs = fields_on_grid(&gf, params, grid)?;
            maxwell_residual_field(&obs.field_strength, &obs.current)
        }
        Study::CurrentConservation { params } => divergence_field(&fields_on_grid(&gf, params, grid)?.current),
        _ => unreachable!("not a grid study"),
    }
}

/// Straight-vortex residuals (Maxwell, `∇·j`, `∇·∇f`) with `m = e₀ = 1` on `[−3, 3]²`
/// at spacing `h`, restricted to clearance at least [`super::baseline::EVAL_CLEARANCE`].
pub(crate) fn calibration_residuals(h: f64) -> Result<[f64; 3]> {
    let n = (6.0 / h).round() as usize + 1;
    let grid = Grid3::new([-3.0, -3.0, -h], h, [n, n, 3])?;
    let p = PhysicalParams::new(1.0, 1.0)?;
    let gf = GradFProvider::for_curve(DefectCurve::straight_z(), QuadraturePolicy::default());
    let keep = |x: &Vec3| gf.clearance(x) >= super::baseline::EVAL_CLEARANCE;
    let obs = fields_on_grid(&gf, &p, &grid)?;
    let maxwell = maxwell_residual_field(&obs.field_strength, &obs.current)?.masked(keep);
    let div = divergence_field(&obs.current)?.masked(keep);
    let harmonic = harmonic_residual(&gf, &grid)?.masked(keep);
    Ok([max_norm(&maxwell).0, max_norm(&div).0, max_norm(&harmonic).0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn harmonic_order_two() {
        let s = convergence_study(&Study::HarmonicResidual, &[0.2, 0.1, 0.05]).unwrap();
        assert!((s.order - 2.0).abs() < 0.2, "{s:?}");
        assert!(s.report(2.0, 0.2).passed());
    }

    #[test]
    fn maxwell_and_conservation_order_two() {
        let s = convergence_study(&Study::MaxwellResidual { params: unit() }, &[0.2, 0.1, 0.05]).unwrap();
        assert!((s.order - 2.0).abs() < 0.2, "{s:?}");
        let p = PhysicalParams::new(0.7, 1.4).unwrap();
        let s = convergence_study(&Study::CurrentConservation { params: p }, &[0.2, 0.1, 0.05]).unwrap();
        assert!((s.order - 2.0).abs() < 0.2, "{s:?}");
    }

    #[test]
    fn truncation_order_two_in_inverse_length() {
        let s = convergence_study(&Study::GradFTruncation { rho: 1.0 }, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        assert!((s.order - 2.0).abs() < 0.05, "{s:?}");
        // exact tail 1/ρ − L/(ρ√(ρ² + L²))
        let want = 1.0 - 40.0 / (1.0f64 + 1600.0).sqrt();
        assert!((s.errors[3] - want).abs() < 1e-12 * want.max(1e-300) + 1e-15);
    }

    #[test]
    fn unrefined_step_study_converges_fast() {
        let study = Study::FieldStrengthStep { rho: 1.0, params: unit(), order: GaussOrder::G4 };
        let s = convergence_study(&study, &[1.0, 0.5, 0.25]).unwrap();
        assert!(s.order > 6.0, "{s:?}");
        assert!(s.errors.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            convergence_study(&Study::HarmonicResidual, &[0.2, 0.1]).unwrap_err(),
            DefectError::TooFewResolutions(2)
        );
        assert!(convergence_study(&Study::HarmonicResidual, &[0.2, 0.15, 0.1]).is_err());
        assert!(convergence_study(&Study::HarmonicResidual, &[0.7, 0.35, 0.175]).is_err());
    }

    #[test]
    fn least_squares_slope() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        assert!((slope(&xs, &ys) - 2.0).abs() < 1e-15);
    }
}
