//! The aggregated theorem suite.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::baseline::{baseline, EVAL_CLEARANCE};
use super::{
    divergence_field, flux_quantization, flux_through_contour, max_norm, maxwell_residual_field, CheckReport, FLUX_TOL,
    MIN_FLUX_RADIUS,
};
use crate::condensate::{
    charge_by_intersection, continuity_check, massless_compatibility_masked, winding_number, ClosedSurface,
    CondensateSource, GradFProvider, LineSourceTensor,
};
use crate::contour::Contour;
use crate::curve::DefectCurve;
use crate::error::{DefectError, Result};
use crate::fields::{
    field_strength_line, field_strength_straight, fields_on_grid, meissner_boson_decomposition, observables_at,
    vacuum_current_line, vacuum_current_straight,
};
use crate::grid::Grid3;
use crate::params::PhysicalParams;
use crate::quadrature::QuadraturePolicy;
use crate::Vec3;

/// Winding numbers must be integers to this absolute tolerance (in units of 2π).
pub const WINDING_TOL: f64 = 1e-6;
/// Relative tolerance of the line-quadrature oracle comparison.
pub const ORACLE_RTOL: f64 = 1e-3;
/// Direction tolerance of the oracle current, radians.
pub const ORACLE_ANGLE_TOL: f64 = 1e-6;
/// Bound on fields and currents built from regular condensation functions.
pub const NULLITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    WindingQuantization,
    ChargeEquality,
    Continuity,
    MasslessCompatibility,
    MassiveIncompatibility,
    RegularFNullity,
    OracleAgreement,
    MaxwellResidual,
    CurrentConservation,
    FluxQuantization,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::WindingQuantization,
        CheckId::ChargeEquality,
        CheckId::Continuity,
        CheckId::MasslessCompatibility,
        CheckId::MassiveIncompatibility,
        CheckId::RegularFNullity,
        CheckId::OracleAgreement,
        CheckId::MaxwellResidual,
        CheckId::CurrentConservation,
        CheckId::FluxQuantization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::WindingQuantization => "winding_quantization",
            CheckId::ChargeEquality => "charge_equality",
            CheckId::Continuity => "continuity",
            CheckId::MasslessCompatibility => "massless_compatibility",
            CheckId::MassiveIncompatibility => "massive_incompatibility",
            CheckId::RegularFNullity => "regular_f_nullity",
            CheckId::OracleAgreement => "oracle_agreement",
            CheckId::MaxwellResidual => "maxwell_residual",
            CheckId::CurrentConservation => "current_conservation",
            CheckId::FluxQuantization => "flux_quantization",
        }
    }

    /// Parse a comma-separated selection of full names or short aliases.
    pub fn parse_list(list: &str) -> Result<BTreeSet<CheckId>> {
        let mut out = BTreeSet::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "all" => out.extend(CheckId::ALL),
                "massless" => {
                    out.insert(CheckId::MasslessCompatibility);
                    out.insert(CheckId::MassiveIncompatibility);
                }
                other => {
                    out.insert(other.parse()?);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = DefectError;

    fn from_str(s: &str) -> Result<Self> {
        let alias = match s {
            "winding" => Some(CheckId::WindingQuantization),
            "charge" => Some(CheckId::ChargeEquality),
            "regular" => Some(CheckId::RegularFNullity),
            "oracle" => Some(CheckId::OracleAgreement),
            "maxwell" => Some(CheckId::MaxwellResidual),
            "conservation" => Some(CheckId::CurrentConservation),
            "flux" => Some(CheckId::FluxQuantization),
            _ => None,
        };
        alias
            .or_else(|| CheckId::ALL.into_iter().find(|c| c.name() == s))
            .ok_or_else(|| DefectError::UnknownCheck(s.to_string()))
    }
}

/// Inputs of [`theorem_suite`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub curves: Vec<DefectCurve>,
    pub params: PhysicalParams,
    pub policy: QuadraturePolicy,
    /// Grid for the Maxwell and conservation residuals.
    pub grid: Grid3,
    /// Grid for the massless-compatibility reconstruction.
    pub massless_grid: Grid3,
    pub contours: Vec<Contour>,
    pub surfaces: Vec<ClosedSurface>,
    pub checks: BTreeSet<CheckId>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self::new(DefectCurve::straight_z(), PhysicalParams::new(1.0, 1.0).expect("valid parameters"))
    }
}

impl SuiteConfig {
    pub fn new(curve: DefectCurve, params: PhysicalParams) -> Self {
        Self {
            massless_grid: massless_grid_for(&curve),
            curves: vec![curve],
            params,
            policy: QuadraturePolicy::default(),
            grid: default_grid(),
            contours: default_contours(),
            surfaces: default_surfaces(),
            checks: CheckId::ALL.into_iter().collect(),
        }
    }

    pub fn with_checks(mut self, checks: BTreeSet<CheckId>) -> Self {
        self.checks = checks;
        self
    }

    fn provider(&self) -> GradFProvider {
        GradFProvider::for_curves(self.curves.iter().cloned(), self.policy)
    }
}

/// `[−3, 3]² × {−0.1, 0, 0.1}` at `h = 0.1`.
pub fn default_grid() -> Grid3 {
    Grid3::new([-3.0, -3.0, -0.1], 0.1, [61, 61, 3]).expect("valid grid")
}

/// `x₁ ∈ [−3, −1]`, `x₂ ∈ [−1, 1]` at `h = 0.05`, straddling the branch cut of the straight vortex.
pub fn default_massless_grid() -> Grid3 {
    Grid3::new([-3.0, -1.0, -0.05], 0.05, [41, 41, 3]).expect("valid grid")
}

/// A thin slab around the first vertex of a polyline, normal to the coordinate axis
/// most aligned with the local tangent, so that it samples an annulus around the line.
/// Straight lines get [`default_massless_grid`].
pub fn massless_grid_for(curve: &DefectCurve) -> Grid3 {
    let Some(poly) = curve.as_polyline() else {
        return default_massless_grid();
    };
    let pts = poly.points();
    let (p0, t) = (pts[0], pts[1] - pts[0]);
    let axis = (0..3).max_by(|&a, &b| t[a].abs().total_cmp(&t[b].abs())).unwrap_or(2);
    let half_width = (0.25 * poly.length() / PI).clamp(1e-3, 1.0);
    let h = half_width / 40.0;
    let mut origin = [p0[0] - half_width, p0[1] - half_width, p0[2] - half_width];
    let mut dims = [81, 81, 81];
    origin[axis] = p0[axis] - h;
    dims[axis] = 3;
    Grid3::new(origin, h, dims).unwrap_or_else(|_| default_massless_grid())
}

/// Stencils closer than this to a defect are left out of the compatibility residuals.
fn massless_clearance(grid: &Grid3, m: f64) -> f64 {
    let scale = if m > 0.0 { EVAL_CLEARANCE / m } else { EVAL_CLEARANCE };
    scale.min(0.5 * slab_half_width(grid))
}

/// Half the smallest extent across the slab plane (the whole grid if it is not a slab).
fn slab_half_width(grid: &Grid3) -> f64 {
    let dims = grid.dims();
    let thin: Vec<usize> = (0..3).filter(|&a| dims[a] == 3).collect();
    (0..3).filter(|a| thin.len() != 1 || *a != thin[0]).map(|a| dims[a] - 1).min().unwrap_or(0) as f64
        * 0.5
        * grid.spacing()
}

pub fn default_contours() -> Vec<Contour> {
    let square = vec![
        Vec3::new(-1.5, -1.5, 0.2),
        Vec3::new(1.5, -1.5, 0.2),
        Vec3::new(1.5, 1.5, 0.2),
        Vec3::new(-1.5, 1.5, 0.2),
    ];
    vec![
        Contour::circle(Vec3::zeros(), 1.0, Vec3::z(), 256),
        Contour::circle(Vec3::zeros(), 2.0, Vec3::z(), 256),
        Contour::new(square),
        Contour::circle(Vec3::new(5.0, 0.0, 0.0), 1.0, Vec3::z(), 256),
        Contour::circle(Vec3::new(0.1, -0.2, 0.3), 1.5, Vec3::new(0.3, 0.2, 1.0), 256),
        Contour::circle(Vec3::zeros(), 12.0, Vec3::z(), 256),
    ]
    .into_iter()
    .map(|c| c.expect("valid contour"))
    .collect()
}

pub fn default_surfaces() -> Vec<ClosedSurface> {
    let box_base = Contour::new(vec![
        Vec3::new(-1.2, -1.3, -0.5),
        Vec3::new(1.9, -1.3, -0.5),
        Vec3::new(1.9, 1.8, -0.5),
        Vec3::new(-1.2, 1.8, -0.5),
    ])
    .expect("valid contour");
    vec![
        ClosedSurface::cylinder(Vec3::new(0.0, 0.0, -1.0), 2.5, Vec3::new(0.0, 0.0, 2.0), 32),
        ClosedSurface::prism(box_base, Vec3::new(0.0, 0.0, 1.0)),
        ClosedSurface::cylinder(Vec3::new(4.0, 0.0, -1.0), 1.0, Vec3::new(0.0, 0.0, 2.0), 16),
    ]
    .into_iter()
    .map(|s| s.expect("valid surface"))
    .collect()
}

/// All reports, sorted by check name.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub reports: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn get(&self, name: &str) -> Option<&CheckReport> {
        self.reports.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.reports.iter().filter(|r| !r.passed() && !r.is_skipped()).map(|r| r.name.as_str()).collect()
    }
}

/// Run the selected checks; unselected checks are reported as skipped.
///
/// A failed continuity check skips every other check, since the remaining
/// theorems presuppose a defect line without ends.
pub fn theorem_suite(cfg: &SuiteConfig) -> SuiteReport {
    let gf = cfg.provider();
    let mut reports = Vec::new();
    let mut gate: Option<String> = None;
    if cfg.checks.contains(&CheckId::Continuity) {
        let r = tag(CheckId::Continuity, check_continuity(cfg));
        if !r.passed() {
            gate = Some(format!("continuity check failed: {}", reason_of(&r)));
        }
        reports.push(r);
    } else {
        reports.push(CheckReport::skipped(CheckId::Continuity.name(), "not selected"));
    }
    for id in CheckId::ALL.into_iter().filter(|&c| c != CheckId::Continuity) {
        let r = if !cfg.checks.contains(&id) {
            CheckReport::skipped(id.name(), "not selected")
        } else if let Some(g) = &gate {
            CheckReport::skipped(id.name(), g.clone())
        } else {
            tag(id, run_check(id, cfg, &gf))
        };
        reports.push(r);
    }
    reports.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = reports.iter().all(|r| r.passed() || r.is_skipped());
    SuiteReport { passed, reports }
}

fn reason_of(r: &CheckReport) -> String {
    r.metadata
        .get("reason")
        .or_else(|| r.metadata.get("error"))
        .and_then(|v| v.as_str())
        .unwrap_or("measured value above tolerance")
        .to_string()
}

fn tag(id: CheckId, r: Result<CheckReport>) -> CheckReport {
    match r {
        Ok(mut r) => {
            r.name = id.name().to_string();
            r
        }
        Err(DefectError::MasslessVector) => CheckReport::skipped(id.name(), DefectError::MasslessVector.to_string()),
        Err(e) => CheckReport::errored(id.name(), &e),
    }
}

fn run_check(id: CheckId, cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let fields_check = matches!(
        id,
        CheckId::RegularFNullity
            | CheckId::OracleAgreement
            | CheckId::MaxwellResidual
            | CheckId::CurrentConservation
            | CheckId::FluxQuantization
    );
    if fields_check && !cfg.params.is_massive() {
        return Err(DefectError::MasslessVector);
    }
    match id {
        CheckId::WindingQuantization => check_winding(cfg, gf),
        CheckId::ChargeEquality => check_charge(cfg, gf),
        CheckId::Continuity => check_continuity(cfg),
        CheckId::MasslessCompatibility => check_massless(cfg, gf),
        CheckId::MassiveIncompatibility => check_massive(cfg, gf),
        CheckId::RegularFNullity => check_nullity(cfg),
        CheckId::OracleAgreement => check_oracle(cfg),
        CheckId::MaxwellResidual | CheckId::CurrentConservation => check_grid_residual(id, cfg, gf),
        CheckId::FluxQuantization => check_flux(cfg, gf),
    }
}

fn check_winding(cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let mut worst: f64 = 0.0;
    let mut ns = Vec::new();
    for c in &cfg.contours {
        let w = winding_number(c, gf)?;
        worst = worst.max(w.quality / (2.0 * PI));
        ns.push(w.n);
    }
    Ok(CheckReport::evaluate("", worst, WINDING_TOL)
        .with_meta("windings", ns)
        .with_meta("quadrature_order", cfg.policy.order.points()))
}

fn check_charge(cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let mut mismatches = 0usize;
    let mut transversal = 0usize;
    let mut pairs = Vec::new();
    for c in &cfg.contours {
        let n = winding_number(c, gf)?.n;
        let mut crossings = 0i64;
        let mut tangential = false;
        for curve in &cfg.curves {
            match charge_by_intersection(c, &LineSourceTensor::new(curve.clone())) {
                Ok(k) => crossings += k,
                Err(DefectError::TangentialCrossing(_)) => tangential = true,
                Err(e) => return Err(e),
            }
        }
        if tangential {
            continue;
        }
        transversal += 1;
        if crossings != n {
            mismatches += 1;
        }
        pairs.push([n, crossings]);
    }
    if transversal == 0 {
        return Ok(CheckReport::skipped("", "no transversal contour"));
    }
    Ok(CheckReport::evaluate("", mismatches as f64, 0.0)
        .with_meta("winding_vs_crossings", pairs)
        .with_meta("transversal_contours", transversal))
}

fn check_continuity(cfg: &SuiteConfig) -> Result<CheckReport> {
    let mut violations = 0usize;
    let mut reasons = Vec::new();
    for curve in &cfg.curves {
        let r = continuity_check(&LineSourceTensor::new(curve.clone()), &cfg.surfaces);
        if !r.passed {
            violations += r.surface_counts.iter().filter(|&&c| c != 0).count().max(1);
            reasons.push(r.reason.unwrap_or_default());
        }
    }
    let mut report = CheckReport::evaluate("", violations as f64, 0.0).with_meta("surfaces", cfg.surfaces.len());
    if !reasons.is_empty() {
        report = report.with_meta("reason", reasons.join("; "));
    }
    Ok(report)
}

/// A circle about the centre of a slab grid, in the slab plane, if it links a defect;
/// else the first configured contour with non-zero winding, else the first contour.
fn probe_contour(cfg: &SuiteConfig, gf: &GradFProvider) -> Result<Contour> {
    let g = &cfg.massless_grid;
    let dims = g.dims();
    if let [axis] = (0..3).filter(|&a| dims[a] == 3).collect::<Vec<_>>()[..] {
        let o = g.origin();
        let centre = Vec3::from_fn(|a, _| o[a] + 0.5 * g.spacing() * (dims[a] - 1) as f64);
        let half = slab_half_width(g);
        let mut normal = Vec3::zeros();
        normal[axis] = 1.0;
        if let Ok(c) = Contour::circle(centre, 0.75 * half, normal, 256) {
            if gf.contour_clearance(&c) > gf.policy().exclusion_radius && winding_number(&c, gf)?.n != 0 {
                return Ok(c);
            }
        }
    }
    for c in &cfg.contours {
        if winding_number(c, gf)?.n != 0 {
            return Ok(c.clone());
        }
    }
    cfg.contours.first().cloned().ok_or_else(|| DefectError::InvalidContour("no contours configured".into()))
}

fn check_massless(cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let contour = probe_contour(cfg, gf)?;
    let r = massless_compatibility_masked(
        gf,
        &contour,
        0.0,
        &cfg.massless_grid,
        massless_clearance(&cfg.massless_grid, 0.0),
    )?;
    let tol = baseline()?.harmonic_tolerance(cfg.massless_grid.spacing(), r.min_clearance);
    Ok(CheckReport::evaluate("", r.residual_norm, tol)
        .with_meta("singular", r.singular)
        .with_meta("winding", r.winding.n)
        .with_meta("points", r.points)
        .with_meta("h", cfg.massless_grid.spacing()))
}

fn check_massive(cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let contour = probe_contour(cfg, gf)?;
    let m = if cfg.params.is_massive() { cfg.params.mv() } else { 1.0 };
    let r =
        massless_compatibility_masked(gf, &contour, m, &cfg.massless_grid, massless_clearance(&cfg.massless_grid, m))?;
    if !r.singular {
        return Ok(CheckReport::skipped("", "condensation function is regular around every contour"));
    }
    let noise = baseline()?.harmonic_tolerance(cfg.massless_grid.spacing(), r.min_clearance);
    // around a loop f changes by 2πn, so some point has |f| ≥ π|n| whatever the branch
    let resolvable = m * m * PI * r.winding.n.abs() as f64;
    if resolvable <= noise {
        return Ok(CheckReport::skipped(
            "",
            format!(
                "m²π|n| = {resolvable:.3e} is below the discretization noise {noise:.3e}; refine the massless grid"
            ),
        ));
    }
    // passes when the residual exceeds both 0.9·m²·min|f| and the discretization noise
    let required = (0.9 * r.lower_bound).max(noise);
    Ok(CheckReport::evaluate("", required - r.residual_norm, 0.0)
        .with_meta("mass", m)
        .with_meta("residual", r.residual_norm)
        .with_meta("lower_bound", r.lower_bound)
        .with_meta("min_abs_f", r.min_abs_f))
}

/// Points of the additive recurrence with the plastic-number constants, mapped to `[−3, 3]³`.
fn probe_points(n: usize) -> Vec<Vec3> {
    let g: f64 = 1.324_717_957_244_746;
    let a = [1.0 / g, 1.0 / (g * g), 1.0 / (g * g * g)];
    (1..=n)
        .map(|i| {
            let u = a.map(|ak| (0.5 + ak * i as f64).fract());
            Vec3::new(6.0 * u[0] - 3.0, 6.0 * u[1] - 3.0, 6.0 * u[2] - 3.0)
        })
        .collect()
}

fn check_nullity(cfg: &SuiteConfig) -> Result<CheckReport> {
    let providers = [
        vec![CondensateSource::Linear { gradient: Vec3::x() }],
        vec![CondensateSource::Linear { gradient: Vec3::new(0.3, -1.2, 0.7) }],
        vec![CondensateSource::Saddle],
        vec![CondensateSource::Saddle, CondensateSource::Linear { gradient: Vec3::new(-2.0, 0.5, 1.0) }],
    ];
    let mut worst: f64 = 0.0;
    for sources in providers {
        let gf = GradFProvider::new(sources, cfg.policy);
        for x in probe_points(32) {
            let o = observables_at(&gf, &cfg.params, &x)?;
            let d = meissner_boson_decomposition(&gf, &cfg.params, &x)?;
            worst = worst.max(o.current.norm()).max(o.field.max_abs()).max(d.total.norm());
        }
    }
    Ok(CheckReport::evaluate("", worst, NULLITY_TOL).with_meta("points", 4 * 32))
}

/// Truncated-axis line quadrature against the closed forms at `ρ m ∈ {0.5, 1, 2, 3}`.
///
/// `measured` is the worst of the three errors, each divided by its own tolerance.
fn check_oracle(cfg: &SuiteConfig) -> Result<CheckReport> {
    let p = &cfg.params;
    let m = p.mv();
    let half_length = 40.0 / m;
    let line = DefectCurve::z_axis_surrogate(half_length, 0.02 / m)?;
    let (mut ef, mut ej, mut angle): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for s in [0.5, 1.0, 2.0, 3.0] {
        let rho = s / m;
        for theta in [0.3, 2.0, 4.1] {
            let x = Vec3::new(rho * f64::cos(theta), rho * f64::sin(theta), 0.37 / m);
            let f = field_strength_line(&line, p, &x, &cfg.policy)?;
            let f0 = field_strength_straight(rho, p)?;
            ef = ef.max((f.f12 - f0).abs() / f0.abs()).max(f.f23.abs().max(f.f31.abs()) / f0.abs());
            let j = vacuum_current_line(&line, p, &x, &cfg.policy)?;
            let j0 = vacuum_current_straight(&x, p)?;
            ej = ej.max((j.norm() - j0.norm()).abs() / j0.norm());
            angle = angle.max(j.cross(&j0).norm().atan2(j.dot(&j0)));
        }
    }
    let measured = (ef / ORACLE_RTOL).max(ej / ORACLE_RTOL).max(angle / ORACLE_ANGLE_TOL);
    Ok(CheckReport::evaluate("", measured, 1.0)
        .with_meta("field_rel_error", ef)
        .with_meta("current_rel_error", ej)
        .with_meta("current_angle_rad", angle)
        .with_meta("truncation_half_length", half_length)
        .with_meta("quadrature_order", cfg.policy.order.points()))
}

fn check_grid_residual(id: CheckId, cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let p = &cfg.params;
    let h = cfg.grid.spacing();
    let obs = fields_on_grid(gf, p, &cfg.grid)?;
    let keep = |x: &Vec3| gf.clearance(x) * p.mv() >= EVAL_CLEARANCE;
    let b = baseline()?;
    let (residual, tol) = if id == CheckId::MaxwellResidual {
        (maxwell_residual_field(&obs.field_strength, &obs.current)?, b.maxwell_tolerance(h, p))
    } else {
        (divergence_field(&obs.current)?, b.conservation_tolerance(h, p))
    };
    let (measured, points) = max_norm(&residual.masked(keep));
    let measured = if points == 0 { f64::NAN } else { measured };
    Ok(CheckReport::evaluate("", measured, tol)
        .with_meta("h", h)
        .with_meta("points", points)
        .with_meta("quadrature_order", cfg.policy.order.points()))
}

fn check_flux(cfg: &SuiteConfig, gf: &GradFProvider) -> Result<CheckReport> {
    let p = &cfg.params;
    if let [DefectCurve::StraightZ { .. }] = cfg.curves.as_slice() {
        return flux_quantization(p, 10.0 / p.mv(), 1);
    }
    let quantum = 2.0 * PI / p.e0();
    let mut worst: f64 = 0.0;
    let mut used = 0;
    for c in &cfg.contours {
        if gf.contour_clearance(c) * p.mv() < MIN_FLUX_RADIUS {
            continue;
        }
        let n = winding_number(c, gf)?.n;
        let flux = flux_through_contour(gf, p, c)?;
        worst = worst.max((flux - quantum * n as f64).abs() / quantum.abs());
        used += 1;
    }
    if used == 0 {
        return Ok(CheckReport::skipped("", format!("no contour with clearance >= {MIN_FLUX_RADIUS}/m_V")));
    }
    Ok(CheckReport::evaluate("", worst, FLUX_TOL).with_meta("contours", used))
}
