//! The four subcommands.

use std::f64::consts::FRAC_PI_4;
use std::fs;
use std::path::Path;

use defect_fields::analysis::{
    baseline, divergence_field, max_norm, maxwell_residual_field, straight_flux, theorem_suite, SuiteConfig,
    SuiteReport, EVAL_CLEARANCE, FLUX_TOL,
};
use defect_fields::condensate::{charge_by_intersection, f_straight, winding_number, GradFProvider, LineSourceTensor};
use defect_fields::fields::{field_strength_straight, fields_on_grid, observables_at, VortexObservables};
use defect_fields::{Contour, DefectCurve, DefectError, Grid3, PhysicalParams, Vec3};
use serde::Serialize;
use serde_json::json;

use crate::config::{triple, Format, RunConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, write_grid_csv, write_grid_json, write_json, write_table_csv};

pub const PROFILE_POINTS: usize = 200;
pub const PROFILE_COLUMNS: [&str; 6] = ["rho", "f_phase", "grad_f", "F12", "j", "a"];
const CIRCLE_VERTICES: usize = 256;

fn provider(cfg: &RunConfig) -> Result<GradFProvider, CliError> {
    Ok(GradFProvider::for_curve(cfg.defect_curve()?, cfg.policy()?))
}

#[derive(Serialize)]
struct Residuals {
    maxwell: f64,
    maxwell_tolerance: f64,
    conservation: f64,
    conservation_tolerance: f64,
    evaluated_points: usize,
}

fn residuals(
    obs: &VortexObservables,
    gf: &GradFProvider,
    grid: &Grid3,
    p: &PhysicalParams,
) -> Result<Residuals, CliError> {
    let keep = |x: &Vec3| gf.clearance(x) >= EVAL_CLEARANCE / p.mv();
    let maxwell = maxwell_residual_field(&obs.field_strength, &obs.current)?.masked(keep);
    let div = divergence_field(&obs.current)?.masked(keep);
    let b = baseline()?;
    Ok(Residuals {
        maxwell: max_norm(&maxwell).0,
        maxwell_tolerance: b.maxwell_tolerance(grid.spacing(), p),
        conservation: max_norm(&div).0,
        conservation_tolerance: b.conservation_tolerance(grid.spacing(), p),
        evaluated_points: grid.len() - maxwell.flagged_count(),
    })
}

/// Radial profile of the straight vortex along the diagonal `θ = π/4`.
pub fn vortex(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.curve_source() != "straight-z" {
        return Err(CliError::Usage(format!("vortex needs the straight-z curve, got `{}`", cfg.curve_source())));
    }
    let p = cfg.physical_params()?;
    if !p.is_massive() {
        return Err(DefectError::MasslessVector.into());
    }
    let gf = provider(cfg)?;
    let m = p.mv();
    let (lo, hi) = (0.1 / m, 10.0 / m);
    let mut rows = Vec::with_capacity(PROFILE_POINTS);
    let mut oracle_err: f64 = 0.0;
    for i in 0..PROFILE_POINTS {
        let rho = lo * (hi / lo).powf(i as f64 / (PROFILE_POINTS - 1) as f64);
        let x = Vec3::new(rho * FRAC_PI_4.cos(), rho * FRAC_PI_4.sin(), 0.0);
        let o = observables_at(&gf, &p, &x)?;
        let exact = field_strength_straight(rho, &p)?;
        oracle_err = oracle_err.max((o.field.f12 - exact).abs() / exact.abs());
        rows.push(vec![rho, f_straight(&x)?, o.grad_f.norm(), o.field.f12, o.current.norm(), o.potential.norm()]);
    }

    let grid = cfg.grid3()?;
    let obs = fields_on_grid(&gf, &p, &grid)?;
    let res = residuals(&obs, &gf, &grid, &p)?;
    let radius = 10.0 / m;
    let flux = straight_flux(&p, radius)?;
    let quantum = 2.0 * std::f64::consts::PI / p.e0();

    let out = &cfg.output.dir;
    ensure_dir(out)?;
    for f in &cfg.output.formats {
        match f {
            Format::Csv => write_table_csv(&out.join("profile.csv"), &PROFILE_COLUMNS, &rows)?,
            Format::Json => {
                write_json(&out.join("profile.json"), &json!({ "columns": PROFILE_COLUMNS, "rows": rows }))?
            }
        }
    }
    let summary = json!({
        "config": cfg,
        "flux": flux,
        "flux_radius": radius,
        "flux_quantum": quantum,
        "flux_relative_error": ((flux - quantum) / quantum).abs(),
        "flux_tolerance": FLUX_TOL,
        "profile_oracle_max_relative_error": oracle_err,
        "residuals": res,
    });
    write_json(&out.join("summary.json"), &summary)?;
    println!("flux = {flux:.9} (2π/e0 = {quantum:.9})");
    println!("max Maxwell residual = {:.3e} (tolerance {:.3e})", res.maxwell, res.maxwell_tolerance);
    println!("wrote {}", out.display());
    Ok(())
}

/// Dense grids of `∇f`, `F`, `j` and `a` for an arbitrary curve.
pub fn curve(cfg: &RunConfig) -> Result<(), CliError> {
    let p = cfg.physical_params()?;
    let gf = provider(cfg)?;
    let grid = cfg.grid3()?;
    let obs = fields_on_grid(&gf, &p, &grid)?;
    let flagged = obs.grad_f.flagged_count();
    if flagged > 0 {
        log::warn!("{flagged} of {} grid points lie within the defect core and are flagged", grid.len());
    }
    let res = residuals(&obs, &gf, &grid, &p)?;

    let out = &cfg.output.dir;
    ensure_dir(out)?;
    let mut files = Vec::new();
    for (name, field) in obs.grids() {
        for f in &cfg.output.formats {
            let file = match f {
                Format::Csv => format!("{name}.csv"),
                Format::Json => format!("{name}.json"),
            };
            let path = out.join(&file);
            match f {
                Format::Csv => write_grid_csv(&path, field)?,
                Format::Json => write_grid_json(&path, field)?,
            }
            files.push(file);
        }
    }
    let curve = cfg.defect_curve()?;
    let summary = json!({
        "config": cfg,
        "curve": {
            "closed": curve.is_closed(),
            "has_endpoints": curve.has_endpoints(),
            "length": curve.length(),
        },
        "grid_points": grid.len(),
        "flagged_points": flagged,
        "files": files,
        "residuals": res,
    });
    write_json(&out.join("summary.json"), &summary)?;
    println!("wrote {} grid files to {}", files.len(), out.display());
    Ok(())
}

/// `circle:cx,cy,cz:R:nx,ny,nz` or a file with one `x y z` vertex per line.
pub fn parse_contour(spec: &str) -> Result<Contour, CliError> {
    if let Some(rest) = spec.strip_prefix("circle:") {
        let bad = || CliError::Usage(format!("contour `{spec}` is not of the form circle:cx,cy,cz:R:nx,ny,nz"));
        let parts: Vec<&str> = rest.split(':').collect();
        let [c, r, n] = parts.as_slice() else { return Err(bad()) };
        let c = triple::<f64>(c).ok_or_else(bad)?;
        let r: f64 = r.trim().parse().map_err(|_| bad())?;
        let n = triple::<f64>(n).ok_or_else(bad)?;
        return Ok(Contour::circle(Vec3::from(c), r, Vec3::from(n), CIRCLE_VERTICES)?);
    }
    let path = Path::new(spec);
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut vertices = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: Option<Vec<f64>> =
            line.split_whitespace().map(|s| s.parse().ok().filter(|x: &f64| x.is_finite())).collect();
        match v.as_deref() {
            Some(&[x, y, z]) => vertices.push(Vec3::new(x, y, z)),
            _ => return Err(CliError::Usage(format!("{}: line {}: expected `x y z`", path.display(), i + 1))),
        }
    }
    Ok(Contour::new(vertices)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingOutput {
    pub charge: f64,
    pub n: i64,
    pub quality: f64,
    /// Signed crossing count, absent for tangential configurations.
    pub intersections: Option<i64>,
}

pub fn winding(cfg: &RunConfig, contour_spec: &str) -> Result<WindingOutput, CliError> {
    let contour = parse_contour(contour_spec)?;
    let curve: DefectCurve = cfg.defect_curve()?;
    let gf = GradFProvider::for_curve(curve.clone(), cfg.policy()?);
    let w = winding_number(&contour, &gf)?;
    let intersections = match charge_by_intersection(&contour, &LineSourceTensor::new(curve)) {
        Ok(k) => Some(k),
        Err(DefectError::TangentialCrossing(x)) => {
            log::warn!("defect line is tangent to the contour plane near {x:?}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let out = WindingOutput { charge: w.charge, n: w.n, quality: w.quality, intersections };
    println!("N_T = {:.16e}", out.charge);
    println!("n = {}", out.n);
    println!("quality = {:.3e}", out.quality);
    match out.intersections {
        Some(k) => println!("intersections = {k}"),
        None => println!("intersections = tangential"),
    }
    Ok(out)
}

/// Run the theorem suite and write `report.json`.
pub fn verify(cfg: &RunConfig) -> Result<SuiteReport, CliError> {
    let mut suite = SuiteConfig::new(cfg.defect_curve()?, cfg.physical_params()?).with_checks(cfg.check_set()?);
    suite.policy = cfg.policy()?;
    suite.grid = cfg.grid3()?;
    let report = theorem_suite(&suite);
    let out = &cfg.output.dir;
    ensure_dir(out)?;
    write_json(&out.join("report.json"), &json!({ "config": cfg, "passed": report.passed, "checks": report.reports }))?;
    for r in &report.reports {
        let status = if r.is_skipped() {
            "SKIP"
        } else if r.passed() {
            "PASS"
        } else {
            "FAIL"
        };
        println!("[{status}] {:<26} measured={:.3e} tolerance={:.3e}", r.name, r.measured, r.tolerance);
    }
    if !report.passed {
        return Err(CliError::ChecksFailed(report.failures().join(", ")));
    }
    Ok(report)
}
