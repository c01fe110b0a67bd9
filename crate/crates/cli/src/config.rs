//! Run configuration: a TOML file plus command-line overrides.

use std::fs;
use std::path::{Path, PathBuf};

use defect_fields::analysis::CheckId;
use defect_fields::{resample_curve, DefectCurve, GaussOrder, Grid3, PhysicalParams, QuadraturePolicy, Vec3};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub e0: Option<f64>,
    pub mv: Option<f64>,
    pub z_ratio: Option<f64>,
    pub v_tilde: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub origin: [f64; 3],
    pub spacing: f64,
    pub dims: [usize; 3],
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { origin: [-3.0, -3.0, -0.1], spacing: 0.1, dims: [61, 61, 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss points per segment (4 or 8).
    pub order: Option<usize>,
    /// Resample polylines so no segment is longer than this.
    pub max_segment: Option<f64>,
    /// Replace the analytic straight line by a polyline of half-length `L`.
    pub truncation_l: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), formats: vec![Format::Csv] }
    }
}

/// Everything a run needs; serialized verbatim into every summary.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub params: ParamsConfig,
    pub grid: Option<GridConfig>,
    /// `straight-z`, `ring:R` or a curve file path.
    pub curve: Option<String>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub checks: Option<Vec<String>>,
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub e0: Option<f64>,
    pub mv: Option<f64>,
    pub grid: Option<String>,
    pub curve: Option<String>,
    pub trunc_l: Option<f64>,
    pub quad_order: Option<usize>,
    pub max_segment: Option<f64>,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub checks: Option<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self, CliError> {
        if o.e0.is_some() {
            self.params.e0 = o.e0;
        }
        if o.mv.is_some() {
            self.params.mv = o.mv;
        }
        if let Some(g) = &o.grid {
            self.grid = Some(parse_grid_spec(g)?);
        }
        if o.curve.is_some() {
            self.curve = o.curve.clone();
        }
        if o.trunc_l.is_some() {
            self.quadrature.truncation_l = o.trunc_l;
        }
        if o.quad_order.is_some() {
            self.quadrature.order = o.quad_order;
        }
        if o.max_segment.is_some() {
            self.quadrature.max_segment = o.max_segment;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if !o.formats.is_empty() {
            self.output.formats = o.formats.clone();
        }
        if let Some(c) = &o.checks {
            self.checks = Some(c.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect());
        }
        if self.output.formats.is_empty() {
            return Err(CliError::Usage("at least one output format is required".into()));
        }
        Ok(self)
    }

    /// Fill unset fields with defaults so the echoed config is complete.
    pub fn resolved(mut self) -> Result<Self, CliError> {
        let p = &mut self.params;
        match (p.mv, p.z_ratio, p.v_tilde) {
            (_, Some(_), None) | (_, None, Some(_)) => {
                return Err(CliError::Usage("z_ratio and v_tilde must be given together".into()));
            }
            (None, None, None) => p.mv = Some(1.0),
            _ => {}
        }
        p.e0.get_or_insert(1.0);
        self.grid.get_or_insert_with(GridConfig::default);
        self.curve.get_or_insert_with(|| "straight-z".to_string());
        self.quadrature.order.get_or_insert(8);
        self.checks.get_or_insert_with(|| vec!["all".to_string()]);
        self.params.mv = Some(self.physical_params()?.mv());
        Ok(self)
    }

    pub fn physical_params(&self) -> Result<PhysicalParams, CliError> {
        let p = &self.params;
        let e0 = p.e0.unwrap_or(1.0);
        let params = match (p.mv, p.z_ratio, p.v_tilde) {
            (Some(mv), Some(z), Some(v)) => PhysicalParams::with_microscopic(e0, mv, z, v)?,
            (None, Some(z), Some(v)) => PhysicalParams::from_microscopic(e0, z, v)?,
            (mv, _, _) => PhysicalParams::new(e0, mv.unwrap_or(1.0))?,
        };
        Ok(params)
    }

    pub fn grid3(&self) -> Result<Grid3, CliError> {
        let g = self.grid.clone().unwrap_or_default();
        Ok(Grid3::new(g.origin, g.spacing, g.dims)?)
    }

    pub fn policy(&self) -> Result<QuadraturePolicy, CliError> {
        let n = self.quadrature.order.unwrap_or(8);
        let order = GaussOrder::from_points(n)
            .ok_or_else(|| CliError::Usage(format!("quadrature order must be 4 or 8, got {n}")))?;
        let mut policy = QuadraturePolicy::default().with_order(order);
        if let Some(l) = self.quadrature.truncation_l {
            policy = policy.with_min_truncation(l);
        }
        Ok(policy)
    }

    pub fn curve_source(&self) -> &str {
        self.curve.as_deref().unwrap_or("straight-z")
    }

    /// Build the defect curve, resampling polylines if a maximum segment length is set.
    pub fn defect_curve(&self) -> Result<DefectCurve, CliError> {
        let src = self.curve_source();
        let max_segment = self.quadrature.max_segment;
        let curve = if src == "straight-z" {
            match self.quadrature.truncation_l {
                None => return Ok(DefectCurve::straight_z()),
                Some(l) => {
                    let m = self.physical_params()?.mv();
                    let step = max_segment.unwrap_or(if m > 0.0 { 0.02 / m } else { 0.02 });
                    return Ok(DefectCurve::z_axis_surrogate(l, step)?);
                }
            }
        } else if let Some(r) = src.strip_prefix("ring:") {
            let r: f64 = r.parse().map_err(|_| CliError::Usage(format!("bad ring radius in `{src}`")))?;
            DefectCurve::ring(Vec3::zeros(), r, 256)?
        } else {
            let path = Path::new(src);
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            defect_fields::curve_io::parse_curve(&text)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        };
        match (max_segment, &curve) {
            (Some(h), DefectCurve::Polyline(_)) => Ok(resample_curve(&curve, h)?),
            _ => Ok(curve),
        }
    }

    pub fn check_set(&self) -> Result<std::collections::BTreeSet<CheckId>, CliError> {
        let list = self.checks.clone().unwrap_or_else(|| vec!["all".into()]).join(",");
        Ok(CheckId::parse_list(&list)?)
    }
}

/// Parse `o1,o2,o3:h:n1,n2,n3`.
pub fn parse_grid_spec(spec: &str) -> Result<GridConfig, CliError> {
    let bad = || CliError::Usage(format!("grid spec `{spec}` is not of the form o1,o2,o3:h:n1,n2,n3"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [o, h, n] = parts.as_slice() else { return Err(bad()) };
    let origin = triple::<f64>(o).ok_or_else(bad)?;
    let spacing = h.trim().parse::<f64>().map_err(|_| bad())?;
    let dims = triple::<usize>(n).ok_or_else(bad)?;
    Grid3::new(origin, spacing, dims)?;
    Ok(GridConfig { origin, spacing, dims })
}

pub fn triple<T: std::str::FromStr + Copy>(s: &str) -> Option<[T; 3]> {
    let v: Vec<T> = s.split(',').map(|x| x.trim().parse().ok()).collect::<Option<_>>()?;
    v.try_into().ok()
}
