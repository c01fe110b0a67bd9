//! Defect line geometry: the analytic straight vortex and sampled polylines.

use std::f64::consts::PI;

use crate::error::{DefectError, Result};
use crate::Vec3;

/// Relative tolerance (against the curve extent) for the closure of loop defects.
pub const CLOSURE_RTOL: f64 = 1e-12;

/// A parameterized defect line `y(σ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DefectCurve {
    /// Infinite straight line parallel to the x₃ axis, `y(σ) = (a, b, σ)`,
    /// oriented along +x₃. `through = [0, 0]` is the canonical vortex.
    StraightZ {
        through: [f64; 2],
    },
    Polyline(Polyline),
}

/// Ordered samples `(σ, y(σ))`. Closed loops repeat their first point at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    sigma: Vec<f64>,
    points: Vec<Vec3>,
    closed: bool,
}

impl Polyline {
    pub fn new(sigma: Vec<f64>, points: Vec<Vec3>, closed: bool) -> Result<Self> {
        if sigma.len() != points.len() {
            return Err(DefectError::InvalidCurve(format!(
                "{} parameter values for {} points",
                sigma.len(),
                points.len()
            )));
        }
        if points.len() < 2 {
            return Err(DefectError::InvalidCurve("a polyline needs at least 2 points".into()));
        }
        if sigma.iter().chain(points.iter().flat_map(|p| p.iter())).any(|v| !v.is_finite()) {
            return Err(DefectError::InvalidCurve("non-finite coordinate".into()));
        }
        if let Some(w) = sigma.windows(2).position(|w| w[1] <= w[0]) {
            return Err(DefectError::InvalidCurve(format!("sigma not strictly increasing at sample {}", w + 1)));
        }
        if let Some(w) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(DefectError::InvalidCurve(format!("samples {} and {} coincide", w, w + 1)));
        }
        if closed {
            if points.len() < 4 {
                return Err(DefectError::InvalidCurve("a closed loop needs at least 3 distinct vertices".into()));
            }
            let extent = bounding_extent(&points);
            let gap = (points[0] - points[points.len() - 1]).norm();
            if gap > CLOSURE_RTOL * extent {
                return Err(DefectError::InvalidCurve(format!("closed loop endpoints differ by {gap:.3e}")));
            }
        }
        Ok(Self { sigma, points, closed })
    }

    /// Polyline parameterized by cumulative arc length.
    pub fn from_points(points: Vec<Vec3>, closed: bool) -> Result<Self> {
        let mut sigma = Vec::with_capacity(points.len());
        let mut s = 0.0;
        for (i, p) in points.iter().enumerate() {
            if i > 0 {
                s += (p - points[i - 1]).norm();
            }
            sigma.push(s);
        }
        Self::new(sigma, points, closed)
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn num_segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| (b - a).norm()).sum()
    }

    pub fn extent(&self) -> f64 {
        bounding_extent(&self.points)
    }
}

fn bounding_extent(points: &[Vec3]) -> f64 {
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (hi - lo).norm()
}

/// Distance from `x` to the closed segment `[a, b]`.
pub fn point_segment_distance(x: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((x - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (x - (a + ab * t)).norm()
}

impl DefectCurve {
    pub fn straight_z() -> Self {
        DefectCurve::StraightZ { through: [0.0, 0.0] }
    }

    pub fn straight_z_through(x1: f64, x2: f64) -> Self {
        DefectCurve::StraightZ { through: [x1, x2] }
    }

    pub fn polyline(sigma: Vec<f64>, points: Vec<Vec3>, closed: bool) -> Result<Self> {
        Polyline::new(sigma, points, closed).map(DefectCurve::Polyline)
    }

    pub fn from_points(points: Vec<Vec3>, closed: bool) -> Result<Self> {
        Polyline::from_points(points, closed).map(DefectCurve::Polyline)
    }

    /// Counter-clockwise circle of `radius` in the plane `x₃ = center.z`, `n` segments.
    pub fn ring(center: Vec3, radius: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) || n < 3 {
            return Err(DefectError::InvalidCurve(format!(
                "ring needs radius > 0 and >= 3 segments (got {radius}, {n})"
            )));
        }
        let mut points: Vec<Vec3> = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                center + Vec3::new(radius * phi.cos(), radius * phi.sin(), 0.0)
            })
            .collect();
        points.push(points[0]);
        let sigma = (0..=n).map(|k| 2.0 * PI * k as f64 / n as f64).collect();
        Self::polyline(sigma, points, true)
    }

    /// Open straight segment from `a` to `b` split into `n` equal pieces.
    pub fn segment(a: Vec3, b: Vec3, n: usize) -> Result<Self> {
        let n = n.max(1);
        let points = (0..=n).map(|k| a + (b - a) * (k as f64 / n as f64)).collect();
        Self::from_points(points, false)
    }

    /// Truncated stand-in for the straight vortex: the x₃ axis over `[-half_length, half_length]`.
    pub fn z_axis_surrogate(half_length: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(DefectError::BadStep(step));
        }
        if !(half_length > 0.0) {
            return Err(DefectError::InvalidCurve(format!("half-length {half_length}")));
        }
        let n = ((2.0 * half_length / step) * (1.0 - 1e-12)).ceil() as usize;
        let sigma: Vec<f64> = (0..=n).map(|k| -half_length + 2.0 * half_length * k as f64 / n as f64).collect();
        let points = sigma.iter().map(|&s| Vec3::new(0.0, 0.0, s)).collect();
        Self::polyline(sigma, points, false)
    }

    pub fn is_closed(&self) -> bool {
        match self {
            DefectCurve::StraightZ { .. } => false,
            DefectCurve::Polyline(p) => p.closed,
        }
    }

    /// Closed loops and infinite lines have no endpoints.
    pub fn has_endpoints(&self) -> bool {
        matches!(self, DefectCurve::Polyline(p) if !p.closed)
    }

    pub fn as_polyline(&self) -> Option<&Polyline> {
        match self {
            DefectCurve::Polyline(p) => Some(p),
            DefectCurve::StraightZ { .. } => None,
        }
    }

    /// Shortest distance from `x` to the curve.
    pub fn clearance(&self, x: &Vec3) -> f64 {
        match self {
            DefectCurve::StraightZ { through } => (x[0] - through[0]).hypot(x[1] - through[1]),
            DefectCurve::Polyline(p) => {
                p.segments().map(|(a, b)| point_segment_distance(x, &a, &b)).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Arc length; infinite for the analytic line.
    pub fn length(&self) -> f64 {
        match self {
            DefectCurve::StraightZ { .. } => f64::INFINITY,
            DefectCurve::Polyline(p) => p.length(),
        }
    }
}

/// Insert linearly interpolated vertices so no segment exceeds `max_segment`.
///
/// Vertices already present are kept bit-for-bit, so a curve that is fine
/// enough comes back unchanged. Analytic curves are rejected with
/// [`DefectError::AnalyticCurve`]; the caller keeps the original.
pub fn resample_curve(curve: &DefectCurve, max_segment: f64) -> Result<DefectCurve> {
    if !(max_segment > 0.0) || !max_segment.is_finite() {
        return Err(DefectError::BadStep(max_segment));
    }
    let poly = match curve {
        DefectCurve::StraightZ { .. } => return Err(DefectError::AnalyticCurve),
        DefectCurve::Polyline(p) => p,
    };
    let mut sigma = vec![poly.sigma[0]];
    let mut points = vec![poly.points[0]];
    for i in 1..poly.points.len() {
        let (a, b) = (poly.points[i - 1], poly.points[i]);
        let (sa, sb) = (poly.sigma[i - 1], poly.sigma[i]);
        let len = (b - a).norm();
        let pieces = ((len / max_segment) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        for k in 1..pieces {
            let t = k as f64 / pieces as f64;
            sigma.push(sa + (sb - sa) * t);
            points.push(a + (b - a) * t);
        }
        sigma.push(sb);
        points.push(b);
    }
    DefectCurve::polyline(sigma, points, poly.closed)
}
