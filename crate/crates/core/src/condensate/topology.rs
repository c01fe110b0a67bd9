//! Topological charge: the contour integral of `∇f` and its surface form,
//! the signed count of defect-line crossings.

use std::f64::consts::PI;

use serde::Serialize;

use super::GradFProvider;
use crate::contour::{Contour, PlaneFrame};
use crate::curve::{point_segment_distance, DefectCurve};
use crate::error::{DefectError, Result};
use crate::Vec3;

/// Crossings closer than this angle to tangency are rejected.
pub const TANGENCY_TOL_RAD: f64 = 1e-6;

/// Relative (to the contour size) height below which a point counts as in-plane.
const IN_PLANE_RTOL: f64 = 1e-12;

/// Relative distance from a contour edge below which a crossing counts as on the boundary.
const BOUNDARY_RTOL: f64 = 1e-9;

/// Result of `N_T = ∮ dl·∇f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindingNumber {
    /// Raw contour integral.
    pub charge: f64,
    /// `round(N_T / 2π)`.
    pub n: i64,
    /// `|N_T − 2πn|`.
    pub quality: f64,
}

/// Composite Gauss quadrature of `∮ dl·∇f` along the polygon.
///
/// Edges are bisected until each piece is shorter than half its clearance
/// from the nearest defect, then integrated with the provider's rule.
pub fn winding_number(contour: &Contour, gf: &GradFProvider) -> Result<WindingNumber> {
    let policy = gf.policy();
    let mut total = 0.0;
    for (a, b) in contour.edges() {
        let clearance = edge_clearance(gf, &a, &b);
        if clearance <= policy.exclusion_radius {
            return Err(DefectError::ContourTouchesCurve { clearance });
        }
        total += edge_integral(gf, a, b, 0)?;
    }
    let n = (total / (2.0 * PI)).round();
    Ok(WindingNumber { charge: total, n: n as i64, quality: (total - 2.0 * PI * n).abs() })
}

fn edge_integral(gf: &GradFProvider, a: Vec3, b: Vec3, depth: u32) -> Result<f64> {
    let len = (b - a).norm();
    let mid = (a + b) * 0.5;
    if depth < 30 && !gf.is_regular() && len > 0.5 * edge_clearance(gf, &a, &b) {
        return Ok(edge_integral(gf, a, mid, depth + 1)? + edge_integral(gf, mid, b, depth + 1)?);
    }
    let rule = gf.policy().order.rule();
    let t = b - a;
    let mut sum = 0.0;
    for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
        let y = a + t * (0.5 * (1.0 + xi));
        sum += w * gf.grad(&y)?.dot(&t);
    }
    Ok(0.5 * sum)
}

fn edge_clearance(gf: &GradFProvider, a: &Vec3, b: &Vec3) -> f64 {
    gf.curves().map(|c| segment_curve_distance(c, a, b)).fold(f64::INFINITY, f64::min)
}

/// Distance between segment `[a, b]` and a defect curve.
pub(crate) fn segment_curve_distance(curve: &DefectCurve, a: &Vec3, b: &Vec3) -> f64 {
    match curve {
        DefectCurve::StraightZ { through } => {
            let flat = |p: &Vec3| Vec3::new(p[0], p[1], 0.0);
            point_segment_distance(&Vec3::new(through[0], through[1], 0.0), &flat(a), &flat(b))
        }
        DefectCurve::Polyline(p) => {
            p.segments().map(|(c, d)| segment_segment_distance(a, b, &c, &d)).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Closest distance between segments `[p1, q1]` and `[p2, q2]`.
pub(crate) fn segment_segment_distance(p1: &Vec3, q1: &Vec3, p2: &Vec3, q2: &Vec3) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let (a, e, f) = (d1.norm_squared(), d2.norm_squared(), d2.dot(&r));
    let (s, t);
    if a <= f64::EPSILON && e <= f64::EPSILON {
        return r.norm();
    }
    if a <= f64::EPSILON {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= f64::EPSILON {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 0.0 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// The singular tensor `G⁺` of a defect, represented by its supporting line.
///
/// In the static sector only `G⁺ᵢⱼ = −εᵢⱼₖ G₀ₖ` survives, with `G₀ₖ` the
/// tangent-weighted delta function on the curve; all that is needed from it
/// here is the oriented support.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSourceTensor {
    curve: DefectCurve,
}

impl LineSourceTensor {
    pub fn new(curve: DefectCurve) -> Self {
        Self { curve }
    }

    pub fn curve(&self) -> &DefectCurve {
        &self.curve
    }

    /// `½∫ dS^{ij} G⁺ᵢⱼ` over the planar fill of `contour`: the signed number of crossings.
    pub fn flux_through(&self, contour: &Contour) -> Result<i64> {
        let frame = contour.require_plane()?;
        let scale = contour.vertices().iter().map(|v| (v - frame.origin).norm()).fold(0.0, f64::max);
        let eps = IN_PLANE_RTOL * scale.max(1.0);
        let sin_tol = TANGENCY_TOL_RAD.sin();
        match &self.curve {
            DefectCurve::StraightZ { through } => {
                let p0 = Vec3::new(through[0], through[1], 0.0);
                let cos = frame.n[2];
                let h0 = frame.height(&p0);
                if cos.abs() < sin_tol {
                    // line (nearly) parallel to the plane: only an issue if it lies in it across the fill
                    if h0.abs() <= eps && line_meets_fill(contour, &frame, &p0, &Vec3::z()) {
                        return Err(DefectError::TangentialCrossing(p0));
                    }
                    return Ok(0);
                }
                let x = p0 - Vec3::z() * (h0 / cos);
                crossing_sign(contour, &frame, &x, cos, scale)
            }
            DefectCurve::Polyline(poly) => {
                let mut total = 0;
                for (a, b) in poly.segments() {
                    let (ha, hb) = (frame.height(&a), frame.height(&b));
                    if ha.abs() <= eps && hb.abs() <= eps {
                        if segment_meets_fill(contour, &frame, &a, &b) {
                            return Err(DefectError::TangentialCrossing((a + b) * 0.5));
                        }
                        continue;
                    }
                    if (ha > 0.0) == (hb > 0.0) {
                        continue;
                    }
                    let x = a + (b - a) * (ha / (ha - hb));
                    let cos = (b - a).normalize().dot(&frame.n);
                    if cos.abs() < sin_tol {
                        if contour.winding_2d(&frame, &x) != 0 {
                            return Err(DefectError::TangentialCrossing(x));
                        }
                        continue;
                    }
                    total += crossing_sign(contour, &frame, &x, cos, scale)?;
                }
                Ok(total)
            }
        }
    }
}

fn crossing_sign(contour: &Contour, frame: &PlaneFrame, x: &Vec3, cos: f64, scale: f64) -> Result<i64> {
    // on the boundary the point-in-polygon test is ambiguous
    let d = contour.distance_to(x);
    if d <= BOUNDARY_RTOL * scale.max(1.0) {
        return Err(DefectError::ContourTouchesCurve { clearance: d });
    }
    let wn = contour.winding_2d(frame, x) as i64;
    Ok(if cos > 0.0 { wn } else { -wn })
}

fn segment_meets_fill(contour: &Contour, frame: &PlaneFrame, a: &Vec3, b: &Vec3) -> bool {
    let mid = (a + b) * 0.5;
    if [a, b, &mid].iter().any(|p| contour.winding_2d(frame, p) != 0) {
        return true;
    }
    let (pa, pb) = (frame.project(a), frame.project(b));
    contour.edges().any(|(c, d)| {
        let (pc, pd) = (frame.project(&c), frame.project(&d));
        proper_cross(pa, pb, pc, pd)
    })
}

fn line_meets_fill(contour: &Contour, frame: &PlaneFrame, p0: &Vec3, dir: &Vec3) -> bool {
    // the infinite in-plane line splits the polygon iff vertices lie on both sides
    let q = frame.project(p0);
    let d = frame.project(&(p0 + dir));
    let side = |v: &Vec3| {
        let p = frame.project(v);
        (d[0] - q[0]) * (p[1] - q[1]) - (d[1] - q[1]) * (p[0] - q[0])
    };
    let sides: Vec<f64> = contour.vertices().iter().map(side).collect();
    sides.iter().any(|&s| s >= 0.0) && sides.iter().any(|&s| s <= 0.0)
}

fn proper_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    o(a, b, c) * o(a, b, d) < 0.0 && o(c, d, a) * o(c, d, b) < 0.0
}

/// Signed count of defect crossings through the planar fill of `contour`.
pub fn charge_by_intersection(contour: &Contour, src: &LineSourceTensor) -> Result<i64> {
    src.flux_through(contour)
}

/// A closed polyhedral test surface: a planar base polygon swept along `axis` (a prism).
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedSurface {
    base: Contour,
    axis: Vec3,
}

impl ClosedSurface {
    pub fn prism(base: Contour, axis: Vec3) -> Result<Self> {
        let frame = base.require_plane()?;
        if frame.n.dot(&axis).abs() < 1e-12 * axis.norm().max(1e-300) {
            return Err(DefectError::InvalidContour("prism axis lies in the base plane".into()));
        }
        Ok(Self { base, axis })
    }

    /// Cylinder (as a regular `n`-gon prism) from `bottom_center` to `bottom_center + axis`.
    pub fn cylinder(bottom_center: Vec3, radius: f64, axis: Vec3, n: usize) -> Result<Self> {
        Self::prism(Contour::circle(bottom_center, radius, axis, n)?, axis)
    }

    /// Faces with outward orientation.
    pub fn faces(&self) -> Result<Vec<Contour>> {
        let up = self.base.area_vector().dot(&self.axis) > 0.0;
        let base = if up { self.base.clone() } else { self.base.reversed() };
        let mut faces = vec![base.reversed(), base.translated(self.axis)];
        for (a, b) in base.edges() {
            faces.push(Contour::new(vec![a, b, b + self.axis, a + self.axis])?);
        }
        Ok(faces)
    }

    pub fn translated(&self, by: Vec3) -> Self {
        Self { base: self.base.translated(by), axis: self.axis }
    }

    /// Net outward crossings of the defect line.
    ///
    /// A crossing on a face edge or in a face plane is ambiguous; the surface is
    /// then shifted by a tiny fixed offset and counted again.
    pub fn net_flux(&self, src: &LineSourceTensor) -> Result<i64> {
        let size = self.base.perimeter() + self.axis.norm();
        let dir = Vec3::new(0.5698402909980532, 0.7548776662466927, 0.3247179572447461).normalize();
        let mut last = None;
        for k in 0..8 {
            let shifted = self.translated(dir * (1e-7 * size * k as f64));
            match shifted.count(src) {
                Ok(n) => return Ok(n),
                Err(e @ (DefectError::ContourTouchesCurve { .. } | DefectError::TangentialCrossing(_))) => {
                    last = Some(e)
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    fn count(&self, src: &LineSourceTensor) -> Result<i64> {
        let mut net = 0;
        for face in self.faces()? {
            net += src.flux_through(&face)?;
        }
        Ok(net)
    }
}

/// Outcome of the no-open-ends check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub passed: bool,
    /// Net outward crossing count per test surface.
    pub surface_counts: Vec<i64>,
    pub has_endpoints: bool,
    pub reason: Option<String>,
}

/// Defect lines cannot end: every closed surface is crossed as often inward as outward.
///
/// Open polylines always fail. When no test surface happens to isolate one of
/// their endpoints, a small cylinder around the first endpoint is added so the
/// violation is certified by an explicit crossing count.
pub fn continuity_check(src: &LineSourceTensor, test_surfaces: &[ClosedSurface]) -> ContinuityReport {
    let mut surfaces: Vec<ClosedSurface> = test_surfaces.to_vec();
    let open = src.curve().has_endpoints();
    if open {
        if let Some(s) = endpoint_cylinder(src.curve()) {
            surfaces.push(s);
        }
    }
    let mut counts = Vec::with_capacity(surfaces.len());
    let mut reason = None;
    for s in &surfaces {
        match s.net_flux(src) {
            Ok(c) => counts.push(c),
            Err(e) => {
                reason.get_or_insert_with(|| format!("degenerate test surface: {e}"));
                counts.push(0);
            }
        }
    }
    let nonzero = counts.iter().filter(|&&c| c != 0).count();
    if open {
        reason =
            Some(format!("open defect line ends inside the domain ({nonzero} surface(s) with non-zero net crossing)"));
    } else if nonzero > 0 {
        reason.get_or_insert_with(|| format!("{nonzero} surface(s) with non-zero net crossing"));
    }
    ContinuityReport {
        passed: !open && nonzero == 0 && reason.is_none(),
        surface_counts: counts,
        has_endpoints: open,
        reason,
    }
}

fn endpoint_cylinder(curve: &DefectCurve) -> Option<ClosedSurface> {
    let poly = curve.as_polyline()?;
    let pts = poly.points();
    let (p0, p1) = (pts[0], pts[1]);
    let len = (p1 - p0).norm();
    let t = (p1 - p0) / len;
    // enclose the start point; the first segment leaves through the top cap
    let r = 0.25 * len;
    ClosedSurface::cylinder(p0 - t * (0.5 * len), r, t * len, 16).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadraturePolicy;

    fn straight() -> GradFProvider {
        GradFProvider::for_curve(DefectCurve::straight_z(), QuadraturePolicy::default())
    }

    #[test]
    fn circle_around_straight_vortex() {
        let c = Contour::circle(Vec3::zeros(), 2.0, Vec3::z(), 256).unwrap();
        let w = winding_number(&c, &straight()).unwrap();
        assert_eq!(w.n, 1);
        assert!((w.charge - 2.0 * PI).abs() < 1e-12);
        assert!(w.quality < 1e-12);
        let away = Contour::circle(Vec3::new(5.0, 0.0, 0.0), 1.0, Vec3::z(), 256).unwrap();
        let w0 = winding_number(&away, &straight()).unwrap();
        assert_eq!(w0.n, 0);
        assert!(w0.charge.abs() < 1e-12);
        let back = winding_number(&c.reversed(), &straight()).unwrap();
        assert_eq!(back.n, -1);
        assert!((back.charge + w.charge).abs() < 1e-12);
    }

    #[test]
    fn contour_touching_line_is_rejected() {
        let c = Contour::circle(Vec3::new(1.0, 0.0, 0.0), 1.0, Vec3::z(), 4).unwrap();
        // a vertex of the square sits exactly on the axis
        assert!(matches!(winding_number(&c, &straight()), Err(DefectError::ContourTouchesCurve { .. })));
    }

    #[test]
    fn straight_vortex_through_unit_disk() {
        let src = LineSourceTensor::new(DefectCurve::straight_z());
        let disk = Contour::circle(Vec3::zeros(), 1.0, Vec3::z(), 64).unwrap();
        assert_eq!(charge_by_intersection(&disk, &src).unwrap(), 1);
        assert_eq!(charge_by_intersection(&disk.reversed(), &src).unwrap(), -1);
        let side = Contour::circle(Vec3::new(3.0, 0.0, 0.0), 1.0, Vec3::x(), 64).unwrap();
        assert_eq!(charge_by_intersection(&side, &src).unwrap(), 0);
        let through = Contour::circle(Vec3::zeros(), 1.0, Vec3::x(), 64).unwrap();
        assert!(matches!(charge_by_intersection(&through, &src), Err(DefectError::TangentialCrossing(_))));
    }

    #[test]
    fn coplanar_ring_is_tangential() {
        let ring = LineSourceTensor::new(DefectCurve::ring(Vec3::zeros(), 3.0, 128).unwrap());
        let disk = Contour::circle(Vec3::zeros(), 4.0, Vec3::z(), 64).unwrap();
        assert!(matches!(charge_by_intersection(&disk, &ring), Err(DefectError::TangentialCrossing(_))));
    }

    #[test]
    fn ring_through_perpendicular_disk_nets_zero() {
        // enumeration: the unit ring meets the plane x₁ = 0 at (0, ±1, 0) with tangents ∓x̂
        let ring = LineSourceTensor::new(DefectCurve::ring(Vec3::zeros(), 1.0, 128).unwrap());
        let disk = Contour::circle(Vec3::zeros(), 2.0, Vec3::x(), 64).unwrap();
        assert_eq!(charge_by_intersection(&disk, &ring).unwrap(), 0);
        // a small disk around only (0, 1, 0) sees the tangent −x̂ alone
        let half = Contour::circle(Vec3::new(0.0, 1.0, 0.0), 0.5, Vec3::x(), 64).unwrap();
        assert_eq!(charge_by_intersection(&half, &ring).unwrap(), -1);
    }

    #[test]
    fn winding_equals_crossing_count_for_linked_ring() {
        let ring = DefectCurve::ring(Vec3::zeros(), 1.0, 256).unwrap();
        let gf = GradFProvider::for_curve(ring.clone(), QuadraturePolicy::default());
        let src = LineSourceTensor::new(ring);
        // ring point (1,0,0) has tangent +ŷ; a circle about it with normal +ŷ links once
        for normal in [Vec3::y(), -Vec3::y()] {
            let c = Contour::circle(Vec3::new(1.0, 0.0, 0.0), 0.4, normal, 256).unwrap();
            let w = winding_number(&c, &gf).unwrap();
            let k = charge_by_intersection(&c, &src).unwrap();
            assert_eq!(w.n, k);
            assert_eq!(k, if normal[1] > 0.0 { 1 } else { -1 });
            assert!(w.quality < 1e-6, "{w:?}");
        }
    }

    #[test]
    fn segment_distance_cases() {
        let o = Vec3::zeros();
        let d = segment_segment_distance(&o, &Vec3::x(), &Vec3::new(0.5, 1.0, -1.0), &Vec3::new(0.5, 1.0, 1.0));
        assert!((d - 1.0).abs() < 1e-15);
        let par = segment_segment_distance(&o, &Vec3::x(), &Vec3::new(2.0, 1.0, 0.0), &Vec3::new(3.0, 1.0, 0.0));
        assert!((par - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn continuity_for_closed_infinite_and_open_lines() {
        let caps = ClosedSurface::cylinder(Vec3::new(0.0, 0.0, -1.0), 1.0, Vec3::new(0.0, 0.0, 2.0), 32).unwrap();
        let straight = LineSourceTensor::new(DefectCurve::straight_z());
        let faces = caps.faces().unwrap();
        assert_eq!(straight.flux_through(&faces[0]).unwrap(), -1);
        assert_eq!(straight.flux_through(&faces[1]).unwrap(), 1);
        let r = continuity_check(&straight, std::slice::from_ref(&caps));
        assert!(r.passed, "{r:?}");
        assert_eq!(r.surface_counts, vec![0]);

        let ring = LineSourceTensor::new(DefectCurve::ring(Vec3::zeros(), 1.0, 64).unwrap());
        let box_around = ClosedSurface::cylinder(Vec3::new(1.0, 0.0, -0.5), 0.3, Vec3::new(0.0, 0.0, 1.0), 16).unwrap();
        let wide = ClosedSurface::cylinder(Vec3::new(0.0, 0.0, -1.0), 2.0, Vec3::new(0.0, 0.0, 2.0), 32).unwrap();
        let r = continuity_check(&ring, &[wide, box_around]);
        assert!(r.passed, "{r:?}");

        let seg = LineSourceTensor::new(DefectCurve::segment(Vec3::zeros(), Vec3::new(0.0, 0.0, 1.0), 10).unwrap());
        let r = continuity_check(&seg, &[caps]);
        assert!(!r.passed);
        assert!(r.has_endpoints);
        assert!(r.surface_counts.iter().any(|&c| c != 0), "{r:?}");
        assert_eq!(
            r,
            continuity_check(
                &seg,
                &[ClosedSurface::cylinder(Vec3::new(0.0, 0.0, -1.0), 1.0, Vec3::new(0.0, 0.0, 2.0), 32).unwrap()]
            )
        );
    }

    #[test]
    fn crossing_through_a_prism_edge_counts_once() {
        let cyl = ClosedSurface::cylinder(Vec3::new(0.0, 0.0, -1.0), 1.0, Vec3::new(0.0, 0.0, 2.0), 8).unwrap();
        let corner = cyl.faces().unwrap()[2].vertices()[0];
        let edge_point = Vec3::new(corner[0], corner[1], 0.0);
        // a closed loop entering exactly through a vertical edge and leaving through the top cap
        let loop_pts = vec![
            edge_point * 2.0,
            edge_point,
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 3.0),
            edge_point * 2.0 + Vec3::new(0.0, 0.0, 3.0),
            edge_point * 2.0,
        ];
        let src = LineSourceTensor::new(DefectCurve::from_points(loop_pts, true).unwrap());
        assert!(matches!(src.flux_through(&cyl.faces().unwrap()[2]), Err(DefectError::ContourTouchesCurve { .. })));
        assert_eq!(cyl.net_flux(&src).unwrap(), 0);
        assert!(continuity_check(&src, &[cyl]).passed);
    }
}
