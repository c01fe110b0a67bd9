//! Magnetic field, vacuum current and vector potential of defect lines.
//!
//! For a line `y(σ)` the field strength and current are
//!
//! ```text
//! B(x) = 2π (m²/e₀) ∫ dσ y′ G_m(|x − y|),      F_ij = ε_ijk B_k
//! j(x) = ∇ × B = 2π (m²/e₀) ∫ dσ ∇G_m(x − y) × y′
//! ```
//!
//! and the potential follows algebraically as `a = ∇f/e₀ − j/m²`. The
//! gradient `∇f`, `B` and `j` share one pass over the quadrature nodes.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::condensate::{grad_f_straight, CondensateSource, GradFProvider};
use crate::curve::DefectCurve;
use crate::error::{DefectError, Result};
use crate::greens::k0_k1;
use crate::grid::{FieldGrid, Grid3, Rank};
use crate::params::PhysicalParams;
use crate::quadrature::QuadraturePolicy;
use crate::Vec3;

/// Grid points closer than this many spacings to a defect are flagged.
pub const CORE_SPACINGS: f64 = 2.0;

/// Antisymmetric spatial tensor stored by its independent components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Antisym3 {
    pub f12: f64,
    pub f23: f64,
    pub f31: f64,
}

impl Antisym3 {
    /// `F_ij = ε_ijk B_k`.
    pub fn from_dual(b: &Vec3) -> Self {
        Self { f12: b[2], f23: b[0], f31: b[1] }
    }

    pub fn dual(&self) -> Vec3 {
        Vec3::new(self.f23, self.f31, self.f12)
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.f12, self.f23, self.f31]
    }

    /// Full component `F_ij` for `i, j ∈ {0, 1, 2}`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match (i, j) {
            (0, 1) => self.f12,
            (1, 0) => -self.f12,
            (1, 2) => self.f23,
            (2, 1) => -self.f23,
            (2, 0) => self.f31,
            (0, 2) => -self.f31,
            _ => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.f12.abs().max(self.f23.abs()).max(self.f31.abs())
    }
}

impl std::ops::Add for Antisym3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { f12: self.f12 + o.f12, f23: self.f23 + o.f23, f31: self.f31 + o.f31 }
    }
}

/// Everything computed at a single point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PointObservables {
    pub grad_f: Vec3,
    pub field: Antisym3,
    pub current: Vec3,
    pub potential: Vec3,
}

fn require_massive(p: &PhysicalParams) -> Result<()> {
    if p.is_massive() {
        Ok(())
    } else {
        Err(DefectError::MasslessVector)
    }
}

/// `F₁₂ = (m²/e₀) K₀(m ρ)` of the straight vortex.
pub fn field_strength_straight(rho: f64, p: &PhysicalParams) -> Result<f64> {
    require_massive(p)?;
    if !(rho > 0.0) {
        return Err(DefectError::NonPositiveRadius(rho));
    }
    let m = p.mv();
    Ok(m * m / p.e0() * k0_k1(m * rho).0)
}

/// `j = (m³/e₀) K₁(m ρ) θ̂` of the straight vortex along the `x₃` axis.
pub fn vacuum_current_straight(x: &Vec3, p: &PhysicalParams) -> Result<Vec3> {
    require_massive(p)?;
    let rho = x[0].hypot(x[1]);
    if rho == 0.0 {
        return Err(DefectError::OnAxis(*x));
    }
    let m = p.mv();
    let s = m * m * m / p.e0() * k0_k1(m * rho).1 / rho;
    Ok(Vec3::new(-s * x[1], s * x[0], 0.0))
}

/// `(∇f, B, j)` of one curve at `x`.
fn line_terms(
    curve: &DefectCurve,
    p: &PhysicalParams,
    x: &Vec3,
    quad: &QuadraturePolicy,
) -> Result<(Vec3, Vec3, Vec3)> {
    crate::condensate::check_point(curve, x, quad)?;
    let m = p.mv();
    match curve {
        DefectCurve::StraightZ { through } => {
            let local = Vec3::new(x[0] - through[0], x[1] - through[1], x[2]);
            let grad = grad_f_straight(&local)?;
            let rho = local[0].hypot(local[1]);
            let b = Vec3::new(0.0, 0.0, field_strength_straight(rho, p)?);
            Ok((grad, b, vacuum_current_straight(&local, p)?))
        }
        DefectCurve::Polyline(poly) => {
            let c = 2.0 * PI * m * m / p.e0();
            let (mut grad, mut b, mut j) = (Vec3::zeros(), Vec3::zeros(), Vec3::zeros());
            for (a, e) in poly.segments() {
                let t = (e - a).normalize();
                quad.visit_segment(a, e, x, &mut |y, w| {
                    let d = x - y;
                    let r = d.norm();
                    let r3 = r * r * r;
                    let decay = (-m * r).exp();
                    grad += t.cross(&d) * (0.5 * w / r3);
                    b += t * (w * decay / (4.0 * PI * r));
                    // ∇G × t with ∇G = −(1 + m r) e^{−m r} d / (4π r³)
                    j += d.cross(&t) * (-w * (1.0 + m * r) * decay / (4.0 * PI * r3));
                });
            }
            Ok((grad, b * c, j * c))
        }
    }
}

/// `F_ij(x)` of a single curve.
pub fn field_strength_line(
    curve: &DefectCurve,
    p: &PhysicalParams,
    x: &Vec3,
    quad: &QuadraturePolicy,
) -> Result<Antisym3> {
    require_massive(p)?;
    Ok(Antisym3::from_dual(&line_terms(curve, p, x, quad)?.1))
}

/// `j(x)` of a single curve, differentiating the kernel under the integral.
pub fn vacuum_current_line(curve: &DefectCurve, p: &PhysicalParams, x: &Vec3, quad: &QuadraturePolicy) -> Result<Vec3> {
    require_massive(p)?;
    Ok(line_terms(curve, p, x, quad)?.2)
}

/// All observables at `x` for a superposition of sources.
///
/// Regular sources contribute to `∇f` (and so to `a`) but carry neither field nor current.
pub fn observables_at(gf: &GradFProvider, p: &PhysicalParams, x: &Vec3) -> Result<PointObservables> {
    require_massive(p)?;
    let mut out = PointObservables::default();
    let mut b = Vec3::zeros();
    for s in gf.sources() {
        match s {
            CondensateSource::Defect(c) => {
                let (g, bb, j) = line_terms(c, p, x, gf.policy())?;
                out.grad_f += g;
                b += bb;
                out.current += j;
            }
            other => {
                out.grad_f += GradFProvider::new(vec![other.clone()], *gf.policy()).grad(x)?;
            }
        }
    }
    let m2 = p.mv() * p.mv();
    out.field = Antisym3::from_dual(&b);
    out.potential = out.grad_f / p.e0() - out.current / m2;
    Ok(out)
}

/// `a(x) = ∇f/e₀ − j/m²`.
pub fn vector_potential(gf: &GradFProvider, p: &PhysicalParams, x: &Vec3) -> Result<Vec3> {
    Ok(observables_at(gf, p, x)?.potential)
}

/// The two pieces of the vacuum current.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurrentDecomposition {
    /// `−m² a`
    pub meissner: Vec3,
    /// `(m²/e₀) ∇f`
    pub boson: Vec3,
    pub total: Vec3,
}

pub fn meissner_boson_decomposition(gf: &GradFProvider, p: &PhysicalParams, x: &Vec3) -> Result<CurrentDecomposition> {
    let o = observables_at(gf, p, x)?;
    let m2 = p.mv() * p.mv();
    let meissner = -m2 * o.potential;
    let boson = o.grad_f * (m2 / p.e0());
    Ok(CurrentDecomposition { meissner, boson, total: meissner + boson })
}

/// Dense grids of `∇f`, `F`, `j` and `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexObservables {
    pub grad_f: FieldGrid,
    pub field_strength: FieldGrid,
    pub current: FieldGrid,
    pub potential: FieldGrid,
    pub params: PhysicalParams,
}

impl VortexObservables {
    pub fn grids(&self) -> [(&'static str, &FieldGrid); 4] {
        [("grad_f", &self.grad_f), ("F", &self.field_strength), ("j", &self.current), ("a", &self.potential)]
    }
}

/// Evaluate every observable on `grid`, flagging points within `2h` of a defect.
pub fn fields_on_grid(gf: &GradFProvider, p: &PhysicalParams, grid: &Grid3) -> Result<VortexObservables> {
    require_massive(p)?;
    let r_core = CORE_SPACINGS * grid.spacing();
    let per_point: Vec<Option<PointObservables>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point_at(i);
            if gf.clearance(&x) < r_core {
                return None;
            }
            observables_at(gf, p, &x).ok()
        })
        .collect();
    let flags: Vec<bool> = per_point.iter().map(Option::is_none).collect();
    if flags.iter().all(|&f| f) {
        log::warn!("every grid point lies inside a defect core; all values flagged");
    }
    let build = |rank: Rank, name: &str, pick: &dyn Fn(&PointObservables) -> [f64; 3]| {
        let values = per_point.iter().flat_map(|o| o.as_ref().map_or([f64::NAN; 3], pick)).collect();
        FieldGrid::from_parts(*grid, rank, values, flags.clone(), name)
    };
    Ok(VortexObservables {
        grad_f: build(Rank::Vector3, "grad_f", &|o| o.grad_f.into())?,
        field_strength: build(Rank::Antisym3, "field_strength", &|o| o.field.to_array())?,
        current: build(Rank::Vector3, "vacuum_current", &|o| o.current.into())?,
        potential: build(Rank::Vector3, "vector_potential", &|o| o.potential.into())?,
        params: *p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::{bessel_k0, bessel_k1};

    const K0_1: f64 = 0.421_024_438_240_708_3;
    const K1_1: f64 = 0.601_907_230_197_234_6;

    fn unit() -> PhysicalParams {
        PhysicalParams::new(1.0, 1.0).unwrap()
    }

    fn q() -> QuadraturePolicy {
        QuadraturePolicy::default()
    }

    #[test]
    fn straight_closed_forms() {
        let p = unit();
        assert!((field_strength_straight(1.0, &p).unwrap() - K0_1).abs() < 1e-15);
        assert!((field_strength_straight(2.0, &p).unwrap() - 0.113_893_872_749_533_4).abs() < 1e-15);
        let half = field_strength_straight(1.0, &PhysicalParams::new(2.0, 1.0).unwrap()).unwrap();
        assert!((half - 0.210_512_2).abs() < 1e-7);
        let j = vacuum_current_straight(&Vec3::new(1.0, 0.0, 0.0), &p).unwrap();
        assert!((j - Vec3::new(0.0, K1_1, 0.0)).norm() < 1e-15);
        let j = vacuum_current_straight(&Vec3::new(0.0, 1.0, 0.0), &p).unwrap();
        assert!((j - Vec3::new(-K1_1, 0.0, 0.0)).norm() < 1e-15);
        let far = vacuum_current_straight(&Vec3::new(10.0, 0.0, 0.0), &p).unwrap();
        assert!((far.norm() - 1.864_877_345_382_558_5e-5).abs() < 1e-18);
        for z in [-7.0, 0.0, 3.5] {
            assert_eq!(vacuum_current_straight(&Vec3::new(1.0, 0.0, z), &p).unwrap()[1], K1_1);
        }
        assert!(matches!(vacuum_current_straight(&Vec3::new(0.0, 0.0, 1.0), &p), Err(DefectError::OnAxis(_))));
        let massless = PhysicalParams::new(1.0, 0.0).unwrap();
        assert_eq!(field_strength_straight(1.0, &massless), Err(DefectError::MasslessVector));
    }

    #[test]
    fn analytic_curve_dispatches_to_closed_forms() {
        let f = field_strength_line(&DefectCurve::straight_z(), &unit(), &Vec3::new(1.0, 0.0, 0.0), &q()).unwrap();
        assert!((f.f12 - K0_1).abs() < 1e-15 && f.f23 == 0.0 && f.f31 == 0.0);
        let p = PhysicalParams::new(1.0, 1.0).unwrap();
        let rho6 = field_strength_straight(6.0, &p).unwrap();
        assert!((rho6 - 1.243_994_328_013_123_4e-3).abs() < 1e-16);
    }

    #[test]
    fn truncated_polyline_matches_closed_forms() {
        let line = DefectCurve::z_axis_surrogate(40.0, 0.02).unwrap();
        let p = unit();
        for rho in [0.5, 1.0, 2.0, 3.0] {
            let x = Vec3::new(rho * 0.6, rho * 0.8, 0.3);
            let f = field_strength_line(&line, &p, &x, &q()).unwrap();
            assert!((f.f12 / bessel_k0(rho).unwrap() - 1.0).abs() < 1e-4, "rho={rho}");
            assert!(f.f23.abs() < 1e-12 && f.f31.abs() < 1e-12);
            let j = vacuum_current_line(&line, &p, &x, &q()).unwrap();
            let want = vacuum_current_straight(&x, &p).unwrap();
            assert!((j - want).norm() / bessel_k1(rho).unwrap() < 1e-4, "rho={rho}");
        }
    }

    #[test]
    fn current_is_curl_of_field() {
        // finite-difference curl of B at an off-axis point near a ring
        let ring = DefectCurve::ring(Vec3::zeros(), 2.0, 400).unwrap();
        let p = PhysicalParams::new(1.3, 0.8).unwrap();
        let x = Vec3::new(1.2, 0.7, 0.4);
        let b = |x: Vec3| field_strength_line(&ring, &p, &x, &q()).unwrap().dual();
        let h = 1e-4;
        let d = |a: usize| {
            let mut e = Vec3::zeros();
            e[a] = h;
            (b(x + e) - b(x - e)) / (2.0 * h)
        };
        let (d0, d1, d2) = (d(0), d(1), d(2));
        let curl = Vec3::new(d1[2] - d2[1], d2[0] - d0[2], d0[1] - d1[0]);
        let j = vacuum_current_line(&ring, &p, &x, &q()).unwrap();
        assert!((curl - j).norm() < 1e-6 * j.norm(), "{curl} vs {j}");
    }

    #[test]
    fn ring_axis_current_is_axial() {
        // transverse parts cancel; the axial part is 2π(m²/e₀)·R²(1 + m r) e^{−m r} / (2 r³)
        let (r0, z) = (3.0, 1.0);
        let ring = DefectCurve::ring(Vec3::zeros(), r0, 1024).unwrap();
        let j = vacuum_current_line(&ring, &unit(), &Vec3::new(0.0, 0.0, z), &q()).unwrap();
        assert!(j[0].abs() < 1e-14 && j[1].abs() < 1e-14, "{j}");
        let r = (r0 * r0 + z * z).sqrt();
        let want = 2.0 * PI * r0 * r0 * (1.0 + r) * (-r).exp() / (2.0 * r * r * r);
        assert!((j[2] / want - 1.0).abs() < 1e-4, "{} vs {want}", j[2]);
    }

    #[test]
    fn vector_potential_examples() {
        let gf = GradFProvider::for_curve(DefectCurve::straight_z(), q());
        let p = unit();
        let a = vector_potential(&gf, &p, &Vec3::new(1.0, 0.0, 0.0)).unwrap();
        assert!((a - Vec3::new(0.0, 1.0 - K1_1, 0.0)).norm() < 1e-15);
        assert!((a[1] - 0.398_093).abs() < 1e-6);
        let near = vector_potential(&gf, &p, &Vec3::new(1e-3, 0.0, 0.0)).unwrap();
        assert!(near.norm() <= 0.01);
        let far = vector_potential(&gf, &p, &Vec3::new(0.0, 10.0, 0.0)).unwrap();
        assert!((far.norm() * 10.0 - 1.0).abs() < 1e-3);
    }

    #[test]
    fn decomposition() {
        let gf = GradFProvider::for_curve(DefectCurve::straight_z(), q());
        let p = unit();
        let d = meissner_boson_decomposition(&gf, &p, &Vec3::new(10.0, 0.0, 0.0)).unwrap();
        // |total|/|boson| = mρ K₁(mρ) ≈ 1.86e-4 at ρ = 10
        assert!(d.total.norm() <= 2e-4 * d.boson.norm());
        assert!((d.total.norm() / d.boson.norm() - 10.0 * bessel_k1(10.0).unwrap()).abs() < 1e-12);
        let j = vacuum_current_straight(&Vec3::new(10.0, 0.0, 0.0), &p).unwrap();
        assert!((d.total - j).norm() < 1e-15);
        let d = meissner_boson_decomposition(&gf, &p, &Vec3::new(0.5, 0.0, 0.0)).unwrap();
        // boson term is 1/ρ; the Meissner term 1/ρ − K₁(ρ) stays finite
        assert!((d.boson[1] - 2.0).abs() < 1e-15);
        assert!((d.meissner[1] + 2.0 - bessel_k1(0.5).unwrap()).abs() < 1e-14);
        assert!((d.total[1] - bessel_k1(0.5).unwrap()).abs() < 1e-14);

        let regular = GradFProvider::linear(Vec3::x());
        let d = meissner_boson_decomposition(&regular, &p, &Vec3::new(0.3, -2.0, 1.0)).unwrap();
        assert_eq!(d.total, Vec3::zeros());
        let o = observables_at(&regular, &p, &Vec3::new(0.3, -2.0, 1.0)).unwrap();
        assert_eq!(o.field, Antisym3::default());
        assert_eq!(o.potential, Vec3::x());
    }

    #[test]
    fn grids_flag_core_and_superpose() {
        let grid = Grid3::new([-5.0, -5.0, -0.15625], 0.15625, [65, 65, 3]).unwrap();
        let p = unit();
        let gf = GradFProvider::for_curve(DefectCurve::straight_z(), q());
        let obs = fields_on_grid(&gf, &p, &grid).unwrap();
        let axis = grid.index(32, 32, 1);
        for (_, g) in obs.grids() {
            assert!(g.is_flagged(axis));
            assert!(g.flagged_count() > 0 && g.flagged_count() < grid.len() / 10);
        }

        let tiny = Grid3::new([-0.01, -0.01, -0.01], 0.01, [3, 3, 3]).unwrap();
        let all = fields_on_grid(&gf, &p, &tiny).unwrap();
        assert_eq!(all.current.flagged_count(), 27);

        let a = DefectCurve::straight_z_through(-1.5, 0.0);
        let b = DefectCurve::straight_z_through(1.5, 0.5);
        let both = fields_on_grid(&GradFProvider::for_curves([a.clone(), b.clone()], q()), &p, &grid).unwrap();
        let sa = fields_on_grid(&GradFProvider::for_curve(a, q()), &p, &grid).unwrap();
        let sb = fields_on_grid(&GradFProvider::for_curve(b, q()), &p, &grid).unwrap();
        for i in (0..grid.len()).filter(|&i| !both.current.is_flagged(i)) {
            for c in 0..3 {
                let s = sa.current.component(i, c) + sb.current.component(i, c);
                assert!((both.current.component(i, c) - s).abs() <= 1e-12 * (1.0 + s.abs()));
            }
        }
    }

    #[test]
    fn massless_rejected() {
        let gf = GradFProvider::for_curve(DefectCurve::straight_z(), q());
        let p = PhysicalParams::new(1.0, 0.0).unwrap();
        let grid = Grid3::new([1.0, 1.0, 0.0], 0.1, [3, 3, 3]).unwrap();
        assert_eq!(fields_on_grid(&gf, &p, &grid).unwrap_err(), DefectError::MasslessVector);
    }
}
