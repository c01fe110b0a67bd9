//! Field-equation residuals of the condensation function on a grid.

use std::collections::VecDeque;

use serde::Serialize;

use super::{winding_number, GradFProvider, WindingNumber};
use crate::contour::Contour;
use crate::error::Result;
use crate::fields::CORE_SPACINGS;
use crate::grid::{FieldGrid, Grid3, Rank};
use crate::Vec3;

/// Sample `∇f` on `grid`, flagging points inside the core or where evaluation fails.
pub(crate) fn sample_gradient(gf: &GradFProvider, grid: &Grid3) -> FieldGrid {
    let r_core = CORE_SPACINGS * grid.spacing();
    FieldGrid::sample(*grid, Rank::Vector3, "grad_f", |x| {
        if gf.clearance(x) < r_core {
            return None;
        }
        gf.grad(x).ok().map(|g| [g[0], g[1], g[2]])
    })
}

/// Central-difference divergence of the sampled gradient, `∇·(∇f)`, at interior points.
///
/// Boundary nodes, core nodes, and nodes whose stencil touches the core are flagged.
pub fn harmonic_residual(gf: &GradFProvider, grid: &Grid3) -> Result<FieldGrid> {
    let grad = sample_gradient(gf, grid);
    let mut values = vec![f64::NAN; grid.len()];
    let mut flags = vec![true; grid.len()];
    for p in 0..grid.len() {
        if grad.stencil_ok(p) {
            values[p] = (0..3).map(|a| grad.central_diff(p, a, a)).sum();
            flags[p] = false;
        }
    }
    FieldGrid::from_parts(*grid, Rank::Scalar, values, flags, "harmonic_residual")
}

/// Whether a condensation function can solve `(−∇² + m²) f = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityReport {
    /// Non-zero winding around the contour.
    pub singular: bool,
    /// `m == 0` when singular; always true for regular `f`.
    pub m_ok: bool,
    /// Max-norm of `(−∇²_h + m²) f` over the evaluated points.
    pub residual_norm: f64,
    /// `m² · min |f|` over the same points; for singular `f` and `m > 0` the residual is at least this.
    pub lower_bound: f64,
    pub min_abs_f: f64,
    /// Smallest defect clearance among the evaluated points.
    pub min_clearance: f64,
    pub mass: f64,
    pub winding: WindingNumber,
    pub points: usize,
}

/// Check the massless-compatibility theorem for `f` on `grid`.
///
/// `f` is rebuilt by integrating `∇f` along grid edges from the first
/// unflagged node (seeded with the closed-form value when available). The
/// reconstruction is multivalued around a defect; in the Laplacian stencil
/// every neighbour is moved onto the branch nearest the centre value, with
/// the branch period taken from the measured winding around `contour`.
pub fn massless_compatibility(
    gf: &GradFProvider,
    contour: &Contour,
    m: f64,
    grid: &Grid3,
) -> Result<CompatibilityReport> {
    massless_compatibility_masked(gf, contour, m, grid, 0.0)
}

/// [`massless_compatibility`] evaluated only at nodes at least `min_clearance` from every defect.
pub fn massless_compatibility_masked(
    gf: &GradFProvider,
    contour: &Contour,
    m: f64,
    grid: &Grid3,
    min_clearance: f64,
) -> Result<CompatibilityReport> {
    let keep_from = min_clearance;
    let winding = winding_number(contour, gf)?;
    let singular = winding.n != 0;
    let grad = sample_gradient(gf, grid);
    let f = reconstruct(gf, &grad)?;
    let period = 2.0 * std::f64::consts::PI * winding.n as f64;

    let h2 = grid.spacing() * grid.spacing();
    let mut residual_norm: f64 = 0.0;
    let mut min_abs_f = f64::INFINITY;
    let mut min_clearance = f64::INFINITY;
    let mut points = 0;
    for p in 0..grid.len() {
        let Some(centre) = f[p] else { continue };
        if !grid.is_interior(p) {
            continue;
        }
        let mut lap = -6.0 * centre;
        let mut ok = true;
        for a in 0..3 {
            let s = grid.stride(a);
            for q in [p - s, p + s] {
                match f[q] {
                    Some(v) => lap += nearest_branch(v, centre, period),
                    None => ok = false,
                }
            }
        }
        let clearance = gf.clearance(&grid.point_at(p));
        if !ok || clearance < keep_from {
            continue;
        }
        let r = -lap / h2 + m * m * centre;
        residual_norm = residual_norm.max(r.abs());
        min_abs_f = min_abs_f.min(centre.abs());
        min_clearance = min_clearance.min(clearance);
        points += 1;
    }
    if points == 0 {
        min_abs_f = 0.0;
    }
    Ok(CompatibilityReport {
        singular,
        m_ok: !singular || m == 0.0,
        residual_norm,
        lower_bound: m * m * min_abs_f,
        min_abs_f,
        min_clearance,
        mass: m,
        winding,
        points,
    })
}

fn nearest_branch(v: f64, centre: f64, period: f64) -> f64 {
    if period == 0.0 {
        return v;
    }
    v - ((v - centre) / period).round() * period
}

/// Breadth-first path integration of `∇f` over unflagged nodes.
fn reconstruct(gf: &GradFProvider, grad: &FieldGrid) -> Result<Vec<Option<f64>>> {
    let grid = grad.grid();
    let mut f: Vec<Option<f64>> = vec![None; grid.len()];
    let Some(base) = (0..grid.len()).find(|&p| !grad.is_flagged(p)) else {
        return Ok(f);
    };
    let x0 = grid.point_at(base);
    f[base] = Some(gf.reference_value(&x0).unwrap_or(0.0));
    let rule = gf.policy().order.rule();
    let dims = grid.dims();
    let mut queue = VecDeque::from([base]);
    while let Some(p) = queue.pop_front() {
        let ijk = grid.ijk(p);
        let xp = grid.point_at(p);
        let fp = f[p].expect("queued nodes carry a value");
        for a in 0..3 {
            let s = grid.stride(a);
            let neighbours = [(ijk[a] > 0).then(|| p - s), (ijk[a] + 1 < dims[a]).then(|| p + s)];
            for q in neighbours.into_iter().flatten() {
                if f[q].is_some() || grad.is_flagged(q) {
                    continue;
                }
                let xq = grid.point_at(q);
                let t: Vec3 = xq - xp;
                let mut inc = 0.0;
                for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
                    let y = xp + t * (0.5 * (1.0 + xi));
                    inc += w * gf.grad(&y)?.dot(&t);
                }
                f[q] = Some(fp + 0.5 * inc);
                queue.push_back(q);
            }
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condensate::CondensateSource;
    use crate::curve::DefectCurve;
    use crate::quadrature::QuadraturePolicy;
    use std::f64::consts::PI;

    fn straight() -> GradFProvider {
        GradFProvider::for_curve(DefectCurve::straight_z(), QuadraturePolicy::default())
    }

    fn max_abs(g: &FieldGrid) -> f64 {
        (0..g.grid().len()).filter(|&p| !g.is_flagged(p)).map(|p| g.component(p, 0).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn linear_and_square_synthetic_providers() {
        let grid = Grid3::new([-1.0, -1.0, -1.0], 0.1, [21, 21, 21]).unwrap();
        let lin = GradFProvider::linear(Vec3::new(1.0, 0.0, 0.0));
        let r = harmonic_residual(&lin, &grid).unwrap();
        assert!(max_abs(&r) <= 1e-12);
        assert_eq!(r.flagged_count(), 21 * 21 * 21 - 19 * 19 * 19);

        let sq = GradFProvider::new(vec![CondensateSource::Square { axis: 0 }], QuadraturePolicy::default());
        let r = harmonic_residual(&sq, &grid).unwrap();
        for p in (0..grid.len()).filter(|&p| !r.is_flagged(p)) {
            assert!((r.component(p, 0) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn straight_vortex_residual_is_second_order() {
        // fixed box x₁, x₂ ∈ [0.5, 2.1]; compare on the coarse lattice
        let run = |h: f64| {
            let n = (1.6 / h).round() as usize + 1;
            let g = Grid3::new([0.5, 0.5, -h], h, [n, n, 3]).unwrap();
            let r = harmonic_residual(&straight(), &g).unwrap();
            let coarse = Grid3::new([0.5, 0.5, -0.2], 0.2, [9, 9, 3]).unwrap();
            (0..coarse.len())
                .filter(|&p| coarse.is_interior(p))
                .map(|p| r.component(g.locate(&coarse.point_at(p)).unwrap(), 0).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (run(0.1), run(0.05));
        let order = (e1 / e2).log2();
        assert!((order - 2.0).abs() < 0.1, "order {order} ({e1}, {e2})");
        // 33³ grid, h = 0.1, offset from the axis
        let g = Grid3::new([0.5, 0.5, -1.6], 0.1, [33, 33, 33]).unwrap();
        let r = harmonic_residual(&straight(), &g).unwrap();
        assert!(max_abs(&r) < 0.02, "{}", max_abs(&r));
    }

    #[test]
    fn massless_compatibility_straight_vortex() {
        // box straddling the branch cut on the negative x₁ axis
        let grid = Grid3::new([-3.0, -1.0, -0.1], 0.05, [41, 41, 3]).unwrap();
        let contour = Contour::circle(Vec3::zeros(), 2.0, Vec3::z(), 256).unwrap();
        let m0 = massless_compatibility(&straight(), &contour, 0.0, &grid).unwrap();
        assert!(m0.singular && m0.m_ok);
        assert!(m0.residual_norm < 5e-3, "{m0:?}");

        let m1 = massless_compatibility(&straight(), &contour, 1.0, &grid).unwrap();
        assert!(m1.singular && !m1.m_ok);
        // the branch continued across the cut runs from −3π/4 down to −5π/4, so
        // the residual is m²|θ| at the upper-right interior corner (−1.05, 0.95)
        assert!(m1.min_abs_f > 2.3 && m1.residual_norm >= 0.9 * m1.lower_bound);
        let corner = PI + (0.95f64 / 1.05).atan();
        assert!((m1.residual_norm - corner).abs() < 5e-3, "{} vs {corner}", m1.residual_norm);
    }

    #[test]
    fn massless_compatibility_on_annulus_enclosing_axis() {
        let grid = Grid3::new([-2.0, -2.0, -0.05], 0.05, [81, 81, 3]).unwrap();
        let contour = Contour::circle(Vec3::zeros(), 1.0, Vec3::z(), 256).unwrap();
        let gf = straight();
        let core = 0.5;
        let masked = GradFProvider::for_curve(
            DefectCurve::straight_z(),
            QuadraturePolicy::default().with_exclusion_radius(core),
        );
        let m0 = massless_compatibility(&masked, &contour, 0.0, &grid).unwrap();
        assert!(m0.singular && m0.m_ok);
        assert!(m0.residual_norm < 0.05, "{}", m0.residual_norm);
        let _ = gf;
    }

    #[test]
    fn regular_function_has_no_constraint() {
        let grid = Grid3::new([-1.0, -1.0, -0.1], 0.1, [21, 21, 3]).unwrap();
        let contour = Contour::circle(Vec3::zeros(), 0.5, Vec3::z(), 64).unwrap();
        let lin = GradFProvider::linear(Vec3::new(1.0, 0.0, 0.0));
        let r = massless_compatibility(&lin, &contour, 0.0, &grid).unwrap();
        assert!(!r.singular && r.m_ok);
        assert!(r.residual_norm < 1e-10);
        let r1 = massless_compatibility(&lin, &contour, 1.0, &grid).unwrap();
        assert!(r1.m_ok);
    }
}
