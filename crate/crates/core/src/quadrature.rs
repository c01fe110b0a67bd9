//! Gauss–Legendre rules and the segment-adaptive policy used for line integrals.

use std::f64::consts::PI;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::curve::point_segment_distance;
use crate::Vec3;

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Legendre roots by Newton iteration from the Chebyshev-like initial guess.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate `f` over `[a, b]` with this rule.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

static GAUSS4: LazyLock<GaussRule> = LazyLock::new(|| GaussRule::legendre(4));
static GAUSS8: LazyLock<GaussRule> = LazyLock::new(|| GaussRule::legendre(8));

/// Supported per-segment rule orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GaussOrder {
    G4,
    G8,
}

impl GaussOrder {
    pub fn rule(self) -> &'static GaussRule {
        match self {
            GaussOrder::G4 => &GAUSS4,
            GaussOrder::G8 => &GAUSS8,
        }
    }

    pub fn points(self) -> usize {
        match self {
            GaussOrder::G4 => 4,
            GaussOrder::G8 => 8,
        }
    }

    pub fn from_points(n: usize) -> Option<Self> {
        match n {
            4 => Some(GaussOrder::G4),
            8 => Some(GaussOrder::G8),
            _ => None,
        }
    }
}

/// How line integrals along a defect are evaluated.
///
/// Each polyline segment gets a fixed Gauss rule; a segment is bisected while
/// the evaluation point is closer than `refine_ratio` times its length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraturePolicy {
    pub order: GaussOrder,
    pub refine_ratio: f64,
    pub max_depth: u32,
    /// Points closer than this to the curve are rejected.
    pub exclusion_radius: f64,
    /// Minimum half-length for open polylines standing in for infinite lines; 0 disables.
    pub min_truncation: f64,
}

impl Default for QuadraturePolicy {
    fn default() -> Self {
        Self { order: GaussOrder::G8, refine_ratio: 4.0, max_depth: 40, exclusion_radius: 1e-9, min_truncation: 0.0 }
    }
}

impl QuadraturePolicy {
    pub fn with_order(mut self, order: GaussOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_exclusion_radius(mut self, r: f64) -> Self {
        self.exclusion_radius = r;
        self
    }

    pub fn with_min_truncation(mut self, l: f64) -> Self {
        self.min_truncation = l;
        self
    }

    /// Visit quadrature nodes `(y, w)` for `∫ ds g(y(s))` along `[a, b]` as seen from `x`.
    pub fn visit_segment(&self, a: Vec3, b: Vec3, x: &Vec3, visit: &mut impl FnMut(Vec3, f64)) {
        self.visit_rec(a, b, x, 0, visit);
    }

    fn visit_rec(&self, a: Vec3, b: Vec3, x: &Vec3, depth: u32, visit: &mut impl FnMut(Vec3, f64)) {
        let len = (b - a).norm();
        if depth < self.max_depth && point_segment_distance(x, &a, &b) < self.refine_ratio * len {
            let mid = (a + b) * 0.5;
            self.visit_rec(a, mid, x, depth + 1, visit);
            self.visit_rec(mid, b, x, depth + 1, visit);
            return;
        }
        let rule = self.order.rule();
        let half = 0.5 * len;
        for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
            visit(a + (b - a) * (0.5 * (1.0 + xi)), w * half);
        }
    }
}

/// Adaptive Gauss–Legendre integration of a smooth scalar function.
///
/// An interval is accepted when the 8-point rule and its two halves agree to
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    let rule = GaussOrder::G8.rule();
    let whole = rule.integrate(a, b, f);
    adaptive_rec(f, rule, a, b, whole, rel_tol, abs_tol, 0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_rec(
    f: &impl Fn(f64) -> f64,
    rule: &GaussRule,
    a: f64,
    b: f64,
    whole: f64,
    rel_tol: f64,
    abs_tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let refined = left + right;
    if depth >= 50 || (refined - whole).abs() <= abs_tol.max(rel_tol * refined.abs()) {
        return refined;
    }
    adaptive_rec(f, rule, a, m, left, rel_tol, 0.5 * abs_tol, depth + 1)
        + adaptive_rec(f, rule, m, b, right, rel_tol, 0.5 * abs_tol, depth + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rules_integrate_polynomials_exactly() {
        for (rule, deg) in [(GaussOrder::G4.rule(), 7), (GaussOrder::G8.rule(), 15)] {
            let sum_w: f64 = rule.weights.iter().sum();
            assert!((sum_w - 2.0).abs() < 1e-14);
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "{deg}: {got}");
        }
        let g4 = GaussOrder::G4.rule();
        // tabulated ±0.8611363115940526, ±0.3399810435848563
        assert!((g4.nodes[3] - 0.861_136_311_594_052_6).abs() < 1e-15);
        assert!((g4.nodes[2] - 0.339_981_043_584_856_3).abs() < 1e-15);
    }

    #[test]
    fn adaptive_integrator_handles_peaks() {
        let f = |x: f64| 1.0 / (1e-4 + x * x);
        let got = integrate_adaptive(&f, -1.0, 1.0, 1e-13, 1e-15);
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((got - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn segment_visitor_refines_near_point() {
        let pol = QuadraturePolicy::default();
        let (a, b) = (Vec3::new(0.0, 0.0, -1.0), Vec3::new(0.0, 0.0, 1.0));
        let mut total = 0.0;
        let mut count = 0;
        // ∫ dz / (ρ² + z²)^{3/2} over [-1, 1] = 2 / (ρ² √(ρ² + 1))
        let x = Vec3::new(0.01, 0.0, 0.0);
        pol.visit_segment(a, b, &x, &mut |y, w| {
            total += w / (x - y).norm().powi(3);
            count += 1;
        });
        let rho: f64 = 0.01;
        let exact = 2.0 / (rho * rho * (rho * rho + 1.0).sqrt());
        assert!((total - exact).abs() < 1e-10 * exact, "{total} vs {exact}");
        assert!(count > 8);
    }
}
