//! Closed oriented polygonal loops used for charge integrals.

use std::f64::consts::PI;

use crate::error::{DefectError, Result};
use crate::Vec3;

/// Relative out-of-plane deviation below which a contour counts as planar.
pub const PLANAR_RTOL: f64 = 1e-9;

/// Closed polygon; the closing edge from the last vertex back to the first is implied.
/// The orientation is the right-handed normal of the vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    vertices: Vec<Vec3>,
}

/// Orthonormal frame of a planar contour: `origin`, in-plane axes `u`, `v`, normal `n = u × v`.
#[derive(Debug, Clone, Copy)]
pub struct PlaneFrame {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub n: Vec3,
}

impl PlaneFrame {
    pub fn project(&self, x: &Vec3) -> [f64; 2] {
        let d = x - self.origin;
        [d.dot(&self.u), d.dot(&self.v)]
    }

    pub fn height(&self, x: &Vec3) -> f64 {
        (x - self.origin).dot(&self.n)
    }
}

impl Contour {
    pub fn new(mut vertices: Vec<Vec3>) -> Result<Self> {
        if vertices.len() >= 2 && vertices.first() == vertices.last() {
            vertices.pop();
        }
        if vertices.len() < 3 {
            return Err(DefectError::InvalidContour(format!("need >= 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().flat_map(|v| v.iter()).any(|c| !c.is_finite()) {
            return Err(DefectError::InvalidContour("non-finite vertex".into()));
        }
        let n = vertices.len();
        if (0..n).any(|i| vertices[i] == vertices[(i + 1) % n]) {
            return Err(DefectError::InvalidContour("repeated consecutive vertex".into()));
        }
        let c = Self { vertices };
        if c.area_vector().norm() == 0.0 {
            return Err(DefectError::InvalidContour("degenerate (zero-area) polygon".into()));
        }
        if let Some(frame) = c.plane() {
            if c.self_intersects(&frame) {
                return Err(DefectError::InvalidContour("planar contour self-intersects".into()));
            }
        }
        Ok(c)
    }

    /// Regular `n`-gon inscribed in the circle, counter-clockwise about `normal`.
    pub fn circle(center: Vec3, radius: f64, normal: Vec3, n: usize) -> Result<Self> {
        if !(radius > 0.0) || normal.norm() == 0.0 || n < 3 {
            return Err(DefectError::InvalidContour(format!(
                "circle needs radius > 0, non-zero normal and >= 3 segments (got {radius}, {n})"
            )));
        }
        let nz = normal.normalize();
        let (u, v) = orthonormal_pair(&nz);
        let vertices = (0..n)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / n as f64;
                center + (u * phi.cos() + v * phi.sin()) * radius
            })
            .collect();
        Self::new(vertices)
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        Self { vertices }
    }

    pub fn translated(&self, by: Vec3) -> Self {
        Self { vertices: self.vertices.iter().map(|v| v + by).collect() }
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Vector area `½ Σ vᵢ × vᵢ₊₁` (Newell); its direction is the contour normal.
    pub fn area_vector(&self) -> Vec3 {
        self.edges().map(|(a, b)| a.cross(&b)).sum::<Vec3>() * 0.5
    }

    pub fn centroid(&self) -> Vec3 {
        self.vertices.iter().sum::<Vec3>() / self.vertices.len() as f64
    }

    /// Plane frame if all vertices lie in one plane, else `None`.
    pub fn plane(&self) -> Option<PlaneFrame> {
        let n = self.area_vector().normalize();
        let origin = self.centroid();
        let scale = self.vertices.iter().map(|v| (v - origin).norm()).fold(0.0, f64::max);
        let dev = self.vertices.iter().map(|v| (v - origin).dot(&n).abs()).fold(0.0, f64::max);
        if dev > PLANAR_RTOL * scale {
            return None;
        }
        let (u, v) = orthonormal_pair(&n);
        Some(PlaneFrame { origin, u, v, n })
    }

    pub fn require_plane(&self) -> Result<PlaneFrame> {
        self.plane().ok_or_else(|| {
            let n = self.area_vector().normalize();
            let o = self.centroid();
            let dev = self.vertices.iter().map(|v| (v - o).dot(&n).abs()).fold(0.0, f64::max);
            DefectError::NonPlanarContour(dev)
        })
    }

    /// 2D winding number of the projected polygon around `x` (assumed in-plane).
    pub fn winding_2d(&self, frame: &PlaneFrame, x: &Vec3) -> i32 {
        let p = frame.project(x);
        let mut wn = 0;
        for (a, b) in self.edges() {
            let (a, b) = (frame.project(&a), frame.project(&b));
            let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
            if a[1] <= p[1] {
                if b[1] > p[1] && cross > 0.0 {
                    wn += 1;
                }
            } else if b[1] <= p[1] && cross < 0.0 {
                wn -= 1;
            }
        }
        wn
    }

    /// Minimum distance from any contour edge to `x`.
    pub fn distance_to(&self, x: &Vec3) -> f64 {
        self.edges().map(|(a, b)| crate::curve::point_segment_distance(x, &a, &b)).fold(f64::INFINITY, f64::min)
    }

    fn self_intersects(&self, frame: &PlaneFrame) -> bool {
        let pts: Vec<[f64; 2]> = self.vertices.iter().map(|v| frame.project(v)).collect();
        let n = pts.len();
        for i in 0..n {
            for j in i + 1..n {
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    return true;
                }
            }
        }
        false
    }
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let (o1, o2) = (orient(a, b, c), orient(a, b, d));
    let (o3, o4) = (orient(c, d, a), orient(c, d, b));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Unit vectors `(u, v)` with `u × v = n` for unit `n`.
pub fn orthonormal_pair(n: &Vec3) -> (Vec3, Vec3) {
    let helper = if n[0].abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = (helper - n * helper.dot(n)).normalize();
    (u, n.cross(&u))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_orientation_follows_normal() {
        let c = Contour::circle(Vec3::zeros(), 2.0, Vec3::z(), 64).unwrap();
        let a = c.area_vector();
        assert!(a[2] > 0.0 && a[0].abs() < 1e-12 && a[1].abs() < 1e-12);
        assert!(c.reversed().area_vector()[2] < 0.0);
        let f = c.plane().unwrap();
        assert!((f.n - Vec3::z()).norm() < 1e-12);
        assert_eq!(c.winding_2d(&f, &Vec3::zeros()), 1);
        assert_eq!(c.reversed().winding_2d(&c.reversed().plane().unwrap(), &Vec3::zeros()), 1);
        assert_eq!(c.winding_2d(&f, &Vec3::new(3.0, 0.0, 0.0)), 0);
    }

    #[test]
    fn rejects_degenerate_and_bowtie() {
        let p = |x: f64, y: f64| Vec3::new(x, y, 0.0);
        assert!(Contour::new(vec![p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        assert!(Contour::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(2.0, 0.0)]).is_err());
        let bowtie = vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)];
        assert!(Contour::new(bowtie).is_err());
        let square = Contour::new(vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 1.0)]);
        assert!((square.unwrap().area_vector()[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonplanar_contour_has_no_frame() {
        let c = Contour::new(vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 1.0),
            Vec3::new(0.0, 1.0, 0.0),
        ])
        .unwrap();
        assert!(c.plane().is_none());
        assert!(matches!(c.require_plane(), Err(DefectError::NonPlanarContour(_))));
    }
}
