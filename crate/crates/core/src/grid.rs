//! Uniform rectilinear grids and sampled fields on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{DefectError, Result};
use crate::Vec3;

/// Uniform grid: `origin + h·(i, j, k)` for `i < n₁, j < n₂, k < n₃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid3 {
    origin: [f64; 3],
    spacing: f64,
    dims: [usize; 3],
}

impl Grid3 {
    pub fn new(origin: [f64; 3], spacing: f64, dims: [usize; 3]) -> Result<Self> {
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(DefectError::InvalidGrid(format!("spacing must be > 0, got {spacing}")));
        }
        if dims.iter().any(|&n| n < 3) {
            return Err(DefectError::InvalidGrid(format!("every dimension must be >= 3, got {dims:?}")));
        }
        if origin.iter().any(|v| !v.is_finite()) {
            return Err(DefectError::InvalidGrid("non-finite origin".into()));
        }
        Ok(Self { origin, spacing, dims })
    }

    /// Grid covering the box `[lo, lo + extent]` with spacing `h`; extents are rounded to whole cells.
    pub fn covering(lo: [f64; 3], extent: [f64; 3], h: f64) -> Result<Self> {
        let dims = extent.map(|e| (e / h).round() as usize + 1);
        Self::new(lo, h, dims)
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear index; `k` varies fastest.
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.dims[1] + j) * self.dims[2] + k
    }

    pub fn ijk(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let rest = idx / self.dims[2];
        [rest / self.dims[1], rest % self.dims[1], k]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        let h = self.spacing;
        Vec3::new(self.origin[0] + h * i as f64, self.origin[1] + h * j as f64, self.origin[2] + h * k as f64)
    }

    pub fn point_at(&self, idx: usize) -> Vec3 {
        let [i, j, k] = self.ijk(idx);
        self.point(i, j, k)
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        let ijk = self.ijk(idx);
        ijk.iter().zip(self.dims).all(|(&c, n)| c > 0 && c + 1 < n)
    }

    /// Index of the node at `x`, if `x` sits on the lattice (to 1e-9·h).
    pub fn locate(&self, x: &Vec3) -> Option<usize> {
        let mut ijk = [0usize; 3];
        for a in 0..3 {
            let t = (x[a] - self.origin[a]) / self.spacing;
            let r = t.round();
            if (t - r).abs() > 1e-9 || r < 0.0 || r as usize >= self.dims[a] {
                return None;
            }
            ijk[a] = r as usize;
        }
        Some(self.index(ijk[0], ijk[1], ijk[2]))
    }

    /// Index offset of the `±1` neighbour along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        match axis {
            0 => self.dims[1] * self.dims[2],
            1 => self.dims[2],
            _ => 1,
        }
    }
}

/// Tensor rank of a sampled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rank {
    Scalar,
    Vector3,
    /// Antisymmetric 3×3 tensor stored as `(F₁₂, F₂₃, F₃₁)`.
    Antisym3,
}

impl Rank {
    pub fn components(self) -> usize {
        match self {
            Rank::Scalar => 1,
            Rank::Vector3 | Rank::Antisym3 => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Rank::Scalar => "scalar",
            Rank::Vector3 => "vector3",
            Rank::Antisym3 => "antisym3",
        }
    }

    pub fn component_names(self) -> &'static [&'static str] {
        match self {
            Rank::Scalar => &["v"],
            Rank::Vector3 => &["v1", "v2", "v3"],
            Rank::Antisym3 => &["F12", "F23", "F31"],
        }
    }
}

/// Samples of a field on a [`Grid3`].
///
/// Points inside the singular core of a defect are flagged and carry NaN
/// values; every unflagged value is finite.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    grid: Grid3,
    rank: Rank,
    values: Vec<f64>,
    flags: Vec<bool>,
    provenance: String,
}

impl FieldGrid {
    pub fn from_parts(
        grid: Grid3,
        rank: Rank,
        values: Vec<f64>,
        flags: Vec<bool>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        let nc = rank.components();
        if values.len() != grid.len() * nc || flags.len() != grid.len() {
            return Err(DefectError::InvalidGrid(format!(
                "expected {} values and {} flags, got {} and {}",
                grid.len() * nc,
                grid.len(),
                values.len(),
                flags.len()
            )));
        }
        for (p, &f) in flags.iter().enumerate() {
            if !f && values[p * nc..(p + 1) * nc].iter().any(|v| !v.is_finite()) {
                return Err(DefectError::InvalidGrid(format!("non-finite value at unflagged point {:?}", grid.ijk(p))));
            }
        }
        Ok(Self { grid, rank, values, flags, provenance: provenance.into() })
    }

    /// Fill by evaluating `f` at every node in parallel; `None` flags the point.
    ///
    /// Each node is computed independently, so the result does not depend on
    /// how the work is partitioned.
    pub fn sample<F>(grid: Grid3, rank: Rank, provenance: impl Into<String>, f: F) -> Self
    where
        F: Fn(&Vec3) -> Option<[f64; 3]> + Sync,
    {
        let nc = rank.components();
        let per_point: Vec<Option<[f64; 3]>> = (0..grid.len()).into_par_iter().map(|p| f(&grid.point_at(p))).collect();
        let mut values = Vec::with_capacity(grid.len() * nc);
        let mut flags = Vec::with_capacity(grid.len());
        for v in per_point {
            match v {
                Some(v) if v[..nc].iter().all(|x| x.is_finite()) => {
                    values.extend_from_slice(&v[..nc]);
                    flags.push(false);
                }
                _ => {
                    values.extend(std::iter::repeat_n(f64::NAN, nc));
                    flags.push(true);
                }
            }
        }
        Self { grid, rank, values, flags, provenance: provenance.into() }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn is_flagged(&self, idx: usize) -> bool {
        self.flags[idx]
    }

    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn at(&self, idx: usize) -> &[f64] {
        let nc = self.rank.components();
        &self.values[idx * nc..(idx + 1) * nc]
    }

    pub fn component(&self, idx: usize, c: usize) -> f64 {
        self.values[idx * self.rank.components() + c]
    }

    pub fn vector(&self, idx: usize) -> Vec3 {
        let v = self.at(idx);
        Vec3::new(v[0], v[1], v[2])
    }

    /// Interior node whose six neighbours (and itself) are all unflagged.
    pub fn stencil_ok(&self, idx: usize) -> bool {
        if !self.grid.is_interior(idx) || self.flags[idx] {
            return false;
        }
        (0..3).all(|a| {
            let s = self.grid.stride(a);
            !self.flags[idx - s] && !self.flags[idx + s]
        })
    }

    /// Central difference `∂_axis` of component `c` at an interior node.
    pub fn central_diff(&self, idx: usize, axis: usize, c: usize) -> f64 {
        let s = self.grid.stride(axis);
        (self.component(idx + s, c) - self.component(idx - s, c)) / (2.0 * self.grid.spacing)
    }

    /// Multiply every value by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out.provenance = format!("{} * {factor}", self.provenance);
        out
    }

    /// Additionally flag every point for which `mask` is false.
    pub fn masked(&self, mask: impl Fn(&Vec3) -> bool) -> Self {
        let mut out = self.clone();
        let nc = self.rank.components();
        for p in 0..self.grid.len() {
            if !out.flags[p] && !mask(&self.grid.point_at(p)) {
                out.flags[p] = true;
                out.values[p * nc..(p + 1) * nc].iter_mut().for_each(|v| *v = f64::NAN);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(Grid3::new([0.0; 3], 0.0, [3, 3, 3]).is_err());
        assert!(Grid3::new([0.0; 3], 0.1, [3, 2, 3]).is_err());
        let g = Grid3::new([1.0, 2.0, 3.0], 0.5, [4, 5, 6]).unwrap();
        assert_eq!(g.len(), 120);
        for idx in [0, 7, 63, 119] {
            let [i, j, k] = g.ijk(idx);
            assert_eq!(g.index(i, j, k), idx);
            assert_eq!(g.locate(&g.point_at(idx)), Some(idx));
        }
        assert_eq!(g.locate(&Vec3::new(1.25, 2.0, 3.0)), None);
    }

    #[test]
    fn sample_flags_and_stencils() {
        let g = Grid3::new([-1.0, -1.0, -1.0], 1.0, [3, 3, 3]).unwrap();
        let f = FieldGrid::sample(g, Rank::Scalar, "test", |x| (x.norm() > 0.5).then_some([x[0], 0.0, 0.0]));
        let centre = g.index(1, 1, 1);
        assert!(f.is_flagged(centre));
        assert!(f.at(centre)[0].is_nan());
        assert_eq!(f.flagged_count(), 1);
        assert!(!f.stencil_ok(centre));
        let lin = FieldGrid::sample(g, Rank::Scalar, "x", |x| Some([x[0], 0.0, 0.0]));
        assert!(lin.stencil_ok(centre));
        assert_eq!(lin.central_diff(centre, 0, 0), 1.0);
        assert_eq!(lin.central_diff(centre, 1, 0), 0.0);
    }

    #[test]
    fn from_parts_checks_lengths_and_finiteness() {
        let g = Grid3::new([0.0; 3], 1.0, [3, 3, 3]).unwrap();
        assert!(FieldGrid::from_parts(g, Rank::Vector3, vec![0.0; 27], vec![false; 27], "").is_err());
        let mut vals = vec![0.0; 27];
        vals[4] = f64::NAN;
        assert!(FieldGrid::from_parts(g, Rank::Scalar, vals.clone(), vec![false; 27], "").is_err());
        let mut flags = vec![false; 27];
        flags[4] = true;
        assert!(FieldGrid::from_parts(g, Rank::Scalar, vals, flags, "").is_ok());
    }
}
