//! Cell-centred rectangular grids on ℝ^p, p ∈ {1, 2, 3}.
//!
//! Spatial vectors (positions, translations, momenta) are carried as
//! [`SpaceVec`], a 3-vector whose components beyond `p` are zero. Cells are
//! stored row-major: the first axis varies slowest.

use nalgebra::Vector3;

use crate::error::{Error, Result};

/// Spatial vector padded with zeros beyond the grid dimension.
pub type SpaceVec = Vector3<f64>;

/// Minimum number of cells per axis.
pub const MIN_CELLS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    p: usize,
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
}

impl Grid {
    /// Builds a grid from per-axis cell counts, spacings and the centre of the
    /// first cell. All three slices must have length `p`.
    pub fn new(dims: &[usize], spacing: &[f64], origin: &[f64]) -> Result<Self> {
        let p = dims.len();
        if !(1..=3).contains(&p) {
            return Err(Error::InvalidGrid(format!("dimension {p} not in 1..=3")));
        }
        if spacing.len() != p || origin.len() != p {
            return Err(Error::InvalidGrid(
                "dims, spacing and origin must have the same length".into(),
            ));
        }
        let mut g = Grid {
            p,
            dims: [1; 3],
            spacing: [1.0; 3],
            origin: [0.0; 3],
        };
        for a in 0..p {
            if dims[a] < MIN_CELLS {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} has {} cells, need at least {MIN_CELLS}",
                    dims[a]
                )));
            }
            if !(spacing[a] > 0.0 && spacing[a].is_finite()) {
                return Err(Error::InvalidGrid(format!(
                    "axis {a} spacing {} must be positive",
                    spacing[a]
                )));
            }
            if !origin[a].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {a} origin is not finite")));
            }
            g.dims[a] = dims[a];
            g.spacing[a] = spacing[a];
            g.origin[a] = origin[a];
        }
        Ok(g)
    }

    /// Box of side `lengths[a]` centred at the origin.
    pub fn centered(dims: &[usize], lengths: &[f64]) -> Result<Self> {
        if dims.len() != lengths.len() {
            return Err(Error::InvalidGrid("dims and lengths differ in length".into()));
        }
        let spacing: Vec<f64> = dims
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| l / n as f64)
            .collect();
        let origin: Vec<f64> = lengths
            .iter()
            .zip(&spacing)
            .map(|(&l, &h)| -0.5 * l + 0.5 * h)
            .collect();
        Grid::new(dims, &spacing, &origin)
    }

    /// Square/cubic box `[-half, half]^p` with `n` cells per axis.
    pub fn cube(p: usize, n: usize, half: f64) -> Result<Self> {
        Grid::centered(&vec![n; p], &vec![2.0 * half; p])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims[..self.p]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.p]
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin[..self.p]
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    /// Physical extent of axis `a` (cell count times spacing).
    pub fn extent(&self, a: usize) -> f64 {
        self.dims[a] as f64 * self.spacing[a]
    }

    pub(crate) fn stride(&self, axis: usize) -> usize {
        self.dims[axis + 1..].iter().product()
    }

    pub fn index(&self, ijk: [usize; 3]) -> usize {
        (ijk[0] * self.dims[1] + ijk[1]) * self.dims[2] + ijk[2]
    }

    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let k = idx % self.dims[2];
        let j = (idx / self.dims[2]) % self.dims[1];
        let i = idx / (self.dims[1] * self.dims[2]);
        [i, j, k]
    }

    pub fn cell_center(&self, idx: usize) -> SpaceVec {
        let c = self.coords(idx);
        let mut x = SpaceVec::zeros();
        for a in 0..self.p {
            x[a] = self.origin[a] + c[a] as f64 * self.spacing[a];
        }
        x
    }

    /// Neighbour `offset` cells away along `axis`, if it lies on the grid.
    pub fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> Option<usize> {
        let c = self.coords(idx)[axis] as isize + offset;
        if c < 0 || c >= self.dims[axis] as isize {
            None
        } else {
            Some((idx as isize + offset * self.stride(axis) as isize) as usize)
        }
    }

    /// Distance, in cells, from `idx` to the nearest grid face.
    pub fn depth(&self, idx: usize) -> usize {
        let c = self.coords(idx);
        (0..self.p)
            .map(|a| c[a].min(self.dims[a] - 1 - c[a]))
            .min()
            .unwrap_or(0)
    }

    /// Whether `idx` lies in the outermost `thickness` layers of cells.
    pub fn in_layer(&self, idx: usize, thickness: usize) -> bool {
        self.depth(idx) < thickness
    }

    /// Cells whose coordinates differ from `idx` by at most `reach` on every
    /// axis.
    pub fn box_around(&self, idx: usize, reach: usize) -> impl Iterator<Item = usize> + '_ {
        let c = self.coords(idx);
        let lo: Vec<usize> = (0..3).map(|a| c[a].saturating_sub(reach)).collect();
        let hi: Vec<usize> = (0..3).map(|a| (c[a] + reach).min(self.dims[a] - 1)).collect();
        let (lo0, lo1, lo2) = (lo[0], lo[1], lo[2]);
        let (hi0, hi1, hi2) = (hi[0], hi[1], hi[2]);
        (lo0..=hi0).flat_map(move |i| {
            (lo1..=hi1).flat_map(move |j| (lo2..=hi2).map(move |k| self.index([i, j, k])))
        })
    }

    /// Smallest distance from the origin to a face of the box.
    pub fn half_width(&self) -> f64 {
        (0..self.p)
            .map(|a| {
                let lo = self.origin[a] - 0.5 * self.spacing[a];
                let hi = lo + self.extent(a);
                lo.abs().min(hi.abs())
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing().iter().cloned().fold(0.0, f64::max)
    }

    pub fn same_as(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}
