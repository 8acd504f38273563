//! Field containers on a [`Grid`].

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::so3::{self, Mat3, Vec3};

/// Default thickness, in cells, of the far-field boundary layer.
pub const DEFAULT_LAYER: usize = 2;

/// Unit-norm tolerance for spin values.
pub const UNIT_TOL: f64 = 1e-12;

/// The fixed axis 𝐤 = (0, 0, 1).
pub fn k_axis() -> Vec3 {
    Vec3::z()
}

/// |v| within `tol` of 1. NaN components fail.
pub fn is_unit(v: &Vec3, tol: f64) -> bool {
    (v.norm() - 1.0).abs() <= tol
}

/// Per-cell values of arbitrary type sharing a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField<T> {
    grid: Grid,
    values: Vec<T>,
}

pub type ScalarField = DensityField<f64>;
/// Densities with values in 𝔰𝔬(3) ≅ ℝ³, or padded spatial vectors.
pub type VectorDensityField = DensityField<Vec3>;

impl<T> DensityField<T> {
    pub fn new(grid: Grid, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::arg(
                "values",
                format!("expected {} cells, got {}", grid.len(), values.len()),
            ));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(usize) -> T) -> Self {
        let values = (0..grid.len()).map(f).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }
}

impl ScalarField {
    pub fn from_position(grid: &Grid, f: impl Fn(&Vec3) -> f64) -> Self {
        Self::from_fn(grid, |i| f(&grid.cell_center(i)))
    }
}

/// Unit 3-vector field n(x). Decaying fields equal −𝐤 exactly on the
/// outermost `layer` cells; non-decaying fields (constants other than −𝐤)
/// carry a flag and are excluded from diagnostics that need decay.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinField {
    grid: Grid,
    values: Vec<Vec3>,
    layer: usize,
    decaying: bool,
}

impl SpinField {
    /// Validates unit norm at every cell and the far-field layer.
    pub fn new(grid: Grid, values: Vec<Vec3>, layer: usize) -> Result<Self> {
        let f = Self::check_values(grid, values, layer)?;
        if let Some(cell) = f.first_layer_violation() {
            return Err(Error::Invariant {
                cell,
                reason: "boundary layer cell differs from -k".into(),
            });
        }
        Ok(f)
    }

    /// Unit-norm field with no far-field requirement.
    pub fn non_decaying(grid: Grid, values: Vec<Vec3>, layer: usize) -> Result<Self> {
        let mut f = Self::check_values(grid, values, layer)?;
        f.decaying = f.first_layer_violation().is_none();
        Ok(f)
    }

    fn check_values(grid: Grid, values: Vec<Vec3>, layer: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::arg(
                "values",
                format!("expected {} cells, got {}", grid.len(), values.len()),
            ));
        }
        if let Some(cell) = values
            .iter()
            .position(|v| !is_unit(v, UNIT_TOL))
        {
            return Err(Error::Invariant {
                cell,
                reason: format!("|n| = {} is not 1", values[cell].norm()),
            });
        }
        Ok(Self {
            grid,
            values,
            layer,
            decaying: true,
        })
    }

    fn first_layer_violation(&self) -> Option<usize> {
        let mk = -k_axis();
        (0..self.grid.len()).find(|&i| self.grid.in_layer(i, self.layer) && self.values[i] != mk)
    }

    /// Renormalises every cell and overwrites the boundary layer with −𝐤.
    pub fn from_raw(grid: Grid, mut values: Vec<Vec3>, layer: usize) -> Result<Self> {
        let mk = -k_axis();
        for (i, v) in values.iter_mut().enumerate() {
            if grid.in_layer(i, layer) {
                *v = mk;
            } else {
                let n = v.norm();
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::Invariant {
                        cell: i,
                        reason: "cannot normalise zero or non-finite vector".into(),
                    });
                }
                *v /= n;
            }
        }
        Self::new(grid, values, layer)
    }

    /// Internal constructor used by steppers and perturbation loops that keep
    /// the invariants by construction.
    pub(crate) fn from_parts(grid: Grid, values: Vec<Vec3>, layer: usize, decaying: bool) -> Self {
        Self {
            grid,
            values,
            layer,
            decaying,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn p(&self) -> usize {
        self.grid.p()
    }

    pub fn values(&self) -> &[Vec3] {
        &self.values
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    pub fn is_decaying(&self) -> bool {
        self.decaying
    }

    pub fn in_layer(&self, idx: usize) -> bool {
        self.grid.in_layer(idx, self.layer)
    }

    /// Cells that may change during evolution: everything off the frozen layer
    /// for decaying fields, every cell otherwise.
    pub fn is_free(&self, idx: usize) -> bool {
        !self.decaying || !self.in_layer(idx)
    }

    /// Largest `||n| − 1|` over cells.
    pub fn norm_deviation(&self) -> f64 {
        self.values
            .iter()
            .map(|v| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Applies `f` cell-wise, then restores the invariants.
    pub fn map_values(&self, f: impl Fn(usize, &Vec3) -> Vec3) -> Result<Self> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| f(i, v))
            .collect();
        if self.decaying {
            Self::from_raw(self.grid.clone(), values, self.layer)
        } else {
            Self::non_decaying(self.grid.clone(), values, self.layer)
        }
    }
}

/// SO(3)-valued field ψ(x), the identity on the boundary layer.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationField {
    grid: Grid,
    values: Vec<Mat3>,
    layer: usize,
}

impl RotationField {
    pub const TOL: f64 = 1e-10;
    pub const LAYER_TOL: f64 = 1e-12;

    pub fn new(grid: Grid, values: Vec<Mat3>, layer: usize) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::arg(
                "values",
                format!("expected {} cells, got {}", grid.len(), values.len()),
            ));
        }
        for (i, r) in values.iter().enumerate() {
            if !so3::is_rotation(r, Self::TOL) {
                return Err(Error::Invariant {
                    cell: i,
                    reason: "value is not a rotation".into(),
                });
            }
            if grid.in_layer(i, layer) && (r - Mat3::identity()).abs().max() > Self::LAYER_TOL {
                return Err(Error::Invariant {
                    cell: i,
                    reason: "boundary layer cell is not the identity".into(),
                });
            }
        }
        Ok(Self {
            grid,
            values,
            layer,
        })
    }

    pub fn identity(grid: &Grid, layer: usize) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![Mat3::identity(); grid.len()],
            layer,
        }
    }

    pub(crate) fn from_parts(grid: Grid, values: Vec<Mat3>, layer: usize) -> Self {
        Self {
            grid,
            values,
            layer,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Mat3] {
        &self.values
    }

    pub fn layer(&self) -> usize {
        self.layer
    }

    /// Pointwise product ψ(x)φ(x).
    pub fn compose(&self, other: &RotationField) -> Result<RotationField> {
        self.grid.same_as(&other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::from_parts(
            self.grid.clone(),
            values,
            self.layer.min(other.layer),
        ))
    }

    /// Pointwise inverse ψ(x)⁻¹.
    pub fn inverse(&self) -> RotationField {
        let values = self.values.iter().map(|r| r.transpose()).collect();
        Self::from_parts(self.grid.clone(), values, self.layer)
    }

    /// The field −ψ(x)𝐤.
    pub fn project(&self) -> Vec<Vec3> {
        self.values.iter().map(|r| -(r * k_axis())).collect()
    }
}
