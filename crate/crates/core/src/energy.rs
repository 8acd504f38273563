//! Energy functional, its variational derivative and the Landau–Lifshitz
//! vector field.
//!
//! The discrete energy is
//!
//! ```text
//! E = ½ Σ_edges |n_j − n_i|² / h² · V + (a/2) Σ_cells (n·n − (n·𝐤)²) · V
//! ```
//!
//! where the first sum runs over nearest-neighbour pairs along each axis and V
//! is the cell volume. Its exact gradient is −Δn + a(n − (n·𝐤)𝐤) with the
//! lattice Laplacian of [`crate::calculus`]. The literal `n·n` is kept in the
//! anisotropy term even though it is 1 on unit fields.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::laplacian_at;
use crate::error::{Error, Result};
use crate::field::{is_unit, k_axis, DensityField, SpinField, VectorDensityField};
use crate::functional::{integrate_density, Functional, LocalDensity};
use crate::grid::Grid;
use crate::so3::Vec3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    /// Anisotropy coupling.
    pub a: f64,
    /// Easy axis.
    pub k: [f64; 3],
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            a: 0.0,
            k: [0.0, 0.0, 1.0],
        }
    }
}

impl EnergyParams {
    pub fn new(a: f64) -> Result<Self> {
        Self::with_axis(a, k_axis())
    }

    pub fn with_axis(a: f64, k: Vec3) -> Result<Self> {
        if !a.is_finite() {
            return Err(Error::arg("a", "anisotropy must be finite"));
        }
        if !is_unit(&k, 1e-12) {
            return Err(Error::arg("k", format!("|k| = {} is not 1", k.norm())));
        }
        Ok(Self {
            a,
            k: [k.x, k.y, k.z],
        })
    }

    pub fn axis(&self) -> Vec3 {
        Vec3::new(self.k[0], self.k[1], self.k[2])
    }
}

/// Exchange plus easy-axis anisotropy energy as a local density.
pub struct EnergyFunctional {
    pub params: EnergyParams,
}

impl LocalDensity for EnergyFunctional {
    fn density(&self, grid: &Grid, values: &[Vec3], idx: usize) -> f64 {
        let n = values[idx];
        let mut e = 0.0;
        for a in 0..grid.p() {
            if let Some(j) = grid.neighbor(idx, a, 1) {
                let h = grid.spacing()[a];
                e += (values[j] - n).norm_squared() / (h * h);
            }
        }
        let nk = n.dot(&self.params.axis());
        0.5 * e + 0.5 * self.params.a * (n.dot(&n) - nk * nk)
    }

    fn reach(&self) -> usize {
        1
    }
}

impl Functional for EnergyFunctional {
    fn value(&self, n: &SpinField) -> f64 {
        integrate_density(self, n)
    }

    fn local(&self) -> Option<&dyn LocalDensity> {
        Some(self)
    }
}

/// E(n). Non-decaying fields are rejected.
pub fn energy(n: &SpinField, params: &EnergyParams) -> Result<f64> {
    if !n.is_decaying() {
        return Err(Error::NonDecaying);
    }
    Ok(energy_on_box(n, params))
}

/// The energy quadrature restricted to the grid, defined for any field.
pub fn energy_on_box(n: &SpinField, params: &EnergyParams) -> f64 {
    EnergyFunctional { params: *params }.value(n)
}

#[inline]
pub(crate) fn gradient_at(grid: &Grid, values: &[Vec3], idx: usize, params: &EnergyParams) -> Vec3 {
    let n = values[idx];
    let k = params.axis();
    -laplacian_at(grid, values, idx) + (n - k * n.dot(&k)) * params.a
}

/// δE/δn = −Δn + a(n − (n·𝐤)𝐤), without tangential projection.
pub fn variational_derivative_energy(n: &SpinField, params: &EnergyParams) -> VectorDensityField {
    let grid = n.grid();
    let vals = n.values();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| gradient_at(grid, vals, i, params))
        .collect();
    DensityField::from_parts(grid.clone(), out)
}

/// ∂n/∂t = −n × δE/δn, evaluated at every cell.
pub fn ll_rhs(n: &SpinField, params: &EnergyParams) -> VectorDensityField {
    let grid = n.grid();
    let vals = n.values();
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| -vals[i].cross(&gradient_at(grid, vals, i, params)))
        .collect();
    DensityField::from_parts(grid.clone(), out)
}

/// Right-hand side on raw (possibly unnormalised) stage values, zero on
/// frozen cells.
pub(crate) fn rhs_values(
    grid: &Grid,
    values: &[Vec3],
    free: &[bool],
    params: &EnergyParams,
) -> Vec<Vec3> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if free[i] {
                -values[i].cross(&gradient_at(grid, values, i, params))
            } else {
                Vec3::zeros()
            }
        })
        .collect()
}
