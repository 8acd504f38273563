//! Finite-difference calculus on cell-centred grids.
//!
//! First derivatives use second-order central differences, switching to the
//! second-order one-sided stencil on the first and last cell of each axis.
//! Integrals are midpoint sums. Group-valued fields are differenced through
//! the SO(3) logarithm so that right gradients stay in 𝔰𝔬(3).

use std::ops::{Add, Mul, Sub};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{DensityField, RotationField, ScalarField, SpinField, VectorDensityField};
use crate::grid::{Grid, SpaceVec};
use crate::so3::{self, Vec3};

/// Values that can be differenced and scaled.
pub trait FieldValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl<T> FieldValue for T where
    T: Copy + Send + Sync + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>
{
}

/// ∂f/∂x^axis at one cell.
#[inline]
pub(crate) fn diff_at<T: FieldValue>(grid: &Grid, values: &[T], idx: usize, axis: usize) -> T {
    let n = grid.dims()[axis];
    let c = grid.coords(idx)[axis];
    let s = grid.stride(axis);
    let inv = 0.5 / grid.spacing()[axis];
    if c == 0 {
        (values[idx + s] * 4.0 - values[idx] * 3.0 - values[idx + 2 * s]) * inv
    } else if c == n - 1 {
        (values[idx] * 3.0 - values[idx - s] * 4.0 + values[idx - 2 * s]) * inv
    } else {
        (values[idx + s] - values[idx - s]) * inv
    }
}

pub(crate) fn partial_values<T: FieldValue>(grid: &Grid, values: &[T], axis: usize) -> Vec<T> {
    (0..grid.len())
        .into_par_iter()
        .map(|i| diff_at(grid, values, i, axis))
        .collect()
}

fn check_axis(grid: &Grid, axis: usize) -> Result<()> {
    if axis >= grid.p() {
        Err(Error::arg(
            "axis",
            format!("axis {axis} out of range for p = {}", grid.p()),
        ))
    } else {
        Ok(())
    }
}

/// ∂f/∂x^axis of a scalar or vector field.
pub fn partial<T: FieldValue>(f: &DensityField<T>, axis: usize) -> Result<DensityField<T>> {
    check_axis(f.grid(), axis)?;
    Ok(DensityField::from_parts(
        f.grid().clone(),
        partial_values(f.grid(), f.values(), axis),
    ))
}

/// ∂n/∂x^axis of a spin field.
pub fn partial_spin(n: &SpinField, axis: usize) -> Result<VectorDensityField> {
    check_axis(n.grid(), axis)?;
    Ok(DensityField::from_parts(
        n.grid().clone(),
        partial_values(n.grid(), n.values(), axis),
    ))
}

/// All first derivatives of a spin field, one vector per axis.
pub(crate) fn spin_gradients(n: &SpinField) -> Vec<Vec<Vec3>> {
    (0..n.p())
        .map(|a| partial_values(n.grid(), n.values(), a))
        .collect()
}

/// Midpoint-rule integral of a scalar density.
pub fn integrate(f: &ScalarField) -> f64 {
    integrate_values(f.grid(), f.values())
}

pub fn integrate_values(grid: &Grid, values: &[f64]) -> f64 {
    values.par_iter().sum::<f64>() * grid.cell_volume()
}

/// Graph Laplacian of the nearest-neighbour lattice, Σ_nbr (f_nbr − f)/h².
/// It is the exact gradient of ½Σ_edges |Δf|²/h², including at the array
/// faces where missing neighbours contribute nothing.
pub(crate) fn laplacian_at(grid: &Grid, values: &[Vec3], idx: usize) -> Vec3 {
    let mut acc = Vec3::zeros();
    for a in 0..grid.p() {
        let h2 = grid.spacing()[a] * grid.spacing()[a];
        for off in [-1isize, 1] {
            if let Some(j) = grid.neighbor(idx, a, off) {
                acc += (values[j] - values[idx]) / h2;
            }
        }
    }
    acc
}

/// Right-logarithmic derivative along one axis,
/// d/dε log(ψ(x + ε e_axis) ψ(x)⁻¹) at ε = 0.
pub(crate) fn right_gradient_axis(psi: &RotationField, axis: usize) -> Vec<Vec3> {
    let grid = psi.grid();
    let vals = psi.values();
    let n = grid.dims()[axis];
    let s = grid.stride(axis);
    let inv = 0.5 / grid.spacing()[axis];
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let c = grid.coords(i)[axis];
            let rinv = vals[i].transpose();
            let step = |j: usize| so3::log_unchecked(&(vals[j] * rinv));
            if c == 0 {
                (step(i + s) * 4.0 - step(i + 2 * s)) * inv
            } else if c == n - 1 {
                (step(i - 2 * s) - step(i - s) * 4.0) * inv
            } else {
                (step(i + s) - step(i - s)) * inv
            }
        })
        .collect()
}

/// (∇^R_b ψ)(x) = d/dε ψ(x + εb) ψ(x)⁻¹ for a constant direction `b`
/// (components beyond p ignored), valued in 𝔰𝔬(3) ≅ ℝ³.
pub fn right_gradient(psi: &RotationField, b: &SpaceVec) -> VectorDensityField {
    let grid = psi.grid();
    let mut out = vec![Vec3::zeros(); grid.len()];
    for a in 0..grid.p() {
        if b[a] == 0.0 {
            continue;
        }
        let g = right_gradient_axis(psi, a);
        out.iter_mut().zip(g).for_each(|(o, v)| *o += v * b[a]);
    }
    DensityField::from_parts(grid.clone(), out)
}

/// Per-axis right gradients, `(∇^R_{e_1}ψ, …, ∇^R_{e_p}ψ)`.
pub fn right_gradients(psi: &RotationField) -> Vec<Vec<Vec3>> {
    (0..psi.grid().p())
        .map(|a| right_gradient_axis(psi, a))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::DEFAULT_LAYER;
    use crate::so3::Mat3;
    use std::f64::consts::PI;

    #[test]
    fn partial_annihilates_constants() {
        let g = Grid::cube(2, 12, 3.0).unwrap();
        let f = ScalarField::from_fn(&g, |_| 2.5);
        let d = partial(&f, 1).unwrap();
        assert!(d.values().iter().all(|&v| v == 0.0));
        assert!(partial(&f, 2).is_err());
    }

    #[test]
    fn partial_is_exact_on_linear() {
        let g = Grid::cube(2, 12, 3.0).unwrap();
        let f = ScalarField::from_position(&g, |x| 3.0 * x[1] - x[0]);
        let d = partial(&f, 1).unwrap();
        assert!(d.values().iter().all(|&v| (v - 3.0).abs() < 1e-12));
    }

    #[test]
    fn partial_second_order_convergence() {
        // Oracle: d/dx sin(πx/L) = (π/L) cos(πx/L).
        let l = 2.0;
        let err = |n: usize| {
            let g = Grid::new(&[n], &[2.0 * l / n as f64], &[-l + l / n as f64]).unwrap();
            let f = ScalarField::from_position(&g, |x| (PI * x[0] / l).sin());
            let d = partial(&f, 0).unwrap();
            (0..g.len())
                .map(|i| {
                    let x = g.cell_center(i)[0];
                    (d.values()[i] - PI / l * (PI * x / l).cos()).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(32), err(64), err(128));
        assert!(e1 / e2 > 3.5 && e2 / e3 > 3.5, "{e1} {e2} {e3}");
    }

    #[test]
    fn integrate_constants_and_odd() {
        let g = Grid::centered(&[10, 16], &[4.0, 6.0]).unwrap();
        let one = ScalarField::from_fn(&g, |_| 1.0);
        assert!((integrate(&one) - 24.0).abs() < 1e-12);
        let odd = ScalarField::from_position(&g, |x| x[0] * (1.0 + x[1] * x[1]));
        assert!(integrate(&odd).abs() < 1e-12);
    }

    #[test]
    fn integrate_gaussian() {
        // Oracle: ∫ exp(−r²) over ℝ² = π; the tail beyond |x| = 8 is < 1e-27.
        let g = Grid::cube(2, 128, 8.0).unwrap();
        let f = ScalarField::from_position(&g, |x| (-x.norm_squared()).exp());
        assert!((integrate(&f) - PI).abs() < 1e-6);
    }

    #[test]
    fn right_gradient_of_identity_vanishes() {
        let g = Grid::cube(2, 10, 1.0).unwrap();
        let psi = RotationField::identity(&g, DEFAULT_LAYER);
        let r = right_gradient(&psi, &SpaceVec::new(1.0, -2.0, 0.0));
        assert!(r.values().iter().all(|v| *v == Vec3::zeros()));
    }

    #[test]
    fn right_gradient_of_uniform_twist() {
        // Oracle: ψ(x) = exp(c x₁ 𝐤) has ∇^R_{e₁}ψ = c 𝐤 exactly.
        let c = 0.7;
        let g = Grid::cube(2, 16, 2.0).unwrap();
        let vals: Vec<Mat3> = (0..g.len())
            .map(|i| so3::exp(&(Vec3::z() * (c * g.cell_center(i)[0]))))
            .collect();
        let psi = RotationField::new(g.clone(), vals, 0).unwrap();
        let r = right_gradient(&psi, &SpaceVec::x());
        for v in r.values() {
            assert!((v - Vec3::z() * c).norm() < 1e-12);
        }
    }
}
