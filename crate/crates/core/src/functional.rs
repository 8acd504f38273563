//! Functionals of spin fields and the finite-difference variational
//! derivative used as an independent oracle for closed-form derivatives.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{DensityField, SpinField, VectorDensityField};
use crate::grid::Grid;
use crate::so3::{tangent_basis, Vec3};

/// Default rotation angle used by [`functional_derivative`].
pub const DEFAULT_STEP: f64 = 1e-4;

/// A real-valued functional F(n).
pub trait Functional: Sync {
    fn value(&self, n: &SpinField) -> f64;

    /// Local-density form, when F = Σ_cells density · cell volume.
    fn local(&self) -> Option<&dyn LocalDensity> {
        None
    }
}

/// Integrand of a local functional. `density` may read cells up to `reach`
/// steps away along each axis.
pub trait LocalDensity: Sync {
    fn density(&self, grid: &Grid, values: &[Vec3], idx: usize) -> f64;
    fn reach(&self) -> usize;
}

/// Σ density · cell volume.
pub fn integrate_density(d: &dyn LocalDensity, n: &SpinField) -> f64 {
    let grid = n.grid();
    let vals = n.values();
    (0..grid.len())
        .into_par_iter()
        .map(|i| d.density(grid, vals, i))
        .sum::<f64>()
        * grid.cell_volume()
}

/// Wraps an arbitrary closure as a functional evaluated globally.
pub struct FnFunctional<F>(pub F);

impl<F> Functional for FnFunctional<F>
where
    F: Fn(&SpinField) -> f64 + Sync,
{
    fn value(&self, n: &SpinField) -> f64 {
        (self.0)(n)
    }
}

/// v − (n·v)n.
pub fn tangent_part(n: &Vec3, v: &Vec3) -> Vec3 {
    v - n * n.dot(v)
}

/// Projects every cell of `v` onto the tangent plane of `n`.
pub fn project_tangent(n: &SpinField, v: &VectorDensityField) -> Result<VectorDensityField> {
    n.grid().same_as(v.grid())?;
    let vals = n
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| tangent_part(a, b))
        .collect();
    Ok(DensityField::from_parts(n.grid().clone(), vals))
}

/// δF/δn by central differences: at every free cell, n(x) is rotated by ±step
/// towards each of two tangent directions and the change in F is divided by
/// 2·step·cell volume. The result is tangent to n by construction. Cells on a
/// frozen boundary layer get zero.
pub fn functional_derivative(
    f: &dyn Functional,
    n: &SpinField,
    step: f64,
) -> Result<VectorDensityField> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::arg("step", format!("{step} must be positive")));
    }
    let grid = n.grid();
    let vol = grid.cell_volume();
    let (c, s) = (step.cos(), step.sin());
    let local = f.local();

    let out: Vec<Vec3> = (0..grid.len())
        .into_par_iter()
        .map_init(
            || n.values().to_vec(),
            |scratch, i| {
                if !n.is_free(i) {
                    return Vec3::zeros();
                }
                let n0 = n.values()[i];
                let (t1, t2) = tangent_basis(&n0);
                let mut eval = |v: Vec3| -> f64 {
                    scratch[i] = v;
                    let r = match local {
                        Some(d) => grid
                            .box_around(i, d.reach())
                            .map(|j| d.density(grid, scratch, j))
                            .sum::<f64>(),
                        None => {
                            let field = SpinField::from_parts(
                                grid.clone(),
                                scratch.clone(),
                                n.layer(),
                                n.is_decaying(),
                            );
                            f.value(&field) / vol
                        }
                    };
                    scratch[i] = n0;
                    r
                };
                let mut acc = Vec3::zeros();
                for t in [t1, t2] {
                    let plus = eval(n0 * c + t * s);
                    let minus = eval(n0 * c - t * s);
                    acc += t * ((plus - minus) / (2.0 * step));
                }
                acc
            },
        )
        .collect();
    Ok(DensityField::from_parts(grid.clone(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{k_axis, DEFAULT_LAYER};

    struct Quadratic;
    impl LocalDensity for Quadratic {
        fn density(&self, _g: &Grid, v: &[Vec3], i: usize) -> f64 {
            v[i].x * v[i].x + 2.0 * v[i].y
        }
        fn reach(&self) -> usize {
            0
        }
    }
    impl Functional for Quadratic {
        fn value(&self, n: &SpinField) -> f64 {
            integrate_density(self, n)
        }
        fn local(&self) -> Option<&dyn LocalDensity> {
            Some(self)
        }
    }

    fn tilted() -> SpinField {
        let g = Grid::cube(2, 10, 1.0).unwrap();
        let vals = (0..g.len())
            .map(|i| {
                let x = g.cell_center(i);
                Vec3::new(x[0], 0.5 * x[1] + 0.1, -1.0)
            })
            .collect();
        SpinField::from_raw(g, vals, DEFAULT_LAYER).unwrap()
    }

    #[test]
    fn local_and_global_paths_agree() {
        // Oracle: δ/δn ∫ (n_x² + 2 n_y) = tangent part of (2 n_x, 2, 0).
        let n = tilted();
        let global = FnFunctional(|m: &SpinField| Quadratic.value(m));
        let a = functional_derivative(&Quadratic, &n, 1e-4).unwrap();
        let b = functional_derivative(&global, &n, 1e-4).unwrap();
        for (i, (u, v)) in a.values().iter().zip(b.values()).enumerate() {
            assert!((u - v).norm() < 1e-7, "cell {i}: {u} vs {v}");
            if n.is_free(i) {
                let m = n.values()[i];
                let exact = tangent_part(&m, &Vec3::new(2.0 * m.x, 2.0, 0.0));
                assert!((u - exact).norm() < 1e-7);
                assert!(u.dot(&m).abs() < 1e-14);
            } else {
                assert_eq!(*u, Vec3::zeros());
            }
        }
    }

    #[test]
    fn rejects_bad_step() {
        let n = tilted();
        assert!(functional_derivative(&Quadratic, &n, 0.0).is_err());
        assert!(functional_derivative(&Quadratic, &n, f64::NAN).is_err());
    }

    #[test]
    fn projection_is_tangent() {
        let n = tilted();
        let v = DensityField::from_fn(n.grid(), |_| k_axis());
        let t = project_tangent(&n, &v).unwrap();
        for (a, b) in n.values().iter().zip(t.values()) {
            assert!(a.dot(b).abs() < 1e-15);
        }
    }
}
