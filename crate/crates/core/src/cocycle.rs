//! Semidirect-product algebra, the nonequivariance cocycle and the
//! Lie–Poisson bracket on spin fields.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::algebra::{EuclideanAlgebraElement, SemidirectAlgebraElement};
use crate::calculus::{integrate_values, partial_values};
use crate::error::{Error, Result};
use crate::field::{DensityField, SpinField, VectorDensityField};
use crate::functional::{functional_derivative, project_tangent, DEFAULT_STEP};
use crate::grid::Grid;
use crate::momenta::{degree, PComponent};
use crate::so3::Vec3;

/// Arguments of Σ: the reduction point μ and two 𝔰𝔢(p) elements.
#[derive(Clone, Debug)]
pub struct CocycleInput {
    pub mu: SpinField,
    pub e1: EuclideanAlgebraElement,
    pub e2: EuclideanAlgebraElement,
}

impl CocycleInput {
    pub fn new(mu: SpinField, e1: EuclideanAlgebraElement, e2: EuclideanAlgebraElement) -> Result<Self> {
        for e in [&e1, &e2] {
            if e.p() != mu.p() {
                return Err(Error::arg(
                    "e",
                    format!("algebra element has p = {}, field has p = {}", e.p(), mu.p()),
                ));
            }
        }
        Ok(Self { mu, e1, e2 })
    }
}

/// ∇_{Ωx+ȧ} f at every cell.
pub fn directional_derivative(grid: &Grid, values: &[Vec3], e: &EuclideanAlgebraElement) -> Vec<Vec3> {
    let d: Vec<Vec<Vec3>> = (0..grid.p()).map(|a| partial_values(grid, values, a)).collect();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let v = e.velocity(&grid.cell_center(i));
            (0..grid.p()).fold(Vec3::zeros(), |acc, a| acc + d[a][i] * v[a])
        })
        .collect()
}

fn zero_layer(grid: &Grid, layer: Option<usize>, v: &mut [Vec3]) {
    if let Some(t) = layer {
        v.par_iter_mut()
            .enumerate()
            .filter(|(i, _)| grid.in_layer(*i, t))
            .for_each(|(_, x)| *x = Vec3::zeros());
    }
}

fn layer_of(mu: &SpinField) -> Option<usize> {
    mu.is_decaying().then(|| mu.layer())
}

/// (Ω,ȧ)^∧ = (μ × ∇_{Ωx+ȧ}μ, (Ω,ȧ)), zeroed on the boundary layer.
pub fn wedge_lift(mu: &SpinField, e: &EuclideanAlgebraElement) -> SemidirectAlgebraElement {
    let grid = mu.grid();
    let dmu = directional_derivative(grid, mu.values(), e);
    let mut xi: Vec<Vec3> = mu
        .values()
        .par_iter()
        .zip(dmu.par_iter())
        .map(|(m, d)| m.cross(d))
        .collect();
    zero_layer(grid, layer_of(mu), &mut xi);
    SemidirectAlgebraElement {
        xi: DensityField::from_parts(grid.clone(), xi),
        euclid: *e,
    }
}

/// [(ξ₁,h₁),(ξ₂,h₂)] = (ξ₁×ξ₂ − ∇_{V₁}ξ₂ + ∇_{V₂}ξ₁, [h₁,h₂]) with
/// V = Ωx + ȧ.
pub fn semidirect_bracket(
    u: &SemidirectAlgebraElement,
    v: &SemidirectAlgebraElement,
) -> Result<SemidirectAlgebraElement> {
    let grid = u.xi.grid();
    grid.same_as(v.xi.grid())?;
    let d12 = directional_derivative(grid, v.xi.values(), &u.euclid);
    let d21 = directional_derivative(grid, u.xi.values(), &v.euclid);
    let xi = (0..grid.len())
        .into_par_iter()
        .map(|i| u.xi.values()[i].cross(&v.xi.values()[i]) - d12[i] + d21[i])
        .collect();
    Ok(SemidirectAlgebraElement {
        xi: DensityField::from_parts(grid.clone(), xi),
        euclid: u.euclid.bracket(&v.euclid),
    })
}

/// Σ(e₁,e₂) = −∫ μ·(∇_{V₁}μ × ∇_{V₂}μ).
pub fn cocycle_direct(inp: &CocycleInput) -> f64 {
    let grid = inp.mu.grid();
    let d1 = directional_derivative(grid, inp.mu.values(), &inp.e1);
    let d2 = directional_derivative(grid, inp.mu.values(), &inp.e2);
    let dens: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| -inp.mu.values()[i].dot(&d1[i].cross(&d2[i])))
        .collect();
    integrate_values(grid, &dens)
}

/// Σ(e₁,e₂) = ⟨μ̂, [ê₁, ê₂]⟩ = ∫ μ·ξ with ξ the first component of the
/// bracket of the two wedge lifts.
pub fn cocycle_via_pairing(inp: &CocycleInput) -> f64 {
    let a = wedge_lift(&inp.mu, &inp.e1);
    let b = wedge_lift(&inp.mu, &inp.e2);
    let br = semidirect_bracket(&a, &b).expect("wedge lifts share the grid of mu");
    let dens: Vec<f64> = inp
        .mu
        .values()
        .par_iter()
        .zip(br.xi.values().par_iter())
        .map(|(m, x)| m.dot(x))
        .collect();
    integrate_values(inp.mu.grid(), &dens)
}

/// {F,G}(n) = ∫ n·(dF × dG), with both derivatives projected onto the
/// tangent plane first.
pub fn lie_poisson_bracket(df: &VectorDensityField, dg: &VectorDensityField, n: &SpinField) -> Result<f64> {
    let a = project_tangent(n, df)?;
    let b = project_tangent(n, dg)?;
    let dens: Vec<f64> = (0..n.grid().len())
        .into_par_iter()
        .map(|i| n.values()[i].dot(&a.values()[i].cross(&b.values()[i])))
        .collect();
    Ok(integrate_values(n.grid(), &dens))
}

/// ({P_x,P_y}(n), 4π deg n), the bracket evaluated with finite-difference
/// functional derivatives of P_x and P_y.
pub fn check_px_py_bracket(n: &SpinField) -> Result<(f64, f64)> {
    if n.p() != 2 {
        return Err(Error::Dimension {
            expected: "= 2",
            found: n.p(),
        });
    }
    let dx = functional_derivative(&PComponent { axis: 0 }, n, DEFAULT_STEP)?;
    let dy = functional_derivative(&PComponent { axis: 1 }, n, DEFAULT_STEP)?;
    Ok((lie_poisson_bracket(&dx, &dy, n)?, 4.0 * PI * degree(n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::SkewMatrix;
    use crate::field::k_axis;
    use crate::generators::{make_constant, make_random};

    fn elem(p: usize, om: &[f64], ad: &[f64]) -> EuclideanAlgebraElement {
        EuclideanAlgebraElement::new(SkewMatrix::from_upper(p, om).unwrap(), ad).unwrap()
    }

    #[test]
    fn constant_mu_gives_zero() {
        let g = Grid::cube(2, 16, 4.0).unwrap();
        let mu = make_constant(&g, -k_axis()).unwrap();
        let inp = CocycleInput::new(
            mu.clone(),
            EuclideanAlgebraElement::translation(2, 0),
            elem(2, &[0.4], &[0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(cocycle_direct(&inp), 0.0);
        assert_eq!(cocycle_via_pairing(&inp), 0.0);
        assert!(wedge_lift(&mu, &inp.e1).xi.values().iter().all(|v| *v == Vec3::zeros()));
    }

    #[test]
    fn input_checks_dimension() {
        let g = Grid::cube(2, 16, 4.0).unwrap();
        let mu = make_constant(&g, -k_axis()).unwrap();
        let e3 = EuclideanAlgebraElement::translation(3, 0);
        assert!(CocycleInput::new(mu, e3, e3).is_err());
    }

    #[test]
    fn antisymmetry_and_bilinearity() {
        let g = Grid::cube(2, 32, 5.0).unwrap();
        let mu = make_random(&g, 2, 2.5, 4.0).unwrap();
        let e1 = elem(2, &[0.3], &[1.0, -0.5]);
        let e2 = elem(2, &[-0.7], &[0.2, 0.9]);
        let s = |a: EuclideanAlgebraElement, b: EuclideanAlgebraElement| {
            let inp = CocycleInput::new(mu.clone(), a, b).unwrap();
            (cocycle_direct(&inp), cocycle_via_pairing(&inp))
        };
        let (d12, p12) = s(e1, e2);
        let (d21, p21) = s(e2, e1);
        assert!((d12 + d21).abs() < 1e-12);
        assert!((p12 + p21).abs() < 1e-12);
        let (d, p) = s(e1.scale(2.5), e2);
        assert!((d - 2.5 * d12).abs() < 1e-10 * d12.abs().max(1.0));
        assert!((p - 2.5 * p12).abs() < 1e-10 * p12.abs().max(1.0));
        let (d, _) = s(e1, e2.scale(-3.0));
        assert!((d + 3.0 * d12).abs() < 1e-10 * d12.abs().max(1.0));
    }

    #[test]
    fn bracket_antisymmetric() {
        let g = Grid::cube(2, 24, 5.0).unwrap();
        let mu = make_random(&g, 4, 2.0, 3.5).unwrap();
        let u = wedge_lift(&mu, &elem(2, &[0.5], &[1.0, 0.0]));
        let v = wedge_lift(&mu, &elem(2, &[0.0], &[0.3, -1.0]));
        let uv = semidirect_bracket(&u, &v).unwrap();
        let vu = semidirect_bracket(&v, &u).unwrap();
        let uu = semidirect_bracket(&u, &u).unwrap();
        for i in 0..g.len() {
            assert!((uv.xi.values()[i] + vu.xi.values()[i]).norm() < 1e-12);
            assert!(uu.xi.values()[i].norm() < 1e-12);
        }
        assert_eq!(uv.euclid.adot, -vu.euclid.adot);
    }

    #[test]
    fn wedge_lift_solves_cross_equation() {
        // ξ×μ = (μ×∇μ)×μ = ∇μ − (μ·∇μ)μ, and μ·∇μ = O(h²) for unit μ.
        let g = Grid::cube(2, 64, 5.0).unwrap();
        let mu = make_random(&g, 8, 2.0, 4.0).unwrap();
        let e = elem(2, &[0.4], &[1.0, 0.5]);
        let xi = wedge_lift(&mu, &e);
        let d = directional_derivative(&g, mu.values(), &e);
        for (i, ((x, m), di)) in xi.xi.values().iter().zip(mu.values()).zip(&d).enumerate() {
            let r = x.cross(m) - di;
            assert!(r.norm() < 0.05 * (1.0 + di.norm()), "cell {i}: {}", r.norm());
        }
    }

    #[test]
    fn lie_poisson_basic() {
        let g = Grid::cube(2, 24, 5.0).unwrap();
        let n = make_random(&g, 6, 2.0, 3.5).unwrap();
        let a = DensityField::from_fn(&g, |i| Vec3::new(g.cell_center(i)[0], 1.0, 0.2));
        let b = DensityField::from_fn(&g, |i| Vec3::new(0.5, g.cell_center(i)[1], -1.0));
        assert!(lie_poisson_bracket(&a, &a, &n).unwrap().abs() < 1e-12);
        let ab = lie_poisson_bracket(&a, &b, &n).unwrap();
        let ba = lie_poisson_bracket(&b, &a, &n).unwrap();
        assert!((ab + ba).abs() < 1e-10);
    }
}
