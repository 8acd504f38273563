//! Conserved quantities and momentum maps.
//!
//! Sign conventions, fixed once and checked by the tests:
//!
//! * the hat map is v̂w = v×w and the lift satisfies ψ_n𝐤 = −n;
//! * the Hamiltonian vector field of P_i is −∂n/∂x^i times [`SIGN_LEDGER`];
//! * the translation block of the lift momentum equals [`SIGN_LEDGER`]·P;
//! * (n·∇^R)ψ_n = +((𝐤×n)·∇)n / (1 − 𝐤·n) componentwise.
//!
//! All quadratures run over the grid box. For decaying fields this is the
//! integral over all of space; non-decaying fields only get the box value.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::algebra::{upper_pairs, SkewMatrix};
use crate::calculus::{diff_at, integrate_values, right_gradients, spin_gradients};
use crate::energy::{energy_on_box, EnergyParams};
use crate::error::{Error, Result};
use crate::field::{k_axis, DensityField, RotationField, ScalarField, SpinField, VectorDensityField};
use crate::functional::{integrate_density, Functional, LocalDensity};
use crate::generators::make_gauge_field;
use crate::grid::{Grid, SpaceVec};
use crate::so3::{self, Mat3, Vec3};

/// Overall sign relating translations, P, and the lift momentum. Determined
/// on a degree-one soliton and asserted by the test suite.
pub const SIGN_LEDGER: f64 = 1.0;

/// Cells with n·𝐤 above `1 − SINGULAR_TOL` are singular for the lift.
pub const SINGULAR_TOL: f64 = 1e-8;

/// Largest singular fraction accepted by [`reduced_momentum_lift`].
pub const SINGULAR_LIMIT: f64 = 0.01;

/// Cells with 1 − n·𝐤 below this are reported separately by
/// [`check_lift_identity`].
pub const NEAR_SINGULAR: f64 = 1e-2;

fn need_p(n: &Grid, ok: bool, expected: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected,
            found: n.p(),
        })
    }
}

/// A pair (rotation block, translation block) in 𝔰𝔢(p)*.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanMomentum {
    pub rotation: SkewMatrix,
    pub translation: SpaceVec,
}

impl EuclideanMomentum {
    pub fn zero(p: usize) -> Self {
        Self {
            rotation: SkewMatrix::zero(p),
            translation: SpaceVec::zeros(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            rotation: self.rotation.sub(&other.rotation),
            translation: self.translation - other.translation,
        }
    }

    /// Euclidean norm over all independent components.
    pub fn norm(&self) -> f64 {
        (self.rotation.norm().powi(2) + self.translation.norm_squared()).sqrt()
    }
}

/// (∫ x∧W, −∫ W) for a per-axis density W.
fn euclidean_from_density(grid: &Grid, w: &[SpaceVec]) -> EuclideanMomentum {
    let p = grid.p();
    let vol = grid.cell_volume();
    let (rot, tr) = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.cell_center(i);
            (SkewMatrix::wedge(p, &x, &w[i]).upper().to_vec(), w[i])
        })
        .reduce(
            || (vec![0.0; upper_pairs(p).len()], SpaceVec::zeros()),
            |(mut a, b), (c, d)| {
                a.iter_mut().zip(c).for_each(|(u, v)| *u += v);
                (a, b + d)
            },
        );
    let rot: Vec<f64> = rot.iter().map(|v| v * vol).collect();
    EuclideanMomentum {
        rotation: SkewMatrix::from_upper(p, &rot).unwrap_or_else(|_| SkewMatrix::zero(p)),
        translation: -tr * vol,
    }
}

/// deg n = (1/4π) ∫ n·(∂ₓn × ∂ᵧn).
pub fn degree(n: &SpinField) -> Result<f64> {
    need_p(n.grid(), n.p() == 2, "= 2")?;
    let g = spin_gradients(n);
    let dens: Vec<f64> = (0..n.grid().len())
        .into_par_iter()
        .map(|i| n.values()[i].dot(&g[0][i].cross(&g[1][i])))
        .collect();
    Ok(integrate_values(n.grid(), &dens) / (4.0 * PI))
}

/// N = ∫ (1 + n·𝐤).
pub fn momentum_n(n: &SpinField) -> f64 {
    let k = k_axis();
    let dens: Vec<f64> = n.values().par_iter().map(|v| 1.0 + v.dot(&k)).collect();
    integrate_values(n.grid(), &dens)
}

/// Ω_α = (1/8π) ε_{αβγ} n·(∂_β n × ∂_γ n), p = 3 only.
pub fn vorticity(n: &SpinField) -> Result<VectorDensityField> {
    need_p(n.grid(), n.p() == 3, "= 3")?;
    let g = spin_gradients(n);
    let c = 1.0 / (4.0 * PI);
    let vals = (0..n.grid().len())
        .into_par_iter()
        .map(|i| {
            let v = n.values()[i];
            Vec3::new(
                v.dot(&g[1][i].cross(&g[2][i])),
                v.dot(&g[2][i].cross(&g[0][i])),
                v.dot(&g[0][i].cross(&g[1][i])),
            ) * c
        })
        .collect();
    Ok(DensityField::from_parts(n.grid().clone(), vals))
}

/// P = 2π ∫ x × Ω, p = 3 only.
pub fn momentum_p_cross(n: &SpinField) -> Result<SpaceVec> {
    let om = vorticity(n)?;
    let grid = n.grid();
    let s = (0..grid.len())
        .into_par_iter()
        .map(|i| grid.cell_center(i).cross(&om.values()[i]))
        .reduce(Vec3::zeros, |a, b| a + b);
    Ok(s * (2.0 * PI * grid.cell_volume()))
}

#[inline]
fn p_density_from(n: &Vec3, x: &SpaceVec, grads: &[Vec3], p: usize) -> SpaceVec {
    let mut radial = Vec3::zeros();
    for j in 0..p {
        radial += grads[j] * x[j];
    }
    let mut out = SpaceVec::zeros();
    for i in 0..p {
        out[i] = n.dot(&grads[i].cross(&radial)) / (p as f64 - 1.0);
    }
    out
}

/// 𝒫_i = (1/(p−1)) n·(∂_i n × x^j ∂_j n).
pub fn momentum_density_p(n: &SpinField) -> Result<DensityField<SpaceVec>> {
    need_p(n.grid(), n.p() >= 2, ">= 2")?;
    let p = n.p();
    let grid = n.grid();
    let g = spin_gradients(n);
    let vals = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let gr: Vec<Vec3> = (0..p).map(|a| g[a][i]).collect();
            p_density_from(&n.values()[i], &grid.cell_center(i), &gr, p)
        })
        .collect();
    Ok(DensityField::from_parts(grid.clone(), vals))
}

/// P = ∫ 𝒫.
pub fn momentum_p_general(n: &SpinField) -> Result<SpaceVec> {
    let d = momentum_density_p(n)?;
    let s = d
        .values()
        .par_iter()
        .cloned()
        .reduce(SpaceVec::zeros, |a, b| a + b);
    Ok(s * n.grid().cell_volume())
}

/// L = −∫ x∧𝒫.
pub fn rotational_momentum(n: &SpinField) -> Result<SkewMatrix> {
    let d = momentum_density_p(n)?;
    let grid = n.grid();
    // euclidean_from_density gives (∫x∧W, −∫W).
    Ok(euclidean_from_density(grid, d.values()).rotation.scale(-1.0))
}

/// P_i as a local functional, used with the finite-difference oracle.
pub struct PComponent {
    pub axis: usize,
}

impl LocalDensity for PComponent {
    fn density(&self, grid: &Grid, values: &[Vec3], idx: usize) -> f64 {
        let p = grid.p();
        let mut grads = [Vec3::zeros(); 3];
        for (a, g) in grads.iter_mut().enumerate().take(p) {
            *g = diff_at(grid, values, idx, a);
        }
        p_density_from(&values[idx], &grid.cell_center(idx), &grads[..p], p)[self.axis]
    }

    fn reach(&self) -> usize {
        2
    }
}

impl Functional for PComponent {
    fn value(&self, n: &SpinField) -> f64 {
        integrate_density(self, n)
    }

    fn local(&self) -> Option<&dyn LocalDensity> {
        Some(self)
    }
}

/// Relative L² gap between the Hamiltonian vector field −n×δP_i/δn (from the
/// finite-difference oracle) and SIGN_LEDGER·(−∂n/∂x^i), over free cells.
pub fn translation_generator_error(n: &SpinField, axis: usize, step: f64) -> Result<f64> {
    need_p(n.grid(), n.p() >= 2, ">= 2")?;
    if axis >= n.p() {
        return Err(Error::arg("axis", format!("{axis} out of range")));
    }
    let d = crate::functional::functional_derivative(&PComponent { axis }, n, step)?;
    let grid = n.grid();
    let (num, den) = (0..grid.len())
        .into_par_iter()
        .filter(|&i| n.is_free(i))
        .map(|i| {
            let x = -n.values()[i].cross(&d.values()[i]);
            let want = -diff_at(grid, n.values(), i, axis) * SIGN_LEDGER;
            ((x - want).norm_squared(), want.norm_squared())
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    if den == 0.0 {
        return Ok(num.sqrt());
    }
    Ok((num / den).sqrt())
}

#[inline]
fn is_singular(n: &Vec3) -> bool {
    n.dot(&k_axis()) > 1.0 - SINGULAR_TOL
}

/// The lift ψ_n = exp(−(arccos(−𝐤·n)/|𝐤×n|) 𝐤×n) at one cell. At n = −𝐤
/// this is the identity. Singular cells (n near +𝐤) get the rotation by π
/// about x̂, which maps 𝐤 to −𝐤.
pub fn lift_at(n: &Vec3) -> Mat3 {
    let k = k_axis();
    if is_singular(n) {
        return so3::exp(&(Vec3::x() * PI));
    }
    let w = k.cross(n);
    let s = w.norm();
    let c = n.dot(&k);
    let theta = s.atan2(-c);
    let factor = if s > 1e-8 { theta / s } else { 1.0 / (-c) };
    so3::exp(&(w * -factor))
}

/// ψ_n together with the cells where n is too close to +𝐤.
#[derive(Clone, Debug)]
pub struct Lift {
    pub psi: RotationField,
    pub singular: Vec<usize>,
}

/// ψ_n with ψ_n𝐤 = −n at every non-singular cell.
pub fn lift_psi(n: &SpinField) -> Result<Lift> {
    let grid = n.grid();
    let vals: Vec<Mat3> = n.values().par_iter().map(lift_at).collect();
    let singular = (0..grid.len())
        .filter(|&i| is_singular(&n.values()[i]))
        .collect();
    let layer = if n.is_decaying() { n.layer() } else { 0 };
    Ok(Lift {
        psi: RotationField::new(grid.clone(), vals, layer)?,
        singular,
    })
}

/// Per-axis (μ·∇^R_{e_b}ψ), zeroed on `skip` cells.
fn mu_right_gradient(psi: &RotationField, mu: &SpinField, skip: &[bool]) -> Vec<SpaceVec> {
    let p = psi.grid().p();
    let rg = right_gradients(psi);
    (0..psi.grid().len())
        .into_par_iter()
        .map(|i| {
            let mut w = SpaceVec::zeros();
            if !skip.get(i).copied().unwrap_or(false) {
                for b in 0..p {
                    w[b] = mu.values()[i].dot(&rg[b][i]);
                }
            }
            w
        })
        .collect()
}

/// J^H(ψ, μ) = (∫ x∧(μ·∇^R)ψ, −∫ (μ·∇^R)ψ).
pub fn momentum_jh(psi: &RotationField, mu: &SpinField) -> Result<EuclideanMomentum> {
    psi.grid().same_as(mu.grid())?;
    let w = mu_right_gradient(psi, mu, &[]);
    Ok(euclidean_from_density(psi.grid(), &w))
}

/// Closed-form (n·∇^R)ψ_n = ((𝐤×n)·∂_b n)/(1 − 𝐤·n) per axis, zero on
/// singular cells.
fn lift_density(n: &SpinField) -> Vec<SpaceVec> {
    let grid = n.grid();
    let p = grid.p();
    let g = spin_gradients(n);
    let k = k_axis();
    (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let v = n.values()[i];
            let mut w = SpaceVec::zeros();
            if is_singular(&v) {
                return w;
            }
            let kn = k.cross(&v);
            let den = 1.0 - k.dot(&v);
            for b in 0..p {
                w[b] = kn.dot(&g[b][i]) / den;
            }
            w
        })
        .collect()
}

/// Reduced momentum (∫ x∧W, −∫ W) with W the closed-form lift density.
/// Returns the singular cell count alongside.
pub fn reduced_momentum_lift(n: &SpinField) -> Result<(EuclideanMomentum, usize)> {
    let grid = n.grid();
    let singular = n.values().iter().filter(|v| is_singular(v)).count();
    let limit = (SINGULAR_LIMIT * grid.len() as f64).floor() as usize;
    if singular > limit {
        return Err(Error::TooManySingular {
            singular,
            total: grid.len(),
            limit,
        });
    }
    Ok((euclidean_from_density(grid, &lift_density(n)), singular))
}

/// J^H(ψ_n, n) from the discrete right gradient of the lift, singular
/// cells skipped.
pub fn momentum_jh_of_lift(n: &SpinField) -> Result<(EuclideanMomentum, usize)> {
    let lift = lift_psi(n)?;
    let mut skip = vec![false; n.grid().len()];
    for &i in &lift.singular {
        skip[i] = true;
    }
    let w = mu_right_gradient(&lift.psi, n, &skip);
    Ok((euclidean_from_density(n.grid(), &w), lift.singular.len()))
}

/// J^H(ψA⁻¹, μ) − J^H(ψ, μ) for ψ = ψ_n, μ = −ψ𝐤 = n and A = exp(α𝐤).
pub fn gauge_shift(n: &SpinField, alpha: &ScalarField) -> Result<EuclideanMomentum> {
    n.grid().same_as(alpha.grid())?;
    let a = make_gauge_field(alpha)?;
    let lift = lift_psi(n)?;
    let shifted = lift.psi.compose(&a.inverse())?;
    let before = momentum_jh(&lift.psi, n)?;
    let after = momentum_jh(&shifted, n)?;
    Ok(after.sub(&before))
}

/// Norm of [`gauge_shift`] over all components.
pub fn gauge_invariance_residual(n: &SpinField, alpha: &ScalarField) -> Result<f64> {
    Ok(gauge_shift(n, alpha)?.norm())
}

/// Result of comparing the discrete and closed-form lift derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftIdentityReport {
    /// Max residual over cells with 1 − n·𝐤 ≥ NEAR_SINGULAR.
    pub residual: f64,
    /// Max residual over near-singular but not singular cells.
    pub near_singular_residual: f64,
    pub near_singular: usize,
    pub singular: usize,
}

/// Compares (n·∇^R)ψ_n computed through the discrete right gradient of the
/// lift with the closed form ((𝐤×n)·∇)n/(1 − 𝐤·n).
pub fn check_lift_identity(n: &SpinField) -> Result<LiftIdentityReport> {
    let lift = lift_psi(n)?;
    let lhs = mu_right_gradient(&lift.psi, n, &[]);
    let rhs = lift_density(n);
    let k = k_axis();
    let mut rep = LiftIdentityReport {
        residual: 0.0,
        near_singular_residual: 0.0,
        near_singular: 0,
        singular: lift.singular.len(),
    };
    for (i, v) in n.values().iter().enumerate() {
        if is_singular(v) {
            continue;
        }
        let r = (lhs[i] - rhs[i]).norm();
        if 1.0 - v.dot(&k) < NEAR_SINGULAR {
            rep.near_singular += 1;
            rep.near_singular_residual = rep.near_singular_residual.max(r);
        } else {
            rep.residual = rep.residual.max(r);
        }
    }
    Ok(rep)
}

/// One row of diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentumReport {
    pub t: f64,
    pub energy: f64,
    pub n: f64,
    /// Linear momentum P (p ≥ 2).
    pub p: Option<SpaceVec>,
    /// Rotational momentum L (p ≥ 2).
    pub l: Option<SkewMatrix>,
    /// Degree (p = 2).
    pub deg: Option<f64>,
    pub norm_dev: f64,
}

impl MomentumReport {
    pub fn compute(n: &SpinField, params: &EnergyParams, t: f64) -> Self {
        let p = n.p();
        Self {
            t,
            energy: energy_on_box(n, params),
            n: momentum_n(n),
            p: (p >= 2).then(|| momentum_p_general(n).expect("p checked")),
            l: (p >= 2).then(|| rotational_momentum(n).expect("p checked")),
            deg: (p == 2).then(|| degree(n).expect("p checked")),
            norm_dev: n.norm_deviation(),
        }
    }

    /// Column names matching [`MomentumReport::values`].
    pub fn header(p: usize) -> Vec<String> {
        let mut h: Vec<String> = vec!["t".into(), "E".into(), "N".into()];
        if p >= 2 {
            h.extend((1..=p).map(|i| format!("P_{i}")));
            h.extend(upper_pairs(p).iter().map(|(i, j)| format!("L_{}{}", i + 1, j + 1)));
        }
        if p == 2 {
            h.push("deg".into());
        }
        h.push("norm_dev".into());
        h
    }

    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t, self.energy, self.n];
        if let Some(pv) = self.p {
            let p = self.l.map(|l| l.p()).unwrap_or(2);
            v.extend((0..p).map(|i| pv[i]));
        }
        if let Some(l) = self.l {
            v.extend_from_slice(l.upper());
        }
        if let Some(d) = self.deg {
            v.push(d);
        }
        v.push(self.norm_dev);
        v
    }
}
