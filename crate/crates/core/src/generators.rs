//! Analytic initial conditions and gauge fields.
//!
//! Spin fields are written as n = (sinθ cosφ, sinθ sinφ, −cosθ), with θ the
//! angle away from the far-field value −𝐤. Compact support comes from
//! multiplying θ by a C¹ cosine ramp that reaches zero at the cutoff radius.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{is_unit, k_axis, RotationField, ScalarField, SpinField, DEFAULT_LAYER};
use crate::grid::{Grid, SpaceVec};
use crate::so3::{self, Mat3, Vec3};

/// C¹ ramp equal to 1 on [0, start], 0 beyond `end`, cosine in between.
pub fn cosine_ramp(r: f64, start: f64, end: f64) -> f64 {
    if r <= start {
        1.0
    } else if r >= end {
        0.0
    } else {
        0.5 * (1.0 + (PI * (r - start) / (end - start)).cos())
    }
}

/// Unit vector at angle `theta` from −𝐤 with azimuth `phi`.
pub fn from_angles(theta: f64, phi: f64) -> Vec3 {
    let s = theta.sin();
    Vec3::new(s * phi.cos(), s * phi.sin(), -theta.cos())
}

/// Largest support radius that keeps every cell of the boundary layer, and
/// the stencil cells next to it, exactly at −𝐤.
pub fn max_cutoff(grid: &Grid, layer: usize) -> f64 {
    grid.half_width() - (layer as f64 + 1.0) * grid.max_spacing()
}

/// n(x) = v everywhere. Constants other than −𝐤 are flagged non-decaying.
pub fn make_constant(grid: &Grid, v: Vec3) -> Result<SpinField> {
    if !is_unit(&v, 1e-12) {
        return Err(Error::arg("v", format!("|v| = {} is not 1", v.norm())));
    }
    SpinField::non_decaying(grid.clone(), vec![v; grid.len()], DEFAULT_LAYER)
}

/// Belavin–Polyakov soliton of degree `m` centred at the origin.
pub fn make_bp_soliton(grid: &Grid, m: i32, lambda: f64, cutoff: f64) -> Result<SpinField> {
    make_bp_soliton_at(grid, m, lambda, cutoff, SpaceVec::zeros())
}

/// Degree-`m` Belavin–Polyakov soliton w = ((z − c)/λ)^m pulled back through
/// the stereographic projection that sends −𝐤 to ∞ (z̄ for m < 0). Its polar
/// angle is blended to zero by a cosine ramp over [cutoff/2, cutoff].
pub fn make_bp_soliton_at(
    grid: &Grid,
    m: i32,
    lambda: f64,
    cutoff: f64,
    center: SpaceVec,
) -> Result<SpinField> {
    if grid.p() != 2 {
        return Err(Error::Dimension {
            expected: "= 2",
            found: grid.p(),
        });
    }
    if !(lambda > 0.0 && lambda < cutoff) {
        return Err(Error::arg("lambda", format!("need 0 < lambda ({lambda}) < cutoff ({cutoff})")));
    }
    let limit = max_cutoff(grid, DEFAULT_LAYER) - center.norm();
    if cutoff > limit {
        return Err(Error::arg(
            "cutoff",
            format!("cutoff {cutoff} too close to box edge (max {limit:.6})"),
        ));
    }
    let mabs = m.unsigned_abs() as i32;
    let values = (0..grid.len())
        .map(|i| {
            if m == 0 {
                return -k_axis();
            }
            let d = grid.cell_center(i) - center;
            let r = d.norm();
            let theta = 2.0 * (lambda / r).powi(mabs).atan() * cosine_ramp(r, 0.5 * cutoff, cutoff);
            let phi = m as f64 * d[1].atan2(d[0]);
            from_angles(theta, phi)
        })
        .collect();
    SpinField::from_raw(grid.clone(), values, DEFAULT_LAYER)
}

/// n(x) = (sinθ(|x|), 0, −cosθ(|x|)): a field depending on |x| only, lying in
/// the xz-plane through −𝐤. `profile` gives θ as a function of r and must
/// vanish (mod 2π) on the boundary layer.
pub fn make_radial_profile(grid: &Grid, profile: impl Fn(f64) -> f64) -> Result<SpinField> {
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let theta = profile(grid.cell_center(i).norm());
        if !theta.is_finite() {
            return Err(Error::Invariant {
                cell: i,
                reason: "profile returned a non-finite angle".into(),
            });
        }
        let v = from_angles(theta, 0.0);
        if grid.in_layer(i, DEFAULT_LAYER) && (v + k_axis()).norm() > 1e-12 {
            return Err(Error::Invariant {
                cell: i,
                reason: "profile does not reach -k on the boundary layer".into(),
            });
        }
        values.push(v);
    }
    SpinField::from_raw(grid.clone(), values, DEFAULT_LAYER)
}

/// Gaussian-ramp radial profile θ(r) = amplitude·exp(−r²/width²), cut off
/// smoothly over [cutoff/2, cutoff].
pub fn gaussian_profile(amplitude: f64, width: f64, cutoff: f64) -> impl Fn(f64) -> f64 {
    move |r| amplitude * (-(r / width).powi(2)).exp() * cosine_ramp(r, 0.5 * cutoff, cutoff)
}

/// A(x) = exp(α(x)𝐤). α must be an integer multiple of 2π on the boundary
/// layer; for p ≥ 2 it must take a single such value there.
pub fn make_gauge_field(alpha: &ScalarField) -> Result<RotationField> {
    let grid = alpha.grid();
    let mut layer_value: Option<f64> = None;
    let mut values = Vec::with_capacity(grid.len());
    for (i, &a) in alpha.values().iter().enumerate() {
        if !a.is_finite() {
            return Err(Error::arg("alpha", format!("non-finite value at cell {i}")));
        }
        if grid.in_layer(i, DEFAULT_LAYER) {
            let turns = a / TAU;
            if (turns - turns.round()).abs() > 1e-9 {
                return Err(Error::arg(
                    "alpha",
                    format!("cell {i} on the boundary layer is not a multiple of 2π"),
                ));
            }
            if grid.p() >= 2 {
                match layer_value {
                    None => layer_value = Some(turns.round()),
                    Some(t) if t != turns.round() => {
                        return Err(Error::arg(
                            "alpha",
                            "must be constant on the boundary layer for p >= 2",
                        ))
                    }
                    _ => {}
                }
            }
            values.push(Mat3::identity());
        } else {
            values.push(so3::exp(&(k_axis() * a)));
        }
    }
    RotationField::new(grid.clone(), values, DEFAULT_LAYER)
}

/// Band-limited random deg-0 field: θ = amplitude·ramp(|x|)·(1 + ½g(x))/1.5
/// and φ = h(x), where g, h are sums of a few low Fourier modes with seeded
/// random coefficients. For amplitude < π the field never reaches +𝐤.
pub fn make_random(grid: &Grid, seed: u64, amplitude: f64, cutoff: f64) -> Result<SpinField> {
    if !(0.0..PI).contains(&amplitude) {
        return Err(Error::arg("amplitude", format!("{amplitude} not in [0, π)")));
    }
    let limit = max_cutoff(grid, DEFAULT_LAYER);
    if !(cutoff > 0.0 && cutoff <= limit) {
        return Err(Error::arg(
            "cutoff",
            format!("cutoff {cutoff} not in (0, {limit:.6}]"),
        ));
    }
    let p = grid.p();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = PI / cutoff;
    let mut mode = || {
        let mut k = SpaceVec::zeros();
        for a in 0..p {
            k[a] = base * rng.random_range(-2.0..2.0);
        }
        (k, rng.random_range(0.0..TAU), rng.random_range(0.3..1.0))
    };
    let gmodes: Vec<_> = (0..4).map(|_| mode()).collect();
    let hmodes: Vec<_> = (0..4).map(|_| mode()).collect();
    let gnorm: f64 = gmodes.iter().map(|m| m.2).sum();
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.cell_center(i);
            let g: f64 = gmodes.iter().map(|(k, ph, c)| c * (k.dot(&x) + ph).cos()).sum::<f64>() / gnorm;
            let h: f64 = hmodes.iter().map(|(k, ph, c)| 1.5 * c * (k.dot(&x) + ph).sin()).sum();
            let theta = amplitude * cosine_ramp(x.norm(), 0.3 * cutoff, cutoff) * (1.0 + 0.5 * g) / 1.5;
            from_angles(theta, h)
        })
        .collect();
    SpinField::from_raw(grid.clone(), values, DEFAULT_LAYER)
}
