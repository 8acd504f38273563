//! SO(3) primitives. 𝔰𝔬(3) is identified with ℝ³ through the hat map
//! `hat(v) w = v × w`, so `exp(v)` is the right-handed rotation by `|v|`
//! about `v / |v|`.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

/// Orthogonality/determinant tolerance accepted by [`log`].
pub const ROTATION_TOL: f64 = 1e-8;

pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`] applied to the skew part of `m`.
pub fn vee(m: &Mat3) -> Vec3 {
    0.5 * Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)])
}

/// Rodrigues formula.
pub fn exp(v: &Vec3) -> Mat3 {
    let t2 = v.norm_squared();
    let (a, b) = if t2 < 1e-10 {
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        let t = t2.sqrt();
        (t.sin() / t, (1.0 - t.cos()) / t2)
    };
    let k = hat(v);
    Mat3::identity() + k * a + k * k * b
}

pub fn is_rotation(r: &Mat3, tol: f64) -> bool {
    let orth = (r.transpose() * r - Mat3::identity()).abs().max();
    r.iter().all(|x| x.is_finite()) && orth <= tol && (r.determinant() - 1.0).abs() <= tol
}

/// Principal logarithm, `|log R| ≤ π`. Rotations within 1e-3 of a half turn
/// take their axis from the symmetric part of `R`.
pub fn log(r: &Mat3) -> Result<Vec3> {
    if !is_rotation(r, ROTATION_TOL) {
        return Err(Error::arg("rotation", "matrix is not in SO(3)"));
    }
    Ok(log_unchecked(r))
}

pub(crate) fn log_unchecked(r: &Mat3) -> Vec3 {
    let w = vee(r);
    let s = w.norm();
    let c = 0.5 * (r.trace() - 1.0);
    let theta = s.atan2(c);
    if theta < 1e-5 {
        // θ/sinθ ≈ 1 + θ²/6
        return w * (1.0 + theta * theta / 6.0);
    }
    if std::f64::consts::PI - theta > 1e-3 {
        return w * (theta / s);
    }
    // Near a half turn: uuᵀ = (sym(R) − cosθ I) / (1 − cosθ).
    let sym = 0.5 * (r + r.transpose());
    let uu = (sym - Mat3::identity() * c) / (1.0 - c);
    let i = (0..3)
        .max_by(|&a, &b| uu[(a, a)].partial_cmp(&uu[(b, b)]).unwrap())
        .unwrap();
    let ui = uu[(i, i)].max(0.0).sqrt();
    let mut u = Vec3::new(uu[(0, i)], uu[(1, i)], uu[(2, i)]) / ui;
    u /= u.norm();
    if u.dot(&w) < 0.0 {
        u = -u;
    }
    u * theta
}

/// Unit vectors spanning the plane orthogonal to the unit vector `n`.
pub fn tangent_basis(n: &Vec3) -> (Vec3, Vec3) {
    let seed = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let t1 = (seed - n * n.dot(&seed)).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}
