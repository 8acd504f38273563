//! 𝔰𝔢(p) elements and the semidirect algebra 𝔤 ⋊ 𝔰𝔢(p).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::field::VectorDensityField;
use crate::grid::SpaceVec;
use crate::so3::Mat3;

/// Upper-triangle index pairs of a skew p×p matrix, in storage order.
pub fn upper_pairs(p: usize) -> &'static [(usize, usize)] {
    match p {
        2 => &[(0, 1)],
        3 => &[(0, 1), (0, 2), (1, 2)],
        _ => &[],
    }
}

/// Skew-symmetric p×p matrix held by its independent upper-triangle
/// entries, so `M + Mᵀ = 0` holds exactly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SkewMatrix {
    p: usize,
    upper: [f64; 3],
}

impl SkewMatrix {
    pub fn zero(p: usize) -> Self {
        Self { p, upper: [0.0; 3] }
    }

    pub fn from_upper(p: usize, entries: &[f64]) -> Result<Self> {
        if !(1..=3).contains(&p) {
            return Err(Error::arg("p", format!("{p} not in 1..=3")));
        }
        let n = upper_pairs(p).len();
        if entries.len() != n {
            return Err(Error::arg(
                "omega",
                format!("p = {p} needs {n} upper-triangle entries, got {}", entries.len()),
            ));
        }
        let mut upper = [0.0; 3];
        upper[..n].copy_from_slice(entries);
        Ok(Self { p, upper })
    }

    /// Skew part of the leading p×p block of `m`.
    pub fn from_matrix(p: usize, m: &Mat3) -> Self {
        let mut s = Self::zero(p);
        for (slot, &(i, j)) in upper_pairs(p).iter().enumerate() {
            s.upper[slot] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
        s
    }

    /// x∧y = x yᵀ − y xᵀ.
    pub fn wedge(p: usize, x: &SpaceVec, y: &SpaceVec) -> Self {
        let mut s = Self::zero(p);
        for (slot, &(i, j)) in upper_pairs(p).iter().enumerate() {
            s.upper[slot] = x[i] * y[j] - y[i] * x[j];
        }
        s
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..upper_pairs(self.p).len()]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
        upper_pairs(self.p)
            .iter()
            .position(|&pr| pr == (a, b))
            .map(|s| sign * self.upper[s])
            .unwrap_or(0.0)
    }

    /// Padded 3×3 matrix.
    pub fn to_matrix(&self) -> Mat3 {
        let mut m = Mat3::zeros();
        for (slot, &(i, j)) in upper_pairs(self.p).iter().enumerate() {
            m[(i, j)] = self.upper[slot];
            m[(j, i)] = -self.upper[slot];
        }
        m
    }

    pub fn apply(&self, x: &SpaceVec) -> SpaceVec {
        self.to_matrix() * x
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = *self;
        out.upper.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.upper.iter_mut().zip(other.upper) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Euclidean norm of the independent entries.
    pub fn norm(&self) -> f64 {
        self.upper.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// (Ω, ȧ) ∈ 𝔰𝔢(p) = 𝔰𝔬(p) × ℝ^p. The generated vector field is x ↦ Ωx + ȧ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EuclideanAlgebraElement {
    pub omega: SkewMatrix,
    pub adot: SpaceVec,
}

impl EuclideanAlgebraElement {
    pub fn new(omega: SkewMatrix, adot: &[f64]) -> Result<Self> {
        let p = omega.p();
        if adot.len() != p {
            return Err(Error::arg(
                "adot",
                format!("p = {p} needs {p} components, got {}", adot.len()),
            ));
        }
        let mut a = SpaceVec::zeros();
        for (i, v) in adot.iter().enumerate() {
            a[i] = *v;
        }
        Ok(Self { omega, adot: a })
    }

    /// Pure translation along the unit vector `e_axis`.
    pub fn translation(p: usize, axis: usize) -> Self {
        let mut adot = SpaceVec::zeros();
        adot[axis] = 1.0;
        Self {
            omega: SkewMatrix::zero(p),
            adot,
        }
    }

    pub fn p(&self) -> usize {
        self.omega.p()
    }

    /// Ωx + ȧ.
    pub fn velocity(&self, x: &SpaceVec) -> SpaceVec {
        self.omega.apply(x) + self.adot
    }

    /// [(Ω₁,ȧ₁),(Ω₂,ȧ₂)] = (Ω₁Ω₂ − Ω₂Ω₁, Ω₁ȧ₂ − Ω₂ȧ₁).
    pub fn bracket(&self, other: &Self) -> Self {
        let (a, b) = (self.omega.to_matrix(), other.omega.to_matrix());
        Self {
            omega: SkewMatrix::from_matrix(self.p(), &(a * b - b * a)),
            adot: a * other.adot - b * self.adot,
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            omega: self.omega.scale(s),
            adot: self.adot * s,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            omega: self.omega.add(&other.omega),
            adot: self.adot + other.adot,
        }
    }
}

/// Text form `Ω-upper-triangle;ȧ`, e.g. `0;1,0` for p = 2 or `0.5,0,0;0,0,1`
/// for p = 3. An empty Ω part means zero rotation.
impl FromStr for EuclideanAlgebraElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (om, ad) = s
            .split_once(';')
            .ok_or_else(|| Error::Config(format!("algebra element `{s}` lacks `;`")))?;
        let parse = |part: &str| -> Result<Vec<f64>> {
            part.split(',')
                .map(str::trim)
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::Config(format!("bad number `{t}` in `{s}`")))
                })
                .collect()
        };
        let adot = parse(ad)?;
        let p = adot.len();
        let mut om = parse(om)?;
        if om.is_empty() {
            om = vec![0.0; upper_pairs(p).len()];
        }
        let omega = SkewMatrix::from_upper(p, &om).map_err(|e| Error::Config(e.to_string()))?;
        EuclideanAlgebraElement::new(omega, &adot).map_err(|e| Error::Config(e.to_string()))
    }
}

impl fmt::Display for EuclideanAlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let om: Vec<String> = self.omega.upper().iter().map(|v| v.to_string()).collect();
        let ad: Vec<String> = (0..self.p()).map(|i| self.adot[i].to_string()).collect();
        write!(f, "{};{}", om.join(","), ad.join(","))
    }
}

/// (ξ, (Ω, ȧ)) ∈ 𝔤 ⋊ 𝔰𝔢(p); ξ vanishes on the boundary layer.
#[derive(Clone, Debug, PartialEq)]
pub struct SemidirectAlgebraElement {
    pub xi: VectorDensityField,
    pub euclid: EuclideanAlgebraElement,
}
