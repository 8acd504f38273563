//! Landau–Lifshitz spin fields on grids in ℝ^p (p = 1, 2, 3): energy and
//! dynamics, conserved quantities and momentum maps, the SO(3)-valued lift,
//! the semidirect-product cocycle, and the {P_x, P_y} = 4π·deg n bracket.
//!
//! Conventions: the hat map is v̂w = v×w, 𝐤 = (0, 0, 1), and decaying fields
//! equal −𝐤 exactly on an outer boundary layer of cells.

pub mod algebra;
pub mod calculus;
pub mod cli;
pub mod cocycle;
pub mod config;
pub mod energy;
pub mod error;
pub mod field;
pub mod functional;
pub mod generators;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod momenta;
pub mod so3;

pub use algebra::{EuclideanAlgebraElement, SemidirectAlgebraElement, SkewMatrix};
pub use energy::EnergyParams;
pub use error::{Error, Result};
pub use field::{RotationField, ScalarField, SpinField, VectorDensityField};
pub use grid::{Grid, SpaceVec};
pub use integrator::{Scheme, SimConfig};
pub use momenta::MomentumReport;
