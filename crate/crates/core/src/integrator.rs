//! Time stepping for ∂n/∂t = −n×δE/δn.
//!
//! `Rk4Project` is classical RK4 followed by renormalisation of every cell.
//! `Midpoint` is the implicit midpoint rule solved by fixed-point iteration;
//! it conserves |n| and the quadratic energy up to the solver tolerance.
//! Boundary layers of decaying fields stay frozen at −𝐤.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{rhs_values, EnergyParams};
use crate::error::{Error, Result};
use crate::field::SpinField;
use crate::grid::Grid;
use crate::momenta::MomentumReport;
use crate::so3::Vec3;

/// Fixed-point tolerance (max-norm update) for the midpoint solver.
pub const MIDPOINT_TOL: f64 = 1e-12;
pub const MIDPOINT_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Rk4Project,
    Midpoint,
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" | "rk4_project" => Ok(Scheme::Rk4Project),
            "midpoint" => Ok(Scheme::Midpoint),
            _ => Err(Error::Config(format!("scheme: unknown scheme `{s}`"))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rk4Project => "rk4",
            Scheme::Midpoint => "midpoint",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub steps: usize,
    pub scheme: Scheme,
    pub report_every: usize,
    pub params: EnergyParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            steps: 1000,
            scheme: Scheme::Rk4Project,
            report_every: 100,
            params: EnergyParams::default(),
        }
    }
}

impl SimConfig {
    /// Checks the settings alone; see [`SimConfig::validate_for`] for the
    /// grid-dependent step limit.
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::arg("dt", format!("{} must be positive", self.dt)));
        }
        if self.report_every == 0 {
            return Err(Error::arg("report_every", "must be at least 1"));
        }
        EnergyParams::with_axis(self.params.a, self.params.axis())?;
        Ok(())
    }
}

impl SimConfig {
    /// [`SimConfig::validate`] plus the RK4 stability limit on `grid`.
    pub fn validate_for(&self, grid: &Grid) -> Result<()> {
        self.validate()?;
        if self.scheme == Scheme::Rk4Project {
            let limit = rk4_max_dt(grid, &self.params);
            if self.dt > limit {
                // Renormalisation keeps an unstable run finite, so it would
                // not be caught by the NaN check.
                return Err(Error::arg(
                    "dt",
                    format!("{} exceeds the rk4 stability limit {limit:.3e} for this grid", self.dt),
                ));
            }
        }
        Ok(())
    }
}

/// RK4 is stable for purely imaginary eigenvalues up to |dt·ω| = 2√2.
const RK4_IMAGINARY_LIMIT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Largest stable RK4 step: the linearised flow about the far field has
/// frequencies up to Σ 4/h_a² + |a|.
pub fn rk4_max_dt(grid: &Grid, params: &EnergyParams) -> f64 {
    let omega: f64 = grid.spacing().iter().map(|h| 4.0 / (h * h)).sum::<f64>() + params.a.abs();
    RK4_IMAGINARY_LIMIT / omega
}

fn axpy(y: &[Vec3], a: f64, x: &[Vec3]) -> Vec<Vec3> {
    y.par_iter().zip(x.par_iter()).map(|(u, v)| u + v * a).collect()
}

fn free_mask(n: &SpinField) -> Vec<bool> {
    (0..n.grid().len()).map(|i| n.is_free(i)).collect()
}

fn rk4(n: &SpinField, dt: f64, params: &EnergyParams, free: &[bool]) -> Vec<Vec3> {
    let g = n.grid();
    let y = n.values();
    let f = |v: &[Vec3]| rhs_values(g, v, free, params);
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * dt, &k1));
    let k3 = f(&axpy(y, 0.5 * dt, &k2));
    let k4 = f(&axpy(y, dt, &k3));
    (0..y.len())
        .into_par_iter()
        .map(|i| {
            if !free[i] {
                return y[i];
            }
            let v = y[i] + (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
            v / v.norm()
        })
        .collect()
}

fn midpoint(n: &SpinField, dt: f64, params: &EnergyParams, free: &[bool]) -> Result<Vec<Vec3>> {
    let g = n.grid();
    let y = n.values();
    let mut next = axpy(y, dt, &rhs_values(g, y, free, params));
    let mut update = f64::INFINITY;
    for _ in 0..MIDPOINT_MAX_ITER {
        let mid: Vec<Vec3> = y.par_iter().zip(next.par_iter()).map(|(a, b)| (a + b) * 0.5).collect();
        let cand = axpy(y, dt, &rhs_values(g, &mid, free, params));
        update = cand
            .par_iter()
            .zip(next.par_iter())
            .map(|(a, b)| (a - b).amax())
            .reduce(|| 0.0, f64::max);
        next = cand;
        if update <= MIDPOINT_TOL {
            // Remove the residual solver error from |n|.
            next.par_iter_mut().for_each(|v| *v /= v.norm());
            return Ok(next);
        }
    }
    Err(Error::MidpointDiverged {
        iterations: MIDPOINT_MAX_ITER,
        update,
    })
}

/// One step of size `dt`.
pub fn step(n: &SpinField, dt: f64, scheme: Scheme, params: &EnergyParams) -> Result<SpinField> {
    let free = free_mask(n);
    let vals = match scheme {
        Scheme::Rk4Project => rk4(n, dt, params, &free),
        Scheme::Midpoint => midpoint(n, dt, params, &free)?,
    };
    Ok(SpinField::from_parts(
        n.grid().clone(),
        vals,
        n.layer(),
        n.is_decaying(),
    ))
}

/// Receives reports and the final state during [`simulate`].
pub trait Sink {
    fn report(&mut self, report: &MomentumReport) -> Result<()>;

    fn finish(&mut self, _final_state: &SpinField) -> Result<()> {
        Ok(())
    }
}

/// Collects reports in memory.
#[derive(Default, Debug)]
pub struct VecSink {
    pub reports: Vec<MomentumReport>,
}

impl Sink for VecSink {
    fn report(&mut self, report: &MomentumReport) -> Result<()> {
        self.reports.push(report.clone());
        Ok(())
    }
}

/// Integrates `cfg.steps` steps, reporting at step 0, every `report_every`
/// steps, and at the last step. Returns the final state.
pub fn simulate(n0: &SpinField, cfg: &SimConfig, sinks: &mut [&mut dyn Sink]) -> Result<SpinField> {
    cfg.validate_for(n0.grid())?;
    let emit = |n: &SpinField, t: f64, sinks: &mut [&mut dyn Sink]| -> Result<()> {
        let r = MomentumReport::compute(n, &cfg.params, t);
        sinks.iter_mut().try_for_each(|s| s.report(&r))
    };
    emit(n0, 0.0, sinks)?;
    let mut n = n0.clone();
    for s in 1..=cfg.steps {
        n = step(&n, cfg.dt, cfg.scheme, &cfg.params)?;
        if !n.values().par_iter().all(|v| v.iter().all(|c| c.is_finite())) {
            return Err(Error::NonFinite { step: s });
        }
        if s % cfg.report_every == 0 || s == cfg.steps {
            emit(&n, s as f64 * cfg.dt, sinks)?;
        }
    }
    sinks.iter_mut().try_for_each(|s| s.finish(&n))?;
    Ok(n)
}
