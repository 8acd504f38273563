//! Python bindings. Fields cross the boundary as lists of `(x, y, z)` tuples
//! in row-major cell order (axis 0 fastest, matching the core crate).

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use llgeo::cocycle::{check_px_py_bracket, cocycle_direct, cocycle_via_pairing, CocycleInput};
use llgeo::energy::energy_on_box;
use llgeo::field::DEFAULT_LAYER;
use llgeo::generators;
use llgeo::integrator::{self, VecSink};
use llgeo::io::{read_snapshot, write_snapshot, Snapshot};
use llgeo::momenta::{self, check_lift_identity, momentum_jh_of_lift, reduced_momentum_lift};
use llgeo::so3::Vec3;
use llgeo::{EnergyParams, EuclideanAlgebraElement, Scheme, SimConfig};

fn py_err(e: llgeo::Error) -> PyErr {
    match e.exit_code() {
        2 => PyValueError::new_err(e.to_string()),
        3 => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type Triple = (f64, f64, f64);
type ReportRow = Vec<(String, f64)>;

#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid(llgeo::Grid);

#[pymethods]
impl PyGrid {
    /// Cell-centred grid with `dims` cells covering `lengths` centred on 0.
    #[new]
    fn new(dims: Vec<usize>, lengths: Vec<f64>) -> PyResult<Self> {
        llgeo::Grid::centered(&dims, &lengths).map(Self).map_err(py_err)
    }

    /// `cells` per axis on [−half, half]^p.
    #[staticmethod]
    fn cube(p: usize, cells: usize, half: f64) -> PyResult<Self> {
        llgeo::Grid::cube(p, cells, half).map(Self).map_err(py_err)
    }

    #[getter]
    fn p(&self) -> usize {
        self.0.p()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims().to_vec()
    }

    #[getter]
    fn spacing(&self) -> Vec<f64> {
        self.0.spacing().to_vec()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn cell_centers(&self) -> Vec<Triple> {
        (0..self.0.len())
            .map(|i| {
                let x = self.0.cell_center(i);
                (x[0], x[1], x[2])
            })
            .collect()
    }

    /// Largest generator cutoff that keeps the boundary layer at −k.
    fn max_cutoff(&self) -> f64 {
        generators::max_cutoff(&self.0, DEFAULT_LAYER)
    }

    fn __repr__(&self) -> String {
        format!("Grid(dims={:?}, spacing={:?})", self.0.dims(), self.0.spacing())
    }
}

#[pyclass(name = "SpinField", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpinField(llgeo::SpinField);

#[pymethods]
impl PySpinField {
    /// Unit vectors per cell; the outer layer must equal (0, 0, −1).
    #[new]
    fn new(grid: &PyGrid, values: Vec<Triple>) -> PyResult<Self> {
        let v = values.into_iter().map(|(x, y, z)| Vec3::new(x, y, z)).collect();
        llgeo::SpinField::new(grid.0.clone(), v, DEFAULT_LAYER).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn constant(grid: &PyGrid, value: Triple) -> PyResult<Self> {
        generators::make_constant(&grid.0, Vec3::new(value.0, value.1, value.2))
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (grid, m, lam, cutoff=None, center=(0.0, 0.0)))]
    fn bp_soliton(grid: &PyGrid, m: i32, lam: f64, cutoff: Option<f64>, center: (f64, f64)) -> PyResult<Self> {
        let cutoff = cutoff.unwrap_or_else(|| generators::max_cutoff(&grid.0, DEFAULT_LAYER));
        let c = llgeo::SpaceVec::new(center.0, center.1, 0.0);
        generators::make_bp_soliton_at(&grid.0, m, lam, cutoff, c)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    #[pyo3(signature = (grid, seed, amplitude=2.5, cutoff=None))]
    fn random(grid: &PyGrid, seed: u64, amplitude: f64, cutoff: Option<f64>) -> PyResult<Self> {
        let cutoff = cutoff.unwrap_or_else(|| generators::max_cutoff(&grid.0, DEFAULT_LAYER));
        generators::make_random(&grid.0, seed, amplitude, cutoff)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        read_snapshot(path).and_then(Snapshot::into_spin).map(Self).map_err(py_err)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        write_snapshot(&Snapshot::Spin(self.0.clone()), path).map_err(py_err)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid(self.0.grid().clone())
    }

    fn values(&self) -> Vec<Triple> {
        self.0.values().iter().map(|v| (v.x, v.y, v.z)).collect()
    }

    fn norm_deviation(&self) -> f64 {
        self.0.norm_deviation()
    }

    #[pyo3(signature = (a=0.0))]
    fn energy(&self, a: f64) -> PyResult<f64> {
        let p = EnergyParams::new(a).map_err(py_err)?;
        Ok(energy_on_box(&self.0, &p))
    }

    fn degree(&self) -> PyResult<f64> {
        momenta::degree(&self.0).map_err(py_err)
    }

    fn momentum_n(&self) -> f64 {
        momenta::momentum_n(&self.0)
    }

    fn momentum_p(&self) -> PyResult<Vec<f64>> {
        let p = momenta::momentum_p_general(&self.0).map_err(py_err)?;
        Ok((0..self.0.p()).map(|i| p[i]).collect())
    }

    /// Upper-triangle entries L_ij, i < j.
    fn rotational_momentum(&self) -> PyResult<Vec<f64>> {
        Ok(momenta::rotational_momentum(&self.0).map_err(py_err)?.upper().to_vec())
    }

    /// One step of the given scheme (`rk4` or `midpoint`).
    #[pyo3(signature = (dt, scheme="rk4", a=0.0))]
    fn step(&self, dt: f64, scheme: &str, a: f64) -> PyResult<Self> {
        let scheme: Scheme = scheme.parse().map_err(py_err)?;
        let p = EnergyParams::new(a).map_err(py_err)?;
        integrator::step(&self.0, dt, scheme, &p).map(Self).map_err(py_err)
    }

    /// Runs `steps` steps; returns the final field and report rows as
    /// (column, value) pairs.
    #[pyo3(signature = (dt, steps, scheme="rk4", a=0.0, report_every=100))]
    fn simulate(
        &self,
        py: Python<'_>,
        dt: f64,
        steps: usize,
        scheme: &str,
        a: f64,
        report_every: usize,
    ) -> PyResult<(Self, Vec<ReportRow>)> {
        let cfg = SimConfig {
            dt,
            steps,
            scheme: scheme.parse().map_err(py_err)?,
            report_every,
            params: EnergyParams::new(a).map_err(py_err)?,
        };
        let mut sink = VecSink::default();
        let n = &self.0;
        let last = py
            .detach(|| integrator::simulate(n, &cfg, &mut [&mut sink]))
            .map_err(py_err)?;
        let header = llgeo::MomentumReport::header(n.p());
        let rows = sink
            .reports
            .iter()
            .map(|r| header.iter().cloned().zip(r.values()).collect())
            .collect();
        Ok((Self(last), rows))
    }

    fn __repr__(&self) -> String {
        format!("SpinField(dims={:?})", self.0.grid().dims())
    }
}

/// ({P_x, P_y}, 4π deg n).
#[pyfunction]
fn bracket_check(n: &PySpinField) -> PyResult<(f64, f64)> {
    check_px_py_bracket(&n.0).map_err(py_err)
}

/// (direct, via pairing) values of the cocycle for elements written as
/// `omega-upper;adot`, e.g. `0;1,0`.
#[pyfunction]
#[pyo3(signature = (mu, e1="0;1,0", e2="0;0,1"))]
fn cocycle(mu: &PySpinField, e1: &str, e2: &str) -> PyResult<(f64, f64)> {
    let e1: EuclideanAlgebraElement = e1.parse().map_err(py_err)?;
    let e2: EuclideanAlgebraElement = e2.parse().map_err(py_err)?;
    let inp = CocycleInput::new(mu.0.clone(), e1, e2).map_err(py_err)?;
    Ok((cocycle_direct(&inp), cocycle_via_pairing(&inp)))
}

/// Lift diagnostics: identity residual, singular cell count, and the reduced
/// and lifted momenta as (rotation upper entries, translation).
#[pyfunction]
fn lift_check(n: &PySpinField) -> PyResult<Vec<(String, Vec<f64>)>> {
    let rep = check_lift_identity(&n.0).map_err(py_err)?;
    let (reduced, _) = reduced_momentum_lift(&n.0).map_err(py_err)?;
    let (lifted, _) = momentum_jh_of_lift(&n.0).map_err(py_err)?;
    let p = n.0.p();
    let split = |m: &momenta::EuclideanMomentum| {
        let mut v = m.rotation.upper().to_vec();
        v.extend((0..p).map(|i| m.translation[i]));
        v
    };
    Ok(vec![
        ("residual".into(), vec![rep.residual]),
        ("singular_cells".into(), vec![rep.singular as f64]),
        ("reduced".into(), split(&reduced)),
        ("lifted".into(), split(&lifted)),
    ])
}

#[pymodule]
fn pyllgeo(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PySpinField>()?;
    m.add_function(wrap_pyfunction!(bracket_check, m)?)?;
    m.add_function(wrap_pyfunction!(cocycle, m)?)?;
    m.add_function(wrap_pyfunction!(lift_check, m)?)?;
    Ok(())
}
