//! Python bindings. Complex numbers cross as Python `complex`, words as
//! lists of `(generator, exponent)` pairs, reports as JSON strings.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use folia::cli::{self, Command, Config, RunOptions};
use folia::cone::{self, ConePoint};
use folia::fuchsian::{self, FuchsianRepresentation, Letter, SurfaceGroupPresentation, Word};
use folia::holspace::{self, HolConfig, HoloFunction};
use folia::kahler::{self, ConformalMetric};
use folia::projdyn::{self, CMatrix, ClassifyParams, LinearRep};
use folia::{DiscPoint, Su11Element, C64};

fn err(e: folia::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn disc(z: C64) -> PyResult<DiscPoint> {
    DiscPoint::new(z).map_err(err)
}

fn word_from(pairs: Vec<(usize, i8)>) -> PyResult<Word> {
    Word::new(pairs.into_iter().map(|(g, e)| Letter::new(g, e)).collect()).map_err(err)
}

fn word_to(w: &Word) -> Vec<(usize, i8)> {
    w.letters()
        .iter()
        .map(|l| (l.generator, l.exponent))
        .collect()
}

fn matrix_from(rows: Vec<Vec<C64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix must be square and non-empty"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// An element of SU(1,1) acting on the unit disc.
#[pyclass(name = "Su11", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySu11(Su11Element);

#[pymethods]
impl PySu11 {
    #[new]
    fn new(alpha: C64, beta: C64) -> PyResult<Self> {
        Su11Element::new(alpha, beta).map(Self).map_err(err)
    }

    #[staticmethod]
    fn identity() -> Self {
        Self(Su11Element::identity())
    }

    #[staticmethod]
    fn rotation(theta: f64) -> Self {
        Self(Su11Element::rotation(theta))
    }

    #[staticmethod]
    fn translation(length: f64) -> Self {
        Self(Su11Element::translation(length))
    }

    #[getter]
    fn alpha(&self) -> C64 {
        self.0.alpha()
    }

    #[getter]
    fn beta(&self) -> C64 {
        self.0.beta()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn compose(&self, other: &PySu11) -> Self {
        Self(self.0.compose(&other.0))
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    fn apply(&self, z: C64) -> C64 {
        self.0.apply(z)
    }

    fn distance_mod_center(&self, other: &PySu11) -> f64 {
        self.0.distance_mod_center(&other.0)
    }

    fn __repr__(&self) -> String {
        format!("Su11(alpha={}, beta={})", self.0.alpha(), self.0.beta())
    }
}

/// A point `[z1, z2, t]` of the invariant cone.
#[pyclass(name = "ConePoint", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyConePoint(ConePoint);

#[pymethods]
impl PyConePoint {
    #[new]
    fn new(z1: C64, z2: C64, t: f64) -> PyResult<Self> {
        ConePoint::new(z1, z2, t).map(Self).map_err(err)
    }

    #[getter]
    fn z1(&self) -> C64 {
        self.0.z1()
    }

    #[getter]
    fn z2(&self) -> C64 {
        self.0.z2()
    }

    #[getter]
    fn t(&self) -> f64 {
        self.0.t()
    }

    fn cone_defect(&self) -> f64 {
        self.0.cone_defect()
    }

    /// Image under the linear action of `g`.
    fn act(&self, g: &PySu11) -> Self {
        Self(cone::cone_act(&g.0, &self.0))
    }

    /// The leafwise holomorphic function at `(z, self)`.
    fn f(&self, z: C64) -> PyResult<C64> {
        cone::f_eval(disc(z)?, &self.0).map_err(err)
    }
}

/// The regular-octagon lattice of genus 2.
#[pyclass(name = "Octagon", frozen)]
struct PyOctagon(FuchsianRepresentation);

#[pymethods]
impl PyOctagon {
    #[new]
    fn new() -> PyResult<Self> {
        fuchsian::genus2_octagon_representation()
            .map(Self)
            .map_err(err)
    }

    fn generators(&self) -> Vec<PySu11> {
        self.0.images().iter().cloned().map(PySu11).collect()
    }

    fn translation_length(&self) -> f64 {
        self.0.translation_length()
    }

    fn relator_residual(&self) -> f64 {
        self.0.relator_residual()
    }

    fn area(&self) -> f64 {
        self.0.area()
    }

    fn vertices(&self) -> Vec<C64> {
        self.0.vertices()
    }

    #[pyo3(signature = (z, tol = fuchsian::MEMBERSHIP_TOL))]
    fn contains(&self, z: C64, tol: f64) -> bool {
        self.0.contains(z, tol)
    }

    fn evaluate(&self, word: Vec<(usize, i8)>) -> PyResult<PySu11> {
        fuchsian::evaluate_word(&self.0, &word_from(word)?)
            .map(PySu11)
            .map_err(err)
    }

    /// Returns `(word, w)` with `w = word . z` in the fundamental domain.
    fn locate(&self, z: C64) -> PyResult<(Vec<(usize, i8)>, C64)> {
        let (w, p) = fuchsian::locate_in_domain(&self.0, disc(z)?).map_err(err)?;
        Ok((word_to(&w), p.z()))
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

/// Generators of a linear representation in GL(n).
#[pyclass(name = "LinearRep", frozen)]
struct PyLinearRep(LinearRep);

#[pymethods]
impl PyLinearRep {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        LinearRep::from_json(text).map(Self).map_err(err)
    }

    /// The lattice acting on CP^1 through its 2x2 matrices.
    #[staticmethod]
    fn octagon() -> PyResult<Self> {
        let rep = fuchsian::genus2_octagon_representation().map_err(err)?;
        LinearRep::from_su11(rep.images()).map(Self).map_err(err)
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// Classification report as JSON.
    #[pyo3(signature = (radius = 4, prox_tol = ClassifyParams::default().prox_tol,
                        comp_bound = ClassifyParams::default().comp_bound))]
    fn classify(&self, radius: usize, prox_tol: f64, comp_bound: f64) -> PyResult<String> {
        let pres =
            SurfaceGroupPresentation::opposite_sides(self.0.generators().len() / 2).map_err(err)?;
        let params = ClassifyParams {
            prox_tol,
            comp_bound,
        };
        let report = projdyn::classify_action(&self.0, &pres, radius, params).map_err(err)?;
        serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

#[pyfunction]
fn proximality_gap(rows: Vec<Vec<C64>>) -> PyResult<f64> {
    projdyn::proximality_gap(&matrix_from(rows)?).map_err(err)
}

#[pyfunction]
fn hyperbolic_distance(z: C64, w: C64) -> f64 {
    folia::moebius::hyperbolic_distance(z, w)
}

/// A holomorphic self-map of the disc, stored by its Taylor coefficients.
#[pyclass(name = "HoloFunction", frozen)]
struct PyHolo(HoloFunction);

#[pymethods]
impl PyHolo {
    #[staticmethod]
    #[pyo3(signature = (coefficients, degree = 64))]
    fn from_coefficients(coefficients: Vec<C64>, degree: usize) -> PyResult<Self> {
        HoloFunction::from_coefficients(coefficients, &HolConfig::with_degree(degree))
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (degree = 64))]
    fn identity(degree: usize) -> PyResult<Self> {
        HoloFunction::identity(&HolConfig::with_degree(degree))
            .map(Self)
            .map_err(err)
    }

    /// Fits `z -> f(z, p)` for a cone point `p`.
    #[staticmethod]
    #[pyo3(signature = (p, degree = 64))]
    fn from_cone(p: &PyConePoint, degree: usize) -> PyResult<Self> {
        let (a, b) = (p.0.z1(), p.0.z2());
        if cone::cone_function(C64::new(0.0, 0.0), a, b).is_err() {
            return Err(PyValueError::new_err("cone point gives a pole in the disc"));
        }
        let f = |z| cone::cone_function(z, a, b).unwrap_or(C64::new(f64::NAN, f64::NAN));
        HoloFunction::fit(f, &HolConfig::with_degree(degree))
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        HoloFunction::from_json(text, &HolConfig::default())
            .map(Self)
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn coefficients(&self) -> Vec<C64> {
        self.0.coefficients().to_vec()
    }

    fn certified_sup(&self) -> f64 {
        self.0.certified_sup()
    }

    fn __call__(&self, z: C64) -> C64 {
        self.0.eval(z)
    }

    /// `f o g^-1`.
    fn precompose(&self, g: &PySu11) -> PyResult<Self> {
        let cfg = HolConfig::with_degree(self.0.degree());
        holspace::precompose_action(&g.0, &self.0, &cfg)
            .map(Self)
            .map_err(err)
    }
}

/// Residual of the Laplacian identity for the cone function of `p` at `z`.
#[pyfunction]
#[pyo3(signature = (p, z, step = 1e-3))]
fn laplacian_identity_residual(p: &PyConePoint, z: C64, step: f64) -> PyResult<f64> {
    let q = p.0;
    let h =
        move |w: C64| cone::f_eval(DiscPoint::new(w).expect("grid stays in the disc"), &q).unwrap();
    kahler::identity_residual(&h, disc(z)?, &ConformalMetric::poincare(), step).map_err(err)
}

/// Runs one CLI experiment and returns its report as JSON. `config` is a
/// JSON document; `out` names a directory for the report and grid files.
#[pyfunction]
#[pyo3(signature = (command, config = None, out = None))]
fn run(command: &str, config: Option<&str>, out: Option<String>) -> PyResult<String> {
    let command = match command {
        "verify-cone" => Command::VerifyCone,
        "classify" => Command::Classify,
        "laplacian-check" => Command::LaplacianCheck,
        "universal-orbit" => Command::UniversalOrbit,
        "leaf-grid" => Command::LeafGrid,
        other => return Err(PyValueError::new_err(format!("unknown command `{other}`"))),
    };
    let config = match config {
        Some(text) => Config::from_json(text).map_err(err)?.0,
        None => Config::default(),
    };
    let opts = RunOptions {
        out: out.map(Into::into),
        timestamp: false,
    };
    cli::run(command, &config, &opts)
        .map(|r| r.to_json())
        .map_err(err)
}

#[pymodule]
fn pyfolia(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySu11>()?;
    m.add_class::<PyConePoint>()?;
    m.add_class::<PyOctagon>()?;
    m.add_class::<PyLinearRep>()?;
    m.add_class::<PyHolo>()?;
    m.add_function(wrap_pyfunction!(proximality_gap, m)?)?;
    m.add_function(wrap_pyfunction!(hyperbolic_distance, m)?)?;
    m.add_function(wrap_pyfunction!(laplacian_identity_residual, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
