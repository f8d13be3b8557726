//! Python bindings. Observables cross the boundary as opaque handles that
//! round-trip through the same JSON format as the command line tool.

use noisecontent::channels;
use noisecontent::compat::{self, CompatibilityVerdict, JointObservable};
use noisecontent::linalg::{ComplexMatrix, HermitianMatrix, C64};
use noisecontent::noise::{self, NoiseDecomposition};
use noisecontent::processes;
use noisecontent::quantum::{self, Basis};
use noisecontent::theory::validate_observable_tol;
use noisecontent::{polytope_effect_from_vertex_values, Effect, Polytope, StateSpace};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: noisecontent::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_err(e: serde_json::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn hermitian(rows: Vec<Vec<C64>>) -> PyResult<HermitianMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("effect matrices must be square"));
    }
    let m = ComplexMatrix::new(n, n, rows.into_iter().flatten().collect()).map_err(err)?;
    HermitianMatrix::new(m).map_err(err)
}

fn to_rows(h: &HermitianMatrix) -> Vec<Vec<C64>> {
    let m = h.as_matrix();
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

#[pyclass(frozen, skip_from_py_object, module = "noisecontent")]
#[derive(Clone)]
pub struct Observable {
    inner: noisecontent::Observable,
}

impl From<noisecontent::Observable> for Observable {
    fn from(inner: noisecontent::Observable) -> Self {
        Observable { inner }
    }
}

fn unwrap_all(obs: &[PyRef<'_, Observable>]) -> Vec<noisecontent::Observable> {
    obs.iter().map(|a| a.inner.clone()).collect()
}

#[pymethods]
impl Observable {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str::<noisecontent::Observable>(text)
            .map(Observable::from)
            .map_err(json_err)
    }

    /// Quantum POVM from a list of square complex matrices.
    #[staticmethod]
    fn quantum(effects: Vec<Vec<Vec<C64>>>) -> PyResult<Self> {
        let ops = effects
            .into_iter()
            .map(hermitian)
            .collect::<PyResult<Vec<_>>>()?;
        let dim = ops.first().map_or(0, HermitianMatrix::dim);
        let space = StateSpace::quantum(dim).map_err(err)?;
        let effects = ops.into_iter().map(|op| Effect::Quantum { op }).collect();
        noisecontent::Observable::from_effects(space, effects)
            .map(Observable::from)
            .map_err(err)
    }

    /// Observable on the convex hull of `vertices`, each effect given by its
    /// values at the vertices.
    #[staticmethod]
    fn polytope(vertices: Vec<Vec<f64>>, vertex_values: Vec<Vec<f64>>) -> PyResult<Self> {
        let dim = vertices.first().map_or(0, Vec::len);
        let space = StateSpace::Polytope(Polytope::new(dim, vertices).map_err(err)?);
        let effects = vertex_values
            .iter()
            .map(|v| polytope_effect_from_vertex_values(&space, v))
            .collect::<noisecontent::Result<Vec<_>>>()
            .map_err(err)?;
        noisecontent::Observable::from_effects(space, effects)
            .map(Observable::from)
            .map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.space().kind_name()
    }

    #[getter]
    fn outcomes(&self) -> Vec<u64> {
        self.inner.outcomes().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Operator of the `i`-th effect; `None` on polytope spaces.
    fn effect_matrix(&self, i: usize) -> PyResult<Option<Vec<Vec<C64>>>> {
        let e = self
            .inner
            .effects()
            .get(i)
            .ok_or_else(|| PyValueError::new_err(format!("no effect at index {i}")))?;
        Ok(e.operator().map(to_rows))
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn is_valid(&self, tol: f64) -> bool {
        validate_observable_tol(&self.inner, tol).is_valid()
    }

    /// Validation report as JSON.
    #[pyo3(signature = (tol = 1e-9))]
    fn validate(&self, tol: f64) -> PyResult<String> {
        serde_json::to_string(&validate_observable_tol(&self.inner, tol)).map_err(json_err)
    }

    fn max_effect_distance(&self, other: &Observable) -> PyResult<f64> {
        self.inner.max_effect_distance(&other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Observable(kind={:?}, outcomes={})",
            self.kind(),
            self.inner.len()
        )
    }
}

#[pyclass(frozen, module = "noisecontent")]
pub struct Decomposition {
    inner: NoiseDecomposition,
}

#[pymethods]
impl Decomposition {
    #[getter]
    fn t(&self) -> f64 {
        self.inner.t
    }

    /// `"exact"` or `"lower_bound"`.
    #[getter]
    fn certification(&self) -> PyResult<String> {
        serde_json::to_value(self.inner.certification)
            .map(|v| v.as_str().unwrap_or_default().to_owned())
            .map_err(json_err)
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.trivial.probs().to_vec()
    }

    #[getter]
    fn trivial(&self) -> Observable {
        self.inner.trivial_embedding.clone().into()
    }

    #[getter]
    fn residual(&self) -> Observable {
        self.inner.residual.clone().into()
    }

    fn reconstruct(&self) -> PyResult<Observable> {
        self.inner.reconstruct().map(Observable::from).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!("Decomposition(t={})", self.inner.t)
    }
}

#[pyclass(frozen, module = "noisecontent")]
pub struct Verdict {
    inner: CompatibilityVerdict,
}

fn witness(v: &CompatibilityVerdict) -> PyResult<&JointObservable> {
    v.witness
        .as_ref()
        .ok_or_else(|| PyValueError::new_err("verdict carries no joint observable"))
}

#[pymethods]
impl Verdict {
    /// `"CompatibleCertified"`, `"IncompatibleCertified"` or `"Undecided"`.
    #[getter]
    fn status(&self) -> PyResult<String> {
        serde_json::to_value(self.inner.status)
            .map(|v| v.as_str().unwrap_or_default().to_owned())
            .map_err(json_err)
    }

    #[getter]
    fn inequality_value(&self) -> f64 {
        self.inner.inequality_value
    }

    #[getter]
    fn has_witness(&self) -> bool {
        self.inner.witness.is_some()
    }

    #[getter]
    fn certificate(&self) -> Option<Vec<f64>> {
        self.inner.certificate.clone()
    }

    /// `j`-th marginal of the joint observable, counting from 0.
    fn marginal(&self, j: usize) -> PyResult<Observable> {
        compat::marginal(witness(&self.inner)?, j)
            .map(Observable::from)
            .map_err(err)
    }

    #[pyo3(signature = (observables, tol = 1e-9))]
    fn is_joint_of(&self, observables: Vec<PyRef<'_, Observable>>, tol: f64) -> PyResult<bool> {
        compat::is_joint_of(witness(&self.inner)?, &unwrap_all(&observables), tol).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(json_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Verdict(status={:?}, inequality_value={})",
            self.status().unwrap_or_default(),
            self.inner.inequality_value
        )
    }
}

/// Noise content with its decomposition. Exactly trivial process POVMs are
/// recognized; otherwise processes get the eigenvalue lower bound.
#[pyfunction]
fn noise_content(a: &Observable) -> PyResult<Decomposition> {
    noise::best_noise_decomposition(&a.inner)
        .map(|inner| Decomposition { inner })
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (observables, weights = None))]
fn sufficient_compatible(
    observables: Vec<PyRef<'_, Observable>>,
    weights: Option<Vec<f64>>,
) -> PyResult<Verdict> {
    compat::sufficient_compatible_with(&unwrap_all(&observables), weights.as_deref())
        .map(|inner| Verdict { inner })
        .map_err(err)
}

#[pyfunction]
fn lp_compatible(observables: Vec<PyRef<'_, Observable>>) -> PyResult<Verdict> {
    compat::lp_compatible_polytope(&unwrap_all(&observables))
        .map(|inner| Verdict { inner })
        .map_err(err)
}

#[pyfunction]
fn mix(a: &Observable, b: &Observable, t: f64) -> PyResult<Observable> {
    noisecontent::mix(&a.inner, &b.inner, t)
        .map(Observable::from)
        .map_err(err)
}

#[pyfunction]
fn reverse(a: &Observable) -> PyResult<Observable> {
    channels::reverse(&a.inner)
        .map(Observable::from)
        .map_err(err)
}

#[pyfunction]
fn doubly_reverse(a: &Observable) -> PyResult<Observable> {
    channels::doubly_reverse(&a.inner)
        .map(Observable::from)
        .map_err(err)
}

#[pyfunction]
fn doubly_reverse_lambda(n: usize) -> f64 {
    channels::doubly_reverse_lambda(n)
}

#[pyfunction]
fn reversed_threshold(d: usize, m: usize) -> usize {
    quantum::reversed_threshold(d, m)
}

#[pyfunction]
fn squit_pair(alpha: f64, beta: f64) -> PyResult<(Observable, Observable)> {
    let (a, b) = compat::squit_pair(alpha, beta).map_err(err)?;
    Ok((a.into(), b.into()))
}

#[pyfunction]
fn fourier_mub_pair(d: usize) -> PyResult<(Observable, Observable)> {
    let (a, b) = quantum::fourier_mub_pair(d).map_err(err)?;
    Ok((a.into(), b.into()))
}

/// Sharp POVM in a Haar-random basis.
#[pyfunction]
fn haar_sharp_povm(d: usize, seed: u64) -> Observable {
    quantum::sharp_povm(&Basis::haar_random(d, seed)).into()
}

/// Regular rank-1 POVM with `n` outcomes built from the harmonic frame.
#[pyfunction]
fn regular_rank1_povm(d: usize, n: usize) -> PyResult<Observable> {
    quantum::RegularRank1Povm::harmonic(d, n, None)
        .map(|a| a.observable().clone().into())
        .map_err(err)
}

#[pyfunction]
fn random_povm(d: usize, n: usize, seed: u64) -> PyResult<Observable> {
    quantum::random_povm(d, n, seed)
        .map(Observable::from)
        .map_err(err)
}

/// Trivial process POVM `A_x = p_x |x⟩⟨x| ⊗ 𝟙` in the computational basis.
#[pyfunction]
fn orthogonal_trivial_ppovm(probs: Vec<f64>, dim_a: usize, dim_b: usize) -> PyResult<Observable> {
    processes::orthogonal_trivial_ppovm(&probs, &Basis::computational(dim_a), dim_b)
        .map(|a| a.into_observable().into())
        .map_err(err)
}

#[pymodule]
#[pyo3(name = "noisecontent")]
fn noisecontent_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Observable>()?;
    m.add_class::<Decomposition>()?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(noise_content, m)?)?;
    m.add_function(wrap_pyfunction!(sufficient_compatible, m)?)?;
    m.add_function(wrap_pyfunction!(lp_compatible, m)?)?;
    m.add_function(wrap_pyfunction!(mix, m)?)?;
    m.add_function(wrap_pyfunction!(reverse, m)?)?;
    m.add_function(wrap_pyfunction!(doubly_reverse, m)?)?;
    m.add_function(wrap_pyfunction!(doubly_reverse_lambda, m)?)?;
    m.add_function(wrap_pyfunction!(reversed_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(squit_pair, m)?)?;
    m.add_function(wrap_pyfunction!(fourier_mub_pair, m)?)?;
    m.add_function(wrap_pyfunction!(haar_sharp_povm, m)?)?;
    m.add_function(wrap_pyfunction!(regular_rank1_povm, m)?)?;
    m.add_function(wrap_pyfunction!(random_povm, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonal_trivial_ppovm, m)?)?;
    Ok(())
}
