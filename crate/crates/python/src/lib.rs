use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

use ::tsetlin_index as tm;
use tm::data::synthetic;
use tm::data::BinarizeSpec;
use tm::verify::{verify as run_verify, VerifyOptions};
use tm::{Backend, Error, Machine, TmConfig};

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::Integrity(_) => PyRuntimeError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse_backend(name: &str) -> PyResult<Backend> {
    name.parse().map_err(to_py)
}

/// Tsetlin machine with a selectable clause-evaluation backend.
#[pyclass(name = "TsetlinMachine", module = "tsetlin_index")]
struct PyMachine {
    inner: Machine,
}

#[pymethods]
impl PyMachine {
    #[new]
    #[pyo3(signature = (classes, clauses, features, backend = "indexed", T = 15, s = 3.9, seed = 0, half_range = 100, boost_true_positive = false))]
    #[allow(non_snake_case, clippy::too_many_arguments)]
    fn new(
        classes: usize,
        clauses: usize,
        features: usize,
        backend: &str,
        T: u32,
        s: f64,
        seed: u64,
        half_range: u8,
        boost_true_positive: bool,
    ) -> PyResult<Self> {
        let config = TmConfig {
            classes,
            clauses,
            features,
            half_range,
            threshold: T,
            specificity: s,
            seed,
            boost_true_positive,
        };
        Ok(Self {
            inner: Machine::new(config, parse_backend(backend)?).map_err(to_py)?,
        })
    }

    /// Loads a model file; the index is rebuilt when `backend` is "indexed".
    #[staticmethod]
    #[pyo3(signature = (path, backend = "indexed", T = 15, s = 3.9, seed = 0))]
    #[allow(non_snake_case)]
    fn load(path: &str, backend: &str, T: u32, s: f64, seed: u64) -> PyResult<Self> {
        let (bank, _) = tm::persist::load_model(path).map_err(to_py)?;
        let mut config = TmConfig::new(bank.classes(), bank.clauses(), bank.features());
        config.half_range = bank.half_range();
        config.threshold = T;
        config.specificity = s;
        config.seed = seed;
        Ok(Self {
            inner: Machine::from_bank(config, bank, parse_backend(backend)?).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        tm::persist::save_model(self.inner.bank(), path).map_err(to_py)
    }

    #[getter]
    fn backend(&self) -> &'static str {
        self.inner.backend().name()
    }

    #[getter]
    fn classes(&self) -> usize {
        self.inner.bank().classes()
    }

    #[getter]
    fn clauses(&self) -> usize {
        self.inner.bank().clauses()
    }

    #[getter]
    fn features(&self) -> usize {
        self.inner.bank().features()
    }

    /// One update; returns the (class, clause, literal, included) flips.
    fn train_step(&mut self, x: Vec<u8>, y: usize) -> PyResult<Vec<(usize, usize, usize, bool)>> {
        let flips = self.inner.train_step(&x, y).map_err(to_py)?;
        Ok(flips
            .into_iter()
            .map(|f| {
                (
                    f.class,
                    f.clause,
                    f.literal,
                    f.direction == tm::FlipDirection::Included,
                )
            })
            .collect())
    }

    #[pyo3(signature = (X, y, epochs = 1))]
    #[allow(non_snake_case)]
    fn fit(
        &mut self,
        py: Python<'_>,
        X: Vec<Vec<u8>>,
        y: Vec<usize>,
        epochs: usize,
    ) -> PyResult<()> {
        if X.len() != y.len() {
            return Err(PyValueError::new_err(format!(
                "{} rows but {} labels",
                X.len(),
                y.len()
            )));
        }
        let inner = &mut self.inner;
        py.detach(|| {
            for _ in 0..epochs {
                for (x, &label) in X.iter().zip(&y) {
                    inner.train_step(x, label)?;
                }
            }
            Ok(())
        })
        .map_err(to_py)
    }

    fn class_scores(&mut self, x: Vec<u8>) -> PyResult<Vec<i32>> {
        self.inner.class_scores(&x).map_err(to_py)
    }

    fn predict(&mut self, x: Vec<u8>) -> PyResult<usize> {
        self.inner.predict(&x).map_err(to_py)
    }

    #[allow(non_snake_case)]
    fn predict_batch(&mut self, py: Python<'_>, X: Vec<Vec<u8>>) -> PyResult<Vec<usize>> {
        let inner = &mut self.inner;
        py.detach(|| {
            X.iter()
                .map(|x| inner.predict(x))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(to_py)
    }

    /// Clause ids of `class` that include `literal` (indexed backend only).
    fn inclusion_list(&self, class: usize, literal: usize) -> PyResult<Vec<u16>> {
        let idx = self
            .inner
            .index()
            .ok_or_else(|| PyValueError::new_err("machine has no index (direct backend)"))?;
        if class >= idx.classes() || literal >= idx.literals() {
            return Err(PyValueError::new_err("class or literal out of range"));
        }
        Ok(idx.list(class, literal).to_vec())
    }

    fn includes(&self, class: usize, clause: usize, literal: usize) -> PyResult<bool> {
        let b = self.inner.bank();
        if class >= b.classes() || clause >= b.clauses() || literal >= b.literals() {
            return Err(PyValueError::new_err("coordinates out of range"));
        }
        Ok(b.includes(class, clause, literal))
    }

    /// Raw automaton states, row-major by (class, clause, literal).
    fn states<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        PyBytes::new(py, self.inner.bank().states())
    }

    /// Raises RuntimeError if the maintained index disagrees with the bank.
    fn check_index(&self) -> PyResult<()> {
        if let Some(idx) = self.inner.index() {
            idx.check_coherence().map_err(to_py)?;
            idx.check_against(self.inner.bank()).map_err(to_py)?;
        }
        Ok(())
    }

    #[getter]
    fn literal_visits(&self) -> u64 {
        self.inner.counters().literal_visits
    }

    fn reset_counters(&mut self) {
        self.inner.reset_counters();
    }

    fn __repr__(&self) -> String {
        let b = self.inner.bank();
        format!(
            "TsetlinMachine(classes={}, clauses={}, features={}, backend={:?})",
            b.classes(),
            b.clauses(),
            b.features(),
            self.inner.backend().name()
        )
    }
}

/// (tm_bytes, index_bytes, total) for m classes, n clauses, o features.
#[pyfunction]
fn estimate_memory(m: u64, n: u64, o: u64) -> PyResult<(u64, u64, u64)> {
    let e = tm::estimate_memory(m, n, o).map_err(to_py)?;
    Ok((e.tm_bytes, e.index_bytes, e.total))
}

#[pyfunction]
fn even_thresholds(bits: usize) -> PyResult<Vec<u32>> {
    let spec = BinarizeSpec::even(bits).map_err(to_py)?;
    Ok(spec.thresholds().iter().map(|&t| t.into()).collect())
}

// Rows go back as lists of ints; a Vec<u8> would surface as `bytes`.
fn rows(ds: &tm::BoolDataset) -> Vec<Vec<u32>> {
    (0..ds.len())
        .map(|i| ds.row(i).into_iter().map(u32::from).collect())
        .collect()
}

/// Thermometer-encodes images; returns one 0/1 row per image.
#[pyfunction]
#[pyo3(signature = (pixels, pixels_per_image, bits = 1))]
fn binarize(pixels: Vec<u8>, pixels_per_image: usize, bits: usize) -> PyResult<Vec<Vec<u32>>> {
    if pixels_per_image == 0 || !pixels.len().is_multiple_of(pixels_per_image) {
        return Err(PyValueError::new_err(
            "pixel count is not a whole number of images",
        ));
    }
    let spec = BinarizeSpec::even(bits).map_err(to_py)?;
    let labels = vec![0u8; pixels.len() / pixels_per_image];
    let ds = tm::data::binarize_images(&pixels, pixels_per_image, &labels, 1, &spec, "python")
        .map_err(to_py)?;
    Ok(rows(&ds))
}

/// Noisy XOR dataset as (rows, labels).
#[pyfunction]
#[pyo3(signature = (examples, features = 12, noise = 0.1, seed = 0))]
fn noisy_xor(
    examples: usize,
    features: usize,
    noise: f64,
    seed: u64,
) -> PyResult<(Vec<Vec<u32>>, Vec<usize>)> {
    let ds = synthetic::noisy_xor(examples, features, noise, seed).map_err(to_py)?;
    Ok((rows(&ds), ds.labels().collect()))
}

/// Runs the equivalence and maintenance self-checks; returns (passed, summary).
#[pyfunction]
#[pyo3(signature = (seed = 0, instances = 50))]
fn verify(seed: u64, instances: usize) -> PyResult<(bool, String)> {
    let report = run_verify(&VerifyOptions {
        seed,
        equivalence_instances: instances,
        training_instances: instances.div_ceil(10).max(1),
        ..VerifyOptions::default()
    })
    .map_err(to_py)?;
    Ok((report.passed(), report.summary()))
}

#[pymodule]
fn tsetlin_index(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMachine>()?;
    m.add_function(wrap_pyfunction!(estimate_memory, m)?)?;
    m.add_function(wrap_pyfunction!(even_thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(binarize, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_xor, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
