//! Python bindings for the sampling core.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyIOError, PyValueError};
use pyo3::prelude::*;

use qsampling_core::density::{PullbackDensity as CorePullback, TargetDensity};
use qsampling_core::error::Error;
use qsampling_core::hmc::{run_chains, HmcConfig};
use qsampling_core::povm::{audit_probabilities, born_probabilities, Povm as CorePovm, CATALOG};
use qsampling_core::rng::{chain_rng, RESAMPLE_STREAM};
use qsampling_core::sample_set::SampleSet as CoreSet;
use qsampling_core::state::{DensityMatrix, StateParams};
use qsampling_core::{diagnostics, ginibre, io, recipes, weights};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } | Error::WouldOverwrite(_) => PyIOError::new_err(e.to_string()),
        e if e.is_numerical() => PyArithmeticError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

type Matrix = Vec<Vec<Complex64>>;

fn matrix_rows(rho: &DensityMatrix) -> Matrix {
    let m = rho.matrix();
    (0..m.nrows())
        .map(|j| (0..m.ncols()).map(|k| m[(j, k)]).collect())
        .collect()
}

fn density_from_rows(rows: Matrix) -> PyResult<DensityMatrix> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("state must be a square matrix"));
    }
    let m = qsampling_core::linalg::ComplexMatrix::from_fn(d, d, |j, k| rows[j][k]);
    DensityMatrix::new(m).map_err(to_py)
}

/// A POVM from the built-in catalog.
#[pyclass(frozen)]
struct Povm {
    inner: CorePovm,
}

#[pymethods]
impl Povm {
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        Ok(Self {
            inner: CorePovm::by_name(name).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn indep_dim(&self) -> usize {
        self.inner.indep_dim()
    }

    #[getter]
    fn is_ic(&self) -> bool {
        self.inner.is_ic()
    }

    fn completeness_residual(&self) -> f64 {
        self.inner.completeness_residual()
    }

    fn outcomes(&self) -> Vec<Matrix> {
        self.inner
            .outcomes()
            .iter()
            .map(|o| {
                (0..o.nrows())
                    .map(|j| (0..o.ncols()).map(|k| o[(j, k)]).collect())
                    .collect()
            })
            .collect()
    }

    /// Born probabilities of a state given as nested lists of complex numbers.
    fn probabilities(&self, rho: Matrix) -> PyResult<Vec<f64>> {
        let rho = density_from_rows(rho)?;
        Ok(born_probabilities(&self.inner, &rho)
            .map_err(to_py)?
            .to_vec())
    }

    /// Constraint violations of a probability vector as (label, magnitude) pairs.
    fn audit(&self, p: Vec<f64>) -> PyResult<Vec<(String, f64)>> {
        let r = audit_probabilities(&self.inner, &p).map_err(to_py)?;
        Ok(r.violations
            .into_iter()
            .map(|v| (v.label, v.magnitude))
            .collect())
    }

    fn __repr__(&self) -> String {
        format!("Povm('{}')", self.inner.name())
    }
}

/// States with purity, optional weights and metadata.
#[pyclass(frozen)]
struct SampleSet {
    inner: CoreSet,
}

#[pymethods]
impl SampleSet {
    #[staticmethod]
    fn read(base: &str) -> PyResult<Self> {
        Ok(Self {
            inner: io::read_set(base).map_err(to_py)?,
        })
    }

    #[pyo3(signature = (base, force=false))]
    fn write(&self, base: &str, force: bool) -> PyResult<()> {
        io::write_set(&self.inner, base, force)
            .map_err(to_py)
            .map(|_| ())
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn states(&self) -> Vec<Matrix> {
        self.inner.states().iter().map(matrix_rows).collect()
    }

    fn purity(&self) -> Vec<f64> {
        self.inner.purity().to_vec()
    }

    fn weights(&self) -> Option<Vec<f64>> {
        self.inner.weights().map(<[f64]>::to_vec)
    }

    /// Metadata as a JSON string.
    fn meta_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.meta).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Mean and unbiased variance of the purity.
    fn purity_stats(&self) -> PyResult<(f64, f64)> {
        let s = diagnostics::purity_stats(&self.inner, diagnostics::DEFAULT_HIST_BINS)
            .map_err(to_py)?;
        Ok((s.mean, s.variance))
    }

    /// (violations, worst magnitude) of every state under `povm`.
    fn audit(&self, povm: &Povm) -> PyResult<(usize, f64)> {
        let s = diagnostics::audit_set(&self.inner, &povm.inner).map_err(to_py)?;
        Ok((s.violations, s.worst))
    }

    fn __repr__(&self) -> String {
        format!("SampleSet(d={}, n={})", self.inner.d(), self.inner.len())
    }
}

/// Log target density pulled back to the state chart.
#[pyclass(frozen)]
struct PullbackDensity {
    inner: CorePullback,
}

#[pymethods]
impl PullbackDensity {
    #[new]
    #[pyo3(signature = (povm, prior, beta=None))]
    fn new(povm: &Povm, prior: &str, beta: Option<Vec<f64>>) -> PyResult<Self> {
        let t = TargetDensity::parse(prior, beta, povm.inner.len()).map_err(to_py)?;
        Ok(Self {
            inner: CorePullback::new(povm.inner.clone(), t).map_err(to_py)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn mode(&self) -> String {
        self.inner.mode().to_string()
    }

    /// `x` holds the angles followed by the phases.
    fn log_density(&self, x: Vec<f64>) -> PyResult<f64> {
        let p = StateParams::from_flat(self.inner.d(), &x).map_err(to_py)?;
        self.inner.log_pullback(&p).map_err(to_py)
    }

    fn grad_log_density(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let p = StateParams::from_flat(self.inner.d(), &x).map_err(to_py)?;
        self.inner.grad_log_pullback(&p).map_err(to_py)
    }
}

#[pyfunction]
fn catalog() -> Vec<&'static str> {
    CATALOG.to_vec()
}

#[pyfunction]
fn ginibre_sampleset(d: usize, n: usize, seed: u64) -> PyResult<SampleSet> {
    Ok(SampleSet {
        inner: ginibre::ginibre_sampleset(d, n, seed).map_err(to_py)?,
    })
}

/// Runs HMC for `povm` and `prior`; parameters default to the reference script.
#[pyfunction]
#[pyo3(signature = (povm, prior, numstep, seed, beta=None, pvar=1.0, qvar=0.1, nint=10, burn_in=1000, thin=1, chains=1))]
#[allow(clippy::too_many_arguments)]
fn sample(
    povm: &Povm,
    prior: &str,
    numstep: usize,
    seed: u64,
    beta: Option<Vec<f64>>,
    pvar: f64,
    qvar: f64,
    nint: usize,
    burn_in: usize,
    thin: usize,
    chains: usize,
) -> PyResult<SampleSet> {
    let t = TargetDensity::parse(prior, beta, povm.inner.len()).map_err(to_py)?;
    let pd = CorePullback::new(povm.inner.clone(), t).map_err(to_py)?;
    let cfg = HmcConfig {
        numstep,
        pvar,
        qvar,
        nint,
        burn_in,
        thin,
        seed,
    };
    Ok(SampleSet {
        inner: run_chains(&cfg, &pd, None, chains).map_err(to_py)?,
    })
}

/// Fiber volumes of every state under a NIC POVM.
#[pyfunction]
fn fiber_weights(povm: &Povm, set: &SampleSet, seed: u64) -> PyResult<Vec<f64>> {
    weights::fiber_weights(
        &povm.inner,
        &set.inner,
        &weights::FiberSettings::default(),
        seed,
    )
    .map_err(to_py)
}

/// Systematic resampling with importance weights `1/range`.
#[pyfunction]
fn resample(set: &SampleSet, range: Vec<f64>, n: usize, seed: u64) -> PyResult<SampleSet> {
    let ws = weights::WeightedSampleSet::from_range(set.inner.clone().without_weights(), &range)
        .map_err(to_py)?;
    let mut rng = chain_rng(seed, RESAMPLE_STREAM);
    Ok(SampleSet {
        inner: weights::resample(&ws, n, &mut rng).map_err(to_py)?,
    })
}

/// Two-sample KS statistic and whether it is below `threshold`.
#[pyfunction]
#[pyo3(signature = (a, b, threshold=0.02))]
fn ks_two_sample(a: Vec<f64>, b: Vec<f64>, threshold: f64) -> PyResult<(f64, bool)> {
    let r = diagnostics::ks_two_sample(&a, &b, threshold).map_err(to_py)?;
    Ok((r.statistic, r.pass))
}

/// Generates a published family; returns the set and, for NIC families, its
/// resampled companion.
#[pyfunction]
fn reproduce(family: &str, n: usize, seed: u64) -> PyResult<(SampleSet, Option<SampleSet>)> {
    let fam = recipes::family(family).map_err(to_py)?;
    let r = recipes::reproduce(fam, &recipes::ReproduceOptions::new(n, seed)).map_err(to_py)?;
    Ok((
        SampleSet { inner: r.set },
        r.resampled.map(|inner| SampleSet { inner }),
    ))
}

#[pyfunction]
fn families() -> Vec<&'static str> {
    recipes::FAMILIES.iter().map(|f| f.name).collect()
}

#[pymodule]
fn qsampling(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Povm>()?;
    m.add_class::<SampleSet>()?;
    m.add_class::<PullbackDensity>()?;
    m.add_function(wrap_pyfunction!(catalog, m)?)?;
    m.add_function(wrap_pyfunction!(families, m)?)?;
    m.add_function(wrap_pyfunction!(ginibre_sampleset, m)?)?;
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(fiber_weights, m)?)?;
    m.add_function(wrap_pyfunction!(resample, m)?)?;
    m.add_function(wrap_pyfunction!(ks_two_sample, m)?)?;
    m.add_function(wrap_pyfunction!(reproduce, m)?)?;
    Ok(())
}
