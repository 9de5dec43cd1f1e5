//! Python bindings: datasets, sampling patterns, reconstructors and the
//! optimizers, with plain Python values at the boundary.

use std::path::PathBuf;

use bass_core::data::{
    generate_phantom_dataset, read_dataset, read_mask, write_dataset, write_mask, PhantomConfig,
};
use bass_core::objective::{efficacy as core_efficacy, evaluate as core_evaluate, Criterion};
use bass_core::optimize::{
    bass_run as core_bass_run, greedy_forward as core_greedy, poss_run as core_poss, BassConfig,
    GreedyConfig, Objective, PossConfig, TraceRow,
};
use bass_core::recon::{
    build_reconstructor, CoilSensitivities, ReconConfig, ReconMethod,
    Reconstructor as CoreReconstructor,
};
use bass_core::sampling::{generate, CalibrationRegion, GeneratorConfig, GeneratorKind};
use bass_core::{Dataset as CoreDataset, KSpaceGrid, SamplingPattern as CorePattern, C64};
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(bass_mri, BassError, PyValueError);

fn err(e: bass_core::Error) -> PyErr {
    BassError::new_err(e.to_string())
}

/// Parses a kebab-case enum name such as `"cs-sfd"`.
fn parse_name<T: serde::de::DeserializeOwned>(what: &str, name: &str) -> PyResult<T> {
    serde_json::from_value(serde_json::Value::String(name.to_owned()))
        .map_err(|_| BassError::new_err(format!("unknown {what} `{name}`")))
}

#[pyclass(frozen, skip_from_py_object, module = "bass_mri")]
#[derive(Clone)]
pub struct Dataset {
    inner: CoreDataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: read_dataset(path).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_dataset(path, &self.inner, serde_json::Value::Null).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(nx, ny, nt, nc)`.
    #[getter]
    fn grid(&self) -> (usize, usize, usize, usize) {
        let g = self.inner.grid();
        (g.nx, g.ny, g.nt, g.nc)
    }

    /// First `n_train` items and the rest.
    fn split(&self, n_train: usize) -> PyResult<(Dataset, Dataset)> {
        let (a, b) = self.inner.split(n_train).map_err(err)?;
        Ok((Dataset { inner: a }, Dataset { inner: b }))
    }

    /// Item `i` as one list of complex samples per coil.
    fn kspace(&self, i: usize) -> PyResult<Vec<Vec<C64>>> {
        let item = self
            .inner
            .items()
            .get(i)
            .ok_or_else(|| BassError::new_err(format!("item {i} out of range")))?;
        Ok((0..item.grid().nc).map(|c| item.coil(c).to_vec()).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} items on {})",
            self.inner.len(),
            self.inner.grid()
        )
    }
}

#[pyclass(frozen, skip_from_py_object, module = "bass_mri")]
#[derive(Clone)]
pub struct Sensitivities {
    inner: CoilSensitivities,
}

#[pymethods]
impl Sensitivities {
    #[staticmethod]
    fn uniform(nx: usize, ny: usize, nc: usize) -> Self {
        Self {
            inner: CoilSensitivities::uniform(nx, ny, nc),
        }
    }

    /// `(nx, ny, nc)`.
    #[getter]
    fn dims(&self) -> (usize, usize, usize) {
        self.inner.dims()
    }
}

#[pyclass(frozen, skip_from_py_object, module = "bass_mri")]
#[derive(Clone)]
pub struct SamplingPattern {
    inner: CorePattern,
}

#[pymethods]
impl SamplingPattern {
    #[new]
    #[pyo3(signature = (nx, ny, members, locked = Vec::new(), nt = 1))]
    fn new(
        nx: usize,
        ny: usize,
        members: Vec<usize>,
        locked: Vec<usize>,
        nt: usize,
    ) -> PyResult<Self> {
        let grid = KSpaceGrid::new(nx, ny, nt, 1).map_err(err)?;
        Ok(Self {
            inner: CorePattern::new(grid, members, locked).map_err(err)?,
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: read_mask(path).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        write_mask(path, &self.inner).map_err(err)
    }

    #[getter]
    fn members(&self) -> Vec<usize> {
        self.inner.members().to_vec()
    }

    #[getter]
    fn locked(&self) -> Vec<usize> {
        self.inner.locked().to_vec()
    }

    fn frame_counts(&self) -> Vec<usize> {
        self.inner.frame_counts()
    }

    /// Grid points over sampled points.
    #[getter]
    fn acceleration(&self) -> f64 {
        self.inner.grid().n_points() as f64 / self.inner.len().max(1) as f64
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __contains__(&self, k: usize) -> bool {
        k < self.inner.grid().n_points() && self.inner.contains(k)
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid();
        format!(
            "SamplingPattern({} of {} points on {}x{}x{})",
            self.inner.len(),
            g.n_points(),
            g.nx,
            g.ny,
            g.nt
        )
    }
}

#[pyclass(frozen, module = "bass_mri")]
pub struct Reconstructor {
    inner: Box<dyn CoreReconstructor>,
}

#[pymethods]
impl Reconstructor {
    /// `method` is one of `zero-fill`, `cs-sfd` or `cs-lr`.
    #[new]
    #[pyo3(signature = (method, sensitivities, nt = 1, lam = 1e-3, iterations = 30))]
    fn new(
        method: &str,
        sensitivities: &Sensitivities,
        nt: usize,
        lam: f64,
        iterations: usize,
    ) -> PyResult<Self> {
        let method: ReconMethod = parse_name("reconstruction method", method)?;
        let (nx, ny, nc) = sensitivities.inner.dims();
        let grid = KSpaceGrid::new(nx, ny, nt, nc).map_err(err)?;
        let config = ReconConfig::new(method)
            .with_lambda(lam)
            .with_iterations(iterations);
        Ok(Self {
            inner: build_reconstructor(&config, &sensitivities.inner, &grid).map_err(err)?,
        })
    }

    /// Reconstructions performed so far.
    #[getter]
    fn calls(&self) -> u64 {
        self.inner.calls()
    }
}

/// Synthetic multi-coil phantom data set and its coil sensitivities.
#[pyfunction]
#[pyo3(signature = (nx, ny, nt = 1, nc = 1, items = 10, seed = 0, noise = 0.0))]
fn phantom(
    nx: usize,
    ny: usize,
    nt: usize,
    nc: usize,
    items: usize,
    seed: u64,
    noise: f64,
) -> PyResult<(Dataset, Sensitivities)> {
    let mut config = PhantomConfig::new(nx, ny, nt, nc, items).with_seed(seed);
    config.noise_sigma = noise;
    let ph = generate_phantom_dataset(&config).map_err(err)?;
    Ok((
        Dataset { inner: ph.dataset },
        Sensitivities {
            inner: ph.sensitivities,
        },
    ))
}

/// Baseline pattern: `variable-density`, `poisson-disk`, `center-only` or
/// `uniform-random`, with a locked central calibration block.
#[pyfunction]
#[pyo3(signature = (nx, ny, kind, target, seed = 0, calibration = (4, 4), nt = 1))]
fn generate_pattern(
    nx: usize,
    ny: usize,
    kind: &str,
    target: usize,
    seed: u64,
    calibration: (usize, usize),
    nt: usize,
) -> PyResult<SamplingPattern> {
    let kind: GeneratorKind = parse_name("generator", kind)?;
    let grid = KSpaceGrid::new(nx, ny, nt, 1).map_err(err)?;
    let config = GeneratorConfig::new(kind, target)
        .with_seed(seed)
        .with_calibration(CalibrationRegion::new(calibration.0, calibration.1));
    Ok(SamplingPattern {
        inner: generate(&config, &grid).map_err(err)?,
    })
}

/// Mean normalised k-space error over the data set and the per-item values.
#[pyfunction]
fn efficacy(
    pattern: &SamplingPattern,
    dataset: &Dataset,
    recon: &Reconstructor,
) -> PyResult<(f64, Vec<f64>)> {
    let eff = core_efficacy(&pattern.inner, &dataset.inner, recon.inner.as_ref()).map_err(err)?;
    Ok((eff.value, eff.per_item))
}

/// All quality metrics of one pattern, as a dict.
#[pyfunction]
fn evaluate<'py>(
    py: Python<'py>,
    pattern: &SamplingPattern,
    dataset: &Dataset,
    recon: &Reconstructor,
    sensitivities: &Sensitivities,
) -> PyResult<Bound<'py, PyDict>> {
    let r = core_evaluate(
        &pattern.inner,
        &dataset.inner,
        recon.inner.as_ref(),
        &sensitivities.inner,
    )
    .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("F", r.cost_f)?;
    d.set_item("per_item_f", r.per_item_f)?;
    d.set_item("nrmse_kspace", r.nrmse_kspace)?;
    d.set_item("nrmse_kspace_per_item_mean", r.nrmse_kspace_per_item_mean)?;
    d.set_item("nrmse_image", r.nrmse_image)?;
    d.set_item("mean_ssim", r.mean_ssim)?;
    d.set_item("recon_calls", r.recon_calls)?;
    Ok(d)
}

fn trace_dicts<'py>(py: Python<'py>, rows: &[TraceRow]) -> PyResult<Vec<Bound<'py, PyDict>>> {
    rows.iter()
        .map(|r| {
            let d = PyDict::new(py);
            d.set_item("iter", r.iter)?;
            d.set_item("size", r.size)?;
            d.set_item("K", r.k)?;
            d.set_item("F", r.f)?;
            d.set_item("accepted", r.accepted)?;
            d.set_item("recon_calls_cum", r.recon_calls_cum)?;
            Ok(d)
        })
        .collect()
}

fn criterion(image: bool) -> Criterion {
    if image {
        Criterion::Image
    } else {
        Criterion::Kspace
    }
}

type RunResult<'py> = (SamplingPattern, f64, Vec<Bound<'py, PyDict>>);

/// Runs BASS from `init`; returns the best size-`m` pattern, its criterion
/// value and the trace.
#[pyfunction]
#[pyo3(signature = (init, dataset, recon, m, iterations, k_init, seed = 0, alpha = 0.5, sensitivities = None))]
#[allow(clippy::too_many_arguments)]
fn bass_run<'py>(
    py: Python<'py>,
    init: &SamplingPattern,
    dataset: &Dataset,
    recon: &Reconstructor,
    m: usize,
    iterations: usize,
    k_init: usize,
    seed: u64,
    alpha: f64,
    sensitivities: Option<&Sensitivities>,
) -> PyResult<RunResult<'py>> {
    let mut config = BassConfig::new(m, iterations, k_init).with_seed(seed);
    config.alpha = alpha;
    config.criterion = criterion(sensitivities.is_some());
    let mut objective = Objective::new(&dataset.inner, recon.inner.as_ref());
    if let Some(s) = sensitivities {
        objective = objective.with_sensitivities(&s.inner);
    }
    let out = core_bass_run(init.inner.clone(), &config, &objective).map_err(err)?;
    Ok((
        SamplingPattern {
            inner: out.pattern.clone(),
        },
        out.value,
        trace_dicts(py, out.trace())?,
    ))
}

/// Forward greedy selection from `init` up to `m` points.
#[pyfunction]
#[pyo3(signature = (init, dataset, recon, m, lazy = true, max_recon_calls = None))]
fn greedy_forward<'py>(
    py: Python<'py>,
    init: &SamplingPattern,
    dataset: &Dataset,
    recon: &Reconstructor,
    m: usize,
    lazy: bool,
    max_recon_calls: Option<u64>,
) -> PyResult<(SamplingPattern, Option<f64>, Vec<Bound<'py, PyDict>>)> {
    let config = GreedyConfig {
        m,
        lazy,
        max_recon_calls,
        ..Default::default()
    };
    let out = core_greedy(
        init.inner.clone(),
        &config,
        &Objective::new(&dataset.inner, recon.inner.as_ref()),
    )
    .map_err(err)?;
    Ok((
        SamplingPattern { inner: out.pattern },
        out.value,
        trace_dicts(py, &out.trace)?,
    ))
}

/// POSS-style bit-flip search at fixed size `m`.
#[pyfunction]
#[pyo3(signature = (init, dataset, recon, m, iterations, seed = 0))]
fn poss_run<'py>(
    py: Python<'py>,
    init: &SamplingPattern,
    dataset: &Dataset,
    recon: &Reconstructor,
    m: usize,
    iterations: usize,
    seed: u64,
) -> PyResult<RunResult<'py>> {
    let config = PossConfig {
        m,
        iterations,
        seed,
        ..Default::default()
    };
    let out = core_poss(
        init.inner.clone(),
        &config,
        &Objective::new(&dataset.inner, recon.inner.as_ref()),
    )
    .map_err(err)?;
    Ok((
        SamplingPattern { inner: out.pattern },
        out.value,
        trace_dicts(py, &out.trace)?,
    ))
}

#[pymodule]
fn bass_mri(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BassError", m.py().get_type::<BassError>())?;
    m.add_class::<Dataset>()?;
    m.add_class::<Sensitivities>()?;
    m.add_class::<SamplingPattern>()?;
    m.add_class::<Reconstructor>()?;
    m.add_function(wrap_pyfunction!(phantom, m)?)?;
    m.add_function(wrap_pyfunction!(generate_pattern, m)?)?;
    m.add_function(wrap_pyfunction!(efficacy, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(bass_run, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_forward, m)?)?;
    m.add_function(wrap_pyfunction!(poss_run, m)?)?;
    Ok(())
}
