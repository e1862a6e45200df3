//! Python bindings for the dual-connectivity simulator.
//!
//! ```python
//! import dcsim
//! sc = dcsim.Scenario.default()
//! r = sc.run("nci", seed=3)
//! print(r.handover_count, r.mean_sinr_db)
//! ```

use std::path::PathBuf;

use dcsim_core::cli::{compare_rows, compare_runs, format_table, CliError};
use dcsim_core::config::ScenarioConfig;
use dcsim_core::hdma::HdmaKind;
use dcsim_core::metrics::{self, RunMetrics};
use dcsim_core::nci::{self, GnbType, NciError};
use dcsim_core::sim::{self, SimOutput};
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn cli_err(e: CliError) -> PyErr {
    match e {
        CliError::Io(io) => PyOSError::new_err(io.to_string()),
        CliError::Config(c) => value_err(c),
        CliError::Sim(s) => PyRuntimeError::new_err(s.to_string()),
    }
}

fn parse_type(s: &str) -> PyResult<GnbType> {
    GnbType::ALL
        .into_iter()
        .find(|t| t.as_str() == s)
        .ok_or_else(|| value_err(format!("unknown gNB type `{s}` (macro, small, mmwave, reserved)")))
}

fn parse_kind(s: &str) -> PyResult<HdmaKind> {
    s.parse().map_err(value_err)
}

/// Packs `(type, gnb_id, cell_id)` into a 36-bit NCI.
#[pyfunction]
fn encode_nci(gnb_type: &str, gnb_id: u32, cell_id: u32) -> PyResult<u64> {
    nci::encode_nci(parse_type(gnb_type)?, gnb_id, cell_id).map_err(value_err)
}

/// Returns `(type, gnb_id, cell_id)`.
#[pyfunction]
#[pyo3(signature = (raw, gnb_id_bits = 22))]
fn decode_nci(raw: u64, gnb_id_bits: u8) -> PyResult<(&'static str, u32, u32)> {
    let d = nci::decode_nci(raw, gnb_id_bits).map_err(value_err)?;
    Ok((d.gnb_type.as_str(), d.gnb_id, d.cell_id))
}

#[pyfunction]
fn gnb_type_of(raw: u64) -> &'static str {
    nci::gnb_type_of(raw).as_str()
}

#[pyclass(name = "Ncgi", module = "dcsim", frozen, eq, ord, hash, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct PyNcgi(nci::Ncgi);

#[pymethods]
impl PyNcgi {
    #[new]
    #[pyo3(signature = (plmn, nci, gnb_id_bits = 22))]
    fn new(plmn: u32, nci: u64, gnb_id_bits: u8) -> PyResult<Self> {
        nci::Ncgi::new(plmn, nci, gnb_id_bits).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        text.parse::<nci::Ncgi>().map(Self).map_err(|e: NciError| value_err(e))
    }

    #[getter]
    fn plmn(&self) -> u32 {
        self.0.plmn()
    }

    #[getter]
    fn nci(&self) -> u64 {
        self.0.nci()
    }

    #[getter]
    fn gnb_type(&self) -> &'static str {
        self.0.gnb_type().as_str()
    }

    fn __str__(&self) -> String {
        self.0.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Ncgi('{}')", self.0)
    }
}

#[pyclass(name = "HandoverEvent", module = "dcsim", frozen, get_all)]
struct PyEvent {
    time_s: f64,
    tick: u64,
    kind: &'static str,
    from_ncgi: Option<String>,
    to_ncgi: Option<String>,
    target_tier: &'static str,
}

#[pymethods]
impl PyEvent {
    fn __repr__(&self) -> String {
        format!(
            "HandoverEvent(time_s={}, kind='{}', from={:?}, to={:?})",
            self.time_s, self.kind, self.from_ncgi, self.to_ncgi
        )
    }
}

/// Result of one simulated run.
#[pyclass(name = "RunResult", module = "dcsim", frozen)]
struct PyRunResult {
    output: SimOutput,
    metrics: RunMetrics,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn strategy(&self) -> &'static str {
        self.metrics.strategy.name()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.metrics.seed
    }

    #[getter]
    fn handover_count(&self) -> usize {
        self.metrics.handover_count
    }

    #[getter]
    fn ping_pong_count(&self) -> usize {
        self.metrics.ping_pong_count
    }

    #[getter]
    fn mean_sinr_db(&self) -> f64 {
        self.metrics.mean_sinr_db
    }

    #[getter]
    fn mean_throughput_bps(&self) -> f64 {
        self.metrics.mean_throughput_bps
    }

    #[getter]
    fn events(&self) -> Vec<PyEvent> {
        self.output
            .events
            .iter()
            .map(|e| PyEvent {
                time_s: e.time_s,
                tick: e.tick,
                kind: e.kind.as_str(),
                from_ncgi: e.from.map(|n| n.to_string()),
                to_ncgi: e.to.map(|n| n.to_string()),
                target_tier: e.target_tier.as_str(),
            })
            .collect()
    }

    #[getter]
    fn time_s(&self) -> Vec<f64> {
        self.output.ticks.iter().map(|t| t.time_s).collect()
    }

    #[getter]
    fn sinr_db(&self) -> Vec<f64> {
        self.metrics.sinr_samples.clone()
    }

    #[getter]
    fn throughput_bps(&self) -> Vec<f64> {
        self.output.ticks.iter().map(|t| t.throughput_bps).collect()
    }

    #[getter]
    fn sn_ncgi(&self) -> Vec<Option<String>> {
        self.output.ticks.iter().map(|t| t.sn.map(|n| n.to_string())).collect()
    }

    /// Writes the time series, histogram and CDF files into `out_dir`.
    fn write_csv(&self, out_dir: PathBuf) -> PyResult<()> {
        std::fs::create_dir_all(&out_dir)
            .and_then(|_| metrics::write_run_csv(&out_dir, &self.output, &self.metrics))
            .map_err(|e| PyOSError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        self.metrics.summary_row()
    }
}

#[pyclass(name = "Scenario", module = "dcsim", skip_from_py_object)]
#[derive(Clone)]
struct PyScenario(ScenarioConfig);

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn default() -> Self {
        Self(ScenarioConfig::default_scenario())
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        ScenarioConfig::load(&path).map(Self).map_err(value_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        ScenarioConfig::from_json_str(text, "<python>").map(Self).map_err(value_err)
    }

    #[getter]
    fn duration_s(&self) -> f64 {
        self.0.duration_s
    }

    #[setter]
    fn set_duration_s(&mut self, v: f64) {
        self.0.duration_s = v;
    }

    #[getter]
    fn speed_kmh(&self) -> f64 {
        self.0.ue.speed_kmh
    }

    #[setter]
    fn set_speed_kmh(&mut self, v: f64) {
        self.0.ue.speed_kmh = v;
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed
    }

    #[getter]
    fn gnbs(&self) -> Vec<PyNcgi> {
        self.0.gnbs.iter().map(|g| PyNcgi(g.ncgi)).collect()
    }

    /// Simulates one strategy; `seed` defaults to the scenario seed.
    #[pyo3(signature = (strategy, seed = None))]
    fn run(&self, py: Python<'_>, strategy: &str, seed: Option<u64>) -> PyResult<PyRunResult> {
        let kind = parse_kind(strategy)?;
        let seed = seed.unwrap_or(self.0.seed);
        let cfg = &self.0;
        let output = py
            .detach(|| sim::run(cfg, kind, seed))
            .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
        let metrics = RunMetrics::from_output(&output);
        Ok(PyRunResult { output, metrics })
    }

    /// Runs every strategy on every seed, writes the CSV tree into
    /// `out_dir` and returns the comparison table.
    fn compare(&self, py: Python<'_>, seeds: Vec<u64>, out_dir: PathBuf) -> PyResult<String> {
        let cfg = &self.0;
        let runs = py
            .detach(|| {
                std::fs::create_dir_all(&out_dir)?;
                compare_runs(cfg, &seeds, &out_dir)
            })
            .map_err(cli_err)?;
        Ok(format_table(&compare_rows(&runs)))
    }
}

/// `(bin_low, count)` pairs with bins `[k*w, (k+1)*w)`.
#[pyfunction]
#[pyo3(signature = (samples, bin_width = 1.0))]
fn histogram(samples: Vec<f64>, bin_width: f64) -> PyResult<Vec<(f64, usize)>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(value_err("bin_width must be positive"));
    }
    Ok(metrics::histogram(&samples, bin_width))
}

/// `(value, cumulative_fraction)` pairs, one per distinct value.
#[pyfunction]
fn cdf(samples: Vec<f64>) -> Vec<(f64, f64)> {
    metrics::cdf(&samples)
}

#[pymodule]
fn dcsim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(encode_nci, m)?)?;
    m.add_function(wrap_pyfunction!(decode_nci, m)?)?;
    m.add_function(wrap_pyfunction!(gnb_type_of, m)?)?;
    m.add_function(wrap_pyfunction!(histogram, m)?)?;
    m.add_function(wrap_pyfunction!(cdf, m)?)?;
    m.add_class::<PyNcgi>()?;
    m.add_class::<PyEvent>()?;
    m.add_class::<PyRunResult>()?;
    m.add_class::<PyScenario>()?;
    m.add("STRATEGIES", HdmaKind::ALL.map(|k| k.name()).to_vec())?;
    Ok(())
}
