//! Python bindings: load and validate scenarios, run them, read recorder
//! columns and write result directories.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use gridres_core::kernel::{simulate, RunOptions, SimulationResult};
use gridres_core::market::{self, Bid, MarketRole, MarketState, Topology};
use gridres_core::recorder::{summary_lines, write_results};
use gridres_core::scenario::{self, ScenarioModel};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_topology(word: Option<&str>) -> PyResult<Option<Topology>> {
    word.map(|w| Topology::parse(w).ok_or_else(|| value_err(format!("unknown topology '{w}'"))))
        .transpose()
}

/// A parsed scenario document.
#[pyclass(module = "gridres", skip_from_py_object)]
#[derive(Clone)]
pub struct Scenario {
    model: ScenarioModel,
    base_dir: PathBuf,
}

#[pymethods]
impl Scenario {
    /// Parses scenario text. Player and weather files resolve against
    /// `base_dir` (default: the working directory).
    #[staticmethod]
    #[pyo3(signature = (text, base_dir=None))]
    fn parse(text: &str, base_dir: Option<PathBuf>) -> PyResult<Self> {
        let model = scenario::parse_scenario(text).map_err(value_err)?;
        Ok(Scenario {
            model,
            base_dir: base_dir.unwrap_or_default(),
        })
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(PathBuf::from).unwrap_or_default();
        Self::parse(&text, Some(base))
    }

    #[getter]
    fn object_names(&self) -> Vec<String> {
        self.model.objects.iter().map(|o| o.name.clone()).collect()
    }

    /// `(class, name)` per object in document order.
    fn objects(&self) -> Vec<(String, String)> {
        self.model
            .objects
            .iter()
            .map(|o| (o.class.keyword().to_string(), o.name.clone()))
            .collect()
    }

    #[getter]
    fn attack_names(&self) -> Vec<String> {
        self.model.attacks.iter().map(|a| a.name.clone()).collect()
    }

    /// `(severity, code, location, message)` for every diagnostic.
    fn validate(&self) -> Vec<(String, String, String, String)> {
        let r = scenario::validate(&self.model);
        let row = |sev: &str, d: &scenario::Diagnostic| {
            (
                sev.to_string(),
                d.code.to_string(),
                d.location.to_string(),
                d.message.clone(),
            )
        };
        r.errors
            .iter()
            .map(|d| row("error", d))
            .chain(r.warnings.iter().map(|d| row("warning", d)))
            .collect()
    }

    fn is_runnable(&self) -> bool {
        scenario::validate(&self.model).is_runnable()
    }

    fn pretty(&self) -> String {
        scenario::pretty_print(&self.model)
    }

    /// Changes parameters of a declared attack. Returns a modified copy.
    #[pyo3(signature = (name, fraction=None, lam=None, price=None))]
    fn with_attack(
        &self,
        name: &str,
        fraction: Option<f64>,
        lam: Option<f64>,
        price: Option<f64>,
    ) -> PyResult<Self> {
        let mut out = self.clone();
        let a = out
            .model
            .attacks
            .iter_mut()
            .find(|a| a.name == name)
            .ok_or_else(|| PyKeyError::new_err(name.to_string()))?;
        if let Some(f) = fraction {
            a.fraction = f;
        }
        if lam.is_some() {
            a.lambda = lam;
        }
        if price.is_some() {
            a.price = price;
        }
        Ok(out)
    }

    fn without_attacks(&self) -> Self {
        let mut out = self.clone();
        out.model.attacks.clear();
        out
    }

    /// Runs the scenario. `topology` is "DIRECT" or "AUXILIARY" to force
    /// every auction onto one market layout.
    #[pyo3(signature = (seed=0, topology=None))]
    fn run(&self, py: Python<'_>, seed: u64, topology: Option<&str>) -> PyResult<RunResult> {
        let opts = RunOptions {
            seed,
            topology: parse_topology(topology)?,
            base_dir: self.base_dir.clone(),
        };
        let model = &self.model;
        let result = py.detach(|| simulate(model, &opts)).map_err(value_err)?;
        Ok(RunResult { result })
    }

    fn __len__(&self) -> usize {
        self.model.objects.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(objects={}, attacks={}, recorders={})",
            self.model.objects.len(),
            self.model.attacks.len(),
            self.model.recorders.len()
        )
    }
}

/// Outcome of a simulation run.
#[pyclass(module = "gridres")]
pub struct RunResult {
    result: SimulationResult,
}

#[pymethods]
impl RunResult {
    #[getter]
    fn complete(&self) -> bool {
        self.result.meta.complete
    }

    #[getter]
    fn failure(&self) -> Option<String> {
        self.result.meta.failure.clone()
    }

    #[getter]
    fn steps(&self) -> i64 {
        self.result.meta.steps
    }

    #[getter]
    fn recorders(&self) -> Vec<String> {
        self.result.tables.keys().cloned().collect()
    }

    /// Timestamps of a recorder's rows as 'YYYY-MM-DD HH:MM:SS'.
    fn times(&self, recorder: &str) -> PyResult<Vec<String>> {
        let t = self
            .result
            .tables
            .get(recorder)
            .ok_or_else(|| PyKeyError::new_err(recorder.to_string()))?;
        Ok(t.rows.iter().map(|r| r.time.to_string()).collect())
    }

    fn column(&self, recorder: &str, property: &str) -> PyResult<Vec<f64>> {
        self.result
            .tables
            .get(recorder)
            .ok_or_else(|| PyKeyError::new_err(recorder.to_string()))?
            .column(property)
            .ok_or_else(|| PyKeyError::new_err(format!("{recorder}.{property}")))
    }

    fn flags(&self, recorder: &str) -> PyResult<Vec<String>> {
        let t = self
            .result
            .tables
            .get(recorder)
            .ok_or_else(|| PyKeyError::new_err(recorder.to_string()))?;
        Ok(t.rows.iter().map(|r| r.flags.clone()).collect())
    }

    /// `(time, target, property, old, new, origin)` per applied event.
    fn events(&self) -> Vec<(String, String, String, String, String, String)> {
        self.result
            .audit
            .iter()
            .map(|a| {
                (
                    a.time.to_string(),
                    a.target.clone(),
                    a.property.clone(),
                    a.old_value.clone(),
                    a.new_value.clone(),
                    a.origin.keyword().to_string(),
                )
            })
            .collect()
    }

    fn summary(&self) -> BTreeMap<String, String> {
        summary_lines(&self.result).into_iter().collect()
    }

    /// Writes the result directory and returns the written paths.
    fn write(&self, out_dir: PathBuf) -> PyResult<Vec<PathBuf>> {
        write_results(&self.result, &out_dir).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "RunResult(complete={}, steps={}, recorders={})",
            self.result.meta.complete,
            self.result.meta.steps,
            self.result.tables.len()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (houses=30, seed=0))]
fn generate_feeder(houses: usize, seed: u64) -> PyResult<String> {
    if houses == 0 {
        return Err(value_err("houses must be at least 1"));
    }
    Ok(gridres_core::genfeeder::generate_feeder(houses, seed))
}

/// Clears one order book of `(side, price, quantity)` tuples, side being
/// "buy" or "sell". Returns `(price, quantity)`.
#[pyfunction]
#[pyo3(signature = (bids, price_cap=market::DEFAULT_PRICE_CAP, prior_price=0.0))]
fn clear_market(
    bids: Vec<(String, f64, f64)>,
    price_cap: f64,
    prior_price: f64,
) -> PyResult<(f64, f64)> {
    let mut m = MarketState::new(
        "py",
        MarketRole::Main,
        market::DEFAULT_PERIOD,
        price_cap,
        prior_price,
    );
    for (i, (side, price, qty)) in bids.into_iter().enumerate() {
        let bid = match side.to_ascii_lowercase().as_str() {
            "buy" => Bid::buy(format!("b{i}"), price, qty, 0),
            "sell" => Bid::sell(format!("s{i}"), price, qty, 0),
            other => return Err(value_err(format!("unknown side '{other}'"))),
        };
        m.submit_bid(bid).map_err(value_err)?;
    }
    let c = market::clear_market(&mut m);
    Ok((c.price, c.quantity))
}

#[pymodule]
fn gridres(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<RunResult>()?;
    m.add_function(wrap_pyfunction!(generate_feeder, m)?)?;
    m.add_function(wrap_pyfunction!(clear_market, m)?)?;
    Ok(())
}
