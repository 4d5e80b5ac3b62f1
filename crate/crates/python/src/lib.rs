//! Python bindings: networks, attacker mixes, planning, the oracle and the
//! MILP export.

use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use interdiction as core;
use interdiction::dot::export_dot as dot_text;
use interdiction::milp::{emit_lp, parse_solution, MilpConfig};
use interdiction::planner::cost_table as layered_costs;
use interdiction::{DefenderSchedule, PlanError};

create_exception!(interdiction, NoPathError, PyValueError);

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn plan_err(e: PlanError) -> PyErr {
    match e {
        PlanError::NoPath { .. } => NoPathError::new_err(e.to_string()),
        other => value_err(other),
    }
}

type Triples = Vec<(u32, u32, u32)>;

fn schedules_from(triples: Vec<Triples>) -> Vec<DefenderSchedule> {
    triples.iter().map(|t| DefenderSchedule::from_triples(t)).collect()
}

fn triples_of(scheds: &[DefenderSchedule]) -> Vec<Triples> {
    scheds.iter().map(DefenderSchedule::to_triples).collect()
}

/// Road network with crime scene, police starts, exits and horizon.
#[pyclass(name = "Network", frozen)]
struct PyNetwork {
    inner: core::Network,
}

#[pymethods]
impl PyNetwork {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        core::parse_network(text).map(|inner| Self { inner }).map_err(value_err)
    }

    /// The six-node reference network.
    #[staticmethod]
    fn fixture() -> Self {
        Self {
            inner: core::parse_network(core::FIXTURE_NETWORK).expect("fixture parses"),
        }
    }

    #[getter]
    fn nodes(&self) -> Vec<u32> {
        self.inner.nodes().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(u32, u32, u32)> {
        self.inner.edges().iter().map(|e| (e.src, e.dst, e.length)).collect()
    }

    #[getter]
    fn crime(&self) -> u32 {
        self.inner.crime()
    }

    #[getter]
    fn police(&self) -> Vec<u32> {
        self.inner.police().to_vec()
    }

    #[getter]
    fn exits(&self) -> Vec<u32> {
        self.inner.exits().to_vec()
    }

    #[getter]
    fn t_max(&self) -> u32 {
        self.inner.t_max()
    }

    /// Shortest travel time, or `None` when `v` is unreachable from `u`.
    fn distance(&self, u: u32, v: u32) -> Option<u32> {
        core::all_pairs_shortest(&self.inner).get(u, v)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __repr__(&self) -> String {
        format!(
            "Network(nodes={}, edges={}, t_max={})",
            self.inner.node_count(),
            self.inner.edges().len(),
            self.inner.t_max()
        )
    }
}

/// Probability distribution over attacker escape routes.
#[pyclass(name = "MixedStrategy", frozen)]
struct PyMixedStrategy {
    inner: core::MixedStrategy,
}

#[pymethods]
impl PyMixedStrategy {
    #[new]
    fn new(network: &PyNetwork, strategies: Vec<Vec<(u32, u32)>>, probs: Vec<f64>) -> PyResult<Self> {
        let strategies = strategies
            .iter()
            .map(|s| core::AttackerStrategy::from_pairs(s))
            .collect();
        core::MixedStrategy::validated(&network.inner, strategies, probs)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn from_json(network: &PyNetwork, text: &str) -> PyResult<Self> {
        core::MixedStrategy::from_json(&network.inner, text)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    /// The three reference routes with probabilities 0.4, 0.3, 0.3.
    #[staticmethod]
    fn fixture(network: &PyNetwork) -> PyResult<Self> {
        Self::from_json(network, core::FIXTURE_STRATEGIES)
    }

    #[staticmethod]
    fn generate(network: &PyNetwork, count: usize, seed: u64) -> PyResult<Self> {
        core::generate_strategies(&network.inner, count, seed)
            .map(|inner| Self { inner })
            .map_err(value_err)
    }

    #[getter]
    fn strategies(&self) -> Vec<Vec<(u32, u32)>> {
        self.inner
            .strategies()
            .iter()
            .map(|s| s.states.iter().map(|st| (st.v, st.t)).collect())
            .collect()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// One defender's planned route.
#[pyclass(name = "PlanResult", frozen, get_all)]
struct PyPlanResult {
    layered_path: Vec<String>,
    schedule: Triples,
    path_cost: f64,
    proxy_utility: f64,
    evaluated_utility: f64,
}

impl From<core::PlanResult> for PyPlanResult {
    fn from(p: core::PlanResult) -> Self {
        Self {
            layered_path: p.layered_path.iter().map(|n| n.to_string()).collect(),
            schedule: p.schedule.to_triples(),
            path_cost: p.path_cost,
            proxy_utility: p.proxy_utility,
            evaluated_utility: p.evaluated_utility,
        }
    }
}

#[pymethods]
impl PyPlanResult {
    fn __repr__(&self) -> String {
        format!(
            "PlanResult(path=[{}], utility={})",
            self.layered_path.join(", "),
            self.evaluated_utility
        )
    }
}

/// Plan one defender from `start` (default: the first police start).
#[pyfunction]
#[pyo3(signature = (network, mix, start=None))]
fn plan(network: &PyNetwork, mix: &PyMixedStrategy, start: Option<u32>) -> PyResult<PyPlanResult> {
    let net = &network.inner;
    let start = start.unwrap_or(net.police()[0]);
    let layered = core::build_layered(net);
    core::plan_defender(net, &layered, &mix.inner, start)
        .map(PyPlanResult::from)
        .map_err(plan_err)
}

/// Greedy plan for several defenders. Returns the per-defender plans (`None`
/// for a defender without a path) and the combined utility.
#[pyfunction]
fn plan_multi(
    network: &PyNetwork,
    mix: &PyMixedStrategy,
    starts: Vec<u32>,
) -> PyResult<(Vec<Option<PyPlanResult>>, f64)> {
    let layered = core::build_layered(&network.inner);
    let m = core::plan_multi(&network.inner, &layered, &mix.inner, &starts).map_err(plan_err)?;
    let plans = m.plans.into_iter().map(|p| p.map(PyPlanResult::from)).collect();
    Ok((plans, m.combined_utility))
}

/// Caught probability mass for a list of schedules, each a list of
/// `(node, t_in, t_out)` triples.
#[pyfunction]
fn utility(mix: &PyMixedStrategy, schedules: Vec<Triples>) -> f64 {
    core::utility(&schedules_from(schedules), &mix.inner)
}

/// Exhaustive best response for the first `defenders` police starts.
#[pyfunction]
#[pyo3(signature = (network, mix, defenders=1, cap=None))]
fn oracle(
    network: &PyNetwork,
    mix: &PyMixedStrategy,
    defenders: usize,
    cap: Option<u64>,
) -> PyResult<(f64, Vec<Triples>)> {
    let config = core::OracleConfig {
        cap: cap.unwrap_or(core::OracleConfig::default().cap),
    };
    let r = core::oracle_best(&network.inner, &mix.inner, defenders, &config)
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok((r.utility, triples_of(&r.schedules)))
}

/// `(g, h)` per layered node, keyed by `t_v`.
#[pyfunction]
fn cost_table<'py>(py: Python<'py>, network: &PyNetwork, mix: &PyMixedStrategy) -> PyResult<Bound<'py, PyDict>> {
    let layered = core::build_layered(&network.inner);
    let c = layered_costs(&layered, mix.inner.strategies(), mix.inner.probs()).map_err(value_err)?;
    let out = PyDict::new(py);
    for i in 0..c.len() {
        out.set_item(layered.node(i).to_string(), (c.g(i), c.h(i)))?;
    }
    Ok(out)
}

fn milp_config(
    net: &core::Network,
    defenders: Option<usize>,
    l_max: Option<usize>,
    delta: Option<u32>,
    big_m: Option<f64>,
    strict_exit_domain: bool,
) -> MilpConfig {
    let d = MilpConfig::for_network(net);
    MilpConfig {
        defenders: defenders.unwrap_or(d.defenders),
        l_max: l_max.unwrap_or(d.l_max),
        delta: delta.unwrap_or(d.delta),
        big_m: big_m.unwrap_or(d.big_m),
        strict_exit_domain,
    }
}

/// The benchmark MILP as LP text.
#[pyfunction]
#[pyo3(signature = (network, mix, defenders=None, l_max=None, delta=None, big_m=None, strict_exit_domain=false))]
fn export_lp(
    network: &PyNetwork,
    mix: &PyMixedStrategy,
    defenders: Option<usize>,
    l_max: Option<usize>,
    delta: Option<u32>,
    big_m: Option<f64>,
    strict_exit_domain: bool,
) -> PyResult<String> {
    let config = milp_config(&network.inner, defenders, l_max, delta, big_m, strict_exit_domain);
    let model = core::build_milp(&network.inner, &mix.inner, config).map_err(value_err)?;
    Ok(emit_lp(&model))
}

/// Check a solver solution (`objective v` then `name value` lines) against the
/// model built with the same options. Returns `(utility, schedules)`.
#[pyfunction]
#[pyo3(signature = (network, mix, text, defenders=None, l_max=None, delta=None, big_m=None, strict_exit_domain=false))]
#[allow(clippy::too_many_arguments)]
fn import_solution(
    network: &PyNetwork,
    mix: &PyMixedStrategy,
    text: &str,
    defenders: Option<usize>,
    l_max: Option<usize>,
    delta: Option<u32>,
    big_m: Option<f64>,
    strict_exit_domain: bool,
) -> PyResult<(f64, Vec<Triples>)> {
    let config = milp_config(&network.inner, defenders, l_max, delta, big_m, strict_exit_domain);
    let model = core::build_milp(&network.inner, &mix.inner, config).map_err(value_err)?;
    let sol = parse_solution(&model, &mix.inner, text).map_err(value_err)?;
    Ok((sol.utility, triples_of(&sol.schedules)))
}

/// Graphviz text for the layered network, annotated with costs when `mix` is given.
#[pyfunction]
#[pyo3(signature = (network, mix=None))]
fn export_dot(network: &PyNetwork, mix: Option<&PyMixedStrategy>) -> PyResult<String> {
    let layered = core::build_layered(&network.inner);
    let costs = match mix {
        Some(m) => Some(layered_costs(&layered, m.inner.strategies(), m.inner.probs()).map_err(value_err)?),
        None => None,
    };
    Ok(dot_text(&layered, costs.as_ref()))
}

#[pymodule]
#[pyo3(name = "interdiction")]
fn interdiction_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyMixedStrategy>()?;
    m.add_class::<PyPlanResult>()?;
    m.add("NoPathError", m.py().get_type::<NoPathError>())?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(plan_multi, m)?)?;
    m.add_function(wrap_pyfunction!(utility, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(cost_table, m)?)?;
    m.add_function(wrap_pyfunction!(export_lp, m)?)?;
    m.add_function(wrap_pyfunction!(import_solution, m)?)?;
    m.add_function(wrap_pyfunction!(export_dot, m)?)?;
    Ok(())
}
