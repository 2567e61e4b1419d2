//! Python bindings: load logs, score them, cluster them and rank methods.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;

use entroclust::commands::resolve_method;
use entroclust::dfg::EdgeLabels;
use entroclust::evaluation::{log_metrics, rank_report, weighted_metrics, Direction, MetricMatrix, Metrics};
use entroclust::event_log::{parse_csv, parse_xes, to_variant_log, CsvConfig, OrderKind, VariantLogJson};
use entroclust::relevance::{self, trace_cost};
use entroclust::{Clustering, ExecOptions, InitStrategy, Trace};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn metrics_dict<'py>(py: Python<'py>, m: &Metrics) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("er", m.er_avg)?;
    d.set_item("graph_density", m.graph_density)?;
    d.set_item("graph_entropy", m.graph_entropy)?;
    Ok(d)
}

/// A log compressed into distinct traces with multiplicities. Traces are
/// stored with start and end markers added.
#[pyclass(name = "VariantLog", frozen)]
struct PyVariantLog {
    inner: entroclust::VariantLog,
}

impl PyVariantLog {
    /// Maps labels to an augmented trace over this log's alphabet.
    fn trace(&self, labels: &[String]) -> PyResult<Trace> {
        let alphabet = self.inner.alphabet();
        let ids = labels
            .iter()
            .map(|l| alphabet.get(l).ok_or_else(|| value_err(format!("unknown activity `{l}`"))))
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Trace::new(ids).augmented())
    }

    fn full_dfg(&self) -> PyResult<entroclust::Dfg> {
        entroclust::Dfg::build(self.inner.variants().iter().map(|v| (&v.trace, v.multiplicity))).map_err(value_err)
    }
}

#[pymethods]
impl PyVariantLog {
    #[staticmethod]
    fn from_traces(traces: Vec<(Vec<String>, u64)>) -> PyResult<Self> {
        let inner = entroclust::VariantLog::from_label_traces(&traces)
            .and_then(|l| l.augment_bos_eos())
            .map_err(value_err)?;
        Ok(PyVariantLog { inner })
    }

    #[staticmethod]
    #[pyo3(signature = (path, case_col="case", activity_col="activity", order_col="timestamp", order_kind="timestamp", delimiter=','))]
    fn from_csv(
        path: &str,
        case_col: &str,
        activity_col: &str,
        order_col: &str,
        order_kind: &str,
        delimiter: char,
    ) -> PyResult<Self> {
        let order_kind = match order_kind {
            "timestamp" => OrderKind::Timestamp,
            "index" => OrderKind::Index,
            other => return Err(value_err(format!("order_kind must be `timestamp` or `index`, got `{other}`"))),
        };
        let delimiter = u8::try_from(delimiter).map_err(|_| value_err("delimiter must be ASCII"))?;
        let config = CsvConfig {
            delimiter,
            case_col: case_col.to_string(),
            activity_col: activity_col.to_string(),
            order_col: order_col.to_string(),
            order_kind,
        };
        let file = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        let events = parse_csv(file, &config).map_err(value_err)?;
        let inner = to_variant_log(&events).and_then(|l| l.augment_bos_eos()).map_err(value_err)?;
        Ok(PyVariantLog { inner })
    }

    #[staticmethod]
    fn from_xes(path: &str) -> PyResult<Self> {
        let file = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
        let events = parse_xes(BufReader::new(file)).map_err(value_err)?;
        let inner = to_variant_log(&events).and_then(|l| l.augment_bos_eos()).map_err(value_err)?;
        Ok(PyVariantLog { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = VariantLogJson::from_json(text).and_then(|j| j.into_log()).map_err(value_err)?;
        Ok(PyVariantLog { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        VariantLogJson::from_log(&self.inner).to_json().map_err(value_err)
    }

    /// `(labels, multiplicity)` pairs in canonical order, without markers.
    fn variants(&self) -> Vec<(Vec<String>, u64)> {
        let alphabet = self.inner.alphabet();
        self.inner
            .variants()
            .iter()
            .map(|v| {
                let labels = v.trace.body().iter().map(|&a| alphabet.label(a).to_string()).collect();
                (labels, v.multiplicity)
            })
            .collect()
    }

    #[getter]
    fn total_cases(&self) -> u64 {
        self.inner.total_cases()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("VariantLog({} variants, {} cases)", self.inner.len(), self.inner.total_cases())
    }

    /// Cost in bits of one trace against the graph of the whole log.
    fn trace_er(&self, trace: Vec<String>) -> PyResult<f64> {
        let t = self.trace(&trace)?;
        Ok(trace_cost(&t, &self.full_dfg()?).map_err(value_err)?.bits)
    }

    /// Case-averaged cost of the log against its own graph.
    fn average_er(&self) -> PyResult<f64> {
        let g = self.full_dfg()?;
        Ok(relevance::average_er(&self.inner, &g, None).map_err(value_err)?.average_bits)
    }

    #[pyo3(signature = (include_sentinels=true))]
    fn metrics<'py>(&self, py: Python<'py>, include_sentinels: bool) -> PyResult<Bound<'py, PyDict>> {
        metrics_dict(py, &log_metrics(&self.inner, include_sentinels).map_err(value_err)?)
    }

    fn dfg(&self) -> PyResult<PyDfg> {
        Ok(PyDfg {
            inner: self.full_dfg()?,
            log: self.inner.clone(),
        })
    }
}

/// Directly-follows graph with node and edge counts.
#[pyclass(name = "Dfg", frozen)]
struct PyDfg {
    inner: entroclust::Dfg,
    log: entroclust::VariantLog,
}

#[pymethods]
impl PyDfg {
    fn edges(&self) -> BTreeMap<(String, String), u64> {
        let alphabet = self.log.alphabet();
        self.inner
            .edge_counts()
            .iter()
            .map(|(&(a, b), &c)| ((alphabet.label(a).to_string(), alphabet.label(b).to_string()), c))
            .collect()
    }

    fn nodes(&self) -> BTreeMap<String, u64> {
        let alphabet = self.log.alphabet();
        self.inner.node_counts().iter().map(|(&a, &c)| (alphabet.label(a).to_string(), c)).collect()
    }

    fn transition_prob(&self, source: &str, target: &str) -> PyResult<f64> {
        let alphabet = self.log.alphabet();
        let lookup = |l: &str| alphabet.resolve(l).ok_or_else(|| value_err(format!("unknown activity `{l}`")));
        self.inner.transition_prob(lookup(source)?, lookup(target)?).map_err(value_err)
    }

    #[pyo3(signature = (include_sentinels=true))]
    fn graph_density(&self, include_sentinels: bool) -> PyResult<f64> {
        self.inner.graph_density(include_sentinels).map_err(value_err)
    }

    #[pyo3(signature = (include_sentinels=true))]
    fn graph_entropy(&self, include_sentinels: bool) -> f64 {
        self.inner.graph_entropy(include_sentinels)
    }

    fn to_dot(&self) -> String {
        self.inner.to_dot(self.log.alphabet(), EdgeLabels::default())
    }
}

/// Result of a clustering run over a `VariantLog`.
#[pyclass(name = "Clustering", frozen)]
struct PyClustering {
    inner: Clustering,
    log: entroclust::VariantLog,
}

#[pymethods]
impl PyClustering {
    #[getter]
    fn method(&self) -> String {
        self.inner.method.clone()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    /// Cluster index of every variant, in the log's variant order.
    #[getter]
    fn assignment(&self) -> Vec<usize> {
        self.inner.assignment.clone()
    }

    /// Variant indices of each cluster.
    #[getter]
    fn clusters(&self) -> Vec<Vec<usize>> {
        self.inner.clusters.iter().map(|c| c.members.clone()).collect()
    }

    #[getter]
    fn candidate_evaluations(&self) -> u64 {
        self.inner.candidate_evaluations
    }

    fn __len__(&self) -> usize {
        self.inner.k()
    }

    #[pyo3(signature = (include_sentinels=true))]
    fn weighted_metrics<'py>(&self, py: Python<'py>, include_sentinels: bool) -> PyResult<Bound<'py, PyDict>> {
        metrics_dict(py, &weighted_metrics(&self.inner, &self.log, include_sentinels).map_err(value_err)?)
    }

    fn cluster_dot(&self, index: usize) -> PyResult<String> {
        let c = self
            .inner
            .clusters
            .get(index)
            .ok_or_else(|| value_err(format!("no cluster {index}")))?;
        Ok(c.dfg.to_dot(self.log.alphabet(), EdgeLabels::default()))
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner.to_json()).map_err(value_err)
    }
}

/// Clusters the variants of `log` into `k` groups.
///
/// `method` is one of `ec`, `ec-split`, `random`, `freq-kmeans`; `init`
/// (`random`, `pp`, `ppnorm`) applies to the first two only.
#[pyfunction]
#[pyo3(signature = (log, k, method="ec", init=None, seed=0, parallel=true))]
fn cluster(log: &PyVariantLog, k: usize, method: &str, init: Option<&str>, seed: u64, parallel: bool) -> PyResult<PyClustering> {
    let kind = method.parse().map_err(value_err)?;
    let init = init.map(str::parse::<InitStrategy>).transpose().map_err(value_err)?;
    let method = resolve_method(kind, init).map_err(value_err)?;
    let inner = method.run(&log.inner, k, seed, ExecOptions { parallel }).map_err(value_err)?;
    Ok(PyClustering {
        inner,
        log: log.inner.clone(),
    })
}

/// Cost in bits of a trace against its own single-trace graph.
#[pyfunction]
fn self_er(trace: Vec<String>) -> PyResult<f64> {
    let log = entroclust::VariantLog::from_label_traces(&[(trace, 1)])
        .and_then(|l| l.augment_bos_eos())
        .map_err(value_err)?;
    relevance::self_er(&log.variant(0).trace).map_err(value_err)
}

/// Average ranks, Friedman test and Nemenyi critical difference for a
/// methods × logs matrix. `None` marks a missing value.
#[pyfunction]
#[pyo3(signature = (methods, logs, values, direction="lower", alpha=0.05, metric="er"))]
fn rank<'py>(
    py: Python<'py>,
    methods: Vec<String>,
    logs: Vec<String>,
    values: Vec<Vec<Option<f64>>>,
    direction: &str,
    alpha: f64,
    metric: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let direction = match direction {
        "lower" => Direction::LowerIsBetter,
        "higher" => Direction::HigherIsBetter,
        other => return Err(value_err(format!("direction must be `lower` or `higher`, got `{other}`"))),
    };
    let matrix = MetricMatrix::new(methods, logs, values).map_err(value_err)?;
    let report = rank_report(&matrix, metric, direction, alpha).map_err(value_err)?;
    let d = PyDict::new(py);
    let ranks = PyDict::new(py);
    for (method, r) in &report.avg_ranks {
        ranks.set_item(method, r)?;
    }
    d.set_item("avg_ranks", ranks)?;
    d.set_item("friedman_chi2", report.friedman_chi2)?;
    d.set_item("p_value", report.p_value)?;
    d.set_item("cd", report.cd)?;
    d.set_item("pairs_significant", report.pairs_significant.iter().map(|[a, b]| (a.clone(), b.clone())).collect::<Vec<_>>())?;
    d.set_item("notes", report.notes.clone())?;
    Ok(d)
}

#[pymodule]
fn entroclust_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyVariantLog>()?;
    m.add_class::<PyDfg>()?;
    m.add_class::<PyClustering>()?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(self_er, m)?)?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    Ok(())
}
