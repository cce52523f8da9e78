//! Python bindings. Reports cross the boundary as JSON and come back as
//! plain dicts.

use fdekit::canonical::{
    bounded_oracle, build_canonical_model, propositional_oracle, verify_truth_lemma,
    ProvabilityOracle, DEFAULT_PARTITION_CAP,
};
use fdekit::formula::{closure, tilde};
use fdekit::proofs::{self, check_proof as check, Proof};
use fdekit::search::{self, SearchBounds, SearchMode};
use fdekit::semantics::{extension, satisfies, valid_in_model, validate_model};
use fdekit::{AgentId, GroupUpdateModel, Universe};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;
use serde_json::json;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn universe(agents: Option<Vec<String>>) -> PyResult<Universe> {
    let names = agents.unwrap_or_else(|| vec!["a".into(), "b".into()]);
    Universe::new(names.iter().map(String::as_str)).map_err(err)
}

fn to_py<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A core formula.
#[pyclass(name = "Formula", module = "fdekit_py", frozen, eq, hash, from_py_object)]
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PyFormula {
    inner: fdekit::Formula,
}

#[pymethods]
impl PyFormula {
    #[new]
    #[pyo3(signature = (text, agents = None))]
    fn new(text: &str, agents: Option<Vec<String>>) -> PyResult<Self> {
        parse(text, agents)
    }

    fn __str__(&self) -> String {
        fdekit::print(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Formula({:?})", fdekit::print(&self.inner))
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    fn variables(&self) -> Vec<String> {
        self.inner.variables().into_iter().collect()
    }

    fn agents(&self) -> Vec<String> {
        self.inner.agents().iter().map(|a| a.to_string()).collect()
    }

    fn is_propositional(&self) -> bool {
        self.inner.is_propositional()
    }

    fn has_updates(&self) -> bool {
        self.inner.has_updates()
    }

    fn tilde(&self) -> PyFormula {
        PyFormula {
            inner: tilde(&self.inner),
        }
    }

    /// The closure, then the negation closure, both in enumeration order.
    fn closure(&self) -> (Vec<String>, Vec<String>) {
        let cl = closure(&self.inner);
        let show = |v: &[fdekit::Formula]| v.iter().map(fdekit::print).collect();
        (show(&cl.closure), show(&cl.neg_closure))
    }
}

/// A validated group update model.
#[pyclass(name = "Model", module = "fdekit_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyModel {
    inner: GroupUpdateModel,
}

impl PyModel {
    fn universe(&self) -> PyResult<Universe> {
        Universe::new(self.inner.frame.agents().iter().map(AgentId::as_str)).map_err(err)
    }

    fn formula(&self, f: &Bound<'_, PyAny>) -> PyResult<fdekit::Formula> {
        if let Ok(pf) = f.extract::<PyFormula>() {
            return Ok(pf.inner);
        }
        let text: String = f.extract()?;
        fdekit::parse(&text, &self.universe()?).map_err(err)
    }
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        GroupUpdateModel::from_json(text)
            .map(|inner| PyModel { inner })
            .map_err(err)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn states(&self) -> usize {
        self.inner.states()
    }

    fn validate(&self) -> PyResult<()> {
        validate_model(&self.inner).map_err(err)
    }

    /// States where the formula holds. Accepts a Formula or formula text.
    fn extension(&self, formula: &Bound<'_, PyAny>) -> PyResult<Vec<usize>> {
        let f = self.formula(formula)?;
        Ok(extension(&self.inner, &f).map_err(err)?.states.to_vec())
    }

    fn satisfies(&self, state: usize, formula: &Bound<'_, PyAny>) -> PyResult<bool> {
        if state >= self.inner.states() {
            return Err(err(format!("state {state} out of range")));
        }
        satisfies(&self.inner, state, &self.formula(formula)?).map_err(err)
    }

    fn valid(&self, formula: &Bound<'_, PyAny>) -> PyResult<bool> {
        valid_in_model(&self.inner, &self.formula(formula)?).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Model(states={})", self.inner.states())
    }
}

#[pyfunction]
#[pyo3(signature = (text, agents = None))]
fn parse(text: &str, agents: Option<Vec<String>>) -> PyResult<PyFormula> {
    fdekit::parse(text, &universe(agents)?)
        .map(|inner| PyFormula { inner })
        .map_err(err)
}

#[pyfunction]
fn print_formula(formula: &PyFormula) -> String {
    fdekit::print(&formula.inner)
}

#[allow(clippy::too_many_arguments)]
fn bounds(
    agents: Option<Vec<String>>,
    vars: Option<Vec<String>>,
    max_states: usize,
    include_updates: bool,
    max_triggers: usize,
    samples: usize,
    seed: u64,
    randomized: bool,
) -> PyResult<SearchBounds> {
    let b = SearchBounds {
        max_states,
        agents: universe(agents)?.agents().cloned().collect(),
        vars: vars.unwrap_or_else(|| vec!["p".into(), "q".into()]),
        include_updates,
        max_triggers,
        sample_budget: samples,
        seed,
        mode: if randomized {
            SearchMode::Randomized
        } else {
            SearchMode::Exhaustive
        },
        ..SearchBounds::default()
    };
    b.validate().map_err(err)?;
    Ok(b)
}

fn text_formula(text: &str, b: &SearchBounds) -> PyResult<fdekit::Formula> {
    fdekit::parse(text, &b.universe()).map_err(err)
}

/// Runs the bounded decision procedure; returns the JSON report as a dict.
#[pyfunction]
#[pyo3(signature = (formula, *, agents = None, max_states = 3, include_updates = true,
    max_triggers = 2, samples = 1000, seed = 0, randomized = false))]
#[allow(clippy::too_many_arguments)]
fn decide<'py>(
    py: Python<'py>,
    formula: &str,
    agents: Option<Vec<String>>,
    max_states: usize,
    include_updates: bool,
    max_triggers: usize,
    samples: usize,
    seed: u64,
    randomized: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let b = bounds(agents, None, max_states, include_updates, max_triggers, samples, seed, randomized)?;
    let f = text_formula(formula, &b)?;
    to_py(py, &search::decide_report(&f, &b))
}

#[pyfunction]
#[pyo3(signature = (formula, *, agents = None, max_states = 3, include_updates = true,
    max_triggers = 2, samples = 1000, seed = 0, randomized = false))]
#[allow(clippy::too_many_arguments)]
fn countermodel<'py>(
    py: Python<'py>,
    formula: &str,
    agents: Option<Vec<String>>,
    max_states: usize,
    include_updates: bool,
    max_triggers: usize,
    samples: usize,
    seed: u64,
    randomized: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let b = bounds(agents, None, max_states, include_updates, max_triggers, samples, seed, randomized)?;
    let f = text_formula(formula, &b)?;
    to_py(py, &search::find_countermodel(&f, &b).map_err(err)?)
}

/// Sweeps a schema; `pool` defaults to the variables plus the negation of
/// the first one.
#[pyfunction]
#[pyo3(signature = (schema, *, pool = None, agents = None, vars = None, max_states = 2,
    include_updates = true, max_triggers = 2))]
#[allow(clippy::too_many_arguments)]
fn probe<'py>(
    py: Python<'py>,
    schema: &str,
    pool: Option<Vec<String>>,
    agents: Option<Vec<String>>,
    vars: Option<Vec<String>>,
    max_states: usize,
    include_updates: bool,
    max_triggers: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let b = bounds(agents, vars, max_states, include_updates, max_triggers, 1000, 0, false)?;
    let report = match pool {
        None => search::probe_schema(schema, &b).map_err(err)?,
        Some(items) => {
            let s = proofs::schema(schema).ok_or_else(|| err(format!("unknown schema `{schema}`")))?;
            let items = items
                .iter()
                .map(|t| text_formula(t, &b))
                .collect::<PyResult<Vec<_>>>()?;
            search::probe_schema_with_pool(&s, &b, &items).map_err(err)?
        }
    };
    to_py(py, &report)
}

/// Checks a proof document. Malformed documents raise; rejected proofs
/// come back with `ok` false.
#[pyfunction]
#[pyo3(signature = (document, agents = None))]
fn check_proof<'py>(
    py: Python<'py>,
    document: &str,
    agents: Option<Vec<String>>,
) -> PyResult<Bound<'py, PyAny>> {
    let proof = Proof::from_json(document, &universe(agents)?).map_err(err)?;
    let result = check(&proof);
    to_py(
        py,
        &json!({
            "ok": result.is_ok(),
            "conclusion": proof.conclusion().map(fdekit::print),
            "error": result.err().map(|e| e.to_string()),
        }),
    )
}

/// Builds the canonical model and checks the truth lemma. `oracle` is
/// `"propositional"` or `"bounded"`.
#[pyfunction]
#[pyo3(signature = (formula, *, oracle = "propositional", agents = None, max_states = 3))]
fn canonical<'py>(
    py: Python<'py>,
    formula: &str,
    oracle: &str,
    agents: Option<Vec<String>>,
    max_states: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let u = universe(agents.clone())?;
    let f = fdekit::parse(formula, &u).map_err(err)?;
    let oracle: Box<dyn ProvabilityOracle> = match oracle {
        "propositional" => Box::new(propositional_oracle()),
        "bounded" => Box::new(bounded_oracle(
            bounds(agents, None, max_states, true, 2, 1000, 0, false)?,
            &[],
        )),
        other => return Err(err(format!("unknown oracle `{other}`"))),
    };
    let cm = build_canonical_model(&f, oracle.as_ref(), &u, DEFAULT_PARTITION_CAP).map_err(err)?;
    let lemma = verify_truth_lemma(&cm).map_err(err)?;
    to_py(
        py,
        &json!({
            "model": cm.to_doc(),
            "model_valid": validate_model(&cm.model).is_ok(),
            "truth_lemma": lemma,
        }),
    )
}

#[pymodule]
fn fdekit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(parse, m)?)?;
    m.add_function(wrap_pyfunction!(print_formula, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(countermodel, m)?)?;
    m.add_function(wrap_pyfunction!(probe, m)?)?;
    m.add_function(wrap_pyfunction!(check_proof, m)?)?;
    m.add_function(wrap_pyfunction!(canonical, m)?)?;
    Ok(())
}
