//! Python bindings: check sources, inspect diagnostics, erase and run.

use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use viewcheck::diag::SourceMap;
use viewcheck::erase::erase_program;
use viewcheck::runtime::{Machine, Mode, Outcome};
use viewcheck::{CheckedProgram, Options};

create_exception!(viewcheck_py, ParseError, PyValueError);
create_exception!(viewcheck_py, TypeError, PyValueError);

#[pyclass(frozen, get_all)]
#[derive(Clone)]
pub struct Diagnostic {
    severity: String,
    rule: String,
    message: String,
    line: usize,
    col: usize,
    constraint: Option<String>,
}

#[pymethods]
impl Diagnostic {
    fn __repr__(&self) -> String {
        format!(
            "{}:{}: {}: [{}] {}",
            self.line, self.col, self.severity, self.rule, self.message
        )
    }
}

impl Diagnostic {
    fn new(d: &viewcheck::Diagnostic, map: &SourceMap) -> Self {
        let (line, col) = map.line_col(d.span.start);
        Diagnostic {
            severity: d.severity.to_string(),
            rule: d.rule.clone(),
            message: d.message.clone(),
            line,
            col,
            constraint: d.constraint.clone(),
        }
    }
}

/// The outcome of evaluating `main`.
#[pyclass(frozen, get_all)]
pub struct RunResult {
    /// One of `value`, `stuck`, `out_of_fuel`.
    status: String,
    value: Option<String>,
    reason: Option<String>,
    steps: u64,
    store: BTreeMap<u64, String>,
}

#[pymethods]
impl RunResult {
    fn __repr__(&self) -> String {
        match &self.value {
            Some(v) => format!("RunResult(value={v}, steps={})", self.steps),
            None => format!("RunResult(status={}, steps={})", self.status, self.steps),
        }
    }
}

/// A parsed and checked program.
#[pyclass(unsendable)]
pub struct Program {
    checked: CheckedProgram,
    map: SourceMap,
}

#[pymethods]
impl Program {
    #[getter]
    fn ok(&self) -> bool {
        self.checked.ok()
    }

    #[getter]
    fn diagnostics(&self) -> Vec<Diagnostic> {
        self.checked
            .diagnostics
            .iter()
            .map(|d| Diagnostic::new(d, &self.map))
            .collect()
    }

    #[getter]
    fn main_type(&self) -> Option<String> {
        self.checked.main_type.as_ref().map(|t| t.to_string())
    }

    #[getter]
    fn functions(&self) -> Vec<String> {
        self.checked
            .program
            .funs
            .iter()
            .map(|f| f.sig.name.to_string())
            .collect()
    }

    /// The erased program in surface syntax.
    fn erase(&self) -> PyResult<String> {
        self.require_ok()?;
        Ok(erase_program(&self.checked.program).pretty())
    }

    /// Evaluates `main`; `None` if there is none.
    #[pyo3(signature = (fuel = 1_000_000, instrumented = false))]
    fn run(&self, fuel: u64, instrumented: bool) -> PyResult<Option<RunResult>> {
        self.require_ok()?;
        let p = &self.checked.program;
        let (funs, main, mode) = if instrumented {
            let Some(m) = p.main.clone() else {
                return Ok(None);
            };
            (p.funs.clone(), m, Mode::Instrumented)
        } else {
            let e = erase_program(p);
            let Some(m) = e.main else { return Ok(None) };
            (e.funs, m, Mode::Erased)
        };
        let mut m = Machine::new(&p.env, &funs, mode, main);
        let outcome = m.run(fuel, &mut |_, _| {});
        let (status, value, reason) = match outcome {
            Outcome::Value(v) => ("value", Some(v.to_string()), None),
            Outcome::Stuck(s) => ("stuck", None, Some(s.reason.to_string())),
            Outcome::OutOfFuel => ("out_of_fuel", None, None),
        };
        Ok(Some(RunResult {
            status: status.into(),
            value,
            reason,
            steps: m.steps,
            store: m.store.iter().map(|(l, v)| (l, v.to_string())).collect(),
        }))
    }
}

impl Program {
    fn require_ok(&self) -> PyResult<()> {
        match self.checked.diagnostics.first() {
            None => Ok(()),
            Some(d) => Err(TypeError::new_err(Diagnostic::new(d, &self.map).__repr__())),
        }
    }
}

/// Parses and checks a source string. Raises `ParseError` on syntax errors;
/// type errors are reported through `Program.diagnostics`.
#[pyfunction]
#[pyo3(signature = (source, explain_constraints = false))]
fn check(source: &str, explain_constraints: bool) -> PyResult<Program> {
    let map = SourceMap::new(source);
    let opts = Options {
        explain_constraints,
        trace_proofs: false,
    };
    match CheckedProgram::from_source(source, opts) {
        Ok(checked) => Ok(Program { checked, map }),
        Err(d) => Err(ParseError::new_err(Diagnostic::new(&d, &map).__repr__())),
    }
}

#[pyfunction]
fn check_file(path: &str) -> PyResult<Program> {
    let src = std::fs::read_to_string(path).map_err(|e| PyOSError::new_err(e.to_string()))?;
    check(&src, false)
}

#[pymodule]
fn viewcheck_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_class::<Diagnostic>()?;
    m.add_class::<RunResult>()?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("TypeError", m.py().get_type::<TypeError>())?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(check_file, m)?)?;
    Ok(())
}
