//! Subcommand bodies. Each returns the text to print and an exit code, so
//! that files can be checked on worker threads and reported in order.

use std::fmt::Write as _;
use std::path::Path;
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::{json, Value};
use viewcheck::diag::{Diagnostic, SourceMap};
use viewcheck::erase::erase_program;
use viewcheck::runtime::{Machine, Mode, Outcome, StateOracle, Store};
use viewcheck::terms::{DynTerm, FunDef};
use viewcheck::{CheckedProgram, Options};

use crate::{CheckFlags, EvalFlags};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Code {
    Ok = 0,
    TypeError = 1,
    Input = 2,
    Stuck = 3,
    Fuel = 4,
}

#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: Code,
}

impl Output {
    fn new() -> Self {
        Output {
            stdout: String::new(),
            stderr: String::new(),
            code: Code::Ok,
        }
    }

    fn fail(&mut self, code: Code) {
        self.code = self.code.max(code);
    }

    fn append(&mut self, other: Output) {
        self.stdout.push_str(&other.stdout);
        self.stderr.push_str(&other.stderr);
        self.fail(other.code);
    }
}

struct Loaded {
    file: String,
    map: SourceMap,
    checked: CheckedProgram,
}

impl Loaded {
    fn at(&self, offset: usize) -> String {
        let (l, c) = self.map.line_col(offset);
        format!("{l}:{c}")
    }
}

fn diag_json(d: &Diagnostic, map: &SourceMap) -> Value {
    let (line, col) = map.line_col(d.span.start);
    let (end_line, end_col) = map.line_col(d.span.end);
    json!({
        "severity": d.severity,
        "rule": d.rule,
        "message": d.message,
        "line": line,
        "col": col,
        "end_line": end_line,
        "end_col": end_col,
        "constraint": d.constraint,
    })
}

fn report(
    out: &mut Output,
    flags: CheckFlags,
    file: &str,
    status: &str,
    diags: &[Diagnostic],
    map: &SourceMap,
    main_type: Option<String>,
) {
    if flags.json {
        let doc = json!({
            "file": file,
            "status": status,
            "main_type": main_type,
            "diagnostics": diags.iter().map(|d| diag_json(d, map)).collect::<Vec<_>>(),
        });
        let _ = writeln!(out.stdout, "{doc}");
    } else {
        for d in diags {
            let _ = writeln!(out.stderr, "{}", d.render(file, map));
        }
    }
}

/// Reads and checks `path`. On failure the diagnostics are already in
/// `out`. `verbose` also reports files that check.
fn load(path: &Path, flags: CheckFlags, verbose: bool, out: &mut Output) -> Option<Loaded> {
    let file = path.display().to_string();
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            if flags.json {
                let doc = json!({"file": file, "status": "io-error", "message": e.to_string()});
                let _ = writeln!(out.stdout, "{doc}");
            } else {
                let _ = writeln!(out.stderr, "{file}: error: {e}");
            }
            out.fail(Code::Input);
            return None;
        }
    };
    let map = SourceMap::new(&src);
    let opts = Options {
        explain_constraints: flags.explain_constraints,
        trace_proofs: flags.trace_proofs,
    };
    let checked = match CheckedProgram::from_source(&src, opts) {
        Ok(c) => c,
        Err(d) => {
            report(out, flags, &file, "parse-error", &[d], &map, None);
            out.fail(Code::Input);
            return None;
        }
    };
    for e in &checked.explained {
        let (l, c) = map.line_col(e.span.start);
        let verdict = if e.holds { "holds" } else { "fails" };
        let _ = writeln!(
            out.stdout,
            "{file}:{l}:{c}: note: [{}] {} ({verdict})",
            e.rule, e.constraint
        );
    }
    for (sp, s) in &checked.proof_log {
        let (l, c) = map.line_col(sp.start);
        let _ = writeln!(out.stdout, "{file}:{l}:{c}: proof: {s}");
    }
    let main_type = checked.main_type.as_ref().map(|t| t.to_string());
    if !checked.ok() {
        report(
            out,
            flags,
            &file,
            "type-error",
            &checked.diagnostics,
            &map,
            main_type,
        );
        out.fail(Code::TypeError);
        return None;
    }
    if verbose {
        if flags.json {
            report(out, flags, &file, "ok", &[], &map, main_type);
        } else {
            let _ = writeln!(out.stdout, "{file}: ok");
            if let Some(t) = main_type {
                let _ = writeln!(out.stdout, "  main : {t}");
            }
        }
    }
    Some(Loaded { file, map, checked })
}

pub fn check(paths: &[std::path::PathBuf], jobs: usize, flags: CheckFlags) -> Output {
    let one = |p: &Path| {
        let mut out = Output::new();
        load(p, flags, true, &mut out);
        out
    };
    let results: Vec<Output> = if jobs <= 1 || paths.len() <= 1 {
        paths.iter().map(|p| one(p)).collect()
    } else {
        let next = AtomicUsize::new(0);
        let mut slots: Vec<Option<Output>> = (0..paths.len()).map(|_| None).collect();
        std::thread::scope(|s| {
            let workers: Vec<_> = (0..jobs.min(paths.len()))
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::Relaxed);
                            let Some(p) = paths.get(i) else { break };
                            done.push((i, one(p)));
                        }
                        done
                    })
                })
                .collect();
            for w in workers {
                for (i, o) in w.join().expect("checker thread panicked") {
                    slots[i] = Some(o);
                }
            }
        });
        slots
            .into_iter()
            .map(|o| o.expect("every file is checked"))
            .collect()
    };
    let mut out = Output::new();
    for r in results {
        out.append(r);
    }
    out
}

pub fn erase(path: &Path, flags: CheckFlags) -> Output {
    let mut out = Output::new();
    if let Some(l) = load(path, flags, false, &mut out) {
        let e = erase_program(&l.checked.program);
        let text = e.pretty();
        out.stdout.push_str(&text);
        if !text.ends_with('\n') {
            out.stdout.push('\n');
        }
    }
    out
}

fn program_for(l: &Loaded, instrumented: bool) -> Option<(Vec<Rc<FunDef>>, DynTerm, Mode)> {
    let p = &l.checked.program;
    if instrumented {
        Some((p.funs.clone(), p.main.clone()?, Mode::Instrumented))
    } else {
        let e = erase_program(p);
        Some((e.funs, e.main?, Mode::Erased))
    }
}

fn conclude(out: &mut Output, l: &Loaded, m: &Machine, outcome: Outcome, prefix: &str) {
    match outcome {
        Outcome::Value(v) => {
            let _ = writeln!(out.stdout, "{prefix}{v}");
        }
        Outcome::Stuck(s) => {
            let _ = writeln!(
                out.stderr,
                "{}:{}: stuck after {} steps: {}",
                l.file,
                l.at(s.span.start),
                m.steps,
                s.reason
            );
            out.fail(Code::Stuck);
        }
        Outcome::OutOfFuel => {
            let _ = writeln!(
                out.stderr,
                "{}: fuel exhausted after {} steps",
                l.file, m.steps
            );
            out.fail(Code::Fuel);
        }
    }
}

pub fn run(path: &Path, flags: CheckFlags, eval: EvalFlags, dump_store: bool) -> Output {
    let mut out = Output::new();
    let Some(l) = load(path, flags, false, &mut out) else {
        return out;
    };
    let Some((funs, main, mode)) = program_for(&l, eval.instrumented) else {
        out.stdout.push_str("no main\n");
        return out;
    };
    let mut m = Machine::new(&l.checked.program.env, &funs, mode, main);
    let outcome = m.run(eval.fuel, &mut |_, _| {});
    conclude(&mut out, &l, &m, outcome, "");
    if dump_store {
        out.stdout.push_str(&m.store.to_string());
    }
    out
}

/// Store changes between two states, as `ST[l := v]` and `ST - l` lines.
fn store_diff(before: &Store, after: &Store, log: &mut String) {
    for (l, v) in after.iter() {
        if before.read(l) != Some(v) {
            let _ = writeln!(log, "  ST[l_{l} := {v}]");
        }
    }
    for l in before.domain() {
        if !after.contains(l) {
            let _ = writeln!(log, "  ST - l_{l}");
        }
    }
}

pub fn trace(path: &Path, flags: CheckFlags, eval: EvalFlags, check_every: Option<u64>) -> Output {
    let mut out = Output::new();
    let Some(l) = load(path, flags, false, &mut out) else {
        return out;
    };
    let instrumented = eval.instrumented || check_every.is_some();
    let Some((funs, main, mode)) = program_for(&l, instrumented) else {
        out.stdout.push_str("no main\n");
        return out;
    };
    let env = &l.checked.program.env;
    let main_type = l
        .checked
        .main_type
        .clone()
        .expect("checked main has a type");
    let mut oracle = StateOracle::new(env, &main_type);
    let every = check_every.map(|n| n.max(1));
    let mut m = Machine::new(env, &funs, mode, main);
    let mut log = String::new();
    let mut prev = m.store.clone();
    let mut failed = false;
    let outcome = m.run(eval.fuel, &mut |m, info| {
        let _ = writeln!(
            log,
            "step {}: {} @ {}",
            m.steps,
            info.rule,
            l.at(info.span.start)
        );
        store_diff(&prev, &m.store, &mut log);
        prev.clone_from(&m.store);
        if every.is_some_and(|n| m.steps % n == 0) {
            let v = oracle.check(m);
            if v.ok() {
                log.push_str("  oracle: ok\n");
            }
            for x in v.violations.iter().chain(&v.purity) {
                let _ = writeln!(log, "  oracle: violation: {x}");
                failed = true;
            }
        }
    });
    out.stdout.push_str(&log);
    if failed {
        let _ = writeln!(out.stderr, "{}: state oracle reported violations", l.file);
        out.fail(Code::Stuck);
    }
    conclude(&mut out, &l, &m, outcome, "=> ");
    out
}
