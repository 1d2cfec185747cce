#![allow(dead_code)]

pub mod mutants;

use std::path::PathBuf;

use viewcheck::erase::erase_program;
use viewcheck::runtime::{Machine, Mode, Outcome};
use viewcheck::{CheckedProgram, Options};

/// The corpus root; `VIEWCHECK_CORPUS` overrides the in-tree directory.
pub fn corpus_dir() -> PathBuf {
    match std::env::var_os("VIEWCHECK_CORPUS") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus"),
    }
}

pub fn read(name: &str) -> String {
    let p = corpus_dir().join(format!("{name}.vats"));
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Every `.vats` file directly in the corpus directory, by stem.
pub fn corpus_files() -> Vec<String> {
    let mut out: Vec<String> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "vats")
                .then(|| p.file_stem().unwrap().to_string_lossy().into_owned())
        })
        .collect();
    out.sort();
    out
}

pub fn check(src: &str) -> CheckedProgram {
    CheckedProgram::from_source(src, Options::default()).expect("parses")
}

pub fn check_ok(name: &str) -> CheckedProgram {
    let c = check(&read(name));
    assert!(c.ok(), "{name}: {:?}", c.diagnostics);
    c
}

/// Runs main in the given mode and returns the machine and its outcome.
pub fn run<'a>(c: &'a CheckedProgram, mode: Mode, fuel: u64) -> (Machine<'a>, Outcome) {
    let (funs, main) = match mode {
        Mode::Erased => {
            let e = erase_program(&c.program);
            (e.funs, e.main.expect("main"))
        }
        Mode::Instrumented => (
            c.program.funs.clone(),
            c.program.main.clone().expect("main"),
        ),
    };
    let mut m = Machine::new(&c.program.env, &funs, mode, main);
    let out = m.run(fuel, &mut |_, _| {});
    (m, out)
}

/// Cell contents as printed values, in address order.
pub fn cells(m: &Machine) -> Vec<String> {
    m.store.iter().map(|(_, v)| v.to_string()).collect()
}
