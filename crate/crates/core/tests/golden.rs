//! Pinned diagnostics for the mutation suite. Run with `UPDATE_GOLDEN=1` to
//! rewrite `corpus/mutants/expected.txt` after an intended change.

mod common;

use viewcheck::diag::SourceMap;
use viewcheck::{CheckedProgram, Options};

fn render_all() -> String {
    let mut out = String::new();
    for m in common::mutants::load() {
        let map = SourceMap::new(&m.source);
        let file = format!("{}.vats", m.base);
        out.push_str(&format!("[{}]\n", m.id));
        match CheckedProgram::from_source(&m.source, Options::default()) {
            Err(d) => out.push_str(&d.render(&file, &map)),
            Ok(c) if c.ok() => out.push_str("accepted"),
            Ok(c) => {
                let lines: Vec<String> = c
                    .diagnostics
                    .iter()
                    .map(|d| d.render(&file, &map))
                    .collect();
                out.push_str(&lines.join("\n"));
            }
        }
        out.push_str("\n\n");
    }
    out
}

#[test]
fn mutant_diagnostics_match_golden_file() {
    let path = common::corpus_dir().join("mutants/expected.txt");
    let got = render_all();
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).expect("write golden file");
        return;
    }
    let want = std::fs::read_to_string(&path).expect("golden file; run with UPDATE_GOLDEN=1");
    for (i, (g, w)) in got.lines().zip(want.lines()).enumerate() {
        assert_eq!(g, w, "first difference at line {}", i + 1);
    }
    assert_eq!(
        got.lines().count(),
        want.lines().count(),
        "line counts differ"
    );
}
