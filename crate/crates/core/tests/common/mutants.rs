//! Mutants generated from `corpus/mutants/manifest.txt`.

use viewcheck::diag::Span;
use viewcheck::syntax::parse_program;

pub struct Mutant {
    pub id: String,
    pub base: String,
    pub source: String,
    /// The edit, widened to the top-level declaration that contains it.
    pub region: Span,
}

fn unescape(s: &str) -> String {
    s.replace("\\n", "\n")
}

pub fn load() -> Vec<Mutant> {
    let path = super::corpus_dir().join("mutants/manifest.txt");
    let text = std::fs::read_to_string(&path).expect("mutant manifest");
    let mut out = Vec::new();
    let mut lines = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    while let Some(head) = lines.next() {
        let (id, base) = head
            .strip_prefix('[')
            .and_then(|h| h.split_once("] "))
            .unwrap_or_else(|| panic!("bad mutant header `{head}`"));
        let find = lines
            .next()
            .and_then(|l| l.strip_prefix("- "))
            .expect("`- ` line");
        let replace = lines
            .next()
            .and_then(|l| l.strip_prefix("+ "))
            .expect("`+ ` line");
        let (find, replace) = (unescape(find), unescape(replace));
        let src = super::read(base);
        let start = src
            .find(&find)
            .unwrap_or_else(|| panic!("{id}: `{find}` not in {base}"));
        let source = format!("{}{}{}", &src[..start], replace, &src[start + find.len()..]);
        let edit = Span::new(start, start + replace.len());
        let region = parse_program(&source)
            .ok()
            .and_then(|p| p.decls.iter().map(|d| d.span()).find(|s| s.contains(edit)))
            .unwrap_or(edit);
        out.push(Mutant {
            id: id.to_string(),
            base: base.to_string(),
            source,
            region,
        });
    }
    out
}
