#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::path::PathBuf;

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .join("corpus")
}

pub fn load_corpus_automaton(name: &str) -> ada_core::automaton::Automaton {
    let path = corpus_dir().join(name);
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("reading {}: {}", path.display(), e));
    ada_core::syntax::parse_automaton(&text)
        .unwrap_or_else(|e| panic!("parsing {}: {}", path.display(), e))
}
