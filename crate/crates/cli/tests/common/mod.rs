#![allow(dead_code)]

use std::path::PathBuf;

use noether_cli::{run, Outcome};

pub fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

/// Corpus problem files, sorted by name.
pub fn corpus_files() -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".ocp") || n.ends_with(".cv"))
        .collect();
    v.sort();
    v
}

pub fn supported_files() -> Vec<String> {
    corpus_files().into_iter().filter(|n| n != "abstract.ocp").collect()
}

/// Runs the tool from the crate directory so paths in messages are stable.
pub fn noether(args: &[&str]) -> Outcome {
    std::env::set_current_dir(env!("CARGO_MANIFEST_DIR")).unwrap();
    let mut argv = vec!["noether".to_string()];
    argv.extend(args.iter().map(|a| a.to_string()));
    run(argv)
}

pub fn corpus(name: &str) -> String {
    format!("corpus/{name}")
}

/// Extra `verify` flags for problems whose extremal field is singular at
/// `t = 0`.
pub fn verify_span(name: &str) -> &'static [&'static str] {
    match name {
        "scalar_exp.ocp" | "emden_fowler.cv" | "tvdot.cv" | "thomasfermi.cv" => &["--t0", "1", "--t1", "11"],
        _ => &[],
    }
}
