mod common;

use std::fmt::Write as _;
use std::path::Path;

use common::*;

fn transcript(args: &[&str]) -> String {
    let o = noether(args);
    let mut s = String::new();
    writeln!(s, "$ noether {}", args.join(" ")).unwrap();
    writeln!(s, "exit {}", o.code).unwrap();
    s.push_str("--- stdout\n");
    s.push_str(&o.stdout);
    s.push_str("--- stderr\n");
    s.push_str(&o.stderr);
    s
}

/// Compares against `corpus/expected/<name>`; `NOETHER_BLESS=1` rewrites.
fn check(name: &str, args: &[&str]) {
    let got = transcript(args);
    let path = corpus_dir().join("expected").join(name);
    if std::env::var_os("NOETHER_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {}", path.display()));
    assert_eq!(got, want, "output of `noether {}` differs from {}", args.join(" "), path.display());
}

fn stem(file: &str) -> &str {
    Path::new(file).file_stem().unwrap().to_str().unwrap()
}

#[test]
fn symmetry_goldens() {
    for f in corpus_files() {
        check(&format!("{}.symmetry.txt", stem(&f)), &["symmetry", &corpus(&f)]);
    }
}

#[test]
fn noether_goldens() {
    for f in corpus_files() {
        check(&format!("{}.noether.txt", stem(&f)), &["noether", &corpus(&f)]);
    }
}

#[test]
fn verify_goldens() {
    for f in supported_files() {
        let file = corpus(&f);
        let mut args = vec!["verify", file.as_str()];
        args.extend_from_slice(verify_span(&f));
        check(&format!("{}.verify.txt", stem(&f)), &args);
    }
}

#[test]
fn reduce_goldens() {
    for f in corpus_files().into_iter().filter(|f| f.ends_with(".cv")) {
        check(&format!("{}.reduce.txt", stem(&f)), &["reduce", &corpus(&f)]);
    }
}

#[test]
fn specialized_and_json_goldens() {
    let car = corpus("car.ocp");
    check("car.noether-c1.txt", &["noether", &car, "--set", "C1=1", "--set", "C2=0", "--set", "C3=0", "--set", "C4=0"]);
    check("car.symmetry.json", &["symmetry", &car, "--json"]);
    check("car.verify.json", &["verify", &car, "--json"]);
    check("damped_oscillator.noether.json", &["noether", &corpus("damped_oscillator.cv"), "--json"]);
    check("martinet.symmetry-maple.txt", &["symmetry", &corpus("martinet.ocp"), "--deps", "maple", "--degree", "1"]);
}
