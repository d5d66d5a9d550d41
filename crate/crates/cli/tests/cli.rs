mod common;

use std::process::Command;

use noether_cli::{ProblemFile, EXIT_OK, EXIT_SOLVER, EXIT_USAGE, EXIT_VERIFY};

use common::*;

#[test]
fn json_output_is_stable_under_reserialization() {
    for f in ["car.ocp", "heisenberg.ocp", "kepler.cv", "thomasfermi.cv"] {
        for cmd in ["symmetry", "noether", "verify"] {
            let file = corpus(f);
            let mut args = vec![cmd, file.as_str(), "--json"];
            if cmd == "verify" {
                args.extend_from_slice(verify_span(f));
            }
            let o = noether(&args);
            let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap_or_else(|e| panic!("{cmd} {f}: {e}"));
            let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
            assert_eq!(again, o.stdout, "{cmd} {f}");
            for key in ["problem", "family", "laws", "verification", "genericity_assumptions"] {
                assert!(v.get(key).is_some(), "{cmd} {f}: missing `{key}`");
            }
        }
    }
}

#[test]
fn json_marks_uncomputed_sections_null() {
    let o = noether(&["symmetry", &corpus("car.ocp"), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert!(v["laws"].is_null());
    assert!(v["verification"].is_null());
    assert_eq!(v["family"]["dimension"], 4);
}

#[test]
fn runs_are_deterministic() {
    for f in ["car.ocp", "kepler.cv", "cartan.ocp"] {
        let file = corpus(f);
        for args in [vec!["symmetry", file.as_str()], vec!["verify", file.as_str(), "--seed", "9", "--trials", "2"]] {
            assert_eq!(noether(&args), noether(&args), "{args:?}");
        }
    }
}

#[test]
fn corpus_files_round_trip() {
    for f in corpus_files() {
        let src = std::fs::read_to_string(corpus_dir().join(&f)).unwrap();
        let Ok(pf) = ProblemFile::parse(&src) else {
            assert_eq!(f, "abstract.ocp");
            continue;
        };
        let back = ProblemFile::parse(&pf.render()).unwrap();
        assert_eq!(back, pf, "{f}");
        assert_eq!(back.render(), pf.render(), "{f}");
        pf.to_problem().unwrap();
    }
}

#[test]
fn reduced_files_parse_back() {
    for f in corpus_files().into_iter().filter(|f| f.ends_with(".cv")) {
        let o = noether(&["reduce", &corpus(&f)]);
        assert_eq!(o.code, EXIT_OK, "{f}");
        let pf = ProblemFile::parse(&o.stdout).unwrap();
        pf.to_problem().unwrap();
    }
}

fn binary(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_noether")).current_dir(env!("CARGO_MANIFEST_DIR")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn exit_codes() {
    assert_eq!(binary(&["symmetry", "corpus/car.ocp"]).0, EXIT_OK);
    assert_eq!(binary(&["verify", "corpus/mintime4.ocp"]).0, EXIT_OK);
    assert_eq!(binary(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(binary(&["symmetry", "corpus/absent.ocp"]).0, EXIT_USAGE);
    assert_eq!(binary(&["symmetry", "corpus/abstract.ocp"]).0, EXIT_USAGE);
    assert_eq!(binary(&["noether", "corpus/car.ocp", "--set", "C9=1"]).0, EXIT_USAGE);
    assert_eq!(binary(&["symmetry", "corpus/martinet.ocp", "--assume", "beta!=0"]).0, EXIT_USAGE);
    // t = 0 is singular for this extremal field, so no initial point is admissible.
    assert_eq!(binary(&["verify", "corpus/scalar_exp.ocp"]).0, EXIT_SOLVER);
    assert_eq!(binary(&["verify", "corpus/car.ocp", "--tol", "1e-40"]).0, EXIT_VERIFY);
}

#[test]
fn singular_control_is_skipped() {
    let o = noether(&["verify", &corpus("mintime4.ocp")]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("symbolic: residual zero"));
    assert!(o.stdout.contains("numeric: skipped: singular control"));
}

#[test]
fn partially_eliminable_multipliers_exit_with_solver_code() {
    let o = noether(&["verify", &corpus("higher_order.cv")]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let n = noether(&["noether", &corpus("higher_order.cv")]);
    assert_eq!(n.code, EXIT_OK);
    assert!(n.stdout.contains("kept)"), "{}", n.stdout);
}

fn write_temp(name: &str, body: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("noether-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn diagnostics_name_the_location() {
    let p = write_temp("undeclared.ocp", "kind optimal_control\ntime t\nstate x\ncontrol u\nL = u^2 + y\ndx = u\n");
    let o = noether(&["symmetry", p.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains(":5:") && o.stderr.contains("`y`") && o.stderr.contains("column 11"), "{}", o.stderr);

    let p = write_temp("syntax.ocp", "kind optimal_control\ntime t\nstate x\ncontrol u\nL = u^2 +\ndx = u\n");
    let o = noether(&["symmetry", p.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains(":5:"), "{}", o.stderr);

    let p = write_temp("missing.ocp", "kind optimal_control\ntime t\nstate x y\ncontrol u\nL = u^2\ndx = u\n");
    let o = noether(&["symmetry", p.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("`dy = ...`"), "{}", o.stderr);
}

#[test]
fn flags_reach_the_engine() {
    let d0 = noether(&["symmetry", &corpus("car.ocp"), "--degree", "0"]);
    assert!(d0.stdout.starts_with("symmetry family of dimension 3 at degree 0"), "{}", d0.stdout);
    let m1 = noether(&["noether", &corpus("car.ocp"), "--psi0", "-1"]);
    assert!(!m1.stdout.contains("psi0"), "{}", m1.stdout);
    let declared = noether(&["symmetry", &corpus("martinet.ocp"), "--assume", "alpha!=0"]);
    assert!(declared.stdout.contains("alpha != 0 (declared)"), "{}", declared.stdout);
    let param = noether(&["verify", &corpus("kepler.cv"), "--param", "K=2", "--trials", "1", "--t1", "1"]);
    assert_eq!(param.code, EXIT_OK, "{}", param.stdout);
}
