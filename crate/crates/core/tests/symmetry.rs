mod common;

use std::collections::BTreeMap;

use noether_core::determine::{is_in_span, solve_symmetries, span_coefficients, verify_symmetry, Generator};
use noether_core::expr::{normalize, Poly};
use noether_core::noether::generator_law;
use noether_core::ocp::Psi0Mode;
use noether_core::Expr;
use proptest::prelude::*;

use common::*;

fn time_translation(n: usize, m: usize) -> Generator {
    let mut g = Generator::zero(n, m);
    g.t = Expr::one();
    g
}

#[test]
fn zero_generator_is_accepted() {
    for (name, p, mode) in all() {
        let sys = system(&p, mode, 2);
        assert!(verify_symmetry(&sys, &Generator::zero(p.n(), p.m())).unwrap().is_zero(), "{name}");
    }
}

#[test]
fn basis_generators_have_zero_residual() {
    for (name, p, mode) in all() {
        let (sys, fam) = solve(&p, mode);
        for (c, g) in fam.constants.iter().zip(&fam.basis) {
            assert!(verify_symmetry(&sys, g).unwrap().is_zero(), "{name}: {c}");
        }
        assert!(verify_symmetry(&sys, &fam.general).unwrap().is_zero(), "{name}: general member");
    }
}

#[test]
fn autonomous_problems_admit_time_translation() {
    for (name, p, mode) in all() {
        if !p.is_autonomous().unwrap() {
            continue;
        }
        let g = time_translation(p.n(), p.m());
        let (sys, fam) = solve(&p, mode);
        assert!(verify_symmetry(&sys, &g).unwrap().is_zero(), "{name}");
        assert!(is_in_span(&fam, &g).unwrap(), "{name}");
        for degree in [0, 1] {
            let fam = solve_symmetries(&system(&p, mode, degree)).unwrap();
            assert!(is_in_span(&fam, &g).unwrap(), "{name} at degree {degree}");
        }
        let mult = p.multipliers(mode);
        let law = generator_law(&p, &mult, &g).unwrap();
        let h = p.hamiltonian_poly(&mult).unwrap();
        assert!((law + h).is_identically_zero(), "{name}: law of time translation is not -H");
    }
}

#[test]
fn thomas_fermi_has_only_the_zero_family() {
    let p = noether_core::ocp::reduce_cv(&thomas_fermi_cv());
    for degree in 0..=3 {
        let fam = solve_symmetries(&system(&p, Psi0Mode::MinusOne, degree)).unwrap();
        assert_eq!(fam.dimension(), 0, "degree {degree}");
    }
}

#[test]
fn car_family_is_invariant_under_state_permutation() {
    let p = car();
    let q = ocp(&["x2", "x1", "x3"], &["u1", "u2"], vec![], "u1^2 + u2^2", &["u1*sin(x3)", "u1*cos(x3)", "u2"]);
    let (_, fp) = solve(&p, Psi0Mode::Symbolic);
    let (_, fq) = solve(&q, Psi0Mode::Symbolic);
    assert_eq!(fp.dimension(), fq.dimension());
    // Multipliers follow the state order, so psi1 of `q` is psi2 of `p`.
    let swap = bind(&[("psi1", "psi2"), ("psi2", "psi1")]);
    let relabel = |e: &Expr| noether_core::expr::substitute(e, &swap).unwrap();
    for g in &fq.basis {
        let h = Generator {
            t: relabel(&g.t),
            x: vec![relabel(&g.x[1]), relabel(&g.x[0]), relabel(&g.x[2])],
            u: g.u.iter().map(relabel).collect(),
            psi: vec![relabel(&g.psi[1]), relabel(&g.psi[0]), relabel(&g.psi[2])],
        };
        assert!(is_in_span(&fp, &h).unwrap());
    }
}

#[test]
fn span_coefficients_reconstruct_the_candidate() {
    let (_, fam) = solve(&heisenberg(), Psi0Mode::Symbolic);
    let mut g = Generator::zero(3, 2);
    g.x[0] = e("1");
    g.x[2] = e("x2");
    g.psi[1] = e("-psi3");
    let co = span_coefficients(&fam, &g).unwrap().expect("in span");
    for (slot, (_, target)) in g.components().into_iter().enumerate() {
        let mut acc = Poly::zero();
        for (c, b) in co.iter().zip(&fam.basis) {
            acc = acc + c.to_poly().unwrap() * b.components()[slot].1.to_poly().unwrap();
        }
        assert!((acc - target.to_poly().unwrap()).is_identically_zero());
    }
    let mut bad = Generator::zero(3, 2);
    bad.x[0] = e("x3");
    assert!(!is_in_span(&fam, &bad).unwrap());
}

#[test]
fn maple_dependency_mode_contains_the_default_family() {
    use noether_core::determine::{build_determining_system, DepsMode, GeneratorSpec};
    let p = car();
    let mult = p.multipliers(Psi0Mode::Symbolic);
    let (_, small) = solve(&p, Psi0Mode::Symbolic);
    let spec = GeneratorSpec { deps: DepsMode::Maple, ..GeneratorSpec::default() };
    let sys = build_determining_system(&p, &mult, &spec).unwrap();
    assert_eq!(sys.equations.len(), 1 + 2 * p.n() + p.m());
    let big = solve_symmetries(&sys).unwrap();
    for g in &small.basis {
        assert!(is_in_span(&big, g).unwrap());
    }
}

fn combination(fam: &noether_core::determine::SymmetryFamily, k: &[i64]) -> Generator {
    let n = fam.basis[0].x.len();
    let m = fam.basis[0].u.len();
    let mut acc: Vec<Poly> = vec![Poly::zero(); 1 + 2 * n + m];
    for (c, g) in k.iter().zip(&fam.basis) {
        for (i, (_, e)) in g.components().into_iter().enumerate() {
            acc[i] = acc[i].clone() + Poly::integer(*c) * e.to_poly().unwrap();
        }
    }
    let ex: Vec<Expr> = acc.iter().map(|p| normalize(&Expr::from_poly(p)).unwrap()).collect();
    Generator { t: ex[0].clone(), x: ex[1..1 + n].to_vec(), u: ex[1 + n..1 + n + m].to_vec(), psi: ex[1 + n + m..].to_vec() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn integer_combinations_of_the_basis_are_symmetries(k in proptest::collection::vec(-5i64..=5, 7)) {
        for p in [heisenberg(), car()] {
            let (sys, fam) = solve(&p, Psi0Mode::Symbolic);
            let g = combination(&fam, &k[..fam.dimension()]);
            prop_assert!(verify_symmetry(&sys, &g).unwrap().is_zero());
            prop_assert!(is_in_span(&fam, &g).unwrap());
        }
    }
}

#[test]
fn known_generators_of_small_examples_are_in_span() {
    let cases: Vec<(&str, noether_core::ocp::OCProblem, Psi0Mode, Vec<(&str, BTreeMap<&str, &str>)>)> = vec![
        (
            "scalar_exp",
            scalar_exp(),
            Psi0Mode::Symbolic,
            vec![("C1", [("T", "-t"), ("X1", "x"), ("U1", "u"), ("Psi1", "-psi")].into_iter().collect())],
        ),
        (
            "martinet_flat",
            martinet_flat(),
            Psi0Mode::Symbolic,
            vec![(
                "C1",
                [
                    ("T", "2/3*t"),
                    ("X1", "x1/3"),
                    ("X2", "x2/3"),
                    ("X3", "x3"),
                    ("U1", "-u1/3"),
                    ("U2", "-u2/3"),
                    ("Psi1", "-psi1/3"),
                    ("Psi2", "-psi2/3"),
                    ("Psi3", "-psi3"),
                ]
                .into_iter()
                .collect(),
            )],
        ),
    ];
    for (name, p, mode, gens) in cases {
        let (sys, fam) = solve(&p, mode);
        for (label, comps) in gens {
            let mut g = Generator::zero(p.n(), p.m());
            for (k, v) in comps {
                let (head, idx) = k.split_at(k.find(|c: char| c.is_ascii_digit()).unwrap_or(k.len()));
                let i = idx.parse::<usize>().map(|i| i - 1).unwrap_or(0);
                let val = e(v);
                match head {
                    "T" => g.t = val,
                    "X" => g.x[i] = val,
                    "U" => g.u[i] = val,
                    "Psi" => g.psi[i] = val,
                    _ => unreachable!(),
                }
            }
            assert!(verify_symmetry(&sys, &g).unwrap().is_zero(), "{name} {label}");
            assert!(is_in_span(&fam, &g).unwrap(), "{name} {label}");
        }
    }
}
