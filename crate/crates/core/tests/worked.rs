mod common;

use noether_core::determine::{is_in_span, verify_symmetry, Generator};
use noether_core::noether::{conservation_law, generator_law};
use noether_core::ocp::{eliminate_controls, extremal_rhs, reduce_cv, Psi0Mode};
use noether_core::Expr;

use common::*;

fn gen(n: usize, m: usize, comps: &[(&str, &str)]) -> Generator {
    let mut g = Generator::zero(n, m);
    for (k, v) in comps {
        let (head, idx) = k.split_at(k.find(|c: char| c.is_ascii_digit()).unwrap_or(k.len()));
        let i = idx.parse::<usize>().map(|i| i - 1).unwrap_or(0);
        match head {
            "T" => g.t = e(v),
            "X" => g.x[i] = e(v),
            "U" => g.u[i] = e(v),
            "Psi" => g.psi[i] = e(v),
            _ => unreachable!(),
        }
    }
    g
}

fn all_same(got: &[Expr], want: &[&str]) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| same(g, &e(w)))
}

#[test]
fn determining_systems_have_two_n_plus_one_equations() {
    for (p, count) in [(scalar_exp(), 3), (car(), 7), (cartan(), 11)] {
        assert_eq!(system(&p, Psi0Mode::Symbolic, 2).equations.len(), count);
    }
}

#[test]
fn altered_car_generator_is_rejected() {
    let p = car();
    let sys = system(&p, Psi0Mode::Symbolic, 2);
    let good = gen(3, 2, &[("X1", "-x2"), ("X2", "x1"), ("X3", "1"), ("Psi1", "-psi2"), ("Psi2", "psi1")]);
    let bad = gen(3, 2, &[("X1", "-x2"), ("X2", "x1"), ("X3", "2"), ("Psi1", "-psi2"), ("Psi2", "psi1")]);
    assert!(verify_symmetry(&sys, &good).unwrap().is_zero());
    assert!(!verify_symmetry(&sys, &bad).unwrap().is_zero());
}

#[test]
fn coupled_oscillators_rotate_states_and_velocities_together() {
    let p = cubic4();
    for (mode, u1, u2) in [(Psi0Mode::Symbolic, "psi4/(2*psi0)", "-psi3/(2*psi0)"), (Psi0Mode::MinusOne, "-psi4/2", "psi3/2")] {
        let (sys, fam) = solve(&p, mode);
        let g = gen(
            4,
            2,
            &[
                ("X1", "-x2"),
                ("X2", "x1"),
                ("X3", "-x4"),
                ("X4", "x3"),
                ("U1", u1),
                ("U2", u2),
                ("Psi1", "-psi2"),
                ("Psi2", "psi1"),
                ("Psi3", "-psi4"),
                ("Psi4", "psi3"),
            ],
        );
        assert!(verify_symmetry(&sys, &g).unwrap().is_zero());
        assert!(is_in_span(&fam, &g).unwrap());
        let law = generator_law(&p, &p.multipliers(mode), &g).unwrap();
        assert!((law - e("-x2*psi1 + x1*psi2 - x4*psi3 + x3*psi4").to_poly().unwrap()).is_identically_zero());
    }
}

#[test]
fn time_translation_is_not_a_thomas_fermi_symmetry() {
    let p = reduce_cv(&thomas_fermi_cv());
    let (sys, fam) = solve(&p, Psi0Mode::MinusOne);
    let g = gen(1, 1, &[("T", "1")]);
    assert!(!verify_symmetry(&sys, &g).unwrap().is_zero());
    assert!(!is_in_span(&fam, &g).unwrap());
    let law = conservation_law(&p, &p.multipliers(Psi0Mode::MinusOne), &fam).unwrap();
    assert!(law.is_zero().unwrap());
}

#[test]
fn cartan_controls() {
    let p = cartan();
    let u = eliminate_controls(&p, &p.multipliers(Psi0Mode::MinusOne)).unwrap();
    assert!(all_same(&u, &["psi1", "x1*x2*psi5 + psi2 + x1*psi3 + x1^2*psi4/2"]));
}

#[test]
fn heisenberg_extremal_field() {
    let p = heisenberg();
    let mult = p.multipliers(Psi0Mode::MinusOne);
    let u = eliminate_controls(&p, &mult).unwrap();
    let (xdot, psidot) = extremal_rhs(&p, &mult, Some(&u)).unwrap();
    assert!(all_same(&xdot, &["psi1", "psi2 + x1*psi3", "(psi2 + x1*psi3)*x1"]));
    assert!(all_same(&psidot, &["-(psi2 + x1*psi3)*psi3", "0", "0"]));
}

#[test]
fn quadratic_cost_of_a_pure_integrator() {
    let p = ocp(&["x"], &["u"], vec![], "u^2", &["u"]);
    let mult = p.multipliers(Psi0Mode::MinusOne);
    let u = eliminate_controls(&p, &mult).unwrap();
    assert!(all_same(&u, &["psi/2"]));
    let (xdot, psidot) = extremal_rhs(&p, &mult, Some(&u)).unwrap();
    assert!(all_same(&xdot, &["psi/2"]) && all_same(&psidot, &["0"]));
}
