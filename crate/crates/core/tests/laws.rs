mod common;

use std::collections::BTreeMap;

use noether_core::checker::{drift_check, run_trials, CheckConfig, CheckError, ExtremalSystem, Sampler};
use noether_core::expr::{is_zero, DomainPolicy};
use noether_core::noether::{basis_laws, conservation_law, flow_derivative, to_cv_notation, MultiplierSource, NoetherError};
use noether_core::ocp::{eliminate_controls, reduce_cv, OCProblem, ProblemError, Psi0Mode};
use noether_core::{Expr, Symbol};

use common::*;

const TOL: f64 = 1e-8;

fn unit_params(p: &OCProblem) -> BTreeMap<Symbol, f64> {
    p.param_symbols().into_iter().map(|s| (s, 1.0)).collect()
}

fn extremal_system(p: &OCProblem) -> ExtremalSystem {
    let mult = p.multipliers(Psi0Mode::MinusOne);
    let u = eliminate_controls(p, &mult).unwrap();
    ExtremalSystem::new(p, &mult, &u, &unit_params(p), DomainPolicy::default()).unwrap()
}

/// Problems whose extremal fields are singular at `t = 0`.
fn span_for(name: &str) -> (f64, f64) {
    match name {
        "scalar_exp" | "emden_fowler" | "tvdot" => (1.0, 11.0),
        _ => (0.0, 10.0),
    }
}

#[test]
fn laws_are_constant_along_the_symbolic_flow() {
    for (name, p, mode) in eliminable() {
        let (_, fam) = solve(&p, mode);
        let mult = p.multipliers(mode);
        let u = eliminate_controls(&p, &mult).unwrap();
        for (c, law) in fam.constants.iter().zip(basis_laws(&p, &mult, &fam).unwrap()) {
            let d = flow_derivative(&p, &mult, Some(&u), &law).unwrap();
            assert!(is_zero(&d).unwrap(), "{name} {c}: dC/dt = {}", noether_core::expr::render(&d));
        }
    }
}

#[test]
fn singular_problems_are_reported() {
    let p = mintime3();
    let mult = p.multipliers(Psi0Mode::Symbolic);
    assert_eq!(eliminate_controls(&p, &mult), Err(ProblemError::SingularControl));
}

#[test]
fn rk4_matches_the_exact_harmonic_flow() {
    let p = reduce_cv(&cv(&["x"], 1, vec![], "D(x,1)^2/2 - x^2/2"));
    let sys = extremal_system(&p);
    let tr = sys.integrate(&[1.0, 0.0], 0.0, 10.0, 1e-3).unwrap();
    for (t, y) in tr.times.iter().zip(&tr.points).step_by(500) {
        assert!((y[0] - t.cos()).abs() < 1e-10, "x({t})");
        assert!((y[1] + t.sin()).abs() < 1e-10, "psi({t})");
    }
}

#[test]
fn rk4_drift_shrinks_at_fourth_order_on_kepler() {
    let p = reduce_cv(&kepler_cv());
    let sys = extremal_system(&p);
    let energy = sys.compile_law(&p.hamiltonian(&p.multipliers(Psi0Mode::MinusOne)).unwrap()).unwrap();
    let y0 = [1.0, 0.0, 0.0, 0.9];
    let drift = |h: f64| {
        let tr = sys.integrate(&y0, 0.0, 10.0, h).unwrap();
        drift_check(&sys, "H", &energy, &tr, TOL).unwrap().max_abs_drift
    };
    let (coarse, fine) = (drift(0.02), drift(0.01));
    let ratio = coarse / fine;
    assert!((8.0..=32.0).contains(&ratio), "drift {coarse:e} -> {fine:e}, ratio {ratio}");
}

#[test]
fn hamiltonian_is_conserved_numerically() {
    for (name, p, _) in eliminable() {
        if !p.is_autonomous().unwrap() {
            continue;
        }
        let sys = extremal_system(&p);
        let h = p.hamiltonian(&p.multipliers(Psi0Mode::MinusOne)).unwrap();
        let (t0, t1) = span_for(name);
        let cfg = CheckConfig { t0, t1, ..CheckConfig::default() };
        for trial in run_trials(&sys, &[("H".into(), h)], &cfg).unwrap() {
            let r = &trial.reports[0];
            assert!(r.pass, "{name}: relative drift {:e}", r.relative_drift);
        }
    }
}

#[test]
fn every_basis_law_passes_the_drift_check() {
    for (name, p, _) in eliminable() {
        let (_, fam) = solve(&p, Psi0Mode::MinusOne);
        let mult = p.multipliers(Psi0Mode::MinusOne);
        let laws: Vec<(String, Expr)> =
            fam.constants.iter().map(|c| c.to_string()).zip(basis_laws(&p, &mult, &fam).unwrap()).collect();
        let sys = extremal_system(&p);
        let (t0, t1) = span_for(name);
        let cfg = CheckConfig { t0, t1, ..CheckConfig::default() };
        let trials = run_trials(&sys, &laws, &cfg).unwrap();
        assert_eq!(trials.len(), 5);
        for trial in trials {
            for r in trial.reports {
                assert!(r.pass, "{name} {}: relative drift {:e}", r.law, r.relative_drift);
            }
        }
    }
}

#[test]
fn heisenberg_multipliers_stay_constant() {
    let p = heisenberg();
    let sys = extremal_system(&p);
    let y0 = Sampler::new(42).draw(2 * p.n());
    let tr = sys.integrate(&y0, 0.0, 5.0, 1e-3).unwrap();
    // Layout is (x1, x2, x3, psi1, psi2, psi3).
    for y in &tr.points {
        assert!((y[4] - y0[4]).abs() < 1e-14 && (y[5] - y0[5]).abs() < 1e-14);
    }
}

#[test]
fn kepler_energy_is_conserved_on_a_bounded_orbit() {
    let p = reduce_cv(&kepler_cv());
    let sys = extremal_system(&p);
    let energy = sys.compile_law(&p.hamiltonian(&p.multipliers(Psi0Mode::MinusOne)).unwrap()).unwrap();
    let tr = sys.integrate(&[1.0, 0.0, 0.0, 0.9], 0.0, 10.0, 1e-3).unwrap();
    assert!(drift_check(&sys, "H", &energy, &tr, TOL).unwrap().pass);
    let zero = sys.compile_law(&Expr::zero()).unwrap();
    let r = drift_check(&sys, "0", &zero, &tr, TOL).unwrap();
    assert!(r.pass && r.max_abs_drift == 0.0);
}

#[test]
fn a_corrupted_law_fails() {
    let p = car();
    let sys = extremal_system(&p);
    let good = e("-x2*psi1 + x1*psi2 + psi3");
    let perturbed = e("-x2*psi1 + x1*psi2 + psi3 + x1/1000");
    let dropped = e("-x2*psi1 + psi3");
    let cfg = CheckConfig::default();
    let laws = [("good".into(), good), ("perturbed".into(), perturbed), ("dropped".into(), dropped)];
    let trials = run_trials(&sys, &laws, &cfg).unwrap();
    assert!(trials.iter().all(|t| t.reports[0].pass));
    assert!(trials.iter().any(|t| !t.reports[1].pass));
    assert!(trials.iter().all(|t| t.reports[2].relative_drift > 1e3 * TOL));
}

#[test]
fn trials_are_deterministic() {
    let p = heisenberg();
    let sys = extremal_system(&p);
    let laws = vec![("psi3".to_string(), e("psi3")), ("psi2".to_string(), e("psi2"))];
    let cfg = CheckConfig { t1: 2.0, ..CheckConfig::default() };
    assert_eq!(run_trials(&sys, &laws, &cfg).unwrap(), run_trials(&sys, &laws, &cfg).unwrap());
    let other = CheckConfig { seed: 7, ..cfg.clone() };
    assert_ne!(run_trials(&sys, &laws, &cfg).unwrap()[0].initial_point, run_trials(&sys, &laws, &other).unwrap()[0].initial_point);
}

#[test]
fn singular_starting_time_exhausts_the_draws() {
    let p = scalar_exp();
    let sys = extremal_system(&p);
    let cfg = CheckConfig::default();
    assert_eq!(run_trials(&sys, &[("x".into(), e("x"))], &cfg), Err(CheckError::NoAdmissiblePoint(cfg.max_draws)));
}

#[test]
fn zero_coefficient_laws_vanish_and_specialize() {
    let p = car();
    let (_, fam) = solve(&p, Psi0Mode::Symbolic);
    let mult = p.multipliers(Psi0Mode::Symbolic);
    let law = conservation_law(&p, &mult, &fam).unwrap();
    let zero = law.specialize(&bind(&[("C1", "0"), ("C2", "0"), ("C3", "0"), ("C4", "0")])).unwrap();
    assert!(zero.is_zero().unwrap());
    assert!(zero.constants.is_empty());
    assert!(matches!(law.specialize(&bind(&[("C9", "1")])), Err(NoetherError::UnknownConstant(_))));
}

#[test]
fn stationarity_requires_every_multiplier() {
    let vp = higher_order_cv();
    let p = reduce_cv(&vp);
    let (_, fam) = solve(&p, Psi0Mode::MinusOne);
    let mult = p.multipliers(Psi0Mode::MinusOne);
    let law = conservation_law(&p, &mult, &fam).unwrap();
    assert!(matches!(to_cv_notation(&law, &p, &vp, &MultiplierSource::Stationarity), Err(NoetherError::MultipliersRemain(_))));
    let partial = to_cv_notation(&law, &p, &vp, &MultiplierSource::Partial).unwrap();
    let free = partial.expression.to_poly().unwrap().free_symbols();
    assert!(!free.contains(&s("psi3")) && !free.contains(&s("psi4")));
    assert!(free.contains(&s("psi1")));
}
