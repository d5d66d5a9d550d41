#![allow(dead_code)]

use std::collections::BTreeMap;

use noether_core::determine::{build_determining_system, solve_symmetries, DeterminingSystem, GeneratorSpec, SymmetryFamily};
use noether_core::expr::{parse, parse_with, ParseOptions};
use noether_core::ocp::{reduce_cv, OCProblem, Param, Psi0Mode, VariationalProblem};
use noether_core::{Expr, Symbol};

pub fn s(name: &str) -> Symbol {
    Symbol::new(name)
}

pub fn e(src: &str) -> Expr {
    parse_with(src, ParseOptions { derivative_notation: true }).unwrap_or_else(|err| panic!("{src}: {err}"))
}

pub fn ocp(states: &[&str], controls: &[&str], params: Vec<Param>, l: &str, f: &[&str]) -> OCProblem {
    OCProblem::new(
        s("t"),
        states.iter().map(|x| s(x)).collect(),
        controls.iter().map(|u| s(u)).collect(),
        params,
        parse(l).unwrap(),
        f.iter().map(|d| parse(d).unwrap()).collect(),
    )
    .unwrap()
}

pub fn cv(deps: &[&str], order: u32, params: Vec<Param>, l: &str) -> VariationalProblem {
    VariationalProblem::new(s("t"), deps.iter().map(|x| s(x)).collect(), order, params, e(l)).unwrap()
}

pub fn car() -> OCProblem {
    ocp(&["x1", "x2", "x3"], &["u1", "u2"], vec![], "u1^2 + u2^2", &["u1*cos(x3)", "u1*sin(x3)", "u2"])
}

pub fn scalar_exp() -> OCProblem {
    ocp(&["x"], &["u"], vec![], "exp(t*x)*u", &["t*x*u^2"])
}

pub fn heisenberg() -> OCProblem {
    ocp(&["x1", "x2", "x3"], &["u1", "u2"], vec![], "(u1^2 + u2^2)/2", &["u1", "u2", "u2*x1"])
}

pub fn cartan() -> OCProblem {
    ocp(
        &["x1", "x2", "x3", "x4", "x5"],
        &["u1", "u2"],
        vec![],
        "(u1^2 + u2^2)/2",
        &["u1", "u2", "u2*x1", "u2*x1^2/2", "u2*x1*x2"],
    )
}

pub fn martinet_flat() -> OCProblem {
    ocp(&["x1", "x2", "x3"], &["u1", "u2"], vec![], "u1^2 + u2^2", &["u1", "u2", "x2^2*u1"])
}

pub fn martinet() -> OCProblem {
    ocp(&["x1", "x2", "x3"], &["u1", "u2"], vec![Param::new(s("alpha"))], "u1^2 + u2^2", &["u1", "u2/(1 + alpha*x1)", "x2^2*u1"])
}

pub fn mintime3() -> OCProblem {
    ocp(&["x", "y", "z"], &["u"], vec![], "1", &["1 + y^2 - z^2", "z", "u"])
}

pub fn chained4() -> OCProblem {
    ocp(&["x1", "x2", "x3", "x4"], &["u1", "u2"], vec![], "u1^2 + u2^2", &["u1*(1 + x2)", "u1*x3", "u2", "u1*x3^2"])
}

pub fn cubic4() -> OCProblem {
    ocp(
        &["x1", "x2", "x3", "x4"],
        &["u1", "u2"],
        vec![],
        "u1^2 + u2^2",
        &["x3", "x4", "-x1*(x1^2 + x2^2) + u1", "-x2*(x1^2 + x2^2) + u2"],
    )
}

pub fn quadratic2() -> OCProblem {
    ocp(&["x", "y"], &["u"], vec![], "u^2", &["1 + y^2", "u"])
}

pub fn kepler_cv() -> VariationalProblem {
    cv(&["q1", "q2"], 1, vec![Param::positive(s("m")), Param::new(s("K"))], "m/2*(D(q1,1)^2 + D(q2,1)^2) + K/sqrt(q1^2 + q2^2)")
}

pub fn emden_fowler_cv() -> VariationalProblem {
    cv(&["x"], 1, vec![], "t^2/2*(D(x,1)^2 - x^6/3)")
}

pub fn thomas_fermi_cv() -> VariationalProblem {
    cv(&["x"], 1, vec![], "D(x,1)^2/2 + 2/5*x^(5/2)/sqrt(t)")
}

pub fn damped_cv() -> VariationalProblem {
    cv(&["x"], 1, vec![Param::positive(s("m")), Param::new(s("k")), Param::new(s("a"))], "(m*D(x,1)^2 - k*x^2)*exp(a*t/m)/2")
}

pub fn tvdot_cv() -> VariationalProblem {
    cv(&["x"], 1, vec![], "t*D(x,1)^2")
}

pub fn higher_order_cv() -> VariationalProblem {
    cv(&["x1", "x2"], 2, vec![], "D(x1,1)^2 + D(x2,2)^2")
}

/// Problems whose stationarity condition determines the controls.
pub fn eliminable() -> Vec<(&'static str, OCProblem, Psi0Mode)> {
    vec![
        ("car", car(), Psi0Mode::Symbolic),
        ("scalar_exp", scalar_exp(), Psi0Mode::Symbolic),
        ("heisenberg", heisenberg(), Psi0Mode::Symbolic),
        ("cartan", cartan(), Psi0Mode::Symbolic),
        ("chained4", chained4(), Psi0Mode::Symbolic),
        ("cubic4", cubic4(), Psi0Mode::Symbolic),
        ("quadratic2", quadratic2(), Psi0Mode::Symbolic),
        ("martinet_flat", martinet_flat(), Psi0Mode::Symbolic),
        ("martinet", martinet(), Psi0Mode::Symbolic),
        ("kepler", reduce_cv(&kepler_cv()), Psi0Mode::MinusOne),
        ("emden_fowler", reduce_cv(&emden_fowler_cv()), Psi0Mode::MinusOne),
        ("damped_oscillator", reduce_cv(&damped_cv()), Psi0Mode::MinusOne),
        ("tvdot", reduce_cv(&tvdot_cv()), Psi0Mode::MinusOne),
    ]
}

pub fn all() -> Vec<(&'static str, OCProblem, Psi0Mode)> {
    let mut v = eliminable();
    v.push(("mintime3", mintime3(), Psi0Mode::Symbolic));
    v.push(("thomas_fermi", reduce_cv(&thomas_fermi_cv()), Psi0Mode::MinusOne));
    v.push(("higher_order", reduce_cv(&higher_order_cv()), Psi0Mode::MinusOne));
    v
}

pub fn system(p: &OCProblem, mode: Psi0Mode, degree: u32) -> DeterminingSystem {
    let spec = GeneratorSpec { degree, ..GeneratorSpec::default() };
    build_determining_system(p, &p.multipliers(mode), &spec).unwrap()
}

pub fn solve(p: &OCProblem, mode: Psi0Mode) -> (DeterminingSystem, SymmetryFamily) {
    let sys = system(p, mode, 2);
    let fam = solve_symmetries(&sys).unwrap();
    (sys, fam)
}

pub fn bind(pairs: &[(&str, &str)]) -> BTreeMap<Symbol, Expr> {
    pairs.iter().map(|(k, v)| (s(k), e(v))).collect()
}

pub fn same(a: &Expr, b: &Expr) -> bool {
    let d = a.to_poly().unwrap() - b.to_poly().unwrap();
    d.is_identically_zero()
}
