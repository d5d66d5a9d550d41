//! Optimal control and calculus-of-variations problems.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{Expr, ExprError, Poly, Symbol, VarOrder};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Param {
    pub symbol: Symbol,
    /// Declared strictly positive.
    pub positive: bool,
}

impl Param {
    pub fn new(symbol: Symbol) -> Self {
        Param { symbol, positive: false }
    }

    pub fn positive(symbol: Symbol) -> Self {
        Param { symbol, positive: true }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("symbol `{0}` is declared twice")]
    Duplicate(Symbol),
    #[error("symbol `{0}` is reserved")]
    Reserved(Symbol),
    #[error("undeclared symbol `{symbol}` in {place}")]
    Undeclared { symbol: Symbol, place: String },
    #[error("expected {expected} dynamics components, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("problem needs at least one state")]
    NoStates,
    #[error("singular control: the stationarity condition does not determine the controls")]
    SingularControl,
    #[error("controls cannot be eliminated: {0}")]
    NotEliminable(String),
    #[error("derivative order {found} exceeds the declared order {order}")]
    OrderTooHigh { order: u32, found: u32 },
    #[error("declared order {order} but the highest derivative used is {found}")]
    OrderUnused { order: u32, found: u32 },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Symbols the engine generates itself.
pub fn is_reserved(s: &Symbol) -> bool {
    let n = s.name();
    let digits = |rest: &str| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit());
    n.starts_with('_')
        || n == "psi"
        || (n.starts_with("psi") && digits(&n[3..]))
        || (n.starts_with('C') && digits(&n[1..]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OCProblem {
    pub time: Symbol,
    pub states: Vec<Symbol>,
    pub controls: Vec<Symbol>,
    pub params: Vec<Param>,
    pub lagrangian: Expr,
    pub dynamics: Vec<Expr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Psi0Mode {
    /// Keep the cost multiplier as the symbol `psi0`.
    Symbolic,
    /// Normal case, `psi0 = -1`.
    MinusOne,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers {
    pub mode: Psi0Mode,
    pub psi0: Symbol,
    pub psi: Vec<Symbol>,
}

impl Multipliers {
    pub fn for_states(n: usize, mode: Psi0Mode) -> Self {
        let psi = if n == 1 {
            alloc::vec![Symbol::new("psi")]
        } else {
            (1..=n).map(|i| Symbol::new(&format!("psi{i}"))).collect()
        };
        Multipliers { mode, psi0: Symbol::new("psi0"), psi }
    }

    /// The cost multiplier as an expression.
    pub fn psi0_expr(&self) -> Expr {
        match self.mode {
            Psi0Mode::Symbolic => Expr::Sym(self.psi0.clone()),
            Psi0Mode::MinusOne => Expr::int(-1),
        }
    }

    pub fn psi0_poly(&self) -> Poly {
        match self.mode {
            Psi0Mode::Symbolic => Poly::symbol(&self.psi0),
            Psi0Mode::MinusOne => Poly::integer(-1),
        }
    }
}

fn check_symbols(e: &Expr, allowed: &BTreeSet<Symbol>, place: &str) -> Result<(), ProblemError> {
    for s in e.to_poly()?.free_symbols() {
        if !allowed.contains(&s) {
            return Err(ProblemError::Undeclared { symbol: s, place: place.into() });
        }
    }
    Ok(())
}

fn declare(set: &mut BTreeSet<Symbol>, s: &Symbol) -> Result<(), ProblemError> {
    if is_reserved(s) {
        return Err(ProblemError::Reserved(s.clone()));
    }
    if !set.insert(s.clone()) {
        return Err(ProblemError::Duplicate(s.clone()));
    }
    Ok(())
}

impl OCProblem {
    pub fn new(
        time: Symbol,
        states: Vec<Symbol>,
        controls: Vec<Symbol>,
        params: Vec<Param>,
        lagrangian: Expr,
        dynamics: Vec<Expr>,
    ) -> Result<Self, ProblemError> {
        if states.is_empty() {
            return Err(ProblemError::NoStates);
        }
        if dynamics.len() != states.len() {
            return Err(ProblemError::Dimension { expected: states.len(), found: dynamics.len() });
        }
        let mut all = BTreeSet::new();
        declare(&mut all, &time)?;
        for s in states.iter().chain(&controls).chain(params.iter().map(|p| &p.symbol)) {
            declare(&mut all, s)?;
        }
        check_symbols(&lagrangian, &all, "the Lagrangian")?;
        for (i, f) in dynamics.iter().enumerate() {
            check_symbols(f, &all, &format!("dynamics component {}", i + 1))?;
        }
        let lagrangian = crate::expr::normalize(&lagrangian)?;
        let dynamics = dynamics.iter().map(crate::expr::normalize).collect::<Result<Vec<_>, _>>()?;
        Ok(OCProblem { time, states, controls, params, lagrangian, dynamics })
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn m(&self) -> usize {
        self.controls.len()
    }

    pub fn multipliers(&self, mode: Psi0Mode) -> Multipliers {
        Multipliers::for_states(self.n(), mode)
    }

    pub fn param_symbols(&self) -> Vec<Symbol> {
        self.params.iter().map(|p| p.symbol.clone()).collect()
    }

    /// `psi0*L + psi^T phi` in normal form.
    pub fn hamiltonian_poly(&self, m: &Multipliers) -> Result<Poly, ExprError> {
        let mut h = m.psi0_poly().mul_poly(&self.lagrangian.to_poly()?);
        for (psi, f) in m.psi.iter().zip(&self.dynamics) {
            h.add_assign_poly(&Poly::symbol(psi).mul_poly(&f.to_poly()?));
        }
        Ok(h.canonical())
    }

    pub fn hamiltonian(&self, m: &Multipliers) -> Result<Expr, ExprError> {
        Ok(Expr::from_poly_ordered(&self.hamiltonian_poly(m)?, &self.var_order(m)))
    }

    /// Whether the data depend explicitly on time.
    pub fn is_autonomous(&self) -> Result<bool, ExprError> {
        let t = &self.time;
        if self.lagrangian.to_poly()?.depends_on(t) {
            return Ok(false);
        }
        for f in &self.dynamics {
            if f.to_poly()?.depends_on(t) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Display order: time, states, controls, cost multiplier, multipliers,
    /// parameters.
    pub fn var_order(&self, m: &Multipliers) -> VarOrder {
        let mut o = VarOrder::default();
        o.push(self.time.clone());
        for s in self.states.iter().chain(&self.controls) {
            o.push(s.clone());
        }
        o.push(m.psi0.clone());
        for s in m.psi.iter().chain(self.params.iter().map(|p| &p.symbol)) {
            o.push(s.clone());
        }
        o
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalProblem {
    pub time: Symbol,
    pub dependents: Vec<Symbol>,
    pub order: u32,
    pub params: Vec<Param>,
    /// Uses `Symbol::derivative_of(x, j)` for the derivatives.
    pub lagrangian: Expr,
}

impl VariationalProblem {
    pub fn new(
        time: Symbol,
        dependents: Vec<Symbol>,
        order: u32,
        params: Vec<Param>,
        lagrangian: Expr,
    ) -> Result<Self, ProblemError> {
        if dependents.is_empty() {
            return Err(ProblemError::NoStates);
        }
        let mut all = BTreeSet::new();
        declare(&mut all, &time)?;
        for s in dependents.iter().chain(params.iter().map(|p| &p.symbol)) {
            declare(&mut all, s)?;
        }
        let mut highest = 0;
        let mut allowed = all.clone();
        for s in lagrangian.to_poly()?.free_symbols() {
            if let Some((base, k)) = s.as_derivative() {
                if dependents.contains(&base) {
                    if k > order {
                        return Err(ProblemError::OrderTooHigh { order, found: k });
                    }
                    highest = highest.max(k);
                    allowed.insert(s);
                }
            }
        }
        check_symbols(&lagrangian, &allowed, "the Lagrangian")?;
        if highest != order {
            return Err(ProblemError::OrderUnused { order, found: highest });
        }
        let lagrangian = crate::expr::normalize(&lagrangian)?;
        Ok(VariationalProblem { time, dependents, order, params, lagrangian })
    }
}

/// First-order reduction: states `x, x', ..., x^(r-1)` stacked by derivative
/// order, controls `x^(r)`, and `psi0 = -1` by convention.
pub fn reduce_cv(vp: &VariationalProblem) -> OCProblem {
    let r = vp.order;
    let mut states = Vec::new();
    let mut dynamics = Vec::new();
    for j in 0..r {
        for x in &vp.dependents {
            states.push(Symbol::derivative_of(x, j));
            dynamics.push(Expr::Sym(Symbol::derivative_of(x, j + 1)));
        }
    }
    let controls = vp.dependents.iter().map(|x| Symbol::derivative_of(x, r)).collect();
    OCProblem {
        time: vp.time.clone(),
        states,
        controls,
        params: vp.params.clone(),
        lagrangian: vp.lagrangian.clone(),
        dynamics,
    }
}

fn det(m: &[Vec<Poly>]) -> Poly {
    let n = m.len();
    match n {
        0 => Poly::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Poly::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Poly>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, v)| v.clone()).collect())
                    .collect();
                let t = &m[0][j] * &det(&minor);
                if j % 2 == 0 {
                    acc.add_assign_poly(&t);
                } else {
                    acc = &acc - &t;
                }
            }
            acc
        }
    }
}

/// Solves `eqs = 0` for `unknowns`, requiring the system to be linear in
/// them with a nonsingular coefficient matrix. `None` signals a singular
/// matrix.
fn solve_linear(eqs: &[Poly], unknowns: &[Symbol]) -> Result<Option<Vec<Poly>>, ProblemError> {
    let k = unknowns.len();
    let mut a = alloc::vec![alloc::vec![Poly::zero(); k]; eqs.len()];
    for (j, g) in eqs.iter().enumerate() {
        for (i, v) in unknowns.iter().enumerate() {
            let e = g.diff(v).canonical();
            if unknowns.iter().any(|w| e.depends_on(w)) {
                return Err(ProblemError::NotEliminable(format!("the equations are not linear in {}", names(unknowns))));
            }
            a[j][i] = e;
        }
    }
    let zero: BTreeMap<Symbol, Poly> = unknowns.iter().map(|u| (u.clone(), Poly::zero())).collect();
    let rhs: Vec<Poly> = eqs.iter().map(|g| g.substitute(&zero).map(|x| -x)).collect::<Result<_, _>>()?;
    let d = det(&a).canonical();
    if d.is_identically_zero() {
        return Ok(None);
    }
    let dinv = d.pow(crate::expr::Exp::new(-1, 1))?;
    let mut sol = Vec::with_capacity(k);
    let mut map = BTreeMap::new();
    for i in 0..k {
        let mut mi = a.clone();
        for (row, r) in mi.iter_mut().zip(&rhs) {
            row[i] = r.clone();
        }
        let x = det(&mi).mul_poly(&dinv).canonical();
        map.insert(unknowns[i].clone(), x.clone());
        sol.push(x);
    }
    for g in eqs {
        if !g.substitute(&map)?.is_identically_zero() {
            return Err(ProblemError::NotEliminable(String::from("the residual of the solution does not vanish")));
        }
    }
    Ok(Some(sol))
}

fn names(v: &[Symbol]) -> String {
    v.iter().map(|s| format!("{s}")).collect::<Vec<_>>().join(", ")
}

/// Solves `dH/du = 0` for the controls.
///
/// Requires the stationarity condition to be linear in the controls with a
/// nonsingular coefficient matrix.
pub fn eliminate_controls(p: &OCProblem, mult: &Multipliers) -> Result<Vec<Expr>, ProblemError> {
    let h = p.hamiltonian_poly(mult)?;
    if p.m() == 0 {
        return Ok(Vec::new());
    }
    let grads: Vec<Poly> = p.controls.iter().map(|u| h.diff(u)).collect();
    let order = p.var_order(mult);
    match solve_linear(&grads, &p.controls)? {
        None => Err(ProblemError::SingularControl),
        Some(sol) => Ok(sol.iter().map(|q| Expr::from_poly_ordered(q, &order)).collect()),
    }
}

/// Solves `dH/du = 0` for the multipliers it involves. Multipliers absent
/// from the stationarity condition are not in the map.
pub fn solve_multipliers(p: &OCProblem, mult: &Multipliers) -> Result<BTreeMap<Symbol, Expr>, ProblemError> {
    let h = p.hamiltonian_poly(mult)?;
    let grads: Vec<Poly> = p.controls.iter().map(|u| h.diff(u)).collect();
    let involved: Vec<Symbol> = mult.psi.iter().filter(|s| grads.iter().any(|g| g.depends_on(s))).cloned().collect();
    if involved.len() != grads.len() {
        return Err(ProblemError::NotEliminable(format!(
            "{} stationarity equations for the multipliers {}",
            grads.len(),
            names(&involved)
        )));
    }
    let order = p.var_order(mult);
    match solve_linear(&grads, &involved)? {
        None => Err(ProblemError::NotEliminable(format!("the stationarity condition is singular in {}", names(&involved)))),
        Some(sol) => Ok(involved.into_iter().zip(sol.iter().map(|q| Expr::from_poly_ordered(q, &order))).collect()),
    }
}

/// Right-hand side of the canonical system, `(dH/dpsi, -dH/dx)`, with the
/// controls replaced when a solution is given.
pub fn extremal_rhs(
    p: &OCProblem,
    mult: &Multipliers,
    u_star: Option<&[Expr]>,
) -> Result<(Vec<Expr>, Vec<Expr>), ProblemError> {
    let h = p.hamiltonian_poly(mult)?;
    let mut map = BTreeMap::new();
    if let Some(us) = u_star {
        for (u, e) in p.controls.iter().zip(us) {
            map.insert(u.clone(), e.to_poly()?);
        }
    }
    let order = p.var_order(mult);
    let fin = |q: Poly| -> Result<Expr, ProblemError> {
        Ok(Expr::from_poly_ordered(&q.substitute(&map)?.canonical(), &order))
    };
    let xdot = mult.psi.iter().map(|s| fin(h.diff(s))).collect::<Result<Vec<_>, _>>()?;
    let psidot = p.states.iter().map(|x| fin(-h.diff(x))).collect::<Result<Vec<_>, _>>()?;
    Ok((xdot, psidot))
}
