//! Determining equations for invariance generators and their exact
//! polynomial solution.

mod solve;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::expr::{collect_poly, Atom, Expr, ExprError, Poly, Symbol, VarOrder};
use crate::ocp::{Multipliers, OCProblem, Psi0Mode};

pub use solve::{is_in_span, solve_symmetries, span_coefficients, SolveError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DepsMode {
    /// `T`, `X` depend on `(t, x, psi0, psi)`; `U`, `Psi` also on `u`.
    Paper,
    /// `T`, `X` also depend on the controls.
    Maple,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorSpec {
    pub degree: u32,
    pub deps: DepsMode,
    /// Allow `psi_i / psi0` terms in the printed basis.
    pub psi0_inverse: bool,
    /// Parameters the user has declared nonzero.
    pub declared_nonzero: Vec<Symbol>,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            degree: 2,
            deps: DepsMode::Paper,
            psi0_inverse: true,
            declared_nonzero: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Component {
    T,
    X(usize),
    U(usize),
    Psi(usize),
}

impl Component {
    /// Display name; `n`, `m` decide whether indices are shown.
    pub fn label(self, n: usize, m: usize) -> String {
        match self {
            Component::T => "T".into(),
            Component::X(_) if n == 1 => "X".into(),
            Component::X(i) => format!("X{}", i + 1),
            Component::U(_) if m == 1 => "U".into(),
            Component::U(j) => format!("U{}", j + 1),
            Component::Psi(_) if n == 1 => "Psi".into(),
            Component::Psi(i) => format!("Psi{}", i + 1),
        }
    }

    pub(crate) fn index(self, n: usize, m: usize) -> usize {
        match self {
            Component::T => 0,
            Component::X(i) => 1 + i,
            Component::U(j) => 1 + n + j,
            Component::Psi(i) => 1 + n + m + i,
        }
    }
}

/// A placeholder symbol standing for a generator component or one of its
/// first partial derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct Placeholder {
    pub component: Component,
    pub wrt: Option<Symbol>,
    pub symbol: Symbol,
}

/// Infinitesimal generator `(T, X, U, Psi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub t: Expr,
    pub x: Vec<Expr>,
    pub u: Vec<Expr>,
    pub psi: Vec<Expr>,
}

impl Generator {
    pub fn zero(n: usize, m: usize) -> Self {
        Generator {
            t: Expr::zero(),
            x: alloc::vec![Expr::zero(); n],
            u: alloc::vec![Expr::zero(); m],
            psi: alloc::vec![Expr::zero(); n],
        }
    }

    pub fn components(&self) -> Vec<(Component, &Expr)> {
        let mut out = alloc::vec![(Component::T, &self.t)];
        out.extend(self.x.iter().enumerate().map(|(i, e)| (Component::X(i), e)));
        out.extend(self.u.iter().enumerate().map(|(i, e)| (Component::U(i), e)));
        out.extend(self.psi.iter().enumerate().map(|(i, e)| (Component::Psi(i), e)));
        out
    }

    pub fn get(&self, c: Component) -> &Expr {
        match c {
            Component::T => &self.t,
            Component::X(i) => &self.x[i],
            Component::U(j) => &self.u[j],
            Component::Psi(i) => &self.psi[i],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|(_, e)| crate::expr::is_zero(e).unwrap_or(false))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Assumption {
    /// The expression assumed nonzero.
    pub expr: Expr,
    /// Covered by a user or problem declaration.
    pub declared: bool,
}

/// Solution space of the determining system at the requested degree.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryFamily {
    pub constants: Vec<Symbol>,
    /// One generator per constant, in constant order.
    pub basis: Vec<Generator>,
    /// `sum C_k * basis_k`.
    pub general: Generator,
    pub genericity: Vec<Assumption>,
    /// Symbols of the coefficient field the dimension is counted over.
    pub field: BTreeSet<Symbol>,
}

impl SymmetryFamily {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Debug)]
pub struct DeterminingSystem {
    pub problem: OCProblem,
    pub multipliers: Multipliers,
    pub spec: GeneratorSpec,
    /// `1 + 2n` equations (`+ m` when generators depend on the controls).
    pub equations: Vec<Expr>,
    pub placeholders: Vec<Placeholder>,
    pub(crate) polys: Vec<Poly>,
    pub(crate) deps: BTreeMap<Component, Vec<Symbol>>,
}

impl DeterminingSystem {
    pub fn n(&self) -> usize {
        self.problem.n()
    }

    pub fn m(&self) -> usize {
        self.problem.m()
    }

    pub fn components(&self) -> Vec<Component> {
        let (n, m) = (self.n(), self.m());
        let mut out = alloc::vec![Component::T];
        out.extend((0..n).map(Component::X));
        out.extend((0..m).map(Component::U));
        out.extend((0..n).map(Component::Psi));
        out
    }

    /// Symbols treated as elements of the coefficient field.
    pub fn field_symbols(&self) -> BTreeSet<Symbol> {
        let mut f: BTreeSet<Symbol> = self.problem.param_symbols().into_iter().collect();
        if self.multipliers.mode == Psi0Mode::Symbolic {
            f.insert(self.multipliers.psi0.clone());
        }
        f
    }

    pub fn var_order(&self) -> VarOrder {
        self.problem.var_order(&self.multipliers)
    }

    /// Variable order used to rank ansatz monomials.
    pub(crate) fn ansatz_vars(&self) -> Vec<Symbol> {
        let p = &self.problem;
        let mut v: Vec<Symbol> = p.states.clone();
        v.extend(p.controls.iter().cloned());
        v.extend(self.multipliers.psi.iter().cloned());
        v.push(p.time.clone());
        v
    }
}

fn placeholder_symbol(c: Component, wrt: Option<&Symbol>) -> Symbol {
    let (head, idx) = match c {
        Component::T => ("T", None),
        Component::X(i) => ("X", Some(i as u32 + 1)),
        Component::U(j) => ("U", Some(j as u32 + 1)),
        Component::Psi(i) => ("Psi", Some(i as u32 + 1)),
    };
    let name = match wrt {
        None => format!("_{head}"),
        Some(v) => format!("_d{head}_{v}"),
    };
    match idx {
        Some(i) => Symbol::indexed(&name, i),
        None => Symbol::new(&name),
    }
}

/// Forms the invariance identity and splits it by the velocities.
pub fn build_determining_system(
    p: &OCProblem,
    m: &Multipliers,
    spec: &GeneratorSpec,
) -> Result<DeterminingSystem, ExprError> {
    let n = p.n();
    let mc = p.m();
    let h = p.hamiltonian_poly(m)?;
    let t = &p.time;
    let mut tx_deps = alloc::vec![t.clone()];
    tx_deps.extend(p.states.iter().cloned());
    if spec.deps == DepsMode::Maple {
        tx_deps.extend(p.controls.iter().cloned());
    }
    tx_deps.extend(m.psi.iter().cloned());
    let mut up_deps = alloc::vec![t.clone()];
    up_deps.extend(p.states.iter().cloned());
    up_deps.extend(p.controls.iter().cloned());
    up_deps.extend(m.psi.iter().cloned());

    let mut deps = BTreeMap::new();
    deps.insert(Component::T, tx_deps.clone());
    for i in 0..n {
        deps.insert(Component::X(i), tx_deps.clone());
        deps.insert(Component::Psi(i), up_deps.clone());
    }
    for j in 0..mc {
        deps.insert(Component::U(j), up_deps.clone());
    }

    let mut placeholders = Vec::new();
    for (c, ds) in &deps {
        placeholders.push(Placeholder { component: *c, wrt: None, symbol: placeholder_symbol(*c, None) });
        if matches!(c, Component::T | Component::X(_)) {
            for v in ds {
                placeholders.push(Placeholder { component: *c, wrt: Some(v.clone()), symbol: placeholder_symbol(*c, Some(v)) });
            }
        }
    }
    let ph = |c: Component, wrt: Option<&Symbol>| Poly::symbol(&placeholder_symbol(c, wrt));

    let xdot: Vec<Symbol> = (1..=n as u32).map(|i| Symbol::indexed("_xdot", i)).collect();
    let psidot: Vec<Symbol> = (1..=n as u32).map(|i| Symbol::indexed("_psidot", i)).collect();
    let udot: Vec<Symbol> = (1..=mc as u32).map(|i| Symbol::indexed("_udot", i)).collect();
    let mut velocity_of: BTreeMap<Symbol, Symbol> = BTreeMap::new();
    for (x, v) in p.states.iter().zip(&xdot) {
        velocity_of.insert(x.clone(), v.clone());
    }
    for (x, v) in m.psi.iter().zip(&psidot) {
        velocity_of.insert(x.clone(), v.clone());
    }
    for (x, v) in p.controls.iter().zip(&udot) {
        velocity_of.insert(x.clone(), v.clone());
    }
    let total = |c: Component| -> Poly {
        let mut acc = Poly::zero();
        for v in &deps[&c] {
            let d = ph(c, Some(v));
            match velocity_of.get(v) {
                Some(vel) => acc.add_assign_poly(&d.mul_poly(&Poly::symbol(vel))),
                None => acc.add_assign_poly(&d),
            }
        }
        acc
    };

    let mut e = h.diff(t).mul_poly(&ph(Component::T, None));
    for i in 0..n {
        e.add_assign_poly(&h.diff(&p.states[i]).mul_poly(&ph(Component::X(i), None)));
        e.add_assign_poly(&h.diff(&m.psi[i]).mul_poly(&ph(Component::Psi(i), None)));
        e = &e - &ph(Component::Psi(i), None).mul_poly(&Poly::symbol(&xdot[i]));
        e = &e - &Poly::symbol(&m.psi[i]).mul_poly(&total(Component::X(i)));
    }
    for j in 0..mc {
        e.add_assign_poly(&h.diff(&p.controls[j]).mul_poly(&ph(Component::U(j), None)));
    }
    e.add_assign_poly(&h.mul_poly(&total(Component::T)));

    let mut vel_atoms: Vec<Atom> = xdot.iter().chain(&psidot).map(|s| Atom::Sym(s.clone())).collect();
    if spec.deps == DepsMode::Maple {
        vel_atoms.extend(udot.iter().map(|s| Atom::Sym(s.clone())));
    }
    let coeffs = collect_poly(&e, &vel_atoms)?;
    let k = vel_atoms.len();
    let mut polys = alloc::vec![Poly::zero(); k + 1];
    for (key, c) in coeffs {
        let deg: u32 = key.iter().sum();
        let slot = match deg {
            0 => 0,
            1 => 1 + key.iter().position(|x| *x == 1).unwrap(),
            _ => {
                return Err(ExprError::NonPolynomial { subterm: String::from("velocity products in the invariance identity") });
            }
        };
        polys[slot] = c;
    }
    let order = p.var_order(m);
    let equations = polys.iter().map(|q| Expr::from_poly_ordered(q, &order)).collect();
    Ok(DeterminingSystem { problem: p.clone(), multipliers: m.clone(), spec: spec.clone(), equations, placeholders, polys, deps })
}

/// Residual of the determining equations under a concrete generator.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Zero,
    NonZero(Vec<Expr>),
    /// Nonzero in normal form but built from atoms whose relations the
    /// kernel does not model.
    Unknown(Vec<Expr>),
}

impl Verdict {
    pub fn is_zero(&self) -> bool {
        matches!(self, Verdict::Zero)
    }
}

pub fn verify_symmetry(sys: &DeterminingSystem, g: &Generator) -> Result<Verdict, ExprError> {
    let mut map: BTreeMap<Symbol, Poly> = BTreeMap::new();
    for ph in &sys.placeholders {
        let comp = g.get(ph.component).to_poly()?;
        let v = match &ph.wrt {
            None => comp,
            Some(s) => comp.diff(s),
        };
        map.insert(ph.symbol.clone(), v);
    }
    let order = sys.var_order();
    let mut residuals = Vec::new();
    let mut undecided = false;
    for q in &sys.polys {
        let r = q.substitute(&map)?.canonical();
        if !r.is_identically_zero() {
            undecided |= r.has_undecidable_atoms();
            residuals.push(Expr::from_poly_ordered(&r, &order));
        }
    }
    Ok(if residuals.is_empty() {
        Verdict::Zero
    } else if undecided {
        Verdict::Unknown(residuals)
    } else {
        Verdict::NonZero(residuals)
    })
}
