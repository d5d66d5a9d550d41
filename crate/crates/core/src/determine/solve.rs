use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Reverse;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{Assumption, Component, DeterminingSystem, Generator, SymmetryFamily};
use crate::expr::{collect_poly, Atom, Exp, Expr, ExprError, Monomial, Poly, Symbol, VarOrder};
use crate::linalg::{self, Row};
use crate::ocp::Psi0Mode;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("determining equation {0} is not linear in the generator placeholders")]
    NonLinear(usize),
}

struct Column {
    comp: Component,
    exps: Vec<u32>,
    mono: Monomial,
}

fn monomials(vars: &[usize], nvars: usize, degree: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = alloc::vec![0u32; nvars];
    fn rec(vars: &[usize], k: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if k == vars.len() {
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[vars[k]] = e;
            rec(vars, k + 1, left - e, cur, out);
        }
        cur[vars[k]] = 0;
    }
    rec(vars, 0, degree, &mut cur, &mut out);
    out
}

fn is_field_atom(a: &Atom, field: &BTreeSet<Symbol>) -> bool {
    match a {
        Atom::Sym(s) => field.contains(s),
        Atom::Fun(_, p) | Atom::Base(p) => p.free_symbols().iter().all(|s| field.contains(s)),
    }
}

/// Splits a normal form into var-monomial keyed coefficients over the field.
fn split_field(p: &Poly, field: &BTreeSet<Symbol>) -> BTreeMap<Monomial, Poly> {
    let mut out: BTreeMap<Monomial, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (f, v) = m.split(|a| is_field_atom(a, field));
        out.entry(v).or_default().add_term(f, c.clone());
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn columns(sys: &DeterminingSystem) -> Vec<Column> {
    let vars = sys.ansatz_vars();
    let nv = vars.len();
    let (n, m) = (sys.n(), sys.m());
    let d = sys.spec.degree;
    let symbolic = sys.multipliers.mode == Psi0Mode::Symbolic;
    let mut cols = Vec::new();
    for comp in sys.components() {
        let allowed: Vec<usize> = sys.deps[&comp].iter().map(|s| vars.iter().position(|v| v == s).unwrap()).collect();
        let mut exps = monomials(&allowed, nv, d);
        if d == 0 && sys.spec.psi0_inverse && symbolic && matches!(comp, Component::U(_) | Component::Psi(_)) {
            for psi in &sys.multipliers.psi {
                let mut e = alloc::vec![0u32; nv];
                e[vars.iter().position(|v| v == psi).unwrap()] = 1;
                exps.push(e);
            }
        }
        for e in exps {
            let mono = Monomial::from_factors(
                e.iter().enumerate().filter(|(_, k)| **k > 0).map(|(i, k)| (Atom::Sym(vars[i].clone()), Exp::from_integer(*k as i64))),
            );
            cols.push(Column { comp, exps: e, mono });
        }
    }
    cols.sort_by(|a, b| {
        let da: u32 = a.exps.iter().sum();
        let db: u32 = b.exps.iter().sum();
        (Reverse(da), Reverse(&a.exps), a.comp.index(n, m)).cmp(&(Reverse(db), Reverse(&b.exps), b.comp.index(n, m)))
    });
    cols
}

/// Exact solution of the determining system over the ansatz, as an echelon
/// basis over the coefficient field.
pub fn solve_symmetries(sys: &DeterminingSystem) -> Result<SymmetryFamily, SolveError> {
    let field = sys.field_symbols();
    let cols = columns(sys);
    let ph_atoms: Vec<Atom> = sys.placeholders.iter().map(|p| Atom::Sym(p.symbol.clone())).collect();

    let mut rows: BTreeMap<(usize, Monomial), Row> = BTreeMap::new();
    for (ei, eq) in sys.polys.iter().enumerate() {
        let lin = collect_poly(eq, &ph_atoms)?;
        let mut coeff: Vec<(usize, Poly)> = Vec::new();
        for (key, c) in lin {
            let deg: u32 = key.iter().sum();
            if deg != 1 {
                return Err(SolveError::NonLinear(ei));
            }
            coeff.push((key.iter().position(|k| *k == 1).unwrap(), c));
        }
        let mut contribs: Vec<(usize, Poly)> = Vec::new();
        for (j, col) in cols.iter().enumerate() {
            let mut acc = Poly::zero();
            let mono = Poly::from_monomial(col.mono.clone());
            for (pi, c) in &coeff {
                let ph = &sys.placeholders[*pi];
                if ph.component != col.comp {
                    continue;
                }
                let dm = match &ph.wrt {
                    None => mono.clone(),
                    Some(v) => mono.diff(v),
                };
                if dm.is_zero() {
                    continue;
                }
                acc.add_assign_poly(&c.mul_poly(&dm));
            }
            if !acc.is_zero() {
                contribs.push((j, acc));
            }
        }
        let mut dens: BTreeMap<Poly, i64> = BTreeMap::new();
        for (_, c) in &contribs {
            for (m, _) in c.terms() {
                for (a, e) in m.factors() {
                    if let Atom::Base(b) = a {
                        if *e < Exp::zero() {
                            let need = (-*e).ceil().to_integer();
                            let slot = dens.entry(b.clone()).or_insert(0);
                            *slot = (*slot).max(need);
                        }
                    }
                }
            }
        }
        let mult = Monomial::from_factors(dens.iter().map(|(b, k)| (Atom::Base(b.clone()), Exp::from_integer(*k))));
        for (j, c) in contribs {
            let cleared = if mult.is_one() { c } else { c.mul_monomial(&mult, &BigRational::one()) };
            for (vm, fpart) in split_field(&cleared, &field) {
                let row = rows.entry((ei, vm)).or_default();
                let e = row.entry(j).or_default();
                e.add_assign_poly(&fpart);
                if e.is_zero() {
                    row.remove(&j);
                }
            }
        }
    }
    let red = linalg::reduce(rows.into_values().collect(), cols.len());
    let null = linalg::nullspace(&red);

    let (n, m) = (sys.n(), sys.m());
    let order = sys.var_order();
    let psi0 = Poly::symbol(&sys.multipliers.psi0);
    let mut assumptions: Vec<Poly> = red.assumptions.clone();
    let mut basis = Vec::new();
    for (k, v) in null.iter().enumerate() {
        let mut scale = Monomial::one();
        if sys.spec.psi0_inverse && sys.multipliers.mode == Psi0Mode::Symbolic {
            let lead = &v[&red.free[k]];
            if let Some((lm, _)) = lead.as_single_term() {
                let e = lm.symbol_exponent(&sys.multipliers.psi0);
                if !e.is_zero() {
                    scale = Monomial::symbol(&sys.multipliers.psi0).pow(-e);
                    if !assumptions.contains(&psi0) {
                        assumptions.push(psi0.clone());
                    }
                }
            }
        }
        let mut comps: BTreeMap<Component, Poly> = BTreeMap::new();
        for (j, e) in v {
            let col = &cols[*j];
            let term = e.mul_monomial(&col.mono.mul(&scale), &BigRational::one());
            comps.entry(col.comp).or_default().add_assign_poly(&term);
        }
        let get = |c: Component| Expr::from_poly_ordered(&comps.get(&c).cloned().unwrap_or_default().canonical(), &order);
        basis.push(Generator {
            t: get(Component::T),
            x: (0..n).map(|i| get(Component::X(i))).collect(),
            u: (0..m).map(|j| get(Component::U(j))).collect(),
            psi: (0..n).map(|i| get(Component::Psi(i))).collect(),
        });
    }
    let constants: Vec<Symbol> = (1..=basis.len()).map(|k| Symbol::new(&alloc::format!("C{k}"))).collect();
    let general = combine(&constants, &basis, &order, n, m)?;
    let declared: BTreeSet<Symbol> = sys
        .spec
        .declared_nonzero
        .iter()
        .cloned()
        .chain(sys.problem.params.iter().filter(|p| p.positive).map(|p| p.symbol.clone()))
        .collect();
    let genericity = assumptions
        .iter()
        .map(|a| Assumption {
            expr: Expr::from_poly_ordered(a, &order),
            declared: a.as_symbol().map(|s| declared.contains(s)).unwrap_or(false),
        })
        .collect();
    Ok(SymmetryFamily { constants, basis, general, genericity, field })
}

fn combine(constants: &[Symbol], basis: &[Generator], order: &VarOrder, n: usize, m: usize) -> Result<Generator, ExprError> {
    let mut ord = VarOrder::new(constants.iter().cloned());
    for s in order_symbols(order, basis) {
        ord.push(s);
    }
    let mut g = Generator::zero(n, m);
    let slots = |g: &Generator| -> Vec<Expr> { g.components().into_iter().map(|(_, e)| e.clone()).collect() };
    let mut acc: Vec<Poly> = alloc::vec![Poly::zero(); 1 + 2 * n + m];
    for (c, b) in constants.iter().zip(basis) {
        for (i, e) in slots(b).iter().enumerate() {
            acc[i].add_assign_poly(&Poly::symbol(c).mul_poly(&e.to_poly()?));
        }
    }
    let exprs: Vec<Expr> = acc.iter().map(|p| Expr::from_poly_ordered(p, &ord)).collect();
    g.t = exprs[0].clone();
    g.x = exprs[1..1 + n].to_vec();
    g.u = exprs[1 + n..1 + n + m].to_vec();
    g.psi = exprs[1 + n + m..].to_vec();
    Ok(g)
}

fn order_symbols(order: &VarOrder, basis: &[Generator]) -> Vec<Symbol> {
    let mut syms: BTreeSet<Symbol> = BTreeSet::new();
    for b in basis {
        for (_, e) in b.components() {
            if let Ok(p) = e.to_poly() {
                syms.extend(p.free_symbols());
            }
        }
    }
    let mut v: Vec<Symbol> = syms.into_iter().collect();
    v.sort_by_key(|s| order.rank(s).unwrap_or(usize::MAX));
    v
}

type Key = (usize, Monomial);

fn vectorize(g: &Generator, field: &BTreeSet<Symbol>) -> Result<BTreeMap<Key, Poly>, ExprError> {
    let mut out = BTreeMap::new();
    for (i, (_, e)) in g.components().into_iter().enumerate() {
        for (vm, f) in split_field(&e.to_poly()?.canonical(), field) {
            out.insert((i, vm), f);
        }
    }
    Ok(out)
}

/// Coefficients `c_k` with `candidate = sum c_k * basis_k`, or `None`.
pub fn span_coefficients(family: &SymmetryFamily, candidate: &Generator) -> Result<Option<Vec<Expr>>, ExprError> {
    let basis = family.basis.iter().map(|b| vectorize(b, &family.field)).collect::<Result<Vec<_>, _>>()?;
    let target = vectorize(candidate, &family.field)?;
    let Some(co) = linalg::span_coefficients(&basis, &target) else {
        return Ok(None);
    };
    let mut out = Vec::with_capacity(co.len());
    for (num, den) in co {
        let q = num.mul_poly(&den.pow(Exp::new(-1, 1))?).canonical();
        out.push(Expr::from_poly(&q));
    }
    Ok(Some(out))
}

pub fn is_in_span(family: &SymmetryFamily, candidate: &Generator) -> Result<bool, ExprError> {
    Ok(span_coefficients(family, candidate)?.is_some())
}
