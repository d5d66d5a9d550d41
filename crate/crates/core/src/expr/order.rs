use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::poly::{Atom, Exp, Monomial, Poly};
use super::{render, Expr, Symbol};

/// Display order of symbols. Listed symbols come first in list order, then
/// the remaining symbols by name, then kernels and bases by rendered text.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarOrder {
    ranks: BTreeMap<Symbol, usize>,
}

impl VarOrder {
    pub fn new(symbols: impl IntoIterator<Item = Symbol>) -> Self {
        let mut o = VarOrder::default();
        for s in symbols {
            o.push(s);
        }
        o
    }

    pub fn push(&mut self, s: Symbol) {
        let n = self.ranks.len();
        self.ranks.entry(s).or_insert(n);
    }

    pub fn rank(&self, s: &Symbol) -> Option<usize> {
        self.ranks.get(s).copied()
    }

    /// Same order with `front` ranked ahead of every listed symbol.
    pub fn prepended(&self, front: &[Symbol]) -> VarOrder {
        let mut listed: Vec<(&Symbol, usize)> = self.ranks.iter().map(|(s, r)| (s, *r)).collect();
        listed.sort_by_key(|(_, r)| *r);
        let mut o = VarOrder::new(front.iter().cloned());
        for (s, _) in listed {
            o.push(s.clone());
        }
        o
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Listed(usize),
    Unlisted(Symbol),
    Other(String),
}

struct Keys<'a> {
    ord: &'a VarOrder,
    cache: BTreeMap<Atom, Key>,
}

impl Keys<'_> {
    fn key(&mut self, a: &Atom) -> Key {
        if let Some(k) = self.cache.get(a) {
            return k.clone();
        }
        let k = match a {
            Atom::Sym(s) => match self.ord.rank(s) {
                Some(r) => Key::Listed(r),
                None => Key::Unlisted(s.clone()),
            },
            other => Key::Other(render(&atom_expr(other, self.ord))),
        };
        self.cache.insert(a.clone(), k.clone());
        k
    }
}

fn atom_expr(a: &Atom, ord: &VarOrder) -> Expr {
    match a {
        Atom::Sym(s) => Expr::Sym(s.clone()),
        Atom::Fun(k, p) => Expr::Kernel(*k, Box::new(to_expr(p, ord))),
        Atom::Base(p) => to_expr(p, ord),
    }
}

/// Graded reverse lexicographic comparison; `Less` means `a` is printed first.
fn grevlex(a: &[(Key, Exp)], b: &[(Key, Exp)]) -> Ordering {
    let da = a.iter().fold(Exp::zero(), |s, (_, e)| s + e);
    let db = b.iter().fold(Exp::zero(), |s, (_, e)| s + e);
    if da != db {
        return db.cmp(&da);
    }
    let (mut i, mut j) = (a.len(), b.len());
    while i > 0 || j > 0 {
        let ka = (i > 0).then(|| &a[i - 1]);
        let kb = (j > 0).then(|| &b[j - 1]);
        let (ea, eb, step_a, step_b) = match (ka, kb) {
            (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                Ordering::Equal => (x.1, y.1, true, true),
                Ordering::Greater => (x.1, Exp::zero(), true, false),
                Ordering::Less => (Exp::zero(), y.1, false, true),
            },
            (Some(x), None) => (x.1, Exp::zero(), true, false),
            (None, Some(y)) => (Exp::zero(), y.1, false, true),
            (None, None) => break,
        };
        if ea != eb {
            return ea.cmp(&eb);
        }
        if step_a {
            i -= 1;
        }
        if step_b {
            j -= 1;
        }
    }
    Ordering::Equal
}

pub(crate) fn to_expr(p: &Poly, ord: &VarOrder) -> Expr {
    let mut keys = Keys { ord, cache: BTreeMap::new() };
    let mut terms: Vec<(Vec<(Key, Exp)>, &Monomial, &BigRational)> = Vec::new();
    for (m, c) in p.terms() {
        let mut ks: Vec<(Key, Exp)> = m.factors().iter().map(|(a, e)| (keys.key(a), *e)).collect();
        ks.sort();
        terms.push((ks, m, c));
    }
    terms.sort_by(|x, y| grevlex(&x.0, &y.0).then_with(|| x.1.cmp(y.1)));
    let mut out = Vec::with_capacity(terms.len());
    for (_, m, c) in terms {
        let mut factors: Vec<(Key, Expr)> = m
            .factors()
            .iter()
            .map(|(a, e)| {
                let base = atom_expr(a, ord);
                let f = if e.is_one() { base } else { Expr::Pow(Box::new(base), *e) };
                (keys.key(a), f)
            })
            .collect();
        factors.sort_by(|x, y| x.0.cmp(&y.0));
        let mut fs: Vec<Expr> = factors.into_iter().map(|(_, f)| f).collect();
        let term = if fs.is_empty() {
            Expr::Rational(c.clone())
        } else if c.is_one() && fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            if !c.is_one() {
                fs.insert(0, Expr::Rational(c.clone()));
            }
            Expr::Prod(fs)
        };
        out.push(term);
    }
    match out.len() {
        0 => Expr::zero(),
        1 => out.pop().unwrap(),
        _ => Expr::Sum(out),
    }
}
