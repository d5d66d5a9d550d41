//! Normal-form arithmetic.
//!
//! A [`Poly`] is a finite sum of rational multiples of monomials. A monomial
//! is a product of atoms raised to rational powers. Atoms are symbols,
//! transcendental kernels with canonical arguments, and non-monomial
//! polynomial bases. Each stored term obeys the kernel relations: at most one
//! `exp` atom (with exponent 1), `sin` exponents below 2, and base exponents
//! either negative or strictly between 0 and 1.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{ExprError, Kernel, Symbol};

pub type Exp = Rational64;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Atom {
    Sym(Symbol),
    Fun(Kernel, Poly),
    Base(Poly),
}

impl Atom {
    pub fn depends_on(&self, v: &Symbol) -> bool {
        match self {
            Atom::Sym(s) => s == v,
            Atom::Fun(_, p) | Atom::Base(p) => p.depends_on(v),
        }
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self {
            Atom::Sym(s) => {
                out.insert(s.clone());
            }
            Atom::Fun(_, p) | Atom::Base(p) => p.collect_symbols(out),
        }
    }
}

/// Sorted product of atom powers with nonzero exponents.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Monomial(Vec<(Atom, Exp)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(a: Atom, e: Exp) -> Self {
        if e.is_zero() {
            Monomial::one()
        } else {
            Monomial(alloc::vec![(a, e)])
        }
    }

    pub fn symbol(s: &Symbol) -> Self {
        Monomial::atom(Atom::Sym(s.clone()), Exp::one())
    }

    /// Builds a monomial from unsorted factors, merging repeats.
    pub fn from_factors(factors: impl IntoIterator<Item = (Atom, Exp)>) -> Self {
        let mut map: BTreeMap<Atom, Exp> = BTreeMap::new();
        for (a, e) in factors {
            *map.entry(a).or_insert_with(Exp::zero) += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| !e.is_zero()).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, Exp)] {
        &self.0
    }

    pub fn exponent(&self, a: &Atom) -> Exp {
        match self.0.binary_search_by(|(x, _)| x.cmp(a)) {
            Ok(i) => self.0[i].1,
            Err(_) => Exp::zero(),
        }
    }

    pub fn symbol_exponent(&self, s: &Symbol) -> Exp {
        self.0
            .iter()
            .find(|(a, _)| matches!(a, Atom::Sym(x) if x == s))
            .map(|(_, e)| *e)
            .unwrap_or_else(Exp::zero)
    }

    pub fn degree(&self) -> Exp {
        self.0.iter().fold(Exp::zero(), |acc, (_, e)| acc + e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if !e.is_zero() {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn pow(&self, e: Exp) -> Monomial {
        if e.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, x)| (a.clone(), x * e)).collect())
    }

    pub fn inverse(&self) -> Monomial {
        self.pow(-Exp::one())
    }

    pub fn depends_on(&self, v: &Symbol) -> bool {
        self.0.iter().any(|(a, _)| a.depends_on(v))
    }

    /// Splits into the factors accepted by `keep` and the rest.
    pub fn split(&self, mut keep: impl FnMut(&Atom) -> bool) -> (Monomial, Monomial) {
        let mut yes = Vec::new();
        let mut no = Vec::new();
        for f in &self.0 {
            if keep(&f.0) {
                yes.push(f.clone());
            } else {
                no.push(f.clone());
            }
        }
        (Monomial(yes), Monomial(no))
    }

    fn needs_fixup(&self) -> bool {
        let mut exps = 0;
        for (a, e) in &self.0 {
            match a {
                Atom::Fun(Kernel::Exp, _) => {
                    exps += 1;
                    if !e.is_one() || exps > 1 {
                        return true;
                    }
                }
                Atom::Fun(Kernel::Sin, _) if e.is_integer() && *e.numer() >= 2 => return true,
                Atom::Base(_) if *e >= Exp::one() => return true,
                _ => {}
            }
        }
        false
    }
}

pub fn exp_to_big(e: Exp) -> BigRational {
    BigRational::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()))
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Monomial::one(), c);
        }
        p
    }

    pub fn integer(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn symbol(s: &Symbol) -> Self {
        Poly::from_monomial(Monomial::symbol(s))
    }

    pub fn from_monomial(m: Monomial) -> Self {
        Poly::term(BigRational::one(), m)
    }

    /// A single term, canonicalized.
    pub fn term(c: BigRational, m: Monomial) -> Self {
        if c.is_zero() {
            return Poly::zero();
        }
        if m.needs_fixup() {
            return canon_term(c, m);
        }
        let mut p = Poly::zero();
        p.terms.insert(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, BigRational)> {
        self.terms.into_iter()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn as_single_term(&self) -> Option<(&Monomial, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn as_symbol(&self) -> Option<&Symbol> {
        let (m, c) = self.as_single_term()?;
        if !c.is_one() || m.0.len() != 1 || !m.0[0].1.is_one() {
            return None;
        }
        match &m.0[0].0 {
            Atom::Sym(s) => Some(s),
            _ => None,
        }
    }

    /// Coefficient of the first stored term, used to pick canonical signs.
    pub fn leading_coefficient(&self) -> Option<&BigRational> {
        self.terms.values().next()
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        if m.needs_fixup() {
            let p = canon_term(c, m);
            self.add_assign_poly(&p);
            return;
        }
        self.add_raw(m, c);
    }

    fn add_raw(&mut self, m: Monomial, c: BigRational) {
        use alloc::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_assign_poly(&mut self, other: &Poly) {
        for (m, c) in &other.terms {
            self.add_raw(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Poly, k: &BigRational) {
        if k.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_raw(m.clone(), c * k);
        }
    }

    pub fn scale(&self, k: &BigRational) -> Poly {
        if k.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial, k: &BigRational) -> Poly {
        let mut out = Poly::zero();
        for (tm, c) in &self.terms {
            out.add_term(tm.mul(m), c * k);
        }
        out
    }

    pub fn mul_poly(&self, other: &Poly) -> Poly {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut out = Poly::zero();
        for (m, c) in &small.terms {
            for (n, d) in &big.terms {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow_int(&self, n: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul_poly(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_poly(&base);
            }
        }
        result
    }

    /// Rational power. Powers of single terms distribute formally over the
    /// factors; sums are expanded for non-negative integer exponents and kept
    /// as base atoms otherwise.
    pub fn pow(&self, e: Exp) -> Result<Poly, ExprError> {
        if e.is_zero() {
            return Ok(Poly::one());
        }
        if self.is_zero() {
            return if e > Exp::zero() { Ok(Poly::zero()) } else { Err(ExprError::DivisionByZero) };
        }
        if let Some((m, c)) = self.as_single_term() {
            let cpart = rational_pow(c, e);
            let mpart = Poly::from_monomial(m.pow(e));
            return Ok(cpart.mul_poly(&mpart));
        }
        if e.is_integer() && *e.numer() > 0 {
            return Ok(self.pow_int(*e.numer() as u32));
        }
        let (mut r, mut g, mut q) = self.content();
        // Dividing out `g` can leave expandable base powers, which may
        // expose more content.
        let (r2, g2, q2) = q.content();
        r *= r2;
        g = g.mul(&g2);
        q = q2;
        if q.as_single_term().is_some() {
            return Ok(rational_pow(&r, e).mul_poly(&Poly::from_monomial(g.pow(e))).mul_poly(&q.pow(e)?));
        }
        let cpart = rational_pow(&r, e);
        let mpart = Poly::from_monomial(g.pow(e));
        let qpart = Poly::from_monomial(Monomial::atom(Atom::Base(q), e));
        Ok(cpart.mul_poly(&mpart).mul_poly(&qpart))
    }

    /// Splits `self = r * g * q` with `r` rational, `g` a monomial and `q`
    /// primitive with first coefficient positive.
    pub fn content(&self) -> (BigRational, Monomial, Poly) {
        if self.is_zero() {
            return (BigRational::zero(), Monomial::one(), Poly::zero());
        }
        let mut atoms: BTreeSet<Atom> = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                atoms.insert(a.clone());
            }
        }
        let mut g = Vec::new();
        for a in atoms {
            let v = self.terms.keys().map(|m| m.exponent(&a)).min().unwrap_or_else(Exp::zero);
            if !v.is_zero() {
                g.push((a, v));
            }
        }
        let g = Monomial(g);
        let ginv = g.inverse();
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        let mut r = BigRational::new(num_gcd, den_lcm);
        let mut q = Poly::zero();
        for (m, c) in &self.terms {
            q.add_term(m.mul(&ginv), c / &r);
        }
        if q.leading_coefficient().map(|c| c.is_negative()).unwrap_or(false) {
            q = -q;
            r = -r;
        }
        (r, g, q)
    }

    pub fn depends_on(&self, v: &Symbol) -> bool {
        self.terms.keys().any(|m| m.depends_on(v))
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                a.collect_symbols(out);
            }
        }
    }

    /// Every atom appearing at the top level of some term.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                out.insert(a.clone());
            }
        }
        out
    }

    pub fn kernel(head: Kernel, arg: &Poly) -> Result<Poly, ExprError> {
        let a = arg.canonical();
        let negative = a.leading_coefficient().map(|c| c.is_negative()).unwrap_or(false);
        let atom = |p: Poly| Poly::from_monomial(Monomial::atom(Atom::Fun(head, p), Exp::one()));
        Ok(match head {
            Kernel::Exp => {
                if a.is_zero() {
                    Poly::one()
                } else {
                    atom(a)
                }
            }
            Kernel::Sin => {
                if a.is_zero() {
                    Poly::zero()
                } else if negative {
                    -atom(-a)
                } else {
                    atom(a)
                }
            }
            Kernel::Cos => {
                if a.is_zero() {
                    Poly::one()
                } else if negative {
                    atom(-a)
                } else {
                    atom(a)
                }
            }
            Kernel::Ln => {
                if a.is_zero() {
                    return Err(ExprError::LogOfZero);
                }
                if a.as_constant().map(|c| c.is_one()).unwrap_or(false) {
                    Poly::zero()
                } else {
                    atom(a)
                }
            }
        })
    }

    /// Partial derivative with respect to a symbol.
    pub fn diff(&self, v: &Symbol) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            for (i, (a, e)) in m.0.iter().enumerate() {
                if !a.depends_on(v) {
                    continue;
                }
                let da = match a {
                    Atom::Sym(_) => Poly::one(),
                    Atom::Fun(k, arg) => {
                        let inner = arg.diff(v);
                        let outer = match k {
                            Kernel::Exp => Poly::from_monomial(Monomial::atom(a.clone(), Exp::one())),
                            Kernel::Sin => Poly::kernel(Kernel::Cos, arg).expect("cos is total"),
                            Kernel::Cos => -Poly::kernel(Kernel::Sin, arg).expect("sin is total"),
                            Kernel::Ln => arg.pow(-Exp::one()).expect("ln argument is nonzero"),
                        };
                        outer.mul_poly(&inner)
                    }
                    Atom::Base(b) => b.diff(v),
                };
                if da.is_zero() {
                    continue;
                }
                let mut rest = m.0.clone();
                let e1 = *e - Exp::one();
                if e1.is_zero() {
                    rest.remove(i);
                } else {
                    rest[i].1 = e1;
                }
                let coef = c * exp_to_big(*e);
                let t = Poly::term(coef, Monomial(rest));
                out.add_assign_poly(&t.mul_poly(&da));
            }
        }
        out
    }

    /// Simultaneous substitution of symbols.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Poly>) -> Result<Poly, ExprError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut keep = Vec::new();
            let mut factor = Poly::constant(c.clone());
            for (a, e) in &m.0 {
                match a {
                    Atom::Sym(s) => match map.get(s) {
                        Some(p) => factor = factor.mul_poly(&p.pow(*e)?),
                        None => keep.push((a.clone(), *e)),
                    },
                    Atom::Fun(k, arg) => {
                        if arg.free_symbols().iter().any(|s| map.contains_key(s)) {
                            let na = arg.substitute(map)?;
                            factor = factor.mul_poly(&Poly::kernel(*k, &na)?.pow(*e)?);
                        } else {
                            keep.push((a.clone(), *e));
                        }
                    }
                    Atom::Base(b) => {
                        if b.free_symbols().iter().any(|s| map.contains_key(s)) {
                            let nb = b.substitute(map)?;
                            factor = factor.mul_poly(&nb.pow(*e)?);
                        } else {
                            keep.push((a.clone(), *e));
                        }
                    }
                }
            }
            out.add_assign_poly(&factor.mul_poly(&Poly::from_monomial(Monomial(keep))));
        }
        Ok(out)
    }

    /// Separates the non-monomial denominators: returns `(n, d)` with `self =
    /// n * prod(b^-k)` for `(b, k)` in `d`, where `n` carries no negative
    /// base powers.
    pub fn cleared(&self) -> (Poly, BTreeMap<Poly, i64>) {
        let mut dens: BTreeMap<Poly, i64> = BTreeMap::new();
        for m in self.terms.keys() {
            for (a, e) in &m.0 {
                if let Atom::Base(b) = a {
                    if *e < Exp::zero() {
                        let need = (-*e).ceil().to_integer();
                        let slot = dens.entry(b.clone()).or_insert(0);
                        if need > *slot {
                            *slot = need;
                        }
                    }
                }
            }
        }
        if dens.is_empty() {
            return (self.clone(), dens);
        }
        let mult = Monomial::from_factors(
            dens.iter().map(|(b, k)| (Atom::Base(b.clone()), Exp::from_integer(*k))),
        );
        let mut num = Poly::zero();
        for (m, c) in &self.terms {
            num.add_term(m.mul(&mult), c.clone());
        }
        for (b, k) in dens.iter_mut() {
            while *k > 0 {
                match exact_div(&num, b) {
                    Some(q) => {
                        num = q;
                        *k -= 1;
                    }
                    None => break,
                }
            }
        }
        dens.retain(|_, k| *k > 0);
        (num, dens)
    }

    /// Canonical form: numerator reduced against its base denominators, with
    /// the denominators distributed back over the terms.
    pub fn canonical(&self) -> Poly {
        let (num, dens) = self.cleared();
        if dens.is_empty() {
            return num;
        }
        // Atoms absent from every base act as coefficients of the division,
        // so each of their power classes divides separately.
        let inner: BTreeSet<Atom> = dens.keys().flat_map(|b| b.atoms()).collect();
        let mut groups: BTreeMap<Vec<(Atom, Exp)>, Poly> = BTreeMap::new();
        for (m, c) in num.terms {
            let key = m.0.iter().filter(|(a, _)| !inner.contains(a)).cloned().collect();
            groups.entry(key).or_default().add_raw(m, c);
        }
        let mut out = Poly::zero();
        for (_, mut g) in groups {
            let mut left = dens.clone();
            for (b, k) in left.iter_mut() {
                while *k > 0 {
                    match exact_div(&g, b) {
                        Some(q) => {
                            g = q;
                            *k -= 1;
                        }
                        None => break,
                    }
                }
            }
            let inv = Monomial::from_factors(
                left.iter().filter(|(_, k)| **k > 0).map(|(b, k)| (Atom::Base(b.clone()), Exp::from_integer(-*k))),
            );
            out.add_assign_poly(&g.mul_monomial(&inv, &BigRational::one()));
        }
        out
    }

    /// Exact zero test within the kernel's normal form.
    pub fn is_identically_zero(&self) -> bool {
        self.is_zero() || self.cleared().0.is_zero()
    }

    /// True when some factor is subject to identities the normal form does
    /// not model (logarithms, fractional powers), so a nonzero normal form
    /// does not prove the value nonzero.
    pub fn has_undecidable_atoms(&self) -> bool {
        self.terms.keys().any(|m| {
            m.0.iter().any(|(a, e)| match a {
                Atom::Sym(_) => !e.is_integer(),
                Atom::Fun(Kernel::Ln, _) => true,
                Atom::Fun(_, p) => p.has_undecidable_atoms(),
                Atom::Base(p) => !e.is_integer() || p.has_undecidable_atoms(),
            })
        })
    }
}

fn canon_term(c: BigRational, m: Monomial) -> Poly {
    let mut keep: Vec<(Atom, Exp)> = Vec::new();
    let mut exp_arg: Option<Poly> = None;
    let mut extra: Vec<Poly> = Vec::new();
    for (a, e) in m.0 {
        match a {
            Atom::Fun(Kernel::Exp, arg) => {
                let acc = exp_arg.get_or_insert_with(Poly::zero);
                acc.add_scaled(&arg, &exp_to_big(e));
            }
            Atom::Fun(Kernel::Sin, arg) if e.is_integer() && *e.numer() >= 2 => {
                let k = *e.numer();
                let cos2 = Poly::from_monomial(Monomial::atom(
                    Atom::Fun(Kernel::Cos, arg.clone()),
                    Exp::from_integer(2),
                ));
                let one_minus = Poly::one() - cos2;
                extra.push(one_minus.pow_int((k / 2) as u32));
                if k % 2 == 1 {
                    keep.push((Atom::Fun(Kernel::Sin, arg), Exp::one()));
                }
            }
            Atom::Base(b) if e >= Exp::one() => {
                let f = e.floor();
                let r = e - f;
                extra.push(b.pow_int(f.to_integer() as u32));
                if !r.is_zero() {
                    keep.push((Atom::Base(b), r));
                }
            }
            other => keep.push((other, e)),
        }
    }
    if let Some(arg) = exp_arg {
        let arg = arg.canonical();
        if !arg.is_zero() {
            keep.push((Atom::Fun(Kernel::Exp, arg), Exp::one()));
        }
    }
    let base = Monomial::from_factors(keep);
    let mut out = Poly::zero();
    out.add_term(base, c);
    for p in extra {
        out = out.mul_poly(&p);
    }
    out
}

fn rational_pow(c: &BigRational, e: Exp) -> Poly {
    if e.is_integer() {
        let n = *e.numer();
        let r = if n >= 0 {
            num_traits::pow(c.clone(), n as usize)
        } else {
            num_traits::pow(c.recip(), (-n) as usize)
        };
        return Poly::constant(r);
    }
    let q = *e.denom() as u32;
    let negative = c.is_negative();
    let abs = c.abs();
    let root = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(q);
        (num_traits::pow(r.clone(), q as usize) == *n).then_some(r)
    };
    if !negative || q % 2 == 1 {
        if let (Some(rn), Some(rd)) = (root(abs.numer()), root(abs.denom())) {
            let mut r = BigRational::new(rn, rd);
            if negative {
                r = -r;
            }
            return rational_pow(&r, Exp::from_integer(*e.numer()));
        }
    }
    let f = e.floor();
    let frac = e - f;
    let head = rational_pow(c, f);
    let atom = Monomial::atom(Atom::Base(Poly::constant(c.clone())), frac);
    let mut out = Poly::zero();
    out.add_raw(atom, BigRational::one());
    head.mul_poly(&out)
}

/// Exact division of `n` by the non-monomial `b`, treating every atom power
/// as an independent indeterminate.
fn exact_div(n: &Poly, b: &Poly) -> Option<Poly> {
    if n.is_zero() {
        return Some(Poly::zero());
    }
    let mut atoms: BTreeMap<Atom, i64> = BTreeMap::new();
    for p in [n, b] {
        for m in p.terms.keys() {
            for (a, e) in &m.0 {
                let d = atoms.entry(a.clone()).or_insert(1);
                *d = d.lcm(e.denom());
            }
        }
    }
    let index: Vec<(Atom, i64)> = atoms.into_iter().collect();
    let to_vec = |m: &Monomial| -> Vec<i64> {
        index
            .iter()
            .map(|(a, d)| {
                let e = m.exponent(a) * Exp::from_integer(*d);
                e.to_integer()
            })
            .collect()
    };
    let k = index.len();
    let shift = |p: &Poly| -> Vec<i64> {
        let mut s = alloc::vec![i64::MAX; k];
        for m in p.terms.keys() {
            for (i, v) in to_vec(m).into_iter().enumerate() {
                s[i] = s[i].min(v);
            }
        }
        s
    };
    let sn = shift(n);
    let sb = shift(b);
    let mut rem: BTreeMap<Vec<i64>, BigRational> = BTreeMap::new();
    for (m, c) in &n.terms {
        let v: Vec<i64> = to_vec(m).iter().zip(&sn).map(|(x, s)| x - s).collect();
        rem.insert(v, c.clone());
    }
    let bt: Vec<(Vec<i64>, BigRational)> = b
        .terms
        .iter()
        .map(|(m, c)| (to_vec(m).iter().zip(&sb).map(|(x, s)| x - s).collect(), c.clone()))
        .collect();
    let (lb, lbc) = bt.iter().max_by(|x, y| x.0.cmp(&y.0))?.clone();
    let mut quot: Vec<(Vec<i64>, BigRational)> = Vec::new();
    while let Some((lm, lc)) = rem.last_key_value() {
        let diff: Vec<i64> = lm.iter().zip(&lb).map(|(x, y)| x - y).collect();
        if diff.iter().any(|d| *d < 0) || quot.len() > 4096 {
            return None;
        }
        let coef = lc / &lbc;
        for (bm, bc) in &bt {
            let key: Vec<i64> = bm.iter().zip(&diff).map(|(x, y)| x + y).collect();
            let v = rem.entry(key.clone()).or_insert_with(BigRational::zero);
            *v -= &coef * bc;
            if v.is_zero() {
                rem.remove(&key);
            }
        }
        quot.push((diff, coef));
    }
    let mut out = Poly::zero();
    for (v, c) in quot {
        let factors = index.iter().zip(v.iter().zip(sn.iter().zip(&sb))).map(|((a, d), (x, (s1, s2)))| {
            (a.clone(), Exp::new(x + s1 - s2, *d))
        });
        out.add_term(Monomial::from_factors(factors), c);
    }
    Some(out)
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self.add_assign_poly(&rhs);
        self
    }
}

impl Add<&Poly> for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_assign_poly(rhs);
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self.add_scaled(&rhs, &-BigRational::one());
        self
    }
}

impl Sub<&Poly> for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out.add_scaled(rhs, &-BigRational::one());
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        self.mul_poly(&rhs)
    }
}

impl Mul<&Poly> for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.mul_poly(rhs)
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-BigRational::one())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = (r.numer().bits() as i64 - r.denom().bits() as i64).max(0) as u32;
            let scaled = r / BigRational::from_integer(BigInt::one() << shift);
            let v = scaled.numer().to_f64().unwrap_or(0.0) / scaled.denom().to_f64().unwrap_or(1.0);
            v * libm::pow(2.0, shift as f64)
        }
    }
}
