//! Sparse fraction-free elimination with entries in Q(field symbols).
//!
//! Entries are normal-form polynomials whose symbols are treated as
//! independent transcendentals. Every non-constant pivot is recorded as a
//! genericity assumption.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::expr::{Atom, Exp, Monomial, Poly};

pub type Row = BTreeMap<usize, Poly>;

#[derive(Clone, Debug, Default)]
pub struct Reduced {
    pub ncols: usize,
    /// Pivot column and its fully reduced row.
    pub pivots: Vec<(usize, Row)>,
    /// Columns without a pivot, ascending.
    pub free: Vec<usize>,
    /// Primitive factors of the non-constant pivots.
    pub assumptions: Vec<Poly>,
}

impl Reduced {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

fn record(assumptions: &mut Vec<Poly>, p: &Poly) {
    let (_, g, q) = p.content();
    let mut push = |x: Poly| {
        if !x.is_constant() && !assumptions.contains(&x) {
            assumptions.push(x);
        }
    };
    for (a, _) in g.factors() {
        push(Poly::from_monomial(Monomial::atom(a.clone(), Exp::one())));
    }
    push(q);
}

/// Divides a row by the rational and monomial content of its entries.
fn primitive_row(row: &mut Row) {
    if row.is_empty() {
        return;
    }
    let mut atoms: BTreeSet<Atom> = BTreeSet::new();
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for p in row.values() {
        for (m, c) in p.terms() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
            for (a, _) in m.factors() {
                atoms.insert(a.clone());
            }
        }
    }
    let mut g = Vec::new();
    for a in atoms {
        let mut min: Option<Exp> = None;
        for p in row.values() {
            for (m, _) in p.terms() {
                let e = m.exponent(&a);
                min = Some(min.map_or(e, |x| if e < x { e } else { x }));
            }
        }
        if let Some(e) = min {
            if !e.is_zero() {
                g.push((a, e));
            }
        }
    }
    let r = BigRational::new(num, den);
    let ginv = Monomial::from_factors(g).inverse();
    if r.is_one() && ginv.is_one() {
        return;
    }
    let k = r.recip();
    for p in row.values_mut() {
        *p = p.mul_monomial(&ginv, &k);
    }
}

/// Gauss-Jordan elimination processing columns from last to first, so the
/// free columns come out leftmost.
pub fn reduce(input: Vec<Row>, ncols: usize) -> Reduced {
    let mut rows: Vec<Row> = input.into_iter().filter(|r| !r.is_empty()).collect();
    let mut col_rows: Vec<BTreeSet<usize>> = alloc::vec![BTreeSet::new(); ncols];
    for (i, r) in rows.iter().enumerate() {
        for c in r.keys() {
            col_rows[*c].insert(i);
        }
    }
    let mut used = alloc::vec![false; rows.len()];
    let mut pivot_rows: Vec<(usize, usize)> = Vec::new();
    let mut free = Vec::new();
    let mut assumptions = Vec::new();
    for c in (0..ncols).rev() {
        let best = col_rows[c]
            .iter()
            .filter(|i| !used[**i])
            .min_by_key(|i| {
                let e = &rows[**i][&c];
                (!e.is_constant(), e.len(), rows[**i].len(), **i)
            })
            .copied();
        let Some(r) = best else {
            free.push(c);
            continue;
        };
        used[r] = true;
        pivot_rows.push((c, r));
        let piv = rows[r][&c].clone();
        let constant = piv.as_constant();
        if let Some(k) = &constant {
            let inv = k.recip();
            for v in rows[r].values_mut() {
                *v = v.scale(&inv);
            }
        } else {
            record(&mut assumptions, &piv);
            primitive_row(&mut rows[r]);
        }
        let piv = rows[r][&c].clone();
        let prow = rows[r].clone();
        let others: Vec<usize> = col_rows[c].iter().copied().filter(|i| *i != r).collect();
        for i in others {
            let a = rows[i][&c].clone();
            let old_cols: Vec<usize> = rows[i].keys().copied().collect();
            let mut new = Row::new();
            if piv.as_constant().map(|k| k.is_one()).unwrap_or(false) {
                new = core::mem::take(&mut rows[i]);
                for (col, v) in &prow {
                    let e = new.entry(*col).or_default();
                    *e = &*e - &(&a * v);
                }
            } else {
                for (col, v) in &rows[i] {
                    new.insert(*col, &piv * v);
                }
                for (col, v) in &prow {
                    let e = new.entry(*col).or_default();
                    *e = &*e - &(&a * v);
                }
            }
            new.retain(|_, v| !v.is_identically_zero());
            for v in new.values_mut() {
                *v = v.canonical();
            }
            if piv.as_constant().is_none() {
                primitive_row(&mut new);
            }
            for col in old_cols {
                if !new.contains_key(&col) {
                    col_rows[col].remove(&i);
                }
            }
            for col in new.keys() {
                col_rows[*col].insert(i);
            }
            rows[i] = new;
        }
    }
    free.sort_unstable();
    let mut pivots: Vec<(usize, Row)> = pivot_rows.into_iter().map(|(c, r)| (c, rows[r].clone())).collect();
    pivots.sort_by_key(|(c, _)| *c);
    Reduced { ncols, pivots, free, assumptions }
}

/// Lowest common multiple of the pivot entries, as a polynomial product.
fn common_denominator(dens: &[&Poly]) -> Poly {
    let mut prims: Vec<Poly> = Vec::new();
    let mut mono: BTreeMap<Atom, Exp> = BTreeMap::new();
    for d in dens {
        let (_, g, q) = d.content();
        for (a, e) in g.factors() {
            let slot = mono.entry(a.clone()).or_insert(*e);
            if *e > *slot {
                *slot = *e;
            }
        }
        if !q.is_constant() && !prims.contains(&q) {
            prims.push(q);
        }
    }
    let mut out = Poly::from_monomial(Monomial::from_factors(mono));
    for q in prims {
        out = out.mul_poly(&q);
    }
    out
}

/// Exact quotient `a / b` where `b` divides `a` as a product of content and
/// primitive factors.
fn divide(a: &Poly, b: &Poly) -> Poly {
    if let Some(k) = b.as_constant() {
        return a.scale(&k.recip());
    }
    let (r, g, q) = b.content();
    let ginv = g.inverse();
    let a1 = a.mul_monomial(&ginv, &r.recip());
    if q.is_constant() {
        return a1;
    }
    let inv = q.pow(Exp::new(-1, 1)).expect("pivot is nonzero");
    a1.mul_poly(&inv).canonical()
}

/// Nullspace basis, one vector per free column, in the order of the free
/// columns. Each vector is primitive with a positive entry at its free column.
pub fn nullspace(r: &Reduced) -> Vec<Row> {
    let mut out = Vec::with_capacity(r.free.len());
    for &f in &r.free {
        let involved: Vec<(usize, &Poly, &Poly)> = r
            .pivots
            .iter()
            .filter_map(|(c, row)| row.get(&f).map(|v| (*c, &row[c], v)))
            .collect();
        let dens: Vec<&Poly> = involved.iter().map(|(_, p, _)| *p).collect();
        let d = common_denominator(&dens);
        let mut v = Row::new();
        v.insert(f, d.clone());
        for (c, piv, val) in involved {
            let scale = divide(&d, piv);
            v.insert(c, -(val * &scale).canonical());
        }
        primitive_row(&mut v);
        if v[&f].leading_coefficient().map(|c| c.is_negative()).unwrap_or(false) {
            for x in v.values_mut() {
                *x = -core::mem::take(x);
            }
        }
        out.push(v);
    }
    out
}

pub fn rank(rows: Vec<Row>, ncols: usize) -> usize {
    reduce(rows, ncols).rank()
}

/// Maps keyed vectors to dense column rows: one row per coordinate, one
/// column per vector.
pub fn columns_to_rows<K: Ord + Clone>(vectors: &[&BTreeMap<K, Poly>]) -> Vec<Row> {
    let mut rows: BTreeMap<K, Row> = BTreeMap::new();
    for (j, v) in vectors.iter().enumerate() {
        for (k, p) in v.iter() {
            if !p.is_zero() {
                rows.entry(k.clone()).or_default().insert(j, p.clone());
            }
        }
    }
    rows.into_values().collect()
}

/// Coefficients expressing `target` in the span of `basis`, as
/// numerator/denominator pairs, or `None` when it lies outside.
pub fn span_coefficients<K: Ord + Clone>(
    basis: &[BTreeMap<K, Poly>],
    target: &BTreeMap<K, Poly>,
) -> Option<Vec<(Poly, Poly)>> {
    let mut cols: Vec<&BTreeMap<K, Poly>> = alloc::vec![target];
    cols.extend(basis.iter());
    let rows = columns_to_rows(&cols);
    let red = reduce(rows, cols.len());
    if !red.free.contains(&0) {
        return None;
    }
    let ns = nullspace(&red);
    let v = &ns[red.free.iter().position(|c| *c == 0).unwrap()];
    let den = v[&0].clone();
    Some((1..cols.len()).map(|j| (v.get(&j).map(|x| -x).unwrap_or_default(), den.clone())).collect())
}

/// Rank of a set of keyed vectors.
pub fn rank_of<K: Ord + Clone>(vectors: &[BTreeMap<K, Poly>]) -> usize {
    let cols: Vec<&BTreeMap<K, Poly>> = vectors.iter().collect();
    rank(columns_to_rows(&cols), cols.len())
}
