use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use num_traits::{One, Zero};

use super::poly::{Atom, Exp, Monomial, Poly};
use super::{render, Expr, ExprError};

/// Coefficients keyed by the exponent vector over the indeterminates.
pub type Coefficients = BTreeMap<Vec<u32>, Expr>;

fn indeterminate_atom(e: &Expr) -> Result<Atom, ExprError> {
    let p = e.to_poly()?;
    let bad = || ExprError::NonPolynomial { subterm: render(e) };
    let (m, c) = p.as_single_term().ok_or_else(bad)?;
    match m.factors() {
        [(a, x)] if c.is_one() && x.is_one() => Ok(a.clone()),
        _ => Err(bad()),
    }
}

fn contains(a: &Atom, target: &Atom) -> bool {
    if a == target {
        return true;
    }
    match a {
        Atom::Sym(_) => false,
        Atom::Fun(_, p) | Atom::Base(p) => p.terms().any(|(m, _)| m.factors().iter().any(|(b, _)| contains(b, target))),
    }
}

/// Splits a normal form into coefficients of monomials in `indets`.
pub fn collect_poly(p: &Poly, indets: &[Atom]) -> Result<BTreeMap<Vec<u32>, Poly>, ExprError> {
    let mut out: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut key = alloc::vec![0u32; indets.len()];
        let mut rest = Vec::new();
        for (a, e) in m.factors() {
            if let Some(i) = indets.iter().position(|x| x == a) {
                if !e.is_integer() || *e < Exp::zero() {
                    return Err(non_poly(a, *e));
                }
                key[i] = *e.numer() as u32;
            } else if indets.iter().any(|x| contains(a, x)) {
                return Err(non_poly(a, *e));
            } else {
                rest.push((a.clone(), *e));
            }
        }
        out.entry(key).or_default().add_term(Monomial::from_factors(rest), c.clone());
    }
    out.retain(|_, v| !v.is_zero());
    Ok(out)
}

fn non_poly(a: &Atom, e: Exp) -> ExprError {
    let p = Poly::from_monomial(Monomial::atom(a.clone(), e));
    ExprError::NonPolynomial { subterm: render(&Expr::from_poly(&p)) }
}

/// Coefficients of `e` as a polynomial in the given symbols or kernels.
pub fn collect_coefficients(e: &Expr, indeterminates: &[Expr]) -> Result<Coefficients, ExprError> {
    let atoms = indeterminates.iter().map(indeterminate_atom).collect::<Result<Vec<_>, _>>()?;
    let p = e.to_poly()?.canonical();
    Ok(collect_poly(&p, &atoms)?.into_iter().map(|(k, v)| (k, Expr::from_poly(&v.canonical()))).collect())
}

#[cfg(test)]
mod tests {
    use super::super::{normalize, parse};
    use super::*;

    #[test]
    fn collects_over_symbols() {
        let e = parse("a*y^2 + b*y + c + y*cos(x)").unwrap();
        let c = collect_coefficients(&e, &[parse("y").unwrap()]).unwrap();
        assert_eq!(c[&alloc::vec![2]], parse("a").unwrap());
        assert_eq!(c[&alloc::vec![1]], normalize(&parse("b + cos(x)").unwrap()).unwrap());
        assert_eq!(c[&alloc::vec![0]], parse("c").unwrap());
    }

    #[test]
    fn rejects_non_polynomial_dependence() {
        let e = parse("exp(y)*y").unwrap();
        let err = collect_coefficients(&e, &[parse("y").unwrap()]).unwrap_err();
        assert_eq!(err, ExprError::NonPolynomial { subterm: "exp(y)".into() });
        assert!(collect_coefficients(&parse("1/y").unwrap(), &[parse("y").unwrap()]).is_err());
    }

    #[test]
    fn collects_over_kernels() {
        let e = parse("u1*cos(x3) + 2*cos(x3)^2").unwrap();
        let c = collect_coefficients(&e, &[parse("cos(x3)").unwrap()]).unwrap();
        assert_eq!(c[&alloc::vec![2]], Expr::int(2));
    }
}
