//! Exact symbolic expressions over the rationals.
//!
//! [`Expr`] is the tree used at the boundaries (parsing, rendering, public
//! results). Arithmetic happens on the normal form [`Poly`]; converting a
//! `Poly` back yields the canonical tree.

mod collect;
mod eval;
mod order;
mod parse;
pub mod poly;
mod render;
mod symbol;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub use collect::{collect_coefficients, collect_poly, Coefficients};
pub use eval::{eval_numeric, CompiledExpr, DomainPolicy, EvalError};
pub use order::VarOrder;
pub use parse::{parse, parse_with, ParseOptions};
pub use poly::{Atom, Exp, Monomial, Poly};
pub use render::{render, render_with, RenderOptions};
pub use symbol::Symbol;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kernel {
    Exp,
    Sin,
    Cos,
    Ln,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Exp => "exp",
            Kernel::Sin => "sin",
            Kernel::Cos => "cos",
            Kernel::Ln => "ln",
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Expr {
    Rational(BigRational),
    Sym(Symbol),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, Exp),
    Kernel(Kernel, Box<Expr>),
}

#[derive(Clone, PartialEq, Eq, Debug, thiserror::Error)]
pub enum ExprError {
    #[error("{message} at column {column}")]
    Syntax { column: usize, message: String },
    #[error("unknown function `{name}` at column {column}")]
    UnknownFunction { name: String, column: usize },
    #[error("malformed rational literal `{text}` at column {column}")]
    MalformedNumber { text: String, column: usize },
    #[error("exponent at column {column} is not a rational constant")]
    NonConstantExponent { column: usize },
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of zero")]
    LogOfZero,
    #[error("expression is not polynomial in the indeterminates: `{subterm}`")]
    NonPolynomial { subterm: String },
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Rational(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn sym(name: &str) -> Expr {
        Expr::Sym(Symbol::new(name))
    }

    pub fn symbol(s: &Symbol) -> Expr {
        Expr::Sym(s.clone())
    }

    pub fn pow(self, e: Exp) -> Expr {
        Expr::Pow(Box::new(self), e)
    }

    pub fn kernel(k: Kernel, arg: Expr) -> Expr {
        Expr::Kernel(k, Box::new(arg))
    }

    /// Converts to the normal form.
    pub fn to_poly(&self) -> Result<Poly, ExprError> {
        Ok(match self {
            Expr::Rational(r) => Poly::constant(r.clone()),
            Expr::Sym(s) => Poly::symbol(s),
            Expr::Sum(v) => {
                let mut acc = Poly::zero();
                for e in v {
                    acc.add_assign_poly(&e.to_poly()?);
                }
                acc
            }
            Expr::Prod(v) => {
                let mut acc = Poly::one();
                for e in v {
                    acc = acc.mul_poly(&e.to_poly()?);
                }
                acc
            }
            Expr::Pow(b, e) if e.is_integer() => match &**b {
                Expr::Pow(inner, k) if k.is_integer() => inner.to_poly()?.pow(*k * *e)?,
                Expr::Prod(v) => {
                    let mut acc = Poly::one();
                    for f in v {
                        acc = acc.mul_poly(&Expr::Pow(Box::new(f.clone()), *e).to_poly()?);
                    }
                    acc
                }
                _ => b.to_poly()?.pow(*e)?,
            },
            Expr::Pow(b, e) => b.to_poly()?.pow(*e)?,
            Expr::Kernel(k, a) => Poly::kernel(*k, &a.to_poly()?)?,
        })
    }

    /// Canonical tree of a normal form, using the default symbol order.
    pub fn from_poly(p: &Poly) -> Expr {
        order::to_expr(p, &VarOrder::default())
    }

    pub fn from_poly_ordered(p: &Poly, ord: &VarOrder) -> Expr {
        order::to_expr(p, ord)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Rational(r) if r.is_zero())
    }

    /// Rational value of a constant tree, if it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Expr::Rational(r) => Some(r.clone()),
            _ => None,
        }
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Expr {
        Expr::int(n)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Expr {
        Expr::Sym(s)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Sum(alloc::vec![self, rhs])
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Sum(alloc::vec![self, -rhs])
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Prod(alloc::vec![self, rhs])
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Prod(alloc::vec![Expr::Rational(-BigRational::one()), self])
    }
}

/// Partial derivative, returned in canonical form.
pub fn differentiate(e: &Expr, v: &Symbol) -> Result<Expr, ExprError> {
    Ok(Expr::from_poly(&e.to_poly()?.diff(v).canonical()))
}

/// Canonical form. Two expressions are equal in the kernel's model exactly
/// when their normal forms are equal.
pub fn normalize(e: &Expr) -> Result<Expr, ExprError> {
    Ok(Expr::from_poly(&e.to_poly()?.canonical()))
}

/// Simultaneous substitution followed by normalization.
pub fn substitute(e: &Expr, bindings: &BTreeMap<Symbol, Expr>) -> Result<Expr, ExprError> {
    let map = bindings
        .iter()
        .map(|(k, v)| Ok((k.clone(), v.to_poly()?)))
        .collect::<Result<BTreeMap<_, _>, ExprError>>()?;
    Ok(Expr::from_poly(&e.to_poly()?.substitute(&map)?.canonical()))
}

/// Exact zero test of an expression.
pub fn is_zero(e: &Expr) -> Result<bool, ExprError> {
    Ok(e.to_poly()?.is_identically_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Expr {
        parse(s).unwrap()
    }

    fn n(s: &str) -> Expr {
        normalize(&p(s)).unwrap()
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(n("sin(x)^2 + cos(x)^2"), Expr::one());
        assert_eq!(n("exp(a)*exp(b)"), n("exp(a + b)"));
        assert_eq!(n("exp(0)"), Expr::one());
        assert_eq!(n("(x^2 - 1)/(x + 1)"), n("x - 1"));
        assert_eq!(n("0.25*x"), n("x/4"));
    }

    #[test]
    fn derivative_of_product() {
        let e = p("x^2*sin(x)");
        let d = differentiate(&e, &Symbol::new("x")).unwrap();
        assert_eq!(d, n("2*x*sin(x) + x^2*cos(x)"));
    }

    #[test]
    fn substitution_specializes() {
        let e = p("C1*x*psi - H*C2");
        let mut b = BTreeMap::new();
        b.insert(Symbol::new("C1"), Expr::one());
        b.insert(Symbol::new("C2"), Expr::zero());
        assert_eq!(substitute(&e, &b).unwrap(), n("x*psi"));
    }

    #[test]
    fn division_by_zero_literal() {
        assert_eq!(normalize(&p("1/(x - x)")), Err(ExprError::DivisionByZero));
    }
}
