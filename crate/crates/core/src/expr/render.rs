use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::poly::Exp;
use super::{Expr, Symbol};

#[derive(Clone, Debug, Default)]
pub struct RenderOptions {
    /// Print derivative symbols as `D(x, j)`.
    pub derivative_notation: bool,
    /// Symbols printed as functions of time, `x1(t)`.
    pub time_dependent: BTreeSet<Symbol>,
    pub time: Option<Symbol>,
}

pub fn render(e: &Expr) -> String {
    render_with(e, &RenderOptions::default())
}

pub fn render_with(e: &Expr, opts: &RenderOptions) -> String {
    let mut r = Renderer { opts };
    r.expr(e)
}

struct Renderer<'a> {
    opts: &'a RenderOptions,
}

fn exp_text(e: Exp) -> String {
    if e.is_integer() && *e.numer() > 0 {
        format!("{}", e.numer())
    } else if e.is_integer() {
        format!("({})", e.numer())
    } else {
        format!("({}/{})", e.numer(), e.denom())
    }
}

impl Renderer<'_> {
    fn expr(&mut self, e: &Expr) -> String {
        match e {
            Expr::Sum(terms) if !terms.is_empty() => {
                let mut out = String::new();
                for (i, t) in terms.iter().enumerate() {
                    let (neg, body) = self.signed_term(t);
                    match (i, neg) {
                        (0, true) => {
                            out.push('-');
                        }
                        (0, false) => {}
                        (_, true) => out.push_str(" - "),
                        (_, false) => out.push_str(" + "),
                    }
                    out.push_str(&body);
                }
                out
            }
            other => {
                let (neg, body) = self.signed_term(other);
                if neg {
                    format!("-{body}")
                } else {
                    body
                }
            }
        }
    }

    /// Splits a term into its sign and the text of its absolute value.
    fn signed_term(&mut self, t: &Expr) -> (bool, String) {
        let factors: Vec<&Expr> = match t {
            Expr::Prod(fs) => fs.iter().collect(),
            Expr::Sum(fs) if fs.is_empty() => return (false, "0".into()),
            other => alloc::vec![other],
        };
        let mut coef = BigRational::one();
        let mut num: Vec<String> = Vec::new();
        let mut den: Vec<String> = Vec::new();
        for f in factors {
            match f {
                Expr::Rational(r) => coef *= r,
                Expr::Pow(b, e) if *e < Exp::from_integer(0) => den.push(self.power(b, -*e)),
                other => num.push(self.factor(other)),
            }
        }
        let neg = coef.is_negative();
        let coef = coef.abs();
        let n = coef.numer();
        let d = coef.denom();
        if !n.is_one() || num.is_empty() {
            num.insert(0, n.to_string());
        }
        if !d.is_one() {
            den.insert(0, d.to_string());
        }
        let mut body = num.join("*");
        if !den.is_empty() {
            body.push('/');
            if den.len() == 1 {
                body.push_str(&den[0]);
            } else {
                body.push('(');
                body.push_str(&den.join("*"));
                body.push(')');
            }
        }
        (neg, body)
    }

    fn symbol(&self, s: &Symbol) -> String {
        if self.opts.derivative_notation {
            if let Some((base, k)) = s.as_derivative() {
                return format!("D({base},{k})");
            }
        }
        if self.opts.time_dependent.contains(s) {
            let t = self.opts.time.as_ref().map(|t| t.to_string()).unwrap_or_else(|| "t".into());
            return format!("{s}({t})");
        }
        s.to_string()
    }

    fn power(&mut self, b: &Expr, e: Exp) -> String {
        if e.is_one() {
            return self.factor(b);
        }
        if e == Exp::new(1, 2) {
            return format!("sqrt({})", self.expr(b));
        }
        let base = self.atomic(b);
        format!("{base}^{}", exp_text(e))
    }

    /// A factor of a product.
    fn factor(&mut self, f: &Expr) -> String {
        match f {
            Expr::Sum(_) | Expr::Prod(_) => format!("({})", self.expr(f)),
            Expr::Pow(b, e) => self.power(b, *e),
            other => self.atomic(other),
        }
    }

    /// An operand that can carry a `^` suffix.
    fn atomic(&mut self, f: &Expr) -> String {
        match f {
            Expr::Sym(s) => self.symbol(s),
            Expr::Kernel(k, a) => format!("{}({})", k.name(), self.expr(a)),
            Expr::Rational(r) if r.is_integer() && !r.is_negative() => r.to_string(),
            Expr::Rational(r) => format!("({r})"),
            other => format!("({})", self.expr(other)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{normalize, parse};
    use super::*;

    fn r(s: &str) -> String {
        render(&normalize(&parse(s).unwrap()).unwrap())
    }

    #[test]
    fn readable_forms() {
        assert_eq!(r("x1^2/2"), "x1^2/2");
        assert_eq!(r("-3*x/4"), "-3*x/4");
        assert_eq!(r("K/sqrt(q1^2 + q2^2)"), "K/sqrt(q1^2 + q2^2)");
        assert_eq!(r("x^(5/2)*t^(-1/2)"), "x^(5/2)/sqrt(t)");
        assert_eq!(r("-1/2"), "-1/2");
        assert_eq!(r("0"), "0");
    }

    #[test]
    fn derivative_rendering() {
        let e = Expr::Sym(Symbol::derivative_of(&Symbol::new("x"), 1));
        let o = RenderOptions { derivative_notation: true, ..Default::default() };
        assert_eq!(render_with(&e, &o), "D(x,1)");
    }
}
