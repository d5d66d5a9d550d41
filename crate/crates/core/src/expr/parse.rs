use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::poly::Exp;
use super::{Expr, ExprError, Kernel, Symbol};

#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `D(x, j)` for the `j`-th derivative of `x`.
    pub derivative_notation: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Comma,
    End,
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '.' || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let bad = || ExprError::MalformedNumber { text: text.clone(), column: col };
            let (int, frac) = match text.split_once('.') {
                Some((a, b)) => (a, Some(b)),
                None => (text.as_str(), None),
            };
            if int.is_empty() || !int.chars().all(|d| d.is_ascii_digit()) {
                return Err(bad());
            }
            let mut value = BigRational::from_integer(int.parse::<BigInt>().map_err(|_| bad())?);
            if let Some(f) = frac {
                if f.is_empty() || !f.chars().all(|d| d.is_ascii_digit()) {
                    return Err(bad());
                }
                let num: BigInt = f.parse().map_err(|_| bad())?;
                let den = num_traits::pow(BigInt::from(10), f.len());
                value += BigRational::new(num, den);
            }
            out.push((Tok::Num(value), col));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let t = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            ',' => Tok::Comma,
            _ => {
                return Err(ExprError::Syntax { column: col, message: format!("unexpected character `{c}`") });
            }
        };
        out.push((t, col));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    opts: ParseOptions,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ExprError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn error(&self, msg: &str) -> ExprError {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            _ => "token".to_string(),
        };
        ExprError::Syntax { column: self.col(), message: format!("{msg}, found {found}") }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut terms = alloc::vec![self.term()?];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Sum(terms) })
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut factors = alloc::vec![self.unary()?];
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    let d = self.unary()?;
                    factors.push(d.pow(-Exp::one()));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Expr::Prod(factors) })
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let col = self.col();
        let ex = self.unary()?;
        let value = ex
            .to_poly()
            .ok()
            .and_then(|p| p.as_constant())
            .ok_or(ExprError::NonConstantExponent { column: col })?;
        let (n, d) = (value.numer().to_i64(), value.denom().to_i64());
        match (n, d) {
            (Some(n), Some(d)) => Ok(base.pow(Exp::new(n, d))),
            _ => Err(ExprError::NonConstantExponent { column: col }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        if matches!(self.peek(), Tok::End | Tok::RParen | Tok::RBracket | Tok::Comma | Tok::Plus | Tok::Star | Tok::Slash | Tok::Caret) {
            return Err(self.error("expected an operand"));
        }
        let (tok, col) = self.bump();
        match tok {
            Tok::Num(v) => Ok(Expr::Rational(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    return self.call(&name, col);
                }
                Ok(Expr::Sym(self.symbol_tail(&name)?))
            }
            _ => Err(ExprError::Syntax { column: col, message: "expected an operand".into() }),
        }
    }

    fn symbol_tail(&mut self, name: &str) -> Result<Symbol, ExprError> {
        if *self.peek() != Tok::LBracket {
            return Ok(Symbol::new(name));
        }
        self.bump();
        let col = self.col();
        let idx = match self.bump().0 {
            Tok::Num(v) if v.is_integer() && v >= BigRational::one() => v.to_integer().to_u32(),
            _ => None,
        };
        let idx = idx.ok_or(ExprError::Syntax { column: col, message: "index must be a positive integer".into() })?;
        self.expect(Tok::RBracket, "`]`")?;
        Ok(Symbol::indexed(name, idx))
    }

    fn call(&mut self, name: &str, col: usize) -> Result<Expr, ExprError> {
        let kernel = match name {
            "sin" => Some(Kernel::Sin),
            "cos" => Some(Kernel::Cos),
            "exp" => Some(Kernel::Exp),
            "ln" => Some(Kernel::Ln),
            "sqrt" | "D" => None,
            _ => return Err(ExprError::UnknownFunction { name: name.into(), column: col }),
        };
        if name == "D" && !self.opts.derivative_notation {
            return Err(ExprError::UnknownFunction { name: name.into(), column: col });
        }
        self.bump();
        if name == "D" {
            let c = self.col();
            let base = match self.bump().0 {
                Tok::Ident(n) => self.symbol_tail(&n)?,
                _ => return Err(ExprError::Syntax { column: c, message: "D expects a variable".into() }),
            };
            self.expect(Tok::Comma, "`,`")?;
            let c = self.col();
            let order = match self.bump().0 {
                Tok::Num(v) if v.is_integer() && v >= BigRational::zero() => v.to_integer().to_u32(),
                _ => None,
            };
            let order = order.ok_or(ExprError::Syntax { column: c, message: "derivative order must be a non-negative integer".into() })?;
            self.expect(Tok::RParen, "`)`")?;
            if let Some((_, k)) = base.as_derivative() {
                return Err(ExprError::Syntax { column: col, message: format!("nested derivative of order {k}") });
            }
            return Ok(Expr::Sym(Symbol::derivative_of(&base, order)));
        }
        let arg = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(match kernel {
            Some(k) => Expr::Kernel(k, Box::new(arg)),
            None => arg.pow(Exp::new(1, 2)),
        })
    }
}

pub fn parse(src: &str) -> Result<Expr, ExprError> {
    parse_with(src, ParseOptions::default())
}

pub fn parse_with(src: &str, opts: ParseOptions) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, opts };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.error("unexpected input"));
    }
    Ok(e)
}
