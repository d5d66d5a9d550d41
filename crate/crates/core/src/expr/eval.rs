use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use super::poly::rational_to_f64;
use super::{render, Expr, Kernel, Symbol};

/// Thresholds below which a value counts as singular.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DomainPolicy {
    /// Smallest admissible magnitude of a quantity raised to a negative power.
    pub min_denominator: f64,
    /// Smallest admissible distance of a logarithm or radical argument from
    /// its domain boundary.
    pub kernel_margin: f64,
}

impl DomainPolicy {
    pub const EXACT: DomainPolicy = DomainPolicy { min_denominator: 0.0, kernel_margin: 0.0 };
}

impl Default for DomainPolicy {
    fn default() -> Self {
        DomainPolicy::EXACT
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(Symbol),
    #[error("{detail} in `{subterm}`")]
    Domain { subterm: String, detail: &'static str },
}

#[derive(Clone, Debug)]
enum Node {
    Const(f64),
    Slot(usize),
    Sum(Vec<Node>),
    Prod(Vec<Node>),
    PowI(Box<Node>, i32, usize),
    PowF(Box<Node>, i64, i64, usize),
    Exp(Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Ln(Box<Node>, usize),
}

/// An expression compiled against a fixed slot layout for repeated
/// floating-point evaluation.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    root: Node,
    labels: Vec<String>,
}

impl CompiledExpr {
    pub fn compile(e: &Expr, slots: &[Symbol]) -> Result<Self, EvalError> {
        let index: BTreeMap<&Symbol, usize> = slots.iter().enumerate().map(|(i, s)| (s, i)).collect();
        let mut labels = Vec::new();
        let root = build(e, &index, &mut labels)?;
        Ok(CompiledExpr { root, labels })
    }

    pub fn eval(&self, values: &[f64], policy: &DomainPolicy) -> Result<f64, EvalError> {
        let v = run(&self.root, values, policy, &self.labels)?;
        if !v.is_finite() {
            return Err(EvalError::Domain { subterm: String::from("result"), detail: "non-finite value" });
        }
        Ok(v)
    }
}

fn build(e: &Expr, index: &BTreeMap<&Symbol, usize>, labels: &mut Vec<String>) -> Result<Node, EvalError> {
    Ok(match e {
        Expr::Rational(r) => Node::Const(rational_to_f64(r)),
        Expr::Sym(s) => Node::Slot(*index.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?),
        Expr::Sum(v) => Node::Sum(v.iter().map(|x| build(x, index, labels)).collect::<Result<_, _>>()?),
        Expr::Prod(v) => Node::Prod(v.iter().map(|x| build(x, index, labels)).collect::<Result<_, _>>()?),
        Expr::Pow(b, x) => {
            let inner = Box::new(build(b, index, labels)?);
            labels.push(render(e));
            let l = labels.len() - 1;
            if x.is_integer() && x.numer().abs() <= i32::MAX as i64 {
                Node::PowI(inner, *x.numer() as i32, l)
            } else {
                Node::PowF(inner, *x.numer(), *x.denom(), l)
            }
        }
        Expr::Kernel(k, a) => {
            let inner = Box::new(build(a, index, labels)?);
            match k {
                Kernel::Exp => Node::Exp(inner),
                Kernel::Sin => Node::Sin(inner),
                Kernel::Cos => Node::Cos(inner),
                Kernel::Ln => {
                    labels.push(render(e));
                    Node::Ln(inner, labels.len() - 1)
                }
            }
        }
    })
}

fn run(n: &Node, v: &[f64], p: &DomainPolicy, labels: &[String]) -> Result<f64, EvalError> {
    let dom = |l: usize, detail: &'static str| EvalError::Domain { subterm: labels[l].clone(), detail };
    Ok(match n {
        Node::Const(c) => *c,
        Node::Slot(i) => v[*i],
        Node::Sum(xs) => {
            let mut s = 0.0;
            for x in xs {
                s += run(x, v, p, labels)?;
            }
            s
        }
        Node::Prod(xs) => {
            let mut s = 1.0;
            for x in xs {
                s *= run(x, v, p, labels)?;
            }
            s
        }
        Node::PowI(b, k, l) => {
            let x = run(b, v, p, labels)?;
            if *k < 0 && (x == 0.0 || libm::fabs(x) < p.min_denominator) {
                return Err(dom(*l, "vanishing denominator"));
            }
            libm::pow(x, *k as f64)
        }
        Node::PowF(b, num, den, l) => {
            let x = run(b, v, p, labels)?;
            let e = *num as f64 / *den as f64;
            if den % 2 == 1 && x < 0.0 {
                if *num < 0 && libm::fabs(x) < p.min_denominator.max(f64::MIN_POSITIVE) {
                    return Err(dom(*l, "vanishing denominator"));
                }
                let m = libm::pow(-x, e);
                if num % 2 == 0 {
                    m
                } else {
                    -m
                }
            } else {
                if x < 0.0 {
                    return Err(dom(*l, "negative radicand"));
                }
                if x < p.kernel_margin {
                    return Err(dom(*l, "radicand near domain boundary"));
                }
                if *num < 0 && (x == 0.0 || x < p.min_denominator) {
                    return Err(dom(*l, "vanishing denominator"));
                }
                libm::pow(x, e)
            }
        }
        Node::Exp(a) => libm::exp(run(a, v, p, labels)?),
        Node::Sin(a) => libm::sin(run(a, v, p, labels)?),
        Node::Cos(a) => libm::cos(run(a, v, p, labels)?),
        Node::Ln(a, l) => {
            let x = run(a, v, p, labels)?;
            if x <= 0.0 {
                return Err(dom(*l, "logarithm of a non-positive value"));
            }
            if x < p.kernel_margin {
                return Err(dom(*l, "logarithm argument near domain boundary"));
            }
            libm::log(x)
        }
    })
}

/// Evaluates an expression at a point given as symbol values.
pub fn eval_numeric(e: &Expr, point: &BTreeMap<Symbol, f64>) -> Result<f64, EvalError> {
    let slots: Vec<Symbol> = point.keys().cloned().collect();
    let values: Vec<f64> = point.values().copied().collect();
    CompiledExpr::compile(e, &slots)?.eval(&values, &DomainPolicy::EXACT)
}
