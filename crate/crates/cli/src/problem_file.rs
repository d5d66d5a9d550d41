//! Line-based problem files.
//!
//! ```text
//! kind optimal_control
//! time t
//! param m>0 K
//! state x1 x2
//! control u
//! L = u^2
//! dx1 = x2
//! dx2 = u
//! ```
//!
//! Variational files use `order r` instead of `control` and write the
//! Lagrangian in `D(x,j)` notation.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use noether_core::expr::{normalize, parse_with, render_with, ParseOptions, RenderOptions, VarOrder};
use noether_core::ocp::{reduce_cv, OCProblem, Param, ProblemError, VariationalProblem};
use noether_core::{Expr, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    OptimalControl,
    Variational,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::OptimalControl => "optimal_control",
            Kind::Variational => "variational",
        }
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FileError {
    /// 1-based; 0 when the problem is not tied to one line.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> FileError {
    FileError { line, message: message.into() }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemFile {
    pub kind: Kind,
    pub time: Symbol,
    pub params: Vec<Param>,
    pub states: Vec<Symbol>,
    pub controls: Vec<Symbol>,
    pub order: Option<u32>,
    pub lagrangian: Expr,
    /// One entry per state, in state order.
    pub dynamics: Vec<Expr>,
}

/// A validated problem ready for the engine.
#[derive(Clone, Debug)]
pub enum Problem {
    Control(OCProblem),
    Variational { vp: VariationalProblem, ocp: OCProblem },
}

impl Problem {
    pub fn ocp(&self) -> &OCProblem {
        match self {
            Problem::Control(p) => p,
            Problem::Variational { ocp, .. } => ocp,
        }
    }
}

fn symbol(text: &str, line: usize) -> Result<Symbol, FileError> {
    match parse_with(text, ParseOptions::default()) {
        Ok(Expr::Sym(s)) => Ok(s),
        _ => Err(err(line, format!("`{text}` is not a valid name"))),
    }
}

fn column_of(src: &str, s: &Symbol) -> Option<usize> {
    let name = s.to_string();
    let bytes = src.as_bytes();
    let mut from = 0;
    while let Some(off) = src[from..].find(&name) {
        let at = from + off;
        let end = at + name.len();
        let word = |i: usize| bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_';
        if (at == 0 || !word(at - 1)) && (end >= bytes.len() || !word(end)) {
            return Some(src[..at].chars().count() + 1);
        }
        from = end;
    }
    None
}

struct Line<'a> {
    no: usize,
    text: &'a str,
    /// Column where `text` starts in the raw line.
    offset: usize,
}

impl ProblemFile {
    pub fn parse(src: &str) -> Result<ProblemFile, FileError> {
        let mut kind = None;
        let mut time: Option<Symbol> = None;
        let mut params = Vec::new();
        let mut states = Vec::new();
        let mut controls = Vec::new();
        let mut order = None;
        let mut lagr: Option<Line> = None;
        let mut dyn_lines: Vec<(String, Line)> = Vec::new();
        let mut saw_control = false;

        for (i, raw) in src.lines().enumerate() {
            let no = i + 1;
            let body = raw.split('#').next().unwrap_or("");
            let trimmed = body.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some((lhs, rhs)) = trimmed.split_once('=') {
                let lhs = lhs.trim();
                let offset = raw.find('=').unwrap() + 2;
                let line = Line { no, text: rhs, offset };
                if lhs == "L" {
                    if lagr.is_some() {
                        return Err(err(no, "second L line"));
                    }
                    lagr = Some(line);
                } else if let Some(name) = lhs.strip_prefix('d') {
                    dyn_lines.push((name.to_string(), line));
                } else {
                    return Err(err(no, format!("unknown assignment to `{lhs}`")));
                }
                continue;
            }
            let mut words = trimmed.split_whitespace();
            let key = words.next().unwrap();
            let rest: Vec<&str> = words.collect();
            match key {
                "kind" => {
                    if kind.is_some() {
                        return Err(err(no, "second kind line"));
                    }
                    kind = Some(match rest.as_slice() {
                        ["optimal_control"] => Kind::OptimalControl,
                        ["variational"] => Kind::Variational,
                        _ => return Err(err(no, "kind must be `optimal_control` or `variational`")),
                    });
                }
                "time" => {
                    let [t] = rest.as_slice() else {
                        return Err(err(no, "time takes one name"));
                    };
                    if time.is_some() {
                        return Err(err(no, "second time line"));
                    }
                    time = Some(symbol(t, no)?);
                }
                "param" => {
                    for w in rest {
                        params.push(match w.strip_suffix(">0") {
                            Some(n) => Param::positive(symbol(n, no)?),
                            None => Param::new(symbol(w, no)?),
                        });
                    }
                }
                "state" => {
                    for w in rest {
                        states.push(symbol(w, no)?);
                    }
                }
                "control" => {
                    saw_control = true;
                    for w in rest {
                        controls.push(symbol(w, no)?);
                    }
                }
                "order" => {
                    let [r] = rest.as_slice() else {
                        return Err(err(no, "order takes one integer"));
                    };
                    let r: u32 = r.parse().map_err(|_| err(no, format!("`{r}` is not an order")))?;
                    if r == 0 {
                        return Err(err(no, "order must be at least 1"));
                    }
                    order = Some(r);
                }
                other => return Err(err(no, format!("unknown declaration `{other}`"))),
            }
        }

        let kind = kind.ok_or_else(|| err(0, "missing kind line"))?;
        let time = time.unwrap_or_else(|| Symbol::new("t"));
        if states.is_empty() {
            return Err(err(0, "no state declared"));
        }
        let lagr = lagr.ok_or_else(|| err(0, "missing L line"))?;
        let popts = ParseOptions { derivative_notation: kind == Kind::Variational };
        let parse_line = |l: &Line| -> Result<Expr, FileError> {
            parse_with(l.text, popts).map_err(|e| err(l.no, shift_columns(&e.to_string(), l.offset - 1)))
        };

        let mut declared: BTreeSet<Symbol> = BTreeSet::new();
        declared.insert(time.clone());
        declared.extend(params.iter().map(|p| p.symbol.clone()));
        declared.extend(states.iter().cloned());
        declared.extend(controls.iter().cloned());

        let lagrangian = parse_line(&lagr)?;
        let mut dynamics: Vec<Option<Expr>> = vec![None; states.len()];
        match kind {
            Kind::OptimalControl => {
                if order.is_some() {
                    return Err(err(0, "order is only valid in variational files"));
                }
                check_declared(&lagr, &lagrangian, &declared)?;
                for (name, line) in &dyn_lines {
                    let s = symbol(name, line.no)?;
                    let Some(k) = states.iter().position(|x| *x == s) else {
                        return Err(err(line.no, format!("`d{name}` names no declared state")));
                    };
                    if dynamics[k].is_some() {
                        return Err(err(line.no, format!("second equation for `{s}`")));
                    }
                    let e = parse_line(line)?;
                    check_declared(line, &e, &declared)?;
                    dynamics[k] = Some(e);
                }
                if let Some(k) = dynamics.iter().position(|d| d.is_none()) {
                    return Err(err(0, format!("missing equation `d{} = ...`", states[k])));
                }
            }
            Kind::Variational => {
                if saw_control {
                    return Err(err(0, "variational files declare no controls"));
                }
                if let Some((_, l)) = dyn_lines.first() {
                    return Err(err(l.no, "variational files have no state equations"));
                }
                if order.is_none() {
                    return Err(err(0, "missing order line"));
                }
                let mut with_derivs = declared.clone();
                for e in lagrangian.to_poly().map_err(|e| err(lagr.no, e.to_string()))?.free_symbols() {
                    if let Some((base, _)) = e.as_derivative() {
                        if states.contains(&base) {
                            with_derivs.insert(e);
                        }
                    }
                }
                check_declared(&lagr, &lagrangian, &with_derivs)?;
            }
        }

        let mut pf = ProblemFile {
            kind,
            time,
            params,
            states,
            controls,
            order,
            lagrangian,
            dynamics: dynamics.into_iter().flatten().collect(),
        };
        pf.to_problem().map_err(|e| err(0, e.to_string()))?;
        pf.canonicalize().map_err(|e| err(0, e.to_string()))?;
        Ok(pf)
    }

    fn var_order(&self) -> VarOrder {
        let mut o = VarOrder::new([self.time.clone()]);
        let r = self.order.unwrap_or(1);
        for j in 0..r.max(1) + 1 {
            for x in &self.states {
                o.push(Symbol::derivative_of(x, j));
            }
            if self.kind == Kind::OptimalControl {
                break;
            }
        }
        for u in &self.controls {
            o.push(u.clone());
        }
        for p in &self.params {
            o.push(p.symbol.clone());
        }
        o
    }

    /// Replaces every expression by its canonical form.
    fn canonicalize(&mut self) -> Result<(), noether_core::ExprError> {
        let ord = self.var_order();
        let canon = |e: &Expr| -> Result<Expr, noether_core::ExprError> { Ok(Expr::from_poly_ordered(&e.to_poly()?.canonical(), &ord)) };
        self.lagrangian = canon(&self.lagrangian)?;
        self.dynamics = self.dynamics.iter().map(canon).collect::<Result<_, _>>()?;
        Ok(())
    }

    pub fn to_problem(&self) -> Result<Problem, ProblemError> {
        match self.kind {
            Kind::OptimalControl => Ok(Problem::Control(OCProblem::new(
                self.time.clone(),
                self.states.clone(),
                self.controls.clone(),
                self.params.clone(),
                self.lagrangian.clone(),
                self.dynamics.clone(),
            )?)),
            Kind::Variational => {
                let vp = VariationalProblem::new(
                    self.time.clone(),
                    self.states.clone(),
                    self.order.unwrap_or(1),
                    self.params.clone(),
                    self.lagrangian.clone(),
                )?;
                let ocp = reduce_cv(&vp);
                Ok(Problem::Variational { vp, ocp })
            }
        }
    }

    pub fn render_options(&self) -> RenderOptions {
        RenderOptions { derivative_notation: self.kind == Kind::Variational, ..Default::default() }
    }

    pub fn render(&self) -> String {
        let ro = self.render_options();
        let mut s = String::new();
        let join = |v: &[Symbol]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        writeln!(s, "kind {}", self.kind.name()).unwrap();
        writeln!(s, "time {}", self.time).unwrap();
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|p| format!("{}{}", p.symbol, if p.positive { ">0" } else { "" })).collect();
            writeln!(s, "param {}", ps.join(" ")).unwrap();
        }
        writeln!(s, "state {}", join(&self.states)).unwrap();
        if let Some(r) = self.order {
            writeln!(s, "order {r}").unwrap();
        }
        if !self.controls.is_empty() {
            writeln!(s, "control {}", join(&self.controls)).unwrap();
        }
        writeln!(s, "L = {}", render_with(&self.lagrangian, &ro)).unwrap();
        for (x, f) in self.states.iter().zip(&self.dynamics) {
            writeln!(s, "d{x} = {}", render_with(f, &ro)).unwrap();
        }
        s
    }

    /// File-safe name of a reduced state.
    fn plain_name(s: &Symbol) -> Symbol {
        if s.name().contains('#') {
            Symbol::new(&s.name().replace('#', "_"))
        } else {
            s.clone()
        }
    }

    /// The optimal control file equivalent to a variational file, plus the
    /// map from new names to derivative notation.
    pub fn reduced(&self) -> Result<(ProblemFile, Vec<(Symbol, String)>), FileError> {
        let Problem::Variational { ocp, .. } = self.to_problem().map_err(|e| err(0, e.to_string()))? else {
            return Err(err(0, "only variational files can be reduced"));
        };
        let rename: std::collections::BTreeMap<Symbol, Expr> = ocp
            .states
            .iter()
            .chain(&ocp.controls)
            .map(|s| (s.clone(), Expr::Sym(Self::plain_name(s))))
            .collect();
        let names: BTreeSet<Symbol> = rename.values().filter_map(|e| if let Expr::Sym(s) = e { Some(s.clone()) } else { None }).collect();
        if names.len() != rename.len() || self.params.iter().any(|p| names.contains(&p.symbol)) {
            return Err(err(0, "reduced names collide; rename the dependent variables"));
        }
        let sub = |e: &Expr| noether_core::expr::substitute(e, &rename).map_err(|e| err(0, e.to_string()));
        let plain = |s: &Symbol| Self::plain_name(s);
        let mut map = Vec::new();
        let ro = RenderOptions { derivative_notation: true, ..Default::default() };
        for s in ocp.states.iter().chain(&ocp.controls) {
            if s.as_derivative().is_some() {
                map.push((plain(s), render_with(&Expr::Sym(s.clone()), &ro)));
            }
        }
        let mut pf = ProblemFile {
            kind: Kind::OptimalControl,
            time: ocp.time.clone(),
            params: ocp.params.clone(),
            states: ocp.states.iter().map(plain).collect(),
            controls: ocp.controls.iter().map(plain).collect(),
            order: None,
            lagrangian: sub(&ocp.lagrangian)?,
            dynamics: ocp.dynamics.iter().map(sub).collect::<Result<_, _>>()?,
        };
        pf.canonicalize().map_err(|e| err(0, e.to_string()))?;
        Ok((pf, map))
    }
}

fn check_declared(line: &Line, e: &Expr, declared: &BTreeSet<Symbol>) -> Result<(), FileError> {
    let free = normalize(e).and_then(|n| n.to_poly()).map_err(|x| err(line.no, x.to_string()))?.free_symbols();
    let raw = e.to_poly().map_err(|x| err(line.no, x.to_string()))?.free_symbols();
    for s in raw.iter().chain(free.iter()) {
        if !declared.contains(s) {
            let col = column_of(line.text, s).map(|c| c + line.offset - 1);
            return Err(err(
                line.no,
                match col {
                    Some(c) => format!("undeclared symbol `{s}` at column {c}"),
                    None => format!("undeclared symbol `{s}`"),
                },
            ));
        }
    }
    Ok(())
}

/// Rewrites `column N` in an expression error to a column of the raw line.
fn shift_columns(msg: &str, by: usize) -> String {
    match msg.rsplit_once("column ") {
        Some((head, n)) => match n.parse::<usize>() {
            Ok(c) => format!("{head}column {}", c + by),
            Err(_) => msg.to_string(),
        },
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CAR: &str = "kind optimal_control\nstate x1 x2 x3\ncontrol u1 u2\nL = u1^2 + u2^2\ndx1 = u1*cos(x3)\ndx2 = u1*sin(x3)\ndx3 = u2\n";

    #[test]
    fn round_trip() {
        let a = ProblemFile::parse(CAR).unwrap();
        let b = ProblemFile::parse(&a.render()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.render(), b.render());
    }

    #[test]
    fn undeclared_symbol_is_located() {
        let src = CAR.replace("dx3 = u2", "dx3 = u2 + y");
        let e = ProblemFile::parse(&src).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.message.contains("`y` at column 12"), "{}", e.message);
    }

    #[test]
    fn parse_error_column_is_shifted() {
        let src = CAR.replace("dx3 = u2", "dx3 = u2 +");
        let e = ProblemFile::parse(&src).unwrap_err();
        assert_eq!(e.line, 7);
        assert!(e.message.ends_with("column 11"), "{}", e.message);
    }

    #[test]
    fn variational_file() {
        let src = "kind variational\nparam m>0\nstate x\norder 1\nL = m*D(x,1)^2/2 - x^2\n";
        let pf = ProblemFile::parse(src).unwrap();
        assert!(pf.params[0].positive);
        assert_eq!(ProblemFile::parse(&pf.render()).unwrap(), pf);
        let (red, map) = pf.reduced().unwrap();
        assert_eq!(red.states.len(), 1);
        assert_eq!(map[0].1, "D(x,1)");
        assert_eq!(ProblemFile::parse(&red.render()).unwrap(), red);
    }

    #[test]
    fn missing_equation() {
        let src = CAR.replace("dx2 = u1*sin(x3)\n", "");
        assert!(ProblemFile::parse(&src).unwrap_err().message.contains("dx2"));
    }
}
