use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use noether_core::checker::{run_trials, CheckConfig, ExtremalSystem, Trial, VerificationReport};
use noether_core::determine::{
    build_determining_system, solve_symmetries, verify_symmetry, Component, DepsMode, DeterminingSystem, GeneratorSpec,
    SymmetryFamily, Verdict,
};
use noether_core::expr::{parse, render_with, substitute, RenderOptions};
use noether_core::noether::{basis_laws, conservation_law, flow_derivative, to_cv_notation, ConservationLaw, MultiplierSource};
use noether_core::ocp::{eliminate_controls, Multipliers, OCProblem, ProblemError, Psi0Mode};
use noether_core::{Expr, Symbol};

use crate::problem_file::{Kind, Problem, ProblemFile};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "noether", version, about = "Symmetries and conservation laws of optimal control problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the determining equations and print the symmetry family.
    Symmetry(Common),
    /// Print the family of conservation laws.
    Noether {
        #[command(flatten)]
        common: Common,
        /// Fix a constant, e.g. `C1=1`. Repeatable.
        #[arg(long = "set", value_name = "CK=VALUE")]
        set: Vec<String>,
    },
    /// Check generators symbolically and laws numerically along extremals.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long = "set", value_name = "CK=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
        t1: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        /// Numeric parameter value, e.g. `m=2`. Unset parameters are 1.
        #[arg(long = "param", value_name = "NAME=VALUE")]
        params: Vec<String>,
    },
    /// Print the optimal control form of a variational file.
    Reduce {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    file: PathBuf,
    /// Maximum total degree of the generator ansatz.
    #[arg(long, default_value_t = 2)]
    degree: u32,
    /// `sym` keeps psi0 symbolic, `-1` fixes normal extremals.
    #[arg(long, allow_hyphen_values = true, value_parser = ["sym", "-1"])]
    psi0: Option<String>,
    #[arg(long, value_enum, default_value_t = Deps::Paper)]
    deps: Deps,
    /// `NAME!=0` or `NAME>0`. Repeatable.
    #[arg(long = "assume", value_name = "CONSTRAINT")]
    assume: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Deps {
    /// T and X free of the controls.
    Paper,
    /// Every generator depends on the controls.
    Maple,
}

/// Captured result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn solver(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_SOLVER, message: message.into() }
}

/// Runs the tool on an argument vector, including the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut out = String::new();
    match dispatch(cli.command, &mut out) {
        Ok(code) => Outcome { code, stdout: out, stderr: String::new() },
        Err(f) => Outcome { code: f.code, stdout: out, stderr: format!("error: {}\n", f.message) },
    }
}

fn dispatch(cmd: Command, out: &mut String) -> Result<i32, Failure> {
    match cmd {
        Command::Symmetry(c) => {
            let s = Session::open(&c)?;
            s.symmetry(out)
        }
        Command::Noether { common, set } => {
            let s = Session::open(&common)?;
            let assignment = s.assignment(&set)?;
            s.noether(&assignment, out)
        }
        Command::Verify { common, set, seed, h, t0, t1, tol, trials, params } => {
            let s = Session::open(&common)?;
            let assignment = s.assignment(&set)?;
            let cfg = CheckConfig { t0, t1, h, tol, trials, seed, ..CheckConfig::default() };
            let values = s.param_values(&params)?;
            s.verify(&assignment, &cfg, &values, out)
        }
        Command::Reduce { file, json } => reduce(&file, json, out),
    }
}

fn read(path: &PathBuf) -> Result<ProblemFile, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    ProblemFile::parse(&src).map_err(|e| {
        if e.line == 0 {
            usage(format!("{}: {}", path.display(), e.message))
        } else {
            usage(format!("{}:{}: {}", path.display(), e.line, e.message))
        }
    })
}

fn reduce(path: &PathBuf, json: bool, out: &mut String) -> Result<i32, Failure> {
    let pf = read(path)?;
    if pf.kind != Kind::Variational {
        return Err(usage(format!("{}: reduce expects a variational file", path.display())));
    }
    let (red, names) = pf.reduced().map_err(|e| usage(e.message))?;
    if json {
        let map: serde_json::Map<String, Value> = names.iter().map(|(s, d)| (s.to_string(), json!(d))).collect();
        let v = json!({ "problem": problem_json(&red), "names": map });
        writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap()).unwrap();
    } else {
        for (s, d) in &names {
            writeln!(out, "# {s} = {d}").unwrap();
        }
        out.push_str(&red.render());
    }
    Ok(EXIT_OK)
}

fn problem_json(pf: &ProblemFile) -> Value {
    let ro = pf.render_options();
    let names = |v: &[Symbol]| v.iter().map(|s| json!(s.to_string())).collect::<Vec<_>>();
    let dynamics: serde_json::Map<String, Value> =
        pf.states.iter().zip(&pf.dynamics).map(|(x, f)| (x.to_string(), json!(render_with(f, &ro)))).collect();
    json!({
        "kind": pf.kind.name(),
        "time": pf.time.to_string(),
        "params": pf.params.iter().map(|p| json!({ "name": p.symbol.to_string(), "positive": p.positive })).collect::<Vec<_>>(),
        "states": names(&pf.states),
        "controls": names(&pf.controls),
        "order": pf.order,
        "L": render_with(&pf.lagrangian, &ro),
        "dynamics": dynamics,
    })
}

/// A parsed file with the symmetry family computed under the chosen flags.
struct Session {
    file: ProblemFile,
    problem: Problem,
    mult: Multipliers,
    sys: DeterminingSystem,
    family: SymmetryFamily,
    json: bool,
    ro: RenderOptions,
}

impl Session {
    fn open(c: &Common) -> Result<Session, Failure> {
        let file = read(&c.file)?;
        let problem = file.to_problem().map_err(|e| usage(format!("{}: {e}", c.file.display())))?;
        let mode = match (c.psi0.as_deref(), file.kind) {
            (Some("sym"), _) => Psi0Mode::Symbolic,
            (Some(_), _) => Psi0Mode::MinusOne,
            (None, Kind::OptimalControl) => Psi0Mode::Symbolic,
            (None, Kind::Variational) => Psi0Mode::MinusOne,
        };
        let p = problem.ocp();
        let mult = p.multipliers(mode);
        let mut declared = Vec::new();
        for a in &c.assume {
            let name = a.strip_suffix("!=0").or_else(|| a.strip_suffix(">0")).map(str::trim);
            let Some(name) = name else {
                return Err(usage(format!("--assume expects NAME!=0 or NAME>0, got `{a}`")));
            };
            let s = Symbol::new(name);
            if !p.param_symbols().contains(&s) {
                return Err(usage(format!("--assume names `{name}`, which is not a parameter")));
            }
            declared.push(s);
        }
        let spec = GeneratorSpec {
            degree: c.degree,
            deps: match c.deps {
                Deps::Paper => DepsMode::Paper,
                Deps::Maple => DepsMode::Maple,
            },
            declared_nonzero: declared,
            ..GeneratorSpec::default()
        };
        let sys = build_determining_system(p, &mult, &spec).map_err(|e| solver(e.to_string()))?;
        let family = solve_symmetries(&sys).map_err(|e| solver(e.to_string()))?;
        let ro = file.render_options();
        Ok(Session { file, problem, mult, sys, family, json: c.json, ro })
    }

    fn p(&self) -> &OCProblem {
        self.problem.ocp()
    }

    fn show(&self, e: &Expr) -> String {
        render_with(e, &self.ro)
    }

    fn assignment(&self, set: &[String]) -> Result<BTreeMap<Symbol, Expr>, Failure> {
        let mut out = BTreeMap::new();
        for item in set {
            let Some((k, v)) = item.split_once('=') else {
                return Err(usage(format!("--set expects CK=VALUE, got `{item}`")));
            };
            let k = Symbol::new(k.trim());
            if !self.family.constants.contains(&k) {
                return Err(usage(format!("--set names `{k}`, which is not a constant of the family")));
            }
            let e = parse(v).map_err(|e| usage(format!("--set {item}: {e}")))?;
            let params = self.p().param_symbols();
            let free = e.to_poly().map_err(|e| usage(format!("--set {item}: {e}")))?.free_symbols();
            if let Some(s) = free.iter().find(|s| !params.contains(s)) {
                return Err(usage(format!("--set {item}: `{s}` is not a parameter")));
            }
            out.insert(k, e);
        }
        Ok(out)
    }

    fn param_values(&self, items: &[String]) -> Result<BTreeMap<Symbol, f64>, Failure> {
        let mut out: BTreeMap<Symbol, f64> = self.p().param_symbols().into_iter().map(|s| (s, 1.0)).collect();
        for item in items {
            let Some((k, v)) = item.split_once('=') else {
                return Err(usage(format!("--param expects NAME=VALUE, got `{item}`")));
            };
            let s = Symbol::new(k.trim());
            if !out.contains_key(&s) {
                return Err(usage(format!("--param names `{s}`, which is not a parameter")));
            }
            let x: f64 = v.trim().parse().map_err(|_| usage(format!("--param {item}: not a number")))?;
            out.insert(s, x);
        }
        for p in &self.p().params {
            if p.positive && out[&p.symbol] <= 0.0 {
                return Err(usage(format!("parameter `{}` is declared positive", p.symbol)));
            }
        }
        Ok(out)
    }

    fn labels(&self) -> Vec<(Component, String)> {
        let (n, m) = (self.p().n(), self.p().m());
        self.sys.components().into_iter().map(|c| (c, c.label(n, m))).collect()
    }

    fn genericity_lines(&self) -> Vec<String> {
        self.family
            .genericity
            .iter()
            .map(|a| format!("{} != 0{}", self.show(&a.expr), if a.declared { " (declared)" } else { "" }))
            .collect()
    }

    fn family_json(&self) -> Value {
        let f = &self.family;
        let g = &f.general;
        let strs = |v: &[Expr]| v.iter().map(|e| json!(self.show(e))).collect::<Vec<_>>();
        let basis: Vec<Value> = f
            .basis
            .iter()
            .map(|b| json!({ "T": self.show(&b.t), "X": strs(&b.x), "U": strs(&b.u), "Psi": strs(&b.psi) }))
            .collect();
        json!({
            "degree": self.sys.spec.degree,
            "psi0": psi0_name(self.mult.mode),
            "dimension": f.dimension(),
            "constants": f.constants.iter().map(|c| json!(c.to_string())).collect::<Vec<_>>(),
            "T": self.show(&g.t),
            "X": strs(&g.x),
            "U": strs(&g.u),
            "Psi": strs(&g.psi),
            "basis": basis,
        })
    }

    fn document(&self, laws: Value, verification: Value) -> String {
        let v = json!({
            "problem": problem_json(&self.file),
            "family": self.family_json(),
            "laws": laws,
            "verification": verification,
            "genericity_assumptions": self.genericity_lines(),
        });
        let mut s = serde_json::to_string_pretty(&v).unwrap();
        s.push('\n');
        s
    }

    fn symmetry(&self, out: &mut String) -> Result<i32, Failure> {
        if self.json {
            out.push_str(&self.document(Value::Null, Value::Null));
            return Ok(EXIT_OK);
        }
        let d = self.sys.spec.degree;
        if self.family.dimension() == 0 {
            writeln!(out, "no nontrivial symmetries at degree {d}").unwrap();
            return Ok(EXIT_OK);
        }
        writeln!(out, "symmetry family of dimension {} at degree {d}", self.family.dimension()).unwrap();
        for (c, label) in self.labels() {
            writeln!(out, "{label} = {}", self.show(self.family.general.get(c))).unwrap();
        }
        self.print_genericity(out);
        Ok(EXIT_OK)
    }

    fn print_genericity(&self, out: &mut String) {
        let lines = self.genericity_lines();
        if !lines.is_empty() {
            writeln!(out, "assuming:").unwrap();
            for l in lines {
                writeln!(out, "  {l}").unwrap();
            }
        }
    }

    fn law(&self, assignment: &BTreeMap<Symbol, Expr>) -> Result<ConservationLaw, Failure> {
        let law = conservation_law(self.p(), &self.mult, &self.family).map_err(|e| solver(e.to_string()))?;
        if assignment.is_empty() {
            Ok(law)
        } else {
            law.specialize(assignment).map_err(|e| usage(e.to_string()))
        }
    }

    /// The law rewritten in derivative notation, with a note on multipliers
    /// left symbolic.
    fn cv_form(&self, law: &ConservationLaw) -> Option<(ConservationLaw, Option<String>)> {
        let Problem::Variational { vp, ocp } = &self.problem else {
            return None;
        };
        match to_cv_notation(law, ocp, vp, &MultiplierSource::Stationarity) {
            Ok(l) => Some((l, None)),
            Err(_) => {
                let l = to_cv_notation(law, ocp, vp, &MultiplierSource::Partial).ok()?;
                let free = l.expression.to_poly().ok()?.free_symbols();
                let kept: Vec<String> = ocp.multipliers(Psi0Mode::MinusOne).psi.iter().filter(|s| free.contains(s)).map(|s| s.to_string()).collect();
                Some((l, Some(kept.join(", "))))
            }
        }
    }

    fn noether(&self, assignment: &BTreeMap<Symbol, Expr>, out: &mut String) -> Result<i32, Failure> {
        let law = self.law(assignment)?;
        let cv = self.cv_form(&law);
        if self.json {
            let basis = basis_laws(self.p(), &self.mult, &self.family).map_err(|e| solver(e.to_string()))?;
            let assign: serde_json::Map<String, Value> = assignment.iter().map(|(k, v)| (k.to_string(), json!(self.show(v)))).collect();
            let laws = json!({
                "law": self.show(&law.expression),
                "free_constants": law.constants.iter().map(|c| json!(c.to_string())).collect::<Vec<_>>(),
                "assignment": assign,
                "basis": basis.iter().map(|e| json!(self.show(e))).collect::<Vec<_>>(),
                "variational": cv.as_ref().map(|(l, _)| json!(render_with(&l.expression, &self.cv_options()))),
                "multipliers_kept": cv.as_ref().and_then(|(_, k)| k.clone()),
            });
            out.push_str(&self.document(laws, Value::Null));
            return Ok(EXIT_OK);
        }
        writeln!(out, "{} = const", self.show(&law.expression)).unwrap();
        if let Some((l, kept)) = cv {
            write!(out, "variational form: {} = const", render_with(&l.expression, &self.cv_options())).unwrap();
            match kept {
                Some(k) if !k.is_empty() => writeln!(out, " (multipliers {k} kept)").unwrap(),
                _ => out.push('\n'),
            }
        }
        self.print_genericity(out);
        Ok(EXIT_OK)
    }

    fn cv_options(&self) -> RenderOptions {
        RenderOptions { derivative_notation: true, ..Default::default() }
    }

    fn verify(
        &self,
        assignment: &BTreeMap<Symbol, Expr>,
        cfg: &CheckConfig,
        values: &BTreeMap<Symbol, f64>,
        out: &mut String,
    ) -> Result<i32, Failure> {
        let p = self.p();
        let mut code = EXIT_OK;

        let mut residual_rows = Vec::new();
        for (c, g) in self.family.constants.iter().zip(&self.family.basis) {
            let v = verify_symmetry(&self.sys, g).map_err(|e| solver(e.to_string()))?;
            let status = match &v {
                Verdict::Zero => "zero".to_string(),
                Verdict::NonZero(r) => {
                    code = code.max(EXIT_VERIFY);
                    format!("nonzero: {}", self.show(&r[0]))
                }
                Verdict::Unknown(r) => {
                    code = EXIT_SOLVER;
                    format!("undecided: {}", self.show(&r[0]))
                }
            };
            residual_rows.push((c.to_string(), status));
        }

        // Laws to check: either the specialized one or one per constant.
        let mut laws: Vec<(String, Expr)> = Vec::new();
        if assignment.is_empty() {
            let basis = basis_laws(p, &self.mult, &self.family).map_err(|e| solver(e.to_string()))?;
            for (c, e) in self.family.constants.iter().zip(basis) {
                laws.push((c.to_string(), e));
            }
        } else {
            laws.push(("law".to_string(), self.law(assignment)?.expression));
        }
        let autonomous = p.is_autonomous().map_err(|e| solver(e.to_string()))?;
        if autonomous {
            laws.push(("H".to_string(), p.hamiltonian(&self.mult).map_err(|e| solver(e.to_string()))?));
        }

        let u_star = eliminate_controls(p, &self.mult);
        let mut flow_rows = Vec::new();
        let mut numeric: Result<Vec<Trial>, String> = Err(String::new());
        let mut numeric_status = String::new();
        match &u_star {
            Ok(_) if laws.is_empty() => numeric_status = "skipped: no laws".to_string(),
            Ok(us) => {
                for (label, e) in &laws {
                    let d = flow_derivative(p, &self.mult, Some(us), e).map_err(|e| solver(e.to_string()))?;
                    let ok = noether_core::expr::is_zero(&d).map_err(|e| solver(e.to_string()))?;
                    if !ok {
                        code = code.max(EXIT_VERIFY);
                    }
                    flow_rows.push((label.clone(), if ok { "0".to_string() } else { self.show(&d) }));
                }
                let normal = p.multipliers(Psi0Mode::MinusOne);
                let fix: BTreeMap<Symbol, Expr> = [(self.mult.psi0.clone(), Expr::int(-1))].into_iter().collect();
                let us_n = us.iter().map(|e| substitute(e, &fix)).collect::<Result<Vec<_>, _>>().map_err(|e| solver(e.to_string()))?;
                let laws_n = laws
                    .iter()
                    .map(|(l, e)| Ok((l.clone(), substitute(e, &fix)?)))
                    .collect::<Result<Vec<_>, noether_core::ExprError>>()
                    .map_err(|e| solver(e.to_string()))?;
                let sys = ExtremalSystem::new(p, &normal, &us_n, values, cfg.policy).map_err(|e| solver(e.to_string()))?;
                numeric = run_trials(&sys, &laws_n, cfg).map_err(|e| e.to_string());
                if let Err(msg) = &numeric {
                    code = EXIT_SOLVER;
                    numeric_status = format!("failed: {msg}");
                }
            }
            Err(ProblemError::SingularControl) => numeric_status = "skipped: singular control".to_string(),
            Err(e) => {
                code = EXIT_SOLVER;
                numeric_status = format!("skipped: {e}");
            }
        }
        let worst: Vec<(VerificationReport, usize)> = match &numeric {
            Ok(trials) => worst_reports(trials),
            Err(_) => Vec::new(),
        };
        if worst.iter().any(|(r, _)| !r.pass) {
            code = code.max(EXIT_VERIFY);
        }
        let rejected: usize = numeric.as_ref().map(|t| t.iter().map(|t| t.rejected).sum()).unwrap_or(0);

        if self.json {
            let reports: Vec<Value> = worst
                .iter()
                .map(|(r, trial)| {
                    json!({
                        "law": r.law,
                        "initial": r.initial,
                        "max_abs_drift": r.max_abs_drift,
                        "relative_drift": r.relative_drift,
                        "tolerance": r.tolerance,
                        "pass": r.pass,
                        "worst_trial": trial,
                    })
                })
                .collect();
            let laws_v: Vec<Value> = laws.iter().map(|(l, e)| json!({ "label": l, "law": self.show(e) })).collect();
            let v = json!({
                "residuals": residual_rows.iter().map(|(c, s)| json!({ "generator": c, "residual": s })).collect::<Vec<_>>(),
                "flow_identity": flow_rows.iter().map(|(c, s)| json!({ "law": c, "derivative": s })).collect::<Vec<_>>(),
                "numeric": {
                    "status": if numeric.is_ok() { "ok".to_string() } else { numeric_status.clone() },
                    "integrator": "rk4",
                    "h": cfg.h,
                    "t0": cfg.t0,
                    "t1": cfg.t1,
                    "trials": cfg.trials,
                    "seed": cfg.seed,
                    "rejected_draws": rejected,
                    "reports": reports,
                },
                "exit_code": code,
            });
            out.push_str(&self.document(json!(laws_v), v));
            return Ok(code);
        }

        let k = residual_rows.len();
        if k == 0 {
            writeln!(out, "symbolic: no basis generators").unwrap();
        } else if residual_rows.iter().all(|(_, s)| s == "zero") {
            writeln!(out, "symbolic: residual zero for all {k} basis generators").unwrap();
        } else {
            writeln!(out, "symbolic:").unwrap();
            for (c, s) in &residual_rows {
                writeln!(out, "  {c}: {s}").unwrap();
            }
        }
        if u_star.is_ok() && !laws.is_empty() {
            if flow_rows.iter().all(|(_, s)| s == "0") {
                writeln!(out, "flow identity: dC/dt = 0 for all {} laws", flow_rows.len()).unwrap();
            } else {
                writeln!(out, "flow identity:").unwrap();
                for (c, s) in &flow_rows {
                    writeln!(out, "  d{c}/dt = {s}").unwrap();
                }
            }
        } else {
            writeln!(out, "flow identity: {numeric_status}").unwrap();
        }
        if numeric.is_err() {
            writeln!(out, "numeric: {numeric_status}").unwrap();
        } else {
            writeln!(
                out,
                "numeric: rk4, h = {}, t in [{}, {}], {} trials, seed {}, tolerance {:e}",
                cfg.h, cfg.t0, cfg.t1, cfg.trials, cfg.seed, cfg.tol
            )
            .unwrap();
            if rejected > 0 {
                writeln!(out, "  {rejected} initial draws rejected as singular or unresolved").unwrap();
            }
            let w = worst.iter().map(|(r, _)| r.law.len()).max().unwrap_or(3).max(3);
            writeln!(out, "  {:<w$}  {:>13}  {:>13}  {:>13}  verdict", "law", "C(t0)", "max drift", "relative").unwrap();
            for (r, _) in &worst {
                writeln!(
                    out,
                    "  {:<w$}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {}",
                    r.law,
                    r.initial,
                    r.max_abs_drift,
                    r.relative_drift,
                    if r.pass { "pass" } else { "FAIL" }
                )
                .unwrap();
            }
        }
        self.print_genericity(out);
        Ok(code)
    }
}

fn psi0_name(m: Psi0Mode) -> &'static str {
    match m {
        Psi0Mode::Symbolic => "sym",
        Psi0Mode::MinusOne => "-1",
    }
}

/// Per law, the report of the trial with the largest relative drift.
fn worst_reports(trials: &[Trial]) -> Vec<(VerificationReport, usize)> {
    let Some(first) = trials.first() else {
        return Vec::new();
    };
    (0..first.reports.len())
        .map(|j| {
            let (i, r) = trials
                .iter()
                .enumerate()
                .map(|(i, t)| (i, &t.reports[j]))
                .fold(None::<(usize, &VerificationReport)>, |best, (i, r)| match best {
                    Some((_, b)) if b.relative_drift >= r.relative_drift => best,
                    _ => Some((i, r)),
                })
                .unwrap();
            (r.clone(), i + 1)
        })
        .collect()
}
