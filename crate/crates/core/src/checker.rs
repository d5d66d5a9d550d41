//! Numeric verification of first integrals along extremals.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{CompiledExpr, DomainPolicy, EvalError, Expr, ExprError, Poly, Symbol};
use crate::ocp::{extremal_rhs, Multipliers, OCProblem, ProblemError};

/// Steps beyond which an integration is refused.
pub const MAX_STEPS: usize = 50_000_000;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("{error} at t = {t}")]
    Eval { t: f64, error: EvalError },
    #[error(transparent)]
    Compile(EvalError),
    #[error("{steps} steps exceed the cap of {MAX_STEPS}")]
    StepCap { steps: usize },
    #[error("invalid step {0}")]
    BadStep(f64),
    #[error("no admissible initial point after {0} draws")]
    NoAdmissiblePoint(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(x, psi)` stacked, length `2n` each.
    pub points: Vec<Vec<f64>>,
    pub h: f64,
    pub integrator: &'static str,
}

/// The closed-loop canonical system compiled for evaluation. Slots are
/// `t, x.., psi..` followed by the parameters.
#[derive(Clone, Debug)]
pub struct ExtremalSystem {
    slots: Vec<Symbol>,
    rhs: Vec<CompiledExpr>,
    params: Vec<f64>,
    u_star: BTreeMap<Symbol, Poly>,
    n: usize,
    pub policy: DomainPolicy,
    /// Largest admissible change of a component in one step, relative to
    /// `1 + |y|`. Larger jumps count as a singularity of the flow.
    pub jump_limit: f64,
}

impl ExtremalSystem {
    /// `u_star` replaces the controls; `mult` fixes how `psi0` enters.
    pub fn new(
        p: &OCProblem,
        mult: &Multipliers,
        u_star: &[Expr],
        params: &BTreeMap<Symbol, f64>,
        policy: DomainPolicy,
    ) -> Result<Self, CheckError> {
        let (xdot, psidot) = extremal_rhs(p, mult, Some(u_star))?;
        let mut slots = alloc::vec![p.time.clone()];
        slots.extend(p.states.iter().cloned());
        slots.extend(mult.psi.iter().cloned());
        let names = p.param_symbols();
        slots.extend(names.iter().cloned());
        let params = names.iter().map(|s| params.get(s).copied().ok_or_else(|| CheckError::Compile(EvalError::Unbound(s.clone())))).collect::<Result<Vec<_>, _>>()?;
        let rhs = xdot
            .iter()
            .chain(&psidot)
            .map(|e| CompiledExpr::compile(e, &slots).map_err(CheckError::Compile))
            .collect::<Result<Vec<_>, _>>()?;
        let mut us = BTreeMap::new();
        for (u, e) in p.controls.iter().zip(u_star) {
            us.insert(u.clone(), e.to_poly()?);
        }
        Ok(ExtremalSystem { slots, rhs, params, u_star: us, n: p.n(), policy, jump_limit: f64::INFINITY })
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn frame(&self, t: f64, y: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.slots.len());
        v.push(t);
        v.extend_from_slice(y);
        v.extend_from_slice(&self.params);
        v
    }

    fn field(&self, t: f64, y: &[f64], out: &mut [f64]) -> Result<(), CheckError> {
        let frame = self.frame(t, y);
        for (o, f) in out.iter_mut().zip(&self.rhs) {
            *o = f.eval(&frame, &self.policy).map_err(|error| CheckError::Eval { t, error })?;
        }
        Ok(())
    }

    /// Classical fourth-order Runge-Kutta with fixed step.
    pub fn integrate(&self, y0: &[f64], t0: f64, t1: f64, h: f64) -> Result<Trajectory, CheckError> {
        if !h.is_finite() || h <= 0.0 {
            return Err(CheckError::BadStep(h));
        }
        let steps = libm::round((t1 - t0) / h);
        if steps > MAX_STEPS as f64 {
            return Err(CheckError::StepCap { steps: steps as usize });
        }
        let steps = steps.max(0.0) as usize;
        let d = self.dim();
        let mut y = y0.to_vec();
        let mut times = Vec::with_capacity(steps + 1);
        let mut points = Vec::with_capacity(steps + 1);
        times.push(t0);
        points.push(y.clone());
        let (mut k1, mut k2, mut k3, mut k4) = (alloc::vec![0.0; d], alloc::vec![0.0; d], alloc::vec![0.0; d], alloc::vec![0.0; d]);
        let mut tmp = alloc::vec![0.0; d];
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            self.field(t, &y, &mut k1)?;
            for j in 0..d {
                tmp[j] = y[j] + 0.5 * h * k1[j];
            }
            self.field(t + 0.5 * h, &tmp, &mut k2)?;
            for j in 0..d {
                tmp[j] = y[j] + 0.5 * h * k2[j];
            }
            self.field(t + 0.5 * h, &tmp, &mut k3)?;
            for j in 0..d {
                tmp[j] = y[j] + h * k3[j];
            }
            self.field(t + h, &tmp, &mut k4)?;
            let tn = t0 + (i + 1) as f64 * h;
            for j in 0..d {
                let dy = h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
                if libm::fabs(dy) > self.jump_limit * (1.0 + libm::fabs(y[j])) {
                    return Err(CheckError::Eval {
                        t: tn,
                        error: EvalError::Domain { subterm: alloc::format!("{}", self.slots[1 + j]), detail: "step jump" },
                    });
                }
                y[j] += dy;
            }
            if let Some(bad) = y.iter().position(|v| !v.is_finite()) {
                return Err(CheckError::Eval {
                    t: tn,
                    error: EvalError::Domain { subterm: alloc::format!("{}", self.slots[1 + bad]), detail: "non-finite value" },
                });
            }
            times.push(tn);
            points.push(y.clone());
        }
        Ok(Trajectory { times, points, h, integrator: "rk4" })
    }

    /// Compiles a first integral against this system's slots, replacing the
    /// controls by the closed-loop law first.
    pub fn compile_law(&self, law: &Expr) -> Result<CompiledExpr, CheckError> {
        let q = law.to_poly()?.substitute(&self.u_star)?.canonical();
        CompiledExpr::compile(&Expr::from_poly(&q), &self.slots).map_err(CheckError::Compile)
    }

    pub fn eval_law(&self, law: &CompiledExpr, t: f64, y: &[f64]) -> Result<f64, CheckError> {
        law.eval(&self.frame(t, y), &self.policy).map_err(|error| CheckError::Eval { t, error })
    }
}

/// Integrates the extremal system from `(x0, psi)` with parameter values
/// and the default domain policy.
pub fn integrate_extremal(
    p: &OCProblem,
    mult: &Multipliers,
    u_star: &[Expr],
    params: &BTreeMap<Symbol, f64>,
    init: (&[f64], &[f64]),
    t_span: (f64, f64),
    h: f64,
) -> Result<Trajectory, CheckError> {
    let sys = ExtremalSystem::new(p, mult, u_star, params, DomainPolicy::EXACT)?;
    let mut y0 = init.0.to_vec();
    y0.extend_from_slice(init.1);
    sys.integrate(&y0, t_span.0, t_span.1, h)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub law: String,
    pub initial: f64,
    pub max_abs_drift: f64,
    pub relative_drift: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// Evaluates a compiled law along a trajectory.
pub fn drift_check(
    sys: &ExtremalSystem,
    label: &str,
    law: &CompiledExpr,
    traj: &Trajectory,
    tol: f64,
) -> Result<VerificationReport, CheckError> {
    let c0 = sys.eval_law(law, traj.times[0], &traj.points[0])?;
    let mut max = 0.0f64;
    for (t, y) in traj.times.iter().zip(&traj.points) {
        let c = sys.eval_law(law, *t, y)?;
        max = max.max(libm::fabs(c - c0));
    }
    let rel = max / (1.0 + libm::fabs(c0));
    Ok(VerificationReport {
        law: String::from(label),
        initial: c0,
        max_abs_drift: max,
        relative_drift: rel,
        tolerance: tol,
        pass: rel <= tol,
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckConfig {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    pub tol: f64,
    pub trials: usize,
    pub seed: u64,
    /// Draws allowed per trial before giving up.
    pub max_draws: usize,
    pub policy: DomainPolicy,
    /// See [`ExtremalSystem::jump_limit`].
    pub max_jump: f64,
    /// Largest admissible gap, relative to `1 + |y|`, between the runs at
    /// `h` and `h/2`. Draws above it are unresolved and redrawn.
    pub resolve_tol: f64,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            t0: 0.0,
            t1: 10.0,
            h: 1e-3,
            tol: 1e-8,
            trials: 5,
            seed: 42,
            max_draws: 50,
            policy: DomainPolicy { min_denominator: 1e-6, kernel_margin: 1e-3 },
            max_jump: 0.1,
            resolve_tol: 1e-8,
        }
    }
}

/// Seeded initial points, uniform in `[-1, 1]` per component.
#[derive(Clone, Debug)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn draw(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.rng.random_range(-1.0..=1.0)).collect()
    }
}

/// One accepted trial: its initial point and the per-law reports.
#[derive(Clone, Debug, PartialEq)]
pub struct Trial {
    pub initial_point: Vec<f64>,
    /// Draws rejected before this point was accepted.
    pub rejected: usize,
    pub reports: Vec<VerificationReport>,
}

/// Runs `cfg.trials` seeded trials. A draw is rejected and redrawn when the
/// integration or a law evaluation hits the domain policy, when a step jumps,
/// or when the runs at `h` and `h/2` disagree.
pub fn run_trials(sys: &ExtremalSystem, laws: &[(String, Expr)], cfg: &CheckConfig) -> Result<Vec<Trial>, CheckError> {
    let compiled = laws.iter().map(|(_, e)| sys.compile_law(e)).collect::<Result<Vec<_>, _>>()?;
    let mut sys = sys.clone();
    sys.policy = cfg.policy;
    sys.jump_limit = cfg.max_jump;
    let mut sampler = Sampler::new(cfg.seed);
    let mut out = Vec::with_capacity(cfg.trials);
    for _ in 0..cfg.trials {
        let mut rejected = 0;
        loop {
            if rejected >= cfg.max_draws {
                return Err(CheckError::NoAdmissiblePoint(cfg.max_draws));
            }
            let y0 = sampler.draw(sys.dim());
            let attempt = sys.integrate(&y0, cfg.t0, cfg.t1, cfg.h).and_then(|traj| {
                let fine = sys.integrate(&y0, cfg.t0, cfg.t1, cfg.h / 2.0)?;
                let gap = cfg.resolve_tol;
                for (i, a) in traj.points.iter().enumerate() {
                    let Some(b) = fine.points.get(2 * i) else { break };
                    if let Some(j) = (0..a.len()).find(|&j| libm::fabs(a[j] - b[j]) > gap * (1.0 + libm::fabs(b[j]))) {
                        return Err(CheckError::Eval {
                            t: traj.times[i],
                            error: EvalError::Domain { subterm: alloc::format!("{}", sys.slots[1 + j]), detail: "unresolved at step h" },
                        });
                    }
                }
                Ok(traj)
            }).and_then(|traj| {
                laws.iter()
                    .zip(&compiled)
                    .map(|((label, _), c)| drift_check(&sys, label, c, &traj, cfg.tol))
                    .collect::<Result<Vec<_>, _>>()
            });
            match attempt {
                Ok(reports) => {
                    out.push(Trial { initial_point: y0, rejected, reports });
                    break;
                }
                Err(CheckError::Eval { .. }) => rejected += 1,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(out)
}
