//! Conservation laws `psi^T X - H T` of symmetry families.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::determine::{Generator, SymmetryFamily};
use crate::expr::{Expr, ExprError, Poly, Symbol, VarOrder};
use crate::ocp::{solve_multipliers, Multipliers, OCProblem, ProblemError, Psi0Mode, VariationalProblem};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NoetherError {
    #[error("`{0}` is not a constant of this law")]
    UnknownConstant(Symbol),
    #[error("multipliers {} remain in the law", list(.0))]
    MultipliersRemain(Vec<Symbol>),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

fn list(v: &[Symbol]) -> String {
    v.iter().map(|s| alloc::format!("{s}")).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationLaw {
    pub expression: Expr,
    /// Constants still free in `expression`.
    pub constants: Vec<Symbol>,
    pub psi0_mode: Psi0Mode,
    order: VarOrder,
}

impl ConservationLaw {
    pub fn is_zero(&self) -> Result<bool, ExprError> {
        crate::expr::is_zero(&self.expression)
    }

    /// Display order used for the expression.
    pub fn var_order(&self) -> &VarOrder {
        &self.order
    }

    /// Substitutes values for some constants; the rest stay symbolic.
    pub fn specialize(&self, assignment: &BTreeMap<Symbol, Expr>) -> Result<ConservationLaw, NoetherError> {
        if let Some(k) = assignment.keys().find(|k| !self.constants.contains(k)) {
            return Err(NoetherError::UnknownConstant(k.clone()));
        }
        let map = assignment
            .iter()
            .map(|(k, v)| Ok((k.clone(), v.to_poly()?)))
            .collect::<Result<BTreeMap<_, _>, ExprError>>()?;
        let q = self.expression.to_poly()?.substitute(&map)?.canonical();
        Ok(self.rebuild(q, self.constants.iter().filter(|c| !assignment.contains_key(c)).cloned().collect()))
    }

    fn rebuild(&self, q: Poly, constants: Vec<Symbol>) -> ConservationLaw {
        ConservationLaw {
            expression: Expr::from_poly_ordered(&q, &self.order),
            constants,
            psi0_mode: self.psi0_mode,
            order: self.order.clone(),
        }
    }
}

/// `psi^T X - H T` for one generator, in normal form.
pub fn generator_law(p: &OCProblem, mult: &Multipliers, g: &Generator) -> Result<Poly, ExprError> {
    let h = p.hamiltonian_poly(mult)?;
    let mut c = -h.mul_poly(&g.t.to_poly()?);
    for (psi, x) in mult.psi.iter().zip(&g.x) {
        c.add_assign_poly(&Poly::symbol(psi).mul_poly(&x.to_poly()?));
    }
    Ok(c.canonical())
}

/// The law family `sum C_k (psi^T X_k - H T_k)`.
pub fn conservation_law(p: &OCProblem, mult: &Multipliers, family: &SymmetryFamily) -> Result<ConservationLaw, ExprError> {
    let mut acc = Poly::zero();
    for (c, g) in family.constants.iter().zip(&family.basis) {
        acc.add_assign_poly(&Poly::symbol(c).mul_poly(&generator_law(p, mult, g)?));
    }
    let order = p.var_order(mult).prepended(&family.constants);
    Ok(ConservationLaw {
        expression: Expr::from_poly_ordered(&acc.canonical(), &order),
        constants: family.constants.clone(),
        psi0_mode: mult.mode,
        order,
    })
}

/// One law per basis generator, in basis order.
pub fn basis_laws(p: &OCProblem, mult: &Multipliers, family: &SymmetryFamily) -> Result<Vec<Expr>, ExprError> {
    let order = p.var_order(mult);
    family.basis.iter().map(|g| Ok(Expr::from_poly_ordered(&generator_law(p, mult, g)?, &order))).collect()
}

/// How `to_cv_notation` obtains the multipliers.
#[derive(Clone, Debug, PartialEq)]
pub enum MultiplierSource {
    /// Solve the stationarity condition; every multiplier must be eliminated.
    Stationarity,
    /// Eliminate what stationarity determines and keep the rest symbolic.
    Partial,
    /// Substitute the given expressions.
    Given(BTreeMap<Symbol, Expr>),
}

/// Rewrites a law of `reduce_cv(vp)` in the variables of `vp`: `psi0 = -1`,
/// multipliers replaced according to `source`. The stacked states already
/// are derivative symbols, so rendering with derivative notation prints
/// `D(x,j)`.
pub fn to_cv_notation(
    law: &ConservationLaw,
    p: &OCProblem,
    vp: &VariationalProblem,
    source: &MultiplierSource,
) -> Result<ConservationLaw, NoetherError> {
    debug_assert_eq!(p.n(), vp.dependents.len() * vp.order as usize);
    let normal = p.multipliers(Psi0Mode::MinusOne);
    let mut map: BTreeMap<Symbol, Poly> = BTreeMap::new();
    map.insert(normal.psi0.clone(), Poly::integer(-1));
    let given = match source {
        MultiplierSource::Given(m) => m.clone(),
        _ => solve_multipliers(p, &normal)?,
    };
    for (k, v) in &given {
        map.insert(k.clone(), v.to_poly()?);
    }
    let q = law.expression.to_poly()?.substitute(&map)?.canonical();
    if *source == MultiplierSource::Stationarity {
        let free = q.free_symbols();
        let left: Vec<Symbol> = normal.psi.iter().filter(|s| free.contains(s)).cloned().collect();
        if !left.is_empty() {
            return Err(NoetherError::MultipliersRemain(left));
        }
    }
    let mut out = law.rebuild(q, law.constants.clone());
    out.psi0_mode = Psi0Mode::MinusOne;
    Ok(out)
}

/// Total time derivative of `c` along extremals: `x' = dH/dpsi`,
/// `psi' = -dH/dx`, controls replaced by `u_star` first when given.
pub fn flow_derivative(p: &OCProblem, mult: &Multipliers, u_star: Option<&[Expr]>, c: &Expr) -> Result<Expr, ExprError> {
    let h = p.hamiltonian_poly(mult)?;
    let mut umap = BTreeMap::new();
    if let Some(us) = u_star {
        for (u, e) in p.controls.iter().zip(us) {
            umap.insert(u.clone(), e.to_poly()?);
        }
    }
    let h = h.substitute(&umap)?;
    let c = c.to_poly()?.substitute(&umap)?;
    let mut d = c.diff(&p.time);
    for (x, psi) in p.states.iter().zip(&mult.psi) {
        d.add_assign_poly(&c.diff(x).mul_poly(&h.diff(psi)));
        d = &d - &c.diff(psi).mul_poly(&h.diff(x));
    }
    Ok(Expr::from_poly_ordered(&d.canonical(), &p.var_order(mult)))
}
