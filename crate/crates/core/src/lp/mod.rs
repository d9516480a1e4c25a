//! Backend-neutral mixed-integer linear programs.
//!
//! Models are always minimizations. [`solve`] runs branch-and-bound over the
//! integer variables with LP relaxations solved by a bounded simplex.

mod bnb;
mod lp_format;

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use thiserror::Error;

pub use bnb::solve;
pub use lp_format::write_lp;

/// Feasibility and integrality tolerance.
pub const TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    /// `f64::INFINITY` when unbounded above.
    pub upper: f64,
    pub integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Le,
    Eq,
    Ge,
}

impl Comparator {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Comparator::Le => lhs <= rhs + tol,
            Comparator::Ge => lhs >= rhs - tol,
            Comparator::Eq => (lhs - rhs).abs() <= tol,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Comparator,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, c)| c * values[v.0]).sum()
    }
}

/// A minimization MILP.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    vars: Vec<Variable>,
    constraints: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    /// Branching priority per variable; higher branches first.
    priority: Vec<u32>,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LpError {
    #[error("malformed model: {0}")]
    Malformed(String),
    #[error("LP backend failure: {0}")]
    Backend(String),
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: f64,
        upper: f64,
        integer: bool,
    ) -> VarId {
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.into(),
            lower,
            upper,
            integer,
        });
        self.priority.push(0);
        id
    }

    /// Fractional variables of higher priority are branched on first.
    pub fn set_priority(&mut self, var: VarId, priority: u32) {
        self.priority[var.0] = priority;
    }

    pub fn priority(&self, var: VarId) -> u32 {
        self.priority[var.0]
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(VarId, f64)>,
        cmp: Comparator,
        rhs: f64,
    ) {
        self.constraints.push(Constraint {
            name: name.into(),
            terms,
            cmp,
            rhs,
        });
    }

    /// Adds `coef * var` to the objective.
    pub fn add_objective_term(&mut self, var: VarId, coef: f64) {
        if coef != 0.0 {
            self.objective.push((var, coef));
        }
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn num_integer(&self) -> usize {
        self.vars.iter().filter(|v| v.integer).count()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|&(v, c)| c * values[v.0]).sum()
    }

    /// Checks structural well-formedness, naming the first offender.
    pub fn validate(&self) -> Result<(), LpError> {
        let mut names = HashSet::new();
        for v in &self.vars {
            if v.name.is_empty() {
                return Err(LpError::Malformed("variable with empty name".into()));
            }
            if !names.insert(v.name.as_str()) {
                return Err(LpError::Malformed(format!(
                    "duplicate variable `{}`",
                    v.name
                )));
            }
            if v.lower.is_nan()
                || v.upper.is_nan()
                || v.lower == f64::INFINITY
                || v.upper == f64::NEG_INFINITY
            {
                return Err(LpError::Malformed(format!(
                    "variable `{}` has invalid bounds",
                    v.name
                )));
            }
            if v.lower > v.upper {
                return Err(LpError::Malformed(format!(
                    "variable `{}` has lower bound {} above upper bound {}",
                    v.name, v.lower, v.upper
                )));
            }
        }
        let check_terms = |terms: &[(VarId, f64)], owner: &str| -> Result<(), LpError> {
            for &(var, c) in terms {
                if var.0 >= self.vars.len() {
                    return Err(LpError::Malformed(format!(
                        "{owner} references undeclared variable #{}",
                        var.0
                    )));
                }
                if !c.is_finite() {
                    return Err(LpError::Malformed(format!(
                        "{owner} has non-finite coefficient on `{}`",
                        self.vars[var.0].name
                    )));
                }
            }
            Ok(())
        };
        check_terms(&self.objective, "objective")?;
        for c in &self.constraints {
            check_terms(&c.terms, &format!("constraint `{}`", c.name))?;
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!(
                    "constraint `{}` has non-finite right-hand side",
                    c.name
                )));
            }
        }
        Ok(())
    }

    /// Name → value view of a dense assignment.
    pub fn named_values(&self, values: &[f64]) -> BTreeMap<String, f64> {
        self.vars
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.name.clone(), x))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Time limit reached with an incumbent.
    Feasible,
    Infeasible,
    Unbounded,
    /// Time limit reached without an incumbent.
    NoSolutionFound,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Feasible => "feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::NoSolutionFound => "no_solution_found",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            SolveStatus::Optimal,
            SolveStatus::Feasible,
            SolveStatus::Infeasible,
            SolveStatus::Unbounded,
            SolveStatus::NoSolutionFound,
        ]
        .into_iter()
        .find(|x| x.as_str() == s)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Dense values indexed by `VarId`; empty without a solution.
    pub values: Vec<f64>,
    pub objective_value: f64,
    pub best_bound: f64,
    pub nodes: u64,
}

impl SolveResult {
    pub fn value(&self, var: VarId) -> f64 {
        self.values[var.0]
    }

    /// Nearest integer of an integer variable's value.
    pub fn int_value(&self, var: VarId) -> i64 {
        self.values[var.0].round() as i64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    UnknownVariable(String),
    MissingVariable(String),
    Bound {
        var: String,
        value: f64,
        lower: f64,
        upper: f64,
    },
    Integrality {
        var: String,
        value: f64,
    },
    Constraint {
        name: String,
        lhs: f64,
        cmp: Comparator,
        rhs: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownVariable(n) => write!(f, "unknown variable `{n}`"),
            Violation::MissingVariable(n) => write!(f, "no value for `{n}`"),
            Violation::Bound {
                var,
                value,
                lower,
                upper,
            } => {
                write!(f, "`{var}` = {value} outside [{lower}, {upper}]")
            }
            Violation::Integrality { var, value } => write!(f, "`{var}` = {value} is not integral"),
            Violation::Constraint {
                name,
                lhs,
                cmp,
                rhs,
            } => {
                write!(f, "`{name}`: {lhs} {cmp} {rhs} does not hold")
            }
        }
    }
}

/// Every bound, integrality and constraint violation beyond [`TOL`].
pub fn validate_solution(model: &LinearModel, values: &BTreeMap<String, f64>) -> Vec<Violation> {
    let mut out = Vec::new();
    let known: HashSet<&str> = model.vars.iter().map(|v| v.name.as_str()).collect();
    for name in values.keys() {
        if !known.contains(name.as_str()) {
            out.push(Violation::UnknownVariable(name.clone()));
        }
    }
    let mut dense = vec![0.0; model.vars.len()];
    for (i, v) in model.vars.iter().enumerate() {
        match values.get(&v.name) {
            Some(&x) => dense[i] = x,
            None => out.push(Violation::MissingVariable(v.name.clone())),
        }
    }
    out.extend(validate_dense(model, &dense));
    out
}

/// [`validate_solution`] over a dense assignment indexed by `VarId`.
pub fn validate_dense(model: &LinearModel, values: &[f64]) -> Vec<Violation> {
    let mut out = Vec::new();
    for (v, &x) in model.vars.iter().zip(values) {
        if !x.is_finite() || x < v.lower - TOL || x > v.upper + TOL {
            out.push(Violation::Bound {
                var: v.name.clone(),
                value: x,
                lower: v.lower,
                upper: v.upper,
            });
        }
        if v.integer && (x - x.round()).abs() > TOL {
            out.push(Violation::Integrality {
                var: v.name.clone(),
                value: x,
            });
        }
    }
    for c in &model.constraints {
        let lhs = c.lhs(values);
        if !c.cmp.holds(lhs, c.rhs, TOL) {
            out.push(Violation::Constraint {
                name: c.name.clone(),
                lhs,
                cmp: c.cmp,
                rhs: c.rhs,
            });
        }
    }
    out
}
