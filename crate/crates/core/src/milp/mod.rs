//! Solver-agnostic mixed-integer linear model.
//!
//! A [`LinearModel`] is a flat list of bounded variables, sparse linear
//! constraints and a linear objective with a constant offset. Variables and
//! constraints keep their insertion order, which is also the order used by the
//! LP writer and by the solver, so identical build sequences give identical
//! models.

mod eval;
mod lp_format;
mod stats;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

pub use eval::{evaluate, Evaluation, IntegralityViolation, Violation};
pub use lp_format::{export_lp, sanitize_name};
pub use stats::{model_stats, ModelStats};

/// Index of a variable inside its [`LinearModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

/// Index of a constraint inside its [`LinearModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConstraintId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integral(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjSense {
    Minimize,
    Maximize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("duplicate constraint name `{0}`")]
    DuplicateConstraint(String),
    #[error("variable `{name}` has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("binary variable `{0}` must have bounds within [0, 1]")]
    BinaryBounds(String),
    #[error("expression references unknown variable {0}")]
    UnknownVariable(VarId),
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
}

/// Sparse linear expression keyed by variable id.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinExpr<S> {
    terms: BTreeMap<VarId, S>,
}

impl<S: Scalar> LinExpr<S> {
    pub fn new() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (VarId, S)>) -> Self {
        let mut e = Self::new();
        for (v, c) in terms {
            e.add(v, c);
        }
        e
    }

    /// Adds `coef * var`, merging with any existing term for `var`.
    pub fn add(&mut self, var: VarId, coef: S) -> &mut Self {
        let slot = self.terms.entry(var).or_insert_with(S::zero);
        *slot = *slot + coef;
        if *slot == S::zero() {
            self.terms.remove(&var);
        }
        self
    }

    pub fn with(mut self, var: VarId, coef: S) -> Self {
        self.add(var, coef);
        self
    }

    /// Adds `scale * other` term by term.
    pub fn add_expr(&mut self, other: &LinExpr<S>, scale: S) -> &mut Self {
        for (&v, &c) in &other.terms {
            self.add(v, c * scale);
        }
        self
    }

    pub fn coef(&self, var: VarId) -> S {
        self.terms.get(&var).copied().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, S)> + '_ {
        self.terms.iter().map(|(&v, &c)| (v, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Value of the expression at `values` (indexed by [`VarId`]).
    pub fn dot(&self, values: &[S]) -> S {
        self.terms.iter().fold(S::zero(), |acc, (v, &c)| acc + c * values[v.0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable<S> {
    pub name: String,
    pub lower: S,
    pub upper: S,
    pub kind: VarKind,
    /// Branch-and-bound branches on higher priorities first.
    pub priority: i32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub name: String,
    pub expr: LinExpr<S>,
    pub sense: Sense,
    pub rhs: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Objective<S> {
    pub sense: ObjSense,
    pub expr: LinExpr<S>,
    pub offset: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<S> {
    pub name: String,
    vars: Vec<Variable<S>>,
    constraints: Vec<Constraint<S>>,
    objective: Objective<S>,
    var_names: HashMap<String, VarId>,
    con_names: HashMap<String, ConstraintId>,
}

impl<S: Scalar> LinearModel<S> {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            vars: Vec::new(),
            constraints: Vec::new(),
            objective: Objective { sense: ObjSense::Minimize, expr: LinExpr::new(), offset: S::zero() },
            var_names: HashMap::new(),
            con_names: HashMap::new(),
        }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        lower: S,
        upper: S,
        kind: VarKind,
    ) -> Result<VarId, ModelError> {
        let name = name.into();
        if self.var_names.contains_key(&name) {
            return Err(ModelError::DuplicateVariable(name));
        }
        if lower.is_nan() || upper.is_nan() || lower == S::infinity() || upper == S::neg_infinity() {
            return Err(ModelError::NonFinite(name));
        }
        if lower > upper {
            return Err(ModelError::InvertedBounds {
                name,
                lower: lower.to_f64_lossy(),
                upper: upper.to_f64_lossy(),
            });
        }
        if kind == VarKind::Binary && (lower < S::zero() || upper > S::one()) {
            return Err(ModelError::BinaryBounds(name));
        }
        let id = VarId(self.vars.len());
        self.var_names.insert(name.clone(), id);
        self.vars.push(Variable { name, lower, upper, kind, priority: 0 });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, S::zero(), S::one(), VarKind::Binary)
    }

    /// Continuous variable on `[0, +inf)`.
    pub fn add_nonneg(&mut self, name: impl Into<String>) -> Result<VarId, ModelError> {
        self.add_var(name, S::zero(), S::infinity(), VarKind::Continuous)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        expr: LinExpr<S>,
        sense: Sense,
        rhs: S,
    ) -> Result<ConstraintId, ModelError> {
        let name = name.into();
        if self.con_names.contains_key(&name) {
            return Err(ModelError::DuplicateConstraint(name));
        }
        self.check_expr(&expr, &name)?;
        if !rhs.is_finite() {
            return Err(ModelError::NonFinite(name));
        }
        let id = ConstraintId(self.constraints.len());
        self.con_names.insert(name.clone(), id);
        self.constraints.push(Constraint { name, expr, sense, rhs });
        Ok(id)
    }

    pub fn set_objective(&mut self, sense: ObjSense, expr: LinExpr<S>, offset: S) -> Result<(), ModelError> {
        self.check_expr(&expr, "objective")?;
        if !offset.is_finite() {
            return Err(ModelError::NonFinite("objective".into()));
        }
        self.objective = Objective { sense, expr, offset };
        Ok(())
    }

    fn check_expr(&self, expr: &LinExpr<S>, owner: &str) -> Result<(), ModelError> {
        for (v, c) in expr.iter() {
            if v.0 >= self.vars.len() {
                return Err(ModelError::UnknownVariable(v));
            }
            if !c.is_finite() {
                return Err(ModelError::NonFinite(owner.to_string()));
            }
        }
        Ok(())
    }

    /// Tightens or relaxes the bounds of an existing variable.
    pub fn set_bounds(&mut self, var: VarId, lower: S, upper: S) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_priority(&mut self, var: VarId, priority: i32) {
        self.vars[var.0].priority = priority;
    }

    pub fn vars(&self) -> &[Variable<S>] {
        &self.vars
    }

    pub fn var(&self, id: VarId) -> &Variable<S> {
        &self.vars[id.0]
    }

    pub fn var_by_name(&self, name: &str) -> Option<VarId> {
        self.var_names.get(name).copied()
    }

    pub fn constraints(&self) -> &[Constraint<S>] {
        &self.constraints
    }

    pub fn constraint_by_name(&self, name: &str) -> Option<&Constraint<S>> {
        self.con_names.get(name).map(|c| &self.constraints[c.0])
    }

    pub fn objective(&self) -> &Objective<S> {
        &self.objective
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.constraints.is_empty()
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind.is_integral())
    }

    /// Copy of the model with every integrality requirement dropped.
    pub fn relaxation(&self) -> Self {
        let mut m = self.clone();
        for v in &mut m.vars {
            v.kind = VarKind::Continuous;
        }
        m
    }

    /// Converts every coefficient and bound to another scalar type.
    pub fn cast<T: Scalar>(&self) -> LinearModel<T> {
        let conv = |x: S| T::of(x.to_f64_lossy());
        let expr = |e: &LinExpr<S>| LinExpr::from_terms(e.iter().map(|(v, c)| (v, conv(c))));
        LinearModel {
            name: self.name.clone(),
            vars: self
                .vars
                .iter()
                .map(|v| Variable {
                    name: v.name.clone(),
                    lower: conv(v.lower),
                    upper: conv(v.upper),
                    kind: v.kind,
                    priority: v.priority,
                })
                .collect(),
            constraints: self
                .constraints
                .iter()
                .map(|c| Constraint { name: c.name.clone(), expr: expr(&c.expr), sense: c.sense, rhs: conv(c.rhs) })
                .collect(),
            objective: Objective {
                sense: self.objective.sense,
                expr: expr(&self.objective.expr),
                offset: conv(self.objective.offset),
            },
            var_names: self.var_names.clone(),
            con_names: self.con_names.clone(),
        }
    }
}

/// Values for every variable of a model, indexed by [`VarId`].
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<S> {
    values: Vec<S>,
}

impl<S: Scalar> Assignment<S> {
    pub fn new(values: Vec<S>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self { values: vec![S::zero(); n] }
    }

    pub fn get(&self, var: VarId) -> S {
        self.values[var.0]
    }

    pub fn set(&mut self, var: VarId, value: S) {
        self.values[var.0] = value;
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl<S: Scalar> std::ops::Add for &Assignment<S> {
    type Output = Assignment<S>;

    fn add(self, rhs: Self) -> Assignment<S> {
        Assignment::new(self.values.iter().zip(&rhs.values).map(|(&a, &b)| a + b).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_merges_and_drops_zero_terms() {
        let mut e = LinExpr::<f64>::new();
        e.add(VarId(1), 2.0).add(VarId(0), 1.0).add(VarId(1), -2.0);
        assert_eq!(e.len(), 1);
        assert_eq!(e.coef(VarId(0)), 1.0);
        assert_eq!(e.coef(VarId(1)), 0.0);
    }

    #[test]
    fn rejects_bad_variables() {
        let mut m = LinearModel::<f64>::new("t");
        m.add_binary("a").unwrap();
        assert!(matches!(m.add_binary("a"), Err(ModelError::DuplicateVariable(_))));
        assert!(matches!(
            m.add_var("b", 0.0, 2.0, VarKind::Binary),
            Err(ModelError::BinaryBounds(_))
        ));
        assert!(matches!(
            m.add_var("c", 3.0, 2.0, VarKind::Continuous),
            Err(ModelError::InvertedBounds { .. })
        ));
    }

    #[test]
    fn rejects_dangling_and_non_finite_coefficients() {
        let mut m = LinearModel::<f64>::new("t");
        let x = m.add_nonneg("x").unwrap();
        let bad = LinExpr::new().with(VarId(7), 1.0);
        assert!(matches!(
            m.add_constraint("c", bad, Sense::Le, 1.0),
            Err(ModelError::UnknownVariable(VarId(7)))
        ));
        let nan = LinExpr::new().with(x, f64::NAN);
        assert!(matches!(m.add_constraint("c", nan, Sense::Le, 1.0), Err(ModelError::NonFinite(_))));
    }

    #[test]
    fn cast_preserves_structure() {
        let mut m = LinearModel::<f64>::new("t");
        let x = m.add_nonneg("x").unwrap();
        m.add_constraint("c", LinExpr::new().with(x, 0.5), Sense::Ge, 1.0).unwrap();
        let m32: LinearModel<f32> = m.cast();
        assert_eq!(m32.constraints()[0].expr.coef(x), 0.5f32);
        assert_eq!(m32.var(x).upper, f32::INFINITY);
    }
}
