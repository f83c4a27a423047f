use thiserror::Error;

use super::{Assignment, ConstraintId, LinearModel, Sense, VarId};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("assignment has {got} values but the model has {expected} variables")]
pub struct MissingValues {
    pub expected: usize,
    pub got: usize,
}

/// Where a violation was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationSite {
    Constraint(ConstraintId),
    Bound(VarId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation<S> {
    pub site: ViolationSite,
    pub name: String,
    /// Amount by which the row (or bound) is exceeded; always positive.
    pub excess: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralityViolation<S> {
    pub var: VarId,
    pub value: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<S> {
    pub objective: S,
    pub violations: Vec<Violation<S>>,
    pub integrality: Vec<IntegralityViolation<S>>,
}

impl<S> Evaluation<S> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty() && self.integrality.is_empty()
    }
}

/// Evaluates `a` against `model`.
///
/// A row is reported when its residual exceeds `feas_tol`; the same tolerance
/// is used for variable bounds and integrality.
pub fn evaluate<S: Scalar>(
    model: &LinearModel<S>,
    a: &Assignment<S>,
    feas_tol: S,
) -> Result<Evaluation<S>, MissingValues> {
    if a.len() != model.num_vars() {
        return Err(MissingValues { expected: model.num_vars(), got: a.len() });
    }
    let values = a.values();
    let objective = model.objective().expr.dot(values) + model.objective().offset;

    let mut violations = Vec::new();
    for (i, c) in model.constraints().iter().enumerate() {
        let lhs = c.expr.dot(values);
        let residual = match c.sense {
            Sense::Le => lhs - c.rhs,
            Sense::Ge => c.rhs - lhs,
            Sense::Eq => (lhs - c.rhs).abs(),
        };
        if residual > feas_tol {
            violations.push(Violation {
                site: ViolationSite::Constraint(ConstraintId(i)),
                name: c.name.clone(),
                excess: residual,
            });
        }
    }

    let mut integrality = Vec::new();
    for (j, v) in model.vars().iter().enumerate() {
        let x = values[j];
        let excess = (v.lower - x).max(x - v.upper);
        if excess > feas_tol {
            violations.push(Violation { site: ViolationSite::Bound(VarId(j)), name: v.name.clone(), excess });
        }
        if v.kind.is_integral() && (x - x.round()).abs() > feas_tol {
            integrality.push(IntegralityViolation { var: VarId(j), value: x });
        }
    }

    Ok(Evaluation { objective, violations, integrality })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{LinExpr, ObjSense, VarKind};
    use proptest::prelude::*;

    #[test]
    fn empty_model_reports_offset() {
        let mut m = LinearModel::<f64>::new("empty");
        m.set_objective(ObjSense::Minimize, LinExpr::new(), 4.5).unwrap();
        let ev = evaluate(&m, &Assignment::zeros(0), 1e-7).unwrap();
        assert_eq!(ev.objective, 4.5);
        assert!(ev.is_feasible());
    }

    #[test]
    fn tolerance_is_exclusive() {
        let tol = 1e-7;
        let mut m = LinearModel::<f64>::new("t");
        let x = m.add_nonneg("x").unwrap();
        m.add_constraint("cap", LinExpr::new().with(x, 1.0), Sense::Le, 5.0).unwrap();
        let ev = evaluate(&m, &Assignment::new(vec![5.0 + tol / 2.0]), tol).unwrap();
        assert!(ev.violations.is_empty());
        let ev = evaluate(&m, &Assignment::new(vec![5.0 + 2.0 * tol]), tol).unwrap();
        assert_eq!(ev.violations.len(), 1);
        assert_eq!(ev.violations[0].name, "cap");
    }

    #[test]
    fn reports_integrality_and_missing_values() {
        let mut m = LinearModel::<f64>::new("t");
        m.add_var("y", 0.0, 3.0, VarKind::Integer).unwrap();
        let ev = evaluate(&m, &Assignment::new(vec![1.5]), 1e-7).unwrap();
        assert_eq!(ev.integrality.len(), 1);
        assert_eq!(evaluate(&m, &Assignment::zeros(0), 1e-7), Err(MissingValues { expected: 1, got: 0 }));
    }

    proptest! {
        #[test]
        fn objective_is_affine(
            coefs in prop::collection::vec(-10.0f64..10.0, 1..8),
            offset in -5.0f64..5.0,
            seed_a in prop::collection::vec(-3.0f64..3.0, 8),
            seed_b in prop::collection::vec(-3.0f64..3.0, 8),
        ) {
            let mut m = LinearModel::<f64>::new("lin");
            let mut e = LinExpr::new();
            for (i, &c) in coefs.iter().enumerate() {
                let v = m.add_var(format!("x{i}"), f64::NEG_INFINITY, f64::INFINITY, VarKind::Continuous).unwrap();
                e.add(v, c);
            }
            m.set_objective(ObjSense::Minimize, e, offset).unwrap();
            let n = coefs.len();
            let a = Assignment::new(seed_a[..n].to_vec());
            let b = Assignment::new(seed_b[..n].to_vec());
            let fa = evaluate(&m, &a, 1e-7).unwrap().objective;
            let fb = evaluate(&m, &b, 1e-7).unwrap().objective;
            let fab = evaluate(&m, &(&a + &b), 1e-7).unwrap().objective;
            prop_assert!((fab - (fa + fb - offset)).abs() < 1e-9);
        }
    }
}
