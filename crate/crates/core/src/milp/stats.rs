use super::{LinearModel, Sense, VarKind};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModelStats {
    pub continuous: usize,
    pub binary: usize,
    pub integer: usize,
    pub le: usize,
    pub eq: usize,
    pub ge: usize,
    /// Constraint-matrix nonzeros (objective excluded).
    pub nonzeros: usize,
}

impl ModelStats {
    pub fn vars(&self) -> usize {
        self.continuous + self.binary + self.integer
    }

    pub fn constraints(&self) -> usize {
        self.le + self.eq + self.ge
    }
}

pub fn model_stats<S: Scalar>(model: &LinearModel<S>) -> ModelStats {
    let mut s = ModelStats::default();
    for v in model.vars() {
        match v.kind {
            VarKind::Continuous => s.continuous += 1,
            VarKind::Binary => s.binary += 1,
            VarKind::Integer => s.integer += 1,
        }
    }
    for c in model.constraints() {
        match c.sense {
            Sense::Le => s.le += 1,
            Sense::Eq => s.eq += 1,
            Sense::Ge => s.ge += 1,
        }
        s.nonzeros += c.expr.len();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::LinExpr;

    #[test]
    fn counts() {
        assert_eq!(model_stats(&LinearModel::<f64>::new("e")), ModelStats::default());
        let mut m = LinearModel::<f64>::new("m");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        let c = m.add_nonneg("c").unwrap();
        m.add_constraint("r", LinExpr::new().with(a, 1.0).with(b, 1.0).with(c, 2.0), Sense::Ge, 1.0).unwrap();
        let s = model_stats(&m);
        assert_eq!((s.binary, s.continuous, s.integer), (2, 1, 0));
        assert_eq!((s.ge, s.nonzeros), (1, 3));
    }
}
