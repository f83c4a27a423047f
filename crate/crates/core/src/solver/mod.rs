//! Embedded LP / MILP optimizer.
//!
//! [`solve_lp`] runs a bounded-variable primal simplex on the continuous
//! relaxation of a model. [`solve_milp`] wraps it in a best-bound
//! branch-and-bound that branches on the most fractional integer variable.
//! For fixed parameters both are deterministic; only a time limit can make
//! two runs differ.

mod bnb;
mod simplex;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::milp::{evaluate, Assignment, LinearModel};
use crate::scalar::Scalar;

pub use bnb::{solve_milp, solve_milp_traced, TraceEvent};

use simplex::{run_cold, LpStatus, StandardForm, Tolerances};

/// Tolerances and limits for [`solve_lp`] and [`solve_milp`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveParams {
    /// Primal feasibility tolerance on rows and bounds.
    pub feas_tol: f64,
    /// Reduced-cost tolerance.
    pub opt_tol: f64,
    /// Relative optimality gap at which branch-and-bound stops.
    pub mip_rel_gap: f64,
    /// Distance from the nearest integer below which a value counts as integral.
    pub int_tol: f64,
    pub node_limit: u64,
    pub time_limit_seconds: Option<f64>,
    pub node_selection: NodeSelection,
}

/// Order in which open branch-and-bound nodes are processed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSelection {
    /// Smallest parent bound first, newest node on ties.
    #[default]
    BestBound,
    /// Depth-first until the first incumbent, best-bound afterwards.
    DiveThenBestBound,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            feas_tol: 1e-7,
            opt_tol: 1e-9,
            mip_rel_gap: 1e-6,
            int_tol: 1e-6,
            node_limit: 1_000_000,
            time_limit_seconds: None,
            node_selection: NodeSelection::BestBound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid solver parameter `{field}`: {reason}")]
pub struct ParamError {
    pub field: &'static str,
    pub reason: &'static str,
}

impl SolveParams {
    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = |field, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(ParamError { field, reason: "must be positive and finite" })
            }
        };
        positive("feas_tol", self.feas_tol)?;
        positive("opt_tol", self.opt_tol)?;
        positive("mip_rel_gap", self.mip_rel_gap)?;
        positive("int_tol", self.int_tol)?;
        if let Some(t) = self.time_limit_seconds {
            if t.is_nan() || t <= 0.0 {
                return Err(ParamError { field: "time_limit_seconds", reason: "must be positive" });
            }
        }
        Ok(())
    }

    pub(crate) fn time_limit(&self) -> Option<Duration> {
        self.time_limit_seconds.map(|t| Duration::from_secs_f64(t.min(1e9)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    LimitReached,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::LimitReached => "limit-reached",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<S> {
    pub status: SolveStatus,
    /// Optimal point, or the incumbent when a limit was hit.
    pub assignment: Option<Assignment<S>>,
    pub objective: Option<S>,
    /// Best proven bound in the model's objective sense.
    pub bound: Option<S>,
    pub nodes: u64,
    pub iterations: u64,
    /// Free-form detail for limit-reached results.
    pub diagnostics: Option<String>,
}

impl<S: Scalar> SolveResult<S> {
    pub(crate) fn empty(status: SolveStatus) -> Self {
        Self { status, assignment: None, objective: None, bound: None, nodes: 0, iterations: 0, diagnostics: None }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

/// Solves the continuous relaxation of `model`; integrality marks are ignored.
pub fn solve_lp<S: Scalar>(model: &LinearModel<S>, params: &SolveParams) -> SolveResult<S> {
    if let Err(e) = params.validate() {
        let mut r = SolveResult::empty(SolveStatus::LimitReached);
        r.diagnostics = Some(e.to_string());
        return r;
    }
    let tol = Tolerances::new(params.feas_tol, params.opt_tol);
    let sf = StandardForm::from_model(model, tol.feas);
    let run = run_cold(&sf, &sf.lower, &sf.upper, tol);
    let mut result = SolveResult::empty(match run.status {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::Stalled => SolveStatus::LimitReached,
    });
    result.iterations = run.iterations as u64;
    match run.status {
        LpStatus::Optimal => {
            let assignment = Assignment::new(run.values);
            let eval = evaluate(&model.relaxation(), &assignment, S::of(params.feas_tol))
                .expect("solver returns one value per variable");
            if let Some(v) = eval.violations.first() {
                result.status = SolveStatus::LimitReached;
                result.diagnostics = Some(format!(
                    "numerical trouble: `{}` violated by {} after refactorization",
                    v.name, v.excess
                ));
                return result;
            }
            let obj = sf.report(run.internal);
            result.objective = Some(obj);
            result.bound = Some(obj);
            result.assignment = Some(assignment);
        }
        LpStatus::Stalled => {
            result.diagnostics = Some("simplex iteration limit or singular basis".into());
        }
        _ => {}
    }
    result
}
