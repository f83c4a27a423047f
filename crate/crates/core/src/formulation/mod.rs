//! The location-routing model: variables, constraints, objectives, and the
//! mapping back from solver values to domain decisions.

mod build;
mod catalog;
mod check;
pub(crate) mod network;
mod solution;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{Finding, Instance};
use crate::milp::ModelError;
use crate::solver::{solve_milp, SolveParams, SolveResult};

pub use build::{build_model, objective_expr};
pub use catalog::{VarCatalog, VarKey};
pub use check::{check_solution_feasible, evaluate_objectives, Violation};
pub use solution::{extract_solution, ExtractError, Flow, Objectives, Opening, Route, Solution};
pub(crate) use solution::{route_length, route_load};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// f1
    Cost,
    /// f2
    Risk,
    /// f3
    Emissions,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [ObjectiveKind::Cost, ObjectiveKind::Risk, ObjectiveKind::Emissions];

    /// 0 for cost, 1 for risk, 2 for emissions.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            ObjectiveKind::Cost => "f1",
            ObjectiveKind::Risk => "f2",
            ObjectiveKind::Emissions => "f3",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ObjectiveKind::Cost => "cost",
            ObjectiveKind::Risk => "risk",
            ObjectiveKind::Emissions => "emissions",
        })
    }
}

impl FromStr for ObjectiveKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "f1" | "cost" => Ok(ObjectiveKind::Cost),
            "f2" | "risk" => Ok(ObjectiveKind::Risk),
            "f3" | "emissions" | "co2" => Ok(ObjectiveKind::Emissions),
            other => Err(format!("unknown objective `{other}` (expected f1, f2, f3, cost, risk or emissions)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum FormulationError {
    #[error("instance has {} fatal finding(s): {}", .0.len(), .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Finding>),
    #[error("big-M is not finite")]
    NonFiniteBigM,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The big-M of the load linearization: the largest vehicle capacity.
pub fn big_m(inst: &Instance) -> f64 {
    inst.vehicles.iter().map(|k| k.capacity).fold(0.0, f64::max)
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error("solver returned an assignment that does not decode: {0}")]
    Extract(#[from] ExtractError),
}

/// Outcome of one single-objective solve.
#[derive(Debug, Clone)]
pub struct Solved {
    pub result: SolveResult<f64>,
    /// Decoded incumbent, when the solver returned one.
    pub solution: Option<Solution>,
}

/// Builds the model for `objective`, solves it and decodes the incumbent.
pub fn solve_instance(inst: &Instance, objective: ObjectiveKind, params: &SolveParams) -> Result<Solved, SolveError> {
    let (model, cat) = build_model(inst, objective)?;
    let result = solve_milp(&model, params);
    let solution = match &result.assignment {
        Some(a) => Some(extract_solution(inst, &cat, a)?),
        None => None,
    };
    Ok(Solved { result, solution })
}
