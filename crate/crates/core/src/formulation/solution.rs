use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{FacilityKind, Instance, NodeKind};
use crate::milp::Assignment;

use super::catalog::{VarCatalog, VarKey};
use super::check::evaluate_objectives;

/// Values below this are reported as zero.
const ZERO: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opening {
    pub node: String,
    pub kind: FacilityKind,
    pub level: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub technology: Option<String>,
    pub existing: bool,
}

/// One collection tour: depot, generation nodes, unloading facility, depot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub vehicle: String,
    pub waste: String,
    pub stops: Vec<String>,
    /// Tons collected.
    pub load: f64,
    /// Tour length in km.
    pub length: f64,
}

impl Route {
    pub fn generation_stops(&self) -> &[String] {
        let n = self.stops.len();
        if n < 3 {
            &[]
        } else {
            &self.stops[1..n - 2]
        }
    }

    pub fn terminal(&self) -> Option<&str> {
        let n = self.stops.len();
        (n >= 3).then(|| self.stops[n - 2].as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub from: String,
    pub to: String,
    pub amount: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Money.
    pub cost: f64,
    /// Transport plus site risk.
    pub risk: f64,
    /// kg CO₂.
    pub emissions: f64,
}

impl Objectives {
    pub fn as_array(&self) -> [f64; 3] {
        [self.cost, self.risk, self.emissions]
    }

    pub fn get(&self, which: super::ObjectiveKind) -> f64 {
        self.as_array()[which.index()]
    }
}

/// Decoded decisions of one solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub openings: Vec<Opening>,
    pub routes: Vec<Route>,
    /// k: treatment → recycling.
    pub treatment_to_recycling: Vec<Flow>,
    /// z: treatment → disposal.
    pub treatment_to_disposal: Vec<Flow>,
    /// v: recycling → disposal.
    pub recycling_to_disposal: Vec<Flow>,
    /// xr per recycling node.
    pub recycled: BTreeMap<String, f64>,
    /// xt: waste type → treatment node → tons.
    pub treated: BTreeMap<String, BTreeMap<String, f64>>,
    /// xd per disposal node.
    pub disposed: BTreeMap<String, f64>,
    pub objectives: Objectives,
}

impl Solution {
    pub fn opening(&self, node: &str) -> Option<&Opening> {
        self.openings.iter().find(|o| o.node == node)
    }

    /// Mass delivered by routes straight to recycling node `node`.
    pub fn direct_recycled(&self, inst: &Instance, node: &str) -> f64 {
        self.routes.iter().filter(|r| r.terminal() == Some(node)).map(|r| route_load(inst, r)).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution data is always serializable")
    }
}

/// Sum of the route's demands, from the instance data.
pub(crate) fn route_load(inst: &Instance, r: &Route) -> f64 {
    inst.waste(&r.waste).map_or(0.0, |w| r.generation_stops().iter().map(|g| w.demand_at(g)).sum())
}

pub(crate) fn route_length(inst: &Instance, r: &Route) -> f64 {
    r.stops.windows(2).map(|p| inst.distance(&p[0], &p[1], Some(&r.vehicle)).unwrap_or(f64::INFINITY)).sum()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExtractError {
    #[error("assignment has {got} values, model has {expected}")]
    Length { got: usize, expected: usize },
    #[error("vehicle {vehicle}: {message}")]
    Route { vehicle: String, message: String },
}

fn clean(v: f64) -> f64 {
    if v.abs() < ZERO {
        0.0
    } else {
        v
    }
}

/// Decodes an integral assignment of a model built by
/// [`build_model`](super::build_model).
pub fn extract_solution(inst: &Instance, cat: &VarCatalog, a: &Assignment<f64>) -> Result<Solution, ExtractError> {
    if a.len() < cat.len() {
        return Err(ExtractError::Length { got: a.len(), expected: cat.len() });
    }
    let mut sol = Solution::default();
    let mut arcs: BTreeMap<&str, Vec<(&str, &str)>> = BTreeMap::new();
    for (id, key) in cat.iter() {
        let v = a.get(id);
        let on = v > 0.5;
        match key {
            VarKey::X { from, to, vehicle } if on => arcs.entry(vehicle).or_default().push((from, to)),
            VarKey::R { node, level } if on => sol.openings.push(opening(inst, node, FacilityKind::Recycling, level, None)),
            VarKey::T { tech, node, level } if on => {
                sol.openings.push(opening(inst, node, FacilityKind::Treatment, level, Some(tech.clone())))
            }
            VarKey::D { node, level } if on => sol.openings.push(opening(inst, node, FacilityKind::Disposal, level, None)),
            VarKey::K { from, to } if clean(v) > 0.0 => sol.treatment_to_recycling.push(flow(from, to, v)),
            VarKey::Z { from, to } if clean(v) > 0.0 => sol.treatment_to_disposal.push(flow(from, to, v)),
            VarKey::V { from, to } if clean(v) > 0.0 => sol.recycling_to_disposal.push(flow(from, to, v)),
            VarKey::Xr { node } => {
                sol.recycled.insert(node.clone(), clean(v).max(0.0));
            }
            VarKey::Xd { node } => {
                sol.disposed.insert(node.clone(), clean(v).max(0.0));
            }
            VarKey::Xt { waste, node } => {
                sol.treated.entry(waste.clone()).or_default().insert(node.clone(), clean(v).max(0.0));
            }
            _ => {}
        }
    }
    for k in &inst.vehicles {
        let Some(list) = arcs.get(k.id.as_str()) else { continue };
        sol.routes.push(trace_route(inst, &k.id, list)?);
    }
    sol.objectives = evaluate_objectives(inst, &sol);
    Ok(sol)
}

fn opening(inst: &Instance, node: &str, kind: FacilityKind, level: &str, technology: Option<String>) -> Opening {
    Opening {
        node: node.into(),
        kind,
        level: level.into(),
        technology,
        existing: inst.node(node).is_some_and(|n| n.kind.is_existing()),
    }
}

fn flow(from: &str, to: &str, v: f64) -> Flow {
    Flow { from: from.into(), to: to.into(), amount: v }
}

/// Follows a vehicle's active arcs from its depot.
fn trace_route(inst: &Instance, vehicle: &str, arcs: &[(&str, &str)]) -> Result<Route, ExtractError> {
    let err = |message: String| ExtractError::Route { vehicle: vehicle.into(), message };
    let kind = |n: &str| inst.node(n).map(|x| x.kind);
    let mut next: BTreeMap<&str, &str> = BTreeMap::new();
    for &(i, j) in arcs {
        if next.insert(i, j).is_some() {
            return Err(err(format!("node {i} is left twice")));
        }
    }
    let starts: Vec<&str> = arcs.iter().map(|a| a.0).filter(|i| kind(i) == Some(NodeKind::Depot)).collect();
    let start = match starts.as_slice() {
        [s] => *s,
        [] => return Err(err("active arcs form a cycle that never leaves a depot".into())),
        _ => return Err(err("vehicle leaves depots more than once".into())),
    };
    let mut stops = vec![start.to_string()];
    let mut seen = BTreeSet::new();
    let mut cur = start;
    loop {
        let Some(&n) = next.get(cur) else {
            return Err(err(format!("route stops at {cur} without returning to a depot")));
        };
        if !seen.insert((cur, n)) {
            return Err(err("route repeats an arc".into()));
        }
        stops.push(n.to_string());
        if kind(n) == Some(NodeKind::Depot) {
            break;
        }
        cur = n;
    }
    if seen.len() != arcs.len() {
        return Err(err("active arcs contain a cycle detached from the route".into()));
    }
    let n = stops.len();
    let gens_ok = stops[1..n.saturating_sub(2)].iter().all(|s| kind(s) == Some(NodeKind::Generation));
    let term_ok = n >= 4 && kind(&stops[n - 2]).and_then(|k| k.facility()).is_some_and(|f| f != FacilityKind::Disposal);
    if !gens_ok || !term_ok {
        return Err(err(format!("route {} is not depot, generation nodes, facility, depot", stops.join(" → "))));
    }
    let waste = inst
        .vehicles
        .iter()
        .find(|k| k.id == vehicle)
        .and_then(|k| k.waste())
        .unwrap_or_default()
        .to_string();
    let mut route = Route { vehicle: vehicle.into(), waste, stops, load: 0.0, length: 0.0 };
    route.load = route_load(inst, &route);
    route.length = route_length(inst, &route);
    Ok(route)
}
