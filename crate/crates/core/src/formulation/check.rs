//! Objective values and feasibility rules computed from domain data only,
//! without consulting the linear model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::instance::{FacilityKind, Instance, LevelCap, NodeKind, RiskMode};

use super::network::Network;
use super::solution::{route_length, route_load, Flow, Objectives, Opening, Solution};

/// One broken rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Constraint family tag, e.g. `eq13-16`.
    pub rule: String,
    pub entity: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} [{}]: {}", self.rule, self.entity, self.message)
    }
}

fn slack(a: f64, b: f64) -> f64 {
    1e-6 * 1f64.max(a.abs()).max(b.abs())
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= slack(a, b)
}

fn leq(a: f64, b: f64) -> bool {
    a <= b + slack(a, b)
}

fn level_cap<'a>(net: &Network<'a>, o: &Opening) -> Option<&'a LevelCap> {
    match o.kind {
        FacilityKind::Recycling => net.recycling_cap(&o.level, &o.node),
        FacilityKind::Disposal => net.disposal_cap(&o.level, &o.node),
        FacilityKind::Treatment => net.treatment_cap(&o.level, &o.node, o.technology.as_deref()?),
    }
}

/// Operating-risk rate applied to the throughput of opening `o`.
fn op_risk_rate(net: &Network<'_>, o: &Opening) -> f64 {
    match net.inst.risk_mode {
        RiskMode::LevelCoupled => level_cap(net, o).map_or(0.0, |c| c.op_risk),
        RiskMode::PaperLiteral => net
            .levels
            .iter()
            .filter_map(|h| level_cap(net, &Opening { level: (*h).to_string(), ..o.clone() }))
            .map(|c| c.op_risk)
            .sum(),
    }
}

fn treated_at(sol: &Solution, node: &str) -> f64 {
    sol.treated.values().filter_map(|m| m.get(node)).sum()
}

fn all_flows(sol: &Solution) -> impl Iterator<Item = &Flow> {
    sol.treatment_to_recycling.iter().chain(&sol.treatment_to_disposal).chain(&sol.recycling_to_disposal)
}

/// f1, f2 and f3 of `sol`, recomputed from the instance data.
///
/// Route loads come from the demands of the visited nodes; technologies and
/// levels come from the openings.
pub fn evaluate_objectives(inst: &Instance, sol: &Solution) -> Objectives {
    let net = Network::new(inst);
    let mut obj = Objectives::default();

    for r in &sol.routes {
        let gens = r.generation_stops();
        let (Some(last), Some(term)) = (gens.last(), r.terminal()) else { continue };
        obj.cost += inst.arc(last, term).map_or(0.0, |a| a.unit_cost) * route_load(inst, r);
    }
    for f in all_flows(sol) {
        if let Some(a) = inst.arc(&f.from, &f.to) {
            obj.cost += a.unit_cost * f.amount;
            obj.risk += a.transport_risk * f.amount;
            obj.emissions += a.co2_transport * a.distance * f.amount;
        }
    }
    for o in &sol.openings {
        if !o.existing {
            obj.cost += level_cap(&net, o).map_or(0.0, |c| c.invest_cost);
        }
        let rate = op_risk_rate(&net, o);
        match o.kind {
            FacilityKind::Recycling => {
                let xr = sol.recycled.get(&o.node).copied().unwrap_or(0.0);
                obj.risk += rate * xr;
            }
            FacilityKind::Disposal => {
                let xd = sol.disposed.get(&o.node).copied().unwrap_or(0.0);
                obj.risk += rate * xd;
            }
            FacilityKind::Treatment => {
                obj.risk += rate * treated_at(sol, &o.node);
                let tech = o.technology.as_deref().unwrap_or_default();
                for (w, m) in &sol.treated {
                    obj.emissions += inst.qt(w, tech, &o.node) * m.get(&o.node).copied().unwrap_or(0.0);
                }
            }
        }
    }
    for (j, xr) in &sol.recycled {
        obj.emissions += inst.co2_ops.recycling.get(j).copied().unwrap_or(0.0) * xr;
    }
    for (j, xd) in &sol.disposed {
        obj.emissions += inst.co2_ops.disposal.get(j).copied().unwrap_or(0.0) * xd;
    }
    obj
}

struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, rule: &str, entity: impl Into<String>, message: String) {
        self.0.push(Violation { rule: rule.into(), entity: entity.into(), message });
    }
}

/// Every rule of the model that `sol` breaks, checked against domain data.
pub fn check_solution_feasible(inst: &Instance, sol: &Solution) -> Vec<Violation> {
    let net = Network::new(inst);
    let mut rep = Report(Vec::new());
    let opened: BTreeMap<&str, &Opening> = sol.openings.iter().map(|o| (o.node.as_str(), o)).collect();

    check_routes(&net, sol, &opened, &mut rep);
    check_openings(&net, sol, &mut rep);
    check_accounting(&net, sol, &opened, &mut rep);
    rep.0
}

fn check_routes(net: &Network<'_>, sol: &Solution, opened: &BTreeMap<&str, &Opening>, rep: &mut Report) {
    let inst = net.inst;
    let mut used = BTreeSet::new();
    let mut visits: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for r in &sol.routes {
        let Some(k) = net.fleet.iter().find(|k| k.id == r.vehicle) else {
            rep.push("eq04", &r.vehicle, "unknown vehicle or vehicle without a waste type".into());
            continue;
        };
        if !used.insert(k.id) {
            rep.push("eq04", k.id, "vehicle runs more than one route".into());
        }
        if r.waste != k.waste.id {
            rep.push("eq06", k.id, format!("route declares waste {} but vehicle carries {}", r.waste, k.waste.id));
        }
        let n = r.stops.len();
        let kind = |s: &str| inst.node(s).map(|x| x.kind);
        if n < 4 || kind(&r.stops[0]) != Some(NodeKind::Depot) || kind(&r.stops[n - 1]) != Some(NodeKind::Depot) {
            rep.push("eq05", k.id, format!("route {} must start and end at a depot", r.stops.join(" → ")));
            continue;
        }
        let mut seen = BTreeSet::new();
        for g in r.generation_stops() {
            if !k.served.contains(&g.as_str()) {
                rep.push("eq05", k.id, format!("{g} has no demand of {}", k.waste.id));
            }
            if !seen.insert(g.as_str()) {
                rep.push("eq05", k.id, format!("{g} is visited twice"));
            }
            *visits.entry((g.as_str(), k.waste.id.as_str())).or_default() += 1;
        }
        let term = r.terminal().expect("route has at least four stops");
        if !k.terminals.contains(&term) {
            rep.push("eq07", k.id, format!("{term} cannot receive {}", k.waste.id));
        } else {
            let ok = match opened.get(term) {
                None => false,
                Some(o) if k.waste.is_recyclable_only() => o.kind == FacilityKind::Recycling,
                Some(o) => o.technology.as_deref().is_some_and(|q| k.waste.compatible_with(q)),
            };
            if !ok {
                let rule = if k.waste.is_recyclable_only() { "eq09" } else { "eq08" };
                rep.push(rule, k.id, format!("unloads at {term}, which is not open for {}", k.waste.id));
            }
        }
        let load = route_load(inst, r);
        if !leq(load, k.capacity) {
            rep.push("eq13-16", k.id, format!("load {load} exceeds capacity {}", k.capacity));
        }
        let length = route_length(inst, r);
        if !leq(length, k.max_distance) {
            rep.push("eq10-12", k.id, format!("route length {length} exceeds limit {}", k.max_distance));
        }
    }
    for w in &inst.waste_types {
        for &g in &net.gens {
            let count = visits.get(&(g, w.id.as_str())).copied().unwrap_or(0);
            if w.demand_at(g) > 0.0 && count != 1 {
                rep.push("eq06", format!("{g}/{}", w.id), format!("served {count} times, expected once"));
            }
        }
    }
}

fn check_openings(net: &Network<'_>, sol: &Solution, rep: &mut Report) {
    let inst = net.inst;
    let mut count: BTreeMap<&str, usize> = BTreeMap::new();
    for o in &sol.openings {
        *count.entry(o.node.as_str()).or_default() += 1;
        let kind = inst.node(&o.node).and_then(|n| n.kind.facility());
        if kind != Some(o.kind) {
            rep.push("eq30", &o.node, format!("opened as {} but the node is not one", o.kind));
            continue;
        }
        if level_cap(net, o).is_none() {
            rep.push("eq30", &o.node, format!("no capacity data for level {}", o.level));
        }
        if o.kind == FacilityKind::Treatment {
            if let Some(q) = inst.existing_technology(&o.node).filter(|_| net.is_existing(&o.node)) {
                if o.technology.as_deref() != Some(q) {
                    rep.push("eq31", &o.node, format!("existing site must keep technology {q}"));
                }
            }
        }
    }
    for (node, c) in count {
        if c > 1 {
            rep.push("eq30", node, format!("opened {c} times"));
        }
    }
    for n in inst.nodes.iter().filter(|n| n.kind.is_existing()) {
        if sol.opening(&n.id).is_none() {
            let rule = match n.kind.facility() {
                Some(FacilityKind::Treatment) => "eq31",
                Some(FacilityKind::Recycling) => "eq32",
                _ => "eq33",
            };
            rep.push(rule, &n.id, "existing facility is not open".into());
        }
    }
}

fn check_window(net: &Network<'_>, rep: &mut Report, tags: (&str, &str), node: &str, o: Option<&&Opening>, amount: f64, threshold: f64) {
    if amount < -slack(amount, 0.0) {
        rep.push(tags.0, node, format!("negative throughput {amount}"));
    }
    match o.and_then(|o| level_cap(net, o)) {
        None if amount > slack(amount, 0.0) => rep.push(tags.0, node, format!("throughput {amount} at a closed site")),
        None => {}
        Some(cap) => {
            if !leq(amount, cap.max) {
                rep.push(tags.0, node, format!("throughput {amount} exceeds level capacity {}", cap.max));
            }
            if !net.is_existing(node) && !leq(threshold, amount) {
                rep.push(tags.1, node, format!("throughput {amount} below minimum {threshold}"));
            }
        }
    }
}

fn check_accounting(net: &Network<'_>, sol: &Solution, opened: &BTreeMap<&str, &Opening>, rep: &mut Report) {
    let inst = net.inst;
    let flows_from = |list: &[Flow], n: &str| list.iter().filter(|f| f.from == n).map(|f| f.amount).sum::<f64>();
    let flows_to = |list: &[Flow], n: &str| list.iter().filter(|f| f.to == n).map(|f| f.amount).sum::<f64>();

    for f in all_flows(sol) {
        if f.amount < -slack(f.amount, 0.0) {
            rep.push("eq21-26", format!("{}→{}", f.from, f.to), format!("negative flow {}", f.amount));
        }
        if inst.arc(&f.from, &f.to).is_none() {
            rep.push("eq21-26", format!("{}→{}", f.from, f.to), "flow on a missing arc".into());
        }
    }

    let mut delivered: BTreeMap<(&str, &str), f64> = BTreeMap::new();
    for r in &sol.routes {
        if let Some(t) = r.terminal() {
            *delivered.entry((r.waste.as_str(), t)).or_default() += route_load(inst, r);
        }
    }

    let mut total = 0.0;
    for &j in &net.treat {
        let mut to_rec = 0.0;
        let mut to_disp = 0.0;
        let tech = opened.get(j).and_then(|o| o.technology.as_deref());
        for w in &inst.waste_types {
            let xt = sol.treated.get(&w.id).and_then(|m| m.get(j)).copied().unwrap_or(0.0);
            let got = delivered.get(&(w.id.as_str(), j)).copied().unwrap_or(0.0);
            if !close(xt, got) {
                rep.push("eq17", format!("{}/{j}", w.id), format!("treated {xt} but routes deliver {got}"));
            }
            total += xt;
            if let Some(q) = tech {
                let residue = 1.0 - w.mass_reduction.get(q).copied().unwrap_or(0.0);
                let beta = w.recyclable_fraction_after_tech.get(q).copied().unwrap_or(0.0);
                to_rec += xt * residue * beta;
                to_disp += xt * residue * (1.0 - beta);
            }
        }
        let k = flows_from(&sol.treatment_to_recycling, j);
        if !close(k, to_rec) {
            rep.push("eq21", j, format!("sends {k} to recycling, residue is {to_rec}"));
        }
        let z = flows_from(&sol.treatment_to_disposal, j);
        if !close(z, to_disp) {
            rep.push("eq24", j, format!("sends {z} to disposal, residue is {to_disp}"));
        }
        let threshold = tech.map_or(0.0, |q| inst.treatment_threshold(j, q));
        check_window(net, rep, ("eq18", "eq19"), j, opened.get(j), treated_at(sol, j), threshold);
    }

    for &j in &net.rec {
        let xr = sol.recycled.get(j).copied().unwrap_or(0.0);
        let direct = sol.direct_recycled(inst, j);
        total += direct;
        let inflow = direct + flows_to(&sol.treatment_to_recycling, j);
        if !close(xr, inflow) {
            rep.push("eq20", j, format!("recycled {xr} but receives {inflow}"));
        }
        let gamma = inst.recycling_ratio.get(j).copied().unwrap_or(1.0);
        let v = flows_from(&sol.recycling_to_disposal, j);
        if !close(v, (1.0 - gamma) * xr) {
            rep.push("eq25", j, format!("sends {v} to disposal, residue is {}", (1.0 - gamma) * xr));
        }
        check_window(net, rep, ("eq22", "eq23"), j, opened.get(j), xr, inst.recycling_threshold(j));
    }

    for &j in &net.disp {
        let xd = sol.disposed.get(j).copied().unwrap_or(0.0);
        let inflow = flows_to(&sol.treatment_to_disposal, j) + flows_to(&sol.recycling_to_disposal, j);
        if !close(xd, inflow) {
            rep.push("eq26", j, format!("disposed {xd} but receives {inflow}"));
        }
        check_window(net, rep, ("eq27", "eq28"), j, opened.get(j), xd, inst.disposal_threshold(j));
    }

    let demand = inst.total_demand();
    if !close(total, demand) {
        rep.push("eq29", "network", format!("treated plus directly recycled is {total}, demand is {demand}"));
    }

    for arc in inst.arcs.iter().filter(|a| a.risk_cap.is_some()) {
        let cap = arc.risk_cap.expect("filtered");
        let mut pairs = vec![(arc.from.as_str(), arc.to.as_str())];
        if !arc.directed {
            pairs.push((arc.to.as_str(), arc.from.as_str()));
        }
        for (i, j) in pairs {
            let amount: f64 = all_flows(sol).filter(|f| f.from == i && f.to == j).map(|f| f.amount).sum();
            let risk = arc.transport_risk * amount;
            if !leq(risk, cap) {
                rep.push("eq34", format!("{i}→{j}"), format!("risk {risk} exceeds cap {cap}"));
            }
        }
    }
}
