//! Exhaustive ground truth for tiny instances.
//!
//! Openings and routes are enumerated outright. Once they are fixed, the
//! residue flows (treatment to recycling, treatment to disposal, recycling to
//! disposal) are the only freedom left; they are resolved per configuration
//! with [`solve_lp`] on a flow problem written from the instance data, and
//! every candidate is scored with [`evaluate_objectives`].

mod vertices;

use std::collections::BTreeMap;

use itertools::Itertools;
use thiserror::Error;

use crate::formulation::network::{Fleet, Network};
use crate::formulation::{evaluate_objectives, route_length, route_load, Flow, ObjectiveKind, Objectives, Opening, Route, Solution};
use crate::instance::{validate_instance, FacilityKind, Finding, Instance, Severity, WasteType};
use crate::milp::{LinExpr, LinearModel, ObjSense, Sense};
use crate::solver::{solve_lp, SolveParams, SolveStatus};

/// Most route plans enumerated for one waste type, counted before pruning.
pub const MAX_ROUTE_PLANS: f64 = 1e6;
/// Most (openings, route plan) combinations scored by one oracle call.
pub const MAX_CANDIDATES: f64 = 2e6;
/// Most candidate bases examined per flow polytope by [`oracle_pareto`].
pub const MAX_VERTEX_SYSTEMS: f64 = 1e5;

const REL: f64 = 1e-9;

fn within(a: f64, limit: f64) -> bool {
    a <= limit + REL * limit.abs().max(1.0)
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("instance has {} fatal finding(s)", .0.len())]
    Invalid(Vec<Finding>),
    #[error("{what} counts {size:.0}, above the oracle bound of {limit:.0}")]
    Intractable { what: &'static str, size: f64, limit: f64 },
    #[error("no configuration is feasible")]
    Infeasible,
    #[error("residual flow problem returned {0}")]
    Residual(SolveStatus),
}

/// Fixed discrete decisions: which sites open, and every vehicle's route.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteConfig {
    pub openings: Vec<Opening>,
    pub routes: Vec<Route>,
}

/// Route plans of one waste type.
#[derive(Debug, Clone)]
struct WastePlans<'a> {
    waste: &'a WasteType,
    plans: Vec<Plan>,
}

#[derive(Debug, Clone)]
struct Plan {
    routes: Vec<Route>,
    /// Collection cost: load times the unit cost of the unloading arc.
    cost: f64,
}

/// The enumerated discrete decisions of an instance.
#[derive(Debug, Clone)]
pub struct ConfigSpace<'a> {
    inst: &'a Instance,
    openings: Vec<Vec<Opening>>,
    wastes: Vec<WastePlans<'a>>,
}

impl<'a> ConfigSpace<'a> {
    /// Number of opening patterns.
    pub fn opening_count(&self) -> usize {
        self.openings.len()
    }

    /// Every configuration whose routes unload at open, compatible sites.
    pub fn iter(&self) -> impl Iterator<Item = DiscreteConfig> + '_ {
        self.openings.iter().flat_map(move |o| {
            let lists = self.compatible_plans(o);
            let lens: Vec<usize> = lists.iter().map(Vec::len).collect();
            index_product(&lens).map(move |pick| {
                let mut routes: Vec<Route> =
                    pick.iter().enumerate().flat_map(|(w, &i)| self.wastes[w].plans[lists[w][i]].routes.clone()).collect();
                sort_routes(self.inst, &mut routes);
                DiscreteConfig { openings: o.clone(), routes }
            })
        })
    }

    /// Per waste type, the indices of plans whose terminals `openings` accept.
    fn compatible_plans(&self, openings: &[Opening]) -> Vec<Vec<usize>> {
        self.wastes
            .iter()
            .map(|wp| {
                (0..wp.plans.len())
                    .filter(|&i| {
                        wp.plans[i].routes.iter().all(|r| {
                            let term = r.terminal().unwrap_or_default();
                            accepts(wp.waste, openings.iter().find(|o| o.node == term))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

fn index_product(lens: &[usize]) -> Box<dyn Iterator<Item = Vec<usize>>> {
    if lens.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else {
        Box::new(lens.iter().map(|&n| 0..n).collect::<Vec<_>>().into_iter().multi_cartesian_product())
    }
}

fn sort_routes(inst: &Instance, routes: &mut [Route]) {
    routes.sort_by_key(|r| inst.vehicles.iter().position(|k| k.id == r.vehicle));
}

/// Whether `o` can receive waste `w` off a collection route.
fn accepts(w: &WasteType, o: Option<&Opening>) -> bool {
    match o {
        None => false,
        Some(o) if w.is_recyclable_only() => o.kind == FacilityKind::Recycling,
        Some(o) => o.kind == FacilityKind::Treatment && o.technology.as_deref().is_some_and(|q| w.compatible_with(q)),
    }
}

fn check_valid(inst: &Instance) -> Result<(), OracleError> {
    let fatal: Vec<_> = validate_instance(inst).into_iter().filter(|f| f.severity == Severity::Fatal).collect();
    if fatal.is_empty() {
        Ok(())
    } else {
        Err(OracleError::Invalid(fatal))
    }
}

/// Enumerates every structurally valid configuration of `inst`: existing
/// sites open, one technology per treatment site, routes of each vehicle
/// limited to its waste type and unloading at a site open for it.
/// Relabelings of interchangeable vehicles appear once. Load and length
/// limits are not applied.
pub fn enumerate_configs(inst: &Instance) -> Result<ConfigSpace<'_>, OracleError> {
    check_valid(inst)?;
    space(inst, false)
}

fn space(inst: &Instance, limits: bool) -> Result<ConfigSpace<'_>, OracleError> {
    let net = Network::new(inst);
    let openings = opening_patterns(&net)?;
    let mut wastes = Vec::new();
    for w in &inst.waste_types {
        wastes.push(WastePlans { waste: w, plans: waste_plans(&net, w, limits)? });
    }
    Ok(ConfigSpace { inst, openings, wastes })
}

fn opening_patterns(net: &Network<'_>) -> Result<Vec<Vec<Opening>>, OracleError> {
    let mut per_site: Vec<Vec<Option<Opening>>> = Vec::new();
    for (kind, nodes) in [(FacilityKind::Recycling, &net.rec), (FacilityKind::Treatment, &net.treat), (FacilityKind::Disposal, &net.disp)] {
        for &j in nodes {
            let existing = net.is_existing(j);
            let mut choices = if existing { Vec::new() } else { vec![None] };
            let techs: Vec<Option<&str>> =
                if kind == FacilityKind::Treatment { net.options(j).into_iter().map(Some).collect() } else { vec![None] };
            for q in techs {
                for &h in &net.levels {
                    let cap = match (kind, q) {
                        (FacilityKind::Recycling, _) => net.recycling_cap(h, j),
                        (FacilityKind::Disposal, _) => net.disposal_cap(h, j),
                        (FacilityKind::Treatment, Some(q)) => net.treatment_cap(h, j, q),
                        (FacilityKind::Treatment, None) => None,
                    };
                    if cap.is_some() {
                        choices.push(Some(Opening {
                            node: j.to_string(),
                            kind,
                            level: h.to_string(),
                            technology: q.map(str::to_string),
                            existing,
                        }));
                    }
                }
            }
            per_site.push(choices);
        }
    }
    let size: f64 = per_site.iter().map(|c| c.len() as f64).product();
    if size > MAX_CANDIDATES {
        return Err(OracleError::Intractable { what: "opening patterns", size, limit: MAX_CANDIDATES });
    }
    let lens: Vec<usize> = per_site.iter().map(Vec::len).collect();
    Ok(index_product(&lens).map(|pick| pick.iter().enumerate().filter_map(|(s, &i)| per_site[s][i].clone()).collect()).collect())
}

/// Upper bound on route plans: ways to split `n` nodes into ordered runs on
/// distinct vehicles out of `v`, each run with one of `t` terminals.
fn plan_space(n: usize, v: usize, t: usize) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let choose = |a: usize, b: usize| fact(a) / (fact(b) * fact(a - b));
    (1..=n.min(v))
        .map(|b| {
            let lah = choose(n - 1, b - 1) * fact(n) / fact(b);
            lah * fact(v) / fact(v - b) * (t as f64).powi(b as i32)
        })
        .sum()
}

/// Vehicles with equal limits and no per-vehicle distances are interchangeable.
fn vehicle_classes(inst: &Instance, fleet: &[&Fleet<'_>]) -> Vec<usize> {
    let sig = |k: &Fleet<'_>| {
        let overrides: Vec<(usize, u64)> = inst
            .arcs
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.vehicle_distance.get(k.id).map(|d| (i, d.to_bits())))
            .collect();
        (k.capacity.to_bits(), k.max_distance.to_bits(), overrides)
    };
    let sigs: Vec<_> = fleet.iter().map(|k| sig(k)).collect();
    sigs.iter().map(|s| sigs.iter().position(|t| t == s).expect("own signature")).collect()
}

fn make_route(net: &Network<'_>, k: &Fleet<'_>, seq: &[&str], term: &str) -> Option<Route> {
    let vid = Some(k.id);
    let nearest = |pairs: Vec<(f64, &str)>| pairs.into_iter().min_by(|a, b| a.0.total_cmp(&b.0)).map(|p| p.1.to_string());
    let first = *seq.first()?;
    let last = *seq.last()?;
    let start = nearest(net.depots.iter().filter_map(|&f| net.dist(f, first, vid).map(|d| (d, f))).collect())?;
    let end = nearest(net.depots.iter().filter_map(|&f| net.dist(term, f, vid).map(|d| (d, f))).collect())?;
    if seq.windows(2).any(|p| net.dist(p[0], p[1], vid).is_none()) || net.dist(last, term, vid).is_none() {
        return None;
    }
    let stops = std::iter::once(start)
        .chain(seq.iter().map(|s| s.to_string()))
        .chain([term.to_string(), end])
        .collect();
    let mut r = Route { vehicle: k.id.into(), waste: k.waste.id.clone(), stops, load: 0.0, length: 0.0 };
    r.load = route_load(net.inst, &r);
    r.length = route_length(net.inst, &r);
    Some(r)
}

fn route_cost(inst: &Instance, r: &Route) -> f64 {
    let gens = r.generation_stops();
    match (gens.last(), r.terminal()) {
        (Some(g), Some(t)) => inst.arc(g, t).map_or(0.0, |a| a.unit_cost) * r.load,
        _ => 0.0,
    }
}

/// Route plans for waste `w`. With `limits`, routes over a load or length
/// limit are dropped and only the cheapest plan per delivery pattern (the
/// terminal each node's waste ends up at) is kept.
fn waste_plans(net: &Network<'_>, w: &WasteType, limits: bool) -> Result<Vec<Plan>, OracleError> {
    let fleet: Vec<&Fleet<'_>> = net.fleet.iter().filter(|k| k.waste.id == w.id).collect();
    let services: Vec<&str> = net.gens.iter().copied().filter(|g| w.demand_at(g) > 0.0).collect();
    if services.is_empty() {
        return Ok(vec![Plan { routes: Vec::new(), cost: 0.0 }]);
    }
    let terminals = fleet.iter().map(|k| k.terminals.len()).max().unwrap_or(0);
    let size = plan_space(services.len(), fleet.len(), terminals);
    if size > MAX_ROUTE_PLANS {
        return Err(OracleError::Intractable { what: "route plans", size, limit: MAX_ROUTE_PLANS });
    }
    let classes = vehicle_classes(net.inst, &fleet);
    let mut all = Vec::new();
    let mut best: BTreeMap<Vec<String>, Plan> = BTreeMap::new();
    let mut on_assignment = |owner: &[usize]| {
        let mut options: Vec<Vec<(String, Route, f64)>> = Vec::new();
        for (v, k) in fleet.iter().enumerate() {
            let seq: Vec<&str> = services.iter().zip(owner).filter(|(_, &o)| o == v).map(|(s, _)| *s).collect();
            if seq.is_empty() {
                continue;
            }
            let mut opts: Vec<(String, Route, f64)> = Vec::new();
            for perm in seq.iter().copied().permutations(seq.len()) {
                for &term in &k.terminals {
                    let Some(r) = make_route(net, k, &perm, term) else { continue };
                    if limits && !(within(r.load, k.capacity) && within(r.length, k.max_distance)) {
                        continue;
                    }
                    let c = route_cost(net.inst, &r);
                    match opts.iter_mut().find(|o| o.0 == term) {
                        Some(o) if limits => {
                            if c < o.2 {
                                *o = (term.to_string(), r, c);
                            }
                        }
                        _ => opts.push((term.to_string(), r, c)),
                    }
                }
            }
            if opts.is_empty() {
                return;
            }
            options.push(opts);
        }
        for combo in options.iter().multi_cartesian_product() {
            let routes: Vec<Route> = combo.iter().map(|o| o.1.clone()).collect();
            let plan = Plan { cost: combo.iter().map(|o| o.2).sum(), routes };
            if !limits {
                all.push(plan);
                continue;
            }
            let key: Vec<String> = services
                .iter()
                .map(|s| plan.routes.iter().find(|r| r.generation_stops().iter().any(|g| g == s)).and_then(|r| r.terminal()).unwrap_or_default().to_string())
                .collect();
            match best.get(&key) {
                Some(p) if p.cost <= plan.cost => {}
                _ => {
                    best.insert(key, plan);
                }
            }
        }
    };
    let mut owner = vec![0; services.len()];
    let mut used = vec![false; fleet.len()];
    assign(0, &classes, &mut used, &mut owner, &mut on_assignment);
    Ok(if limits { best.into_values().collect() } else { all })
}

/// Gives every service an owning vehicle. A vehicle is used for the first
/// time only if no lower vehicle of its class is still unused.
fn assign(s: usize, classes: &[usize], used: &mut [bool], owner: &mut [usize], out: &mut dyn FnMut(&[usize])) {
    if s == owner.len() {
        out(owner);
        return;
    }
    for v in 0..classes.len() {
        if !used[v] && (0..v).any(|u| classes[u] == classes[v] && !used[u]) {
            continue;
        }
        let was = used[v];
        used[v] = true;
        owner[s] = v;
        assign(s + 1, classes, used, owner, out);
        used[v] = was;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FlowKind {
    TreatToRec,
    TreatToDisp,
    RecToDisp,
}

/// Flow problem left once openings and routes are fixed.
struct Residual {
    model: LinearModel<f64>,
    arcs: Vec<(FlowKind, String, String)>,
}

/// One (openings, route plans) combination that passed the direct checks.
struct Candidate {
    opening: usize,
    routes: Vec<Route>,
    /// Objectives with every residue flow at zero.
    base: Objectives,
}

struct Search<'a> {
    net: Network<'a>,
    space: ConfigSpace<'a>,
    /// Whether every flow adds a nonnegative amount to each objective.
    monotone: bool,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance) -> Result<Self, OracleError> {
        check_valid(inst)?;
        let space = space(inst, true)?;
        let size: f64 = space.openings.len() as f64 * space.wastes.iter().map(|w| w.plans.len() as f64).product::<f64>();
        if size > MAX_CANDIDATES {
            return Err(OracleError::Intractable { what: "candidate configurations", size, limit: MAX_CANDIDATES });
        }
        let nonneg_caps = inst.capacity_levels.iter().all(|l| {
            l.treatment.values().flat_map(|m| m.values()).chain(l.recycling.values()).chain(l.disposal.values()).all(|c| c.op_risk >= 0.0)
        });
        let monotone = nonneg_caps
            && inst.arcs.iter().all(|a| a.unit_cost >= 0.0 && a.transport_risk >= 0.0 && a.co2_transport * a.distance >= 0.0)
            && inst.co2_ops.recycling.values().chain(inst.co2_ops.disposal.values()).all(|&v| v >= 0.0);
        Ok(Search { net: Network::new(inst), space, monotone })
    }

    fn inst(&self) -> &'a Instance {
        self.net.inst
    }

    fn candidates(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (oi, o) in self.space.openings.iter().enumerate() {
            let lists = self.space.compatible_plans(o);
            let lens: Vec<usize> = lists.iter().map(Vec::len).collect();
            for pick in index_product(&lens) {
                let mut routes: Vec<Route> = Vec::new();
                for (w, &i) in pick.iter().enumerate() {
                    routes.extend(self.space.wastes[w].plans[lists[w][i]].routes.iter().cloned());
                }
                sort_routes(self.inst(), &mut routes);
                if !self.treatment_fits(o, &routes) {
                    continue;
                }
                let mut c = Candidate { opening: oi, routes, base: Objectives::default() };
                c.base = self.assemble(&c, None).objectives;
                out.push(c);
            }
        }
        out
    }

    fn delivered(&self, routes: &[Route], waste: &str, node: &str) -> f64 {
        routes.iter().filter(|r| r.waste == waste && r.terminal() == Some(node)).map(|r| r.load).sum()
    }

    fn direct(&self, routes: &[Route], node: &str) -> f64 {
        routes.iter().filter(|r| r.terminal() == Some(node)).map(|r| r.load).sum()
    }

    /// Level capacity and minimum intake of every open treatment site.
    fn treatment_fits(&self, openings: &[Opening], routes: &[Route]) -> bool {
        openings.iter().filter(|o| o.kind == FacilityKind::Treatment).all(|o| {
            let q = o.technology.as_deref().unwrap_or_default();
            let intake = self.direct(routes, &o.node);
            let cap = self.net.treatment_cap(&o.level, &o.node, q).map_or(0.0, |c| c.max);
            let floor = if o.existing { 0.0 } else { self.inst().treatment_threshold(&o.node, q) };
            within(intake, cap) && within(floor, intake)
        })
    }

    /// The residue flow problem of `c`, or `None` when a row without free
    /// flows is already violated.
    fn residual(&self, c: &Candidate) -> Option<Residual> {
        let inst = self.inst();
        let openings = &self.space.openings[c.opening];
        let open = |n: &str| openings.iter().find(|o| o.node == n);
        let mut model = LinearModel::new("residual");
        let mut arcs = Vec::new();
        let (tr, td, rd) = self.net.residue_arcs();
        for (kind, list) in [(FlowKind::TreatToRec, tr), (FlowKind::TreatToDisp, td), (FlowKind::RecToDisp, rd)] {
            for (i, j) in list {
                if open(i).is_some() && open(j).is_some() {
                    model.add_nonneg(format!("y{}", arcs.len())).expect("fresh name");
                    arcs.push((kind, i.to_string(), j.to_string()));
                }
            }
        }
        let flows = |pred: &dyn Fn(&(FlowKind, String, String)) -> bool, coef: f64| {
            LinExpr::from_terms(arcs.iter().enumerate().filter(|(_, a)| pred(a)).map(|(v, _)| (crate::milp::VarId(v), coef)))
        };
        let mut rows: Vec<(LinExpr<f64>, Sense, f64)> = Vec::new();

        for o in openings.iter().filter(|o| o.kind == FacilityKind::Treatment) {
            let j = o.node.as_str();
            let q = o.technology.as_deref().unwrap_or_default();
            let (mut to_rec, mut to_disp) = (0.0, 0.0);
            for w in &inst.waste_types {
                let xt = self.delivered(&c.routes, &w.id, j);
                let residue = 1.0 - w.mass_reduction.get(q).copied().unwrap_or(0.0);
                let beta = w.recyclable_fraction_after_tech.get(q).copied().unwrap_or(0.0);
                to_rec += xt * residue * beta;
                to_disp += xt * residue * (1.0 - beta);
            }
            rows.push((flows(&|a| a.0 == FlowKind::TreatToRec && a.1 == j, 1.0), Sense::Eq, to_rec));
            rows.push((flows(&|a| a.0 == FlowKind::TreatToDisp && a.1 == j, 1.0), Sense::Eq, to_disp));
        }
        for o in openings.iter().filter(|o| o.kind == FacilityKind::Recycling) {
            let j = o.node.as_str();
            let direct = self.direct(&c.routes, j);
            let inflow = flows(&|a| a.0 == FlowKind::TreatToRec && a.2 == j, 1.0);
            let cap = self.net.recycling_cap(&o.level, j).map_or(0.0, |c| c.max);
            rows.push((inflow.clone(), Sense::Le, cap - direct));
            if !o.existing {
                rows.push((inflow.clone(), Sense::Ge, inst.recycling_threshold(j) - direct));
            }
            let gamma = inst.recycling_ratio.get(j).copied().unwrap_or(1.0);
            let mut residue = flows(&|a| a.0 == FlowKind::RecToDisp && a.1 == j, 1.0);
            residue.add_expr(&inflow, -(1.0 - gamma));
            rows.push((residue, Sense::Eq, (1.0 - gamma) * direct));
        }
        for o in openings.iter().filter(|o| o.kind == FacilityKind::Disposal) {
            let j = o.node.as_str();
            let inflow = flows(&|a| a.0 != FlowKind::TreatToRec && a.2 == j, 1.0);
            let cap = self.net.disposal_cap(&o.level, j).map_or(0.0, |c| c.max);
            rows.push((inflow.clone(), Sense::Le, cap));
            if !o.existing {
                rows.push((inflow, Sense::Ge, inst.disposal_threshold(j)));
            }
        }
        for arc in inst.arcs.iter().filter(|a| a.transport_risk > 0.0) {
            let Some(cap) = arc.risk_cap else { continue };
            let mut pairs = vec![(arc.from.as_str(), arc.to.as_str())];
            if !arc.directed {
                pairs.push((arc.to.as_str(), arc.from.as_str()));
            }
            for (i, j) in pairs {
                let e = flows(&|a| a.1 == i && a.2 == j, arc.transport_risk);
                rows.push((e, Sense::Le, cap));
            }
        }

        for (n, (expr, sense, rhs)) in rows.into_iter().enumerate() {
            if expr.is_empty() {
                let ok = match sense {
                    Sense::Le => within(0.0, rhs),
                    Sense::Ge => within(rhs, 0.0),
                    Sense::Eq => rhs.abs() <= REL * rhs.abs().max(1.0),
                };
                if !ok {
                    return None;
                }
                continue;
            }
            model.add_constraint(format!("r{n}"), expr, sense, rhs).expect("valid row");
        }
        Some(Residual { model, arcs })
    }

    /// The solution of `c` with residue flows `y` (all zero when `None`).
    fn assemble(&self, c: &Candidate, flows: Option<(&Residual, &[f64])>) -> Solution {
        let inst = self.inst();
        let mut sol = Solution { openings: self.space.openings[c.opening].clone(), routes: c.routes.clone(), ..Default::default() };
        for w in inst.waste_types.iter().filter(|w| !w.is_recyclable_only()) {
            for &j in &self.net.treat {
                if self.net.techs_for(w, j).next().is_some() {
                    sol.treated.entry(w.id.clone()).or_default().insert(j.to_string(), self.delivered(&c.routes, &w.id, j));
                }
            }
        }
        for &j in &self.net.rec {
            sol.recycled.insert(j.to_string(), self.direct(&c.routes, j));
        }
        for &j in &self.net.disp {
            sol.disposed.insert(j.to_string(), 0.0);
        }
        if let Some((res, y)) = flows {
            for ((kind, i, j), &v) in res.arcs.iter().zip(y) {
                let v = v.max(0.0);
                if v <= 1e-12 {
                    continue;
                }
                let f = Flow { from: i.clone(), to: j.clone(), amount: v };
                match kind {
                    FlowKind::TreatToRec => {
                        *sol.recycled.get_mut(j).expect("recycling node") += v;
                        sol.treatment_to_recycling.push(f);
                    }
                    FlowKind::TreatToDisp => {
                        *sol.disposed.get_mut(j).expect("disposal node") += v;
                        sol.treatment_to_disposal.push(f);
                    }
                    FlowKind::RecToDisp => {
                        *sol.disposed.get_mut(j).expect("disposal node") += v;
                        sol.recycling_to_disposal.push(f);
                    }
                }
            }
        }
        sol.objectives = evaluate_objectives(inst, &sol);
        sol
    }

    /// Per flow, its contribution to each objective, read off
    /// [`evaluate_objectives`] one unit flow at a time.
    fn flow_coefficients(&self, c: &Candidate, res: &Residual) -> Vec<[f64; 3]> {
        let base = c.base.as_array();
        (0..res.arcs.len())
            .map(|i| {
                let mut y = vec![0.0; res.arcs.len()];
                y[i] = 1.0;
                let v = self.assemble(c, Some((res, &y))).objectives.as_array();
                [v[0] - base[0], v[1] - base[1], v[2] - base[2]]
            })
            .collect()
    }

    /// Best completion of `c` for `objective`.
    fn complete(&self, c: &Candidate, objective: ObjectiveKind) -> Result<Option<Solution>, OracleError> {
        let Some(mut res) = self.residual(c) else { return Ok(None) };
        if res.arcs.is_empty() {
            let ok = res.model.constraints().is_empty();
            return Ok(ok.then(|| self.assemble(c, None)));
        }
        let coef = self.flow_coefficients(c, &res);
        let expr = LinExpr::from_terms(coef.iter().enumerate().map(|(v, c)| (crate::milp::VarId(v), c[objective.index()])));
        res.model.set_objective(ObjSense::Minimize, expr, 0.0).expect("valid objective");
        let r = solve_lp(&res.model, &SolveParams::default());
        match r.status {
            SolveStatus::Optimal => {
                let y = r.assignment.expect("optimal result has a point");
                Ok(Some(self.assemble(c, Some((&res, y.values())))))
            }
            SolveStatus::Infeasible => Ok(None),
            other => Err(OracleError::Residual(other)),
        }
    }
}

fn weakly_dominates(p: &[f64; 3], q: &[f64; 3]) -> bool {
    p.iter().zip(q).all(|(a, b)| a <= b)
}

/// Minimum of `objective` over every configuration, with the minimizing
/// solution. Ties keep the first configuration in enumeration order.
pub fn oracle_optimum(inst: &Instance, objective: ObjectiveKind) -> Result<(f64, Solution), OracleError> {
    let search = Search::new(inst)?;
    let mut cands = search.candidates();
    let k = objective.index();
    cands.sort_by(|a, b| a.base.as_array()[k].total_cmp(&b.base.as_array()[k]));
    let mut best: Option<(f64, Solution)> = None;
    for c in &cands {
        if let Some((v, _)) = &best {
            if search.monotone && c.base.as_array()[k] > v + REL * v.abs().max(1.0) {
                break;
            }
        }
        let Some(sol) = search.complete(c, objective)? else { continue };
        let v = sol.objectives.as_array()[k];
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, sol));
        }
    }
    best.ok_or(OracleError::Infeasible)
}

/// The exact nondominated set of objective vectors, sorted by cost. Residue
/// flows are taken at the vertices of each configuration's flow polytope.
pub fn oracle_pareto(inst: &Instance) -> Result<Vec<Objectives>, OracleError> {
    let search = Search::new(inst)?;
    let mut cands = search.candidates();
    cands.sort_by(|a, b| a.base.as_array().partial_cmp(&b.base.as_array()).unwrap_or(std::cmp::Ordering::Equal));
    let mut front: Vec<[f64; 3]> = Vec::new();
    let mut any = false;
    for c in &cands {
        let base = c.base.as_array();
        if search.monotone && front.iter().any(|p| weakly_dominates(p, &base)) {
            any = true;
            continue;
        }
        let Some(res) = search.residual(c) else { continue };
        let points = if res.arcs.is_empty() {
            if res.model.constraints().is_empty() {
                vec![Vec::new()]
            } else {
                Vec::new()
            }
        } else {
            vertices::vertices(&res.model, MAX_VERTEX_SYSTEMS).map_err(|size| OracleError::Intractable {
                what: "flow polytope bases",
                size,
                limit: MAX_VERTEX_SYSTEMS,
            })?
        };
        for y in points {
            any = true;
            let v = search.assemble(c, Some((&res, &y))).objectives.as_array();
            if front.iter().any(|p| weakly_dominates(p, &v)) {
                continue;
            }
            front.retain(|p| !weakly_dominates(&v, p));
            front.push(v);
        }
    }
    if !any {
        return Err(OracleError::Infeasible);
    }
    front.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    Ok(front.into_iter().map(|[cost, risk, emissions]| Objectives { cost, risk, emissions }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_space_counts_small_cases() {
        // One node, one vehicle, one terminal.
        assert_eq!(plan_space(1, 1, 1), 1.0);
        // Two nodes on one vehicle: two orders.
        assert_eq!(plan_space(2, 1, 1), 2.0);
        // Two nodes, two vehicles, one terminal: 2 orders on either vehicle plus 2 splits.
        assert_eq!(plan_space(2, 2, 1), 6.0);
    }

    #[test]
    fn interchangeable_vehicles_are_used_in_order() {
        let mut seen = Vec::new();
        let mut owner = vec![0; 2];
        let mut used = vec![false; 2];
        assign(0, &[0, 0], &mut used, &mut owner, &mut |o: &[usize]| seen.push(o.to_vec()));
        assert_eq!(seen, vec![vec![0, 0], vec![0, 1]]);
        let mut seen = Vec::new();
        assign(0, &[0, 1], &mut used, &mut owner, &mut |o: &[usize]| seen.push(o.to_vec()));
        assert_eq!(seen.len(), 4);
    }
}
