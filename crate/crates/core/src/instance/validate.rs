use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{FacilityKind, Instance, LevelCap, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Fatal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    /// Value outside its domain (sign, ratio range, 0/1 flag).
    Schema,
    /// Two records of the same kind share an id.
    Duplicate(&'static str),
    /// Reference to an unknown or wrongly typed entity, or missing coverage.
    Reference,
    /// The data is well formed but the model cannot be satisfied.
    Feasibility,
}

/// One validation finding, naming the offending entity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub category: Category,
    pub entity: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Fatal => "fatal",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.entity, self.message)
    }
}

#[derive(Default)]
struct Report(Vec<Finding>);

impl Report {
    fn push(&mut self, severity: Severity, category: Category, entity: impl Into<String>, message: impl Into<String>) {
        self.0.push(Finding { severity, category, entity: entity.into(), message: message.into() });
    }

    fn fatal(&mut self, category: Category, entity: impl Into<String>, message: impl Into<String>) {
        self.push(Severity::Fatal, category, entity, message);
    }

    fn nonneg(&mut self, entity: impl Into<String>, v: f64) {
        if !(v.is_finite() && v >= 0.0) {
            self.fatal(Category::Schema, entity, format!("must be a finite non-negative number, got {v}"));
        }
    }

    fn positive(&mut self, entity: impl Into<String>, v: f64) {
        if !(v.is_finite() && v > 0.0) {
            self.fatal(Category::Schema, entity, format!("must be a finite positive number, got {v}"));
        }
    }

    fn ratio(&mut self, entity: impl Into<String>, v: f64) {
        if !(0.0..=1.0).contains(&v) {
            self.fatal(Category::Schema, entity, format!("ratio must lie in [0, 1], got {v}"));
        }
    }

    fn flag(&mut self, entity: impl Into<String>, v: u8) {
        if v > 1 {
            self.fatal(Category::Schema, entity, format!("flag must be 0 or 1, got {v}"));
        }
    }

    fn unique<'a>(&mut self, what: &'static str, ids: impl Iterator<Item = &'a str>) {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) {
                self.fatal(Category::Duplicate(what), id, format!("duplicate {what} id"));
            }
        }
    }
}

/// Domain checks that every document must pass to be parsed at all.
pub(crate) fn schema_findings(inst: &Instance) -> Vec<Finding> {
    let mut r = Report::default();
    r.unique("node", inst.nodes.iter().map(|n| n.id.as_str()));
    r.unique("technology", inst.technologies.iter().map(|t| t.id.as_str()));
    r.unique("waste type", inst.waste_types.iter().map(|w| w.id.as_str()));
    r.unique("vehicle", inst.vehicles.iter().map(|v| v.id.as_str()));
    r.unique("capacity level", inst.capacity_levels.iter().map(|l| l.level.as_str()));

    if !(1e-6..=1e-3).contains(&inst.eps_constant) {
        r.fatal(Category::Schema, "eps_constant", format!("must lie in [1e-6, 1e-3], got {}", inst.eps_constant));
    }
    for w in &inst.waste_types {
        for (n, &d) in &w.demand {
            r.nonneg(format!("waste_types[{}].demand[{n}]", w.id), d);
        }
        for (q, &c) in &w.tech_compat {
            r.flag(format!("waste_types[{}].tech_compat[{q}]", w.id), c);
        }
        for (q, &b) in &w.recyclable_fraction_after_tech {
            r.ratio(format!("waste_types[{}].recyclable_fraction_after_tech[{q}]", w.id), b);
        }
        for (q, &m) in &w.mass_reduction {
            r.ratio(format!("waste_types[{}].mass_reduction[{q}]", w.id), m);
        }
        r.nonneg(format!("waste_types[{}].risk_potential", w.id), w.risk_potential);
    }
    for v in &inst.vehicles {
        for (w, &c) in &v.waste_compat {
            r.flag(format!("vehicles[{}].waste_compat[{w}]", v.id), c);
        }
        r.positive(format!("vehicles[{}].capacity", v.id), v.capacity);
        r.positive(format!("vehicles[{}].max_distance", v.id), v.max_distance);
    }
    let cap = |r: &mut Report, path: String, c: &LevelCap| {
        r.nonneg(format!("{path}.max"), c.max);
        r.nonneg(format!("{path}.invest_cost"), c.invest_cost);
        r.nonneg(format!("{path}.op_risk"), c.op_risk);
    };
    for l in &inst.capacity_levels {
        for (n, techs) in &l.treatment {
            for (q, c) in techs {
                cap(&mut r, format!("capacity_levels[{}].treatment[{n}][{q}]", l.level), c);
            }
        }
        for (n, c) in &l.recycling {
            cap(&mut r, format!("capacity_levels[{}].recycling[{n}]", l.level), c);
        }
        for (n, c) in &l.disposal {
            cap(&mut r, format!("capacity_levels[{}].disposal[{n}]", l.level), c);
        }
    }
    for (n, techs) in &inst.thresholds.treatment {
        for (q, &m) in techs {
            r.positive(format!("thresholds.treatment[{n}][{q}]"), m);
        }
    }
    for (n, &m) in &inst.thresholds.recycling {
        r.positive(format!("thresholds.recycling[{n}]"), m);
    }
    for (n, &m) in &inst.thresholds.disposal {
        r.positive(format!("thresholds.disposal[{n}]"), m);
    }
    for a in &inst.arcs {
        let p = format!("arcs[{}->{}]", a.from, a.to);
        r.nonneg(format!("{p}.distance"), a.distance);
        r.nonneg(format!("{p}.unit_cost"), a.unit_cost);
        r.nonneg(format!("{p}.transport_risk"), a.transport_risk);
        r.nonneg(format!("{p}.co2_transport"), a.co2_transport);
        if let Some(c) = a.risk_cap {
            r.nonneg(format!("{p}.risk_cap"), c);
        }
        for (k, &d) in &a.vehicle_distance {
            r.nonneg(format!("{p}.vehicle_distance[{k}]"), d);
        }
    }
    for (n, &g) in &inst.recycling_ratio {
        r.ratio(format!("recycling_ratio[{n}]"), g);
    }
    for (n, &q) in &inst.co2_ops.recycling {
        r.nonneg(format!("co2_ops.recycling[{n}]"), q);
    }
    for (n, &q) in &inst.co2_ops.disposal {
        r.nonneg(format!("co2_ops.disposal[{n}]"), q);
    }
    for (w, techs) in &inst.co2_ops.treatment {
        for (q, nodes) in techs {
            for (n, &v) in nodes {
                r.nonneg(format!("co2_ops.treatment[{w}][{q}][{n}]"), v);
            }
        }
    }
    r.0
}

/// Full validation: schema, cross-references and basic serviceability.
///
/// The report is empty exactly when the instance can be handed to the
/// formulation. Findings are data; this function never fails.
pub fn validate_instance(inst: &Instance) -> Vec<Finding> {
    let mut r = Report(schema_findings(inst));
    references(inst, &mut r);
    serviceability(inst, &mut r);
    r.0
}

fn references(inst: &Instance, r: &mut Report) {
    let kind_of: BTreeMap<&str, NodeKind> = inst.nodes.iter().map(|n| (n.id.as_str(), n.kind)).collect();
    let techs: BTreeSet<&str> = inst.technologies.iter().map(|t| t.id.as_str()).collect();
    let wastes: BTreeSet<&str> = inst.waste_types.iter().map(|w| w.id.as_str()).collect();
    let vehicles: BTreeSet<&str> = inst.vehicles.iter().map(|v| v.id.as_str()).collect();
    let is = |id: &str, f: FacilityKind| kind_of.get(id).and_then(|k| k.facility()) == Some(f);
    let ids_of = |f: FacilityKind| inst.nodes_with(f).map(|n| n.id.as_str()).collect::<Vec<_>>();

    if inst.depots().next().is_none() {
        r.fatal(Category::Reference, "nodes", "at least one depot is required");
    }
    if inst.generation_nodes().next().is_none() {
        r.fatal(Category::Reference, "nodes", "at least one generation node is required");
    }

    for w in &inst.waste_types {
        for n in w.demand.keys() {
            if kind_of.get(n.as_str()) != Some(&NodeKind::Generation) {
                r.fatal(Category::Reference, format!("waste_types[{}].demand[{n}]", w.id), "not a generation node");
            }
        }
        for q in w.tech_compat.keys().chain(w.recyclable_fraction_after_tech.keys()).chain(w.mass_reduction.keys()) {
            if !techs.contains(q.as_str()) {
                r.fatal(Category::Reference, format!("waste_types[{}]", w.id), format!("unknown technology `{q}`"));
            }
        }
        for (q, _) in w.tech_compat.iter().filter(|(_, &c)| c == 1) {
            if !w.recyclable_fraction_after_tech.contains_key(q) || !w.mass_reduction.contains_key(q) {
                r.fatal(
                    Category::Reference,
                    format!("waste_types[{}]", w.id),
                    format!("compatible technology `{q}` needs both a recyclable fraction and a mass reduction"),
                );
            }
        }
    }

    for v in &inst.vehicles {
        for w in v.waste_compat.keys() {
            if !wastes.contains(w.as_str()) {
                r.fatal(Category::Reference, format!("vehicles[{}].waste_compat", v.id), format!("unknown waste type `{w}`"));
            }
        }
        if v.waste().is_none() {
            r.fatal(Category::Reference, format!("vehicles[{}]", v.id), "exactly one compatible waste type is required");
        }
    }

    for t in &inst.technologies {
        for n in &t.available_at {
            if kind_of.get(n.as_str()) != Some(&NodeKind::TreatmentExisting) {
                r.fatal(
                    Category::Reference,
                    format!("technologies[{}].available_at", t.id),
                    format!("`{n}` is not an existing treatment site"),
                );
            }
        }
    }
    for n in inst.nodes_of(|k| k == NodeKind::TreatmentExisting) {
        let count = inst.technologies.iter().filter(|t| t.available_at.contains(&n.id)).count();
        if count != 1 {
            r.fatal(
                Category::Reference,
                format!("nodes[{}]", n.id),
                format!("an existing treatment site needs exactly one available technology, found {count}"),
            );
        }
    }

    if inst.capacity_levels.is_empty() && inst.nodes.iter().any(|n| n.kind.facility().is_some()) {
        r.fatal(Category::Reference, "capacity_levels", "at least one capacity level is required");
    }
    for l in &inst.capacity_levels {
        let p = format!("capacity_levels[{}]", l.level);
        for (n, caps) in &l.treatment {
            if !is(n, FacilityKind::Treatment) {
                r.fatal(Category::Reference, format!("{p}.treatment[{n}]"), "not a treatment node");
            }
            for q in caps.keys() {
                if !techs.contains(q.as_str()) {
                    r.fatal(Category::Reference, format!("{p}.treatment[{n}]"), format!("unknown technology `{q}`"));
                }
            }
        }
        for n in l.recycling.keys() {
            if !is(n, FacilityKind::Recycling) {
                r.fatal(Category::Reference, format!("{p}.recycling[{n}]"), "not a recycling node");
            }
        }
        for n in l.disposal.keys() {
            if !is(n, FacilityKind::Disposal) {
                r.fatal(Category::Reference, format!("{p}.disposal[{n}]"), "not a disposal node");
            }
        }
        for n in ids_of(FacilityKind::Recycling) {
            if !l.recycling.contains_key(n) {
                r.fatal(Category::Reference, format!("{p}.recycling"), format!("no capacity for `{n}`"));
            }
        }
        for n in ids_of(FacilityKind::Disposal) {
            if !l.disposal.contains_key(n) {
                r.fatal(Category::Reference, format!("{p}.disposal"), format!("no capacity for `{n}`"));
            }
        }
        for n in inst.nodes_with(FacilityKind::Treatment) {
            let caps = l.treatment.get(&n.id);
            match n.kind {
                NodeKind::TreatmentExisting => {
                    if let Some(q) = inst.existing_technology(&n.id) {
                        if !caps.is_some_and(|c| c.contains_key(q)) {
                            r.fatal(
                                Category::Reference,
                                format!("{p}.treatment[{}]", n.id),
                                format!("no capacity for installed technology `{q}`"),
                            );
                        }
                    }
                }
                _ => {
                    if caps.is_none_or(|c| c.is_empty()) {
                        r.fatal(Category::Reference, format!("{p}.treatment"), format!("no capacity for `{}`", n.id));
                    }
                }
            }
        }
    }
    if let Some(first) = inst.capacity_levels.first() {
        let shape = |l: &super::CapacityLevel| {
            l.treatment.iter().map(|(n, m)| (n.clone(), m.keys().cloned().collect::<Vec<_>>())).collect::<Vec<_>>()
        };
        for l in &inst.capacity_levels[1..] {
            if shape(l) != shape(first) {
                r.fatal(
                    Category::Reference,
                    format!("capacity_levels[{}].treatment", l.level),
                    "every level must list the same (node, technology) pairs",
                );
            }
        }
    }

    for (n, techs_at) in &inst.thresholds.treatment {
        if !is(n, FacilityKind::Treatment) {
            r.fatal(Category::Reference, format!("thresholds.treatment[{n}]"), "not a treatment node");
        }
        for q in techs_at.keys() {
            if !techs.contains(q.as_str()) {
                r.fatal(Category::Reference, format!("thresholds.treatment[{n}]"), format!("unknown technology `{q}`"));
            }
        }
    }
    for n in inst.thresholds.recycling.keys() {
        if !is(n, FacilityKind::Recycling) {
            r.fatal(Category::Reference, format!("thresholds.recycling[{n}]"), "not a recycling node");
        }
    }
    for n in inst.thresholds.disposal.keys() {
        if !is(n, FacilityKind::Disposal) {
            r.fatal(Category::Reference, format!("thresholds.disposal[{n}]"), "not a disposal node");
        }
    }

    let mut pairs = BTreeSet::new();
    for a in &inst.arcs {
        let p = format!("arcs[{}->{}]", a.from, a.to);
        for end in [&a.from, &a.to] {
            if !kind_of.contains_key(end.as_str()) {
                r.fatal(Category::Reference, p.clone(), format!("unknown node `{end}`"));
            }
        }
        if a.from == a.to {
            r.fatal(Category::Reference, p.clone(), "self-loop");
        }
        let fresh = if a.directed {
            pairs.insert((a.from.clone(), a.to.clone()))
        } else {
            let f = pairs.insert((a.from.clone(), a.to.clone()));
            pairs.insert((a.to.clone(), a.from.clone())) && f
        };
        if !fresh {
            r.fatal(Category::Duplicate("arc"), p.clone(), "arc defined more than once");
        }
        for k in a.vehicle_distance.keys() {
            if !vehicles.contains(k.as_str()) {
                r.fatal(Category::Reference, format!("{p}.vehicle_distance"), format!("unknown vehicle `{k}`"));
            }
        }
    }

    for n in ids_of(FacilityKind::Recycling) {
        if !inst.recycling_ratio.contains_key(n) {
            r.fatal(Category::Reference, "recycling_ratio", format!("missing for `{n}`"));
        }
        if !inst.co2_ops.recycling.contains_key(n) {
            r.fatal(Category::Reference, "co2_ops.recycling", format!("missing for `{n}`"));
        }
    }
    for n in inst.recycling_ratio.keys() {
        if !is(n, FacilityKind::Recycling) {
            r.fatal(Category::Reference, format!("recycling_ratio[{n}]"), "not a recycling node");
        }
    }
    for n in ids_of(FacilityKind::Disposal) {
        if !inst.co2_ops.disposal.contains_key(n) {
            r.fatal(Category::Reference, "co2_ops.disposal", format!("missing for `{n}`"));
        }
    }
    for w in &inst.waste_types {
        for t in inst.nodes_with(FacilityKind::Treatment) {
            for q in inst.treatment_options(&t.id) {
                let known = inst.co2_ops.treatment.get(&w.id).and_then(|m| m.get(q)).is_some_and(|m| m.contains_key(&t.id));
                if w.compatible_with(q) && !known {
                    r.fatal(Category::Reference, "co2_ops.treatment", format!("missing for ({}, {q}, {})", w.id, t.id));
                }
            }
        }
    }
}

fn serviceability(inst: &Instance, r: &mut Report) {
    let has_recycling = inst.nodes_with(FacilityKind::Recycling).next().is_some();
    for w in &inst.waste_types {
        let vehicles: Vec<_> = inst.vehicles.iter().filter(|v| v.waste() == Some(w.id.as_str())).collect();
        let best = vehicles.iter().map(|v| v.capacity).fold(0.0, f64::max);
        for (n, &d) in &w.demand {
            if d <= 0.0 {
                continue;
            }
            let entity = format!("waste_types[{}].demand[{n}]", w.id);
            if vehicles.is_empty() {
                r.fatal(Category::Feasibility, entity, "no compatible vehicle for positive demand");
            } else if d > best {
                r.fatal(
                    Category::Feasibility,
                    entity,
                    format!("demand {d} exceeds any single vehicle capacity (largest {best})"),
                );
            } else if !inst.depots().any(|f| inst.arc(&f.id, n).is_some()) {
                r.fatal(Category::Feasibility, entity, "no arc from a depot to this node");
            }
        }
        if w.total_demand() > 0.0 {
            if w.is_recyclable_only() && !has_recycling {
                r.fatal(
                    Category::Feasibility,
                    format!("waste_types[{}]", w.id),
                    "recyclable-only waste needs at least one recycling node",
                );
            }
            if !w.is_recyclable_only() {
                let servable = inst
                    .nodes_with(FacilityKind::Treatment)
                    .any(|t| inst.treatment_options(&t.id).iter().any(|q| w.compatible_with(q)));
                if !servable {
                    r.fatal(
                        Category::Feasibility,
                        format!("waste_types[{}]", w.id),
                        "no treatment node offers a compatible technology",
                    );
                }
            }
        } else if !vehicles.is_empty() {
            r.push(
                Severity::Warning,
                Category::Feasibility,
                format!("waste_types[{}]", w.id),
                "no demand; its vehicles stay at the depot",
            );
        }
    }

    let check_threshold = |r: &mut Report, entity: String, min: f64, maxes: Vec<f64>| {
        if min > 0.0 && !maxes.is_empty() && maxes.iter().all(|&m| min > m) {
            r.fatal(Category::Feasibility, entity, format!("minimum {min} exceeds the capacity of every level"));
        }
    };
    for (n, techs) in &inst.thresholds.treatment {
        for (q, &m) in techs {
            let maxes = inst
                .capacity_levels
                .iter()
                .filter_map(|l| l.treatment.get(n).and_then(|c| c.get(q)).map(|c| c.max))
                .collect();
            check_threshold(r, format!("thresholds.treatment[{n}][{q}]"), m, maxes);
        }
    }
    for (n, &m) in &inst.thresholds.recycling {
        let maxes = inst.capacity_levels.iter().filter_map(|l| l.recycling.get(n).map(|c| c.max)).collect();
        check_threshold(r, format!("thresholds.recycling[{n}]"), m, maxes);
    }
    for (n, &m) in &inst.thresholds.disposal {
        let maxes = inst.capacity_levels.iter().filter_map(|l| l.disposal.get(n).map(|c| c.max)).collect();
        check_threshold(r, format!("thresholds.disposal[{n}]"), m, maxes);
    }
}
