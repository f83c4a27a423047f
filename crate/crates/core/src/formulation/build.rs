use crate::instance::{validate_instance, Instance, RiskMode, Severity};
use crate::milp::{LinExpr, LinearModel, ObjSense, Sense, VarId, VarKind};

use super::catalog::{VarCatalog, VarKey};
use super::network::Network;
use super::{big_m, FormulationError, ObjectiveKind};

struct Builder<'a> {
    net: Network<'a>,
    model: LinearModel<f64>,
    cat: VarCatalog,
}

impl<'a> Builder<'a> {
    fn var(&mut self, key: VarKey, lower: f64, upper: f64, kind: VarKind) -> Result<VarId, FormulationError> {
        let id = self.model.add_var(key.to_string(), lower, upper, kind)?;
        self.cat.insert(key, id);
        Ok(id)
    }

    /// Branching order: openings (2), then unloading arcs (1), then the
    /// remaining routing arcs.
    fn binary(&mut self, key: VarKey, priority: i32) -> Result<VarId, FormulationError> {
        let id = self.var(key, 0.0, 1.0, VarKind::Binary)?;
        self.model.set_priority(id, priority);
        Ok(id)
    }

    fn nonneg(&mut self, key: VarKey) -> Result<VarId, FormulationError> {
        self.var(key, 0.0, f64::INFINITY, VarKind::Continuous)
    }

    fn row(&mut self, name: String, expr: LinExpr<f64>, sense: Sense, rhs: f64) -> Result<(), FormulationError> {
        self.model.add_constraint(name, expr, sense, rhs)?;
        Ok(())
    }

    fn get(&self, key: VarKey) -> Option<VarId> {
        self.cat.get(&key)
    }
}

fn s(v: &str) -> String {
    v.to_string()
}

/// Builds the linearized model of `inst` with objective `objective`.
pub fn build_model(inst: &Instance, objective: ObjectiveKind) -> Result<(LinearModel<f64>, VarCatalog), FormulationError> {
    let fatal: Vec<_> = validate_instance(inst).into_iter().filter(|f| f.severity == Severity::Fatal).collect();
    if !fatal.is_empty() {
        return Err(FormulationError::Invalid(fatal));
    }
    let bm = big_m(inst);
    if !bm.is_finite() {
        return Err(FormulationError::NonFiniteBigM);
    }
    let mut b = Builder { net: Network::new(inst), model: LinearModel::new(inst.name.clone()), cat: VarCatalog::default() };
    add_variables(&mut b, bm)?;
    add_routing(&mut b, bm)?;
    add_facilities(&mut b)?;
    let expr = objective_expr(inst, &b.cat, objective);
    b.model.set_objective(ObjSense::Minimize, expr, 0.0)?;
    Ok((b.model, b.cat))
}

fn add_variables(b: &mut Builder<'_>, bm: f64) -> Result<(), FormulationError> {
    let net = b.net.clone();
    for k in &net.fleet {
        for &f in &net.depots {
            for &g in &k.served {
                if net.dist(f, g, Some(k.id)).is_some() {
                    b.binary(VarKey::X { from: s(f), to: s(g), vehicle: s(k.id) }, 0)?;
                }
            }
        }
        for &i in &k.served {
            for &j in &k.served {
                if i != j && net.dist(i, j, Some(k.id)).is_some() {
                    b.binary(VarKey::X { from: s(i), to: s(j), vehicle: s(k.id) }, 0)?;
                }
            }
        }
        for &i in &k.served {
            for &j in &k.terminals {
                if net.dist(i, j, Some(k.id)).is_some() {
                    b.binary(VarKey::X { from: s(i), to: s(j), vehicle: s(k.id) }, 1)?;
                }
            }
        }
        for &j in &k.terminals {
            for &f in &net.depots {
                if net.dist(j, f, Some(k.id)).is_some() {
                    b.binary(VarKey::X { from: s(j), to: s(f), vehicle: s(k.id) }, 0)?;
                }
            }
        }
        for &i in &k.served {
            for &j in &k.terminals {
                if b.get(VarKey::X { from: s(i), to: s(j), vehicle: s(k.id) }).is_some() {
                    b.var(VarKey::Xl { from: s(i), to: s(j), vehicle: s(k.id) }, 0.0, bm, VarKind::Continuous)?;
                }
            }
        }
        for &i in k.served.iter().chain(&k.terminals) {
            b.var(VarKey::E { node: s(i), vehicle: s(k.id) }, 0.0, k.max_distance, VarKind::Continuous)?;
        }
        for &i in &k.served {
            let d = k.waste.demand_at(i);
            b.var(VarKey::Lo { node: s(i), vehicle: s(k.id) }, d, k.capacity, VarKind::Continuous)?;
        }
    }

    for &j in &net.rec {
        for &h in &net.levels {
            if net.recycling_cap(h, j).is_some() {
                b.binary(VarKey::R { node: s(j), level: s(h) }, 2)?;
            }
        }
    }
    for &j in &net.treat {
        for q in net.options(j) {
            for &h in &net.levels {
                if net.treatment_cap(h, j, q).is_some() {
                    b.binary(VarKey::T { tech: s(q), node: s(j), level: s(h) }, 2)?;
                }
            }
        }
    }
    for &j in &net.disp {
        for &h in &net.levels {
            if net.disposal_cap(h, j).is_some() {
                b.binary(VarKey::D { node: s(j), level: s(h) }, 2)?;
            }
        }
    }

    for w in &net.inst.waste_types {
        if w.is_recyclable_only() {
            continue;
        }
        for &j in &net.treat {
            let techs: Vec<&str> = net.techs_for(w, j).collect();
            if techs.is_empty() {
                continue;
            }
            b.nonneg(VarKey::Xt { waste: s(&w.id), node: s(j) })?;
            for q in techs {
                for &h in &net.levels {
                    if b.get(VarKey::T { tech: s(q), node: s(j), level: s(h) }).is_some() {
                        b.nonneg(VarKey::XtSplit { waste: s(&w.id), tech: s(q), node: s(j), level: s(h) })?;
                    }
                }
            }
        }
    }
    for &j in &net.rec {
        b.nonneg(VarKey::Xr { node: s(j) })?;
        for &h in &net.levels {
            if b.get(VarKey::R { node: s(j), level: s(h) }).is_some() {
                b.nonneg(VarKey::XrSplit { node: s(j), level: s(h) })?;
            }
        }
    }
    for &j in &net.disp {
        b.nonneg(VarKey::Xd { node: s(j) })?;
        for &h in &net.levels {
            if b.get(VarKey::D { node: s(j), level: s(h) }).is_some() {
                b.nonneg(VarKey::XdSplit { node: s(j), level: s(h) })?;
            }
        }
    }
    let (tr, td, rd) = net.residue_arcs();
    for (i, j) in tr {
        b.nonneg(VarKey::K { from: s(i), to: s(j) })?;
    }
    for (i, j) in td {
        b.nonneg(VarKey::Z { from: s(i), to: s(j) })?;
    }
    for (i, j) in rd {
        b.nonneg(VarKey::V { from: s(i), to: s(j) })?;
    }
    Ok(())
}

fn add_routing(b: &mut Builder<'_>, bm: f64) -> Result<(), FormulationError> {
    let net = b.net.clone();
    let x = |b: &Builder<'_>, i: &str, j: &str, k: &str| b.get(VarKey::X { from: s(i), to: s(j), vehicle: s(k) });

    for k in &net.fleet {
        let kid = k.id;
        let mut depart = LinExpr::new();
        for &f in &net.depots {
            for &g in &k.served {
                if let Some(v) = x(b, f, g, kid) {
                    depart.add(v, 1.0);
                }
            }
        }
        if !depart.is_empty() {
            b.row(format!("eq04_depart_{kid}"), depart, Sense::Le, 1.0)?;
        }

        for &g in &k.served {
            let mut e = LinExpr::new();
            for &i in net.depots.iter().chain(&k.served) {
                if let Some(v) = x(b, i, g, kid) {
                    e.add(v, 1.0);
                }
            }
            for &j in k.served.iter().chain(&k.terminals) {
                if let Some(v) = x(b, g, j, kid) {
                    e.add(v, -1.0);
                }
            }
            b.row(format!("eq05_flow_{g}_{kid}"), e, Sense::Eq, 0.0)?;
        }

        for &j in &k.terminals {
            let mut e = LinExpr::new();
            for &g in &k.served {
                if let Some(v) = x(b, g, j, kid) {
                    e.add(v, 1.0);
                }
            }
            for &f in &net.depots {
                if let Some(v) = x(b, j, f, kid) {
                    e.add(v, -1.0);
                }
            }
            b.row(format!("eq07_return_{j}_{kid}"), e, Sense::Eq, 0.0)?;
        }

        // Unloading gates.
        for &g in &k.served {
            for &j in &k.terminals {
                let Some(xv) = x(b, g, j, kid) else { continue };
                let mut e = LinExpr::new().with(xv, 1.0);
                if k.waste.is_recyclable_only() {
                    for &h in &net.levels {
                        if let Some(r) = b.get(VarKey::R { node: s(j), level: s(h) }) {
                            e.add(r, -1.0);
                        }
                    }
                    b.row(format!("eq09_recycle_gate_{g}_{j}_{kid}"), e, Sense::Le, 0.0)?;
                } else {
                    for q in net.techs_for(k.waste, j) {
                        for &h in &net.levels {
                            if let Some(t) = b.get(VarKey::T { tech: s(q), node: s(j), level: s(h) }) {
                                e.add(t, -1.0);
                            }
                        }
                    }
                    b.row(format!("eq08_treat_gate_{g}_{j}_{kid}"), e, Sense::Le, 0.0)?;
                }
            }
        }

        // Distance propagation.
        let mu = k.max_distance;
        let e_of = |b: &Builder<'_>, i: &str| b.get(VarKey::E { node: s(i), vehicle: s(kid) }).expect("e exists");
        for &i in &k.served {
            for &j in k.served.iter().chain(&k.terminals) {
                if i == j {
                    continue;
                }
                let Some(xij) = x(b, i, j, kid) else { continue };
                let dij = net.dist(i, j, Some(kid)).expect("arc exists");
                let mut e = LinExpr::new();
                e.add(e_of(b, i), 1.0).add(e_of(b, j), -1.0).add(xij, mu + dij);
                if let Some(xji) = x(b, j, i, kid) {
                    let dji = net.dist(j, i, Some(kid)).expect("arc exists");
                    e.add(xji, mu - dji);
                }
                b.row(format!("eq10_dist_{i}_{j}_{kid}"), e, Sense::Le, mu)?;
            }
        }
        for &g in &k.served {
            let eg = e_of(b, g);
            let mut lower = LinExpr::new().with(eg, -1.0);
            let mut upper = LinExpr::new().with(eg, 1.0);
            for &f in &net.depots {
                if let Some(v) = x(b, f, g, kid) {
                    let d = net.dist(f, g, Some(kid)).expect("arc exists");
                    lower.add(v, d);
                    upper.add(v, mu - d);
                }
            }
            b.row(format!("eq11_dist_first_lo_{g}_{kid}"), lower, Sense::Le, 0.0)?;
            b.row(format!("eq11_dist_first_up_{g}_{kid}"), upper, Sense::Le, mu)?;
        }
        for &j in &k.terminals {
            let mut e = LinExpr::new().with(e_of(b, j), 1.0);
            for &f in &net.depots {
                if let Some(v) = x(b, j, f, kid) {
                    e.add(v, net.dist(j, f, Some(kid)).expect("arc exists"));
                }
            }
            b.row(format!("eq12_dist_end_{j}_{kid}"), e, Sense::Le, mu)?;
        }

        // Load propagation; lo ∈ [d, δ] is carried by the variable bounds.
        let delta = k.capacity;
        let lo_of = |b: &Builder<'_>, i: &str| b.get(VarKey::Lo { node: s(i), vehicle: s(kid) }).expect("lo exists");
        for &i in &k.served {
            for &j in &k.served {
                if i == j {
                    continue;
                }
                let Some(xij) = x(b, i, j, kid) else { continue };
                let dj = k.waste.demand_at(j);
                let mut e = LinExpr::new();
                e.add(lo_of(b, i), 1.0).add(lo_of(b, j), -1.0).add(xij, delta);
                b.row(format!("eq13_load_{i}_{j}_{kid}"), e, Sense::Le, delta - dj)?;
            }
        }
        for &g in &k.served {
            let dg = k.waste.demand_at(g);
            let mut e = LinExpr::new().with(lo_of(b, g), 1.0);
            for &f in &net.depots {
                if let Some(v) = x(b, f, g, kid) {
                    e.add(v, delta - dg);
                }
            }
            b.row(format!("eq16_load_first_{g}_{kid}"), e, Sense::Le, delta)?;
        }

        // xl = x · lo on unloading arcs.
        for &g in &k.served {
            for &j in &k.terminals {
                let Some(xv) = x(b, g, j, kid) else { continue };
                let xl = b.get(VarKey::Xl { from: s(g), to: s(j), vehicle: s(kid) }).expect("xl exists");
                let lo = lo_of(b, g);
                b.row(format!("eq37_xl_x_{g}_{j}_{kid}"), LinExpr::new().with(xl, 1.0).with(xv, -bm), Sense::Le, 0.0)?;
                b.row(format!("eq38_xl_lo_{g}_{j}_{kid}"), LinExpr::new().with(xl, 1.0).with(lo, -1.0), Sense::Le, 0.0)?;
                b.row(
                    format!("eq39_xl_lo_x_{g}_{j}_{kid}"),
                    LinExpr::new().with(xl, 1.0).with(lo, -1.0).with(xv, -bm),
                    Sense::Ge,
                    -bm,
                )?;
            }
        }
    }

    // Every positive demand is collected by exactly one compatible vehicle.
    for w in &net.inst.waste_types {
        for &g in &net.gens {
            if w.demand_at(g) <= 0.0 {
                continue;
            }
            let mut e = LinExpr::new();
            for k in net.fleet.iter().filter(|k| k.waste.id == w.id) {
                for &j in k.served.iter().chain(&k.terminals) {
                    if let Some(v) = x(b, g, j, k.id) {
                        e.add(v, 1.0);
                    }
                }
            }
            b.row(format!("eq06_visit_{g}_{}", w.id), e, Sense::Eq, 1.0)?;
        }
    }
    Ok(())
}

fn add_facilities(b: &mut Builder<'_>) -> Result<(), FormulationError> {
    let net = b.net.clone();
    let inst = net.inst;

    // Treatment.
    let mut total_treated = LinExpr::new();
    for &j in &net.treat {
        let mut intake = LinExpr::new();
        let mut recyclable = LinExpr::new();
        let mut disposable = LinExpr::new();
        for w in &inst.waste_types {
            let Some(xt) = b.get(VarKey::Xt { waste: s(&w.id), node: s(j) }) else { continue };
            intake.add(xt, 1.0);
            total_treated.add(xt, 1.0);
            let mut delivered = LinExpr::new().with(xt, 1.0);
            for k in net.fleet.iter().filter(|k| k.waste.id == w.id) {
                for &g in &k.served {
                    if let Some(xl) = b.get(VarKey::Xl { from: s(g), to: s(j), vehicle: s(k.id) }) {
                        delivered.add(xl, -1.0);
                    }
                }
            }
            b.row(format!("eq17_treated_{}_{j}", w.id), delivered, Sense::Eq, 0.0)?;

            let mut split = LinExpr::new().with(xt, 1.0);
            for q in net.techs_for(w, j) {
                let residue = 1.0 - w.mass_reduction.get(q).copied().unwrap_or(0.0);
                let beta = w.recyclable_fraction_after_tech.get(q).copied().unwrap_or(0.0);
                for &h in &net.levels {
                    if let Some(sp) = b.get(VarKey::XtSplit { waste: s(&w.id), tech: s(q), node: s(j), level: s(h) }) {
                        split.add(sp, -1.0);
                        recyclable.add(sp, residue * beta);
                        disposable.add(sp, residue * (1.0 - beta));
                    }
                }
            }
            b.row(format!("eq24_split_{}_{j}", w.id), split, Sense::Eq, 0.0)?;
        }

        let mut one_tech = LinExpr::new();
        let mut minimum = intake.clone();
        let mut has_minimum = false;
        for q in net.options(j) {
            let mut opened = LinExpr::new();
            for &h in &net.levels {
                let Some(t) = b.get(VarKey::T { tech: s(q), node: s(j), level: s(h) }) else { continue };
                one_tech.add(t, 1.0);
                opened.add(t, 1.0);
                let cap = net.treatment_cap(h, j, q).expect("level data").max;
                let mut e = LinExpr::new().with(t, -cap);
                for w in &inst.waste_types {
                    if let Some(sp) = b.get(VarKey::XtSplit { waste: s(&w.id), tech: s(q), node: s(j), level: s(h) }) {
                        e.add(sp, 1.0);
                    }
                }
                b.row(format!("eq18_cap_{q}_{j}_{h}"), e, Sense::Le, 0.0)?;
                if !net.is_existing(j) {
                    let m = inst.treatment_threshold(j, q);
                    if m > 0.0 {
                        minimum.add(t, -m);
                        has_minimum = true;
                    }
                }
            }
            if net.is_existing(j) {
                b.row(format!("eq31_existing_{q}_{j}"), opened, Sense::Eq, 1.0)?;
            }
        }
        if has_minimum {
            b.row(format!("eq19_min_{j}"), minimum, Sense::Ge, 0.0)?;
        }
        if !one_tech.is_empty() {
            b.row(format!("eq30_one_tech_{j}"), one_tech, Sense::Le, 1.0)?;
        }

        let mut to_rec = recyclable;
        for &r in &net.rec {
            if let Some(k) = b.get(VarKey::K { from: s(j), to: s(r) }) {
                to_rec.add(k, -1.0);
            }
        }
        b.row(format!("eq21_residue_rec_{j}"), to_rec, Sense::Eq, 0.0)?;
        let mut to_disp = disposable;
        for &d in &net.disp {
            if let Some(z) = b.get(VarKey::Z { from: s(j), to: s(d) }) {
                to_disp.add(z, -1.0);
            }
        }
        b.row(format!("eq24_residue_disp_{j}"), to_disp, Sense::Eq, 0.0)?;
    }

    // Recycling.
    let mut direct_recycled = LinExpr::new();
    for &j in &net.rec {
        let xr = b.get(VarKey::Xr { node: s(j) }).expect("xr exists");
        let mut e = LinExpr::new().with(xr, 1.0);
        for k in &net.fleet {
            for &g in &k.served {
                if let Some(xl) = b.get(VarKey::Xl { from: s(g), to: s(j), vehicle: s(k.id) }) {
                    e.add(xl, -1.0);
                    direct_recycled.add(xl, 1.0);
                }
            }
        }
        for &t in &net.treat {
            if let Some(k) = b.get(VarKey::K { from: s(t), to: s(j) }) {
                e.add(k, -1.0);
            }
        }
        b.row(format!("eq20_recycled_{j}"), e, Sense::Eq, 0.0)?;
        level_window(b, j, xr, Family::Recycling)?;

        let gamma = inst.recycling_ratio.get(j).copied().unwrap_or(1.0);
        let mut e = LinExpr::new().with(xr, 1.0 - gamma);
        for &d in &net.disp {
            if let Some(v) = b.get(VarKey::V { from: s(j), to: s(d) }) {
                e.add(v, -1.0);
            }
        }
        b.row(format!("eq25_residue_{j}"), e, Sense::Eq, 0.0)?;
    }

    // Disposal.
    for &j in &net.disp {
        let xd = b.get(VarKey::Xd { node: s(j) }).expect("xd exists");
        let mut e = LinExpr::new().with(xd, 1.0);
        for &t in &net.treat {
            if let Some(z) = b.get(VarKey::Z { from: s(t), to: s(j) }) {
                e.add(z, -1.0);
            }
        }
        for &r in &net.rec {
            if let Some(v) = b.get(VarKey::V { from: s(r), to: s(j) }) {
                e.add(v, -1.0);
            }
        }
        b.row(format!("eq26_disposed_{j}"), e, Sense::Eq, 0.0)?;
        level_window(b, j, xd, Family::Disposal)?;
    }

    let total: f64 = inst.total_demand();
    let mut balance = total_treated;
    balance.add_expr(&direct_recycled, 1.0);
    b.row("eq29_balance".into(), balance, Sense::Eq, total)?;

    // The same balance per waste type. Integral points satisfy it already;
    // it keeps fractional routing from shifting mass between waste types.
    for w in &inst.waste_types {
        let mut e = LinExpr::new();
        for k in net.fleet.iter().filter(|k| k.waste.id == w.id) {
            for &g in &k.served {
                for &j in &k.terminals {
                    if let Some(xl) = b.get(VarKey::Xl { from: s(g), to: s(j), vehicle: s(k.id) }) {
                        e.add(xl, 1.0);
                    }
                }
            }
        }
        if !e.is_empty() {
            b.row(format!("eq29_balance_{}", w.id), e, Sense::Eq, w.total_demand())?;
        }
    }

    // Link risk caps.
    for arc in &inst.arcs {
        let Some(cap) = arc.risk_cap else { continue };
        let mut pairs = vec![(arc.from.as_str(), arc.to.as_str())];
        if !arc.directed {
            pairs.push((arc.to.as_str(), arc.from.as_str()));
        }
        for (i, j) in pairs {
            let flows: Vec<VarId> = [
                VarKey::K { from: s(i), to: s(j) },
                VarKey::Z { from: s(i), to: s(j) },
                VarKey::V { from: s(i), to: s(j) },
            ]
            .into_iter()
            .filter_map(|k| b.get(k))
            .collect();
            if flows.is_empty() || arc.transport_risk == 0.0 {
                continue;
            }
            let e = LinExpr::from_terms(flows.into_iter().map(|v| (v, arc.transport_risk)));
            b.row(format!("eq34_risk_{i}_{j}"), e, Sense::Le, cap)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Family {
    Recycling,
    Disposal,
}

/// Level split, per-level capacity, minimum intake and level choice for a
/// recycling or disposal site.
fn level_window(b: &mut Builder<'_>, j: &str, total: VarId, fam: Family) -> Result<(), FormulationError> {
    let net = b.net.clone();
    let (cap_tag, min_tag, pin_tag, threshold) = match fam {
        Family::Recycling => ("eq22", "eq23", "eq32", net.inst.recycling_threshold(j)),
        Family::Disposal => ("eq27", "eq28", "eq33", net.inst.disposal_threshold(j)),
    };
    let mut split = LinExpr::new().with(total, 1.0);
    let mut opened = LinExpr::new();
    for &h in &net.levels {
        let (open_key, split_key, cap) = match fam {
            Family::Recycling => (
                VarKey::R { node: s(j), level: s(h) },
                VarKey::XrSplit { node: s(j), level: s(h) },
                net.recycling_cap(h, j),
            ),
            Family::Disposal => (
                VarKey::D { node: s(j), level: s(h) },
                VarKey::XdSplit { node: s(j), level: s(h) },
                net.disposal_cap(h, j),
            ),
        };
        let (Some(o), Some(sp), Some(cap)) = (b.get(open_key), b.get(split_key), cap) else { continue };
        split.add(sp, -1.0);
        opened.add(o, 1.0);
        b.row(format!("{cap_tag}_cap_{j}_{h}"), LinExpr::new().with(sp, 1.0).with(o, -cap.max), Sense::Le, 0.0)?;
    }
    b.row(format!("{cap_tag}_split_{j}"), split, Sense::Eq, 0.0)?;
    if opened.is_empty() {
        return Ok(());
    }
    if net.is_existing(j) {
        b.row(format!("{pin_tag}_existing_{j}"), opened, Sense::Eq, 1.0)?;
    } else {
        if threshold > 0.0 {
            let mut e = LinExpr::new().with(total, 1.0);
            e.add_expr(&opened, -threshold);
            b.row(format!("{min_tag}_min_{j}"), e, Sense::Ge, 0.0)?;
        }
        b.row(format!("{cap_tag}_one_level_{j}"), opened, Sense::Le, 1.0)?;
    }
    Ok(())
}

/// Linear expression of objective `which` over the catalog's variables.
pub fn objective_expr(inst: &Instance, cat: &VarCatalog, which: ObjectiveKind) -> LinExpr<f64> {
    let net = Network::new(inst);
    let mut e = LinExpr::new();
    let arc_val = |i: &str, j: &str, f: &dyn Fn(&crate::instance::Arc) -> f64| inst.arc(i, j).map_or(0.0, f);
    for (id, key) in cat.iter() {
        let c = match (which, key) {
            (ObjectiveKind::Cost, VarKey::Xl { from, to, .. }) => arc_val(from, to, &|a| a.unit_cost),
            (ObjectiveKind::Cost, VarKey::Z { from, to } | VarKey::K { from, to } | VarKey::V { from, to }) => {
                arc_val(from, to, &|a| a.unit_cost)
            }
            (ObjectiveKind::Cost, VarKey::R { node, level }) if !net.is_existing(node) => {
                net.recycling_cap(level, node).map_or(0.0, |c| c.invest_cost)
            }
            (ObjectiveKind::Cost, VarKey::T { tech, node, level }) if !net.is_existing(node) => {
                net.treatment_cap(level, node, tech).map_or(0.0, |c| c.invest_cost)
            }
            (ObjectiveKind::Cost, VarKey::D { node, level }) if !net.is_existing(node) => {
                net.disposal_cap(level, node).map_or(0.0, |c| c.invest_cost)
            }

            (ObjectiveKind::Risk, VarKey::Z { from, to } | VarKey::K { from, to } | VarKey::V { from, to }) => {
                arc_val(from, to, &|a| a.transport_risk)
            }
            (ObjectiveKind::Risk, VarKey::XtSplit { tech, node, level, .. }) => match inst.risk_mode {
                RiskMode::LevelCoupled => net.treatment_cap(level, node, tech).map_or(0.0, |c| c.op_risk),
                RiskMode::PaperLiteral => net.levels.iter().filter_map(|h| net.treatment_cap(h, node, tech)).map(|c| c.op_risk).sum(),
            },
            (ObjectiveKind::Risk, VarKey::XrSplit { node, level }) => match inst.risk_mode {
                RiskMode::LevelCoupled => net.recycling_cap(level, node).map_or(0.0, |c| c.op_risk),
                RiskMode::PaperLiteral => net.levels.iter().filter_map(|h| net.recycling_cap(h, node)).map(|c| c.op_risk).sum(),
            },
            (ObjectiveKind::Risk, VarKey::XdSplit { node, level }) => match inst.risk_mode {
                RiskMode::LevelCoupled => net.disposal_cap(level, node).map_or(0.0, |c| c.op_risk),
                RiskMode::PaperLiteral => net.levels.iter().filter_map(|h| net.disposal_cap(h, node)).map(|c| c.op_risk).sum(),
            },

            (ObjectiveKind::Emissions, VarKey::Xr { node }) => inst.co2_ops.recycling.get(node).copied().unwrap_or(0.0),
            (ObjectiveKind::Emissions, VarKey::Xd { node }) => inst.co2_ops.disposal.get(node).copied().unwrap_or(0.0),
            (ObjectiveKind::Emissions, VarKey::XtSplit { waste, tech, node, .. }) => inst.qt(waste, tech, node),
            (ObjectiveKind::Emissions, VarKey::Z { from, to } | VarKey::K { from, to } | VarKey::V { from, to }) => {
                arc_val(from, to, &|a| a.co2_transport * a.distance)
            }
            _ => 0.0,
        };
        if c != 0.0 {
            e.add(id, c);
        }
    }
    e
}
