//! Plain-text tables and delimited output.

use std::fmt::Write;

use hwlrp::formulation::{ObjectiveKind, Solution};
use hwlrp::instance::{Finding, Instance, Scenario, Severity};
use hwlrp::moo::{ParetoFront, SweepConfig};
use hwlrp::SolveResult;

/// Shortest decimal that rounds to `v` at 6 places, without trailing zeros.
fn num(v: f64) -> String {
    let s = format!("{:.6}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Left-aligned columns separated by two spaces.
fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |out: &mut String, cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        let _ = writeln!(out, "  {}", padded.join("  ").trim_end());
    };
    line(out, header.to_vec());
    for r in rows {
        line(out, r.iter().map(String::as_str).collect());
    }
}

fn objective_name(k: ObjectiveKind) -> String {
    format!("{} {k}", k.label())
}

pub fn render_validation(inst: &Instance, findings: &[Finding]) -> String {
    let mut out = String::new();
    let fatal = findings.iter().filter(|f| f.severity == Severity::Fatal).count();
    let _ = writeln!(out, "instance: {}", inst.name);
    let _ = writeln!(
        out,
        "{} nodes, {} waste types, {} vehicles, {} capacity levels",
        inst.nodes.len(),
        inst.waste_types.len(),
        inst.vehicles.len(),
        inst.capacity_levels.len()
    );
    let _ = writeln!(out, "{fatal} fatal, {} warning(s)", findings.len() - fatal);
    for f in findings {
        let _ = writeln!(out, "  {f}");
    }
    out
}

pub fn render_solution(inst: &Instance, objective: ObjectiveKind, result: &SolveResult, sol: Option<&Solution>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance: {}", inst.name);
    let _ = writeln!(out, "objective: {}, status {}, nodes {}", objective_name(objective), result.status, result.nodes);
    if let (Some(v), Some(b)) = (result.objective, result.bound) {
        if result.status != hwlrp::solver::SolveStatus::Optimal {
            let _ = writeln!(out, "incumbent {}, bound {}", num(v), num(b));
        }
    }
    let Some(sol) = sol else {
        return out;
    };

    let _ = writeln!(out, "\nOpenings");
    let rows: Vec<Vec<String>> = sol
        .openings
        .iter()
        .map(|o| {
            vec![
                o.node.clone(),
                o.kind.to_string(),
                o.technology.clone().unwrap_or_else(|| "-".into()),
                o.level.clone(),
                if o.existing { "yes" } else { "no" }.into(),
            ]
        })
        .collect();
    table(&mut out, &["node", "kind", "technology", "level", "existing"], &rows);

    let _ = writeln!(out, "\nRoutes");
    let rows: Vec<Vec<String>> =
        sol.routes.iter().map(|r| vec![r.vehicle.clone(), r.waste.clone(), r.stops.join("-"), num(r.load), num(r.length)]).collect();
    table(&mut out, &["vehicle", "waste", "route", "load", "length"], &rows);

    let _ = writeln!(out, "\nResidue flows");
    let rows: Vec<Vec<String>> = [
        ("treatment->recycling", &sol.treatment_to_recycling),
        ("treatment->disposal", &sol.treatment_to_disposal),
        ("recycling->disposal", &sol.recycling_to_disposal),
    ]
    .iter()
    .flat_map(|(kind, flows)| flows.iter().map(move |f| vec![kind.to_string(), f.from.clone(), f.to.clone(), num(f.amount)]))
    .collect();
    table(&mut out, &["kind", "from", "to", "amount"], &rows);

    let _ = writeln!(out, "\nObjectives");
    let rows: Vec<Vec<String>> =
        ObjectiveKind::ALL.iter().map(|&k| vec![objective_name(k), num(sol.objectives.get(k))]).collect();
    table(&mut out, &["objective", "value"], &rows);
    out
}

pub fn render_front(inst: &Instance, front: &ParetoFront, cfg: &SweepConfig) -> String {
    let mut out = String::new();
    let [a, b] = cfg.scalarization.constrained();
    let _ = writeln!(out, "instance: {}", inst.name);
    let _ = writeln!(
        out,
        "primary {}, bounded {} and {}, {}x{} grid",
        objective_name(cfg.scalarization.primary),
        a.label(),
        b.label(),
        cfg.grid,
        cfg.grid
    );
    let _ = writeln!(out, "\nPayoff table");
    let rows: Vec<Vec<String>> = ObjectiveKind::ALL
        .iter()
        .map(|&k| {
            let r = front.payoff.rows[k.index()];
            vec![format!("min {}", k.label()), num(r[0]), num(r[1]), num(r[2])]
        })
        .collect();
    table(&mut out, &["", "f1", "f2", "f3"], &rows);
    let solved = front.cells.iter().filter(|c| c.objectives.is_some()).count();
    let _ = writeln!(out, "\n{} of {} cells returned a point; {} nondominated", solved, front.cells.len(), front.points.len());
    let rows: Vec<Vec<String>> = front
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let v = p.objectives.as_array();
            vec![(i + 1).to_string(), num(v[0]), num(v[1]), num(v[2]), p.status.to_string()]
        })
        .collect();
    table(&mut out, &["point", "f1", "f2", "f3", "status"], &rows);
    out
}

/// One objective's baseline and scenario values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta {
    pub objective: ObjectiveKind,
    pub baseline: Option<f64>,
    pub scenario: Option<f64>,
}

impl Delta {
    /// Percentage change from the baseline.
    pub fn percent(&self) -> Option<f64> {
        let (b, s) = (self.baseline?, self.scenario?);
        if b == 0.0 {
            (s == 0.0).then_some(0.0)
        } else {
            Some(100.0 * (s - b) / b.abs())
        }
    }
}

fn opt(v: Option<f64>, missing: &str) -> String {
    v.map_or_else(|| missing.to_string(), num)
}

pub fn render_deltas(inst: &Instance, scenario: &Scenario, deltas: &[Delta]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance: {}", inst.name);
    let factors = if scenario.capacity_factors.is_empty() {
        String::new()
    } else {
        format!(" ({})", scenario.capacity_factors.iter().map(|f| num(*f)).collect::<Vec<_>>().join(", "))
    };
    let _ = writeln!(
        out,
        "scenario: capacity {}{factors}, waste x{}, sustainability {}",
        scenario.capacity,
        num(scenario.waste_scale),
        if scenario.sustainability { "on" } else { "off" }
    );
    let rows: Vec<Vec<String>> = deltas
        .iter()
        .map(|d| {
            vec![
                objective_name(d.objective),
                opt(d.baseline, "infeasible"),
                opt(d.scenario, "infeasible"),
                d.percent().map_or_else(|| "-".into(), |p| format!("{p:+.2}%")),
            ]
        })
        .collect();
    table(&mut out, &["objective", "baseline", "scenario", "delta"], &rows);
    out
}

/// `objective,baseline,scenario,delta_pct`, empty fields where a solve failed.
pub fn deltas_csv(deltas: &[Delta]) -> String {
    let mut out = String::from("objective,baseline,scenario,delta_pct\n");
    for d in deltas {
        let f = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        let _ = writeln!(out, "{},{},{},{}", d.objective.label(), f(d.baseline), f(d.scenario), f(d.percent()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_trimmed() {
        assert_eq!(num(4.0), "4");
        assert_eq!(num(0.7240000001), "0.724");
        assert_eq!(num(-1e-9), "0");
        assert_eq!(num(2396.06449), "2396.06449");
    }

    #[test]
    fn delta_percent() {
        let d = Delta { objective: ObjectiveKind::Cost, baseline: Some(200.0), scenario: Some(210.0) };
        assert_eq!(d.percent(), Some(5.0));
        assert_eq!(Delta { scenario: None, ..d }.percent(), None);
        assert_eq!(Delta { baseline: Some(0.0), scenario: Some(0.0), ..d }.percent(), Some(0.0));
    }
}
