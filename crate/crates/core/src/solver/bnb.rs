//! Best-bound branch-and-bound over the simplex engine.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::rc::Rc;
use std::time::Instant;

use crate::milp::{evaluate, Assignment, LinearModel};
use crate::scalar::Scalar;

use super::simplex::{run_cold, run_warm, LpRun, LpStatus, Snapshot, StandardForm, Tableau, Tolerances};
use super::{NodeSelection, SolveParams, SolveResult, SolveStatus};

/// One line of the optional node trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEvent {
    pub id: u64,
    pub depth: u32,
    /// Global bound (model sense) when the node was processed.
    pub bound: f64,
    /// Incumbent objective (model sense), if any.
    pub incumbent: Option<f64>,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node id={} depth={} bound={}", self.id, self.depth, self.bound)?;
        match self.incumbent {
            Some(v) => write!(f, " incumbent={v}"),
            None => write!(f, " incumbent=-"),
        }
    }
}

/// Singly linked list of bound changes from a node back to the root.
struct Change<S> {
    var: usize,
    lower: S,
    upper: S,
    parent: Option<Rc<Change<S>>>,
}

struct Node<S> {
    id: u64,
    parent: u64,
    depth: u32,
    /// Parent LP value in minimization sense without offset.
    bound: S,
    changes: Option<Rc<Change<S>>>,
    basis: Option<Rc<Snapshot>>,
}

/// Heap order: smallest bound first, then the most recently created node.
struct Queued<S>(Node<S>);

impl<S: Scalar> PartialEq for Queued<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Queued<S> {}
impl<S: Scalar> PartialOrd for Queued<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Queued<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .bound
            .partial_cmp(&self.0.bound)
            .unwrap_or(Ordering::Equal)
            .then(self.0.id.cmp(&other.0.id))
    }
}

/// Solves `model` to the relative gap in `params`.
pub fn solve_milp<S: Scalar>(model: &LinearModel<S>, params: &SolveParams) -> SolveResult<S> {
    solve_milp_traced(model, params, &mut |_| {})
}

/// [`solve_milp`] with a callback invoked once per processed node.
pub fn solve_milp_traced<S: Scalar>(
    model: &LinearModel<S>,
    params: &SolveParams,
    trace: &mut dyn FnMut(&TraceEvent),
) -> SolveResult<S> {
    if let Err(e) = params.validate() {
        let mut r = SolveResult::empty(SolveStatus::LimitReached);
        r.diagnostics = Some(e.to_string());
        return r;
    }
    Search::new(model, params).run(trace)
}

struct Search<'a, S: Scalar> {
    model: &'a LinearModel<S>,
    params: &'a SolveParams,
    sf: StandardForm<S>,
    tol: Tolerances<S>,
    integer: Vec<bool>,
    root_lower: Vec<S>,
    root_upper: Vec<S>,
    incumbent: Option<(S, Vec<S>)>,
    /// Smallest bound among nodes discarded by the incumbent.
    pruned_bound: S,
    nodes: u64,
    iterations: u64,
    next_id: u64,
    last: Option<(u64, Tableau<S>)>,
    start: Instant,
}

impl<'a, S: Scalar> Search<'a, S> {
    fn new(model: &'a LinearModel<S>, params: &'a SolveParams) -> Self {
        let tol = Tolerances::new(params.feas_tol, params.opt_tol);
        let sf = StandardForm::from_model(model, tol.feas);
        let integer: Vec<bool> = model.vars().iter().map(|v| v.kind.is_integral()).collect();
        let mut root_lower = sf.lower.clone();
        let mut root_upper = sf.upper.clone();
        for j in 0..sf.n {
            if integer[j] {
                root_lower[j] = (root_lower[j] - tol.feas).ceil();
                root_upper[j] = (root_upper[j] + tol.feas).floor();
            }
        }
        Self {
            model,
            params,
            sf,
            tol,
            integer,
            root_lower,
            root_upper,
            incumbent: None,
            pruned_bound: S::infinity(),
            nodes: 0,
            iterations: 0,
            next_id: 0,
            last: None,
            start: Instant::now(),
        }
    }

    fn gap(&self, value: S) -> S {
        S::of(self.params.mip_rel_gap) * S::one().max((self.sf.report(value)).abs())
    }

    fn bounds_for(&self, changes: &Option<Rc<Change<S>>>) -> (Vec<S>, Vec<S>) {
        let mut lo = self.root_lower.clone();
        let mut up = self.root_upper.clone();
        let mut stack = Vec::new();
        let mut cur = changes.as_ref();
        while let Some(c) = cur {
            stack.push(c);
            cur = c.parent.as_ref();
        }
        for c in stack.into_iter().rev() {
            lo[c.var] = c.lower;
            up[c.var] = c.upper;
        }
        (lo, up)
    }

    fn solve_node(&mut self, node: &Node<S>, lo: &[S], up: &[S]) -> LpRun<S> {
        let warm = match self.last.take() {
            Some((id, tab)) if id == node.parent => Some(tab),
            _ => node
                .basis
                .as_ref()
                .and_then(|snap| Tableau::from_snapshot(&self.sf, lo, up, snap, self.tol)),
        };
        if let Some(tab) = warm {
            let run = run_warm(&self.sf, tab, lo, up);
            if run.status != LpStatus::Stalled {
                return run;
            }
            self.iterations += run.iterations as u64;
            log::debug!("warm start stalled at node {}; solving from scratch", node.id);
        }
        run_cold(&self.sf, lo, up, self.tol)
    }

    fn limit_hit(&self) -> Option<String> {
        if self.nodes >= self.params.node_limit {
            return Some(format!("node limit {} reached", self.params.node_limit));
        }
        if let Some(limit) = self.params.time_limit() {
            if self.start.elapsed() >= limit {
                return Some(format!("time limit {:.3}s reached", limit.as_secs_f64()));
            }
        }
        None
    }

    /// Most fractional integer variable of the highest priority class,
    /// lowest index on ties.
    fn branching_var(&self, x: &[S]) -> Option<usize> {
        let int_tol = S::of(self.params.int_tol);
        let vars = self.model.vars();
        let mut best: Option<(usize, S)> = None;
        for (j, &v) in x.iter().enumerate() {
            if !self.integer[j] {
                continue;
            }
            let f = v - v.floor();
            let dist = f.min(S::one() - f);
            if dist <= int_tol {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bd)) => vars[j].priority > vars[b].priority || (vars[j].priority == vars[b].priority && dist > bd),
            };
            if better {
                best = Some((j, dist));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Fixes integers at their rounded values and re-solves the continuous part.
    fn polish(&mut self, x: &[S], tab: Option<Tableau<S>>) -> Option<(S, Vec<S>)> {
        let mut lo = self.root_lower.clone();
        let mut up = self.root_upper.clone();
        for j in 0..self.sf.n {
            if self.integer[j] {
                let r = x[j].round();
                lo[j] = r;
                up[j] = r;
            }
        }
        let feas = S::of(self.params.feas_tol);
        let mut attempts: Vec<Option<Tableau<S>>> = if tab.is_some() { vec![tab, None] } else { vec![None] };
        for tab in attempts.drain(..) {
            let run = match tab {
                Some(t) => run_warm(&self.sf, t, &lo, &up),
                None => run_cold(&self.sf, &lo, &up, self.tol),
            };
            self.iterations += run.iterations as u64;
            if run.status != LpStatus::Optimal {
                continue;
            }
            let mut values = run.values;
            for j in 0..self.sf.n {
                if self.integer[j] {
                    values[j] = lo[j];
                }
            }
            let eval = evaluate(self.model, &Assignment::new(values.clone()), feas).ok()?;
            if eval.is_feasible() {
                let internal = (eval.objective - self.sf.offset) * self.sf.sign;
                return Some((internal, values));
            }
        }
        None
    }

    fn run(mut self, trace: &mut dyn FnMut(&TraceEvent)) -> SolveResult<S> {
        let mut heap = BinaryHeap::new();
        // Open nodes while diving; drained into `heap` at the first incumbent.
        let mut stack: Vec<Node<S>> = Vec::new();
        let diving = self.params.node_selection == NodeSelection::DiveThenBestBound;
        heap.push(Queued(Node {
            id: 0,
            parent: u64::MAX,
            depth: 0,
            bound: S::neg_infinity(),
            changes: None,
            basis: None,
        }));
        self.next_id = 1;
        let mut diagnostics = None;
        // Set when some part of the tree was not fully explored.
        let mut incomplete = false;
        let mut root_unbounded = false;

        loop {
            if self.incumbent.is_some() && !stack.is_empty() {
                heap.extend(stack.drain(..).map(Queued));
            }
            let Some(node) = stack.pop().or_else(|| heap.pop().map(|q| q.0)) else { break };
            if let Some((inc, _)) = &self.incumbent {
                if node.bound >= *inc - self.gap(*inc) {
                    self.pruned_bound = self.pruned_bound.min(node.bound);
                    // Everything left in the heap is at least as large.
                    for Queued(n) in heap.drain() {
                        self.pruned_bound = self.pruned_bound.min(n.bound);
                    }
                    break;
                }
            }
            if let Some(msg) = self.limit_hit() {
                heap.push(Queued(node));
                diagnostics = Some(msg);
                incomplete = true;
                break;
            }
            self.nodes += 1;
            let global = node.bound.min(self.pruned_bound);
            trace(&TraceEvent {
                id: node.id,
                depth: node.depth,
                bound: self.sf.report(global).to_f64_lossy(),
                incumbent: self.incumbent.as_ref().map(|(v, _)| self.sf.report(*v).to_f64_lossy()),
            });

            let (lo, up) = self.bounds_for(&node.changes);
            let run = self.solve_node(&node, &lo, &up);
            self.iterations += run.iterations as u64;
            match run.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => continue,
                LpStatus::Unbounded => {
                    if node.id == 0 {
                        root_unbounded = true;
                        break;
                    }
                    // A child of a bounded parent cannot be unbounded.
                    diagnostics = Some(format!("node {} reported an unbounded relaxation", node.id));
                    incomplete = true;
                    continue;
                }
                LpStatus::Stalled => {
                    diagnostics = Some(format!("LP at node {} stalled", node.id));
                    incomplete = true;
                    continue;
                }
            }
            let value = run.internal.max(node.bound);
            if let Some((inc, _)) = &self.incumbent {
                if value >= *inc - self.gap(*inc) {
                    self.pruned_bound = self.pruned_bound.min(value);
                    continue;
                }
            }
            let tab = run.tableau;
            match self.branching_var(&run.values) {
                None => {
                    if let Some((obj, vals)) = self.polish(&run.values, tab) {
                        let better = self.incumbent.as_ref().is_none_or(|(inc, _)| obj < *inc);
                        if better {
                            log::debug!("node {}: new incumbent {}", node.id, self.sf.report(obj));
                            self.incumbent = Some((obj, vals));
                        }
                    } else {
                        log::warn!("node {}: integral relaxation could not be polished", node.id);
                        diagnostics = Some(format!("integral point at node {} failed verification", node.id));
                    incomplete = true;
                    }
                }
                Some(j) => {
                    let tab = tab.expect("optimal run keeps its tableau");
                    let snap = Rc::new(tab.snapshot());
                    let v = run.values[j];
                    let down = Rc::new(Change { var: j, lower: lo[j], upper: v.floor(), parent: node.changes.clone() });
                    let upc = Rc::new(Change { var: j, lower: v.ceil(), upper: up[j], parent: node.changes.clone() });
                    // The up child gets the larger id, so it is explored first among equals.
                    for change in [down, upc] {
                        let child = Node {
                            id: self.next_id,
                            parent: node.id,
                            depth: node.depth + 1,
                            bound: value,
                            changes: Some(change),
                            basis: Some(snap.clone()),
                        };
                        if diving && self.incumbent.is_none() {
                            stack.push(child);
                        } else {
                            heap.push(Queued(child));
                        }
                        self.next_id += 1;
                    }
                    self.last = Some((node.id, tab));
                }
            }
        }

        heap.extend(stack.drain(..).map(Queued));
        if root_unbounded {
            let mut r = SolveResult::empty(SolveStatus::Unbounded);
            r.nodes = self.nodes;
            r.iterations = self.iterations;
            return r;
        }
        let open_bound = heap.iter().map(|q| q.0.bound).fold(S::infinity(), |a, b| a.min(b));
        let status = match (&self.incumbent, incomplete) {
            (_, true) => SolveStatus::LimitReached,
            (Some(_), false) => SolveStatus::Optimal,
            (None, false) => SolveStatus::Infeasible,
        };
        let mut r = SolveResult::empty(status);
        r.nodes = self.nodes;
        r.iterations = self.iterations;
        r.diagnostics = diagnostics;
        if let Some((inc, vals)) = self.incumbent {
            let bound = inc.min(self.pruned_bound).min(open_bound);
            r.objective = Some(self.sf.report(inc));
            r.bound = Some(self.sf.report(bound));
            r.assignment = Some(Assignment::new(vals));
        } else if status == SolveStatus::LimitReached && open_bound.is_finite() {
            r.bound = Some(self.sf.report(open_bound.min(self.pruned_bound)));
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{LinExpr, ObjSense, Sense, VarKind};

    #[test]
    fn binary_knapsack() {
        let mut m = LinearModel::<f64>::new("k");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_constraint("c", LinExpr::new().with(a, 1.0).with(b, 1.0), Sense::Le, 1.0).unwrap();
        m.set_objective(ObjSense::Maximize, LinExpr::new().with(a, 3.0).with(b, 2.0), 0.0).unwrap();
        let r = solve_milp(&m, &SolveParams::default());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert_eq!(r.objective, Some(3.0));
    }

    #[test]
    fn infeasible_pair() {
        let mut m = LinearModel::<f64>::new("k");
        let x = m.add_var("x", 0.0, 10.0, VarKind::Integer).unwrap();
        m.add_constraint("a", LinExpr::new().with(x, 1.0), Sense::Le, 0.0).unwrap();
        m.add_constraint("b", LinExpr::new().with(x, 1.0), Sense::Ge, 1.0).unwrap();
        assert_eq!(solve_milp(&m, &SolveParams::default()).status, SolveStatus::Infeasible);
    }

    #[test]
    fn integer_gap_requires_branching() {
        // max x + y s.t. 2x + 2y <= 3 with integers: LP 1.5, MILP 1.
        let mut m = LinearModel::<f64>::new("k");
        let x = m.add_var("x", 0.0, 5.0, VarKind::Integer).unwrap();
        let y = m.add_var("y", 0.0, 5.0, VarKind::Integer).unwrap();
        m.add_constraint("c", LinExpr::new().with(x, 2.0).with(y, 2.0), Sense::Le, 3.0).unwrap();
        m.set_objective(ObjSense::Maximize, LinExpr::new().with(x, 1.0).with(y, 1.0), 0.0).unwrap();
        let mut events = Vec::new();
        let r = solve_milp_traced(&m, &SolveParams::default(), &mut |e| events.push(e.clone()));
        assert_eq!(r.objective, Some(1.0));
        assert!(r.nodes >= 2);
        assert_eq!(events.len() as u64, r.nodes);
        assert!(events[0].to_string().starts_with("node id=0 depth=0"));
    }

    #[test]
    fn node_limit_keeps_incumbent_status() {
        let mut m = LinearModel::<f64>::new("k");
        let x = m.add_var("x", 0.0, 5.0, VarKind::Integer).unwrap();
        let y = m.add_var("y", 0.0, 5.0, VarKind::Integer).unwrap();
        m.add_constraint("c", LinExpr::new().with(x, 2.0).with(y, 2.0), Sense::Le, 3.0).unwrap();
        m.set_objective(ObjSense::Maximize, LinExpr::new().with(x, 1.0).with(y, 1.0), 0.0).unwrap();
        let p = SolveParams { node_limit: 1, ..SolveParams::default() };
        let r = solve_milp(&m, &p);
        assert_eq!(r.status, SolveStatus::LimitReached);
        assert!(r.diagnostics.unwrap().contains("node limit"));
    }
}
