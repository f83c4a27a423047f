//! Augmented epsilon-constraint method: payoff table, epsilon grid,
//! scalarized models and Pareto-front assembly.
//!
//! One objective (cost by default) stays in the objective; the other two
//! become constraints `f + s = eps` with slacks `s >= 0` whose range-scaled
//! sum is rewarded by a small constant, so each scalarized optimum is
//! efficient rather than only weakly efficient.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formulation::{
    build_model, extract_solution, objective_expr, ExtractError, FormulationError, ObjectiveKind, Objectives, Solution,
    VarCatalog,
};
use crate::instance::Instance;
use crate::milp::{LinearModel, ModelError, ObjSense, Sense, VarId};
use crate::solver::{solve_milp, SolveParams, SolveStatus};

/// Allowed interval for the augmentation constant.
pub const EPS_CONSTANT_RANGE: (f64, f64) = (1e-6, 1e-3);
pub const DEFAULT_GRID: usize = 5;

#[derive(Debug, Error)]
pub enum MooError {
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("minimizing {0} is infeasible")]
    Infeasible(ObjectiveKind),
    #[error("minimizing {0} stopped at a limit without a feasible point")]
    NoIncumbent(ObjectiveKind),
    #[error("range of {which} is {value}; ranges must be positive")]
    NonPositiveRange { which: ObjectiveKind, value: f64 },
    #[error("augmentation constant {0} is outside [1e-6, 1e-3]")]
    EpsConstant(f64),
    #[error("grid needs at least 2 points per objective, got {0}")]
    Grid(usize),
}

/// Which objective stays in the objective function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scalarization {
    pub primary: ObjectiveKind,
}

impl Default for Scalarization {
    fn default() -> Self {
        Self { primary: ObjectiveKind::Cost }
    }
}

impl Scalarization {
    /// The two objectives moved into constraints, in f1, f2, f3 order.
    pub fn constrained(&self) -> [ObjectiveKind; 2] {
        let mut it = ObjectiveKind::ALL.into_iter().filter(|&k| k != self.primary);
        [it.next().expect("three objectives"), it.next().expect("three objectives")]
    }
}

/// Best and worst value of each objective over the single-objective optima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffTable {
    /// Indexed f1, f2, f3.
    pub best: [f64; 3],
    pub worst: [f64; 3],
    /// `worst - best`, with ranges within rounding of zero replaced by 1.
    pub ranges: [f64; 3],
    /// Row `i` holds f1, f2, f3 at the optimum of objective `i`.
    pub rows: [[f64; 3]; 3],
    /// Whether every single-objective solve proved optimality.
    pub proven: bool,
}

/// Relative spread below which two payoff values count as equal.
const TIE_TOL: f64 = 1e-9;

/// Minimizes each objective on its own and tabulates the results.
pub fn payoff_table(inst: &Instance, params: &SolveParams) -> Result<PayoffTable, MooError> {
    let mut rows = [[0.0; 3]; 3];
    let mut proven = true;
    for obj in ObjectiveKind::ALL {
        let (model, cat) = build_model(inst, obj)?;
        let r = solve_milp(&model, params);
        match (r.status, &r.assignment) {
            (SolveStatus::Infeasible, _) => return Err(MooError::Infeasible(obj)),
            (_, None) => return Err(MooError::NoIncumbent(obj)),
            (status, Some(a)) => {
                proven &= status == SolveStatus::Optimal;
                rows[obj.index()] = extract_solution(inst, &cat, a)?.objectives.as_array();
            }
        }
    }
    let mut table = PayoffTable { best: [0.0; 3], worst: [0.0; 3], ranges: [0.0; 3], rows, proven };
    for i in 0..3 {
        table.best[i] = rows[i][i];
        table.worst[i] = (0..3).filter(|&j| j != i).map(|j| rows[j][i]).fold(table.best[i], f64::max);
        let r = table.worst[i] - table.best[i];
        table.ranges[i] = if r > TIE_TOL * table.best[i].abs().max(1.0) {
            r
        } else {
            log::warn!("{} has the same value at every optimum; using range 1", ObjectiveKind::ALL[i]);
            1.0
        };
    }
    Ok(table)
}

/// Slack columns of an augmented model, in constrained-objective order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slacks(pub [VarId; 2]);

/// The model of `inst` with the constrained objectives bounded by `eps`
/// and the primary objective augmented by the scaled slacks.
pub fn build_augmented_model(
    inst: &Instance,
    scal: Scalarization,
    eps: [f64; 2],
    ranges: [f64; 2],
) -> Result<(LinearModel<f64>, VarCatalog, Slacks), MooError> {
    let constrained = scal.constrained();
    for (k, &r) in constrained.iter().zip(&ranges) {
        if !(r > 0.0 && r.is_finite()) {
            return Err(MooError::NonPositiveRange { which: *k, value: r });
        }
    }
    let c = inst.eps_constant;
    if !(EPS_CONSTANT_RANGE.0..=EPS_CONSTANT_RANGE.1).contains(&c) {
        return Err(MooError::EpsConstant(c));
    }
    let (mut model, cat) = build_model(inst, scal.primary)?;
    let mut objective = objective_expr(inst, &cat, scal.primary);
    let mut slacks = [VarId(0); 2];
    for (i, k) in constrained.iter().enumerate() {
        let s = model.add_nonneg(format!("s{}", k.index() + 1))?;
        slacks[i] = s;
        let mut row = objective_expr(inst, &cat, *k);
        row.add(s, 1.0);
        let tag = ["eq42", "eq43"][i];
        model.add_constraint(format!("{tag}_eps_{k}"), row, Sense::Eq, eps[i])?;
        objective.add(s, -c / ranges[i]);
    }
    model.set_objective(ObjSense::Minimize, objective, 0.0)?;
    Ok((model, cat, Slacks(slacks)))
}

/// `n` evenly spaced values per constrained objective between its best and
/// worst payoff value, combined into `n²` vectors. The first constrained
/// objective varies slowest.
pub fn epsilon_grid(table: &PayoffTable, scal: Scalarization, n: usize) -> Result<Vec<[f64; 2]>, MooError> {
    if n < 2 {
        return Err(MooError::Grid(n));
    }
    let axis = |k: ObjectiveKind| -> Vec<f64> {
        let (lo, hi) = (table.best[k.index()], table.worst[k.index()]);
        (0..n).map(|t| if t == n - 1 { hi } else { lo + (hi - lo) * t as f64 / (n - 1) as f64 }).collect()
    };
    let [a, b] = scal.constrained();
    let (xs, ys) = (axis(a), axis(b));
    Ok(xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).collect())
}

/// One scalarized solve of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub eps: [f64; 2],
    pub status: SolveStatus,
    /// Objectives of the returned point, if any.
    pub objectives: Option<Objectives>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub objectives: Objectives,
    pub eps: [f64; 2],
    /// `optimal`, or `limit-reached` for an unproven incumbent.
    pub status: SolveStatus,
    pub solution: Solution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub payoff: PayoffTable,
    /// Every grid cell in grid order.
    pub cells: Vec<GridCell>,
    /// Nondominated points sorted by f1, then f2, then f3.
    pub points: Vec<ParetoPoint>,
}

/// Options of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub grid: usize,
    pub scalarization: Scalarization,
    pub params: SolveParams,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self { grid: DEFAULT_GRID, scalarization: Scalarization::default(), params: pareto_params(&SolveParams::default()) }
    }
}

/// `p` with the optimality gap tightened so the augmentation term decides
/// between alternative optima.
pub fn pareto_params(p: &SolveParams) -> SolveParams {
    SolveParams { mip_rel_gap: p.mip_rel_gap.min(1e-9), ..p.clone() }
}

/// Solves one grid cell.
pub fn solve_cell(
    inst: &Instance,
    scal: Scalarization,
    eps: [f64; 2],
    ranges: [f64; 2],
    params: &SolveParams,
) -> Result<(GridCell, Option<Solution>), MooError> {
    let (model, cat, _) = build_augmented_model(inst, scal, eps, ranges)?;
    let r = solve_milp(&model, params);
    let solution = match &r.assignment {
        Some(a) => Some(extract_solution(inst, &cat, a)?),
        None => None,
    };
    let cell = GridCell { eps, status: r.status, objectives: solution.as_ref().map(|s| s.objectives) };
    Ok((cell, solution))
}

/// Pareto front of `inst` on an `n × n` epsilon grid with cost retained.
pub fn pareto_front(inst: &Instance, n: usize, params: &SolveParams) -> Result<ParetoFront, MooError> {
    sweep(inst, &SweepConfig { grid: n, scalarization: Scalarization::default(), params: params.clone() })
}

/// Runs the payoff table, every grid cell, and the nondominated filter.
pub fn sweep(inst: &Instance, cfg: &SweepConfig) -> Result<ParetoFront, MooError> {
    let payoff = payoff_table(inst, &cfg.params)?;
    let scal = cfg.scalarization;
    let [a, b] = scal.constrained();
    let ranges = [payoff.ranges[a.index()], payoff.ranges[b.index()]];
    let mut cells = Vec::new();
    let mut found = Vec::new();
    for eps in epsilon_grid(&payoff, scal, cfg.grid)? {
        let (cell, solution) = solve_cell(inst, scal, eps, ranges, &cfg.params)?;
        if cell.status == SolveStatus::LimitReached {
            log::warn!("grid cell {eps:?} stopped at a limit");
        }
        if let Some(solution) = solution {
            let v = solution.objectives.as_array();
            if found.iter().any(|p: &ParetoPoint| same_vector(&p.objectives.as_array(), &v)) {
                cells.push(cell);
                continue;
            }
            found.push(ParetoPoint { objectives: solution.objectives, eps, status: cell.status, solution });
        }
        cells.push(cell);
    }
    let vectors: Vec<[f64; 3]> = found.iter().map(|p| p.objectives.as_array()).collect();
    let keep = nondominated_indices(&vectors);
    let mut points: Vec<ParetoPoint> = keep.into_iter().map(|i| found[i].clone()).collect();
    points.sort_by(|p, q| p.objectives.as_array().partial_cmp(&q.objectives.as_array()).unwrap_or(std::cmp::Ordering::Equal));
    Ok(ParetoFront { payoff, cells, points })
}

/// Cells that land on the same solution can differ in the last bits of the
/// objective values; such points are merged.
const MERGE_TOL: f64 = 1e-9;

fn same_vector(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MERGE_TOL * x.abs().max(y.abs()).max(1.0))
}

fn dominates(q: &[f64; 3], p: &[f64; 3]) -> bool {
    q.iter().zip(p).all(|(a, b)| a <= b) && q.iter().zip(p).any(|(a, b)| a < b)
}

/// Indices of the points no other point dominates, in input order; of
/// several identical points only the first is kept.
pub fn nondominated_indices(points: &[[f64; 3]]) -> Vec<usize> {
    (0..points.len())
        .filter(|&i| {
            let p = &points[i];
            !points.iter().any(|q| dominates(q, p)) && !points[..i].contains(p)
        })
        .collect()
}

/// The points of `points` no other point dominates, in input order, with
/// exact duplicates reduced to one.
pub fn nondominated_filter(points: &[[f64; 3]]) -> Vec<[f64; 3]> {
    nondominated_indices(points).into_iter().map(|i| points[i]).collect()
}

/// The grid as a delimited table: `eps2,eps3,f1,f2,f3,status`, one row per
/// cell, with empty objective fields for cells without a point. The header
/// names the constrained objectives actually used.
pub fn front_csv(front: &ParetoFront, scal: Scalarization) -> String {
    let [a, b] = scal.constrained();
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [format!("eps_{}", a.label()), format!("eps_{}", b.label()), "f1".into(), "f2".into(), "f3".into(), "status".into()];
    w.write_record(&header).expect("in-memory write");
    for c in &front.cells {
        let obj = c.objectives.map(|o| o.as_array().map(|v| v.to_string())).unwrap_or_default();
        let row = [c.eps[0].to_string(), c.eps[1].to_string(), obj[0].clone(), obj[1].clone(), obj[2].clone(), c.status.to_string()];
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// The nondominated points as `f1,f2,f3` rows, ready for plotting.
pub fn points_csv(front: &ParetoFront) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["f1", "f2", "f3"]).expect("in-memory write");
    for p in &front.points {
        w.write_record(p.objectives.as_array().map(|v| v.to_string())).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_drops_dominated_point() {
        let pts = [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [2.0, 2.0, 0.0]];
        assert_eq!(nondominated_filter(&pts), vec![[1.0, 2.0, 0.0], [2.0, 1.0, 0.0]]);
    }

    #[test]
    fn filter_keeps_one_of_identical_points() {
        assert_eq!(nondominated_filter(&[[3.0, 3.0, 3.0]; 4]), vec![[3.0, 3.0, 3.0]]);
    }

    #[test]
    fn grid_of_two_is_the_corners() {
        let t = PayoffTable { best: [0.0, 1.0, 10.0], worst: [5.0, 2.0, 20.0], ranges: [5.0, 1.0, 10.0], rows: [[0.0; 3]; 3], proven: true };
        let g = epsilon_grid(&t, Scalarization::default(), 2).unwrap();
        assert_eq!(g, vec![[1.0, 10.0], [1.0, 20.0], [2.0, 10.0], [2.0, 20.0]]);
        let t = PayoffTable { best: [0.0; 3], worst: [10.0; 3], ranges: [10.0; 3], rows: [[0.0; 3]; 3], proven: true };
        let g = epsilon_grid(&t, Scalarization::default(), 3).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.iter().map(|e| e[1]).take(3).collect::<Vec<_>>(), vec![0.0, 5.0, 10.0]);
        assert!(epsilon_grid(&t, Scalarization::default(), 1).is_err());
    }

    #[test]
    fn constrained_objectives_follow_the_primary() {
        use ObjectiveKind::*;
        assert_eq!(Scalarization { primary: Cost }.constrained(), [Risk, Emissions]);
        assert_eq!(Scalarization { primary: Risk }.constrained(), [Cost, Emissions]);
    }
}
