use hwlrp::formulation::{ObjectiveKind, Objectives};
use hwlrp::instance::{corpus_dims, parse_instance, synth_instance, Instance, SynthDims};
use hwlrp::moo::{
    build_augmented_model, epsilon_grid, front_csv, nondominated_filter, pareto_front, pareto_params, payoff_table,
    points_csv, solve_cell, sweep, MooError, ParetoFront, Scalarization, SweepConfig,
};
use hwlrp::oracle::{oracle_optimum, oracle_pareto};
use hwlrp::solver::{SolveParams, SolveStatus};
use proptest::prelude::*;

const MINIMAL: &str = include_str!("../../../data/minimal.json");

fn params() -> SolveParams {
    pareto_params(&SolveParams::default())
}

/// One recycler and one disposal site: each configuration fixes every flow.
fn point_polytope(seed: u64) -> Instance {
    synth_instance(seed, &SynthDims { n_rec: 1, n_disp: 1, ..corpus_dims(seed) }).unwrap()
}

fn close(a: &[f64; 3], b: &[f64; 3]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-6 * x.abs().max(y.abs()).max(1.0))
}

fn weakly_dominates(q: &[f64; 3], p: &[f64; 3]) -> bool {
    q.iter().zip(p).all(|(a, b)| a <= b)
}

fn front(inst: &Instance, n: usize) -> ParetoFront {
    pareto_front(inst, n, &params()).unwrap()
}

#[test]
fn payoff_diagonal_is_the_oracle_optimum() {
    for seed in [1, 4, 13] {
        let inst = point_polytope(seed);
        let table = payoff_table(&inst, &params()).unwrap();
        assert!(table.proven);
        for obj in ObjectiveKind::ALL {
            let (exact, _) = oracle_optimum(&inst, obj).unwrap();
            let b = table.best[obj.index()];
            assert!((b - exact).abs() <= 1e-6 * exact.abs().max(1.0), "seed {seed} {obj}: {b} vs {exact}");
            assert!(table.worst[obj.index()] >= b);
            assert!(table.ranges[obj.index()] > 0.0);
        }
    }
}

#[test]
fn loosest_cell_returns_the_cost_optimum() {
    let inst = point_polytope(4);
    let table = payoff_table(&inst, &params()).unwrap();
    let scal = Scalarization::default();
    let eps = [table.worst[1], table.worst[2]];
    let (cell, sol) = solve_cell(&inst, scal, eps, [table.ranges[1], table.ranges[2]], &params()).unwrap();
    assert_eq!(cell.status, SolveStatus::Optimal);
    let f1 = sol.unwrap().objectives.cost;
    assert!((f1 - table.best[0]).abs() <= 1e-6 * f1.abs().max(1.0));
}

#[test]
fn bound_below_the_best_value_is_infeasible() {
    let inst = point_polytope(4);
    let table = payoff_table(&inst, &params()).unwrap();
    let eps = [table.best[1] - 0.01 * table.ranges[1], table.worst[2]];
    let (cell, sol) = solve_cell(&inst, Scalarization::default(), eps, [table.ranges[1], table.ranges[2]], &params()).unwrap();
    assert_eq!(cell.status, SolveStatus::Infeasible);
    assert!(sol.is_none() && cell.objectives.is_none());
}

#[test]
fn augmented_model_names_and_guards() {
    let inst = point_polytope(1);
    let (model, _, slacks) = build_augmented_model(&inst, Scalarization::default(), [1.0, 1.0], [1.0, 1.0]).unwrap();
    assert_eq!(model.var(slacks.0[0]).name, "s2");
    assert_eq!(model.var(slacks.0[1]).name, "s3");
    let names: Vec<_> = model.constraints().iter().map(|c| c.name.as_str()).collect();
    assert!(names.contains(&"eq42_eps_risk") && names.contains(&"eq43_eps_emissions"));

    let risk_first = Scalarization { primary: ObjectiveKind::Risk };
    let (model, _, slacks) = build_augmented_model(&inst, risk_first, [1.0, 1.0], [1.0, 1.0]).unwrap();
    assert_eq!(model.var(slacks.0[0]).name, "s1");
    assert!(model.constraints().iter().any(|c| c.name == "eq42_eps_cost"));

    assert!(matches!(
        build_augmented_model(&inst, Scalarization::default(), [1.0, 1.0], [0.0, 1.0]),
        Err(MooError::NonPositiveRange { .. })
    ));
    let mut bad = inst.clone();
    bad.eps_constant = 0.1;
    assert!(matches!(build_augmented_model(&bad, Scalarization::default(), [1.0, 1.0], [1.0, 1.0]), Err(MooError::EpsConstant(_))));
}

#[test]
fn grid_spans_the_payoff_range() {
    let table = payoff_table(&point_polytope(1), &params()).unwrap();
    let grid = epsilon_grid(&table, Scalarization::default(), 3).unwrap();
    assert_eq!(grid.len(), 9);
    assert_eq!(grid[0], [table.best[1], table.best[2]]);
    assert_eq!(grid[8], [table.worst[1], table.worst[2]]);
    assert_eq!(grid[1][0], grid[0][0]);
    assert!(matches!(epsilon_grid(&table, Scalarization::default(), 1), Err(MooError::Grid(1))));
}

#[test]
fn single_solution_instance_has_one_point() {
    let inst = parse_instance(MINIMAL).unwrap();
    let f = front(&inst, 3);
    assert_eq!(f.points.len(), 1);
    assert_eq!(f.cells.len(), 9);
}

#[test]
fn front_is_contained_in_the_oracle_set() {
    for seed in [1, 3, 4, 10, 13] {
        let inst = point_polytope(seed);
        let exact: Vec<[f64; 3]> = oracle_pareto(&inst).unwrap().iter().map(Objectives::as_array).collect();
        let f = front(&inst, 5);
        assert!(!f.points.is_empty());
        for p in &f.points {
            let v = p.objectives.as_array();
            assert!(exact.iter().any(|q| close(q, &v)), "seed {seed}: {v:?} not in {exact:?}");
        }
    }
}

#[test]
fn front_is_nondominated_and_self_consistent() {
    let inst = point_polytope(5);
    let f = front(&inst, 5);
    let vectors: Vec<[f64; 3]> = f.points.iter().map(|p| p.objectives.as_array()).collect();
    assert_eq!(nondominated_filter(&vectors), vectors);
    for (i, p) in vectors.iter().enumerate() {
        for (j, q) in vectors.iter().enumerate() {
            assert!(i == j || !weakly_dominates(q, p), "{q:?} weakly dominates {p:?}");
        }
    }
    let ranges = [f.payoff.ranges[1], f.payoff.ranges[2]];
    for p in &f.points {
        let v = p.objectives.as_array();
        let (cell, sol) = solve_cell(&inst, Scalarization::default(), [v[1], v[2]], ranges, &params()).unwrap();
        assert_eq!(cell.status, SolveStatus::Optimal);
        let again = sol.unwrap().objectives.as_array();
        let tol = |x: f64| 1e-6 * x.abs().max(1.0);
        assert!((0..3).all(|k| again[k] <= v[k] + tol(v[k])), "{again:?} vs {v:?}");
    }
}

#[test]
fn finer_grid_keeps_coarse_points() {
    let inst = point_polytope(4);
    let exact: Vec<[f64; 3]> = oracle_pareto(&inst).unwrap().iter().map(Objectives::as_array).collect();
    let coarse = front(&inst, 3);
    let fine: Vec<[f64; 3]> = front(&inst, 6).points.iter().map(|p| p.objectives.as_array()).collect();
    for p in &coarse.points {
        let v = p.objectives.as_array();
        assert!(exact.iter().any(|q| close(q, &v)));
        assert!(!fine.iter().any(|q| weakly_dominates(q, &v) && !close(q, &v)), "{v:?} dominated by the finer grid");
    }
}

#[test]
fn sweep_is_deterministic_and_serializes_every_cell() {
    let inst = point_polytope(3);
    let cfg = SweepConfig { grid: 3, ..SweepConfig::default() };
    let a = sweep(&inst, &cfg).unwrap();
    let b = sweep(&inst, &cfg).unwrap();
    assert_eq!(a, b);
    let csv = front_csv(&a, cfg.scalarization);
    assert_eq!(csv, front_csv(&b, cfg.scalarization));
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "eps_f2,eps_f3,f1,f2,f3,status");
    assert_eq!(lines.len(), 10);
    assert_eq!(points_csv(&a).lines().count(), a.points.len() + 1);

    let risk_first = SweepConfig { scalarization: Scalarization { primary: ObjectiveKind::Risk }, ..cfg };
    let r = sweep(&inst, &risk_first).unwrap();
    assert!(front_csv(&r, risk_first.scalarization).starts_with("eps_f1,eps_f3,"));
}

#[test]
fn filter_examples() {
    assert_eq!(nondominated_filter(&[[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [2.0, 2.0, 0.0]]), vec![[1.0, 2.0, 0.0], [2.0, 1.0, 0.0]]);
    assert_eq!(nondominated_filter(&[[1.0, 1.0, 1.0], [1.0, 1.0, 1.0]]), vec![[1.0, 1.0, 1.0]]);
    assert!(nondominated_filter(&[]).is_empty());
}

fn scan(points: &[[f64; 3]]) -> Vec<[f64; 3]> {
    let mut out: Vec<[f64; 3]> = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let mut keep = true;
        for (j, q) in points.iter().enumerate() {
            let le = q[0] <= p[0] && q[1] <= p[1] && q[2] <= p[2];
            let lt = q[0] < p[0] || q[1] < p[1] || q[2] < p[2];
            if (le && lt) || (j < i && q == p) {
                keep = false;
            }
        }
        if keep {
            out.push(*p);
        }
    }
    out
}

proptest! {
    #[test]
    fn filter_matches_quadratic_scan(points in prop::collection::vec(prop::array::uniform3(0u8..6), 0..40)) {
        let points: Vec<[f64; 3]> = points.iter().map(|p| p.map(f64::from)).collect();
        let kept = nondominated_filter(&points);
        prop_assert_eq!(&kept, &scan(&points));
        prop_assert_eq!(nondominated_filter(&kept), kept);
    }
}
