mod support;

use approx::assert_relative_eq;
use hwlrp::formulation::{
    big_m, build_model, check_solution_feasible, evaluate_objectives, extract_solution, objective_expr, solve_instance,
    ExtractError, ObjectiveKind, Solution, VarKey,
};
use hwlrp::instance::{case_study_desk_instance, parse_instance, synth_instance, Instance, NodeKind, SynthDims};
use hwlrp::milp::{model_stats, Assignment, Sense};
use hwlrp::solver::{solve_lp, SolveParams, SolveStatus};
use proptest::prelude::*;
use support::fix_binaries;

const MINIMAL: &str = include_str!("../../../data/minimal.json");

fn minimal() -> Instance {
    parse_instance(MINIMAL).unwrap()
}

fn solve(inst: &Instance, obj: ObjectiveKind) -> (f64, Solution) {
    let solved = solve_instance(inst, obj, &SolveParams::default()).unwrap();
    assert_eq!(solved.result.status, SolveStatus::Optimal, "{}: {:?}", inst.name, solved.result.diagnostics);
    (solved.result.objective.unwrap(), solved.solution.unwrap())
}

fn small_dims(seed: u64) -> SynthDims {
    SynthDims {
        n_gen: 2 + (seed % 2) as usize,
        n_rec: 1,
        n_treat: 1 + (seed % 2) as usize,
        n_disp: 1,
        n_waste: 1,
        n_vehicles: 1 + (seed / 2 % 2) as usize,
        n_levels: 1 + (seed % 2) as usize,
    }
}

#[test]
fn big_m_is_the_largest_capacity() {
    let mut inst = minimal();
    assert_eq!(big_m(&inst), 10.0);
    let template = inst.vehicles[0].clone();
    inst.vehicles = [10.0, 8.0, 25.0]
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let mut k = template.clone();
            k.id = format!("K{}", i + 1);
            k.capacity = c;
            k
        })
        .collect();
    assert_eq!(big_m(&inst), 25.0);
    let desk = case_study_desk_instance();
    let largest = desk.vehicles.iter().map(|k| k.capacity).fold(0.0, f64::max);
    assert_eq!(big_m(&desk), largest);
}

#[test]
fn minimal_model_matches_hand_count() {
    let (model, cat) = build_model(&minimal(), ObjectiveKind::Cost).unwrap();
    let stats = model_stats(&model);
    // x: F1→G1, G1→T1, T1→F1; r, t, d: one level each.
    assert_eq!(stats.binary, 6);
    // xl, e×2, lo, xt, xth, xr, xrh, xd, xdh, k, z, v.
    assert_eq!(stats.continuous, 13);
    // Routing 13, treatment 7, recycling 6, disposal 5, balance 2.
    assert_eq!(stats.constraints(), 33);
    let fam = cat.family_counts();
    assert_eq!((fam["x"], fam["xl"], fam["e"], fam["lo"]), (3, 1, 2, 1));
    assert_eq!(cat.len(), model.num_vars());
    for (id, key) in cat.iter() {
        assert_eq!(model.var(id).name, key.to_string());
        assert_eq!(cat.get(key), Some(id));
    }
}

#[test]
fn existing_recycler_is_pinned_once() {
    let mut inst = minimal();
    inst.nodes.iter_mut().find(|n| n.id == "R1").unwrap().kind = NodeKind::RecyclingExisting;
    let (model, cat) = build_model(&inst, ObjectiveKind::Cost).unwrap();
    let pins: Vec<_> = model.constraints().iter().filter(|c| c.name.starts_with("eq32_existing_R1")).collect();
    assert_eq!(pins.len(), 1);
    let r = cat.get(&VarKey::R { node: "R1".into(), level: "L1".into() }).unwrap();
    assert_eq!((pins[0].sense, pins[0].rhs, pins[0].expr.coef(r)), (Sense::Eq, 1.0, 1.0));
}

#[test]
fn one_linearizer_per_unloading_arc() {
    for seed in 0..6 {
        let inst = synth_instance(seed, &SynthDims { n_waste: 2, n_vehicles: 3, ..small_dims(seed) }).unwrap();
        let (_, cat) = build_model(&inst, ObjectiveKind::Cost).unwrap();
        let facility = |id: &str| inst.node(id).unwrap().kind.facility().is_some();
        let gen = |id: &str| inst.node(id).unwrap().kind == NodeKind::Generation;
        let unloading = cat
            .iter()
            .filter(|(_, k)| matches!(k, VarKey::X { from, to, .. } if gen(from) && facility(to)))
            .count();
        assert_eq!(cat.family_counts().get("xl").copied().unwrap_or(0), unloading);
    }
}

#[test]
fn minimal_instance_optimum_matches_hand_values() {
    let inst = minimal();
    let (f1, sol) = solve(&inst, ObjectiveKind::Cost);
    // 4 t over G1→T1 at 0.05, T1 residue 0.8 t split 0.08 / 0.72, R1 sends
    // 5 % on, and all three candidates open.
    let expected = 4.0 * 0.05 + 0.08 * 0.1 + 0.72 * 0.063 + 0.004 * 0.082 + 120.0 + 80.0 + 60.0;
    assert_relative_eq!(f1, expected, max_relative = 1e-9);
    assert_relative_eq!(sol.objectives.cost, expected, max_relative = 1e-9);
    assert_eq!(sol.routes.len(), 1);
    assert_eq!(sol.routes[0].stops, ["F1", "G1", "T1", "F1"]);
    assert_relative_eq!(sol.routes[0].length, 16.0);
    assert_relative_eq!(sol.disposed["D1"], 0.724, max_relative = 1e-9);
    assert!(check_solution_feasible(&inst, &sol).is_empty());
}

#[test]
fn model_objective_matches_domain_evaluation() {
    let mut solved = 0;
    for seed in 0..8 {
        let inst = synth_instance(seed, &small_dims(seed)).unwrap();
        let probe = solve_instance(&inst, ObjectiveKind::Cost, &SolveParams::default()).unwrap();
        if probe.result.status == SolveStatus::Infeasible {
            continue;
        }
        solved += 1;
        for obj in ObjectiveKind::ALL {
            let (value, sol) = solve(&inst, obj);
            assert_relative_eq!(value, sol.objectives.get(obj), max_relative = 1e-6, epsilon = 1e-9);
            assert_eq!(evaluate_objectives(&inst, &sol), sol.objectives);
            let v = check_solution_feasible(&inst, &sol);
            assert!(v.is_empty(), "seed {seed} {obj}: {v:?}");
        }
    }
    assert!(solved >= 4, "only {solved} feasible instances");
}

#[test]
fn zero_demand_gives_empty_plan() {
    let doc = MINIMAL.replace("\"G1\": 4.0", "\"G1\": 0.0");
    let mut inst = parse_instance(&doc).unwrap();
    inst.nodes.iter_mut().find(|n| n.id == "R1").unwrap().kind = NodeKind::RecyclingExisting;
    let (model, cat) = build_model(&inst, ObjectiveKind::Cost).unwrap();
    let sol = extract_solution(&inst, &cat, &Assignment::zeros(model.num_vars())).unwrap();
    assert!(sol.routes.is_empty());
    assert!(sol.treatment_to_disposal.is_empty() && sol.treatment_to_recycling.is_empty());

    let (f1, sol) = solve(&inst, ObjectiveKind::Cost);
    assert!(sol.routes.is_empty());
    // The existing recycler is open but carries no investment cost.
    assert_eq!(sol.openings.len(), 1);
    assert!(sol.openings[0].existing);
    assert_eq!((f1, sol.objectives.risk, sol.objectives.emissions), (0.0, 0.0, 0.0));
}

#[test]
fn two_cycle_is_a_reconstruction_error() {
    let inst = synth_instance(4, &SynthDims { n_gen: 3, ..SynthDims::unit() }).unwrap();
    let (model, cat) = build_model(&inst, ObjectiveKind::Cost).unwrap();
    let k = &inst.vehicles[0].id;
    let gens: Vec<&str> = inst.generation_nodes().map(|n| n.id.as_str()).collect();
    let (a, b) = gens
        .iter()
        .flat_map(|&a| gens.iter().map(move |&b| (a, b)))
        .find(|&(a, b)| cat.x(a, b, k).is_some() && cat.x(b, a, k).is_some())
        .expect("two generation nodes served by one vehicle");
    let mut asg = Assignment::zeros(model.num_vars());
    asg.set(cat.x(a, b, k).unwrap(), 1.0);
    asg.set(cat.x(b, a, k).unwrap(), 1.0);
    match extract_solution(&inst, &cat, &asg) {
        Err(ExtractError::Route { vehicle, .. }) => assert_eq!(&vehicle, k),
        other => panic!("{other:?}"),
    }
}

#[test]
fn route_one_km_too_long_is_reported() {
    let inst = minimal();
    let (_, sol) = solve(&inst, ObjectiveKind::Cost);
    let mut tight = inst.clone();
    tight.vehicles[0].max_distance = sol.routes[0].length - 1.0;
    let v = check_solution_feasible(&tight, &sol);
    assert_eq!(v.len(), 1, "{v:?}");
    assert_eq!(v[0].rule, "eq10-12");
}

#[test]
fn throughput_below_minimum_is_reported() {
    let inst = minimal();
    let (_, sol) = solve(&inst, ObjectiveKind::Cost);
    let mut strict = inst.clone();
    strict.thresholds.disposal.insert("D1".into(), 1.0);
    let v = check_solution_feasible(&strict, &sol);
    assert_eq!(v.iter().map(|x| x.rule.as_str()).collect::<Vec<_>>(), ["eq28"]);

    let mut strict = inst.clone();
    strict.thresholds.treatment.get_mut("T1").unwrap().insert("incineration".into(), 5.0);
    let v = check_solution_feasible(&strict, &sol);
    assert_eq!(v.iter().map(|x| x.rule.as_str()).collect::<Vec<_>>(), ["eq19"]);
}

#[test]
fn chemical_treatment_emits_280_kg_per_ton() {
    let mut inst = parse_instance(&MINIMAL.replace("incineration", "chemical")).unwrap();
    inst.waste_types[0].recyclable_fraction_after_tech.insert("chemical".into(), 0.0);
    *inst.co2_ops.treatment.get_mut("W1").unwrap().get_mut("chemical").unwrap().get_mut("T1").unwrap() = 280.0;
    let (_, sol) = solve(&inst, ObjectiveKind::Cost);
    assert!(sol.treatment_to_recycling.is_empty());
    let m = 4.0;
    let xd = m * (1.0 - 0.8);
    let qd = inst.co2_ops.disposal["D1"];
    let expected = 280.0 * m + qd * xd + 0.2 * 6.3 * xd;
    assert_relative_eq!(sol.objectives.emissions, expected, max_relative = 1e-9);
}

/// Fixes every binary of `model` to the bits of `pattern`.
#[test]
fn linearization_is_exact_on_every_integral_point_of_the_minimal_model() {
    let inst = minimal();
    let (model, cat) = build_model(&inst, ObjectiveKind::Cost).unwrap();
    let f1 = objective_expr(&inst, &cat, ObjectiveKind::Cost);
    let n_bin = model_stats(&model).binary;
    let mut feasible = 0;
    for pattern in 0..(1u64 << n_bin) {
        let fixed = fix_binaries(&model, pattern);
        for obj in ObjectiveKind::ALL {
            let mut m = fixed.clone();
            m.set_objective(hwlrp::milp::ObjSense::Minimize, objective_expr(&inst, &cat, obj), 0.0).unwrap();
            let r = solve_lp(&m, &SolveParams::default());
            if r.status != SolveStatus::Optimal {
                continue;
            }
            feasible += 1;
            let a = r.assignment.unwrap();
            for (id, key) in cat.iter() {
                if let VarKey::Xl { from, to, vehicle } = key {
                    let x = a.get(cat.x(from, to, vehicle).unwrap());
                    let lo = a.get(cat.lo(from, vehicle).unwrap());
                    assert!((a.get(id) - x * lo).abs() <= 1e-7, "pattern {pattern}: {key}");
                }
            }
            let sol = extract_solution(&inst, &cat, &a).unwrap();
            assert_relative_eq!(f1.dot(a.values()), sol.objectives.cost, max_relative = 1e-9, epsilon = 1e-9);
        }
    }
    assert!(feasible > 0);
}

fn scale_costs(inst: &mut Instance, lambda: f64) {
    for a in &mut inst.arcs {
        a.unit_cost *= lambda;
    }
    for l in &mut inst.capacity_levels {
        for c in l.treatment.values_mut().flat_map(|m| m.values_mut()).chain(l.recycling.values_mut()).chain(l.disposal.values_mut()) {
            c.invest_cost *= lambda;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cost_scaling_scales_the_optimum(seed in 0u64..500, lambda in 0.25f64..4.0) {
        let inst = synth_instance(seed, &small_dims(seed)).unwrap();
        let base = solve_instance(&inst, ObjectiveKind::Cost, &SolveParams::default()).unwrap();
        let mut scaled_inst = inst.clone();
        scale_costs(&mut scaled_inst, lambda);
        let scaled = solve_instance(&scaled_inst, ObjectiveKind::Cost, &SolveParams::default()).unwrap();
        prop_assert_eq!(base.result.status, scaled.result.status);
        if base.result.status == SolveStatus::Optimal {
            let (b, s) = (base.result.objective.unwrap(), scaled.result.objective.unwrap());
            prop_assert!((s - lambda * b).abs() <= 1e-6 * s.abs().max(1.0), "{} vs {}", s, lambda * b);
            // The scaled optimum is optimal for the original costs too.
            let back = evaluate_objectives(&inst, &scaled.solution.unwrap()).cost;
            prop_assert!((back - b).abs() <= 1e-6 * b.abs().max(1.0), "{} vs {}", back, b);
        }
    }

    #[test]
    fn more_demand_never_lowers_an_optimum(seed in 0u64..500, lambda in 1.0f64..1.1) {
        let mut inst = synth_instance(seed, &small_dims(seed)).unwrap();
        inst.thresholds = Default::default();
        let mut more = inst.clone();
        more.scale_demand(lambda);
        for obj in ObjectiveKind::ALL {
            let base = solve_instance(&inst, obj, &SolveParams::default()).unwrap().result;
            let Ok(grown) = solve_instance(&more, obj, &SolveParams::default()) else { continue };
            let grown = grown.result;
            if base.status != SolveStatus::Optimal || grown.status != SolveStatus::Optimal {
                continue;
            }
            let (b, g) = (base.objective.unwrap(), grown.objective.unwrap());
            prop_assert!(g >= b - 1e-6 * b.abs().max(1.0), "{}: {} < {}", obj, g, b);
        }
    }
}
