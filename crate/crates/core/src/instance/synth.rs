use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{
    Arc, CapacityLevel, Co2Ops, FacilityKind, Instance, LevelCap, Node, NodeKind, Technology, Thresholds, Vehicle,
    WasteType, DEFAULT_EPS_CONSTANT,
};

/// Sizes for [`synth_instance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthDims {
    pub n_gen: usize,
    pub n_rec: usize,
    pub n_treat: usize,
    pub n_disp: usize,
    pub n_waste: usize,
    pub n_vehicles: usize,
    pub n_levels: usize,
}

impl SynthDims {
    /// One of everything.
    pub fn unit() -> Self {
        Self { n_gen: 1, n_rec: 1, n_treat: 1, n_disp: 1, n_waste: 1, n_vehicles: 1, n_levels: 1 }
    }

    /// Small enough for exhaustive enumeration.
    pub fn is_oracle_tractable(&self) -> bool {
        self.n_gen <= 4
            && self.n_rec <= 2
            && self.n_treat <= 2
            && self.n_disp <= 2
            && self.n_waste <= 2
            && self.n_vehicles <= 3
            && self.n_levels <= 3
    }
}

/// Dimensions of corpus member `seed`: 2 to 4 generation nodes, 1 or 2
/// sites per facility kind and waste types, 1 to 3 vehicles, 1 or 2
/// capacity levels, cycled so that every combination of small and large
/// settings shows up within the first few dozen seeds.
pub fn corpus_dims(seed: u64) -> SynthDims {
    let s = seed as usize;
    SynthDims {
        n_gen: 2 + s % 3,
        n_rec: 1 + (s / 2) % 2,
        n_treat: 1 + (s / 4) % 2,
        n_disp: 1 + (s / 8) % 2,
        n_waste: 1 + s % 2,
        n_vehicles: 1 + (s / 3) % 3,
        n_levels: 1 + (s / 5) % 2,
    }
}

/// The oracle-tractable corpus: [`synth_instance`] at [`corpus_dims`] for
/// seeds `0..n`.
pub fn seeded_corpus(n: u64) -> Vec<Instance> {
    (0..n).map(|seed| synth_instance(seed, &corpus_dims(seed)).expect("corpus dimensions are positive")).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthError {
    #[error("dimension `{0}` must be at least 1")]
    ZeroDim(&'static str),
}

const TECHS: [&str; 2] = ["incineration", "chemical"];

fn round_to(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    round_to(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt(), 1)
}

/// Deterministic random instance on planar points.
///
/// Vehicle capacities and distance limits are sized so that splitting each
/// waste type's nodes into consecutive runs of a nearest-neighbour order
/// always yields routes within both limits; facility levels are sized so a
/// single top-level facility can take the whole demand.
pub fn synth_instance(seed: u64, dims: &SynthDims) -> Result<Instance, SynthError> {
    for (name, v) in [
        ("n_gen", dims.n_gen),
        ("n_rec", dims.n_rec),
        ("n_treat", dims.n_treat),
        ("n_disp", dims.n_disp),
        ("n_waste", dims.n_waste),
        ("n_vehicles", dims.n_vehicles),
        ("n_levels", dims.n_levels),
    ] {
        if v == 0 {
            return Err(SynthError::ZeroDim(name));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| [round_to(rng.random_range(0.0..100.0), 1), round_to(rng.random_range(0.0..100.0), 1)];

    let mut nodes = vec![Node { id: "F1".into(), kind: NodeKind::Depot, district: None, position: Some([50.0, 50.0]), provenance: None }];
    let add = |nodes: &mut Vec<Node>, prefix: &str, count: usize, kind: NodeKind, rng: &mut ChaCha8Rng| {
        for i in 1..=count {
            nodes.push(Node { id: format!("{prefix}{i}"), kind, district: None, position: Some(point(rng)), provenance: None });
        }
    };
    add(&mut nodes, "G", dims.n_gen, NodeKind::Generation, &mut rng);
    add(&mut nodes, "R", dims.n_rec, NodeKind::RecyclingCandidate, &mut rng);
    add(&mut nodes, "T", dims.n_treat, NodeKind::TreatmentCandidate, &mut rng);
    add(&mut nodes, "D", dims.n_disp, NodeKind::DisposalCandidate, &mut rng);

    // Existing sites: never the only treatment node, so both technologies stay reachable.
    let mut existing_tech = None;
    for (prefix, existing, count) in [
        ("R", NodeKind::RecyclingExisting, dims.n_rec),
        ("T", NodeKind::TreatmentExisting, dims.n_treat),
        ("D", NodeKind::DisposalExisting, dims.n_disp),
    ] {
        let allowed = prefix != "T" || count >= 2;
        if allowed && rng.random_bool(0.25) {
            let id = format!("{prefix}1");
            nodes.iter_mut().find(|n| n.id == id).expect("first site exists").kind = existing;
            if prefix == "T" {
                existing_tech = Some(TECHS[rng.random_range(0..2)]);
            }
        }
    }
    let technologies = TECHS
        .iter()
        .map(|&q| Technology {
            id: q.into(),
            available_at: if existing_tech == Some(q) { vec!["T1".into()] } else { Vec::new() },
        })
        .collect();

    let gens: Vec<String> = (1..=dims.n_gen).map(|i| format!("G{i}")).collect();
    let mut waste_types = Vec::new();
    for w in 0..dims.n_waste {
        let recyclable_only = w > 0 && rng.random_bool(0.35);
        let compat: Vec<u8> = if recyclable_only {
            vec![0, 0]
        } else if dims.n_treat == 1 {
            // A single site hosts a single technology, so every treatable type shares incineration.
            vec![1, u8::from(rng.random_bool(0.5))]
        } else {
            match rng.random_range(0..3) {
                0 => vec![1, 0],
                1 => vec![0, 1],
                _ => vec![1, 1],
            }
        };
        let mut demand = BTreeMap::new();
        for g in &gens {
            if rng.random_bool(0.8) {
                demand.insert(g.clone(), rng.random_range(1..=10) as f64);
            }
        }
        waste_types.push(WasteType {
            id: format!("W{}", w + 1),
            demand,
            tech_compat: TECHS.iter().zip(&compat).map(|(q, &c)| (q.to_string(), c)).collect(),
            recyclable_fraction_after_tech: [
                ("incineration".to_string(), round_to(rng.random_range(0.0..0.05), 2)),
                ("chemical".to_string(), round_to(rng.random_range(0.2..0.4), 2)),
            ]
            .into(),
            mass_reduction: [
                ("incineration".to_string(), round_to(rng.random_range(0.7..0.9), 2)),
                ("chemical".to_string(), round_to(rng.random_range(0.1..0.3), 2)),
            ]
            .into(),
            risk_potential: [0.05, 0.1, 0.2][rng.random_range(0..3)],
            source_share: None,
            provenance: None,
        });
    }
    // Waste types without a vehicle carry no demand.
    for (w, wt) in waste_types.iter_mut().enumerate() {
        if w >= dims.n_vehicles {
            wt.demand.clear();
        }
    }
    let total: f64 = waste_types.iter().map(WasteType::total_demand).sum();

    let pos: BTreeMap<String, [f64; 2]> = nodes.iter().map(|n| (n.id.clone(), n.position.expect("placed"))).collect();
    let mut arcs = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let d = dist(pos[&a.id], pos[&b.id]);
            let residue = matches!(
                (a.kind.facility(), b.kind.facility()),
                (Some(FacilityKind::Treatment), Some(FacilityKind::Recycling | FacilityKind::Disposal))
                    | (Some(FacilityKind::Recycling), Some(FacilityKind::Disposal))
            ) || matches!(
                (b.kind.facility(), a.kind.facility()),
                (Some(FacilityKind::Treatment), Some(FacilityKind::Recycling | FacilityKind::Disposal))
                    | (Some(FacilityKind::Recycling), Some(FacilityKind::Disposal))
            );
            let (risk, co2) = if residue {
                (round_to(rng.random_range(1e-3..5e-3) * d.max(1.0), 6), round_to(rng.random_range(0.1..0.3), 3))
            } else {
                (0.0, 0.0)
            };
            let risk_cap = (residue && rng.random_bool(0.2)).then(|| round_to(risk * total * rng.random_range(0.3..1.5), 6));
            arcs.push(Arc {
                from: a.id.clone(),
                to: b.id.clone(),
                distance: d,
                vehicle_distance: BTreeMap::new(),
                unit_cost: round_to(0.01 * d, 4),
                transport_risk: risk,
                risk_cap,
                co2_transport: co2,
                directed: false,
                provenance: None,
            });
        }
    }

    let mut vehicles = Vec::new();
    for k in 0..dims.n_vehicles {
        let w = k % dims.n_waste;
        let wt = &waste_types[w];
        let n_w = (0..dims.n_vehicles).filter(|j| j % dims.n_waste == w).count() as f64;
        let d_max = wt.demand.values().copied().fold(0.0, f64::max);
        let capacity = if wt.total_demand() > 0.0 {
            (wt.total_demand() / n_w + d_max).ceil() * round_to(rng.random_range(1.0..1.3), 2)
        } else {
            10.0
        };
        let terminals: Vec<&Node> = if wt.is_recyclable_only() {
            nodes.iter().filter(|n| n.kind.facility() == Some(FacilityKind::Recycling)).collect()
        } else {
            nodes.iter().filter(|n| n.kind.facility() == Some(FacilityKind::Treatment)).collect()
        };
        let served: Vec<&String> = wt.demand.keys().collect();
        let max_distance = route_length_bound(&pos, "F1", &served, &terminals) * round_to(rng.random_range(1.0..1.5), 2);
        vehicles.push(Vehicle {
            id: format!("K{}", k + 1),
            waste_compat: waste_types.iter().map(|x| (x.id.clone(), u8::from(x.id == wt.id))).collect(),
            capacity: round_to(capacity, 1),
            max_distance: round_to(max_distance.max(1.0).ceil(), 0),
            provenance: None,
        });
    }

    let top = (total * 1.1).ceil().max(1.0);
    let h_n = dims.n_levels as f64;
    let facility_base: BTreeMap<String, (f64, f64)> = nodes
        .iter()
        .filter(|n| n.kind.facility().is_some())
        .map(|n| (n.id.clone(), (rng.random_range(50..=150) as f64, round_to(rng.random_range(0.01..0.05), 4))))
        .collect();
    let level_cap = |base: (f64, f64), h: usize, tech_factor: f64| LevelCap {
        max: (top * (h as f64 + 1.0) / h_n).ceil(),
        invest_cost: round_to(base.0 * (1.0 + 0.6 * h as f64) * tech_factor, 1),
        op_risk: round_to(base.1 * (1.0 + 0.2 * h as f64) * tech_factor, 4),
    };
    let mut capacity_levels = Vec::new();
    for h in 0..dims.n_levels {
        let mut level = CapacityLevel {
            level: format!("L{}", h + 1),
            treatment: BTreeMap::new(),
            recycling: BTreeMap::new(),
            disposal: BTreeMap::new(),
            provenance: None,
        };
        for n in &nodes {
            let base = match facility_base.get(&n.id) {
                Some(&b) => b,
                None => continue,
            };
            match n.kind {
                NodeKind::RecyclingCandidate | NodeKind::RecyclingExisting => {
                    level.recycling.insert(n.id.clone(), level_cap(base, h, 1.0));
                }
                NodeKind::DisposalCandidate | NodeKind::DisposalExisting => {
                    level.disposal.insert(n.id.clone(), level_cap(base, h, 1.0));
                }
                NodeKind::TreatmentCandidate => {
                    let caps = [("incineration", 1.2), ("chemical", 0.9)]
                        .iter()
                        .map(|&(q, f)| (q.to_string(), level_cap(base, h, f)))
                        .collect();
                    level.treatment.insert(n.id.clone(), caps);
                }
                NodeKind::TreatmentExisting => {
                    let q = existing_tech.expect("existing site has a technology");
                    level.treatment.insert(n.id.clone(), [(q.to_string(), level_cap(base, h, 1.0))].into());
                }
                _ => {}
            }
        }
        capacity_levels.push(level);
    }

    let mut thresholds = Thresholds::default();
    for n in &nodes {
        match n.kind {
            NodeKind::TreatmentCandidate if rng.random_bool(0.5) => {
                thresholds.treatment.insert(n.id.clone(), TECHS.iter().map(|q| (q.to_string(), 1.0)).collect());
            }
            NodeKind::RecyclingCandidate if rng.random_bool(0.5) => {
                thresholds.recycling.insert(n.id.clone(), 1.0);
            }
            NodeKind::DisposalCandidate if rng.random_bool(0.5) => {
                thresholds.disposal.insert(n.id.clone(), 0.01);
            }
            _ => {}
        }
    }

    let mut recycling_ratio = BTreeMap::new();
    let mut co2_ops = Co2Ops::default();
    for n in &nodes {
        match n.kind.facility() {
            Some(FacilityKind::Recycling) => {
                recycling_ratio.insert(n.id.clone(), round_to(rng.random_range(0.9..0.99), 2));
                co2_ops.recycling.insert(n.id.clone(), rng.random_range(350..=450) as f64);
            }
            Some(FacilityKind::Disposal) => {
                co2_ops.disposal.insert(n.id.clone(), rng.random_range(250..=300) as f64);
            }
            _ => {}
        }
    }
    let treat_nodes: Vec<&Node> = nodes.iter().filter(|n| n.kind.facility() == Some(FacilityKind::Treatment)).collect();
    let qt_base: BTreeMap<(&str, &str), f64> = treat_nodes
        .iter()
        .flat_map(|n| TECHS.iter().map(move |&q| (n.id.as_str(), q)))
        .map(|key| {
            let v = if key.1 == "incineration" { rng.random_range(900..=1050) } else { rng.random_range(250..=320) };
            (key, v as f64)
        })
        .collect();
    for w in &waste_types {
        let mut per_tech = BTreeMap::new();
        for &q in &TECHS {
            if !w.compatible_with(q) {
                continue;
            }
            let per_node: BTreeMap<String, f64> =
                treat_nodes.iter().map(|n| (n.id.clone(), qt_base[&(n.id.as_str(), q)])).collect();
            per_tech.insert(q.to_string(), per_node);
        }
        if !per_tech.is_empty() {
            co2_ops.treatment.insert(w.id.clone(), per_tech);
        }
    }

    Ok(Instance {
        name: format!("synth-{seed}"),
        eps_constant: DEFAULT_EPS_CONSTANT,
        risk_mode: Default::default(),
        nodes,
        technologies,
        waste_types,
        vehicles,
        capacity_levels,
        thresholds,
        arcs,
        recycling_ratio,
        co2_ops,
        districts: Vec::new(),
        reference: None,
    })
}

/// Length of a nearest-neighbour path from `depot` through `served`, plus
/// the worst detour from any served node to a terminal and back.
fn route_length_bound(pos: &BTreeMap<String, [f64; 2]>, depot: &str, served: &[&String], terminals: &[&Node]) -> f64 {
    let mut left: Vec<&String> = served.to_vec();
    let mut cur = pos[depot];
    let mut len = 0.0;
    while !left.is_empty() {
        let (i, d) = left
            .iter()
            .enumerate()
            .map(|(i, g)| (i, dist(cur, pos[*g])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        len += d;
        cur = pos[left.remove(i)];
    }
    let tail = served
        .iter()
        .flat_map(|g| terminals.iter().map(move |t| (g, t)))
        .map(|(g, t)| dist(pos[*g], pos[&t.id]) + dist(pos[&t.id], pos[depot]))
        .fold(0.0, f64::max);
    len + tail
}
