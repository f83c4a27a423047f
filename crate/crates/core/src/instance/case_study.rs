//! Built-in case instance: six city districts, thirteen generation nodes,
//! four waste types and a twelve-truck fleet.
//!
//! Published values (waste fractions, establishment costs, district totals,
//! emission rates, risk rates, process ratios) are stored verbatim and
//! tagged `paper`. Positions, distances, the per-node demand split, fleet
//! sizing and capacity scale are generated deterministically and tagged
//! `synthetic`; per-ton risk and cost rates computed from published rates
//! are tagged `derived`.

use std::collections::BTreeMap;

use super::{
    Arc, CapacityLevel, Co2Ops, District, FacilityKind, Instance, LevelCap, Node, NodeKind, Provenance,
    ProvenanceNote, ReferenceData, SourceShare, Technology, Thresholds, Vehicle, WasteType, DEFAULT_EPS_CONSTANT,
};

/// Tons generated across all districts.
pub const CASE_STUDY_TOTAL_DEMAND: f64 = 47_513.0;

const DISTRICT_IDS: [&str; 6] = ["I", "II", "III", "IV", "V", "VI"];
const DISTRICT_NAMES: [&str; 6] = ["Central", "Laleabad", "Gatab", "Bandpey-ye Gharbi", "Babol Kenar", "Bandpey-ye Shargi"];
const DISTRICT_HW: [f64; 6] = [13_746.0, 8_190.0, 7_120.0, 8_961.0, 5_167.0, 4_329.0];
const DENSITY: [[f64; 2]; 6] = [[501.0, 700.0], [351.0, 500.0], [401.0, 600.0], [251.0, 400.0], [151.0, 250.0], [0.0, 200.0]];
const LEVELS: [&str; 3] = ["5", "10", "15"];
/// Establishment cost by level (rows) and district (columns).
const ESTABLISHMENT: [[f64; 6]; 3] = [
    [1572.0, 1275.0, 1463.0, 1098.0, 1137.0, 847.0],
    [1932.0, 1583.0, 1892.0, 1386.0, 1408.0, 1230.0],
    [2241.0, 1987.0, 2340.0, 1791.0, 1853.0, 1596.0],
];

const WASTE_IDS: [&str; 4] = ["I", "II", "III", "IV"];
const SHARE_INDUSTRIAL: [f64; 4] = [15.0, 13.0, 20.0, 5.0];
const SHARE_HEALTH: [f64; 4] = [10.0, 30.0, 15.0, 8.0];
const WASTE_RISK: [f64; 4] = [0.05, 0.2, 0.2, 0.2];
/// (incineration, chemical) compatibility per waste type.
const WASTE_COMPAT: [[u8; 2]; 4] = [[0, 0], [1, 0], [0, 1], [1, 1]];

const INCINERATION: &str = "incineration";
const CHEMICAL: &str = "chemical";
const MASS_REDUCTION: [f64; 2] = [0.80, 0.20];
const RECYCLABLE_AFTER: [f64; 2] = [0.0, 0.30];
const RECYCLING_RESIDUE: f64 = 0.05;
const TRANSPORT_COST_PER_KM: f64 = 0.01;

const CO2_RECYCLING: f64 = 398.0;
const CO2_INCINERATION: f64 = 980.0;
const CO2_CHEMICAL: f64 = 280.0;
const CO2_DISPOSAL: f64 = 271.0;
const CO2_TRANSPORT: f64 = 1.68;

/// Affected people, in units of 1e4.
const CONSEQUENCE: [f64; 2] = [0.01, 3.32];
/// Per million: recycling, incineration, chemical, disposal.
const RISK_PROBABILITY: [f64; 4] = [20.0, 50.0, 60.0, 30.0];
const ACCIDENT_RATE_PER_KM: f64 = 0.4e-6;
const RELEASE_PROBABILITY: f64 = 0.9;
const EXPOSURE_WIDTH_KM: f64 = 0.8;
const POTENTIAL_DISPOSABLE: f64 = 0.1;
const POTENTIAL_TREATED_RECYCLABLE: f64 = 0.05;
const POTENTIAL_TREATED_DISPOSABLE: f64 = 0.1;
const POTENTIAL_RECYCLED_DISPOSABLE: f64 = 0.1;

/// Tons per year handled per ton-per-day of nominal capacity.
const CAPACITY_SCALE: f64 = 1000.0;
/// Minimum intake of a new facility, as a share of the low-level capacity.
const THRESHOLD_SHARE: f64 = 0.1;

const TOTAL_TRUCKS: usize = 12;
const MAX_ROUTE_KM: f64 = 150.0;

/// Which part of the city the encoding covers.
struct Layout {
    districts: Vec<usize>,
    /// Generation nodes per covered district.
    gen_per_district: Vec<usize>,
    trucks_per_type: usize,
    outside_recyclers: bool,
}

/// The full case instance: 13 generation nodes, 12 trucks.
pub fn case_study_instance() -> Instance {
    build(
        "case-study",
        &Layout {
            districts: (0..6).collect(),
            gen_per_district: vec![3, 2, 2, 2, 2, 2],
            trucks_per_type: TOTAL_TRUCKS / WASTE_IDS.len(),
            outside_recyclers: true,
        },
    )
}

/// A reduced case instance that the embedded solver handles in seconds:
/// districts I, IV and VI with one generation node each and one truck per
/// waste type. Every published rate is kept; demands are the three
/// districts' totals.
pub fn case_study_desk_instance() -> Instance {
    build(
        "case-study-desk",
        &Layout { districts: vec![0, 3, 5], gen_per_district: vec![1, 1, 1], trucks_per_type: 1, outside_recyclers: false },
    )
}

fn paper() -> Option<ProvenanceNote> {
    Some(ProvenanceNote::All(Provenance::Paper))
}

fn synthetic() -> Option<ProvenanceNote> {
    Some(ProvenanceNote::All(Provenance::Synthetic))
}

fn fields(entries: &[(&str, Provenance)]) -> Option<ProvenanceNote> {
    Some(ProvenanceNote::Fields(entries.iter().map(|(k, p)| (k.to_string(), *p)).collect()))
}

/// District centres on a planar km grid, depot at the city centre.
fn district_centre(d: usize) -> [f64; 2] {
    [[10.0, 10.0], [4.0, 15.0], [16.0, 16.5], [3.0, 4.5], [15.5, 3.5], [19.0, 10.0]][d]
}

const DEPOT: [f64; 2] = [10.5, 9.0];
const JUYBAR: [f64; 2] = [11.0, 28.0];
const AMOL: [f64; 2] = [-9.0, 11.0];

fn offset(p: [f64; 2], dx: f64, dy: f64) -> [f64; 2] {
    [p[0] + dx, p[1] + dy]
}

fn round1(v: f64) -> f64 {
    (v * 10.0).round() / 10.0
}

fn round_sig(v: f64, digits: i32) -> f64 {
    if v == 0.0 {
        return 0.0;
    }
    let mag = 10f64.powi(digits - 1 - v.abs().log10().floor() as i32);
    (v * mag).round() / mag
}

/// Largest-remainder split of `total` into integers proportional to `weights`.
fn apportion(total: u64, weights: &[f64]) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<u64> = exact.iter().map(|e| e.floor() as u64).collect();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let short = total - out.iter().sum::<u64>();
    for &i in order.iter().take(short as usize) {
        out[i] += 1;
    }
    out
}

fn site_risk(probability_per_million: f64) -> f64 {
    let consequence = (CONSEQUENCE[0] + CONSEQUENCE[1]) / 2.0 * 1e4;
    round_sig(consequence * probability_per_million * 1e-6, 6)
}

fn build(name: &str, layout: &Layout) -> Instance {
    let mut nodes = vec![Node {
        id: "F1".into(),
        kind: NodeKind::Depot,
        district: Some("I".into()),
        position: Some(DEPOT),
        provenance: synthetic(),
    }];
    let mut node = |id: String, kind: NodeKind, district: Option<usize>, pos: [f64; 2], prov: Option<ProvenanceNote>| {
        nodes.push(Node {
            id,
            kind,
            district: district.map(|d| DISTRICT_IDS[d].to_string()),
            position: Some([round1(pos[0]), round1(pos[1])]),
            provenance: prov,
        });
    };

    let mut gens: Vec<(String, usize)> = Vec::new();
    let spots = [(-1.5, 1.0), (1.5, -0.5), (0.0, -2.0)];
    for (&d, &count) in layout.districts.iter().zip(&layout.gen_per_district) {
        let c = district_centre(d);
        for &(dx, dy) in spots.iter().take(count) {
            let id = format!("G{}", gens.len() + 1);
            let pos = if count == 1 { c } else { offset(c, dx, dy) };
            node(id.clone(), NodeKind::Generation, Some(d), pos, synthetic());
            gens.push((id, d));
        }
    }

    // Existing sites (district I hosts one of each, district IV a landfill).
    let existing_prov = fields(&[("kind", Provenance::Paper), ("district", Provenance::Paper), ("position", Provenance::Synthetic)]);
    if layout.districts.contains(&0) {
        let c = district_centre(0);
        node("R1".into(), NodeKind::RecyclingExisting, Some(0), offset(c, 2.0, 2.0), existing_prov.clone());
        node("T1".into(), NodeKind::TreatmentExisting, Some(0), offset(c, -2.0, -1.5), existing_prov.clone());
        node("D1".into(), NodeKind::DisposalExisting, Some(0), offset(c, 2.5, -2.5), existing_prov.clone());
    }
    if layout.districts.contains(&3) {
        node("D2".into(), NodeKind::DisposalExisting, Some(3), offset(district_centre(3), -1.5, -2.0), existing_prov.clone());
    }
    if layout.outside_recyclers {
        let prov = fields(&[("kind", Provenance::Paper), ("position", Provenance::Synthetic)]);
        node("R_Juybar".into(), NodeKind::RecyclingExisting, None, JUYBAR, prov.clone());
        node("R_Amol".into(), NodeKind::RecyclingExisting, None, AMOL, prov);
    }
    for &d in &layout.districts {
        let c = district_centre(d);
        let id = DISTRICT_IDS[d];
        node(format!("Rc_{id}"), NodeKind::RecyclingCandidate, Some(d), offset(c, 3.0, 0.5), synthetic());
        node(format!("Tc_{id}"), NodeKind::TreatmentCandidate, Some(d), offset(c, -3.0, 0.5), synthetic());
        node(format!("Dc_{id}"), NodeKind::DisposalCandidate, Some(d), offset(c, 0.5, 3.0), synthetic());
    }

    let technologies = vec![
        Technology {
            id: INCINERATION.into(),
            available_at: if layout.districts.contains(&0) { vec!["T1".into()] } else { Vec::new() },
        },
        Technology { id: CHEMICAL.into(), available_at: Vec::new() },
    ];

    // Demand: each district total split across (waste type, node) cells by
    // the summed sector shares, equal weight per node.
    let type_weight: Vec<f64> = (0..4).map(|w| SHARE_INDUSTRIAL[w] + SHARE_HEALTH[w]).collect();
    let mut demand: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new(); 4];
    for &d in &layout.districts {
        let here: Vec<&String> = gens.iter().filter(|(_, gd)| *gd == d).map(|(g, _)| g).collect();
        let cells: Vec<(usize, &String)> = (0..4).flat_map(|w| here.iter().map(move |g| (w, *g))).collect();
        let weights: Vec<f64> = cells.iter().map(|&(w, _)| type_weight[w]).collect();
        for ((w, g), amount) in cells.iter().zip(apportion(DISTRICT_HW[d] as u64, &weights)) {
            demand[*w].insert((*g).clone(), amount as f64);
        }
    }

    let ratio_map = |vals: [f64; 2]| -> BTreeMap<String, f64> {
        [(INCINERATION.to_string(), vals[0]), (CHEMICAL.to_string(), vals[1])].into()
    };
    let waste_types: Vec<WasteType> = (0..4)
        .map(|w| WasteType {
            id: WASTE_IDS[w].into(),
            demand: demand[w].clone(),
            tech_compat: [(INCINERATION.to_string(), WASTE_COMPAT[w][0]), (CHEMICAL.to_string(), WASTE_COMPAT[w][1])].into(),
            recyclable_fraction_after_tech: ratio_map(RECYCLABLE_AFTER),
            mass_reduction: ratio_map(MASS_REDUCTION),
            risk_potential: WASTE_RISK[w],
            source_share: Some(SourceShare { industrial: SHARE_INDUSTRIAL[w], health: SHARE_HEALTH[w] }),
            provenance: fields(&[
                ("demand", Provenance::Synthetic),
                ("tech_compat", Provenance::Paper),
                ("recyclable_fraction_after_tech", Provenance::Paper),
                ("mass_reduction", Provenance::Paper),
                ("risk_potential", Provenance::Paper),
                ("source_share", Provenance::Paper),
            ]),
        })
        .collect();

    // Fleet sized so a greedy split of each type's nodes into consecutive
    // runs fits, with 20 % headroom for demand scaling.
    let mut vehicles = Vec::new();
    for (w, wt) in waste_types.iter().enumerate() {
        let d_max = wt.demand.values().copied().fold(0.0, f64::max);
        let per_truck = wt.total_demand() / layout.trucks_per_type as f64 + d_max;
        let capacity = (1.2 * per_truck / 100.0).ceil() * 100.0;
        for t in 0..layout.trucks_per_type {
            vehicles.push(Vehicle {
                id: format!("K{}", w * layout.trucks_per_type + t + 1),
                waste_compat: WASTE_IDS.iter().map(|x| (x.to_string(), u8::from(*x == WASTE_IDS[w]))).collect(),
                capacity,
                max_distance: MAX_ROUTE_KM,
                provenance: fields(&[
                    ("waste_compat", Provenance::Paper),
                    ("capacity", Provenance::Synthetic),
                    ("max_distance", Provenance::Synthetic),
                ]),
            });
        }
    }

    let district_index = |n: &Node| n.district.as_deref().and_then(|d| DISTRICT_IDS.iter().position(|x| *x == d));
    let risk_r = site_risk(RISK_PROBABILITY[0]);
    let risk_inc = site_risk(RISK_PROBABILITY[1]);
    let risk_chem = site_risk(RISK_PROBABILITY[2]);
    let risk_d = site_risk(RISK_PROBABILITY[3]);
    let mut capacity_levels = Vec::new();
    for (h, level) in LEVELS.iter().enumerate() {
        let max = level.parse::<f64>().expect("numeric level") * CAPACITY_SCALE;
        let mut cl = CapacityLevel {
            level: level.to_string(),
            treatment: BTreeMap::new(),
            recycling: BTreeMap::new(),
            disposal: BTreeMap::new(),
            provenance: fields(&[
                ("max", Provenance::Synthetic),
                ("invest_cost", Provenance::Paper),
                ("op_risk", Provenance::Derived),
            ]),
        };
        for n in &nodes {
            // Sites outside the districts are existing, so their cost is never charged.
            let cost = district_index(n).map_or(0.0, |d| ESTABLISHMENT[h][d]);
            let cap = |op_risk| LevelCap { max, invest_cost: cost, op_risk };
            match n.kind {
                NodeKind::RecyclingCandidate | NodeKind::RecyclingExisting => {
                    cl.recycling.insert(n.id.clone(), cap(risk_r));
                }
                NodeKind::DisposalCandidate | NodeKind::DisposalExisting => {
                    cl.disposal.insert(n.id.clone(), cap(risk_d));
                }
                NodeKind::TreatmentCandidate => {
                    cl.treatment.insert(
                        n.id.clone(),
                        [(INCINERATION.to_string(), cap(risk_inc)), (CHEMICAL.to_string(), cap(risk_chem))].into(),
                    );
                }
                NodeKind::TreatmentExisting => {
                    cl.treatment.insert(n.id.clone(), [(INCINERATION.to_string(), cap(risk_inc))].into());
                }
                _ => {}
            }
        }
        capacity_levels.push(cl);
    }

    let low = LEVELS[0].parse::<f64>().expect("numeric level") * CAPACITY_SCALE * THRESHOLD_SHARE;
    let mut thresholds = Thresholds::default();
    for n in &nodes {
        match n.kind {
            NodeKind::RecyclingCandidate => {
                thresholds.recycling.insert(n.id.clone(), low);
            }
            NodeKind::DisposalCandidate => {
                thresholds.disposal.insert(n.id.clone(), low);
            }
            NodeKind::TreatmentCandidate => {
                thresholds
                    .treatment
                    .insert(n.id.clone(), [(INCINERATION.to_string(), low), (CHEMICAL.to_string(), low)].into());
            }
            _ => {}
        }
    }

    // Arcs: complete undirected graph. Residue arcs carry link risk
    // (potential × exposed people × release probability) and transport CO₂.
    let mid_density = |n: &Node| -> f64 {
        match district_index(n) {
            Some(d) => (DENSITY[d][0] + DENSITY[d][1]) / 2.0,
            None => DENSITY.iter().map(|r| (r[0] + r[1]) / 2.0).fold(f64::INFINITY, f64::min),
        }
    };
    let mut arcs = Vec::new();
    for (i, a) in nodes.iter().enumerate() {
        for b in &nodes[i + 1..] {
            let (pa, pb) = (a.position.expect("placed"), b.position.expect("placed"));
            let dist = round1(((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt());
            let kinds = (a.kind.facility(), b.kind.facility());
            let potential = match kinds {
                (Some(FacilityKind::Treatment), Some(FacilityKind::Recycling))
                | (Some(FacilityKind::Recycling), Some(FacilityKind::Treatment)) => Some(POTENTIAL_TREATED_RECYCLABLE),
                (Some(FacilityKind::Treatment), Some(FacilityKind::Disposal))
                | (Some(FacilityKind::Disposal), Some(FacilityKind::Treatment)) => Some(POTENTIAL_TREATED_DISPOSABLE),
                (Some(FacilityKind::Recycling), Some(FacilityKind::Disposal))
                | (Some(FacilityKind::Disposal), Some(FacilityKind::Recycling)) => Some(POTENTIAL_RECYCLED_DISPOSABLE),
                _ => None,
            };
            let (risk, co2) = match potential {
                Some(p) => {
                    let people = (mid_density(a) + mid_density(b)) / 2.0 * EXPOSURE_WIDTH_KM * dist;
                    let probability = ACCIDENT_RATE_PER_KM * RELEASE_PROBABILITY * dist;
                    (round_sig(p * people * probability, 6), CO2_TRANSPORT)
                }
                None => (0.0, 0.0),
            };
            arcs.push(Arc {
                from: a.id.clone(),
                to: b.id.clone(),
                distance: dist,
                vehicle_distance: BTreeMap::new(),
                unit_cost: round_sig(TRANSPORT_COST_PER_KM * dist, 6),
                transport_risk: risk,
                risk_cap: None,
                co2_transport: co2,
                directed: false,
                provenance: fields(&[
                    ("distance", Provenance::Synthetic),
                    ("unit_cost", Provenance::Derived),
                    ("transport_risk", Provenance::Derived),
                    ("co2_transport", Provenance::Paper),
                ]),
            });
        }
    }

    let mut recycling_ratio = BTreeMap::new();
    let mut co2_ops = Co2Ops { provenance: paper(), ..Default::default() };
    for n in &nodes {
        match n.kind.facility() {
            Some(FacilityKind::Recycling) => {
                recycling_ratio.insert(n.id.clone(), 1.0 - RECYCLING_RESIDUE);
                co2_ops.recycling.insert(n.id.clone(), CO2_RECYCLING);
            }
            Some(FacilityKind::Disposal) => {
                co2_ops.disposal.insert(n.id.clone(), CO2_DISPOSAL);
            }
            _ => {}
        }
    }
    let treat: Vec<&Node> = nodes.iter().filter(|n| n.kind.facility() == Some(FacilityKind::Treatment)).collect();
    for wt in &waste_types {
        let mut per_tech = BTreeMap::new();
        for (q, rate) in [(INCINERATION, CO2_INCINERATION), (CHEMICAL, CO2_CHEMICAL)] {
            if wt.compatible_with(q) {
                per_tech.insert(q.to_string(), treat.iter().map(|n| (n.id.clone(), rate)).collect());
            }
        }
        if !per_tech.is_empty() {
            co2_ops.treatment.insert(wt.id.clone(), per_tech);
        }
    }

    let districts = layout
        .districts
        .iter()
        .map(|&d| District {
            id: DISTRICT_IDS[d].into(),
            name: DISTRICT_NAMES[d].into(),
            hw_amount: DISTRICT_HW[d],
            population_density: DENSITY[d],
            establishment_cost: LEVELS.iter().enumerate().map(|(h, l)| (l.to_string(), ESTABLISHMENT[h][d])).collect(),
        })
        .collect();

    let reference = ReferenceData {
        total_hazardous_waste: CASE_STUDY_TOTAL_DEMAND,
        transport_cost_per_km: TRANSPORT_COST_PER_KM,
        co2_rates: [
            ("recycling", CO2_RECYCLING),
            (INCINERATION, CO2_INCINERATION),
            (CHEMICAL, CO2_CHEMICAL),
            ("disposal", CO2_DISPOSAL),
            ("transportation", CO2_TRANSPORT),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect(),
        risk_consequence_range: CONSEQUENCE,
        risk_probability: ["recycling", INCINERATION, CHEMICAL, "disposal"]
            .iter()
            .zip(RISK_PROBABILITY)
            .map(|(k, v)| (k.to_string(), v))
            .collect(),
        accident_rate_per_km: ACCIDENT_RATE_PER_KM,
        release_probability: RELEASE_PROBABILITY,
        exposure_width_km: EXPOSURE_WIDTH_KM,
        residue_risk_potential: [
            ("disposable-waste", POTENTIAL_DISPOSABLE),
            ("treatment-recyclable", POTENTIAL_TREATED_RECYCLABLE),
            ("treatment-disposable", POTENTIAL_TREATED_DISPOSABLE),
            ("recycling-disposable", POTENTIAL_RECYCLED_DISPOSABLE),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect(),
        mass_reduction: ratio_map(MASS_REDUCTION),
        recyclable_after_tech: ratio_map(RECYCLABLE_AFTER),
        recycling_residue_to_disposal: RECYCLING_RESIDUE,
        capacity_tons_per_day: LEVELS.iter().map(|l| (l.to_string(), l.parse().expect("numeric level"))).collect(),
        capacity_scale: CAPACITY_SCALE,
    };

    Instance {
        name: name.into(),
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
        districts,
        reference: Some(reference),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apportion_preserves_total() {
        assert_eq!(apportion(10, &[1.0, 1.0, 1.0]), vec![4, 3, 3]);
        assert_eq!(apportion(7, &[0.5, 0.5]).iter().sum::<u64>(), 7);
    }

    #[test]
    fn site_risk_uses_consequence_midpoint() {
        assert!((site_risk(20.0) - 0.333).abs() < 1e-12);
    }
}
