//! Problem data: nodes, waste types, fleet, facility capacity levels and the
//! arc/operation parameters of the location-routing model.
//!
//! An [`Instance`] is plain data that serializes to and from JSON (see
//! [`parse_instance`] / [`to_json`]). Lookups by id go through the helper
//! methods; [`validate_instance`] checks every cross-reference and invariant.

mod case_study;
mod parse;
mod scenario;
mod synth;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use case_study::{case_study_desk_instance, case_study_instance, CASE_STUDY_TOTAL_DEMAND};
pub use parse::{parse_instance, to_json, ParseError};
pub use scenario::{CapacityMode, Scenario, ScenarioError, DECREASED_FACTORS, INCREASED_FACTORS, UNBOUNDED_LEVEL};
pub use synth::{corpus_dims, seeded_corpus, synth_instance, SynthDims, SynthError};
pub use validate::{validate_instance, Finding, Severity};

/// Default weight of the augmentation term in the epsilon-constraint model.
pub const DEFAULT_EPS_CONSTANT: f64 = 1e-4;

fn default_eps() -> f64 {
    DEFAULT_EPS_CONSTANT
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

/// Where a datum comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Published value.
    Paper,
    /// Generated because the source does not publish it.
    Synthetic,
    /// Computed from published values by a documented rule.
    Derived,
}

/// Provenance of a whole record, or per field of the record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProvenanceNote {
    All(Provenance),
    Fields(BTreeMap<String, Provenance>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Depot,
    Generation,
    RecyclingCandidate,
    RecyclingExisting,
    TreatmentCandidate,
    TreatmentExisting,
    DisposalCandidate,
    DisposalExisting,
}

/// Facility family of a node kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FacilityKind {
    Recycling,
    Treatment,
    Disposal,
}

impl NodeKind {
    pub fn facility(self) -> Option<FacilityKind> {
        match self {
            NodeKind::RecyclingCandidate | NodeKind::RecyclingExisting => Some(FacilityKind::Recycling),
            NodeKind::TreatmentCandidate | NodeKind::TreatmentExisting => Some(FacilityKind::Treatment),
            NodeKind::DisposalCandidate | NodeKind::DisposalExisting => Some(FacilityKind::Disposal),
            NodeKind::Depot | NodeKind::Generation => None,
        }
    }

    pub fn is_existing(self) -> bool {
        matches!(self, NodeKind::RecyclingExisting | NodeKind::TreatmentExisting | NodeKind::DisposalExisting)
    }
}

impl std::fmt::Display for FacilityKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FacilityKind::Recycling => "recycling",
            FacilityKind::Treatment => "treatment",
            FacilityKind::Disposal => "disposal",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub district: Option<String>,
    /// Planar position in km, informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub position: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceNote>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Technology {
    pub id: String,
    /// Existing treatment sites where this technology is installed (a_qi = 1).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub available_at: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WasteType {
    pub id: String,
    /// d_wi: tons accumulated at each generation node (absent means zero).
    pub demand: BTreeMap<String, f64>,
    /// com_wq: 1 if the technology can treat this waste type.
    pub tech_compat: BTreeMap<String, u8>,
    /// β_wq: recyclable share of the treated residue.
    pub recyclable_fraction_after_tech: BTreeMap<String, f64>,
    /// r_wq: mass removed by the technology.
    pub mass_reduction: BTreeMap<String, f64>,
    pub risk_potential: f64,
    /// Share of the generated total that belongs to this type.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_share: Option<SourceShare>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceNote>,
}

/// Percentage of a waste type in each source sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceShare {
    pub industrial: f64,
    pub health: f64,
}

impl WasteType {
    pub fn demand_at(&self, node: &str) -> f64 {
        self.demand.get(node).copied().unwrap_or(0.0)
    }

    pub fn compatible_with(&self, tech: &str) -> bool {
        self.tech_compat.get(tech).copied().unwrap_or(0) == 1
    }

    /// No compatible technology: the waste goes straight to recycling.
    pub fn is_recyclable_only(&self) -> bool {
        !self.tech_compat.values().any(|&c| c == 1)
    }

    pub fn total_demand(&self) -> f64 {
        self.demand.values().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vehicle {
    pub id: String,
    /// ve_wk: 1 for the single waste type this vehicle carries.
    pub waste_compat: BTreeMap<String, u8>,
    /// δ: tons.
    pub capacity: f64,
    /// μ: km.
    pub max_distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceNote>,
}

impl Vehicle {
    /// The compatible waste type, if exactly one is flagged.
    pub fn waste(&self) -> Option<&str> {
        let mut it = self.waste_compat.iter().filter(|(_, &c)| c == 1);
        match (it.next(), it.next()) {
            (Some((w, _)), None) => Some(w.as_str()),
            _ => None,
        }
    }
}

/// Maximum throughput, investment cost and operating risk of one facility
/// at one capacity level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelCap {
    pub max: f64,
    pub invest_cost: f64,
    pub op_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityLevel {
    pub level: String,
    /// node → technology → (tc_qjh, ft_qjh, s_thq).
    pub treatment: BTreeMap<String, BTreeMap<String, LevelCap>>,
    /// node → (rc_jh, fr_jh, s_rh).
    pub recycling: BTreeMap<String, LevelCap>,
    /// node → (dc_jh, fd_jh, s_dh).
    pub disposal: BTreeMap<String, LevelCap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceNote>,
}

/// Minimum throughput required to open a facility (tc^m, rc^m, dc^m).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    #[serde(default)]
    pub treatment: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub recycling: BTreeMap<String, f64>,
    #[serde(default)]
    pub disposal: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arc {
    pub from: String,
    pub to: String,
    /// dis_ij in km.
    pub distance: f64,
    /// Per-vehicle distance overriding `distance` (dis_ijk).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub vehicle_distance: BTreeMap<String, f64>,
    /// c_ij: money per ton moved over the arc.
    pub unit_cost: f64,
    /// PTr / Ptd / Prd per ton, by endpoint kinds.
    #[serde(default, skip_serializing_if = "is_default")]
    pub transport_risk: f64,
    /// PC_ij; absent means uncapped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_cap: Option<f64>,
    /// QTr / QTd: kg CO₂ per ton-km.
    #[serde(default, skip_serializing_if = "is_default")]
    pub co2_transport: f64,
    /// One-way arc; by default the data also describes `to → from`.
    #[serde(default, skip_serializing_if = "is_default")]
    pub directed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceNote>,
}

/// Operation emission rates, kg CO₂ per ton processed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Co2Ops {
    /// Qr per recycling node.
    pub recycling: BTreeMap<String, f64>,
    /// Qt: waste type → technology → treatment node.
    pub treatment: BTreeMap<String, BTreeMap<String, BTreeMap<String, f64>>>,
    /// Qd per disposal node.
    pub disposal: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceNote>,
}

/// How operating risk enters the risk objective.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskMode {
    /// Risk rate of the level actually opened.
    #[default]
    LevelCoupled,
    /// Rates of every level summed, whatever level is opened.
    PaperLiteral,
}

/// Descriptive data about a district, kept for reporting and derivations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct District {
    pub id: String,
    pub name: String,
    /// Tons of hazardous waste generated per year.
    pub hw_amount: f64,
    /// People per km², as a published range.
    pub population_density: [f64; 2],
    /// Establishment cost per capacity level.
    pub establishment_cost: BTreeMap<String, f64>,
}

/// Published reference rates the derived parameters are computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceData {
    pub total_hazardous_waste: f64,
    pub transport_cost_per_km: f64,
    /// kg CO₂ per ton by operation (recycling, incineration, chemical, disposal, transportation).
    pub co2_rates: BTreeMap<String, f64>,
    /// Affected people in units of 1e4, low/high.
    pub risk_consequence_range: [f64; 2],
    /// Per facility type, ×1e-6.
    pub risk_probability: BTreeMap<String, f64>,
    pub accident_rate_per_km: f64,
    pub release_probability: f64,
    pub exposure_width_km: f64,
    /// Residue classes: disposable waste and the three residue kinds.
    pub residue_risk_potential: BTreeMap<String, f64>,
    pub mass_reduction: BTreeMap<String, f64>,
    pub recyclable_after_tech: BTreeMap<String, f64>,
    pub recycling_residue_to_disposal: f64,
    /// Level token → tons per day.
    pub capacity_tons_per_day: BTreeMap<String, f64>,
    /// Tons per year for one ton-per-day of nominal capacity.
    pub capacity_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Instance {
    pub name: String,
    #[serde(default = "default_eps")]
    pub eps_constant: f64,
    #[serde(default, skip_serializing_if = "is_default")]
    pub risk_mode: RiskMode,
    pub nodes: Vec<Node>,
    pub technologies: Vec<Technology>,
    pub waste_types: Vec<WasteType>,
    pub vehicles: Vec<Vehicle>,
    pub capacity_levels: Vec<CapacityLevel>,
    #[serde(default)]
    pub thresholds: Thresholds,
    pub arcs: Vec<Arc>,
    /// γ_i per recycling node.
    pub recycling_ratio: BTreeMap<String, f64>,
    pub co2_ops: Co2Ops,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub districts: Vec<District>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<ReferenceData>,
}

impl Instance {
    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn nodes_of(&self, pred: impl Fn(NodeKind) -> bool) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| pred(n.kind))
    }

    pub fn nodes_with(&self, kind: FacilityKind) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(move |n| n.kind.facility() == Some(kind))
    }

    pub fn depots(&self) -> impl Iterator<Item = &Node> {
        self.nodes_of(|k| k == NodeKind::Depot)
    }

    pub fn generation_nodes(&self) -> impl Iterator<Item = &Node> {
        self.nodes_of(|k| k == NodeKind::Generation)
    }

    pub fn waste(&self, id: &str) -> Option<&WasteType> {
        self.waste_types.iter().find(|w| w.id == id)
    }

    pub fn total_demand(&self) -> f64 {
        self.waste_types.iter().map(WasteType::total_demand).sum()
    }

    /// Arc data for `from → to`, following undirected arcs both ways.
    pub fn arc(&self, from: &str, to: &str) -> Option<&Arc> {
        self.arcs
            .iter()
            .find(|a| a.from == from && a.to == to)
            .or_else(|| self.arcs.iter().find(|a| !a.directed && a.from == to && a.to == from))
    }

    /// dis_ijk: the vehicle override if present, else the arc distance.
    pub fn distance(&self, from: &str, to: &str, vehicle: Option<&str>) -> Option<f64> {
        let arc = self.arc(from, to)?;
        Some(vehicle.and_then(|k| arc.vehicle_distance.get(k).copied()).unwrap_or(arc.distance))
    }

    /// Technology installed at an existing treatment site.
    pub fn existing_technology(&self, node: &str) -> Option<&str> {
        self.technologies.iter().find(|t| t.available_at.iter().any(|n| n == node)).map(|t| t.id.as_str())
    }

    /// Technologies a treatment node may host.
    pub fn treatment_options(&self, node: &str) -> Vec<&str> {
        let n = match self.node(node) {
            Some(n) => n,
            None => return Vec::new(),
        };
        if n.kind == NodeKind::TreatmentExisting {
            return self.existing_technology(node).into_iter().collect();
        }
        self.technologies
            .iter()
            .filter(|t| self.capacity_levels.iter().any(|l| l.treatment.get(node).is_some_and(|m| m.contains_key(&t.id))))
            .map(|t| t.id.as_str())
            .collect()
    }

    pub fn treatment_threshold(&self, node: &str, tech: &str) -> f64 {
        self.thresholds.treatment.get(node).and_then(|m| m.get(tech)).copied().unwrap_or(0.0)
    }

    pub fn recycling_threshold(&self, node: &str) -> f64 {
        self.thresholds.recycling.get(node).copied().unwrap_or(0.0)
    }

    pub fn disposal_threshold(&self, node: &str) -> f64 {
        self.thresholds.disposal.get(node).copied().unwrap_or(0.0)
    }

    /// Qt for a (waste, technology, node) triple.
    pub fn qt(&self, waste: &str, tech: &str, node: &str) -> f64 {
        self.co2_ops
            .treatment
            .get(waste)
            .and_then(|m| m.get(tech))
            .and_then(|m| m.get(node))
            .copied()
            .unwrap_or(0.0)
    }

    /// Multiplies every demand by `factor`.
    pub fn scale_demand(&mut self, factor: f64) {
        for w in &mut self.waste_types {
            for d in w.demand.values_mut() {
                *d *= factor;
            }
        }
    }

    /// Multiplies every level's maximum capacity by `factor`.
    pub fn scale_capacity(&mut self, factor: f64) {
        self.scale_levels(&[factor]).expect("a single factor fits any level count");
    }
}
