//! What-if variants of an instance: capacity-level changes, demand scaling.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{CapacityLevel, Instance, LevelCap, Thresholds};

/// Per-level capacity factors taking levels of 5, 10, 15 t/d to 10, 15, 20.
pub const INCREASED_FACTORS: [f64; 3] = [2.0, 1.5, 20.0 / 15.0];
/// Per-level capacity factors taking levels of 5, 10, 15 t/d to 4, 7, 10.
pub const DECREASED_FACTORS: [f64; 3] = [0.8, 0.7, 10.0 / 15.0];

/// Token of the single level left by [`CapacityMode::None`].
pub const UNBOUNDED_LEVEL: &str = "unbounded";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CapacityMode {
    /// Levels as given.
    #[default]
    Paper,
    /// One level per site whose capacity never binds, with no minimum intake.
    None,
    Increased,
    Decreased,
}

impl fmt::Display for CapacityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CapacityMode::Paper => "paper",
            CapacityMode::None => "none",
            CapacityMode::Increased => "increased",
            CapacityMode::Decreased => "decreased",
        })
    }
}

impl FromStr for CapacityMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paper" => Ok(CapacityMode::Paper),
            "none" => Ok(CapacityMode::None),
            "increased" => Ok(CapacityMode::Increased),
            "decreased" => Ok(CapacityMode::Decreased),
            other => Err(format!("unknown capacity mode `{other}` (expected paper, none, increased or decreased)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub capacity: CapacityMode,
    /// Per-level factors for `increased` / `decreased`, in the instance's
    /// level order. A single factor applies to every level. Empty means the
    /// built-in factors.
    #[serde(default)]
    pub capacity_factors: Vec<f64>,
    pub waste_scale: f64,
    /// Off: minimize cost alone and report risk and emissions of that plan.
    pub sustainability: bool,
}

impl Default for Scenario {
    fn default() -> Self {
        Self { capacity: CapacityMode::Paper, capacity_factors: Vec::new(), waste_scale: 1.0, sustainability: true }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("waste scale must be positive and finite, got {0}")]
    WasteScale(f64),
    #[error("capacity factor must be positive and finite, got {0}")]
    Factor(f64),
    #[error("{factors} capacity factors given for {levels} levels")]
    FactorCount { factors: usize, levels: usize },
    #[error("capacity factors only apply to the increased and decreased modes")]
    FactorsUnused,
}

impl Scenario {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.waste_scale > 0.0 && self.waste_scale.is_finite()) {
            return Err(ScenarioError::WasteScale(self.waste_scale));
        }
        if let Some(&f) = self.capacity_factors.iter().find(|f| !(**f > 0.0 && f.is_finite())) {
            return Err(ScenarioError::Factor(f));
        }
        if !self.capacity_factors.is_empty() && !matches!(self.capacity, CapacityMode::Increased | CapacityMode::Decreased) {
            return Err(ScenarioError::FactorsUnused);
        }
        Ok(())
    }

    /// Whether applying the scenario leaves the instance unchanged.
    pub fn is_identity(&self) -> bool {
        self.capacity == CapacityMode::Paper && self.waste_scale == 1.0 && self.sustainability
    }

    /// The instance this scenario solves.
    pub fn apply(&self, inst: &Instance) -> Result<Instance, ScenarioError> {
        self.validate()?;
        let mut out = inst.clone();
        if self.waste_scale != 1.0 {
            out.scale_demand(self.waste_scale);
        }
        match self.capacity {
            CapacityMode::Paper => {}
            CapacityMode::None => out.remove_capacity_levels(),
            CapacityMode::Increased | CapacityMode::Decreased => {
                let builtin: &[f64] =
                    if self.capacity == CapacityMode::Increased { &INCREASED_FACTORS } else { &DECREASED_FACTORS };
                let factors = if self.capacity_factors.is_empty() { builtin } else { &self.capacity_factors };
                out.scale_levels(factors)?;
            }
        }
        Ok(out)
    }
}

impl Instance {
    /// Multiplies the capacities of the `i`-th level by `factors[i]`; one
    /// factor scales every level.
    pub fn scale_levels(&mut self, factors: &[f64]) -> Result<(), ScenarioError> {
        let n = self.capacity_levels.len();
        if factors.len() != n && factors.len() != 1 {
            return Err(ScenarioError::FactorCount { factors: factors.len(), levels: n });
        }
        for (i, l) in self.capacity_levels.iter_mut().enumerate() {
            let f = if factors.len() == 1 { factors[0] } else { factors[i] };
            for caps in l.treatment.values_mut() {
                for c in caps.values_mut() {
                    c.max *= f;
                }
            }
            for c in l.recycling.values_mut().chain(l.disposal.values_mut()) {
                c.max *= f;
            }
        }
        Ok(())
    }

    /// Replaces the level sets by a single level per site and technology
    /// whose capacity is the total demand, so it never binds, and drops
    /// every minimum intake. Cost and risk of a site are those of its
    /// largest original level.
    pub fn remove_capacity_levels(&mut self) {
        let cap = self.total_demand().max(1.0);
        let largest = |caps: Vec<&LevelCap>| -> Option<LevelCap> {
            caps.into_iter().max_by(|a, b| a.max.total_cmp(&b.max)).map(|c| LevelCap { max: cap, ..*c })
        };
        let mut level = CapacityLevel {
            level: UNBOUNDED_LEVEL.into(),
            treatment: Default::default(),
            recycling: Default::default(),
            disposal: Default::default(),
            provenance: None,
        };
        let nodes: Vec<String> = self.nodes.iter().map(|n| n.id.clone()).collect();
        for node in &nodes {
            let techs: std::collections::BTreeSet<&String> =
                self.capacity_levels.iter().filter_map(|l| l.treatment.get(node)).flat_map(|m| m.keys()).collect();
            for q in techs {
                let caps = self.capacity_levels.iter().filter_map(|l| l.treatment.get(node)?.get(q)).collect();
                if let Some(c) = largest(caps) {
                    level.treatment.entry(node.clone()).or_default().insert(q.clone(), c);
                }
            }
            if let Some(c) = largest(self.capacity_levels.iter().filter_map(|l| l.recycling.get(node)).collect()) {
                level.recycling.insert(node.clone(), c);
            }
            if let Some(c) = largest(self.capacity_levels.iter().filter_map(|l| l.disposal.get(node)).collect()) {
                level.disposal.insert(node.clone(), c);
            }
        }
        self.capacity_levels = vec![level];
        self.thresholds = Thresholds::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{case_study_desk_instance, validate_instance, Severity};

    #[test]
    fn builtin_factors_map_paper_levels() {
        let up: Vec<f64> = [5.0, 10.0, 15.0].iter().zip(INCREASED_FACTORS).map(|(l, f)| l * f).collect();
        let down: Vec<f64> = [5.0, 10.0, 15.0].iter().zip(DECREASED_FACTORS).map(|(l, f)| l * f).collect();
        for (a, b) in up.iter().zip([10.0, 15.0, 20.0]).chain(down.iter().zip([4.0, 7.0, 10.0])) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_scenario_changes_nothing() {
        let inst = case_study_desk_instance();
        assert_eq!(Scenario::default().apply(&inst).unwrap(), inst);
    }

    #[test]
    fn removed_levels_stay_valid() {
        let mut inst = case_study_desk_instance();
        inst.remove_capacity_levels();
        assert_eq!(inst.capacity_levels.len(), 1);
        assert!(validate_instance(&inst).iter().all(|f| f.severity != Severity::Fatal));
        let cap = inst.total_demand();
        assert!(inst.capacity_levels[0].recycling.values().all(|c| c.max == cap));
    }

    #[test]
    fn factor_count_must_match() {
        let mut inst = case_study_desk_instance();
        assert!(matches!(inst.scale_levels(&[1.0, 2.0]), Err(ScenarioError::FactorCount { .. })));
        let s = Scenario { capacity: CapacityMode::None, capacity_factors: vec![2.0], ..Scenario::default() };
        assert_eq!(s.validate(), Err(ScenarioError::FactorsUnused));
        let s = Scenario { waste_scale: 0.0, ..Scenario::default() };
        assert_eq!(s.validate(), Err(ScenarioError::WasteScale(0.0)));
    }
}
