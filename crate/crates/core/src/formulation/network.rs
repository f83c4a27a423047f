//! Index sets shared by the model builder, the decoder and the oracle.

use crate::instance::{FacilityKind, Instance, LevelCap, WasteType};

/// One vehicle with the nodes it may visit.
#[derive(Debug, Clone)]
pub(crate) struct Fleet<'a> {
    pub id: &'a str,
    pub waste: &'a WasteType,
    pub capacity: f64,
    pub max_distance: f64,
    /// Generation nodes with positive demand of the vehicle's waste.
    pub served: Vec<&'a str>,
    /// Facilities where the vehicle may unload.
    pub terminals: Vec<&'a str>,
}

#[derive(Debug, Clone)]
pub(crate) struct Network<'a> {
    pub inst: &'a Instance,
    pub depots: Vec<&'a str>,
    pub gens: Vec<&'a str>,
    pub rec: Vec<&'a str>,
    pub treat: Vec<&'a str>,
    pub disp: Vec<&'a str>,
    pub levels: Vec<&'a str>,
    pub fleet: Vec<Fleet<'a>>,
}

impl<'a> Network<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        let ids = |kind: FacilityKind| inst.nodes_with(kind).map(|n| n.id.as_str()).collect::<Vec<_>>();
        let rec = ids(FacilityKind::Recycling);
        let treat = ids(FacilityKind::Treatment);
        let mut net = Network {
            inst,
            depots: inst.depots().map(|n| n.id.as_str()).collect(),
            gens: inst.generation_nodes().map(|n| n.id.as_str()).collect(),
            disp: ids(FacilityKind::Disposal),
            levels: inst.capacity_levels.iter().map(|l| l.level.as_str()).collect(),
            rec,
            treat,
            fleet: Vec::new(),
        };
        for k in &inst.vehicles {
            let Some(waste) = k.waste().and_then(|w| inst.waste(w)) else { continue };
            let served = net.gens.iter().copied().filter(|g| waste.demand_at(g) > 0.0).collect();
            let terminals = if waste.is_recyclable_only() {
                net.rec.clone()
            } else {
                net.treat.iter().copied().filter(|j| net.techs_for(waste, j).next().is_some()).collect()
            };
            net.fleet.push(Fleet {
                id: k.id.as_str(),
                waste,
                capacity: k.capacity,
                max_distance: k.max_distance,
                served,
                terminals,
            });
        }
        net
    }

    /// Technologies usable at treatment node `j`.
    pub fn options(&self, j: &str) -> Vec<&'a str> {
        self.inst.treatment_options(j)
    }

    /// Technologies at `j` that can process `waste`.
    pub fn techs_for<'s>(&'s self, waste: &'s WasteType, j: &'s str) -> impl Iterator<Item = &'a str> + 's {
        self.options(j).into_iter().filter(move |q| waste.compatible_with(q))
    }

    pub fn is_existing(&self, node: &str) -> bool {
        self.inst.node(node).is_some_and(|n| n.kind.is_existing())
    }

    pub fn treatment_cap(&self, level: &str, node: &str, tech: &str) -> Option<&'a LevelCap> {
        self.level(level)?.treatment.get(node)?.get(tech)
    }

    pub fn recycling_cap(&self, level: &str, node: &str) -> Option<&'a LevelCap> {
        self.level(level)?.recycling.get(node)
    }

    pub fn disposal_cap(&self, level: &str, node: &str) -> Option<&'a LevelCap> {
        self.level(level)?.disposal.get(node)
    }

    fn level(&self, level: &str) -> Option<&'a crate::instance::CapacityLevel> {
        self.inst.capacity_levels.iter().find(|l| l.level == level)
    }

    /// Residue arcs that exist in the data: (treatment → recycling), (treatment → disposal), (recycling → disposal).
    pub fn residue_arcs(&self) -> (Vec<(&'a str, &'a str)>, Vec<(&'a str, &'a str)>, Vec<(&'a str, &'a str)>) {
        let pairs = |from: &[&'a str], to: &[&'a str]| {
            from.iter()
                .flat_map(|&i| to.iter().map(move |&j| (i, j)))
                .filter(|&(i, j)| i != j && self.inst.arc(i, j).is_some())
                .collect::<Vec<_>>()
        };
        (pairs(&self.treat, &self.rec), pairs(&self.treat, &self.disp), pairs(&self.rec, &self.disp))
    }

    pub fn dist(&self, from: &str, to: &str, vehicle: Option<&str>) -> Option<f64> {
        self.inst.distance(from, to, vehicle)
    }
}
