use std::collections::BTreeMap;
use std::fmt;

use crate::milp::VarId;

/// Semantic identity of one model variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarKey {
    /// Vehicle travels `from → to`.
    X { from: String, to: String, vehicle: String },
    /// Linearized `x · lo` on a generation → facility arc.
    Xl { from: String, to: String, vehicle: String },
    /// Treatment → disposal residue.
    Z { from: String, to: String },
    /// Treatment → recycling residue.
    K { from: String, to: String },
    /// Recycling → disposal residue.
    V { from: String, to: String },
    Xr { node: String },
    Xt { waste: String, node: String },
    Xd { node: String },
    /// Distance travelled by the vehicle after leaving `node`.
    E { node: String, vehicle: String },
    /// Load of the vehicle after leaving `node`.
    Lo { node: String, vehicle: String },
    R { node: String, level: String },
    T { tech: String, node: String, level: String },
    D { node: String, level: String },
    /// Share of `xt` processed with `tech` at `level`.
    XtSplit { waste: String, tech: String, node: String, level: String },
    XrSplit { node: String, level: String },
    XdSplit { node: String, level: String },
    /// Slack of an objective moved into the constraints.
    Slack { objective: usize },
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarKey::X { from, to, vehicle } => write!(f, "x[{from},{to},{vehicle}]"),
            VarKey::Xl { from, to, vehicle } => write!(f, "xl[{from},{to},{vehicle}]"),
            VarKey::Z { from, to } => write!(f, "z[{from},{to}]"),
            VarKey::K { from, to } => write!(f, "k[{from},{to}]"),
            VarKey::V { from, to } => write!(f, "v[{from},{to}]"),
            VarKey::Xr { node } => write!(f, "xr[{node}]"),
            VarKey::Xt { waste, node } => write!(f, "xt[{waste},{node}]"),
            VarKey::Xd { node } => write!(f, "xd[{node}]"),
            VarKey::E { node, vehicle } => write!(f, "e[{node},{vehicle}]"),
            VarKey::Lo { node, vehicle } => write!(f, "lo[{node},{vehicle}]"),
            VarKey::R { node, level } => write!(f, "r[{node},{level}]"),
            VarKey::T { tech, node, level } => write!(f, "t[{tech},{node},{level}]"),
            VarKey::D { node, level } => write!(f, "d[{node},{level}]"),
            VarKey::XtSplit { waste, tech, node, level } => write!(f, "xth[{waste},{tech},{node},{level}]"),
            VarKey::XrSplit { node, level } => write!(f, "xrh[{node},{level}]"),
            VarKey::XdSplit { node, level } => write!(f, "xdh[{node},{level}]"),
            VarKey::Slack { objective } => write!(f, "s{objective}"),
        }
    }
}

/// Bijection between [`VarKey`]s and the variables of one model.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VarCatalog {
    keys: Vec<VarKey>,
    index: BTreeMap<VarKey, VarId>,
}

impl VarCatalog {
    pub(crate) fn insert(&mut self, key: VarKey, id: VarId) {
        assert_eq!(id.0, self.keys.len(), "catalog must follow model insertion order");
        self.index.insert(key.clone(), id);
        self.keys.push(key);
    }

    pub fn get(&self, key: &VarKey) -> Option<VarId> {
        self.index.get(key).copied()
    }

    pub fn key(&self, id: VarId) -> &VarKey {
        &self.keys[id.0]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &VarKey)> {
        self.keys.iter().enumerate().map(|(i, k)| (VarId(i), k))
    }

    pub fn x(&self, from: &str, to: &str, vehicle: &str) -> Option<VarId> {
        self.get(&VarKey::X { from: from.into(), to: to.into(), vehicle: vehicle.into() })
    }

    pub fn xl(&self, from: &str, to: &str, vehicle: &str) -> Option<VarId> {
        self.get(&VarKey::Xl { from: from.into(), to: to.into(), vehicle: vehicle.into() })
    }

    pub fn lo(&self, node: &str, vehicle: &str) -> Option<VarId> {
        self.get(&VarKey::Lo { node: node.into(), vehicle: vehicle.into() })
    }

    /// Routing arcs of one vehicle, in model order.
    pub fn arcs_of<'a>(&'a self, vehicle: &'a str) -> impl Iterator<Item = (VarId, &'a str, &'a str)> + 'a {
        self.iter().filter_map(move |(id, k)| match k {
            VarKey::X { from, to, vehicle: v } if v == vehicle => Some((id, from.as_str(), to.as_str())),
            _ => None,
        })
    }

    /// Variables whose keys satisfy `pred`.
    pub fn select<'a>(&'a self, pred: impl Fn(&VarKey) -> bool + 'a) -> impl Iterator<Item = (VarId, &'a VarKey)> + 'a {
        self.iter().filter(move |(_, k)| pred(k))
    }

    /// Number of variables in each family, keyed by family name.
    pub fn family_counts(&self) -> BTreeMap<&'static str, usize> {
        let mut out = BTreeMap::new();
        for k in &self.keys {
            *out.entry(family(k)).or_insert(0) += 1;
        }
        out
    }
}

pub(crate) fn family(k: &VarKey) -> &'static str {
    match k {
        VarKey::X { .. } => "x",
        VarKey::Xl { .. } => "xl",
        VarKey::Z { .. } => "z",
        VarKey::K { .. } => "k",
        VarKey::V { .. } => "v",
        VarKey::Xr { .. } => "xr",
        VarKey::Xt { .. } => "xt",
        VarKey::Xd { .. } => "xd",
        VarKey::E { .. } => "e",
        VarKey::Lo { .. } => "lo",
        VarKey::R { .. } => "r",
        VarKey::T { .. } => "t",
        VarKey::D { .. } => "d",
        VarKey::XtSplit { .. } => "xth",
        VarKey::XrSplit { .. } => "xrh",
        VarKey::XdSplit { .. } => "xdh",
        VarKey::Slack { .. } => "s",
    }
}
