//! Electrical topology derived from a scenario: buses, oriented branches and
//! where each load attaches.

use std::collections::{BTreeMap, VecDeque};

use num_complex::Complex64;

use super::model::{GridObject, ObjectClass, Position, ScenarioModel};
use crate::powerflow::LineStatus;
use crate::units::UnitClass;

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub name: String,
    pub class: ObjectClass,
    /// Volts.
    pub nominal_voltage: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub name: String,
    /// `None` for the zero-impedance link implied by a bus's `parent`.
    pub class: Option<ObjectClass>,
    /// Upstream bus.
    pub from: usize,
    /// Downstream bus.
    pub to: usize,
    /// Ohms, referred to the downstream side.
    pub impedance: Complex64,
    /// Turns ratio `V_from / V_to`; 1 for everything but transformers.
    pub ratio: f64,
    pub initial_status: LineStatus,
}

impl Edge {
    pub fn is_switchable(&self) -> bool {
        self.class.is_some_and(ObjectClass::is_switchable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkIndex {
    pub buses: Vec<Bus>,
    pub edges: Vec<Edge>,
    pub root: usize,
    /// Edge feeding each bus; `None` for the root.
    pub parent_edge: Vec<Option<usize>>,
    /// Edges leaving each bus downstream.
    pub children: Vec<Vec<usize>>,
    /// Buses in breadth-first order from the root.
    pub order: Vec<usize>,
    /// Bus-to-bus hops from the root.
    pub depth: Vec<usize>,
    /// Load objects (houses, appliances, inverters, panels) per bus.
    pub loads: Vec<Vec<String>>,
    bus_lookup: BTreeMap<String, usize>,
    edge_lookup: BTreeMap<String, usize>,
    attachment: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum TopologyCode {
    NoSource,
    MultipleSources,
    NotRadial,
    Disconnected,
    TransformerDirection,
}

impl TopologyCode {
    pub fn code(self) -> &'static str {
        match self {
            TopologyCode::NoSource => "NO_SOURCE",
            TopologyCode::MultipleSources => "MULTIPLE_SOURCES",
            TopologyCode::NotRadial => "NOT_RADIAL",
            TopologyCode::Disconnected => "DISCONNECTED",
            TopologyCode::TransformerDirection => "TRANSFORMER_DIRECTION",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopologyIssue {
    pub position: Position,
    pub code: TopologyCode,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("network is not a radial tree ({} problem(s), first: {})", .0.len(), .0[0].message)]
pub struct TopologyError(pub Vec<TopologyIssue>);

fn ref_name<'a>(o: &'a GridObject, key: &str) -> Option<&'a str> {
    o.get(key).and_then(|v| v.as_text().ok())
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[rb] = ra;
        true
    }
}

/// Builds the index, or lists every topology problem found. Elements with
/// missing or dangling terminals are skipped here; reference checks in
/// validation report them.
pub fn analyze_network(model: &ScenarioModel) -> (Option<NetworkIndex>, Vec<TopologyIssue>) {
    let mut issues = Vec::new();
    let mut buses = Vec::new();
    let mut bus_lookup = BTreeMap::new();
    let mut bus_pos = Vec::new();
    for o in model.objects.iter().filter(|o| o.class.is_bus()) {
        bus_lookup.entry(o.name.clone()).or_insert(buses.len());
        bus_pos.push(o.position);
        buses.push(Bus {
            name: o.name.clone(),
            class: o.class,
            nominal_voltage: o
                .get("nominal_voltage")
                .and_then(|v| v.as_quantity(UnitClass::Voltage).ok())
                .unwrap_or(0.0),
        });
    }

    // A model with no electrical network at all is valid and has no index.
    if buses.is_empty() && !model.objects.iter().any(|o| o.class.is_branch()) {
        return (None, issues);
    }

    let sources: Vec<usize> = model
        .objects
        .iter()
        .filter(|o| o.class.is_bus())
        .enumerate()
        .filter(|(_, o)| o.get("bustype").and_then(|v| v.as_word().ok()) == Some("SWING"))
        .map(|(i, _)| i)
        .collect();
    match sources.as_slice() {
        [] => issues.push(TopologyIssue {
            position: Position::default(),
            code: TopologyCode::NoSource,
            message: "no bus has bustype SWING".into(),
        }),
        [_] => {}
        [_, rest @ ..] => {
            for &i in rest {
                issues.push(TopologyIssue {
                    position: bus_pos[i],
                    code: TopologyCode::MultipleSources,
                    message: format!("'{}' is a second SWING bus", buses[i].name),
                });
            }
        }
    }

    // Undirected candidate edges, declared from -> to.
    let mut raw: Vec<(Edge, Position)> = Vec::new();
    for o in &model.objects {
        if o.class.is_branch() {
            let ends = ref_name(o, "from").zip(ref_name(o, "to"));
            let Some((from, to)) =
                ends.and_then(|(f, t)| Some((*bus_lookup.get(f)?, *bus_lookup.get(t)?)))
            else {
                continue;
            };
            let impedance = o
                .get("impedance")
                .and_then(|v| v.as_impedance().ok())
                .map_or(Complex64::new(0.0, 0.0), |(r, x)| Complex64::new(r, x));
            let ratio = if o.class == ObjectClass::Transformer {
                o.get("ratio")
                    .and_then(|v| v.as_scalar().ok())
                    .filter(|r| *r > 0.0)
                    .unwrap_or(1.0)
            } else {
                1.0
            };
            let status = o
                .get("status")
                .and_then(|v| v.as_word().ok())
                .and_then(LineStatus::parse)
                .unwrap_or(LineStatus::Closed);
            raw.push((
                Edge {
                    name: o.name.clone(),
                    class: Some(o.class),
                    from,
                    to,
                    impedance,
                    ratio,
                    initial_status: status,
                },
                o.position,
            ));
        } else if o.class.is_bus() {
            if let Some(&p) = ref_name(o, "parent").and_then(|p| bus_lookup.get(p)) {
                let child = bus_lookup[&o.name];
                raw.push((
                    Edge {
                        name: format!("{}:parent", o.name),
                        class: None,
                        from: p,
                        to: child,
                        impedance: Complex64::new(0.0, 0.0),
                        ratio: 1.0,
                        initial_status: LineStatus::Closed,
                    },
                    o.position,
                ));
            }
        }
    }

    let mut uf = UnionFind((0..buses.len()).collect());
    let mut edges = Vec::new();
    let mut edge_pos = Vec::new();
    for (e, pos) in raw {
        if e.from == e.to || !uf.union(e.from, e.to) {
            issues.push(TopologyIssue {
                position: pos,
                code: TopologyCode::NotRadial,
                message: format!("'{}' closes a loop", e.name),
            });
        } else {
            edges.push(e);
            edge_pos.push(pos);
        }
    }

    let root = match sources.first() {
        Some(&r) => r,
        None => return (None, issues),
    };

    let n = buses.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.from].push(i);
        adjacency[e.to].push(i);
    }
    let mut parent_edge = vec![None; n];
    let mut children = vec![Vec::new(); n];
    let mut depth = vec![0usize; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(b) = queue.pop_front() {
        order.push(b);
        for &ei in &adjacency[b] {
            let e = &mut edges[ei];
            let other = if e.from == b { e.to } else { e.from };
            if seen[other] {
                continue;
            }
            if e.from != b {
                if e.class == Some(ObjectClass::Transformer) {
                    issues.push(TopologyIssue {
                        position: edge_pos[ei],
                        code: TopologyCode::TransformerDirection,
                        message: format!("transformer '{}' has its 'from' side downstream", e.name),
                    });
                }
                std::mem::swap(&mut e.from, &mut e.to);
            }
            seen[other] = true;
            parent_edge[other] = Some(ei);
            children[b].push(ei);
            depth[other] = depth[b] + 1;
            queue.push_back(other);
        }
    }
    for i in 0..n {
        if !seen[i] {
            issues.push(TopologyIssue {
                position: bus_pos[i],
                code: TopologyCode::Disconnected,
                message: format!("'{}' is not connected to the source", buses[i].name),
            });
        }
    }

    let mut attachment: BTreeMap<String, usize> = BTreeMap::new();
    let mut loads = vec![Vec::new(); n];
    // Parents are resolved in dependency order: houses and inverters sit on
    // buses, appliances on houses, panels on inverters.
    let tiers: [&[ObjectClass]; 2] = [
        &[ObjectClass::House, ObjectClass::Inverter],
        &[
            ObjectClass::Zipload,
            ObjectClass::Waterheater,
            ObjectClass::Solar,
        ],
    ];
    for tier in tiers {
        for o in model.objects.iter().filter(|o| tier.contains(&o.class)) {
            let Some(parent) = ref_name(o, "parent") else {
                continue;
            };
            let bus = bus_lookup
                .get(parent)
                .or_else(|| attachment.get(parent))
                .copied();
            if let Some(b) = bus {
                attachment.insert(o.name.clone(), b);
                loads[b].push(o.name.clone());
            }
        }
    }

    let edge_lookup = edges
        .iter()
        .enumerate()
        .map(|(i, e)| (e.name.clone(), i))
        .collect();
    let index = NetworkIndex {
        buses,
        edges,
        root,
        parent_edge,
        children,
        order,
        depth,
        loads,
        bus_lookup,
        edge_lookup,
        attachment,
    };
    (Some(index), issues)
}

/// Parent/child adjacency, breadth-first order and load attachment for a
/// validated model.
pub fn build_network_index(model: &ScenarioModel) -> Result<NetworkIndex, TopologyError> {
    match analyze_network(model) {
        (Some(index), issues) if issues.is_empty() => Ok(index),
        (_, issues) => Err(TopologyError(issues)),
    }
}

impl NetworkIndex {
    pub fn bus(&self, name: &str) -> Option<usize> {
        self.bus_lookup.get(name).copied()
    }

    pub fn edge(&self, name: &str) -> Option<usize> {
        self.edge_lookup.get(name).copied()
    }

    /// Bus a load object (house, appliance, inverter, panel) draws from.
    pub fn attachment(&self, load: &str) -> Option<usize> {
        self.attachment.get(load).copied()
    }

    pub fn max_depth_of(&self, class: ObjectClass) -> Option<usize> {
        self.buses
            .iter()
            .enumerate()
            .filter(|(_, b)| b.class == class)
            .map(|(i, _)| self.depth[i])
            .max()
    }

    /// Names of buses, named branches and load objects that are not
    /// energized, sorted. A branch counts as de-energized when its upstream
    /// bus is.
    pub fn deenergized_objects(&self, energized: &[bool]) -> Vec<String> {
        let mut out = Vec::new();
        for (i, b) in self.buses.iter().enumerate() {
            if !energized[i] {
                out.push(b.name.clone());
                out.extend(self.loads[i].iter().cloned());
            }
        }
        for e in &self.edges {
            if e.class.is_some() && !energized[e.from] {
                out.push(e.name.clone());
            }
        }
        out.sort();
        out
    }
}
