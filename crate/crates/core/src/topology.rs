//! Physical layer: nodes, routers, fiber spans, demands and equipment costs.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::ModelError;

/// Default maximum unregenerated reach, in miles.
pub const DEFAULT_REGEN_DIST: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RouterId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpanId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// Houses one or more IP routers; can also pass light through.
    Ip,
    /// ROADM-only site.
    Optical,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
}

#[derive(Debug, Clone)]
pub struct Router {
    pub name: String,
    pub home: NodeId,
}

/// Bidirectional fiber between two adjacent sites.
#[derive(Debug, Clone, Copy)]
pub struct Span {
    pub a: NodeId,
    pub b: NodeId,
    pub miles: f64,
}

impl Span {
    pub fn other(&self, n: NodeId) -> NodeId {
        if n == self.a {
            self.b
        } else {
            self.a
        }
    }

    pub fn touches(&self, n: NodeId) -> bool {
        self.a == n || self.b == n
    }
}

/// Validated optical topology. Immutable once built.
#[derive(Debug, Clone)]
pub struct Topology {
    nodes: Vec<Node>,
    routers: Vec<Router>,
    spans: Vec<Span>,
    regen_dist: f64,
    node_index: HashMap<String, NodeId>,
    router_index: HashMap<String, RouterId>,
    /// Routers per node, in declaration order.
    housed: Vec<Vec<RouterId>>,
    /// Incident spans per node.
    incident: Vec<Vec<SpanId>>,
}

impl Topology {
    /// Builds a topology from names. IP nodes are declared first, so their
    /// `NodeId`s precede those of optical-only nodes.
    pub fn new<S: AsRef<str>>(
        ip_nodes: &[S],
        optical_nodes: &[S],
        routers: &[(S, S)],
        spans: &[(S, S, f64)],
        regen_dist: f64,
    ) -> Result<Self, ModelError> {
        let mut nodes = Vec::new();
        let mut node_index = HashMap::new();
        let declared = ip_nodes
            .iter()
            .map(|n| (n, NodeKind::Ip))
            .chain(optical_nodes.iter().map(|n| (n, NodeKind::Optical)));
        for (name, kind) in declared {
            let name = name.as_ref();
            if name.is_empty() {
                return Err(ModelError::invalid("node ids must be non-empty"));
            }
            if node_index
                .insert(name.to_string(), NodeId(nodes.len()))
                .is_some()
            {
                return Err(ModelError::invalid(format!("duplicate node id `{name}`")));
            }
            nodes.push(Node {
                name: name.to_string(),
                kind,
            });
        }

        if !(regen_dist.is_finite() && regen_dist > 0.0) {
            return Err(ModelError::invalid(format!(
                "regen_dist must be positive, got {regen_dist}"
            )));
        }

        let mut router_list = Vec::new();
        let mut router_index = HashMap::new();
        let mut housed = vec![Vec::new(); nodes.len()];
        for (name, home) in routers {
            let (name, home) = (name.as_ref(), home.as_ref());
            let Some(&home_id) = node_index.get(home) else {
                return Err(ModelError::invalid(format!(
                    "router `{name}` is homed at unknown node `{home}`"
                )));
            };
            if nodes[home_id.0].kind != NodeKind::Ip {
                return Err(ModelError::invalid(format!(
                    "router `{name}` is homed at optical-only node `{home}`"
                )));
            }
            if node_index.contains_key(name) {
                return Err(ModelError::invalid(format!(
                    "router id `{name}` collides with a node id"
                )));
            }
            let id = RouterId(router_list.len());
            if router_index.insert(name.to_string(), id).is_some() {
                return Err(ModelError::invalid(format!("duplicate router id `{name}`")));
            }
            housed[home_id.0].push(id);
            router_list.push(Router {
                name: name.to_string(),
                home: home_id,
            });
        }
        for (i, node) in nodes.iter().enumerate() {
            if node.kind == NodeKind::Ip && housed[i].is_empty() {
                return Err(ModelError::invalid(format!(
                    "IP node `{}` houses no router",
                    node.name
                )));
            }
        }

        let mut span_list = Vec::new();
        let mut incident = vec![Vec::new(); nodes.len()];
        for (u, v, miles) in spans {
            let (u, v) = (u.as_ref(), v.as_ref());
            let lookup = |n: &str| {
                node_index.get(n).copied().ok_or_else(|| {
                    ModelError::invalid(format!("span endpoint `{n}` is not a node"))
                })
            };
            let (a, b) = (lookup(u)?, lookup(v)?);
            if a == b {
                return Err(ModelError::invalid(format!("span {u}-{v} is a self loop")));
            }
            if !(miles.is_finite() && *miles > 0.0) {
                return Err(ModelError::invalid(format!(
                    "span {u}-{v} has non-positive length {miles}"
                )));
            }
            let id = SpanId(span_list.len());
            incident[a.0].push(id);
            incident[b.0].push(id);
            span_list.push(Span {
                a,
                b,
                miles: *miles,
            });
        }

        let topo = Topology {
            nodes,
            routers: router_list,
            spans: span_list,
            regen_dist,
            node_index,
            router_index,
            housed,
            incident,
        };
        topo.check_connected()?;
        Ok(topo)
    }

    fn check_connected(&self) -> Result<(), ModelError> {
        if self.nodes.is_empty() {
            return Err(ModelError::invalid("topology has no nodes"));
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &s in &self.incident[u] {
                let v = self.spans[s.0].other(NodeId(u)).0;
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(i) => Err(ModelError::invalid(format!(
                "span graph is disconnected: `{}` is unreachable from `{}`",
                self.nodes[i].name, self.nodes[0].name
            ))),
            None => Ok(()),
        }
    }

    /// Same topology with a different regeneration reach.
    pub fn with_regen_dist(&self, regen_dist: f64) -> Result<Self, ModelError> {
        if !(regen_dist.is_finite() && regen_dist > 0.0) {
            return Err(ModelError::invalid(format!(
                "regen_dist must be positive, got {regen_dist}"
            )));
        }
        Ok(Topology {
            regen_dist,
            ..self.clone()
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn routers(&self) -> &[Router] {
        &self.routers
    }

    pub fn spans(&self) -> &[Span] {
        &self.spans
    }

    pub fn regen_dist(&self) -> f64 {
        self.regen_dist
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn router(&self, id: RouterId) -> &Router {
        &self.routers[id.0]
    }

    pub fn span(&self, id: SpanId) -> &Span {
        &self.spans[id.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn router_id(&self, name: &str) -> Option<RouterId> {
        self.router_index.get(name).copied()
    }

    /// Finds the span joining `u` and `v` in either orientation.
    pub fn span_between(&self, u: NodeId, v: NodeId) -> Option<SpanId> {
        self.incident[u.0]
            .iter()
            .copied()
            .find(|&s| self.spans[s.0].other(u) == v)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn router_ids(&self) -> impl Iterator<Item = RouterId> + '_ {
        (0..self.routers.len()).map(RouterId)
    }

    pub fn ip_node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.node_ids()
            .filter(|n| self.nodes[n.0].kind == NodeKind::Ip)
    }

    pub fn routers_at(&self, node: NodeId) -> &[RouterId] {
        &self.housed[node.0]
    }

    pub fn incident_spans(&self, node: NodeId) -> &[SpanId] {
        &self.incident[node.0]
    }

    pub fn home(&self, r: RouterId) -> NodeId {
        self.routers[r.0].home
    }

    /// True when `r` shares its IP node with at least one other router.
    pub fn has_colocated(&self, r: RouterId) -> bool {
        self.housed[self.home(r).0].len() >= 2
    }

    pub fn span_label(&self, s: SpanId) -> String {
        let span = &self.spans[s.0];
        format!(
            "{}-{}",
            self.nodes[span.a.0].name, self.nodes[span.b.0].name
        )
    }
}

/// Traffic between IP nodes in 100 Gbps units.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandMatrix {
    entries: BTreeMap<(NodeId, NodeId), f64>,
}

impl DemandMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `units` to the (src, dst) entry.
    pub fn add(
        &mut self,
        topo: &Topology,
        src: NodeId,
        dst: NodeId,
        units: f64,
    ) -> Result<(), ModelError> {
        if src == dst {
            return Err(ModelError::invalid(format!(
                "self demand at `{}`",
                topo.node(src).name
            )));
        }
        for n in [src, dst] {
            if topo.node(n).kind != NodeKind::Ip {
                return Err(ModelError::invalid(format!(
                    "demand endpoint `{}` is not an IP node",
                    topo.node(n).name
                )));
            }
        }
        if !(units.is_finite() && units >= 0.0) {
            return Err(ModelError::invalid(format!(
                "demand {}->{} must be a nonnegative number, got {units}",
                topo.node(src).name,
                topo.node(dst).name
            )));
        }
        if units > 0.0 {
            *self.entries.entry((src, dst)).or_insert(0.0) += units;
        }
        Ok(())
    }

    /// Nonzero entries in (src, dst) order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.entries.iter().map(|(&(s, t), &d)| (s, t, d))
    }

    pub fn get(&self, src: NodeId, dst: NodeId) -> f64 {
        self.entries.get(&(src, dst)).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

/// Per-unit equipment prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostModel {
    pub tail: f64,
    pub regen: f64,
    pub port: f64,
}

impl CostModel {
    pub fn new(tail: f64, regen: f64, port: f64) -> Result<Self, ModelError> {
        for (what, c) in [("tail", tail), ("regen", regen), ("port", port)] {
            if !(c.is_finite() && c >= 0.0) {
                return Err(ModelError::invalid(format!(
                    "{what} cost must be nonnegative, got {c}"
                )));
            }
        }
        Ok(CostModel { tail, regen, port })
    }

    pub fn unit() -> Self {
        CostModel {
            tail: 1.0,
            regen: 1.0,
            port: 1.0,
        }
    }
}

impl Default for CostModel {
    fn default() -> Self {
        Self::unit()
    }
}

/// One element of the robustness set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FailureScenario {
    NoFailure,
    SpanCut(SpanId),
    RouterDown(RouterId),
}

impl FailureScenario {
    pub fn validate(&self, topo: &Topology) -> Result<(), ModelError> {
        match *self {
            FailureScenario::NoFailure => Ok(()),
            FailureScenario::SpanCut(s) if s.0 < topo.spans().len() => Ok(()),
            FailureScenario::RouterDown(r) if r.0 < topo.routers().len() => Ok(()),
            other => Err(ModelError::invalid(format!(
                "scenario {other:?} references a missing element"
            ))),
        }
    }

    pub fn span_alive(&self, s: SpanId) -> bool {
        *self != FailureScenario::SpanCut(s)
    }

    pub fn router_alive(&self, r: RouterId) -> bool {
        *self != FailureScenario::RouterDown(r)
    }

    /// Machine-readable kind: `no_failure`, `span_cut` or `router_down`.
    pub fn kind(&self) -> &'static str {
        match self {
            FailureScenario::NoFailure => "no_failure",
            FailureScenario::SpanCut(_) => "span_cut",
            FailureScenario::RouterDown(_) => "router_down",
        }
    }

    /// Failed element id (`U-V` for spans, router name), empty for no failure.
    pub fn element(&self, topo: &Topology) -> String {
        match *self {
            FailureScenario::NoFailure => String::new(),
            FailureScenario::SpanCut(s) => topo.span_label(s),
            FailureScenario::RouterDown(r) => topo.router(r).name.clone(),
        }
    }

    pub fn display<'a>(&'a self, topo: &'a Topology) -> ScenarioDisplay<'a> {
        ScenarioDisplay {
            scenario: self,
            topo,
        }
    }

    /// Inverse of `kind` + `element`.
    pub fn parse(topo: &Topology, kind: &str, element: &str) -> Result<Self, ModelError> {
        match kind {
            "no_failure" => Ok(FailureScenario::NoFailure),
            "span_cut" => {
                let (u, v) = element
                    .split_once('-')
                    .ok_or_else(|| ModelError::invalid(format!("bad span id `{element}`")))?;
                let (u, v) = match (topo.node_id(u), topo.node_id(v)) {
                    (Some(u), Some(v)) => (u, v),
                    _ => return Err(ModelError::invalid(format!("unknown span `{element}`"))),
                };
                topo.span_between(u, v)
                    .map(FailureScenario::SpanCut)
                    .ok_or_else(|| ModelError::invalid(format!("unknown span `{element}`")))
            }
            "router_down" => topo
                .router_id(element)
                .map(FailureScenario::RouterDown)
                .ok_or_else(|| ModelError::invalid(format!("unknown router `{element}`"))),
            other => Err(ModelError::invalid(format!(
                "unknown scenario kind `{other}`"
            ))),
        }
    }
}

pub struct ScenarioDisplay<'a> {
    scenario: &'a FailureScenario,
    topo: &'a Topology,
}

impl fmt::Display for ScenarioDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.scenario {
            FailureScenario::NoFailure => write!(f, "no failure"),
            FailureScenario::SpanCut(_) => {
                write!(f, "span {} cut", self.scenario.element(self.topo))
            }
            FailureScenario::RouterDown(_) => {
                write!(f, "router {} down", self.scenario.element(self.topo))
            }
        }
    }
}

/// No failure first, then every span in declaration order, then every router.
pub fn enumerate_failures(topo: &Topology) -> Vec<FailureScenario> {
    std::iter::once(FailureScenario::NoFailure)
        .chain((0..topo.spans().len()).map(|s| FailureScenario::SpanCut(SpanId(s))))
        .chain((0..topo.routers().len()).map(|r| FailureScenario::RouterDown(RouterId(r))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn toy_has_thirteen_scenarios() {
        let (topo, _, _) = fixtures::toy2x5();
        let all = enumerate_failures(&topo);
        assert_eq!(all.len(), 13);
        assert_eq!(all[0], FailureScenario::NoFailure);
        let mut dedup = all.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), all.len());
    }

    #[test]
    fn single_node_has_two_scenarios() {
        let topo = Topology::new(&["A"], &[], &[("r", "A")], &[], 1000.0).unwrap();
        assert_eq!(enumerate_failures(&topo).len(), 2);
    }

    #[test]
    fn four_node_twelve_span_network_has_21_scenarios() {
        let ip = ["A", "B", "C", "D"];
        let opt = ["o1", "o2", "o3", "o4"];
        let routers: Vec<(String, String)> = ip
            .iter()
            .flat_map(|n| {
                [
                    (format!("{n}1"), n.to_string()),
                    (format!("{n}2"), n.to_string()),
                ]
            })
            .collect();
        let spans = [
            ("A", "o1", 300.0),
            ("o1", "B", 300.0),
            ("B", "o2", 300.0),
            ("o2", "C", 300.0),
            ("C", "o3", 300.0),
            ("o3", "D", 300.0),
            ("D", "o4", 300.0),
            ("o4", "A", 300.0),
            ("o1", "o2", 300.0),
            ("o2", "o3", 300.0),
            ("o3", "o4", 300.0),
            ("o4", "o1", 300.0),
        ];
        let routers: Vec<(&str, &str)> = routers
            .iter()
            .map(|(a, b)| (a.as_str(), b.as_str()))
            .collect();
        let topo = Topology::new(&ip, &opt, &routers, &spans, 1000.0).unwrap();
        assert_eq!(enumerate_failures(&topo).len(), 21);
    }

    #[test]
    fn rejects_bad_topologies() {
        let r = [("r", "A")];
        assert!(Topology::new(&["A", "A"], &[], &r, &[], 1000.0).is_err());
        assert!(Topology::new(&["A"], &["o"], &[("r", "o")], &[("A", "o", 1.0)], 1000.0).is_err());
        assert!(Topology::new(&["A"], &["o"], &r, &[("A", "o", 0.0)], 1000.0).is_err());
        assert!(Topology::new(&["A"], &["o"], &r, &[("A", "x", 5.0)], 1000.0).is_err());
        // disconnected
        assert!(Topology::new(&["A"], &["o"], &r, &[], 1000.0).is_err());
        // IP node without router
        assert!(Topology::new(&["A", "B"], &[], &r, &[("A", "B", 5.0)], 1000.0).is_err());
    }

    #[test]
    fn demand_rules() {
        let (topo, _, _) = fixtures::toy2x5();
        let n1 = topo.node_id("N1").unwrap();
        let o1 = topo.node_id("O1").unwrap();
        let mut d = DemandMatrix::new();
        assert!(d.add(&topo, n1, n1, 1.0).is_err());
        assert!(d.add(&topo, n1, o1, 1.0).is_err());
        assert!(d.add(&topo, n1, topo.node_id("N2").unwrap(), -1.0).is_err());
        assert!(CostModel::new(1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn scenario_labels_round_trip() {
        let (topo, _, _) = fixtures::toy2x5();
        for f in enumerate_failures(&topo) {
            let back = FailureScenario::parse(&topo, f.kind(), &f.element(&topo)).unwrap();
            assert_eq!(back, f);
        }
    }
}
