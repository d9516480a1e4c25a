//! Per-scenario shortest distances over surviving spans.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};

use crate::topology::{FailureScenario, NodeId, SpanId, Topology};

/// Relative slack used when comparing summed mileages.
const MILES_EPS: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= MILES_EPS * a.abs().max(b.abs()).max(1.0)
}

/// All-pairs shortest mileage under one scenario. Unreachable pairs are
/// `None`.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    n: usize,
    scenario: FailureScenario,
    miles: Vec<f64>,
}

impl DistanceTable {
    pub fn scenario(&self) -> FailureScenario {
        self.scenario
    }

    pub fn get(&self, u: NodeId, v: NodeId) -> Option<f64> {
        let d = self.miles[u.0 * self.n + v.0];
        d.is_finite().then_some(d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .total_cmp(&self.0)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(topo: &Topology, scenario: FailureScenario, src: NodeId, out: &mut [f64]) {
    out.fill(f64::INFINITY);
    out[src.0] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry(0.0, src.0));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > out[u] {
            continue;
        }
        for &s in topo.incident_spans(NodeId(u)) {
            if !scenario.span_alive(s) {
                continue;
            }
            let span = topo.span(s);
            let v = span.other(NodeId(u)).0;
            let nd = d + span.miles;
            if nd < out[v] {
                out[v] = nd;
                heap.push(Entry(nd, v));
            }
        }
    }
}

/// Shortest distances between every node pair over the spans that survive
/// `scenario`. Router failures leave the optical layer untouched.
pub fn shortest_distances(topo: &Topology, scenario: FailureScenario) -> DistanceTable {
    let n = topo.nodes().len();
    let mut miles = vec![f64::INFINITY; n * n];
    for u in 0..n {
        dijkstra(topo, scenario, NodeId(u), &mut miles[u * n..(u + 1) * n]);
    }
    DistanceTable { n, scenario, miles }
}

/// Ordered pairs `(u, v)`, `u != v`, whose surviving shortest distance is
/// within the regeneration reach. The reach itself is admitted.
pub fn regen_adjacency(topo: &Topology, dist: &DistanceTable) -> BTreeSet<(NodeId, NodeId)> {
    let reach = topo.regen_dist();
    let mut out = BTreeSet::new();
    for u in topo.node_ids() {
        for v in topo.node_ids() {
            if u == v {
                continue;
            }
            if let Some(d) = dist.get(u, v) {
                if d <= reach {
                    out.insert((u, v));
                }
            }
        }
    }
    out
}

/// Shortest surviving span walk from `from` to `to`. Among equal-length
/// walks the one whose node-name sequence is lexicographically smallest wins.
pub fn shortest_path(
    topo: &Topology,
    dist: &DistanceTable,
    from: NodeId,
    to: NodeId,
) -> Option<(Vec<NodeId>, Vec<SpanId>)> {
    let scenario = dist.scenario();
    dist.get(from, to)?;
    let mut nodes = vec![from];
    let mut spans = Vec::new();
    let mut cur = from;
    while cur != to {
        let remaining = dist.get(cur, to)?;
        let mut best: Option<(NodeId, SpanId)> = None;
        for &s in topo.incident_spans(cur) {
            if !scenario.span_alive(s) {
                continue;
            }
            let span = topo.span(s);
            let next = span.other(cur);
            let Some(rest) = dist.get(next, to) else {
                continue;
            };
            if !close(span.miles + rest, remaining) || rest >= remaining {
                continue;
            }
            let better = match best {
                None => true,
                Some((b, bs)) => {
                    let (nn, bn) = (&topo.node(next).name, &topo.node(b).name);
                    nn < bn || (nn == bn && topo.span(s).miles < topo.span(bs).miles)
                }
            };
            if better {
                best = Some((next, s));
            }
        }
        let (next, s) = best?;
        nodes.push(next);
        spans.push(s);
        cur = next;
    }
    Some((nodes, spans))
}

/// Distance tables for a batch of scenarios.
pub fn distance_tables(
    topo: &Topology,
    scenarios: &[FailureScenario],
    exec: crate::par::Exec,
) -> Vec<DistanceTable> {
    crate::par::map(exec, scenarios, |&f| shortest_distances(topo, f))
}
