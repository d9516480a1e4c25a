//! Independent checkers used by the test suites. Nothing here touches the
//! LP solver or the shortest-path code under test.

mod milp;
mod oracle;

use std::collections::BTreeMap;

use thiserror::Error;

pub use milp::brute_force_milp;
pub use oracle::{oracle_design_search, OracleCaps, OracleSolution, DEFAULT_ORACLE_LIMIT};

use crate::design::Placement;
use crate::operation::OperationPlan;
use crate::topology::{DemandMatrix, FailureScenario, NodeId, RouterId, SpanId, Topology};

const TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("walk is not connected at {0}")]
    Disconnected(String),
    #[error("search space of {size} placements exceeds the limit of {limit}")]
    TooLarge { size: f64, limit: f64 },
    #[error("unsupported instance: {0}")]
    Unsupported(String),
}

/// True iff every regen-free stretch of the walk, endpoints included, is
/// within the regen distance. Uses the shortest surviving span between
/// consecutive nodes.
pub fn check_regen_feasible_path(
    topo: &Topology,
    scenario: FailureScenario,
    node_path: &[NodeId],
    regen_nodes: &[NodeId],
) -> Result<bool, VerifyError> {
    let mut run = 0.0;
    for (i, w) in node_path.windows(2).enumerate() {
        let miles = topo
            .spans()
            .iter()
            .enumerate()
            .filter(|(s, sp)| {
                scenario.span_alive(SpanId(*s)) && sp.touches(w[0]) && sp.other(w[0]) == w[1]
            })
            .map(|(_, sp)| sp.miles)
            .fold(f64::INFINITY, f64::min);
        if !miles.is_finite() {
            return Err(VerifyError::Disconnected(format!(
                "{}-{}",
                topo.node(w[0]).name,
                topo.node(w[1]).name
            )));
        }
        if i > 0 && regen_nodes.contains(&w[0]) {
            run = 0.0;
        }
        run += miles;
        if run > topo.regen_dist() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Node sequence visited by following `spans` from `start`.
pub fn span_walk(
    topo: &Topology,
    start: NodeId,
    spans: &[SpanId],
) -> Result<Vec<NodeId>, VerifyError> {
    let mut nodes = vec![start];
    let mut at = start;
    for &s in spans {
        let sp = topo.span(s);
        if !sp.touches(at) {
            return Err(VerifyError::Disconnected(format!(
                "{} does not touch span {}",
                topo.node(at).name,
                topo.span_label(s)
            )));
        }
        at = sp.other(at);
        nodes.push(at);
    }
    Ok(nodes)
}

/// Problems found in a plan's lightpaths: disconnected or dead spans,
/// regens off the walk or out of order, or stretches beyond the regen
/// distance.
pub fn check_plan_chains(topo: &Topology, plan: &OperationPlan) -> Vec<String> {
    let mut out = Vec::new();
    for pl in &plan.links {
        let source = topo.home(pl.link.a);
        let sink = topo.home(pl.link.b);
        let lname = format!(
            "{}-{}",
            topo.router(pl.link.a).name,
            topo.router(pl.link.b).name
        );
        if source == sink {
            continue;
        }
        if pl.strands.iter().map(|s| s.units).sum::<u32>() < pl.capacity {
            out.push(format!(
                "link {lname}: strands carry less than its capacity"
            ));
        }
        for s in &pl.strands {
            let walk = match span_walk(topo, source, &s.spans) {
                Ok(w) => w,
                Err(e) => {
                    out.push(format!("link {lname}: {e}"));
                    continue;
                }
            };
            if walk.last() != Some(&sink) {
                out.push(format!("link {lname}: walk does not end at its far node"));
            }
            if s.spans.iter().any(|&sp| !plan.scenario.span_alive(sp)) {
                out.push(format!("link {lname}: uses a failed span"));
            }
            let mut pos = 0;
            for r in &s.regens {
                match walk[pos..].iter().position(|n| n == r) {
                    Some(p) => pos += p,
                    None => out.push(format!(
                        "link {lname}: regen {} is not on the walk",
                        topo.node(*r).name
                    )),
                }
            }
            match check_regen_feasible_path(topo, plan.scenario, &walk, &s.regens) {
                Ok(true) => {}
                Ok(false) => out.push(format!(
                    "link {lname}: a stretch exceeds the regen distance"
                )),
                Err(e) => out.push(format!("link {lname}: {e}")),
            }
        }
    }
    out
}

/// Equipment overruns: external capacity per router against tails,
/// colocated capacity against ports, interior regens against regens.
pub fn check_plan_usage(
    topo: &Topology,
    plan: &OperationPlan,
    placement: &Placement,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut external = vec![0u32; topo.routers().len()];
    let mut intra = vec![0u32; topo.routers().len()];
    let mut regens = vec![0u32; topo.nodes().len()];
    for pl in &plan.links {
        let same = topo.home(pl.link.a) == topo.home(pl.link.b);
        for r in [pl.link.a, pl.link.b] {
            if !plan.scenario.router_alive(r) {
                out.push(format!("link uses failed router {}", topo.router(r).name));
            }
            if same {
                intra[r.0] += pl.capacity;
            } else {
                external[r.0] += pl.capacity;
            }
        }
        for s in &pl.strands {
            for n in &s.regens {
                regens[n.0] += s.units;
            }
        }
    }
    for r in topo.router_ids() {
        let name = &topo.router(r).name;
        if external[r.0] > placement.tails[r.0] {
            out.push(format!(
                "router {name}: {} units over {} tails",
                external[r.0], placement.tails[r.0]
            ));
        }
        if intra[r.0] > placement.ports[r.0] {
            out.push(format!(
                "router {name}: {} units over {} ports",
                intra[r.0], placement.ports[r.0]
            ));
        }
    }
    for n in topo.node_ids() {
        if regens[n.0] > placement.regens[n.0] {
            out.push(format!(
                "node {}: {} regens used, {} placed",
                topo.node(n).name,
                regens[n.0],
                placement.regens[n.0]
            ));
        }
    }
    out
}

/// Conservation at transit routers, full delivery at the end nodes, and
/// per-direction capacity, all within 1e-6.
pub fn check_flow_conservation(
    topo: &Topology,
    plan: &OperationPlan,
    demands: &DemandMatrix,
) -> Vec<String> {
    let f = plan.scenario;
    let mut out = Vec::new();
    let mut net: BTreeMap<(NodeId, NodeId), Vec<f64>> = BTreeMap::new();
    let mut directed: BTreeMap<(RouterId, RouterId), f64> = BTreeMap::new();
    for e in &plan.flows {
        if demands.get(e.src, e.dst) <= 0.0 {
            out.push(format!(
                "flow for {}>{} which is not a demand",
                topo.node(e.src).name,
                topo.node(e.dst).name
            ));
            continue;
        }
        let v = net
            .entry((e.src, e.dst))
            .or_insert_with(|| vec![0.0; topo.routers().len()]);
        v[e.from.0] += e.units;
        v[e.to.0] -= e.units;
        *directed.entry((e.from, e.to)).or_default() += e.units;
        if e.units < -TOL {
            out.push("negative flow".into());
        }
    }
    for ((a, b), units) in directed {
        let cap = plan
            .links
            .iter()
            .filter(|l| (l.link.a == a && l.link.b == b) || (l.link.a == b && l.link.b == a))
            .map(|l| l.capacity as f64)
            .sum::<f64>();
        if units > cap + TOL {
            out.push(format!(
                "{}>{} carries {units} over capacity {cap}",
                topo.router(a).name,
                topo.router(b).name
            ));
        }
    }
    let live_at = |n: NodeId| -> Vec<RouterId> {
        topo.routers_at(n)
            .iter()
            .copied()
            .filter(|&r| f.router_alive(r))
            .collect()
    };
    for (s, t, d) in demands.iter() {
        let (rs, rt) = (live_at(s), live_at(t));
        let zero = vec![0.0; topo.routers().len()];
        let v = net.get(&(s, t)).unwrap_or(&zero);
        let dname = format!("{}>{}", topo.node(s).name, topo.node(t).name);
        let served = !rs.is_empty() && !rt.is_empty();
        for r in topo.router_ids() {
            let x = v[r.0];
            let at_end = rs.contains(&r) || rt.contains(&r);
            if !at_end && x.abs() > TOL {
                out.push(format!(
                    "{dname}: imbalance {x} at router {}",
                    topo.router(r).name
                ));
            }
            if rs.contains(&r) && x < -TOL {
                out.push(format!(
                    "{dname}: source router {} absorbs {}",
                    topo.router(r).name,
                    -x
                ));
            }
            if rt.contains(&r) && x > TOL {
                out.push(format!(
                    "{dname}: sink router {} emits {x}",
                    topo.router(r).name
                ));
            }
        }
        if served {
            let sent: f64 = rs.iter().map(|r| v[r.0]).sum();
            let got: f64 = -rt.iter().map(|r| v[r.0]).sum::<f64>();
            if (sent - d).abs() > TOL {
                out.push(format!(
                    "{dname}: sends {sent} of {d} at {}",
                    topo.node(s).name
                ));
            }
            if (got - d).abs() > TOL {
                out.push(format!(
                    "{dname}: receives {got} of {d} at {}",
                    topo.node(t).name
                ));
            }
        }
    }
    out
}
