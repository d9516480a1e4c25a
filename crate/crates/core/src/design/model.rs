//! Builds the joint placement/operation ILP over a set of failure scenarios.
//!
//! Per scenario `f` the model carries:
//! * an integer capacity `X[l,f]` for every link `l` between two live
//!   routers (one variable per unordered pair; both directions share it);
//! * for external links, integer regen-chain counts `C[l,u>v,f]` on the
//!   scenario's regen-adjacent node pairs, forming a path system from the
//!   lower router's node `a` to the other endpoint's node `b`;
//! * continuous flows `Y[d,l,dir,f]` plus per-router injection and
//!   extraction of each served demand.
//!
//! Chain units leaving `a` exist only in the model (the transmitter itself
//! launches the signal), so they are not charged against `R[u]`.

use std::collections::{BTreeSet, VecDeque};

use crate::error::ModelError;
use crate::flow::{add_capacity_rows, add_flows, Delivery};
use crate::lp::{Comparator, LinearModel, SolveResult, VarId};
use crate::operation::{FlowEntry, OperationPlan, PlannedLink, Strand};
use crate::paths::{regen_adjacency, shortest_distances, DistanceTable};
use crate::topology::{CostModel, DemandMatrix, FailureScenario, NodeId, RouterId, Topology};

use super::{Link, Placement};

/// Equipment is branched on before link capacities, and those before
/// chain units.
const PRIORITY_EQUIPMENT: u32 = 2;
const PRIORITY_CAPACITY: u32 = 1;

/// How equipment enters the model.
#[derive(Debug, Clone, Copy)]
pub enum Equipment<'a> {
    /// `T`, `R`, `P` are decision variables added on top of `prior`, which
    /// is free.
    Place { prior: &'a Placement },
    /// Equipment is fixed; only operation variables remain.
    Fixed { placement: &'a Placement },
}

#[derive(Debug, Clone)]
pub struct LinkBlock {
    pub link: Link,
    /// Node of `link.a` (chain source) and of `link.b` (chain sink).
    pub source: NodeId,
    pub sink: NodeId,
    pub intra: bool,
    pub capacity: VarId,
    pub chain: Vec<(NodeId, NodeId, VarId)>,
    /// Per served demand: flow a→b and b→a.
    pub flows: Vec<[VarId; 2]>,
}

#[derive(Debug, Clone)]
pub struct ScenarioBlock {
    pub scenario: FailureScenario,
    pub links: Vec<LinkBlock>,
    /// Demands with a live router at both ends.
    pub served: Vec<(NodeId, NodeId, f64)>,
}

/// A built model plus the index needed to read solutions back.
#[derive(Debug, Clone)]
pub struct DesignModel {
    pub model: LinearModel,
    pub tails: Vec<Option<VarId>>,
    pub regens: Vec<Option<VarId>>,
    pub ports: Vec<Option<VarId>>,
    pub blocks: Vec<ScenarioBlock>,
}

/// Router pairs that can carry a link under `scenario`.
pub fn live_links(topo: &Topology, scenario: FailureScenario) -> Vec<Link> {
    let live: Vec<RouterId> = topo
        .router_ids()
        .filter(|&r| scenario.router_alive(r))
        .collect();
    let mut out = Vec::new();
    for (i, &a) in live.iter().enumerate() {
        for &b in &live[i + 1..] {
            out.push(Link::new(a, b));
        }
    }
    out
}

/// Demands whose source and destination both keep a live router.
pub fn served_demands(
    topo: &Topology,
    demands: &DemandMatrix,
    scenario: FailureScenario,
) -> Vec<(NodeId, NodeId, f64)> {
    let has_live = |n: NodeId| topo.routers_at(n).iter().any(|&r| scenario.router_alive(r));
    demands
        .iter()
        .filter(|&(s, t, _)| has_live(s) && has_live(t))
        .collect()
}

/// Regen-adjacent arcs that can lie on a chain from `source` to `sink`.
fn chain_arcs(
    adj: &BTreeSet<(NodeId, NodeId)>,
    n: usize,
    source: NodeId,
    sink: NodeId,
) -> Vec<(NodeId, NodeId)> {
    let usable = |&(u, v): &(NodeId, NodeId)| v != source && u != sink;
    let reach = |start: NodeId, forward: bool| {
        let mut seen = vec![false; n];
        seen[start.0] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            for arc in adj.iter().filter(|a| usable(a)) {
                let (from, to) = if forward { *arc } else { (arc.1, arc.0) };
                if from == x && !seen[to.0] {
                    seen[to.0] = true;
                    queue.push_back(to);
                }
            }
        }
        seen
    };
    let from_source = reach(source, true);
    let to_sink = reach(sink, false);
    adj.iter()
        .copied()
        .filter(|a| usable(a) && from_source[a.0 .0] && to_sink[a.1 .0])
        .collect()
}

fn sf(k: usize) -> String {
    format!("f{k}")
}

/// Builds the model for `scenarios`.
///
/// With [`Equipment::Place`] the objective is the cost of new equipment;
/// with [`Equipment::Fixed`] it is the total link capacity plus chain hops,
/// which keeps operation plans free of idle capacity.
pub fn build_design_model(
    topo: &Topology,
    demands: &DemandMatrix,
    scenarios: &[FailureScenario],
    costs: &CostModel,
    equipment: Equipment<'_>,
) -> Result<DesignModel, ModelError> {
    if scenarios.is_empty() {
        return Err(ModelError::invalid(
            "at least one failure scenario is required",
        ));
    }
    for f in scenarios {
        f.validate(topo)?;
    }
    let placement = match equipment {
        Equipment::Place { prior } | Equipment::Fixed { placement: prior } => prior,
    };
    placement.check_shape(topo)?;

    let mut m = LinearModel::new();
    let router_name = |r: RouterId| topo.router(r).name.as_str();
    let node_name = |n: NodeId| topo.node(n).name.as_str();

    let (tails, regens, ports) = match equipment {
        Equipment::Place { .. } => {
            let tails: Vec<_> = topo
                .router_ids()
                .map(|r| {
                    let v = m.add_var(format!("T[{}]", router_name(r)), 0.0, f64::INFINITY, true);
                    m.add_objective_term(v, costs.tail);
                    m.set_priority(v, PRIORITY_EQUIPMENT);
                    Some(v)
                })
                .collect();
            let regens: Vec<_> = topo
                .node_ids()
                .map(|u| {
                    let v = m.add_var(format!("R[{}]", node_name(u)), 0.0, f64::INFINITY, true);
                    m.add_objective_term(v, costs.regen);
                    m.set_priority(v, PRIORITY_EQUIPMENT);
                    Some(v)
                })
                .collect();
            let ports: Vec<_> = topo
                .router_ids()
                .map(|r| {
                    topo.has_colocated(r).then(|| {
                        let v =
                            m.add_var(format!("P[{}]", router_name(r)), 0.0, f64::INFINITY, true);
                        m.add_objective_term(v, costs.port);
                        m.set_priority(v, PRIORITY_EQUIPMENT);
                        v
                    })
                })
                .collect();
            (tails, regens, ports)
        }
        Equipment::Fixed { .. } => (
            vec![None; topo.routers().len()],
            vec![None; topo.nodes().len()],
            vec![None; topo.routers().len()],
        ),
    };
    let fixed = matches!(equipment, Equipment::Fixed { .. });

    let mut blocks = Vec::with_capacity(scenarios.len());
    for (k, &f) in scenarios.iter().enumerate() {
        let fk = sf(k);
        let dist = shortest_distances(topo, f);
        let adj = regen_adjacency(topo, &dist);
        let served = served_demands(topo, demands, f);

        let mut links = Vec::new();
        for link in live_links(topo, f) {
            let (source, sink) = (topo.home(link.a), topo.home(link.b));
            let intra = source == sink;
            let lname = format!("{},{}", router_name(link.a), router_name(link.b));
            let capacity = m.add_var(format!("X[{lname}|{fk}]"), 0.0, f64::INFINITY, true);
            m.set_priority(capacity, PRIORITY_CAPACITY);
            if fixed {
                m.add_objective_term(capacity, 1.0);
            }
            let mut chain = Vec::new();
            if !intra {
                for (u, v) in chain_arcs(&adj, topo.nodes().len(), source, sink) {
                    let c = m.add_var(
                        format!("C[{lname}|{}>{}|{fk}]", node_name(u), node_name(v)),
                        0.0,
                        f64::INFINITY,
                        true,
                    );
                    if fixed {
                        m.add_objective_term(c, 1.0);
                    }
                    chain.push((u, v, c));
                }
            }
            links.push(LinkBlock {
                link,
                source,
                sink,
                intra,
                capacity,
                chain,
                flows: Vec::new(),
            });
        }

        // Tails (and ports for intra-node links) cover terminated capacity.
        for r in topo.router_ids().filter(|&r| f.router_alive(r)) {
            for intra_side in [false, true] {
                if intra_side && !topo.has_colocated(r) {
                    continue;
                }
                let terms: Vec<_> = links
                    .iter()
                    .filter(|lb| lb.intra == intra_side && lb.link.touches(r))
                    .map(|lb| (lb.capacity, 1.0))
                    .collect();
                if terms.is_empty() {
                    continue;
                }
                let (kind, var, prior) = if intra_side {
                    ("ports", ports[r.0], placement.ports[r.0])
                } else {
                    ("tails", tails[r.0], placement.tails[r.0])
                };
                let mut terms = terms;
                if let Some(v) = var {
                    terms.push((v, -1.0));
                }
                m.add_constraint(
                    format!("{kind}[{}|{fk}]", router_name(r)),
                    terms,
                    Comparator::Le,
                    prior as f64,
                );
            }
        }

        // Regen chains: enough units out of the source node and into the
        // sink node, balanced everywhere else.
        for lb in links.iter().filter(|lb| !lb.intra) {
            let lname = format!("{},{}", router_name(lb.link.a), router_name(lb.link.b));
            let mut out_src: Vec<_> = lb
                .chain
                .iter()
                .filter(|c| c.0 == lb.source)
                .map(|c| (c.2, 1.0))
                .collect();
            out_src.push((lb.capacity, -1.0));
            m.add_constraint(
                format!("chain_src[{lname}|{fk}]"),
                out_src,
                Comparator::Ge,
                0.0,
            );
            let mut in_sink: Vec<_> = lb
                .chain
                .iter()
                .filter(|c| c.1 == lb.sink)
                .map(|c| (c.2, 1.0))
                .collect();
            in_sink.push((lb.capacity, -1.0));
            m.add_constraint(
                format!("chain_dst[{lname}|{fk}]"),
                in_sink,
                Comparator::Ge,
                0.0,
            );
            for u in topo.node_ids().filter(|&u| u != lb.source && u != lb.sink) {
                let mut terms = Vec::new();
                for &(x, y, c) in &lb.chain {
                    if x == u {
                        terms.push((c, 1.0));
                    }
                    if y == u {
                        terms.push((c, -1.0));
                    }
                }
                if !terms.is_empty() {
                    m.add_constraint(
                        format!("chain_bal[{lname}|{}|{fk}]", node_name(u)),
                        terms,
                        Comparator::Eq,
                        0.0,
                    );
                }
            }
        }

        // Regens placed at each node cover the chains hosted there.
        for u in topo.node_ids() {
            let mut terms: Vec<_> = links
                .iter()
                .filter(|lb| !lb.intra && lb.source != u)
                .flat_map(|lb| lb.chain.iter().filter(|c| c.0 == u).map(|c| (c.2, 1.0)))
                .collect();
            if terms.is_empty() {
                continue;
            }
            if let Some(v) = regens[u.0] {
                terms.push((v, -1.0));
            }
            m.add_constraint(
                format!("regens[{}|{fk}]", node_name(u)),
                terms,
                Comparator::Le,
                placement.regens[u.0] as f64,
            );
        }

        // Multicommodity flow.
        let link_ids: Vec<Link> = links.iter().map(|lb| lb.link).collect();
        let flows = add_flows(
            &mut m,
            topo,
            |r| f.router_alive(r),
            &served,
            &link_ids,
            &fk,
            Delivery::Full,
        );
        add_capacity_rows(
            &mut m,
            topo,
            &link_ids,
            &flows,
            |li| (vec![(links[li].capacity, 1.0)], 0.0),
            &fk,
        );
        for (lb, fl) in links.iter_mut().zip(flows) {
            lb.flows = fl;
        }

        blocks.push(ScenarioBlock {
            scenario: f,
            links,
            served,
        });
    }

    Ok(DesignModel {
        model: m,
        tails,
        regens,
        ports,
        blocks,
    })
}

/// Rounded cut-set rows: for every proper subset `S` of IP nodes, the
/// links crossing `S` must together carry the larger one-way demand across
/// it, rounded up since capacities are integral. They cut off fractional
/// points only.
pub fn add_cut_set_rows(dm: &mut DesignModel, topo: &Topology) {
    let ip: Vec<NodeId> = topo.ip_node_ids().collect();
    // Beyond this many IP nodes only singleton sets are used.
    const MAX_SUBSET_NODES: usize = 12;
    let as_set = |members: &[NodeId]| {
        let mut inside = vec![false; topo.nodes().len()];
        for n in members {
            inside[n.0] = true;
        }
        inside
    };
    let sets: Vec<Vec<bool>> = if ip.len() <= MAX_SUBSET_NODES {
        // A set and its complement give the same row, so the last IP node
        // always stays outside.
        let half = 1u32 << ip.len().saturating_sub(1);
        (1..half)
            .map(|mask| {
                let members: Vec<NodeId> = ip
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| mask & (1 << k) != 0)
                    .map(|(_, &n)| n)
                    .collect();
                as_set(&members)
            })
            .collect()
    } else {
        ip.iter().map(|&n| as_set(&[n])).collect()
    };
    for (k, block) in dm.blocks.iter().enumerate() {
        for (si, inside) in sets.iter().enumerate() {
            let (mut out, mut inn) = (0.0, 0.0);
            for &(s, t, d) in &block.served {
                match (inside[s.0], inside[t.0]) {
                    (true, false) => out += d,
                    (false, true) => inn += d,
                    _ => {}
                }
            }
            let need = (f64::max(out, inn) - crate::lp::TOL).ceil();
            if need <= 0.0 {
                continue;
            }
            let terms: Vec<_> = block
                .links
                .iter()
                .filter(|lb| inside[lb.source.0] != inside[lb.sink.0])
                .map(|lb| (lb.capacity, 1.0))
                .collect();
            dm.model
                .add_constraint(format!("cut[{si}|{}]", sf(k)), terms, Comparator::Ge, need);
        }
    }
}

impl DesignModel {
    /// New equipment chosen by a solution (zeros in fixed mode).
    pub fn placement(&self, result: &SolveResult) -> Placement {
        let read = |vars: &[Option<VarId>]| -> Vec<u32> {
            vars.iter()
                .map(|v| v.map_or(0, |v| result.int_value(v).max(0) as u32))
                .collect()
        };
        Placement {
            tails: read(&self.tails),
            regens: read(&self.regens),
            ports: read(&self.ports),
        }
    }

    /// Operation plan of scenario block `k`.
    pub fn plan(
        &self,
        topo: &Topology,
        k: usize,
        result: &SolveResult,
        dist: &DistanceTable,
    ) -> Result<OperationPlan, ModelError> {
        let block = &self.blocks[k];
        let mut links = Vec::new();
        let mut flows = Vec::new();
        for lb in &block.links {
            let capacity = result.int_value(lb.capacity).max(0) as u32;
            for (di, &(s, t, _)) in block.served.iter().enumerate() {
                // opposite flows of one demand cancel
                let net = result.value(lb.flows[di][0]) - result.value(lb.flows[di][1]);
                let (from, to) = if net >= 0.0 {
                    (lb.link.a, lb.link.b)
                } else {
                    (lb.link.b, lb.link.a)
                };
                if net.abs() > 1e-9 {
                    flows.push(FlowEntry {
                        src: s,
                        dst: t,
                        from,
                        to,
                        units: net.abs(),
                    });
                }
            }
            if capacity == 0 {
                continue;
            }
            let strands = if lb.intra {
                Vec::new()
            } else {
                let arcs: Vec<(NodeId, NodeId, u32)> = lb
                    .chain
                    .iter()
                    .map(|&(u, v, c)| (u, v, result.int_value(c).max(0) as u32))
                    .filter(|a| a.2 > 0)
                    .collect();
                let chains =
                    decompose_chains(&arcs, lb.source, lb.sink, capacity).ok_or_else(|| {
                        ModelError::malformed(format!(
                            "regen chain of link {}-{} does not carry {capacity} units",
                            topo.router(lb.link.a).name,
                            topo.router(lb.link.b).name
                        ))
                    })?;
                let mut strands = Vec::new();
                for (units, regens) in chains {
                    let spans = crate::operation::expand_link_path(
                        topo, dist, lb.source, lb.sink, &regens,
                    )?;
                    strands.push(Strand {
                        units,
                        regens,
                        spans,
                    });
                }
                strands
            };
            links.push(PlannedLink {
                link: lb.link,
                capacity,
                strands,
            });
        }
        Ok(OperationPlan {
            scenario: block.scenario,
            links,
            flows,
        })
    }
}

/// Peels `units` simple source→sink paths off an integer arc multiset and
/// groups identical ones. Returns the interior nodes of each path.
pub(crate) fn decompose_chains(
    arcs: &[(NodeId, NodeId, u32)],
    source: NodeId,
    sink: NodeId,
    units: u32,
) -> Option<Vec<(u32, Vec<NodeId>)>> {
    let mut left: Vec<(NodeId, NodeId, u32)> = arcs.to_vec();
    let mut out: Vec<(u32, Vec<NodeId>)> = Vec::new();
    for _ in 0..units {
        let path = simple_path(&left, source, sink)?;
        for w in path.windows(2) {
            let arc = left
                .iter_mut()
                .find(|a| a.0 == w[0] && a.1 == w[1] && a.2 > 0)
                .expect("path uses existing arcs");
            arc.2 -= 1;
        }
        let interior = path[1..path.len() - 1].to_vec();
        match out.iter_mut().find(|(_, r)| *r == interior) {
            Some(entry) => entry.0 += 1,
            None => out.push((1, interior)),
        }
    }
    Some(out)
}

fn simple_path(
    arcs: &[(NodeId, NodeId, u32)],
    source: NodeId,
    sink: NodeId,
) -> Option<Vec<NodeId>> {
    fn go(
        arcs: &[(NodeId, NodeId, u32)],
        at: NodeId,
        sink: NodeId,
        path: &mut Vec<NodeId>,
    ) -> bool {
        if at == sink {
            return true;
        }
        for &(u, v, c) in arcs {
            if u == at && c > 0 && !path.contains(&v) {
                path.push(v);
                if go(arcs, v, sink, path) {
                    return true;
                }
                path.pop();
            }
        }
        false
    }
    let mut path = vec![source];
    go(arcs, source, sink, &mut path).then_some(path)
}
