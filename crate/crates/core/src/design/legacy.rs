//! Baseline with IP links pinned to shortest optical paths. Each link owns
//! its tails and regens; links bought for earlier scenarios are free but
//! die whenever their path or an endpoint router fails.

use std::time::{Duration, Instant};

use crate::error::DesignError;
use crate::flow::{add_capacity_rows, add_flows, Delivery};
use crate::lp::{self, LinearModel, SolveStatus};
use crate::operation::{FlowEntry, OperationPlan, PlannedLink, Strand};
use crate::paths::{shortest_distances, shortest_path, DistanceTable};
use crate::topology::{FailureScenario, NodeId, SpanId, Topology};

use super::model::{live_links, served_demands};
use super::{greedy_order, Algorithm, Design, DesignProblem, Link, Placement, SolveRecord};

/// A link bought by the baseline, with the path it was lit on.
#[derive(Debug, Clone, PartialEq)]
pub struct LegacyLink {
    pub link: Link,
    pub capacity: u32,
    /// Regen nodes in order from `link.a`'s node.
    pub regens: Vec<NodeId>,
    /// Empty for links between colocated routers.
    pub spans: Vec<SpanId>,
}

impl LegacyLink {
    fn alive(&self, f: FailureScenario) -> bool {
        f.router_alive(self.link.a)
            && f.router_alive(self.link.b)
            && self.spans.iter().all(|&s| f.span_alive(s))
    }
}

/// Farthest-reach regen placement along `nodes`: keep going until the next
/// node would exceed the regen distance, then regenerate at the last one.
/// `None` if a single span is already too long.
pub fn farthest_reach_regens(
    topo: &Topology,
    nodes: &[NodeId],
    spans: &[SpanId],
) -> Option<Vec<NodeId>> {
    let reach = topo.regen_dist();
    let mut regens = Vec::new();
    let mut run = 0.0;
    for (i, &s) in spans.iter().enumerate() {
        let miles = topo.span(s).miles;
        if miles > reach {
            return None;
        }
        if run + miles > reach {
            regens.push(nodes[i]);
            run = 0.0;
        }
        run += miles;
    }
    Some(regens)
}

/// Cheapest way to light a new link under `f`, per unit of capacity.
struct Candidate {
    link: Link,
    unit_cost: f64,
    regens: Vec<NodeId>,
    spans: Vec<SpanId>,
}

fn candidate(problem: &DesignProblem<'_>, dist: &DistanceTable, link: Link) -> Option<Candidate> {
    let topo = problem.topo;
    let (a, b) = (topo.home(link.a), topo.home(link.b));
    if a == b {
        return Some(Candidate {
            link,
            unit_cost: 2.0 * problem.costs.port,
            regens: Vec::new(),
            spans: Vec::new(),
        });
    }
    let (nodes, spans) = shortest_path(topo, dist, a, b)?;
    let regens = farthest_reach_regens(topo, &nodes, &spans)?;
    Some(Candidate {
        link,
        unit_cost: 2.0 * problem.costs.tail + problem.costs.regen * regens.len() as f64,
        regens,
        spans,
    })
}

/// Sequential baseline: no failure first, then every other scenario.
pub fn design_legacy(
    problem: &DesignProblem<'_>,
    per_scenario_limit: Duration,
) -> Result<Design, DesignError> {
    let topo = problem.topo;
    let mut owned: Vec<LegacyLink> = Vec::new();
    let mut plans = Vec::new();
    let mut solves = Vec::new();

    for f in greedy_order(&problem.scenarios) {
        f.validate(topo)?;
        let started = Instant::now();
        let label = f.display(topo).to_string();
        let dist = shortest_distances(topo, f);
        let served = served_demands(topo, problem.demands, f);

        let mut m = LinearModel::new();
        let mut links = Vec::new();
        let mut buy = Vec::new();
        let mut candidates = Vec::new();
        for link in live_links(topo, f) {
            let existing: u32 = owned
                .iter()
                .filter(|o| o.link == link && o.alive(f))
                .map(|o| o.capacity)
                .sum();
            let cand = candidate(problem, &dist, link);
            if existing == 0 && cand.is_none() {
                continue;
            }
            let var = cand.as_ref().map(|c| {
                let v = m.add_var(
                    format!(
                        "N[{},{}]",
                        topo.router(link.a).name,
                        topo.router(link.b).name
                    ),
                    0.0,
                    f64::INFINITY,
                    true,
                );
                m.add_objective_term(v, c.unit_cost);
                v
            });
            links.push((link, existing));
            buy.push(var);
            candidates.push(cand);
        }
        let link_ids: Vec<Link> = links.iter().map(|l| l.0).collect();
        let flows = add_flows(
            &mut m,
            topo,
            |r| f.router_alive(r),
            &served,
            &link_ids,
            "f",
            Delivery::Full,
        );
        add_capacity_rows(
            &mut m,
            topo,
            &link_ids,
            &flows,
            |li| {
                (
                    buy[li].map(|v| vec![(v, 1.0)]).unwrap_or_default(),
                    links[li].1 as f64,
                )
            },
            "f",
        );

        let result =
            lp::solve(&m, per_scenario_limit).map_err(|e| DesignError::Solver(e.to_string()))?;
        solves.push(SolveRecord {
            label: label.clone(),
            status: result.status,
            objective: result.objective_value,
            best_bound: result.best_bound,
            seconds: started.elapsed().as_secs_f64(),
        });
        match result.status {
            SolveStatus::Optimal | SolveStatus::Feasible => {}
            SolveStatus::Infeasible => return Err(DesignError::Infeasible { scenario: label }),
            SolveStatus::NoSolutionFound => return Err(DesignError::NoSolution { context: label }),
            SolveStatus::Unbounded => {
                return Err(DesignError::Solver(format!("{label}: unbounded")))
            }
        }

        for (var, cand) in buy.iter().zip(&candidates) {
            let (Some(v), Some(c)) = (var, cand) else {
                continue;
            };
            let units = result.int_value(*v).max(0) as u32;
            if units > 0 {
                owned.push(LegacyLink {
                    link: c.link,
                    capacity: units,
                    regens: c.regens.clone(),
                    spans: c.spans.clone(),
                });
            }
        }

        let mut plan_links = Vec::new();
        let mut plan_flows = Vec::new();
        for (li, &(link, _)) in links.iter().enumerate() {
            let strands: Vec<Strand> = owned
                .iter()
                .filter(|o| o.link == link && o.alive(f))
                .map(|o| Strand {
                    units: o.capacity,
                    regens: o.regens.clone(),
                    spans: o.spans.clone(),
                })
                .collect();
            let capacity: u32 = strands.iter().map(|s| s.units).sum();
            for (di, &(s, t, _)) in served.iter().enumerate() {
                for (dir, (from, to)) in
                    [(link.a, link.b), (link.b, link.a)].into_iter().enumerate()
                {
                    let units = result.value(flows[li][di][dir]);
                    if units > 1e-9 {
                        plan_flows.push(FlowEntry {
                            src: s,
                            dst: t,
                            from,
                            to,
                            units,
                        });
                    }
                }
            }
            if capacity > 0 {
                let intra = link.is_intra(topo);
                plan_links.push(PlannedLink {
                    link,
                    capacity,
                    strands: if intra { Vec::new() } else { strands },
                });
            }
        }
        plans.push(OperationPlan {
            scenario: f,
            links: plan_links,
            flows: plan_flows,
        });
    }

    let mut placement = Placement::zero(topo);
    for o in &owned {
        if o.link.is_intra(topo) {
            placement.ports[o.link.a.0] += o.capacity;
            placement.ports[o.link.b.0] += o.capacity;
        } else {
            placement.tails[o.link.a.0] += o.capacity;
            placement.tails[o.link.b.0] += o.capacity;
            for r in &o.regens {
                placement.regens[r.0] += o.capacity;
            }
        }
    }
    Ok(Design {
        algorithm: Algorithm::Legacy,
        regens_raw: placement.regens.clone(),
        placement,
        costs: problem.costs,
        solves,
        plans,
        legacy_links: owned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn farthest_reach_on_toy_paths() {
        let (topo, _, _) = fixtures::toy2x5();
        let dist = shortest_distances(&topo, FailureScenario::NoFailure);
        let n = |s| topo.node_id(s).unwrap();
        let (nodes, spans) = shortest_path(&topo, &dist, n("N1"), n("N2")).unwrap();
        assert_eq!(
            farthest_reach_regens(&topo, &nodes, &spans).unwrap(),
            vec![n("O2")]
        );

        let cut = FailureScenario::SpanCut(topo.span_between(n("N1"), n("O1")).unwrap());
        let dist = shortest_distances(&topo, cut);
        let (nodes, spans) = shortest_path(&topo, &dist, n("N1"), n("N2")).unwrap();
        assert_eq!(
            farthest_reach_regens(&topo, &nodes, &spans).unwrap(),
            vec![n("O4"), n("O2")]
        );
    }

    #[test]
    fn no_failure_buys_one_top_path_link() {
        let (topo, demands, costs) = fixtures::toy2x5();
        let p = DesignProblem::new(&topo, &demands, costs)
            .with_scenarios(vec![FailureScenario::NoFailure]);
        let d = design_legacy(&p, Duration::from_secs(30)).unwrap();
        assert_eq!(d.placement.total_tails(), 2);
        assert_eq!(d.placement.total_regens(), 1);
        assert_eq!(d.legacy_links.len(), 1);
        assert_eq!(d.legacy_links[0].regens, vec![topo.node_id("O2").unwrap()]);
    }

    #[test]
    fn zero_demand_buys_nothing() {
        let (topo, _, costs) = fixtures::toy2x5();
        let empty = crate::topology::DemandMatrix::new();
        let d = design_legacy(
            &DesignProblem::new(&topo, &empty, costs),
            Duration::from_secs(30),
        )
        .unwrap();
        assert_eq!(d.total_cost_reported(), 0.0);
        assert!(d.legacy_links.is_empty());
    }
}
