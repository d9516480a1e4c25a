//! Running a fixed design: per-scenario link remapping and routing, span
//! path expansion, and the routing-only transient evaluation.

mod transient;

use std::time::Duration;

pub use transient::{
    evaluate_transient, evaluate_transient_under, transient_batch, transient_csv, FailureSet,
    TransientObjective, TransientReport,
};

use crate::design::{add_cut_set_rows, build_design_model, Design, Equipment, Link, Placement};
use crate::error::{DesignError, ModelError};
use crate::lp::{self, SolveStatus};
use crate::paths::{shortest_distances, shortest_path, DistanceTable};
use crate::topology::{
    CostModel, DemandMatrix, FailureScenario, NodeId, RouterId, SpanId, Topology,
};

/// A bundle of identical lightpaths inside one link.
#[derive(Debug, Clone, PartialEq)]
pub struct Strand {
    pub units: u32,
    /// Regen nodes in order from the link's lower router to the other end.
    pub regens: Vec<NodeId>,
    pub spans: Vec<SpanId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedLink {
    pub link: Link,
    pub capacity: u32,
    /// Empty for links between colocated routers.
    pub strands: Vec<Strand>,
}

/// Flow of demand `src → dst` over link direction `from → to`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowEntry {
    pub src: NodeId,
    pub dst: NodeId,
    pub from: RouterId,
    pub to: RouterId,
    pub units: f64,
}

/// How the network runs under one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationPlan {
    pub scenario: FailureScenario,
    pub links: Vec<PlannedLink>,
    pub flows: Vec<FlowEntry>,
}

impl OperationPlan {
    pub fn capacity(&self, link: Link) -> u32 {
        self.links
            .iter()
            .filter(|l| l.link == link)
            .map(|l| l.capacity)
            .sum()
    }

    /// Capacity terminated at `r` on external links (`intra == false`) or
    /// on links to colocated routers (`intra == true`).
    pub fn terminated(&self, topo: &Topology, r: RouterId, intra: bool) -> u32 {
        self.links
            .iter()
            .filter(|l| l.link.touches(r) && l.link.is_intra(topo) == intra)
            .map(|l| l.capacity)
            .sum()
    }

    /// Regens in use at each node.
    pub fn regen_usage(&self, topo: &Topology) -> Vec<u32> {
        crate::design::plan_regen_usage(topo, self)
    }

    /// Total flow on `from → to`.
    pub fn directed_flow(&self, from: RouterId, to: RouterId) -> f64 {
        self.flows
            .iter()
            .filter(|e| e.from == from && e.to == to)
            .map(|e| e.units)
            .sum()
    }
}

/// Concatenates shortest span paths `source → regens… → sink`. Every leg
/// must fit within the regen distance.
pub fn expand_link_path(
    topo: &Topology,
    dist: &DistanceTable,
    source: NodeId,
    sink: NodeId,
    regens: &[NodeId],
) -> Result<Vec<SpanId>, ModelError> {
    let stops: Vec<NodeId> = std::iter::once(source)
        .chain(regens.iter().copied())
        .chain(std::iter::once(sink))
        .collect();
    let mut spans = Vec::new();
    for leg in stops.windows(2) {
        let (u, v) = (leg[0], leg[1]);
        let name = |n: NodeId| topo.node(n).name.as_str();
        let d = dist.get(u, v).ok_or_else(|| {
            ModelError::invalid(format!("no surviving path from {} to {}", name(u), name(v)))
        })?;
        if d > topo.regen_dist() {
            return Err(ModelError::invalid(format!(
                "leg {}-{} is {d} miles, beyond the regen distance {}",
                name(u),
                name(v),
                topo.regen_dist()
            )));
        }
        let (_, leg_spans) = shortest_path(topo, dist, u, v).ok_or_else(|| {
            ModelError::invalid(format!("no surviving path from {} to {}", name(u), name(v)))
        })?;
        spans.extend(leg_spans);
    }
    Ok(spans)
}

/// Remaps links and routes all demands under `scenario` with the design's
/// equipment fixed.
pub fn operate(
    topo: &Topology,
    demands: &DemandMatrix,
    placement: &Placement,
    scenario: FailureScenario,
    time_limit: Duration,
) -> Result<OperationPlan, DesignError> {
    let label = scenario.display(topo).to_string();
    let mut dm = build_design_model(
        topo,
        demands,
        &[scenario],
        &CostModel::unit(),
        Equipment::Fixed { placement },
    )?;
    add_cut_set_rows(&mut dm, topo);
    let result =
        lp::solve(&dm.model, time_limit).map_err(|e| DesignError::Solver(e.to_string()))?;
    match result.status {
        SolveStatus::Optimal | SolveStatus::Feasible => {}
        SolveStatus::Infeasible => return Err(DesignError::Infeasible { scenario: label }),
        SolveStatus::NoSolutionFound => return Err(DesignError::NoSolution { context: label }),
        SolveStatus::Unbounded => return Err(DesignError::Solver(format!("{label}: unbounded"))),
    }
    let dist = shortest_distances(topo, scenario);
    Ok(dm.plan(topo, 0, &result, &dist)?)
}

/// [`operate`] with a design's placement.
pub fn operate_design(
    topo: &Topology,
    demands: &DemandMatrix,
    design: &Design,
    scenario: FailureScenario,
    time_limit: Duration,
) -> Result<OperationPlan, DesignError> {
    operate(topo, demands, &design.placement, scenario, time_limit)
}
