//! Tail, regen and port placement: the joint optimum, the per-scenario
//! heuristics and the legacy fixed-link baseline.

mod doc;
mod legacy;
pub mod model;

use std::time::{Duration, Instant};

pub use doc::{DesignDoc, LinkDoc, ScenarioDoc, StrandDoc};
pub use legacy::{design_legacy, LegacyLink};
pub use model::{add_cut_set_rows, build_design_model, DesignModel, Equipment};

use crate::error::{DesignError, ModelError};
use crate::lp::{self, SolveStatus};
use crate::operation::OperationPlan;
use crate::par::{self, Exec};
use crate::paths::shortest_distances;
use crate::topology::{
    enumerate_failures, CostModel, DemandMatrix, FailureScenario, NodeId, RouterId, Topology,
};

/// Unordered router pair; `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Link {
    pub a: RouterId,
    pub b: RouterId,
}

impl Link {
    pub fn new(x: RouterId, y: RouterId) -> Self {
        assert_ne!(x, y, "a link needs two distinct routers");
        Link {
            a: x.min(y),
            b: x.max(y),
        }
    }

    pub fn touches(&self, r: RouterId) -> bool {
        self.a == r || self.b == r
    }

    pub fn is_intra(&self, topo: &Topology) -> bool {
        topo.home(self.a) == topo.home(self.b)
    }
}

/// Equipment counts: tails and ports per router, regens per node.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Placement {
    pub tails: Vec<u32>,
    pub regens: Vec<u32>,
    pub ports: Vec<u32>,
}

/// Equipment already installed before a placement step.
pub type PriorPlacement = Placement;

impl Placement {
    pub fn zero(topo: &Topology) -> Self {
        Placement {
            tails: vec![0; topo.routers().len()],
            regens: vec![0; topo.nodes().len()],
            ports: vec![0; topo.routers().len()],
        }
    }

    pub fn check_shape(&self, topo: &Topology) -> Result<(), ModelError> {
        if self.tails.len() != topo.routers().len()
            || self.ports.len() != topo.routers().len()
            || self.regens.len() != topo.nodes().len()
        {
            return Err(ModelError::invalid("placement does not match the topology"));
        }
        for r in topo.router_ids() {
            if self.ports[r.0] > 0 && !topo.has_colocated(r) {
                return Err(ModelError::invalid(format!(
                    "ports placed at router `{}` which has no colocated router",
                    topo.router(r).name
                )));
            }
        }
        Ok(())
    }

    pub fn add(&mut self, other: &Placement) {
        let zip = |a: &mut Vec<u32>, b: &Vec<u32>| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        zip(&mut self.tails, &other.tails);
        zip(&mut self.regens, &other.regens);
        zip(&mut self.ports, &other.ports);
    }

    pub fn max_with(&mut self, other: &Placement) {
        let zip = |a: &mut Vec<u32>, b: &Vec<u32>| {
            a.iter_mut().zip(b).for_each(|(x, y)| *x = (*x).max(*y))
        };
        zip(&mut self.tails, &other.tails);
        zip(&mut self.regens, &other.regens);
        zip(&mut self.ports, &other.ports);
    }

    pub fn total_tails(&self) -> u32 {
        self.tails.iter().sum()
    }

    pub fn total_regens(&self) -> u32 {
        self.regens.iter().sum()
    }

    pub fn total_ports(&self) -> u32 {
        self.ports.iter().sum()
    }

    pub fn cost(&self, costs: &CostModel) -> f64 {
        costs.tail * self.total_tails() as f64
            + costs.regen * self.total_regens() as f64
            + costs.port * self.total_ports() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Optimal,
    Simple,
    Greedy,
    Legacy,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Optimal,
        Algorithm::Simple,
        Algorithm::Greedy,
        Algorithm::Legacy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Optimal => "optimal",
            Algorithm::Simple => "simple",
            Algorithm::Greedy => "greedy",
            Algorithm::Legacy => "legacy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

/// Outcome of one solver call made while designing.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveRecord {
    /// `joint` or the scenario label.
    pub label: String,
    pub status: SolveStatus,
    pub objective: f64,
    pub best_bound: f64,
    pub seconds: f64,
}

/// A placement together with how it operates under each scenario.
#[derive(Debug, Clone)]
pub struct Design {
    pub algorithm: Algorithm,
    /// Tails, reported regens and ports.
    pub placement: Placement,
    /// Reported regens plus the model-only regens at link sources.
    pub regens_raw: Vec<u32>,
    pub costs: CostModel,
    pub solves: Vec<SolveRecord>,
    pub plans: Vec<OperationPlan>,
    /// Links owned by the legacy baseline; empty for the other algorithms.
    pub legacy_links: Vec<LegacyLink>,
}

impl Design {
    pub fn tails(&self) -> &[u32] {
        &self.placement.tails
    }

    pub fn regens_reported(&self) -> &[u32] {
        &self.placement.regens
    }

    pub fn ports(&self) -> &[u32] {
        &self.placement.ports
    }

    pub fn total_cost_reported(&self) -> f64 {
        self.placement.cost(&self.costs)
    }

    pub fn total_cost_raw(&self) -> f64 {
        self.costs.tail * self.placement.total_tails() as f64
            + self.costs.regen * self.regens_raw.iter().sum::<u32>() as f64
            + self.costs.port * self.placement.total_ports() as f64
    }

    /// Every solver call proved optimality.
    pub fn all_optimal(&self) -> bool {
        self.solves.iter().all(|s| s.status == SolveStatus::Optimal)
    }

    pub fn plan_for(&self, scenario: FailureScenario) -> Option<&OperationPlan> {
        self.plans.iter().find(|p| p.scenario == scenario)
    }
}

/// Inputs shared by every design algorithm.
#[derive(Debug, Clone)]
pub struct DesignProblem<'a> {
    pub topo: &'a Topology,
    pub demands: &'a DemandMatrix,
    pub costs: CostModel,
    pub scenarios: Vec<FailureScenario>,
}

impl<'a> DesignProblem<'a> {
    /// Problem over every enumerated failure scenario.
    pub fn new(topo: &'a Topology, demands: &'a DemandMatrix, costs: CostModel) -> Self {
        DesignProblem {
            topo,
            demands,
            costs,
            scenarios: enumerate_failures(topo),
        }
    }

    pub fn with_scenarios(mut self, scenarios: Vec<FailureScenario>) -> Self {
        self.scenarios = scenarios;
        self
    }

    fn single(&self, f: FailureScenario) -> DesignProblem<'a> {
        self.clone().with_scenarios(vec![f])
    }

    fn label(&self, f: FailureScenario) -> String {
        f.display(self.topo).to_string()
    }
}

/// Model-only regens at each node: per scenario, the capacity of external
/// links whose chain starts there; maximised over scenarios.
fn source_artifacts(topo: &Topology, plans: &[OperationPlan]) -> Vec<u32> {
    let mut out = vec![0u32; topo.nodes().len()];
    for plan in plans {
        let mut here = vec![0u32; topo.nodes().len()];
        for pl in plan.links.iter().filter(|l| !l.link.is_intra(topo)) {
            here[topo.home(pl.link.a).0] += pl.capacity;
        }
        for (o, h) in out.iter_mut().zip(here) {
            *o = (*o).max(h);
        }
    }
    out
}

fn finalize(
    problem: &DesignProblem<'_>,
    algorithm: Algorithm,
    placement: Placement,
    plans: Vec<OperationPlan>,
    solves: Vec<SolveRecord>,
) -> Design {
    let artifacts = source_artifacts(problem.topo, &plans);
    let regens_raw = placement
        .regens
        .iter()
        .zip(&artifacts)
        .map(|(r, a)| r + a)
        .collect();
    Design {
        algorithm,
        placement,
        regens_raw,
        costs: problem.costs,
        solves,
        plans,
        legacy_links: Vec::new(),
    }
}

/// One placement solve on top of `prior`.
struct Placed {
    placement: Placement,
    plans: Vec<OperationPlan>,
    record: SolveRecord,
}

fn place(
    problem: &DesignProblem<'_>,
    prior: &Placement,
    time_limit: Duration,
    label: String,
) -> Result<Placed, DesignError> {
    let started = Instant::now();
    let mut dm = build_design_model(
        problem.topo,
        problem.demands,
        &problem.scenarios,
        &problem.costs,
        Equipment::Place { prior },
    )?;
    add_cut_set_rows(&mut dm, problem.topo);
    let result =
        lp::solve(&dm.model, time_limit).map_err(|e| DesignError::Solver(e.to_string()))?;
    let record = SolveRecord {
        label: label.clone(),
        status: result.status,
        objective: result.objective_value,
        best_bound: result.best_bound,
        seconds: started.elapsed().as_secs_f64(),
    };
    match result.status {
        SolveStatus::Optimal | SolveStatus::Feasible => {}
        SolveStatus::Infeasible => return Err(DesignError::InfeasibleModel(label)),
        SolveStatus::NoSolutionFound => return Err(DesignError::NoSolution { context: label }),
        SolveStatus::Unbounded => {
            return Err(DesignError::Solver(format!(
                "{label}: unbounded placement model"
            )))
        }
    }
    let placement = dm.placement(&result);
    let plans = (0..dm.blocks.len())
        .map(|k| {
            let dist = shortest_distances(problem.topo, dm.blocks[k].scenario);
            dm.plan(problem.topo, k, &result, &dist)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Placed {
        placement,
        plans,
        record,
    })
}

/// Names the first scenario that is infeasible on its own.
fn diagnose(problem: &DesignProblem<'_>, time_limit: Duration) -> DesignError {
    let zero = Placement::zero(problem.topo);
    for &f in &problem.scenarios {
        let label = problem.label(f);
        match place(&problem.single(f), &zero, time_limit, label.clone()) {
            Err(DesignError::InfeasibleModel(_)) => {
                return DesignError::Infeasible { scenario: label }
            }
            Err(e @ DesignError::Model(_)) => return e,
            _ => {}
        }
    }
    DesignError::InfeasibleModel("joint model has no solution".into())
}

/// Solves all scenarios jointly in one model.
pub fn design_optimal(
    problem: &DesignProblem<'_>,
    time_limit: Duration,
) -> Result<Design, DesignError> {
    let zero = Placement::zero(problem.topo);
    match place(problem, &zero, time_limit, "joint".into()) {
        Ok(p) => Ok(finalize(
            problem,
            Algorithm::Optimal,
            p.placement,
            p.plans,
            vec![p.record],
        )),
        Err(DesignError::InfeasibleModel(_)) => Err(diagnose(problem, time_limit)),
        Err(e) => Err(e),
    }
}

/// Solves every scenario separately and keeps the element-wise maximum.
pub fn design_simple(
    problem: &DesignProblem<'_>,
    per_scenario_limit: Duration,
    exec: Exec,
) -> Result<Design, DesignError> {
    let zero = Placement::zero(problem.topo);
    let outcomes = par::map(exec, &problem.scenarios, |&f| {
        place(
            &problem.single(f),
            &zero,
            per_scenario_limit,
            problem.label(f),
        )
    });
    let mut placement = zero.clone();
    let mut plans = Vec::new();
    let mut solves = Vec::new();
    for (outcome, &f) in outcomes.into_iter().zip(&problem.scenarios) {
        let p = outcome.map_err(|e| match e {
            DesignError::InfeasibleModel(_) => DesignError::Infeasible {
                scenario: problem.label(f),
            },
            other => other,
        })?;
        placement.max_with(&p.placement);
        plans.extend(p.plans);
        solves.push(p.record);
    }
    Ok(finalize(
        problem,
        Algorithm::Simple,
        placement,
        plans,
        solves,
    ))
}

/// Scenario order used by the sequential heuristics: no failure first,
/// everything else as given.
pub fn greedy_order(scenarios: &[FailureScenario]) -> Vec<FailureScenario> {
    let mut out: Vec<FailureScenario> = scenarios
        .iter()
        .copied()
        .filter(|f| *f == FailureScenario::NoFailure)
        .collect();
    out.extend(
        scenarios
            .iter()
            .copied()
            .filter(|f| *f != FailureScenario::NoFailure),
    );
    out
}

/// Solves scenarios one at a time, treating earlier placements as free.
pub fn design_greedy(
    problem: &DesignProblem<'_>,
    per_scenario_limit: Duration,
) -> Result<Design, DesignError> {
    let mut prior = Placement::zero(problem.topo);
    let mut plans = Vec::new();
    let mut solves = Vec::new();
    for f in greedy_order(&problem.scenarios) {
        let label = problem.label(f);
        let p = place(
            &problem.single(f),
            &prior,
            per_scenario_limit,
            label.clone(),
        )
        .map_err(|e| match e {
            DesignError::InfeasibleModel(_) => DesignError::Infeasible { scenario: label },
            other => other,
        })?;
        prior.add(&p.placement);
        plans.extend(p.plans);
        solves.push(p.record);
    }
    Ok(finalize(problem, Algorithm::Greedy, prior, plans, solves))
}

/// Runs `algorithm` with the per-scenario limit; the joint solve receives
/// the equivalent total budget.
pub fn run_algorithm(
    algorithm: Algorithm,
    problem: &DesignProblem<'_>,
    per_scenario_limit: Duration,
    exec: Exec,
) -> Result<Design, DesignError> {
    match algorithm {
        Algorithm::Optimal => {
            design_optimal(problem, per_scenario_limit * problem.scenarios.len() as u32)
        }
        Algorithm::Simple => design_simple(problem, per_scenario_limit, exec),
        Algorithm::Greedy => design_greedy(problem, per_scenario_limit),
        Algorithm::Legacy => design_legacy(problem, per_scenario_limit),
    }
}

/// Per-node regens used by a plan, excluding chain sources.
pub fn plan_regen_usage(topo: &Topology, plan: &OperationPlan) -> Vec<u32> {
    let mut out = vec![0u32; topo.nodes().len()];
    for pl in &plan.links {
        for s in &pl.strands {
            for &NodeId(u) in &s.regens {
                out[u] += s.units;
            }
        }
    }
    out
}
