//! Routing-only recovery over the links already lit before a failure.

use std::collections::BTreeSet;
use std::time::Duration;

use crate::design::Link;
use crate::error::DesignError;
use crate::flow::{add_capacity_rows, add_flows, Delivery};
use crate::lp::{self, LinearModel, SolveStatus};
use crate::par::{self, Exec};
use crate::topology::{DemandMatrix, FailureScenario, RouterId, SpanId, Topology};

use super::OperationPlan;

/// What the transient routing maximizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransientObjective {
    /// Total delivered units, each demand capped at its size.
    #[default]
    MaxTotal,
    /// Largest common fraction of every demand.
    MaxConcurrent,
}

/// Any set of failed spans and routers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FailureSet {
    pub spans: BTreeSet<SpanId>,
    pub routers: BTreeSet<RouterId>,
}

impl From<FailureScenario> for FailureSet {
    fn from(f: FailureScenario) -> Self {
        let mut out = FailureSet::default();
        match f {
            FailureScenario::NoFailure => {}
            FailureScenario::SpanCut(s) => {
                out.spans.insert(s);
            }
            FailureScenario::RouterDown(r) => {
                out.routers.insert(r);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientReport {
    pub scenario: FailureScenario,
    pub offered: f64,
    pub delivered: f64,
    pub fraction: f64,
    /// Links still up and the capacity left on each.
    pub surviving_links: Vec<(Link, u32)>,
}

/// Capacity of the plan's links that survives `failed`. A strand dies with
/// any span on its path; every link dies with either endpoint router.
fn surviving(topo: &Topology, plan: &OperationPlan, failed: &FailureSet) -> Vec<(Link, u32)> {
    let mut out: Vec<(Link, u32)> = Vec::new();
    for pl in &plan.links {
        if failed.routers.contains(&pl.link.a) || failed.routers.contains(&pl.link.b) {
            continue;
        }
        let cap = if pl.link.is_intra(topo) {
            pl.capacity
        } else {
            pl.strands
                .iter()
                .filter(|s| s.spans.iter().all(|sp| !failed.spans.contains(sp)))
                .map(|s| s.units)
                .sum()
        };
        if cap == 0 {
            continue;
        }
        match out.iter_mut().find(|(l, _)| *l == pl.link) {
            Some(entry) => entry.1 += cap,
            None => out.push((pl.link, cap)),
        }
    }
    out.sort();
    out
}

/// Delivered traffic when the plan's links face an arbitrary failure set.
pub fn evaluate_transient_under(
    topo: &Topology,
    demands: &DemandMatrix,
    plan: &OperationPlan,
    failed: &FailureSet,
    objective: TransientObjective,
    time_limit: Duration,
) -> Result<(f64, Vec<(Link, u32)>), DesignError> {
    let links = surviving(topo, plan, failed);
    let all: Vec<_> = demands.iter().collect();
    if all.is_empty() || links.is_empty() {
        return Ok((0.0, links));
    }

    let mut m = LinearModel::new();
    let delivered: Vec<_> = all
        .iter()
        .enumerate()
        .map(|(i, &(_, _, d))| m.add_var(format!("z[{i}]"), 0.0, d, false))
        .collect();
    match objective {
        TransientObjective::MaxTotal => {
            for &z in &delivered {
                m.add_objective_term(z, -1.0);
            }
        }
        TransientObjective::MaxConcurrent => {
            let lambda = m.add_var("lambda", 0.0, 1.0, false);
            m.add_objective_term(lambda, -1.0);
            for (i, (&z, &(_, _, d))) in delivered.iter().zip(&all).enumerate() {
                m.add_constraint(
                    format!("share[{i}]"),
                    vec![(z, 1.0), (lambda, -d)],
                    lp::Comparator::Eq,
                    0.0,
                );
            }
        }
    }
    let link_ids: Vec<Link> = links.iter().map(|l| l.0).collect();
    let alive = |r: RouterId| !failed.routers.contains(&r);
    let flows = add_flows(
        &mut m,
        topo,
        alive,
        &all,
        &link_ids,
        "t",
        Delivery::Variable(&delivered),
    );
    add_capacity_rows(
        &mut m,
        topo,
        &link_ids,
        &flows,
        |li| (Vec::new(), links[li].1 as f64),
        "t",
    );

    let result = lp::solve(&m, time_limit).map_err(|e| DesignError::Solver(e.to_string()))?;
    match result.status {
        SolveStatus::Optimal | SolveStatus::Feasible => {}
        // zero delivery is always feasible, so anything else is a solver fault
        other => {
            return Err(DesignError::Solver(format!(
                "transient routing ended {other}"
            )))
        }
    }
    let total: f64 = delivered.iter().map(|&z| result.value(z)).sum();
    Ok((total.clamp(0.0, demands.total()), links))
}

/// Fraction of the offered traffic carried right after `scenario`, using
/// only the no-failure plan's links.
pub fn evaluate_transient(
    topo: &Topology,
    demands: &DemandMatrix,
    no_failure_plan: &OperationPlan,
    scenario: FailureScenario,
    objective: TransientObjective,
    time_limit: Duration,
) -> Result<TransientReport, DesignError> {
    let (delivered, surviving_links) = evaluate_transient_under(
        topo,
        demands,
        no_failure_plan,
        &scenario.into(),
        objective,
        time_limit,
    )?;
    let offered = demands.total();
    let fraction = if offered > 0.0 {
        (delivered / offered).clamp(0.0, 1.0)
    } else {
        1.0
    };
    // Snap solver noise so an intact network reports exactly 1.
    let fraction = if (1.0 - fraction).abs() <= lp::TOL {
        1.0
    } else {
        fraction
    };
    let delivered = if fraction == 1.0 { offered } else { delivered };
    Ok(TransientReport {
        scenario,
        offered,
        delivered,
        fraction,
        surviving_links,
    })
}

/// [`evaluate_transient`] over many scenarios.
pub fn transient_batch(
    topo: &Topology,
    demands: &DemandMatrix,
    no_failure_plan: &OperationPlan,
    scenarios: &[FailureScenario],
    objective: TransientObjective,
    time_limit: Duration,
    exec: Exec,
) -> Result<Vec<TransientReport>, DesignError> {
    par::map(exec, scenarios, |&f| {
        evaluate_transient(topo, demands, no_failure_plan, f, objective, time_limit)
    })
    .into_iter()
    .collect()
}

/// CSV with one row per report.
pub fn transient_csv(topo: &Topology, reports: &[TransientReport]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let _ = w.write_record([
        "scenario_kind",
        "scenario_id",
        "offered",
        "delivered",
        "fraction",
    ]);
    for r in reports {
        let id = match r.scenario {
            FailureScenario::NoFailure => "none".to_string(),
            f => f.element(topo),
        };
        let _ = w.write_record([
            r.scenario.kind().to_string(),
            id,
            format!("{:.6}", r.offered),
            format!("{:.6}", r.delivered),
            format!("{:.6}", r.fraction),
        ]);
    }
    // writing into memory cannot fail
    String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
}
