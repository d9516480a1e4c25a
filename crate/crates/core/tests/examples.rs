use std::time::Duration;

use flexnet::design::{add_cut_set_rows, build_design_model, Equipment};
use flexnet::lp::{self, validate_solution, SolveStatus};
use flexnet::operation::TransientObjective;
use flexnet::verify::{oracle_design_search, OracleCaps};
use flexnet::{
    design_greedy, design_legacy, design_optimal, design_simple, evaluate_transient, fixtures,
    operate, Algorithm, CostModel, DemandMatrix, DesignProblem, Exec, FailureScenario, NodeId,
    Placement, Topology,
};

const LIMIT: Duration = Duration::from_secs(60);

fn node(topo: &Topology, name: &str) -> NodeId {
    topo.node_id(name).unwrap()
}

fn span_cut(topo: &Topology, a: &str, b: &str) -> FailureScenario {
    FailureScenario::SpanCut(topo.span_between(node(topo, a), node(topo, b)).unwrap())
}

#[test]
fn toy_full_model_solves_to_six_and_validates() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let zero = Placement::zero(&topo);
    let scenarios = flexnet::enumerate_failures(&topo);
    let mut dm = build_design_model(
        &topo,
        &demands,
        &scenarios,
        &costs,
        Equipment::Place { prior: &zero },
    )
    .unwrap();
    add_cut_set_rows(&mut dm, &topo);
    let r = lp::solve(&dm.model, LIMIT).unwrap();
    assert_eq!(r.status, SolveStatus::Optimal);
    assert!((r.objective_value - 6.0).abs() < 1e-6);
    assert!(validate_solution(&dm.model, &dm.model.named_values(&r.values)).is_empty());
}

#[test]
fn toy_costs_by_algorithm() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let p = DesignProblem::new(&topo, &demands, costs);
    let optimal = design_optimal(&p, LIMIT).unwrap();
    let simple = design_simple(&p, LIMIT, Exec::Parallel).unwrap();
    let greedy = design_greedy(&p, LIMIT).unwrap();
    let legacy = design_legacy(&p, LIMIT).unwrap();
    assert_eq!(optimal.total_cost_reported(), 6.0);
    assert!(simple.total_cost_reported() >= 6.0);
    assert_eq!(greedy.total_cost_reported(), 6.0);
    assert!(legacy.total_cost_reported() > 6.0);
    // one artifact regen at N1 per active link
    assert_eq!(optimal.regens_raw[node(&topo, "N1").0], 1);
    assert_eq!(optimal.total_cost_raw(), 7.0);
}

#[test]
fn long_reach_needs_tails_only() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let topo = topo.with_regen_dist(10_000.0).unwrap();
    let d = design_optimal(&DesignProblem::new(&topo, &demands, costs), LIMIT).unwrap();
    assert_eq!(d.total_cost_reported(), 4.0);
    assert_eq!(d.placement.total_tails(), 4);
    assert_eq!(d.placement.total_regens(), 0);
}

#[test]
fn span_failures_alone_need_one_link() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let spans_only: Vec<_> = flexnet::enumerate_failures(&topo)
        .into_iter()
        .filter(|f| !matches!(f, FailureScenario::RouterDown(_)))
        .collect();
    let d = design_optimal(
        &DesignProblem::new(&topo, &demands, costs).with_scenarios(spans_only),
        LIMIT,
    )
    .unwrap();
    assert_eq!(d.placement.total_tails(), 2);
    assert_eq!(d.placement.total_regens(), 2);
}

#[test]
fn single_ip_node_without_demand_costs_nothing() {
    let topo = Topology::new(
        &["A"],
        &[] as &[&str],
        &[("RA", "A")],
        &[] as &[(&str, &str, f64)],
        1000.0,
    )
    .unwrap();
    let demands = DemandMatrix::new();
    let p = DesignProblem::new(&topo, &demands, CostModel::unit());
    assert_eq!(p.scenarios.len(), 2);
    for alg in Algorithm::ALL {
        let d = flexnet::run_algorithm(alg, &p, LIMIT, Exec::Sequential).unwrap();
        assert_eq!(d.total_cost_reported(), 0.0, "{}", alg.as_str());
    }
}

#[test]
fn toy_operation_examples() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let d = design_optimal(&DesignProblem::new(&topo, &demands, costs), LIMIT).unwrap();
    let (n1, n2, o2, o4) = (
        node(&topo, "N1"),
        node(&topo, "N2"),
        node(&topo, "O2"),
        node(&topo, "O4"),
    );

    let plan = operate(
        &topo,
        &demands,
        &d.placement,
        FailureScenario::NoFailure,
        LIMIT,
    )
    .unwrap();
    assert_eq!(plan.links.len(), 1);
    assert_eq!(plan.links[0].capacity, 1);
    assert_eq!(plan.links[0].strands[0].regens, [o2]);
    let carried: f64 = plan.flows.iter().map(|e| e.units).sum();
    assert!((carried - 0.8).abs() < 1e-6);

    let r1 = topo.router_id("R1").unwrap();
    let plan = operate(
        &topo,
        &demands,
        &d.placement,
        FailureScenario::RouterDown(r1),
        LIMIT,
    )
    .unwrap();
    let l = &plan.links[0];
    let homes = [topo.home(l.link.a), topo.home(l.link.b)];
    assert!(homes.contains(&n1) && homes.contains(&n2));
    assert!(l.link.touches(topo.router_id("R2").unwrap()));
    assert_eq!(l.strands[0].regens, [o2]);

    let plan = operate(
        &topo,
        &demands,
        &d.placement,
        span_cut(&topo, "N1", "O1"),
        LIMIT,
    )
    .unwrap();
    assert_eq!(plan.links.len(), 1);
    assert_eq!(plan.links[0].strands[0].regens, [o4, o2]);
}

#[test]
fn cutting_the_top_path_drops_all_transient_traffic() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let d = design_optimal(&DesignProblem::new(&topo, &demands, costs), LIMIT).unwrap();
    let nominal = d.plan_for(FailureScenario::NoFailure).unwrap();
    let cut = span_cut(&topo, "O1", "O2");
    let r = evaluate_transient(
        &topo,
        &demands,
        nominal,
        cut,
        TransientObjective::MaxTotal,
        LIMIT,
    )
    .unwrap();
    assert_eq!(r.fraction, 0.0);
    let r = evaluate_transient(
        &topo,
        &demands,
        nominal,
        FailureScenario::NoFailure,
        TransientObjective::MaxTotal,
        LIMIT,
    )
    .unwrap();
    assert_eq!(r.fraction, 1.0);
}

#[test]
fn oracle_examples() {
    let (topo, demands, costs) = fixtures::toy2x5();
    let caps = OracleCaps::uniform(2);
    let nominal = [FailureScenario::NoFailure];
    let best = oracle_design_search(&topo, &demands, &costs, &nominal, caps, Exec::Sequential)
        .unwrap()
        .unwrap();
    assert_eq!(best.cost, 3.0);
    let empty = DemandMatrix::new();
    let all = flexnet::enumerate_failures(&topo);
    let best = oracle_design_search(&topo, &empty, &costs, &all, caps, Exec::Sequential)
        .unwrap()
        .unwrap();
    assert_eq!(best.cost, 0.0);
}
