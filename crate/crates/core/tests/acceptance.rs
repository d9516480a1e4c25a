mod common;

use std::time::{Duration, Instant};

use flexnet::design::{add_cut_set_rows, build_design_model, Equipment};
use flexnet::lp::{self, validate_dense, validate_solution, SolveStatus};
use flexnet::operation::{transient_batch, TransientObjective};
use flexnet::paths::shortest_distances;
use flexnet::verify::{
    brute_force_milp, check_flow_conservation, check_plan_chains, check_plan_usage,
    check_regen_feasible_path, oracle_design_search, span_walk, OracleCaps,
};
use flexnet::{
    fixtures, operate, run_algorithm, Algorithm, CostModel, DemandMatrix, Design, DesignProblem,
    Exec, FailureScenario, OperationPlan, Placement, Topology,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const COST_TOL: f64 = 1e-6;
const FRACTION_TOL: f64 = 1e-6;
const TOY_SECONDS: f64 = 60.0;
const PER_SCENARIO: Duration = Duration::from_secs(30);
const ORACLE_CAP: u32 = 2;
const MIN_ORACLE_INSTANCES: usize = 20;
const MILP_MODELS: usize = 40;
const MILP_MAX_VARS: usize = 12;

struct Fixture {
    name: &'static str,
    topo: Topology,
    demands: DemandMatrix,
    costs: CostModel,
}

impl Fixture {
    fn problem(&self) -> DesignProblem<'_> {
        DesignProblem::new(&self.topo, &self.demands, self.costs)
    }
}

fn fixtures_all() -> Vec<Fixture> {
    let toy = fixtures::toy2x5_instance();
    let grid = fixtures::grid3x3_instance();
    vec![
        Fixture {
            name: "toy2x5",
            topo: toy.topology,
            demands: toy.demands,
            costs: toy.costs,
        },
        Fixture {
            name: "grid3x3",
            topo: grid.topology,
            demands: grid.demands,
            costs: grid.costs,
        },
    ]
}

type Outcome = Result<String, String>;
type Operated = Vec<(usize, usize, OperationPlan)>;

fn report(id: usize, title: &str, outcome: &Outcome) -> bool {
    match outcome {
        Ok(msg) => {
            println!("PASS  criterion {id}: {title}: {msg}");
            true
        }
        Err(msg) => {
            println!("FAIL  criterion {id}: {title}: {msg}");
            false
        }
    }
}

fn fits(p: &Placement, cap: u32) -> bool {
    p.tails
        .iter()
        .chain(&p.regens)
        .chain(&p.ports)
        .all(|&x| x <= cap)
}

fn toy_reproduction() -> Outcome {
    let f = &fixtures_all()[0];
    let started = Instant::now();
    let full = flexnet::design_optimal(&f.problem(), Duration::from_secs(TOY_SECONDS as u64))
        .map_err(|e| e.to_string())?;
    let nominal = flexnet::design_optimal(
        &f.problem().with_scenarios(vec![FailureScenario::NoFailure]),
        Duration::from_secs(TOY_SECONDS as u64),
    )
    .map_err(|e| e.to_string())?;
    let seconds = started.elapsed().as_secs_f64();
    let got = (
        full.placement.total_tails(),
        full.placement.total_regens(),
        nominal.placement.total_tails(),
        nominal.placement.total_regens(),
    );
    if got != (4, 2, 2, 1) {
        return Err(format!(
            "tails/regens all={}/{} nominal={}/{}",
            got.0, got.1, got.2, got.3
        ));
    }
    if (full.total_cost_reported() - 6.0).abs() > COST_TOL {
        return Err(format!("cost {}", full.total_cost_reported()));
    }
    if seconds >= TOY_SECONDS {
        return Err(format!("took {seconds:.1}s"));
    }
    Ok(format!("4 tails + 2 regens, nominal 2 + 1, {seconds:.2}s"))
}

/// Exact agreement when the optimum fits under the caps; otherwise the
/// capped search can only be more expensive.
fn oracle_agrees(
    topo: &Topology,
    demands: &DemandMatrix,
    costs: CostModel,
) -> Result<Option<bool>, String> {
    let problem = DesignProblem::new(topo, demands, costs);
    let design =
        flexnet::design_optimal(&problem, Duration::from_secs(60)).map_err(|e| e.to_string())?;
    let oracle = match oracle_design_search(
        topo,
        demands,
        &costs,
        &problem.scenarios,
        OracleCaps::uniform(ORACLE_CAP),
        Exec::Parallel,
    ) {
        Ok(o) => o,
        Err(_) => return Ok(None),
    };
    let ilp = design.total_cost_reported();
    let exact = design.all_optimal() && fits(&design.placement, ORACLE_CAP);
    match oracle {
        Some(o) if exact && (o.cost - ilp).abs() > COST_TOL => {
            Err(format!("oracle {} vs ilp {ilp}", o.cost))
        }
        Some(o) if o.cost < ilp - COST_TOL => Err(format!("oracle {} below ilp {ilp}", o.cost)),
        None if exact => Err(format!("oracle found nothing under caps, ilp {ilp} fits")),
        _ => Ok(Some(exact)),
    }
}

fn oracle_equivalence() -> Outcome {
    let f = &fixtures_all()[0];
    if oracle_agrees(&f.topo, &f.demands, f.costs)? != Some(true) {
        return Err("toy2x5 not compared exactly".into());
    }
    let mut rng = StdRng::seed_from_u64(7);
    let (mut exact, mut bounded, mut tried) = (0, 0, 0);
    while exact < MIN_ORACLE_INSTANCES && tried < 3 * MIN_ORACLE_INSTANCES {
        tried += 1;
        let (topo, demands, costs) = common::micro_instance(&mut rng);
        match oracle_agrees(&topo, &demands, costs).map_err(|e| format!("instance {tried}: {e}"))? {
            Some(true) => exact += 1,
            Some(false) => bounded += 1,
            None => {}
        }
    }
    if exact < MIN_ORACLE_INSTANCES {
        return Err(format!(
            "only {exact} exact comparisons in {tried} instances"
        ));
    }
    Ok(format!(
        "toy2x5 + {exact} micro instances exact, {bounded} with optimum beyond cap {ORACLE_CAP}"
    ))
}

struct Run {
    fixture: usize,
    design: Design,
}

fn design_all(fx: &[Fixture]) -> Result<Vec<Run>, String> {
    let mut out = Vec::new();
    for (i, f) in fx.iter().enumerate() {
        for alg in Algorithm::ALL {
            let design = run_algorithm(alg, &f.problem(), PER_SCENARIO, Exec::Parallel)
                .map_err(|e| format!("{} {}: {e}", f.name, alg.as_str()))?;
            out.push(Run { fixture: i, design });
        }
    }
    Ok(out)
}

fn operated_plans(
    fx: &[Fixture],
    runs: &[Run],
) -> Result<Operated, String> {
    let mut out = Vec::new();
    for (k, run) in runs.iter().enumerate() {
        let f = &fx[run.fixture];
        for scenario in f.problem().scenarios {
            let plan = operate(
                &f.topo,
                &f.demands,
                &run.design.placement,
                scenario,
                PER_SCENARIO,
            )
            .map_err(|e| {
                format!(
                    "{} {} {}: {e}",
                    f.name,
                    run.design.algorithm.as_str(),
                    scenario.display(&f.topo)
                )
            })?;
            out.push((k, run.fixture, plan));
        }
    }
    Ok(out)
}

fn robustness(fx: &[Fixture], runs: &[Run], plans: &[(usize, usize, OperationPlan)]) -> Outcome {
    for (k, i, plan) in plans {
        let f = &fx[*i];
        let mut findings = check_plan_usage(&f.topo, plan, &runs[*k].design.placement);
        findings.extend(check_flow_conservation(&f.topo, plan, &f.demands));
        if let Some(first) = findings.first() {
            return Err(format!(
                "{} {} {}: {first}",
                f.name,
                runs[*k].design.algorithm.as_str(),
                plan.scenario.display(&f.topo)
            ));
        }
    }
    Ok(format!(
        "{} operated scenarios across {} designs",
        plans.len(),
        runs.len()
    ))
}

fn regen_physics(
    fx: &[Fixture],
    runs: &[Run],
    operated: &[(usize, usize, OperationPlan)],
) -> Outcome {
    let design_plans = runs
        .iter()
        .flat_map(|r| r.design.plans.iter().map(move |p| (r.fixture, p)));
    let all = design_plans.chain(operated.iter().map(|(_, i, p)| (*i, p)));
    let (mut strands, mut legs) = (0, 0);
    for (i, plan) in all {
        let topo = &fx[i].topo;
        let ctx = || format!("{} {}", fx[i].name, plan.scenario.display(topo));
        if let Some(first) = check_plan_chains(topo, plan).first() {
            return Err(format!("{}: {first}", ctx()));
        }
        let dist = shortest_distances(topo, plan.scenario);
        for pl in &plan.links {
            let (source, sink) = (topo.home(pl.link.a), topo.home(pl.link.b));
            for s in &pl.strands {
                strands += 1;
                let walk =
                    span_walk(topo, source, &s.spans).map_err(|e| format!("{}: {e}", ctx()))?;
                if walk.last() != Some(&sink) {
                    return Err(format!("{}: strand does not end at its sink", ctx()));
                }
                if !check_regen_feasible_path(topo, plan.scenario, &walk, &s.regens)
                    .map_err(|e| e.to_string())?
                {
                    return Err(format!("{}: regen chain exceeds reach", ctx()));
                }
                let expanded = flexnet::expand_link_path(topo, &dist, source, sink, &s.regens)
                    .map_err(|e| format!("{}: {e}", ctx()))?;
                // leg lengths straight from span miles, split at the stops
                let walk = span_walk(topo, source, &expanded).map_err(|e| e.to_string())?;
                let mut stops = s.regens.iter().chain(std::iter::once(&sink));
                let mut next = stops.next();
                let mut run = 0.0;
                for (w, &sp) in walk.windows(2).zip(&expanded) {
                    run += topo.span(sp).miles;
                    if Some(&w[1]) == next {
                        legs += 1;
                        if run > topo.regen_dist() + COST_TOL {
                            return Err(format!("{}: leg of {run} miles", ctx()));
                        }
                        run = 0.0;
                        next = stops.next();
                    }
                }
                if next.is_some() {
                    return Err(format!("{}: expanded path skips a stop", ctx()));
                }
            }
        }
    }
    Ok(format!("{strands} strands, {legs} legs within reach"))
}

fn ordering(fx: &[Fixture], runs: &[Run]) -> Outcome {
    let mut checked = 0;
    for (i, f) in fx.iter().enumerate() {
        let get = |a: Algorithm| {
            runs.iter()
                .find(|r| r.fixture == i && r.design.algorithm == a)
                .unwrap()
        };
        let opt = &get(Algorithm::Optimal).design;
        for other in [Algorithm::Greedy, Algorithm::Simple] {
            let d = &get(other).design;
            if !(opt.all_optimal() && d.all_optimal()) {
                continue;
            }
            checked += 1;
            if opt.total_cost_reported() > d.total_cost_reported() + COST_TOL {
                return Err(format!(
                    "{}: optimal {} > {} {}",
                    f.name,
                    opt.total_cost_reported(),
                    other.as_str(),
                    d.total_cost_reported()
                ));
            }
        }
    }
    let toy = &fx[0];
    let all = toy.problem().scenarios;
    let mut last = f64::NEG_INFINITY;
    for n in 1..=all.len() {
        let p = toy.problem().with_scenarios(all[..n].to_vec());
        let d = flexnet::design_optimal(&p, PER_SCENARIO).map_err(|e| e.to_string())?;
        if !d.all_optimal() {
            return Err(format!("nested subset {n} not solved to optimality"));
        }
        let c = d.total_cost_reported();
        if c < last - COST_TOL {
            return Err(format!("cost fell from {last} to {c} at {n} scenarios"));
        }
        last = c;
    }
    Ok(format!(
        "{checked} heuristic comparisons, {} nested subsets monotone",
        all.len()
    ))
}

fn grid_direction(fx: &[Fixture], runs: &[Run]) -> Outcome {
    let i = fx.iter().position(|f| f.name == "grid3x3").unwrap();
    let get = |a: Algorithm| {
        &runs
            .iter()
            .find(|r| r.fixture == i && r.design.algorithm == a)
            .unwrap()
            .design
    };
    let (opt, legacy) = (get(Algorithm::Optimal), get(Algorithm::Legacy));
    let (co, cl) = (opt.total_cost_reported(), legacy.total_cost_reported());
    if co >= cl - COST_TOL {
        return Err(format!("optimal {co} not below legacy {cl}"));
    }
    let tail_gap = legacy.placement.total_tails() as i64 - opt.placement.total_tails() as i64;
    let regen_gap = legacy.placement.total_regens() as i64 - opt.placement.total_regens() as i64;
    if regen_gap <= tail_gap {
        return Err(format!(
            "regen gap {regen_gap} not above tail gap {tail_gap}"
        ));
    }
    let mut rows = 0;
    for (k, fixture) in fx.iter().enumerate() {
        for run in runs.iter().filter(|r| r.fixture == k) {
            let nominal = run
                .design
                .plan_for(FailureScenario::NoFailure)
                .ok_or("design without a no-failure plan")?;
            let reports = transient_batch(
                &fixture.topo,
                &fixture.demands,
                nominal,
                &fixture.problem().scenarios,
                TransientObjective::MaxTotal,
                PER_SCENARIO,
                Exec::Parallel,
            )
            .map_err(|e| e.to_string())?;
            for r in &reports {
                rows += 1;
                let bad = !(-FRACTION_TOL..=1.0 + FRACTION_TOL).contains(&r.fraction)
                    || (r.scenario == FailureScenario::NoFailure
                        && (r.fraction - 1.0).abs() > FRACTION_TOL);
                if bad {
                    return Err(format!(
                        "{} {} {}: fraction {}",
                        fixture.name,
                        run.design.algorithm.as_str(),
                        r.scenario.display(&fixture.topo),
                        r.fraction
                    ));
                }
            }
        }
    }
    Ok(format!(
        "optimal {co} < legacy {cl}, regen gap {regen_gap} > tail gap {tail_gap}, {rows} transient fractions in [0,1]"
    ))
}

fn solver_contract(fx: &[Fixture]) -> Outcome {
    let mut validated = 0;
    for f in fx {
        let zero = Placement::zero(&f.topo);
        let all = f.problem().scenarios;
        let mut sets = vec![all.clone()];
        if f.name == "toy2x5" {
            sets.extend(all.iter().map(|&s| vec![s]));
        }
        for set in sets {
            let mut dm = build_design_model(
                &f.topo,
                &f.demands,
                &set,
                &f.costs,
                Equipment::Place { prior: &zero },
            )
            .map_err(|e| e.to_string())?;
            add_cut_set_rows(&mut dm, &f.topo);
            let r = lp::solve(&dm.model, Duration::from_secs(120)).map_err(|e| e.to_string())?;
            if !r.status.has_solution() {
                return Err(format!("{}: status {}", f.name, r.status));
            }
            let v = validate_solution(&dm.model, &dm.model.named_values(&r.values));
            if let Some(first) = v.first() {
                return Err(format!("{}: {first}", f.name));
            }
            validated += 1;
        }
    }
    let mut rng = StdRng::seed_from_u64(11);
    let mut agree = 0;
    for k in 0..MILP_MODELS {
        let n = rng.random_range(1..=MILP_MAX_VARS);
        let ub = rng.random_range(1..=3) as f64;
        let m = common::random_int_model(&mut rng, n, ub);
        let truth = brute_force_milp(&m, 1e8).map_err(|e| e.to_string())?;
        let r = lp::solve(&m, Duration::from_secs(60)).map_err(|e| e.to_string())?;
        match (&truth, r.status) {
            (None, SolveStatus::Infeasible) => {}
            (Some((obj, _)), SolveStatus::Optimal)
                if (obj - r.objective_value).abs() <= COST_TOL =>
            {
                if let Some(first) = validate_dense(&m, &r.values).first() {
                    return Err(format!("model {k}: {first}"));
                }
                validated += 1;
            }
            _ => {
                return Err(format!(
                    "model {k} ({n} vars): enumeration {:?} vs solver {} {}",
                    truth.map(|t| t.0),
                    r.status,
                    r.objective_value
                ))
            }
        }
        agree += 1;
    }
    Ok(format!(
        "{validated} solutions validated, {agree}/{MILP_MODELS} random models agree"
    ))
}

fn main() {
    let fx = fixtures_all();
    let mut ok = true;
    ok &= report(1, "toy reproduction", &toy_reproduction());
    ok &= report(2, "oracle equivalence", &oracle_equivalence());

    let runs = design_all(&fx);
    let operated = runs
        .as_ref()
        .map_err(Clone::clone)
        .and_then(|r| operated_plans(&fx, r));
    let with = |f: &dyn Fn(&[Run], &Operated) -> Outcome| match (
        &runs, &operated,
    ) {
        (Ok(r), Ok(p)) => f(r, p),
        (Err(e), _) | (_, Err(e)) => Err(e.clone()),
    };
    ok &= report(3, "robust operation", &with(&|r, p| robustness(&fx, r, p)));
    ok &= report(4, "regen reach", &with(&|r, p| regen_physics(&fx, r, p)));
    ok &= report(5, "cost ordering", &with(&|r, _| ordering(&fx, r)));
    ok &= report(
        6,
        "grid direction and transient range",
        &with(&|r, _| grid_direction(&fx, r)),
    );
    ok &= report(7, "solver contract", &solver_contract(&fx));
    if !ok {
        eprintln!("some acceptance criteria failed");
        std::process::exit(1);
    }
}
