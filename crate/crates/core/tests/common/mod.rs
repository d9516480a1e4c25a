#![allow(dead_code)]

use flexnet::lp::{Comparator, LinearModel};
use flexnet::{CostModel, DemandMatrix, Topology};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

/// A small ring-plus-chords network: 2..=3 IP nodes, 2..=5 optical nodes,
/// one or two routers per IP node (at most four in total), span lengths
/// between 200 and 900 miles, and demands out of one IP node.
pub fn micro_instance(rng: &mut StdRng) -> (Topology, DemandMatrix, CostModel) {
    let n_ip = rng.random_range(2..=3usize);
    let n_opt = rng.random_range(2..=5usize);
    let ip: Vec<String> = (0..n_ip).map(|i| format!("I{i}")).collect();
    let opt: Vec<String> = (0..n_opt).map(|i| format!("O{i}")).collect();
    let mut all: Vec<String> = ip.iter().chain(&opt).cloned().collect();
    all.shuffle(rng);
    let mut routers: Vec<(String, String)> =
        ip.iter().map(|n| (format!("R{n}"), n.clone())).collect();
    if rng.random_bool(0.5) {
        let home = ip[rng.random_range(0..n_ip)].clone();
        routers.push((format!("R{home}x"), home));
    }
    let mut spans: Vec<(String, String, f64)> = Vec::new();
    let has = |a: &str, b: &str, spans: &[(String, String, f64)]| {
        spans
            .iter()
            .any(|(u, v, _)| (u == a && v == b) || (u == b && v == a))
    };
    for i in 0..all.len() {
        let (a, b) = (all[i].clone(), all[(i + 1) % all.len()].clone());
        let miles = rng.random_range(2..=9) as f64 * 100.0;
        spans.push((a, b, miles));
    }
    for _ in 0..rng.random_range(0..=2) {
        let a = all[rng.random_range(0..all.len())].clone();
        let b = all[rng.random_range(0..all.len())].clone();
        if a != b && !has(&a, &b, &spans) {
            let miles = rng.random_range(2..=9) as f64 * 100.0;
            spans.push((a, b, miles));
        }
    }
    let topo =
        Topology::new(&ip, &opt, &routers, &spans, 1000.0).expect("generated topology is valid");
    let mut demands = DemandMatrix::new();
    let src = topo.node_id(&ip[0]).unwrap();
    for name in &ip[1..] {
        if rng.random_bool(0.8) || demands.is_empty() {
            let units = rng.random_range(1..=9) as f64 / 10.0;
            demands
                .add(&topo, src, topo.node_id(name).unwrap(), units)
                .unwrap();
        }
    }
    let costs = CostModel::new(
        rng.random_range(1..=3) as f64,
        rng.random_range(1..=3) as f64,
        rng.random_range(0..=2) as f64,
    )
    .unwrap();
    (topo, demands, costs)
}

/// Pure-integer model with `n` variables in `[0, ub]`, a few random rows
/// and a random objective.
pub fn random_int_model(rng: &mut StdRng, n: usize, ub: f64) -> LinearModel {
    let mut m = LinearModel::new();
    let vars: Vec<_> = (0..n)
        .map(|i| m.add_var(format!("x{i}"), 0.0, ub, true))
        .collect();
    for (k, &v) in vars.iter().enumerate() {
        let c = rng.random_range(-5..=5) as f64;
        if c != 0.0 || k == 0 {
            m.add_objective_term(v, c);
        }
    }
    for r in 0..rng.random_range(1..=4) {
        let mut terms = Vec::new();
        for &v in &vars {
            if rng.random_bool(0.6) {
                terms.push((v, rng.random_range(-4..=6) as f64));
            }
        }
        let cmp = match rng.random_range(0..3) {
            0 => Comparator::Le,
            1 => Comparator::Ge,
            _ => Comparator::Eq,
        };
        let rhs = rng.random_range(-3..=12) as f64 + if rng.random_bool(0.3) { 0.5 } else { 0.0 };
        m.add_constraint(format!("r{r}"), terms, cmp, rhs);
    }
    m
}
