//! Multicommodity flow rows over the router-level link graph.

use crate::design::Link;
use crate::lp::{Comparator, LinearModel, VarId};
use crate::topology::{NodeId, RouterId, Topology};

/// How much of each demand must be carried.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Delivery<'a> {
    /// Every served demand in full.
    Full,
    /// Demand `d` carries exactly `vars[d]` units.
    Variable(&'a [VarId]),
}

/// Adds flow variables and conservation rows for `served` over `links`.
/// Returns `flows[link][demand] = [a→b, b→a]`. Capacity rows are left to
/// the caller.
pub(crate) fn add_flows(
    m: &mut LinearModel,
    topo: &Topology,
    router_alive: impl Fn(RouterId) -> bool,
    served: &[(NodeId, NodeId, f64)],
    links: &[Link],
    tag: &str,
    delivery: Delivery<'_>,
) -> Vec<Vec<[VarId; 2]>> {
    let rname = |r| topo.router(r).name.as_str();
    let nname = |n| topo.node(n).name.as_str();
    let flows: Vec<Vec<[VarId; 2]>> = links
        .iter()
        .map(|l| {
            let lname = format!("{},{}", rname(l.a), rname(l.b));
            served
                .iter()
                .map(|&(s, t, _)| {
                    let d = format!("{}>{}", nname(s), nname(t));
                    [
                        m.add_var(format!("Y[{d}|{lname}|+|{tag}]"), 0.0, f64::INFINITY, false),
                        m.add_var(format!("Y[{d}|{lname}|-|{tag}]"), 0.0, f64::INFINITY, false),
                    ]
                })
                .collect()
        })
        .collect();

    for (di, &(s, t, amount)) in served.iter().enumerate() {
        let d = format!("{}>{}", nname(s), nname(t));
        let mut inject = Vec::new();
        let mut extract = Vec::new();
        for r in topo.router_ids().filter(|&r| router_alive(r)) {
            let mut terms = Vec::new();
            for (li, l) in links.iter().enumerate() {
                let [fwd, bwd] = flows[li][di];
                if l.a == r {
                    terms.push((fwd, 1.0));
                    terms.push((bwd, -1.0));
                } else if l.b == r {
                    terms.push((bwd, 1.0));
                    terms.push((fwd, -1.0));
                }
            }
            let home = topo.home(r);
            if home == s {
                let v = m.add_var(
                    format!("I[{d}|{}|{tag}]", rname(r)),
                    0.0,
                    f64::INFINITY,
                    false,
                );
                terms.push((v, -1.0));
                inject.push((v, 1.0));
            } else if home == t {
                let v = m.add_var(
                    format!("E[{d}|{}|{tag}]", rname(r)),
                    0.0,
                    f64::INFINITY,
                    false,
                );
                terms.push((v, 1.0));
                extract.push((v, 1.0));
            }
            if !terms.is_empty() {
                m.add_constraint(
                    format!("flow[{d}|{}|{tag}]", rname(r)),
                    terms,
                    Comparator::Eq,
                    0.0,
                );
            }
        }
        let rhs = match delivery {
            Delivery::Full => amount,
            Delivery::Variable(vars) => {
                inject.push((vars[di], -1.0));
                extract.push((vars[di], -1.0));
                0.0
            }
        };
        m.add_constraint(format!("send[{d}|{tag}]"), inject, Comparator::Eq, rhs);
        m.add_constraint(format!("recv[{d}|{tag}]"), extract, Comparator::Eq, rhs);
    }
    flows
}

/// Caps both directions of each link: `flow <= cap_terms + cap_const`.
pub(crate) fn add_capacity_rows(
    m: &mut LinearModel,
    topo: &Topology,
    links: &[Link],
    flows: &[Vec<[VarId; 2]>],
    capacity: impl Fn(usize) -> (Vec<(VarId, f64)>, f64),
    tag: &str,
) {
    for (li, l) in links.iter().enumerate() {
        if flows[li].is_empty() {
            continue;
        }
        let (cap_terms, cap_const) = capacity(li);
        let lname = format!("{},{}", topo.router(l.a).name, topo.router(l.b).name);
        for (dir, sign) in [(0usize, '+'), (1, '-')] {
            let mut terms: Vec<_> = flows[li].iter().map(|f| (f[dir], 1.0)).collect();
            terms.extend(cap_terms.iter().map(|&(v, c)| (v, -c)));
            m.add_constraint(
                format!("cap[{lname}|{sign}|{tag}]"),
                terms,
                Comparator::Le,
                cap_const,
            );
        }
    }
}
