//! Exhaustive design search for tiny instances.
//!
//! A placement is operable under a scenario iff some multiset of unit
//! lightpaths fits the equipment and the resulting link graph carries all
//! served demand. A lightpath joins two live routers on different nodes and
//! needs one tail at each end plus one regen at every interior node of a
//! simple path in the scenario's regen-reach graph; colocated routers use a
//! port at each end instead. Routing is checked by augmenting-path max
//! flow, which is exact because every demand shares one source node or one
//! destination node (other instances are refused).

use crate::design::Placement;
use crate::par::{self, Exec};
use crate::topology::{CostModel, DemandMatrix, FailureScenario, NodeId, SpanId, Topology};

use super::VerifyError;

/// Default bound on the number of placements the search may enumerate.
pub const DEFAULT_ORACLE_LIMIT: f64 = 2e7;

const EPS: f64 = 1e-9;

/// Largest value tried for each variable kind, plus the size limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCaps {
    pub tail: u32,
    pub regen: u32,
    pub port: u32,
    pub limit: f64,
}

impl OracleCaps {
    pub fn uniform(cap: u32) -> Self {
        OracleCaps {
            tail: cap,
            regen: cap,
            port: cap,
            limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub cost: f64,
    pub placement: Placement,
}

/// All-pairs distances by Floyd-Warshall over surviving spans.
fn floyd(topo: &Topology, f: FailureScenario) -> Vec<Vec<f64>> {
    let n = topo.nodes().len();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for (s, sp) in topo.spans().iter().enumerate() {
        if f.span_alive(SpanId(s)) {
            let (a, b) = (sp.a.0, sp.b.0);
            d[a][b] = d[a][b].min(sp.miles);
            d[b][a] = d[b][a].min(sp.miles);
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Inclusion-minimal interior node sets of simple reach-graph paths
/// from `src` to `dst`.
fn minimal_interiors(reach: &[Vec<bool>], src: usize, dst: usize) -> Vec<Vec<usize>> {
    fn go(
        reach: &[Vec<bool>],
        at: usize,
        dst: usize,
        on: &mut Vec<bool>,
        interior: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if reach[at][dst] {
            let mut s = interior.clone();
            s.sort_unstable();
            out.push(s);
            // any longer path through `at` only adds regens
            return;
        }
        for next in 0..reach.len() {
            if next != dst && !on[next] && reach[at][next] {
                on[next] = true;
                interior.push(next);
                go(reach, next, dst, on, interior, out);
                interior.pop();
                on[next] = false;
            }
        }
    }
    let mut on = vec![false; reach.len()];
    on[src] = true;
    on[dst] = true;
    let mut all = Vec::new();
    go(reach, src, dst, &mut on, &mut Vec::new(), &mut all);
    all.sort();
    all.dedup();
    let subset = |a: &Vec<usize>, b: &Vec<usize>| a.iter().all(|x| b.contains(x));
    let mut out: Vec<Vec<usize>> = Vec::new();
    for s in &all {
        if !all.iter().any(|t| t != s && subset(t, s)) {
            out.push(s.clone());
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Candidate {
    pair: usize,
    a: usize,
    b: usize,
    intra: bool,
    interior: Vec<usize>,
}

/// Everything about one scenario that does not depend on the placement.
#[derive(Debug, Clone)]
struct Scenario {
    candidates: Vec<Candidate>,
    /// Router pairs, indexed by `Candidate::pair`.
    pairs: Vec<(usize, usize)>,
    /// Flow network over routers, then IP node vertices, then S and T.
    base: Vec<Vec<f64>>,
    need: f64,
    unit_cap: u32,
}

fn max_flow(cap: &mut [Vec<f64>], s: usize, t: usize) -> f64 {
    let n = cap.len();
    let mut total = 0.0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > EPS {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

impl Scenario {
    fn new(
        topo: &Topology,
        demands: &DemandMatrix,
        f: FailureScenario,
        single_source: bool,
    ) -> Self {
        let nr = topo.routers().len();
        let nn = topo.nodes().len();
        let dist = floyd(topo, f);
        let reach: Vec<Vec<bool>> = (0..nn)
            .map(|u| {
                (0..nn)
                    .map(|v| u != v && dist[u][v] <= topo.regen_dist())
                    .collect()
            })
            .collect();
        let live: Vec<usize> = (0..nr)
            .filter(|&r| f.router_alive(crate::topology::RouterId(r)))
            .collect();
        let home = |r: usize| topo.router(crate::topology::RouterId(r)).home.0;

        let mut pairs = Vec::new();
        let mut candidates = Vec::new();
        for (i, &a) in live.iter().enumerate() {
            for &b in &live[i + 1..] {
                let pair = pairs.len();
                pairs.push((a, b));
                if home(a) == home(b) {
                    candidates.push(Candidate {
                        pair,
                        a,
                        b,
                        intra: true,
                        interior: Vec::new(),
                    });
                } else {
                    for interior in minimal_interiors(&reach, home(a), home(b)) {
                        candidates.push(Candidate {
                            pair,
                            a,
                            b,
                            intra: false,
                            interior,
                        });
                    }
                }
            }
        }

        // vertices: routers, IP node terminals, S, T
        let n = nr + nn + 2;
        let (src, snk) = (nr + nn, nr + nn + 1);
        let mut base = vec![vec![0.0; n]; n];
        let live_at = |node: NodeId| -> Vec<usize> {
            topo.routers_at(node)
                .iter()
                .map(|r| r.0)
                .filter(|r| live.contains(r))
                .collect()
        };
        let mut need = 0.0;
        for (s, t, d) in demands.iter() {
            let (rs, rt) = (live_at(s), live_at(t));
            if rs.is_empty() || rt.is_empty() {
                continue;
            }
            need += d;
            let (vs, vt) = (nr + s.0, nr + t.0);
            for &r in &rs {
                base[vs][r] = f64::INFINITY;
            }
            for &r in &rt {
                base[r][vt] = f64::INFINITY;
            }
            if single_source {
                base[src][vs] = f64::INFINITY;
                base[vt][snk] += d;
            } else {
                base[src][vs] += d;
                base[vt][snk] = f64::INFINITY;
            }
        }
        Scenario {
            candidates,
            pairs,
            base,
            need,
            unit_cap: need.ceil() as u32,
        }
    }

    fn carries(&self, caps: &[u32]) -> bool {
        let mut g = self.base.clone();
        for (&(a, b), &c) in self.pairs.iter().zip(caps) {
            g[a][b] += c as f64;
            g[b][a] += c as f64;
        }
        let n = g.len();
        max_flow(&mut g, n - 2, n - 1) >= self.need - 1e-7
    }

    fn feasible(&self, p: &Placement) -> bool {
        if self.need <= EPS {
            return true;
        }
        let usable: Vec<&Candidate> = self
            .candidates
            .iter()
            .filter(|c| {
                if c.intra {
                    p.ports[c.a] > 0 && p.ports[c.b] > 0
                } else {
                    p.tails[c.a] > 0
                        && p.tails[c.b] > 0
                        && c.interior.iter().all(|&u| p.regens[u] > 0)
                }
            })
            .collect();
        let mut state = Resources {
            tails: p.tails.clone(),
            ports: p.ports.clone(),
            regens: p.regens.clone(),
            caps: vec![0; self.pairs.len()],
        };
        self.search(&usable, 0, &mut state)
    }

    fn room(&self, c: &Candidate, st: &Resources) -> u32 {
        let ends = if c.intra {
            st.ports[c.a].min(st.ports[c.b])
        } else {
            st.tails[c.a].min(st.tails[c.b])
        };
        let regen = c
            .interior
            .iter()
            .map(|&u| st.regens[u])
            .min()
            .unwrap_or(u32::MAX);
        ends.min(regen)
            .min(self.unit_cap.saturating_sub(st.caps[c.pair]))
    }

    fn search(&self, cands: &[&Candidate], i: usize, st: &mut Resources) -> bool {
        if self.carries(&st.caps) {
            return true;
        }
        if i == cands.len() {
            return false;
        }
        let mut optimistic = st.caps.clone();
        for c in &cands[i..] {
            optimistic[c.pair] = (optimistic[c.pair] + self.room(c, st)).min(self.unit_cap);
        }
        if !self.carries(&optimistic) {
            return false;
        }
        let c = cands[i];
        for k in (0..=self.room(c, st)).rev() {
            st.take(c, k);
            let ok = self.search(cands, i + 1, st);
            st.give(c, k);
            if ok {
                return true;
            }
        }
        false
    }
}

struct Resources {
    tails: Vec<u32>,
    ports: Vec<u32>,
    regens: Vec<u32>,
    caps: Vec<u32>,
}

impl Resources {
    fn take(&mut self, c: &Candidate, k: u32) {
        let ends = if c.intra {
            &mut self.ports
        } else {
            &mut self.tails
        };
        ends[c.a] -= k;
        ends[c.b] -= k;
        for &u in &c.interior {
            self.regens[u] -= k;
        }
        self.caps[c.pair] += k;
    }

    fn give(&mut self, c: &Candidate, k: u32) {
        let ends = if c.intra {
            &mut self.ports
        } else {
            &mut self.tails
        };
        ends[c.a] += k;
        ends[c.b] += k;
        for &u in &c.interior {
            self.regens[u] += k;
        }
        self.caps[c.pair] -= k;
    }
}

#[derive(Debug, Clone, Copy)]
enum Slot {
    Tail(usize),
    Port(usize),
    Regen(usize),
}

struct Search<'a> {
    scenarios: &'a [Scenario],
    slots: &'a [(Slot, u32, f64)],
    order: Vec<usize>,
    best: f64,
    witness: Placement,
}

fn set(p: &mut Placement, slot: Slot, v: u32) {
    match slot {
        Slot::Tail(r) => p.tails[r] = v,
        Slot::Port(r) => p.ports[r] = v,
        Slot::Regen(u) => p.regens[u] = v,
    }
}

impl Search<'_> {
    fn operable(&mut self, p: &Placement) -> bool {
        for k in 0..self.order.len() {
            let s = self.order[k];
            if !self.scenarios[s].feasible(p) {
                // check the scenario that just failed first next time
                self.order[..=k].rotate_right(1);
                return false;
            }
        }
        true
    }

    /// Slots before `i` are fixed; the rest sit at their caps.
    fn descend(&mut self, i: usize, partial: f64, p: &mut Placement) {
        if partial >= self.best - EPS || !self.operable(p) {
            return;
        }
        if i == self.slots.len() {
            self.best = partial;
            self.witness = p.clone();
            return;
        }
        let (slot, cap, cost) = self.slots[i];
        for v in 0..=cap {
            set(p, slot, v);
            self.descend(i + 1, partial + cost * v as f64, p);
        }
        set(p, slot, cap);
    }
}

/// Cheapest placement within `caps` that operates under every scenario,
/// or `None` if even the all-caps placement does not.
pub fn oracle_design_search(
    topo: &Topology,
    demands: &DemandMatrix,
    costs: &CostModel,
    scenarios: &[FailureScenario],
    caps: OracleCaps,
    exec: Exec,
) -> Result<Option<OracleSolution>, VerifyError> {
    let mut slots = Vec::new();
    for r in topo.router_ids() {
        slots.push((Slot::Tail(r.0), caps.tail, costs.tail));
    }
    for r in topo.router_ids().filter(|&r| topo.has_colocated(r)) {
        slots.push((Slot::Port(r.0), caps.port, costs.port));
    }
    for u in topo.node_ids() {
        slots.push((Slot::Regen(u.0), caps.regen, costs.regen));
    }
    let size: f64 = slots.iter().map(|s| s.1 as f64 + 1.0).product();
    if size > caps.limit {
        return Err(VerifyError::TooLarge {
            size,
            limit: caps.limit,
        });
    }

    let sources: std::collections::BTreeSet<_> = demands.iter().map(|d| d.0).collect();
    let sinks: std::collections::BTreeSet<_> = demands.iter().map(|d| d.1).collect();
    let single_source = sources.len() <= 1;
    if !single_source && sinks.len() > 1 {
        return Err(VerifyError::Unsupported(
            "demands must share one source node or one destination node".into(),
        ));
    }
    for f in scenarios {
        f.validate(topo)
            .map_err(|e| VerifyError::Unsupported(e.to_string()))?;
    }
    let prepared: Vec<Scenario> = par::map(exec, scenarios, |&f| {
        Scenario::new(topo, demands, f, single_source)
    });

    let mut full = Placement::zero(topo);
    for &(slot, cap, _) in &slots {
        set(&mut full, slot, cap);
    }
    let full_cost: f64 = slots.iter().map(|s| s.1 as f64 * s.2).sum();
    if !prepared.iter().all(|s| s.feasible(&full)) {
        return Ok(None);
    }

    // Partition on the first slot's value.
    let Some(&(first, first_cap, first_cost)) = slots.first() else {
        return Ok(Some(OracleSolution {
            cost: 0.0,
            placement: full,
        }));
    };
    let parts = par::map_range(exec, first_cap as usize + 1, |v| {
        let mut s = Search {
            scenarios: &prepared,
            slots: &slots,
            order: (0..prepared.len()).collect(),
            best: full_cost + EPS * 4.0,
            witness: full.clone(),
        };
        let mut p = full.clone();
        set(&mut p, first, v as u32);
        s.descend(1, first_cost * v as f64, &mut p);
        (s.best.min(full_cost), s.witness)
    });
    let mut best: Option<(f64, Placement)> = None;
    for (cost, w) in parts {
        if best.as_ref().is_none_or(|b| cost < b.0 - EPS) {
            best = Some((cost, w));
        }
    }
    let (cost, placement) = best.expect("at least one partition");
    Ok(Some(OracleSolution { cost, placement }))
}
