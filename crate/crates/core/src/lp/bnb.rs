//! Best-bound branch-and-bound with warm-started LP relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use microlp::{ComparisonOp, OptimizationDirection, Problem, Solution, SolveOptions, SolveOutcome};

use super::{Comparator, LinearModel, LpError, SolveResult, SolveStatus, TOL};

/// Run a rounding dive every this many explored nodes.
const DIVE_EVERY: u64 = 64;

/// Open nodes allowed to pin their parent's relaxation for warm starts.
/// Past this, nodes keep only their branching path and are rebuilt from
/// the root, which bounds memory on large models.
const WARM_NODES: usize = 256;

type Branch = (usize, ComparisonOp, f64);

enum Relaxed {
    Solved(Solution),
    Infeasible,
    Unbounded,
    OutOfTime,
}

fn relax(outcome: Result<SolveOutcome, microlp::Error>) -> Result<Relaxed, LpError> {
    match outcome {
        Ok(SolveOutcome::Solution(s)) => Ok(Relaxed::Solved(s)),
        Ok(SolveOutcome::Interrupted(_)) => Ok(Relaxed::OutOfTime),
        Err(microlp::Error::Infeasible) => Ok(Relaxed::Infeasible),
        Err(microlp::Error::Unbounded) => Ok(Relaxed::Unbounded),
        Err(e) => Err(LpError::Backend(e.to_string())),
    }
}

/// Open subproblem: the parent's relaxation plus one more bound.
struct Open {
    bound: f64,
    /// `bound` rounded up when the objective is integral; ties on it are
    /// explored depth-first.
    key: f64,
    depth: u32,
    seq: u64,
    parent: Option<Arc<Solution>>,
    /// Every bound from the root down to this node; the last one is new.
    path: Arc<Vec<Branch>>,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Open {}

impl Ord for Open {
    // Max-heap: smallest key first, then deepest, then newest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(self.depth.cmp(&other.depth))
            .then(self.seq.cmp(&other.seq))
    }
}

impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Search<'a> {
    model: &'a LinearModel,
    vars: Vec<microlp::Variable>,
    integer: Vec<usize>,
    /// Objective takes only integer values at integer points.
    integral_objective: bool,
    deadline: Instant,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: u64,
    seq: u64,
    warm: usize,
}

impl Search<'_> {
    fn out_of_time(&self) -> bool {
        Instant::now() >= self.deadline
    }

    /// Tightest bound implied by an LP value.
    fn effective_bound(&self, lp: f64) -> f64 {
        if self.integral_objective {
            (lp - TOL).ceil()
        } else {
            lp
        }
    }

    fn prunable(&self, lp: f64) -> bool {
        match &self.incumbent {
            None => false,
            Some((best, _)) => self.effective_bound(lp) >= best - TOL * best.abs().max(1.0),
        }
    }

    fn values(&self, sol: &Solution) -> Vec<f64> {
        self.vars.iter().map(|&v| sol.var_value_raw(v)).collect()
    }

    /// Most fractional integer variable among those of highest priority,
    /// lowest index on ties.
    fn branching_var(&self, values: &[f64]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, u32, f64)> = None;
        for &i in &self.integer {
            let x = values[i];
            let frac = x - x.floor();
            let score = frac.min(1.0 - frac);
            if score <= TOL {
                continue;
            }
            let p = self.model.priority(super::VarId(i));
            let better = match best {
                None => true,
                Some((_, _, bp, bs)) => p > bp || (p == bp && score > bs + 1e-12),
            };
            if better {
                best = Some((i, x, p, score));
            }
        }
        best.map(|(i, x, _, _)| (i, x))
    }

    fn offer(&mut self, values: &[f64]) {
        let mut snapped = values.to_vec();
        for &i in &self.integer {
            snapped[i] = snapped[i].round();
        }
        if !super::validate_dense(self.model, &snapped).is_empty() {
            return;
        }
        let obj = self.model.objective_value(&snapped);
        if self
            .incumbent
            .as_ref()
            .is_none_or(|(best, _)| obj < best - 1e-9)
        {
            self.incumbent = Some((obj, snapped));
        }
    }

    /// Fixes integer variables to their rounded values one at a time,
    /// highest priority and then closest-to-integral first, looking for an
    /// incumbent.
    fn dive(&mut self, start: &Solution) -> Result<(), LpError> {
        let mut sol = start.clone();
        let mut fixed = vec![false; self.vars.len()];
        loop {
            if self.out_of_time() || self.prunable(sol.objective()) {
                return Ok(());
            }
            let values = self.values(&sol);
            let mut pick: Option<(usize, u32, f64)> = None;
            let mut fractional = false;
            for &i in &self.integer {
                let frac = (values[i] - values[i].round()).abs();
                if frac <= TOL || fixed[i] {
                    continue;
                }
                fractional = true;
                let p = self.model.priority(super::VarId(i));
                let better = match pick {
                    None => true,
                    Some((_, bp, bf)) => p > bp || (p == bp && frac < bf - 1e-12),
                };
                if better {
                    pick = Some((i, p, frac));
                }
            }
            if !fractional {
                self.offer(&values);
                return Ok(());
            }
            let Some((i, _, _)) = pick else {
                return Ok(());
            };
            fixed[i] = true;
            let x = values[i];
            let first = x.round();
            let second = if first > x { x.floor() } else { x.ceil() };
            let mut next = None;
            for target in [first, second] {
                let v = self.model.vars()[i].clone();
                if target < v.lower - TOL || target > v.upper + TOL {
                    continue;
                }
                match relax(sol.clone().fix_var(self.vars[i], target))? {
                    Relaxed::Solved(s) => {
                        next = Some(s);
                        break;
                    }
                    Relaxed::OutOfTime => return Ok(()),
                    Relaxed::Infeasible | Relaxed::Unbounded => {}
                }
            }
            match next {
                Some(s) => sol = s,
                None => return Ok(()),
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn push_children(
        &mut self,
        heap: &mut BinaryHeap<Open>,
        sol: Solution,
        path: &[Branch],
        bound: f64,
        depth: u32,
        var: usize,
        x: f64,
    ) {
        let parent = (self.warm + 2 <= WARM_NODES).then(|| Arc::new(sol));
        for (cmp, rhs) in [(ComparisonOp::Le, x.floor()), (ComparisonOp::Ge, x.ceil())] {
            self.seq += 1;
            let mut p = path.to_vec();
            p.push((var, cmp, rhs));
            if parent.is_some() {
                self.warm += 1;
            }
            heap.push(Open {
                bound,
                key: self.effective_bound(bound),
                depth: depth + 1,
                seq: self.seq,
                parent: parent.clone(),
                path: Arc::new(p),
            });
        }
    }

    /// Relaxation of `node`, warm-started from its parent when pinned and
    /// rebuilt from the root otherwise.
    fn node_relaxation(&mut self, root: &Solution, node: &Open) -> Result<Relaxed, LpError> {
        let apply = |sol: Solution, &(var, cmp, rhs): &Branch| {
            relax(sol.add_constraint([(self.vars[var], 1.0)], cmp, rhs))
        };
        if let Some(parent) = &node.parent {
            self.warm -= 1;
            let last = node.path.last().expect("children carry a branch");
            return apply((**parent).clone(), last);
        }
        let mut sol = root.clone();
        for b in node.path.iter() {
            match apply(sol, b)? {
                Relaxed::Solved(s) => sol = s,
                other => return Ok(other),
            }
        }
        Ok(Relaxed::Solved(sol))
    }

    fn finish(&self, status_if_done: bool, open_bound: f64) -> SolveResult {
        match (&self.incumbent, status_if_done) {
            (Some((obj, values)), true) => SolveResult {
                status: SolveStatus::Optimal,
                values: values.clone(),
                objective_value: *obj,
                best_bound: *obj,
                nodes: self.nodes,
            },
            (Some((obj, values)), false) => SolveResult {
                status: SolveStatus::Feasible,
                values: values.clone(),
                objective_value: *obj,
                best_bound: open_bound.min(*obj),
                nodes: self.nodes,
            },
            (None, true) => SolveResult {
                status: SolveStatus::Infeasible,
                values: Vec::new(),
                objective_value: f64::INFINITY,
                best_bound: f64::INFINITY,
                nodes: self.nodes,
            },
            (None, false) => SolveResult {
                status: SolveStatus::NoSolutionFound,
                values: Vec::new(),
                objective_value: f64::INFINITY,
                best_bound: open_bound,
                nodes: self.nodes,
            },
        }
    }
}

fn no_answer(status: SolveStatus) -> SolveResult {
    SolveResult {
        status,
        values: Vec::new(),
        objective_value: if status == SolveStatus::Unbounded {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        },
        best_bound: f64::NEG_INFINITY,
        nodes: 0,
    }
}

/// Solves `model` to optimality or until `time_limit` expires.
///
/// Deterministic for a given model as long as the limit does not fire.
pub fn solve(model: &LinearModel, time_limit: Duration) -> Result<SolveResult, LpError> {
    model.validate()?;
    let started = Instant::now();
    let deadline = started + time_limit;

    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let mut obj = vec![0.0; model.vars().len()];
    for &(v, c) in model.objective() {
        obj[v.0] += c;
    }
    let vars: Vec<_> = model
        .vars()
        .iter()
        .zip(&obj)
        .map(|(v, &c)| problem.add_var(c, (v.lower, v.upper)))
        .collect();
    for con in model.constraints() {
        let mut merged: Vec<(usize, f64)> = con.terms.iter().map(|&(v, c)| (v.0, c)).collect();
        merged.sort_by_key(|t| t.0);
        merged.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        merged.retain(|t| t.1 != 0.0);
        if merged.is_empty() {
            if !con.cmp.holds(0.0, con.rhs, TOL) {
                return Ok(no_answer(SolveStatus::Infeasible));
            }
            continue;
        }
        let op = match con.cmp {
            Comparator::Le => ComparisonOp::Le,
            Comparator::Eq => ComparisonOp::Eq,
            Comparator::Ge => ComparisonOp::Ge,
        };
        problem.add_constraint(merged.iter().map(|&(i, c)| (vars[i], c)), op, con.rhs);
    }

    let integer: Vec<usize> = (0..model.vars().len())
        .filter(|&i| model.vars()[i].integer)
        .collect();
    let integral_objective = obj
        .iter()
        .enumerate()
        .all(|(i, &c)| c == 0.0 || (model.vars()[i].integer && c.fract() == 0.0));

    let mut options = SolveOptions::default();
    options.time_limit = Some(time_limit);
    let root = match relax(problem.solve_with(options))? {
        Relaxed::Solved(s) => s,
        Relaxed::Infeasible => return Ok(no_answer(SolveStatus::Infeasible)),
        Relaxed::Unbounded => return Ok(no_answer(SolveStatus::Unbounded)),
        Relaxed::OutOfTime => return Ok(no_answer(SolveStatus::NoSolutionFound)),
    };

    let mut search = Search {
        model,
        vars,
        integer,
        integral_objective,
        deadline,
        incumbent: None,
        nodes: 1,
        seq: 0,
        warm: 0,
    };

    let root_bound = root.objective();
    let values = search.values(&root);
    let Some((var, x)) = search.branching_var(&values) else {
        search.offer(&values);
        if search.incumbent.is_none() {
            return Err(LpError::Backend(
                "relaxation optimum failed validation".into(),
            ));
        }
        return Ok(search.finish(true, root_bound));
    };
    search.dive(&root)?;
    let mut heap = BinaryHeap::new();
    search.push_children(&mut heap, root.clone(), &[], root_bound, 0, var, x);

    while let Some(node) = heap.pop() {
        if search.prunable(node.bound) {
            if node.parent.is_some() {
                search.warm -= 1;
            }
            continue;
        }
        if search.out_of_time() {
            let open = heap.iter().map(|n| n.bound).fold(node.bound, f64::min);
            return Ok(search.finish(false, search.effective_bound(open)));
        }
        search.nodes += 1;
        let sol = match search.node_relaxation(&root, &node)? {
            Relaxed::Solved(s) => s,
            Relaxed::Infeasible | Relaxed::Unbounded => continue,
            Relaxed::OutOfTime => {
                let open = heap.iter().map(|n| n.bound).fold(node.bound, f64::min);
                return Ok(search.finish(false, search.effective_bound(open)));
            }
        };
        let bound = sol.objective();
        if search.prunable(bound) {
            continue;
        }
        let values = search.values(&sol);
        match search.branching_var(&values) {
            None => search.offer(&values),
            Some((var, x)) => {
                if search.nodes.is_multiple_of(DIVE_EVERY) {
                    search.dive(&sol)?;
                }
                search.push_children(&mut heap, sol, &node.path, bound, node.depth, var, x);
            }
        }
    }
    Ok(search.finish(true, f64::INFINITY))
}
