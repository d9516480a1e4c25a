//! Enumeration oracle for small pure-integer programs.

use crate::lp::{Comparator, LinearModel};

use super::VerifyError;

const TOL: f64 = 1e-9;

/// Minimum of a bounded pure-integer model by depth-first enumeration with
/// interval pruning. `Ok(None)` means infeasible. Refuses continuous or
/// unbounded variables and spaces larger than `limit` points.
pub fn brute_force_milp(
    model: &LinearModel,
    limit: f64,
) -> Result<Option<(f64, Vec<f64>)>, VerifyError> {
    let vars = model.vars();
    let n = vars.len();
    let mut size = 1.0;
    for v in vars {
        if !v.integer || !v.lower.is_finite() || !v.upper.is_finite() {
            return Err(VerifyError::Unsupported(format!(
                "variable `{}` must be an integer with finite bounds",
                v.name
            )));
        }
        size *= (v.upper.floor() - v.lower.ceil() + 1.0).max(0.0);
    }
    if size > limit {
        return Err(VerifyError::TooLarge { size, limit });
    }
    let lo: Vec<i64> = vars.iter().map(|v| v.lower.ceil() as i64).collect();
    let hi: Vec<i64> = vars.iter().map(|v| v.upper.floor() as i64).collect();
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(None);
    }

    let mut rows = Vec::new();
    for c in model.constraints() {
        let mut a = vec![0.0; n];
        for &(v, x) in &c.terms {
            a[v.0] += x;
        }
        rows.push((a, c.cmp, c.rhs));
    }
    let mut obj = vec![0.0; n];
    for &(v, x) in model.objective() {
        obj[v.0] += x;
    }
    // suffix[i] = range of Σ_{j>=i} a_j x_j over the bounds
    let suffix = |a: &[f64]| -> Vec<(f64, f64)> {
        let mut out = vec![(0.0, 0.0); n + 1];
        for j in (0..n).rev() {
            let (p, q) = (a[j] * lo[j] as f64, a[j] * hi[j] as f64);
            out[j] = (out[j + 1].0 + p.min(q), out[j + 1].1 + p.max(q));
        }
        out
    };
    let row_ranges: Vec<_> = rows.iter().map(|r| suffix(&r.0)).collect();
    let obj_range = suffix(&obj);

    struct Dfs<'a> {
        rows: &'a [(Vec<f64>, Comparator, f64)],
        row_ranges: &'a [Vec<(f64, f64)>],
        obj: &'a [f64],
        obj_range: &'a [(f64, f64)],
        lo: &'a [i64],
        hi: &'a [i64],
        x: Vec<i64>,
        partial: Vec<f64>,
        best: Option<(f64, Vec<f64>)>,
    }

    impl Dfs<'_> {
        fn go(&mut self, i: usize, obj_so_far: f64) {
            if let Some((b, _)) = &self.best {
                if obj_so_far + self.obj_range[i].0 >= *b - TOL {
                    return;
                }
            }
            for (k, (_, cmp, rhs)) in self.rows.iter().enumerate() {
                let (rl, rh) = self.row_ranges[k][i];
                let (l, h) = (self.partial[k] + rl, self.partial[k] + rh);
                let ok = match cmp {
                    Comparator::Le => l <= rhs + 1e-6,
                    Comparator::Ge => h >= rhs - 1e-6,
                    Comparator::Eq => l <= rhs + 1e-6 && h >= rhs - 1e-6,
                };
                if !ok {
                    return;
                }
            }
            if i == self.x.len() {
                self.best = Some((obj_so_far, self.x.iter().map(|&v| v as f64).collect()));
                return;
            }
            for v in self.lo[i]..=self.hi[i] {
                self.x[i] = v;
                for (k, row) in self.rows.iter().enumerate() {
                    self.partial[k] += row.0[i] * v as f64;
                }
                self.go(i + 1, obj_so_far + self.obj[i] * v as f64);
                for (k, row) in self.rows.iter().enumerate() {
                    self.partial[k] -= row.0[i] * v as f64;
                }
            }
        }
    }

    let mut dfs = Dfs {
        rows: &rows,
        row_ranges: &row_ranges,
        obj: &obj,
        obj_range: &obj_range,
        lo: &lo,
        hi: &hi,
        x: lo.clone(),
        partial: vec![0.0; rows.len()],
        best: None,
    };
    dfs.go(0, 0.0);
    Ok(dfs.best)
}
