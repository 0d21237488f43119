//! Minimum-cost one-to-one assignment for rectangular cost matrices.
//!
//! Shortest augmenting path formulation of the Hungarian method with row and
//! column potentials, O(k^2 * max(m, n)) for k = min(m, n). With
//! integer-valued costs every intermediate quantity is an integer, so the
//! optimum is exact.

use serde::{Deserialize, Serialize};

/// Costs at or above this value mark forbidden (gated) pairs.
pub const GATED_COST: f64 = 1e5;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentResult {
    /// `(row, column)` pairs, sorted by row.
    pub matches: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

impl AssignmentResult {
    pub fn total_cost(&self, cost: &[Vec<f64>]) -> f64 {
        self.matches.iter().map(|&(r, c)| cost[r][c]).sum()
    }
}

/// Solves the assignment problem on `cost` (rows x columns).
///
/// Every row is matched when `rows <= cols` and every column otherwise,
/// except that pairs with cost `>= GATED_COST` are never reported as
/// matches: the solver first maximizes the number of admissible pairs and
/// then minimizes their total cost.
///
/// # Panics
///
/// If rows have different lengths or any entry is NaN.
pub fn assign(cost: &[Vec<f64>]) -> AssignmentResult {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");
    assert!(cost.iter().flatten().all(|c| !c.is_nan()), "NaN in cost matrix");
    if rows == 0 || cols == 0 {
        return AssignmentResult {
            matches: vec![],
            unmatched_rows: (0..rows).collect(),
            unmatched_cols: (0..cols).collect(),
        };
    }

    // Forbidden entries get a penalty larger than any spread of admissible
    // totals, so an extra admissible pair always wins.
    let admissible = cost.iter().flatten().copied().filter(|&c| c < GATED_COST);
    let (lo, hi) = admissible.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) };
    let k = rows.min(cols) as f64;
    let penalty = hi + (hi - lo + 1.0) * (k + 1.0);
    let entry = |r: usize, c: usize| -> f64 {
        let v = cost[r][c];
        if v >= GATED_COST {
            penalty
        } else {
            v
        }
    };

    let transposed = rows > cols;
    let (n, m) = if transposed { (cols, rows) } else { (rows, cols) };
    let a = |i: usize, j: usize| if transposed { entry(j, i) } else { entry(i, j) };

    let row_of_col = solve(n, m, a);

    let mut matches = Vec::with_capacity(n);
    for (j, &i) in row_of_col.iter().enumerate() {
        if let Some(i) = i {
            let (r, c) = if transposed { (j, i) } else { (i, j) };
            if cost[r][c] < GATED_COST {
                matches.push((r, c));
            }
        }
    }
    matches.sort_unstable();
    let mut row_used = vec![false; rows];
    let mut col_used = vec![false; cols];
    for &(r, c) in &matches {
        row_used[r] = true;
        col_used[c] = true;
    }
    AssignmentResult {
        matches,
        unmatched_rows: (0..rows).filter(|&r| !row_used[r]).collect(),
        unmatched_cols: (0..cols).filter(|&c| !col_used[c]).collect(),
    }
}

/// Core solver for `n <= m`. Returns, per column, the row assigned to it.
fn solve(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<Option<usize>> {
    debug_assert!(n <= m);
    // 1-based internally; index 0 is the virtual root.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    (1..=m).map(|j| (p[j] != 0).then(|| p[j] - 1)).collect()
}
