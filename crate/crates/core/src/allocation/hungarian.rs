//! Minimum-cost assignment (Kuhn–Munkres with potentials, O(n²m)).

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Cost given to padding columns when there are more rows than columns.
pub const PAD_COST: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment<R> {
    /// Column assigned to each row; `None` for rows left unassigned because
    /// there were too few columns or only forbidden ones remained.
    pub columns: Vec<Option<usize>>,
    /// Sum of the original costs of the assigned pairs, in row order.
    pub total: R,
}

/// Solves the rows ≤ cols case on a finite matrix. Returns the column of each row.
fn solve_rect<R: Real>(a: &[Vec<R>], m: usize) -> Vec<usize> {
    let n = a.len();
    debug_assert!(n <= m);
    // 1-based arrays as in the classical formulation; index 0 is the sentinel.
    let mut u = vec![R::zero(); n + 1];
    let mut v = vec![R::zero(); m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![R::infinity(); m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = R::infinity();
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a[i0 - 1][j - 1] - u[i0] - v[j];
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
    let mut ans = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            ans[p[j] - 1] = j - 1;
        }
    }
    ans
}

fn total_of<R: Real>(a: &[Vec<R>], cols: &[usize]) -> R {
    cols.iter().enumerate().fold(R::zero(), |acc, (i, &j)| acc + a[i][j])
}

/// Optimal assignment of `cost` (rows × cols). Non-finite entries are
/// forbidden pairs. Among optimal assignments the lexicographically smallest
/// column sequence is returned.
pub fn hungarian<R: Real>(cost: &[Vec<R>]) -> Result<Assignment<R>> {
    let n = cost.len();
    if n == 0 {
        return Ok(Assignment { columns: Vec::new(), total: R::zero() });
    }
    let m = cost[0].len();
    assert!(cost.iter().all(|r| r.len() == m), "ragged cost matrix");
    for (row, r) in cost.iter().enumerate() {
        if !r.iter().any(|c| c.is_finite()) {
            return Err(Error::InfeasibleMatrix { row });
        }
    }

    let max_abs = cost
        .iter()
        .flatten()
        .filter(|c| c.is_finite())
        .fold(R::zero(), |acc, c| acc.max(c.abs()));
    let pad = R::lit(PAD_COST).max(max_abs * R::lit(4.0) * R::from_usize(n + 1).unwrap());
    let forbidden = pad * R::lit(4.0) * R::from_usize(n + 1).unwrap();
    let width = m.max(n);
    let a: Vec<Vec<R>> = cost
        .iter()
        .map(|r| {
            (0..width)
                .map(|j| match r.get(j) {
                    Some(c) if c.is_finite() => *c,
                    Some(_) => forbidden,
                    None => pad,
                })
                .collect()
        })
        .collect();

    let best = total_of(&a, &solve_rect(&a, width));
    let tol = R::lit(1e-9) * (R::one() + best.abs());

    // Fix rows in order to the smallest column that still admits an optimum.
    let mut fixed: Vec<usize> = Vec::with_capacity(n);
    let mut fixed_cost = R::zero();
    for i in 0..n {
        let mut chosen = None;
        for j in 0..width {
            if fixed.contains(&j) {
                continue;
            }
            let rest_cols: Vec<usize> = (0..width).filter(|c| *c != j && !fixed.contains(c)).collect();
            let sub: Vec<Vec<R>> = a[i + 1..].iter().map(|r| rest_cols.iter().map(|&c| r[c]).collect()).collect();
            let sub_total = if sub.is_empty() { R::zero() } else { total_of(&sub, &solve_rect(&sub, rest_cols.len())) };
            if fixed_cost + a[i][j] + sub_total <= best + tol {
                chosen = Some(j);
                break;
            }
        }
        let j = chosen.expect("an optimal completion always exists");
        fixed_cost += a[i][j];
        fixed.push(j);
    }

    let columns: Vec<Option<usize>> =
        fixed.iter().enumerate().map(|(i, &j)| (j < m && cost[i][j].is_finite()).then_some(j)).collect();
    let total = columns
        .iter()
        .enumerate()
        .filter_map(|(i, j)| j.map(|j| cost[i][j]))
        .fold(R::zero(), |acc, c| acc + c);
    Ok(Assignment { columns, total })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let a = hungarian(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert_eq!(a.columns, vec![Some(0), Some(1)]);
        assert_eq!(a.total, 2.0);
        let a = hungarian(&[vec![5.0]]).unwrap();
        assert_eq!(a.columns, vec![Some(0)]);
        assert_eq!(a.total, 5.0);
    }

    #[test]
    fn ties_break_lexicographically() {
        let a = hungarian(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(a.columns, vec![Some(0), Some(1)]);
        let a = hungarian(&[vec![3.0, 1.0, 1.0]]).unwrap();
        assert_eq!(a.columns, vec![Some(1)]);
    }

    #[test]
    fn forbidden_entries_and_infeasible_rows() {
        let inf = f64::INFINITY;
        let a = hungarian(&[vec![inf, 4.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(a.columns, vec![Some(1), Some(0)]);
        assert_eq!(a.total, 5.0);
        let err = hungarian(&[vec![1.0, 2.0], vec![inf, f64::NAN]]).unwrap_err();
        assert!(matches!(err, Error::InfeasibleMatrix { row: 1 }));
        // both rows can only use column 0: one of them loses
        let a = hungarian(&[vec![1.0, inf], vec![2.0, inf]]).unwrap();
        assert_eq!(a.columns, vec![Some(0), None]);
    }

    #[test]
    fn more_rows_than_columns() {
        let a = hungarian(&[vec![3.0], vec![1.0], vec![2.0]]).unwrap();
        assert_eq!(a.columns, vec![None, Some(0), None]);
        assert_eq!(a.total, 1.0);
    }

    #[test]
    fn empty_matrix() {
        let a = hungarian::<f64>(&[]).unwrap();
        assert!(a.columns.is_empty());
    }
}
