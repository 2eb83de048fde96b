//! Dense exact rational simplex method with Bland's rule.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub type Q = BigRational;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Q, x: Vec<Q> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    /// Reduced costs, with minus the objective value in the last slot.
    cost: Vec<Q>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn price(&mut self, c: &[Q]) {
        let w = self.width();
        let mut cost: Vec<Q> = c.iter().cloned().chain(std::iter::once(Q::zero())).collect();
        cost.resize(w + 1, Q::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if cb.is_zero() {
                continue;
            }
            for (k, v) in self.rows[i].iter().enumerate() {
                cost[k] -= &cb * v;
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.rows[r][col].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        if !self.cost[col].is_zero() {
            let f = self.cost[col].clone();
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= &f * pv;
            }
        }
        self.basis[r] = col;
    }

    /// Runs to optimality over the columns `< limit`. Returns false when
    /// unbounded.
    fn run(&mut self, limit: usize) -> bool {
        let w = self.width();
        loop {
            let Some(col) = (0..limit).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Q)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[w] / &row[col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, col),
                None => return false,
            }
        }
    }
}

/// Minimizes `c·x` subject to `A x = b`, `x ≥ 0`.
pub fn minimize(a: &[Vec<Q>], b: &[Q], c: &[Q]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    // phase one: one artificial column per row
    let mut rows = Vec::with_capacity(m);
    for (i, (row, rhs)) in a.iter().zip(b).enumerate() {
        let flip = rhs.is_negative();
        let mut r: Vec<Q> = row.iter().map(|v| if flip { -v } else { v.clone() }).collect();
        r.extend((0..m).map(|k| if k == i { Q::from_integer(1.into()) } else { Q::zero() }));
        r.push(if flip { -rhs } else { rhs.clone() });
        rows.push(r);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cost: vec![Q::zero(); n + m + 1],
    };
    let phase_one: Vec<Q> = (0..n + m)
        .map(|j| if j < n { Q::zero() } else { Q::from_integer(1.into()) })
        .collect();
    t.price(&phase_one);
    t.run(n + m);
    if !t.cost[n + m].is_zero() {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis, dropping redundant rows
    let mut i = 0;
    while i < t.rows.len() {
        if t.basis[i] >= n {
            match (0..n).find(|&j| !t.rows[i][j].is_zero()) {
                Some(j) => t.pivot(i, j),
                None => {
                    t.rows.remove(i);
                    t.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }
    for row in t.rows.iter_mut() {
        let rhs = row[n + m].clone();
        row.truncate(n);
        row.push(rhs);
    }
    t.cost = vec![Q::zero(); n + 1];
    t.price(c);
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![Q::zero(); n];
    for (row, &b) in t.rows.iter().zip(&t.basis) {
        x[b] = row[n].clone();
    }
    LpOutcome::Optimal {
        value: -t.cost[n].clone(),
        x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Q {
        Q::from_integer(v.into())
    }

    #[test]
    fn small_programs() {
        // min x + y with x + 2y = 4, x - y = 1 → x = 2, y = 1
        let a = vec![vec![q(1), q(2)], vec![q(1), q(-1)]];
        match minimize(&a, &[q(4), q(1)], &[q(1), q(1)]) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, q(3));
                assert_eq!(x, vec![q(2), q(1)]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(minimize(&[vec![q(1)]], &[q(-1)], &[q(0)]), LpOutcome::Infeasible);
        let a = vec![vec![q(1), q(-1)]];
        assert_eq!(minimize(&a, &[q(0)], &[q(-1), q(0)]), LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let a = vec![vec![q(1), q(1)], vec![q(2), q(2)]];
        match minimize(&a, &[q(1), q(2)], &[q(1), q(2)]) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, q(1)),
            other => panic!("{other:?}"),
        }
    }
}
