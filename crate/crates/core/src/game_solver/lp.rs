//! Dense simplex for the small zero-sum matrix games behind the minimax step.
//!
//! A game with payoff `A` (row player maximizes, column player minimizes) is
//! shifted to `A + k >= 1` and solved as
//!
//! ```text
//! maximize 1^T z   subject to   (A + k) z <= 1,  z >= 0
//! ```
//!
//! whose optimum `Z` gives the value `1/Z - k`, the minimizing column
//! strategy `z / Z` and, through the slack reduced costs, the maximizing row
//! strategy. Pivoting follows
//! Bland's rule (lowest index enters, lowest basic index leaves on ties).

use crate::error::{Error, Result};

pub(crate) const MAX_ROWS: usize = 16;
pub(crate) const MAX_COLS: usize = 16;
const WIDTH: usize = MAX_COLS + MAX_ROWS + 1;
const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 500;

#[derive(Debug, Clone, Copy)]
pub(crate) struct GameSolution {
    pub value: f64,
    pub rows: [f64; MAX_ROWS],
    pub cols: [f64; MAX_COLS],
}

/// Solves the `m x n` game with payoff `payoff(i, j)`.
pub(crate) fn solve_game(
    m: usize,
    n: usize,
    payoff: impl Fn(usize, usize) -> f64,
) -> Result<GameSolution> {
    debug_assert!(m <= MAX_ROWS && n <= MAX_COLS && m > 0 && n > 0);
    let mut a = [[0.0; MAX_COLS]; MAX_ROWS];
    let mut lo = f64::INFINITY;
    for (i, row) in a.iter_mut().enumerate().take(m) {
        for (j, v) in row.iter_mut().enumerate().take(n) {
            *v = payoff(i, j);
            if !v.is_finite() {
                return Err(Error::Lp(format!("payoff ({i},{j}) is not finite")));
            }
            lo = lo.min(*v);
        }
    }
    let shift = 1.0 - lo;

    // columns: z_0..z_{n-1}, slack_0..slack_{m-1}, rhs
    let rhs = n + m;
    let mut t = [[0.0; WIDTH]; MAX_ROWS];
    let mut basis = [0usize; MAX_ROWS];
    for i in 0..m {
        for j in 0..n {
            t[i][j] = a[i][j] + shift;
        }
        t[i][n + i] = 1.0;
        t[i][rhs] = 1.0;
        basis[i] = n + i;
    }
    // reduced costs of the maximization objective; obj[rhs] holds -Z
    let mut obj = [0.0; WIDTH];
    obj[..n].fill(1.0);

    let mut pivots = 0;
    loop {
        let Some(enter) = (0..n + m).find(|&j| obj[j] > PIVOT_EPS) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            let coef = t[i][enter];
            if coef > PIVOT_EPS {
                let ratio = t[i][rhs] / coef;
                let better = match leave {
                    None => true,
                    Some(l) => {
                        ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis[i] < basis[l])
                    }
                };
                if better {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        // the feasible region is bounded because every shifted entry is >= 1
        let Some(r) = leave else {
            return Err(Error::Lp("unbounded pivot column".into()));
        };
        let p = t[r][enter];
        for v in t[r][..=rhs].iter_mut() {
            *v /= p;
        }
        let pivot_row = t[r];
        for (i, row) in t.iter_mut().enumerate().take(m) {
            if i != r {
                let f = row[enter];
                if f != 0.0 {
                    for k in 0..=rhs {
                        row[k] -= f * pivot_row[k];
                    }
                }
            }
        }
        let f = obj[enter];
        for k in 0..=rhs {
            obj[k] -= f * pivot_row[k];
        }
        basis[r] = enter;
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Lp(format!("no optimum after {MAX_PIVOTS} pivots")));
        }
    }

    let total = -obj[rhs];
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Lp(format!("degenerate optimum {total}")));
    }
    let mut cols = [0.0; MAX_COLS];
    for i in 0..m {
        if basis[i] < n {
            cols[basis[i]] = t[i][rhs].max(0.0) / total;
        }
    }
    let mut rows = [0.0; MAX_ROWS];
    let mut dual_sum = 0.0;
    for i in 0..m {
        let y = (-obj[n + i]).max(0.0);
        rows[i] = y;
        dual_sum += y;
    }
    for r in rows.iter_mut().take(m) {
        *r /= dual_sum;
    }
    Ok(GameSolution {
        value: 1.0 / total - shift,
        rows,
        cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_pennies() {
        let a = [[1.0, -1.0], [-1.0, 1.0]];
        let s = solve_game(2, 2, |i, j| a[i][j]).unwrap();
        assert!(s.value.abs() < 1e-14);
        assert!((s.rows[0] - 0.5).abs() < 1e-14);
        assert!((s.cols[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn three_by_three() {
        // maximizing row player: value 1/12 with (1/4, 1/3, 5/12)
        let a = [[0.0, 2.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]];
        let s = solve_game(3, 3, |i, j| a[i][j]).unwrap();
        assert!((s.value - 1.0 / 12.0).abs() < 1e-12);
        let expect_rows = [0.25, 1.0 / 3.0, 5.0 / 12.0];
        let expect_cols = [1.0 / 3.0, 0.25, 5.0 / 12.0];
        for k in 0..3 {
            assert!((s.rows[k] - expect_rows[k]).abs() < 1e-12);
            assert!((s.cols[k] - expect_cols[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_point() {
        // row 1 dominates for the maximizer, column 1 is then the minimizer's pick
        let a = [[3.0, 1.0], [4.0, 2.0]];
        let s = solve_game(2, 2, |i, j| a[i][j]).unwrap();
        assert!((s.value - 2.0).abs() < 1e-12);
        assert!((s.rows[1] - 1.0).abs() < 1e-12);
        assert!((s.cols[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nan() {
        assert!(solve_game(1, 1, |_, _| f64::NAN).is_err());
    }
}
