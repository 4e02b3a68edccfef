//! Value iteration for `V^delta` and for the value under balanced comb play.
//!
//! Both recursions run on `W = V - Phi` over the gap lattice. From the
//! representative `x = (0, y_1, y_1 + y_2, ...)` every move `x -> x + e_J` is
//! re-ranked, so a continuation value is `Phi(x') - Phi(x) + W(gaps(x'))`,
//! with `W` beyond the radius supplied by the [`BoundaryRule`]. Sweeps are
//! Jacobi style: each pass reads the previous iterate only.

use super::dpp::{dpp_value, StoppingParam};
use super::grid::{lattice_index, lattice_point, BoundaryRule, ValueGrid, GRID_FORMAT_VERSION};
use crate::closed_form::RegretState;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;

/// Which recursion to iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    /// `V = delta Phi + (1 - delta) inf_alpha sup_beta E[V(x + e_J) - alpha(J)]`.
    Minimax,
    /// Nature plays the comb set or its complement with probability 1/2 each,
    /// giving the linear recursion
    /// `V = delta Phi + (1 - delta) (V(x + e_C) + V(x - e_C)) / 2`.
    BalancedComb,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub n: usize,
    pub delta: StoppingParam,
    pub radius: usize,
    pub tol: f64,
    pub boundary: BoundaryRule,
    pub exec: Exec,
    /// Overrides the default cap of `10 * ceil(ln tol / ln(1 - delta))`.
    pub max_iter: Option<usize>,
}

impl SolveOptions {
    pub fn new(n: usize, delta: f64, radius: usize, tol: f64) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(invalid("n", format!("{n} experts unsupported (use 2, 3 or 4)")));
        }
        if radius < 4 {
            return Err(invalid("radius", "must be at least 4"));
        }
        if !(tol > 0.0) {
            return Err(invalid("tol", "must be positive"));
        }
        Ok(Self {
            n,
            delta: StoppingParam::new(delta)?,
            radius,
            tol,
            boundary: BoundaryRule::ContinuumClosure,
            exec: Exec::default(),
            max_iter: None,
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_boundary(mut self, boundary: BoundaryRule) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn iteration_cap(&self) -> usize {
        if let Some(cap) = self.max_iter {
            return cap;
        }
        let d = self.delta.get();
        if d >= 1.0 {
            return 10;
        }
        let k = (self.tol.ln() / (1.0 - d).ln()).ceil().max(1.0);
        10 * k as usize
    }
}

/// A converged grid plus the sup-norm change of every sweep.
#[derive(Debug, Clone)]
pub struct Solution {
    pub grid: ValueGrid,
    pub changes: Vec<f64>,
}

/// Precomputed moves: for point `p` and branch `b`, `target[p*k + b]` is the
/// flat index of the landing gap point (or `NONE`) and `base[p*k + b]` is
/// `Phi(x') - Phi(x)` plus the far-field value when the target is outside.
struct Transitions {
    branches: usize,
    target: Vec<u32>,
    base: Vec<f64>,
}

const NONE: u32 = u32::MAX;

impl Transitions {
    fn build(opts: &SolveOptions, dynamics: Dynamics) -> Self {
        let n = opts.n;
        let side = opts.radius + 1;
        let points = side.pow(n as u32 - 1);
        let moves: Vec<Vec<i64>> = match dynamics {
            Dynamics::Minimax => (0..1u32 << n)
                .map(|j| (0..n).map(|i| ((j >> i) & 1) as i64).collect())
                .collect(),
            // on the ranked representative the comb set is {N, N-2}
            Dynamics::BalancedComb => {
                let mut up = vec![0i64; n];
                up[n - 1] = 1;
                up[n - 3] = 1;
                let down = up.iter().map(|v| -v).collect();
                vec![up, down]
            }
        };
        let branches = moves.len();
        let mut target = vec![NONE; points * branches];
        let mut base = vec![0.0; points * branches];
        for p in 0..points {
            let y = lattice_point(side, n - 1, p);
            let mut x = vec![0i64; n];
            for k in 1..n {
                x[k] = x[k - 1] + y[k - 1];
            }
            let phi = x[n - 1];
            for (b, mv) in moves.iter().enumerate() {
                let mut nx: Vec<i64> = x.iter().zip(mv).map(|(a, d)| a + d).collect();
                nx.sort_unstable();
                let gaps: Vec<i64> = nx.windows(2).map(|w| w[1] - w[0]).collect();
                let dphi = (nx[n - 1] - phi) as f64;
                let slot = p * branches + b;
                match lattice_index(side, &gaps) {
                    Some(t) => {
                        target[slot] = t as u32;
                        base[slot] = dphi;
                    }
                    None => {
                        base[slot] = dphi + opts.boundary.far_field(n, opts.delta, &gaps);
                    }
                }
            }
        }
        Self {
            branches,
            target,
            base,
        }
    }

    #[inline]
    fn costs(&self, p: usize, w: &[f64], out: &mut [f64]) {
        let k = self.branches;
        for b in 0..k {
            let t = self.target[p * k + b];
            out[b] = self.base[p * k + b] + if t == NONE { 0.0 } else { w[t as usize] };
        }
    }
}

/// One Bellman application at point `p`; NaN flags an LP failure.
#[inline]
fn bellman(n: usize, dynamics: Dynamics, carry: f64, tr: &Transitions, w: &[f64], p: usize) -> f64 {
    let mut c = [0.0; 16];
    tr.costs(p, w, &mut c[..tr.branches]);
    match dynamics {
        Dynamics::Minimax => match dpp_value(n, &c[..tr.branches]) {
            Ok(v) => carry * v,
            Err(_) => f64::NAN,
        },
        Dynamics::BalancedComb => carry * 0.5 * (c[0] + c[1]),
    }
}

/// Runs value iteration to tolerance.
pub fn solve(opts: &SolveOptions, dynamics: Dynamics) -> Result<Solution> {
    if dynamics == Dynamics::BalancedComb && opts.n != 4 {
        return Err(invalid("n", "balanced comb dynamics are defined for 4 experts"));
    }
    let tr = Transitions::build(opts, dynamics);
    let points = tr.target.len() / tr.branches;
    let carry = 1.0 - opts.delta.get();
    let cap = opts.iteration_cap();

    let mut w = vec![0.0; points];
    let mut next = vec![0.0; points];
    let mut changes = Vec::new();
    let mut converged = false;
    for _ in 0..cap {
        opts.exec
            .fill(&mut next, |p| bellman(opts.n, dynamics, carry, &tr, &w, p));
        if next.iter().any(|v| v.is_nan()) {
            return Err(Error::Lp("minimax step failed during value iteration".into()));
        }
        let change = w
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut w, &mut next);
        changes.push(change);
        if change <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NotConverged {
            iterations: changes.len(),
            residual: changes.last().copied().unwrap_or(f64::NAN),
        });
    }

    let side = opts.radius + 1;
    let values = (0..points)
        .map(|p| w[p] + lattice_point(side, opts.n - 1, p).iter().sum::<i64>() as f64)
        .collect();
    Ok(Solution {
        grid: ValueGrid {
            format_version: GRID_FORMAT_VERSION,
            n: opts.n,
            delta: opts.delta,
            radius: opts.radius,
            boundary_rule: opts.boundary,
            tol: opts.tol,
            iterations: changes.len(),
            last_change: changes.last().copied().unwrap_or(0.0),
            values,
        },
        changes,
    })
}

/// Fixed point of the minimax recursion.
pub fn solve_vdelta(n: usize, delta: f64, radius: usize, tol: f64) -> Result<ValueGrid> {
    Ok(solve(&SolveOptions::new(n, delta, radius, tol)?, Dynamics::Minimax)?.grid)
}

/// Fixed point of the balanced-comb recursion for four experts.
pub fn solve_underline_u(delta: f64, radius: usize, tol: f64) -> Result<ValueGrid> {
    Ok(solve(&SolveOptions::new(4, delta, radius, tol)?, Dynamics::BalancedComb)?.grid)
}

/// `max_p |T(V)(p) - V(p)|` over the grid, for the given recursion.
pub fn dpp_residual(grid: &ValueGrid, dynamics: Dynamics, exec: Exec) -> Result<f64> {
    let opts = SolveOptions {
        n: grid.n,
        delta: grid.delta,
        radius: grid.radius,
        tol: grid.tol,
        boundary: grid.boundary_rule,
        exec,
        max_iter: None,
    };
    let tr = Transitions::build(&opts, dynamics);
    let side = grid.side();
    let w: Vec<f64> = (0..grid.len())
        .map(|p| grid.values[p] - lattice_point(side, grid.n - 1, p).iter().sum::<i64>() as f64)
        .collect();
    let carry = 1.0 - grid.delta.get();
    let res = exec.map(grid.len(), |p| (bellman(grid.n, dynamics, carry, &tr, &w, p) - w[p]).abs());
    if res.iter().any(|v| v.is_nan()) {
        return Err(Error::Lp("minimax step failed".into()));
    }
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// `u^delta(x) = sqrt(delta) V^delta(x / sqrt(delta))`, rounding `x / sqrt(delta)`
/// to the nearest lattice point coordinatewise.
pub fn rescaled_value(grid: &ValueGrid, x: &RegretState) -> Result<f64> {
    x.expect_dim(grid.n)?;
    let r = grid.delta.sqrt();
    let xi: Vec<i64> = x.as_slice().iter().map(|v| (v / r).round() as i64).collect();
    Ok(r * grid.at_state(&xi)?)
}
