//! The minimax step of the dynamic programming principle,
//! `inf_alpha max_J (c_J - alpha(J))` with `alpha(J) = sum_{i in J} alpha_i`.

use serde::{Deserialize, Serialize};

use super::lp::solve_game;
use crate::closed_form::ExpertSubset;
use crate::error::{invalid, Error, Result};

/// Geometric stopping parameter `delta` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StoppingParam(f64);

impl StoppingParam {
    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(Self(delta))
        } else {
            Err(invalid("delta", format!("{delta} is outside (0, 1]")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn sqrt(self) -> f64 {
        self.0.sqrt()
    }
}

impl TryFrom<f64> for StoppingParam {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StoppingParam> for f64 {
    fn from(d: StoppingParam) -> f64 {
        d.0
    }
}

/// Continuation values `c_J` for every subset `J`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetCosts {
    n: usize,
    c: Vec<f64>,
}

impl SubsetCosts {
    pub fn new(n: usize, c: Vec<f64>) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(invalid("n", format!("expert count {n} outside 1..=4")));
        }
        if c.len() != 1 << n {
            return Err(invalid("c", format!("expected {} subset costs, got {}", 1 << n, c.len())));
        }
        if let Some((index, &value)) = c.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { n, c })
    }

    pub fn from_fn(n: usize, f: impl Fn(ExpertSubset) -> f64) -> Result<Self> {
        Self::new(n, ExpertSubset::all(n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: ExpertSubset) -> f64 {
        self.c[j.bits() as usize]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.c
    }
}

/// Player mixed strategy over the `N` experts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedPlayer {
    pub alpha: Vec<f64>,
}

impl MixedPlayer {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        check_simplex("alpha", &alpha)?;
        Ok(Self { alpha })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            alpha: vec![1.0 / n as f64; n],
        }
    }

    /// `alpha(J)`, the probability that the pick lands in `J`.
    pub fn mass(&self, j: ExpertSubset) -> f64 {
        j.members().map(|i| self.alpha[i]).sum()
    }
}

/// Nature mixed strategy over subsets, indexed by bitmask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixedNature {
    pub beta: Vec<f64>,
}

impl MixedNature {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        check_simplex("beta", &beta)?;
        Ok(Self { beta })
    }

    pub fn prob(&self, j: ExpertSubset) -> f64 {
        self.beta[j.bits() as usize]
    }
}

fn check_simplex(name: &'static str, p: &[f64]) -> Result<()> {
    if p.iter().any(|&v| !(v >= -1e-12)) {
        return Err(invalid(name, "entries must be nonnegative"));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(invalid(name, format!("entries sum to {s}, not 1")));
    }
    Ok(())
}

#[inline]
fn loss(c: &[f64], j: usize, i: usize) -> f64 {
    c[j] - ((j >> i) & 1) as f64
}

/// Value of the minimax step and an optimal player strategy.
///
/// Solved as the game with nature (rows, maximizing) against the player
/// (columns, minimizing) on payoff `c_J - 1{i in J}`.
pub fn dpp_inner(c: &SubsetCosts) -> Result<(f64, MixedPlayer)> {
    let n = c.n;
    let s = solve_game(1 << n, n, |j, i| loss(&c.c, j, i))?;
    Ok((
        s.value,
        MixedPlayer {
            alpha: s.cols[..n].to_vec(),
        },
    ))
}

/// Both optimal strategies from one solve: `(value, alpha*, beta*)`.
pub fn dpp_saddle(c: &SubsetCosts) -> Result<(f64, MixedPlayer, MixedNature)> {
    let n = c.n;
    let s = solve_game(1 << n, n, |j, i| loss(&c.c, j, i))?;
    Ok((
        s.value,
        MixedPlayer {
            alpha: s.cols[..n].to_vec(),
        },
        MixedNature {
            beta: s.rows[..1 << n].to_vec(),
        },
    ))
}

/// The same value from nature's side, `sup_beta [sum_J beta_J c_J - max_i beta(J ∋ i)]`,
/// solved as a separate LP on the transposed, negated game.
pub fn dpp_inner_dual(c: &SubsetCosts) -> Result<(f64, MixedNature)> {
    let n = c.n;
    let s = solve_game(n, 1 << n, |i, j| -loss(&c.c, j, i))?;
    Ok((
        -s.value,
        MixedNature {
            beta: s.cols[..1 << n].to_vec(),
        },
    ))
}

/// Value only, for the value-iteration hot loop. `c` has `2^n` entries.
/// Uses the `n`-row formulation, whose tableau is the smaller one.
#[inline]
pub(crate) fn dpp_value(n: usize, c: &[f64]) -> Result<f64> {
    Ok(-solve_game(n, 1 << n, |i, j| -loss(c, j, i))?.value)
}

/// Nature's guaranteed value for a fixed `beta`:
/// `sum_J beta_J c_J - max_i P_beta(i in J)`.
pub fn nature_payoff(c: &SubsetCosts, beta: &MixedNature) -> f64 {
    let gain: f64 = c.c.iter().zip(&beta.beta).map(|(c, b)| c * b).sum();
    let best_pick = (0..c.n)
        .map(|i| {
            ExpertSubset::all(c.n)
                .filter(|j| j.contains(i))
                .map(|j| beta.prob(j))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    gain - best_pick
}

/// Player's guaranteed value for a fixed `alpha`: `max_J (c_J - alpha(J))`.
pub fn player_payoff(c: &SubsetCosts, alpha: &MixedPlayer) -> f64 {
    ExpertSubset::all(c.n)
        .map(|j| c.get(j) - alpha.mass(j))
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn saddle_strategies_certify_the_value() {
        let c = SubsetCosts::from_fn(3, |j| (j.bits() as f64 * 0.7).sin()).unwrap();
        let (v, a, b) = dpp_saddle(&c).unwrap();
        assert!((player_payoff(&c, &a) - v).abs() < 1e-10);
        assert!((nature_payoff(&c, &b) - v).abs() < 1e-10);
        MixedNature::new(b.beta.clone()).unwrap();
    }

    #[test]
    fn zero_costs() {
        let c = SubsetCosts::new(4, vec![0.0; 16]).unwrap();
        let (v, a) = dpp_inner(&c).unwrap();
        assert!(v.abs() < 1e-12);
        assert!(player_payoff(&c, &a).abs() < 1e-12);
        let (d, b) = dpp_inner_dual(&c).unwrap();
        assert!(d.abs() < 1e-12);
        assert!(nature_payoff(&c, &b).abs() < 1e-12);
    }

    #[test]
    fn two_experts_half() {
        let c = SubsetCosts::new(2, vec![0.0, 1.0, 1.0, 1.0]).unwrap();
        let (v, a) = dpp_inner(&c).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        assert!((a.alpha[0] - 0.5).abs() < 1e-12);
        let (d, _) = dpp_inner_dual(&c).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
    }

    #[test]
    fn constant_shift() {
        let base: Vec<f64> = (0..8).map(|k| (k as f64 * 0.37).sin()).collect();
        let c = SubsetCosts::new(3, base.clone()).unwrap();
        let k = 2.75;
        let shifted = SubsetCosts::new(3, base.iter().map(|v| v + k).collect()).unwrap();
        let (v0, _) = dpp_inner(&c).unwrap();
        let (v1, _) = dpp_inner(&shifted).unwrap();
        assert!((v1 - v0 - k).abs() < 1e-12);
    }

    #[test]
    fn validation() {
        assert!(SubsetCosts::new(2, vec![0.0; 3]).is_err());
        assert!(SubsetCosts::new(2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(SubsetCosts::new(5, vec![0.0; 32]).is_err());
        assert!(MixedPlayer::new(vec![0.5, 0.6]).is_err());
        assert!(MixedPlayer::new(vec![-0.5, 1.5]).is_err());
        assert!(StoppingParam::new(0.0).is_err());
        assert!(StoppingParam::new(1.0).is_ok());
        assert!(StoppingParam::new(1.5).is_err());
    }
}
