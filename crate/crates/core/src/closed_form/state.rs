//! Points, rankings, gaps and expert subsets.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest expert count supported anywhere in the crate.
pub const MAX_EXPERTS: usize = 4;

/// Expert-minus-player gain differences `x_i = G^i - G`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretState {
    x: Vec<f64>,
}

impl RegretState {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Dimension {
                expected: 2,
                got: 0,
            });
        }
        if let Some((index, &value)) = x.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { x })
    }

    pub fn from_slice(x: &[f64]) -> Result<Self> {
        Self::new(x.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.x
    }

    /// Errors unless the point has exactly `n` coordinates.
    pub fn expect_dim(&self, n: usize) -> Result<()> {
        if self.x.len() == n {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: n,
                got: self.x.len(),
            })
        }
    }

    pub(crate) fn array4(&self) -> Result<[f64; 4]> {
        self.expect_dim(4)?;
        Ok([self.x[0], self.x[1], self.x[2], self.x[3]])
    }
}

/// Ranked coordinates `x^(1) <= ... <= x^(N)` together with the permutation
/// `perm[k]` = original (0-based) index of the k-th smallest coordinate.
/// Ties are ordered by original index.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedState {
    pub sorted: Vec<f64>,
    pub perm: Vec<usize>,
}

impl RankedState {
    /// Gaps between consecutive ranked coordinates.
    pub fn gaps(&self) -> GapVector {
        GapVector {
            y: self.sorted.windows(2).map(|w| w[1] - w[0]).collect(),
        }
    }
}

pub fn rank(x: &RegretState) -> RankedState {
    let perm = rank_perm(x.as_slice());
    RankedState {
        sorted: perm.iter().map(|&i| x.as_slice()[i]).collect(),
        perm,
    }
}

/// Stable ordering by (value, index).
pub(crate) fn rank_perm(x: &[f64]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..x.len()).collect();
    perm.sort_by(|&i, &j| x[i].total_cmp(&x[j]).then(i.cmp(&j)));
    perm
}

/// Fixed-size ranking for the hot paths; same tie convention as [`rank`].
pub(crate) fn rank4(x: &[f64; 4]) -> ([f64; 4], [usize; 4]) {
    let mut perm = [0usize, 1, 2, 3];
    // insertion sort is stable, so equal values keep index order
    for i in 1..4 {
        let mut j = i;
        while j > 0 && x[perm[j - 1]] > x[perm[j]] {
            perm.swap(j - 1, j);
            j -= 1;
        }
    }
    ([x[perm[0]], x[perm[1]], x[perm[2]], x[perm[3]]], perm)
}

/// `Phi(x) = max_i x_i`.
pub fn phi(x: &RegretState) -> f64 {
    x.as_slice().iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Ordered nonnegative gaps `y_k = x^(k+1) - x^(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapVector {
    y: Vec<f64>,
}

impl GapVector {
    pub fn new(y: Vec<f64>) -> Result<Self> {
        for (index, &value) in y.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index, value });
            }
            if value < 0.0 {
                return Err(Error::NegativeGap { index, value });
            }
        }
        Ok(Self { y })
    }

    pub fn from_state(x: &RegretState) -> Self {
        rank(x).gaps()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.y.len()
    }

    pub(crate) fn array3(&self) -> Result<[f64; 3]> {
        if self.y.len() != 3 {
            return Err(Error::Dimension {
                expected: 3,
                got: self.y.len(),
            });
        }
        Ok([self.y[0], self.y[1], self.y[2]])
    }
}

/// A subset of experts stored as a bitmask; bit `i` is expert `i` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExpertSubset(u8);

impl ExpertSubset {
    pub const EMPTY: ExpertSubset = ExpertSubset(0);

    pub fn new(bits: u8, n: usize) -> Result<Self> {
        if n == 0 || n > MAX_EXPERTS {
            return Err(crate::error::invalid("n", format!("expert count {n} outside 1..=4")));
        }
        if bits >> n != 0 {
            return Err(crate::error::invalid(
                "bits",
                format!("mask {bits:#b} has members beyond expert {n}"),
            ));
        }
        Ok(Self(bits))
    }

    /// Builds a subset from 0-based member indices.
    pub fn from_members(members: &[usize]) -> Self {
        Self(members.iter().fold(0u8, |m, &i| m | (1 << i)))
    }

    pub fn full(n: usize) -> Self {
        Self(((1u16 << n) - 1) as u8)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn complement(self, n: usize) -> Self {
        Self(!self.0 & Self::full(n).0)
    }

    /// 0-based members in increasing order.
    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..8).filter(move |&i| self.contains(i))
    }

    /// All `2^n` subsets, ordered by bitmask.
    pub fn all(n: usize) -> impl Iterator<Item = ExpertSubset> {
        (0..(1u16 << n)).map(|b| ExpertSubset(b as u8))
    }

    /// `e_J^T M e_J` for a row-major `n x n` matrix.
    pub fn quadratic_form(self, m: &[[f64; 4]; 4]) -> f64 {
        let mut acc = 0.0;
        for i in self.members() {
            for j in self.members() {
                acc += m[i][j];
            }
        }
        acc
    }
}

impl fmt::Display for ExpertSubset {
    /// 1-based members, e.g. `{2,4}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(v: &[f64]) -> RegretState {
        RegretState::from_slice(v).unwrap()
    }

    #[test]
    fn rank_sorted_input() {
        let r = rank(&st(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(r.sorted, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(r.perm, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rank_ties_follow_index() {
        let r = rank(&st(&[0.0; 4]));
        assert_eq!(r.perm, vec![0, 1, 2, 3]);

        let r = rank(&st(&[5.0, 1.0, 5.0, 1.0]));
        assert_eq!(r.sorted, vec![1.0, 1.0, 5.0, 5.0]);
        // (2,4,1,3) in 1-based indexing
        assert_eq!(r.perm, vec![1, 3, 0, 2]);
    }

    #[test]
    fn rank4_matches_rank() {
        for x in [[5.0, 1.0, 5.0, 1.0], [0.0; 4], [3.0, -1.0, 2.0, 2.0], [4.0, 3.0, 2.0, 1.0]] {
            let (s, p) = rank4(&x);
            let r = rank(&st(&x));
            assert_eq!(s.to_vec(), r.sorted);
            assert_eq!(p.to_vec(), r.perm);
        }
    }

    #[test]
    fn non_finite_rejected() {
        assert!(matches!(
            RegretState::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
        assert!(RegretState::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&st(&[1.0, 2.0, 3.0, 4.0])), 4.0);
        assert_eq!(phi(&st(&[0.0; 4])), 0.0);
        assert_eq!(phi(&st(&[-3.0, -1.0, -2.0, -5.0])), -1.0);
    }

    #[test]
    fn negative_gap_rejected() {
        assert!(matches!(
            GapVector::new(vec![0.1, -0.2, 0.0]),
            Err(Error::NegativeGap { index: 1, .. })
        ));
    }

    #[test]
    fn subset_basics() {
        let j = ExpertSubset::from_members(&[3, 1]);
        assert_eq!(j.to_string(), "{2,4}");
        assert_eq!(j.complement(4).to_string(), "{1,3}");
        assert_eq!(ExpertSubset::all(4).count(), 16);
        assert!(ExpertSubset::new(0b10000, 4).is_err());
        assert!(ExpertSubset::new(0b1000, 4).is_ok());
        assert_eq!(ExpertSubset::full(3).complement(3), ExpertSubset::EMPTY);
    }
}
