//! Comb strategy and the maximizers of the Hamiltonian `e_J^T D^2u e_J`.

use super::state::{rank4, ExpertSubset, RegretState};
use super::u4::u4_derivatives;
use crate::error::{invalid, Result};

/// `{i4, i2}`: the leader and the third-best expert under the ranking tie
/// convention.
pub fn comb_set(x: &RegretState) -> Result<ExpertSubset> {
    Ok(comb_set_array(&x.array4()?))
}

pub fn comb_set_array(x: &[f64; 4]) -> ExpertSubset {
    let (_, perm) = rank4(x);
    comb_from_perm(&perm)
}

/// The comb pair as `(i4, i2)`, 0-based.
pub fn comb_pair(x: &[f64; 4]) -> (usize, usize) {
    let (_, perm) = rank4(x);
    (perm[3], perm[1])
}

#[inline]
pub(crate) fn comb_from_perm(perm: &[usize; 4]) -> ExpertSubset {
    ExpertSubset::from_members(&[perm[3], perm[1]])
}

/// All subsets whose quadratic form is within `tol` of the maximum.
pub fn hamiltonian_argmax(x: &RegretState, tol: f64) -> Result<Vec<ExpertSubset>> {
    if !(tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let (_, h) = u4_derivatives(&x.array4()?);
    let values: Vec<(ExpertSubset, f64)> = ExpertSubset::all(4)
        .map(|j| (j, j.quadratic_form(&h)))
        .collect();
    let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(values
        .into_iter()
        .filter(|&(_, q)| q >= best - tol)
        .map(|(j, _)| j)
        .collect())
}
