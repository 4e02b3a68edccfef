//! Value grids on the truncated gap lattice and their JSON form.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dpp::StoppingParam;
use crate::closed_form::{rank_perm, v3_raw, w2_gap, w3_gaps};
use crate::error::{invalid, Error, Result};

pub const GRID_FORMAT_VERSION: u32 = 1;

/// How continuation values beyond the truncation radius are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRule {
    /// `Phi(x) + w(sqrt(delta) y) / sqrt(delta)` with `w` the closed-form gap
    /// value of the continuum limit for the given `N`.
    ContinuumClosure,
    /// `Phi(x)`: the game is treated as already stopped.
    Phi,
}

impl BoundaryRule {
    /// Far-field value of `V - Phi` at integer gaps `y`.
    pub fn far_field(self, n: usize, delta: StoppingParam, y: &[i64]) -> f64 {
        match self {
            BoundaryRule::Phi => 0.0,
            BoundaryRule::ContinuumClosure => {
                let r = delta.sqrt();
                let s = |k: usize| y[k] as f64 * r;
                let w = match n {
                    2 => w2_gap(s(0)),
                    3 => w3_gaps(s(0), s(1)),
                    4 => v3_raw([s(0), s(1), s(2)]),
                    _ => 0.0,
                };
                w / r
            }
        }
    }
}

/// `V^delta` on gap lattice points `y in {0..=radius}^{N-1}`.
///
/// `values` is row-major over `(y_1, ..., y_{N-1})` (last gap fastest) and
/// holds `V^delta` at the representative point
/// `(0, y_1, y_1 + y_2, ...)` whose smallest coordinate is 0. Values at other
/// integer points follow by permutation symmetry and `V(x + k 1) = V(x) + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    pub format_version: u32,
    pub n: usize,
    pub delta: StoppingParam,
    pub radius: usize,
    pub boundary_rule: BoundaryRule,
    pub tol: f64,
    pub iterations: usize,
    pub last_change: f64,
    pub values: Vec<f64>,
}

impl ValueGrid {
    pub fn side(&self) -> usize {
        self.radius + 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Flat index of gap point `y`, or `None` outside the truncation.
    pub fn index_of(&self, y: &[i64]) -> Option<usize> {
        lattice_index(self.side(), y)
    }

    /// Gap point of flat index `k`.
    pub fn point(&self, k: usize) -> Vec<i64> {
        lattice_point(self.side(), self.n - 1, k)
    }

    /// `V^delta` at the representative point with gaps `y`.
    pub fn at_gaps(&self, y: &[i64]) -> Result<f64> {
        match self.index_of(y) {
            Some(k) => Ok(self.values[k]),
            None => Err(out_of_range(y, self.radius)),
        }
    }

    /// `V^delta` at an arbitrary integer state.
    pub fn at_state(&self, x: &[i64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::Dimension {
                expected: self.n,
                got: x.len(),
            });
        }
        let (min, gaps) = integer_gaps(x);
        Ok(self.at_gaps(&gaps)? + min as f64)
    }

    /// `V^delta(0)`.
    pub fn origin(&self) -> f64 {
        self.values[0]
    }

    /// `sqrt(delta) V^delta(0)`, the rescaled value at the origin.
    pub fn rescaled_origin(&self) -> f64 {
        self.delta.sqrt() * self.origin()
    }

    /// `sqrt(delta) max_y |V(y) - Phi(y)|` over the grid: an empirical
    /// constant for the uniform bound `|V - Phi| <= M / sqrt(delta)`.
    pub fn scaled_max_excess(&self) -> f64 {
        let mut m = 0.0f64;
        for (k, v) in self.values.iter().enumerate() {
            let phi: i64 = self.point(k).iter().sum();
            m = m.max((v - phi as f64).abs());
        }
        self.delta.sqrt() * m
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let grid: ValueGrid = serde_json::from_str(s)?;
        if grid.format_version != GRID_FORMAT_VERSION {
            return Err(Error::GridVersion(grid.format_version));
        }
        let expect = grid.side().pow(grid.n as u32 - 1);
        if grid.values.len() != expect {
            return Err(invalid(
                "values",
                format!("expected {expect} entries for n={} radius={}, got {}", grid.n, grid.radius, grid.values.len()),
            ));
        }
        Ok(grid)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}

fn out_of_range(y: &[i64], radius: usize) -> Error {
    let coordinate = y.iter().copied().max().unwrap_or(0);
    Error::OutOfTruncation { coordinate, radius }
}

pub(crate) fn lattice_index(side: usize, y: &[i64]) -> Option<usize> {
    let mut k = 0usize;
    for &c in y {
        if c < 0 || c as usize >= side {
            return None;
        }
        k = k * side + c as usize;
    }
    Some(k)
}

pub(crate) fn lattice_point(side: usize, dims: usize, mut k: usize) -> Vec<i64> {
    let mut y = vec![0i64; dims];
    for slot in y.iter_mut().rev() {
        *slot = (k % side) as i64;
        k /= side;
    }
    y
}

/// Smallest coordinate and ranked gaps of an integer state.
pub(crate) fn integer_gaps(x: &[i64]) -> (i64, Vec<i64>) {
    let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
    let perm = rank_perm(&xf);
    let sorted: Vec<i64> = perm.iter().map(|&i| x[i]).collect();
    (sorted[0], sorted.windows(2).map(|w| w[1] - w[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trip() {
        let side = 7;
        for k in [0, 1, 6, 7, 48, 342] {
            let y = lattice_point(side, 3, k);
            assert_eq!(lattice_index(side, &y), Some(k));
        }
        assert_eq!(lattice_index(7, &[0, 7, 0]), None);
        assert_eq!(lattice_index(7, &[0, -1, 0]), None);
    }

    #[test]
    fn gaps_of_integer_state() {
        assert_eq!(integer_gaps(&[5, 1, 5, 1]), (1, vec![0, 4, 0]));
        assert_eq!(integer_gaps(&[3, -2]), (-2, vec![5]));
    }

    #[test]
    fn far_field_decays() {
        let d = StoppingParam::new(0.04).unwrap();
        let near = BoundaryRule::ContinuumClosure.far_field(4, d, &[0, 0, 0]);
        let far = BoundaryRule::ContinuumClosure.far_field(4, d, &[40, 40, 40]);
        assert!((near * 0.2 - crate::closed_form::U4_ORIGIN).abs() < 1e-12);
        let farther = BoundaryRule::ContinuumClosure.far_field(4, d, &[60, 60, 60]);
        assert!(far > 0.0 && far < 1e-3 && farther < far * 1e-3);
        assert_eq!(BoundaryRule::Phi.far_field(3, d, &[1, 2]), 0.0);
    }
}
