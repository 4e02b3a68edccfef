//! Scalar closed forms: the N=3 value, the reflected-motion value `v`, its
//! diagonal restriction `V`, and the boundary functions of the hyperbolic
//! system.
//!
//! Formulas are written with the `1/sqrt(2)` argument scalings kept as-is so
//! each line can be checked against its printed source.

use std::f64::consts::{PI, SQRT_2};

use super::state::{rank_perm, GapVector, RegretState};
use crate::error::{Error, Result};

/// Below this distance from the singular point, `arctanh(e^s) * (...)` is
/// replaced by its limit 0.
pub const SINGULAR_EPS: f64 = 1e-12;

/// `pi / (4 sqrt 2)`, the value of `u` and `v` at the origin.
pub const U4_ORIGIN: f64 = PI / (4.0 * SQRT_2);

/// `2 / (3 sqrt 2)`, the value of the N=3 function at the origin.
pub const U3_ORIGIN: f64 = 2.0 / (3.0 * SQRT_2);

/// `arctanh(e^s)` for `s < 0`, as `0.5 * ln1p(2 e^s / (1 - e^s))`.
#[inline]
pub(crate) fn arctanh_exp(s: f64) -> f64 {
    debug_assert!(s < 0.0);
    let w = s.exp();
    0.5 * (2.0 * w / -s.exp_m1()).ln_1p()
}

/// N=3 limit value
/// `x^(3) + e^{sqrt2 (x^(2)-x^(3))}/(2 sqrt2) + e^{sqrt2 (2x^(1)-x^(2)-x^(3))}/(6 sqrt2)`.
pub fn u3(x: &RegretState) -> Result<f64> {
    x.expect_dim(3)?;
    let p = rank_perm(x.as_slice());
    let z = [x.as_slice()[p[0]], x.as_slice()[p[1]], x.as_slice()[p[2]]];
    Ok(u3_sorted(&z))
}

pub(crate) fn u3_sorted(z: &[f64; 3]) -> f64 {
    z[2] + (SQRT_2 * (z[1] - z[2])).exp() / (2.0 * SQRT_2)
        + (SQRT_2 * (2.0 * z[0] - z[1] - z[2])).exp() / (6.0 * SQRT_2)
}

/// Gap form of [`u3`]: `u3(x) - Phi(x)` as a function of `(y1, y2)`.
pub fn w3_gaps(y1: f64, y2: f64) -> f64 {
    u3_sorted(&[0.0, y1, y1 + y2]) - (y1 + y2)
}

/// Gap form of the two-expert limit `x^(2) + e^{-sqrt2 (x^(2)-x^(1))}/(2 sqrt2)`.
pub fn w2_gap(y: f64) -> f64 {
    (-SQRT_2 * y).exp() / (2.0 * SQRT_2)
}

/// Closed form of `v(y) = 1/2 E int e^{-t} Lambda^3_t dt`.
pub fn v3(y: &GapVector) -> Result<f64> {
    Ok(v3_raw(y.array3()?))
}

/// [`v3`] without input validation; callers guarantee `y >= 0`.
pub fn v3_raw(y: [f64; 3]) -> f64 {
    let [y1, y2, y3] = y;
    let big = (y1 + 2.0 * y2 + y3) / SQRT_2;
    let mut v = -SQRT_2 / 4.0 * (SQRT_2 * y3).sinh()
        + SQRT_2 / 2.0
            * (-big).exp().atan()
            * ((-y1 + y3) / SQRT_2).cosh()
            * big.cosh()
            * ((y1 + y3) / SQRT_2).cosh();
    if big > SINGULAR_EPS {
        v += SQRT_2 / 2.0
            * arctanh_exp(-big)
            * ((-y1 + y3) / SQRT_2).sinh()
            * big.sinh()
            * ((y1 + y3) / SQRT_2).sinh();
    }
    v
}

/// `v(y) + (y1 + 2 y2 + 3 y3) / 4`, the expected discounted weighted gap sum.
pub fn v_tilde(y: &GapVector) -> Result<f64> {
    let a = y.array3()?;
    Ok(v3_raw(a) + 0.25 * (a[0] + 2.0 * a[1] + 3.0 * a[2]))
}

fn check_nonneg(pairs: &[(usize, f64)]) -> Result<()> {
    for &(index, value) in pairs {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
        if value < 0.0 {
            return Err(Error::NegativeGap { index, value });
        }
    }
    Ok(())
}

/// Diagonal value `V(y1, y2) = v(y1, y2, y1)`.
pub fn v2d(y1: f64, y2: f64) -> Result<f64> {
    check_nonneg(&[(0, y1), (1, y2)])?;
    Ok(v2d_raw(y1, y2))
}

pub fn v2d_raw(y1: f64, y2: f64) -> f64 {
    SQRT_2 / 2.0
        * (SQRT_2 * y1).cosh()
        * (SQRT_2 * (y1 + y2)).cosh()
        * (-SQRT_2 * (y1 + y2)).exp().atan()
        - SQRT_2 / 4.0 * (SQRT_2 * y1).sinh()
}

/// `V_1(x) = V(x, 0)`.
pub fn v1_fn(x: f64) -> Result<f64> {
    check_nonneg(&[(0, x)])?;
    let c = (SQRT_2 * x).cosh();
    Ok((-SQRT_2 * x).exp().atan() * c * c / SQRT_2 - (SQRT_2 * x).sinh() / (2.0 * SQRT_2))
}

/// `V_2(x) = V(0, x)`.
pub fn v2_fn(x: f64) -> Result<f64> {
    check_nonneg(&[(0, x)])?;
    Ok((-SQRT_2 * x).exp().atan() * (SQRT_2 * x).cosh() / SQRT_2)
}

/// `arctanh(e^{-a}) * g`, with the `a -> 0` limit taken when `g` vanishes there.
#[inline]
fn arctanh_term(a: f64, g: f64) -> f64 {
    if a > SINGULAR_EPS {
        arctanh_exp(-a) * g
    } else {
        0.0
    }
}

/// `f(x, y) = v(0, x/sqrt2, y/sqrt2)`.
pub fn f_fn(x: f64, y: f64) -> Result<f64> {
    check_nonneg(&[(0, x), (1, y)])?;
    let a = x + y / 2.0;
    let b = y / 2.0;
    Ok(((-a).exp().atan() * a.cosh() * b.cosh().powi(2)) / SQRT_2
        + (arctanh_term(a, a.sinh() * b.sinh().powi(2)) - 0.5 * y.sinh()) / SQRT_2)
}

/// `r_1(x, y) = v(x/sqrt2, 0, (x+y)/sqrt2)`.
pub fn r1_fn(x: f64, y: f64) -> Result<f64> {
    check_nonneg(&[(0, x), (1, y)])?;
    let a = x + y / 2.0;
    let b = y / 2.0;
    Ok(((-a).exp().atan() * a.cosh().powi(2) * b.cosh()) / SQRT_2
        + (arctanh_term(a, a.sinh().powi(2) * b.sinh()) - 0.5 * (x + y).sinh()) / SQRT_2)
}

/// `h(x, y) = v(y/sqrt2, x/sqrt2, 0) - (1 + e^{-2x}/3) / (2 sqrt2)`.
pub fn h_fn(x: f64, y: f64) -> Result<f64> {
    check_nonneg(&[(0, x), (1, y)])?;
    let a = x + y / 2.0;
    let b = y / 2.0;
    Ok(
        ((-a).exp().atan() * a.cosh() * b.cosh().powi(2) - 0.5 - (-2.0 * x).exp() / 6.0) / SQRT_2
            - arctanh_term(a, a.sinh() * b.sinh().powi(2)) / SQRT_2,
    )
}

/// `r_2(x, y) = v((x+y)/sqrt2, 0, x/sqrt2) - 2 e^{-x} / (3 sqrt2)`.
pub fn r2_fn(x: f64, y: f64) -> Result<f64> {
    check_nonneg(&[(0, x), (1, y)])?;
    let a = x + y / 2.0;
    let b = y / 2.0;
    Ok(
        ((-a).exp().atan() * a.cosh().powi(2) * b.cosh() - 2.0 * x.cosh() / 3.0) / SQRT_2
            - (arctanh_term(a, a.sinh().powi(2) * b.sinh()) - x.sinh() / 6.0) / SQRT_2,
    )
}

/// Initial traces `(f, r1, h, r2)(x, 0)` of the hyperbolic system.
pub fn boundary_initial_conditions(x: f64) -> [f64; 4] {
    let at = (-x).exp().atan();
    let f = at * x.cosh() / SQRT_2;
    let r1 = at * x.cosh().powi(2) / SQRT_2 - x.sinh() / (2.0 * SQRT_2);
    let h = f - (1.0 + (-2.0 * x).exp() / 3.0) / (2.0 * SQRT_2);
    let r2 = r1 - 2.0 / (3.0 * SQRT_2) * (-x).exp();
    [f, r1, h, r2]
}
