//! The four-expert value `u`, its derivatives and its expansion at 0.
//!
//! On the ordered chamber `z1 <= z2 <= z3 <= z4` the value is
//!
//! ```text
//! u = z4 - (sqrt2/4) sinh(sqrt2 (z4 - z3)) + (sqrt2/2) Psi(s, p, q, w)
//! Psi = atan(e^s) cosh p cosh q cosh w + arctanh(e^s) sinh p sinh q sinh w
//! ```
//!
//! with the linear forms `s = (z1+z2-z3-z4)/sqrt2`, `p = (z1-z2+z3-z4)/sqrt2`,
//! `q = (-z1+z2+z3-z4)/sqrt2`, `w = (-z1-z2+z3+z4)/sqrt2`. Derivatives are
//! taken through these forms by the chain rule. The chamber formula is
//! analytic up to and across the equal-coordinate faces except at the fully
//! tied point `s = 0`, where every `arctanh` contribution tends to 0.

use std::f64::consts::{PI, SQRT_2};

use super::functions::{arctanh_exp, SINGULAR_EPS, U4_ORIGIN};
use super::state::{rank4, RegretState};
use crate::error::Result;

pub type Mat4 = [[f64; 4]; 4];

const FORMS: [[f64; 4]; 4] = [
    [1.0, 1.0, -1.0, -1.0],  // s
    [1.0, -1.0, 1.0, -1.0],  // p
    [-1.0, 1.0, 1.0, -1.0],  // q
    [-1.0, -1.0, 1.0, 1.0],  // w
];

#[inline]
fn forms(z: &[f64; 4]) -> [f64; 4] {
    let mut out = [0.0; 4];
    for (k, row) in FORMS.iter().enumerate() {
        out[k] = (row[0] * z[0] + row[1] * z[1] + row[2] * z[2] + row[3] * z[3]) / SQRT_2;
    }
    out
}

/// Derivatives of `atan(e^s)` and `arctanh(e^s)` up to order 2.
struct Radial {
    a: [f64; 3],
    b: [f64; 3],
    singular: bool,
}

impl Radial {
    fn new(s: f64) -> Self {
        let (sh, ch) = (s.sinh(), s.cosh());
        let a = [s.exp().atan(), 0.5 / ch, -0.5 * sh / (ch * ch)];
        if s > -SINGULAR_EPS {
            return Self {
                a,
                b: [0.0; 3],
                singular: true,
            };
        }
        let b = [arctanh_exp(s), -0.5 / sh, 0.5 * ch / (sh * sh)];
        Self {
            a,
            b,
            singular: false,
        }
    }
}

/// Derivative of `Psi` of orders `(ds, dp, dq, dw)` with total order <= 2.
#[inline]
fn psi(r: &Radial, pqw: [f64; 3], order: [usize; 4]) -> f64 {
    let mut ccc = r.a[order[0]];
    let mut sss = r.b[order[0]];
    for k in 0..3 {
        let (ch, sh) = (pqw[k].cosh(), pqw[k].sinh());
        // d/dt cosh = sinh, d/dt sinh = cosh
        if order[k + 1] % 2 == 0 {
            ccc *= ch;
            sss *= sh;
        } else {
            ccc *= sh;
            sss *= ch;
        }
    }
    if r.singular {
        ccc
    } else {
        ccc + sss
    }
}

/// `u` on a ranked (nondecreasing) point.
pub(crate) fn u4_sorted(z: &[f64; 4]) -> f64 {
    let [a, b, c, d] = *z;
    let s = (a + b - c - d) / SQRT_2;
    let p = (a - b + c - d) / SQRT_2;
    let q = (-a + b + c - d) / SQRT_2;
    let w = (-a - b + c + d) / SQRT_2;
    let mut u = d - SQRT_2 / 4.0 * (SQRT_2 * (d - c)).sinh()
        + SQRT_2 / 2.0 * s.exp().atan() * p.cosh() * q.cosh() * w.cosh();
    if s <= -SINGULAR_EPS {
        u += SQRT_2 / 2.0 * arctanh_exp(s) * p.sinh() * q.sinh() * w.sinh();
    }
    u
}

/// Gradient and Hessian of the chamber formula at a ranked point.
pub(crate) fn u4_derivs_sorted(z: &[f64; 4]) -> ([f64; 4], Mat4) {
    let f = forms(z);
    let r = Radial::new(f[0]);
    let pqw = [f[1], f[2], f[3]];

    let mut grad = [0.0, 0.0, 0.0, 1.0];
    let mut hess = [[0.0; 4]; 4];

    let e = SQRT_2 * (z[3] - z[2]);
    grad[3] -= 0.5 * e.cosh();
    grad[2] += 0.5 * e.cosh();
    let t = SQRT_2 / 2.0 * e.sinh();
    hess[3][3] -= t;
    hess[2][2] -= t;
    hess[2][3] += t;
    hess[3][2] += t;

    // the 1/sqrt2 of each form and the sqrt2/2 prefactor combine per order
    let c1 = SQRT_2 / 2.0 / SQRT_2;
    let c2 = SQRT_2 / 2.0 / 2.0;
    for k in 0..4 {
        let mut ord = [0usize; 4];
        ord[k] += 1;
        let dk = psi(&r, pqw, ord) * c1;
        for i in 0..4 {
            grad[i] += dk * FORMS[k][i];
        }
        for l in k..4 {
            let mut ord2 = ord;
            ord2[l] += 1;
            let dkl = psi(&r, pqw, ord2) * c2;
            for i in 0..4 {
                for j in 0..4 {
                    let m = FORMS[k][i] * FORMS[l][j];
                    let v = if k == l { dkl * m } else { dkl * (m + FORMS[l][i] * FORMS[k][j]) };
                    hess[i][j] += v;
                }
            }
        }
    }
    (grad, hess)
}

/// Four-expert value `u(x)`; symmetric in its arguments.
pub fn u4(x: &RegretState) -> Result<f64> {
    Ok(u4_array(&x.array4()?))
}

pub fn u4_array(x: &[f64; 4]) -> f64 {
    let (z, _) = rank4(x);
    u4_sorted(&z)
}

/// Gradient and Hessian of `u` at an arbitrary point, mapped back from the
/// ranked chamber.
pub fn u4_derivatives(x: &[f64; 4]) -> ([f64; 4], Mat4) {
    let (z, perm) = rank4(x);
    let (gz, hz) = u4_derivs_sorted(&z);
    let mut g = [0.0; 4];
    let mut h = [[0.0; 4]; 4];
    for a in 0..4 {
        g[perm[a]] = gz[a];
        for b in 0..4 {
            h[perm[a]][perm[b]] = hz[a][b];
        }
    }
    (g, h)
}

pub fn u4_grad(x: &RegretState) -> Result<[f64; 4]> {
    Ok(u4_derivatives(&x.array4()?).0)
}

pub fn u4_hess(x: &RegretState) -> Result<Mat4> {
    Ok(u4_derivatives(&x.array4()?).1)
}

/// Constant + linear + quadratic model of `u` at the origin.
pub fn taylor_u4_origin(x: &RegretState) -> Result<f64> {
    let x = x.array4()?;
    let sum: f64 = x.iter().sum();
    let sq: f64 = x.iter().map(|v| v * v).sum();
    let mut cross = 0.0;
    for i in 0..4 {
        for j in i + 1..4 {
            cross += x[i] * x[j];
        }
    }
    Ok(U4_ORIGIN + 0.25 * sum + 3.0 * PI / (16.0 * SQRT_2) * (sq - 2.0 / 3.0 * cross))
}

/// Hessian of `u` at the origin: `pi/(8 sqrt2) (4 I - 1 1^T)`.
pub fn origin_hessian() -> Mat4 {
    let k = PI / (8.0 * SQRT_2);
    let mut h = [[-k; 4]; 4];
    for (i, row) in h.iter_mut().enumerate() {
        row[i] = 3.0 * k;
    }
    h
}
