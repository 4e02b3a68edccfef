//! Numerical certification of the closed forms and of the solver asymptotics.
//!
//! Each check evaluates a residual over a deterministic point set and
//! compares the largest absolute value against a tolerance. Closed-form
//! Hessians of `u` are analytic; derivatives of `v` and of the hyperbolic
//! traces use finite differences.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::closed_form::{
    boundary_initial_conditions, comb_set_array, f_fn, h_fn, hamiltonian_argmax, origin_hessian,
    r1_fn, r2_fn, u4_array, u4_derivatives, v3_raw, ExpertSubset, GapVector, RegretState,
    U3_ORIGIN, U4_ORIGIN,
};
use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::game_solver::{solve, Dynamics, SolveOptions};
use crate::sampling::Sobol;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub delta: f64,
    pub radius: usize,
    pub scaled_value: f64,
    pub target: f64,
    pub error: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub check: String,
    pub points: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<ConvergenceRow>,
}

impl ResidualReport {
    pub fn new(check: impl Into<String>, residuals: &[f64], tolerance: f64) -> Self {
        let max_residual = residuals.iter().map(|r| r.abs()).fold(0.0, nan_max);
        Self {
            check: check.into(),
            points: residuals.len(),
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
            metadata: BTreeMap::new(),
            table: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.metadata.insert(key.to_string(), value);
        self
    }
}

/// NaN-propagating max, so a NaN residual can never pass.
fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

impl fmt::Display for ResidualReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<28} {:>7} {:>12.3e} {:>10.1e}  {}",
            self.check,
            self.points,
            self.max_residual,
            self.tolerance,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

// ---------------------------------------------------------------------------
// pointwise residuals

fn max_quadratic_form(h: &[[f64; 4]; 4]) -> f64 {
    ExpertSubset::all(4)
        .map(|j| j.quadratic_form(h))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max4(x: &[f64; 4]) -> f64 {
    x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// `u - max_J e_J^T D^2u e_J / 2 - Phi`.
pub fn residual_hjb(x: &RegretState) -> Result<f64> {
    Ok(hjb_array(&x.array4()?))
}

fn hjb_array(x: &[f64; 4]) -> f64 {
    let (_, h) = u4_derivatives(x);
    u4_array(x) - 0.5 * max_quadratic_form(&h) - max4(x)
}

/// `g_J = u - Phi - e_J^T D^2u e_J / 2`, indexed by subset bits.
pub fn comb_gaps(x: &RegretState) -> Result<[f64; 16]> {
    Ok(comb_gaps_array(&x.array4()?))
}

fn comb_gaps_array(x: &[f64; 4]) -> [f64; 16] {
    let (_, h) = u4_derivatives(x);
    let base = u4_array(x) - max4(x);
    let mut g = [0.0; 16];
    for j in ExpertSubset::all(4) {
        g[j.bits() as usize] = base - 0.5 * j.quadratic_form(&h);
    }
    g
}

/// Default finite-difference step for derivatives of `v`.
pub const FD_STEP: f64 = 1e-4;

const PDE_DIR: [f64; 3] = [1.0, -1.0, 1.0];

fn shifted(y: [f64; 3], d: [f64; 3], t: f64) -> [f64; 3] {
    [y[0] + t * d[0], y[1] + t * d[1], y[2] + t * d[2]]
}

/// `v - D^2_{(1,-1,1)} v / 2` with a Richardson-extrapolated central
/// second difference.
pub fn residual_v_pde(y: &GapVector, h: f64) -> Result<f64> {
    let y = y.array3()?;
    if y.iter().any(|v| *v < 2.0 * h) {
        return Err(invalid("y", "interior point needs every gap above 2h"));
    }
    let second = |s: f64| (v3_raw(shifted(y, PDE_DIR, s)) - 2.0 * v3_raw(y) + v3_raw(shifted(y, PDE_DIR, -s))) / (s * s);
    let d2 = (4.0 * second(h) - second(2.0 * h)) / 3.0;
    Ok(v3_raw(y) - 0.5 * d2)
}

/// Partial derivative of `v` in coordinate `k`: central when there is room,
/// otherwise the second-order forward stencil.
fn dv(y: [f64; 3], k: usize, h: f64) -> f64 {
    let mut e = [0.0; 3];
    e[k] = 1.0;
    if y[k] >= h {
        (v3_raw(shifted(y, e, h)) - v3_raw(shifted(y, e, -h))) / (2.0 * h)
    } else {
        (-3.0 * v3_raw(y) + 4.0 * v3_raw(shifted(y, e, h)) - v3_raw(shifted(y, e, 2.0 * h))) / (2.0 * h)
    }
}

/// Oblique-derivative residuals on the three faces, as
/// `[face y3 = 0, face y2 = 0, face y1 = 0]`. Each is only meaningful when the
/// corresponding coordinate of `y` is zero.
pub fn residual_reflections(y: &GapVector, h: f64) -> Result<[f64; 3]> {
    let y = y.array3()?;
    let d = [dv(y, 0, h), dv(y, 1, h), dv(y, 2, h)];
    Ok([
        d[2] - 0.5 * d[1] + 0.5,
        d[1] - 0.5 * (d[0] + d[2]),
        d[0] - 0.5 * d[1],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HyperbolicPair {
    FR1,
    HR2,
}

/// `[(d_x - 2 d_y)F - 2 coth(x) F + 2 csch(x) R, d_x R + 2 csch(x) F - 2 coth(x) R]`
/// by central differences with step `h`.
pub fn residual_hyperbolic(x: f64, y: f64, pair: HyperbolicPair, h: f64) -> Result<[f64; 2]> {
    if !(x > 0.0) || !(y >= 0.0) {
        return Err(invalid("x", "needs x > 0 and y >= 0"));
    }
    let (ff, rf): (fn(f64, f64) -> Result<f64>, fn(f64, f64) -> Result<f64>) = match pair {
        HyperbolicPair::FR1 => (f_fn, r1_fn),
        HyperbolicPair::HR2 => (h_fn, r2_fn),
    };
    let f = ff(x, y)?;
    let r = rf(x, y)?;
    let fx = (ff(x + h, y)? - ff(x - h, y)?) / (2.0 * h);
    let fy = if y >= h {
        (ff(x, y + h)? - ff(x, y - h)?) / (2.0 * h)
    } else {
        (-3.0 * f + 4.0 * ff(x, y + h)? - ff(x, y + 2.0 * h)?) / (2.0 * h)
    };
    let rx = (rf(x + h, y)? - rf(x - h, y)?) / (2.0 * h);
    let (coth, csch) = (1.0 / x.tanh(), 1.0 / x.sinh());
    Ok([
        fx - 2.0 * fy - 2.0 * coth * f + 2.0 * csch * r,
        rx + 2.0 * csch * f - 2.0 * coth * r,
    ])
}

/// Central-difference Hessian of `u` with step `h`.
pub fn fd_hessian(x: &[f64; 4], h: f64) -> [[f64; 4]; 4] {
    let at = |di: usize, si: f64, dj: usize, sj: f64| {
        let mut p = *x;
        p[di] += si * h;
        p[dj] += sj * h;
        u4_array(&p)
    };
    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (at(i, 1.0, j, 1.0) - at(i, 1.0, j, -1.0) - at(i, -1.0, j, 1.0) + at(i, -1.0, j, -1.0))
                / (4.0 * h * h);
        }
    }
    m
}

fn max_entry_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    let mut m: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            m = nan_max(m, (a[i][j] - b[i][j]).abs());
        }
    }
    m
}

// ---------------------------------------------------------------------------
// point sets

/// Tie patterns on sorted coordinates: each pair `(a, b)` forces `z_b = z_a`.
const TIE_PATTERNS: [&[(usize, usize)]; 7] = [
    &[(0, 1)],
    &[(1, 2)],
    &[(2, 3)],
    &[(0, 1), (1, 2)],
    &[(1, 2), (2, 3)],
    &[(0, 1), (2, 3)],
    &[(0, 1), (1, 2), (2, 3)],
];

/// Moves `p` onto a tie pattern (offset 0) or next to it (offset > 0) while
/// keeping the original coordinate order.
fn onto_locus(p: &[f64; 4], pattern: &[(usize, usize)], offset: f64) -> [f64; 4] {
    let mut idx = [0usize, 1, 2, 3];
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut z = [p[idx[0]], p[idx[1]], p[idx[2]], p[idx[3]]];
    for &(a, b) in pattern {
        z[b] = z[a] + offset;
    }
    let mut out = [0.0; 4];
    for k in 0..4 {
        out[idx[k]] = z[k];
    }
    out
}

fn sobol4(n: usize, lo: f64, hi: f64) -> Vec<[f64; 4]> {
    let mut s = Sobol::new(4);
    (0..n)
        .map(|_| {
            let q = s.next_point();
            [0, 1, 2, 3].map(|k| lo + (hi - lo) * q[k])
        })
        .collect()
}

/// `n` Sobol points in `[-2, 2]^4` plus, for the first `n / 20` of them, their
/// projections onto every tie pattern and copies displaced by `1e-3` and
/// `1e-6`; the origin is always included.
pub fn hjb_points(n: usize) -> Vec<[f64; 4]> {
    let base = sobol4(n, -2.0, 2.0);
    let mut pts = base.clone();
    pts.push([0.0; 4]);
    for p in base.iter().take((n / 20).max(1)) {
        for pat in TIE_PATTERNS {
            for off in [0.0, 1e-3, 1e-6] {
                pts.push(onto_locus(p, pat, off));
            }
        }
    }
    pts
}

fn sobol3(n: usize, lo: f64, hi: f64) -> Vec<[f64; 3]> {
    let mut s = Sobol::new(3);
    (0..n)
        .map(|_| {
            let q = s.next_point();
            [0, 1, 2].map(|k| lo + (hi - lo) * q[k])
        })
        .collect()
}

// ---------------------------------------------------------------------------
// suites

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Hjb,
    Vpde,
    Reflections,
    Hyperbolic,
    Combgaps,
    Regularity,
    Convergence,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 8] =
        ["hjb", "vpde", "reflections", "hyperbolic", "combgaps", "regularity", "convergence", "all"];

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "hjb" => Suite::Hjb,
            "vpde" => Suite::Vpde,
            "reflections" => Suite::Reflections,
            "hyperbolic" => Suite::Hyperbolic,
            "combgaps" => Suite::Combgaps,
            "regularity" => Suite::Regularity,
            "convergence" => Suite::Convergence,
            "all" => Suite::All,
            _ => {
                return Err(invalid(
                    "suite",
                    format!("unknown suite '{s}' (valid: {})", Self::NAMES.join(", ")),
                ))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub sobol_points: usize,
    pub face_points: usize,
    /// Smaller radii and no `delta = 0.01` solve in the convergence suite.
    pub quick: bool,
    #[serde(skip, default)]
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            sobol_points: 10_000,
            face_points: 1000,
            quick: false,
            exec: Exec::default(),
        }
    }
}

pub fn check_hjb(opts: &VerifyOptions) -> ResidualReport {
    let pts = hjb_points(opts.sobol_points);
    let res = opts.exec.map(pts.len(), |k| hjb_array(&pts[k]));
    ResidualReport::new("hjb", &res, 1e-7)
}

/// Non-negativity of all gaps, zero gap at the comb set and its
/// complement, and `g_J = g_{J^c}`.
pub fn check_comb_gaps(opts: &VerifyOptions) -> Vec<ResidualReport> {
    let pts = hjb_points(opts.sobol_points);
    let per = opts.exec.map(pts.len(), |k| {
        let g = comb_gaps_array(&pts[k]);
        let c = comb_set_array(&pts[k]);
        let neg = g.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
        let comb = g[c.bits() as usize].abs().max(g[c.complement(4).bits() as usize].abs());
        let sym = (0..16).map(|b| (g[b] - g[15 - b]).abs()).fold(0.0, nan_max);
        (neg, comb, sym)
    });
    let min_gap = per.iter().map(|p| p.0).fold(0.0, f64::min);
    vec![
        ResidualReport::new("combgaps.nonnegative", &per.iter().map(|p| p.0).collect::<Vec<_>>(), 1e-9)
            .with("min_gap", min_gap),
        ResidualReport::new("combgaps.comb_attains", &per.iter().map(|p| p.1).collect::<Vec<_>>(), 1e-8),
        ResidualReport::new("combgaps.complement", &per.iter().map(|p| p.2).collect::<Vec<_>>(), 1e-10),
    ]
}

/// Hessian at the origin against the closed-form matrix, plus central
/// differences at `h = 1e-3` and `5e-4`. Inside a chamber the agreement must
/// be second order. At the origin `u` is only `C^2` (the cubic terms differ
/// between chambers), so there the differences converge at first order and
/// that rate is what is checked.
pub fn check_origin_hessian() -> Vec<ResidualReport> {
    let (_, h) = u4_derivatives(&[0.0; 4]);
    let d_exact = max_entry_diff(&h, &origin_hessian());

    let o1 = max_entry_diff(&fd_hessian(&[0.0; 4], 1e-3), &h);
    let o2 = max_entry_diff(&fd_hessian(&[0.0; 4], 5e-4), &h);
    let mut origin = ResidualReport::new("hessian.fd_origin", &[o1, o2], 2e-3)
        .with("err_h1e-3", o1)
        .with("err_h5e-4", o2)
        .with("ratio", o1 / o2);
    origin.pass &= o1 / o2 >= 1.8;

    let pts: Vec<[f64; 4]> = sobol4(200, -2.0, 2.0)
        .into_iter()
        .filter(|p| {
            let mut z = *p;
            z.sort_by(f64::total_cmp);
            z.windows(2).all(|w| w[1] - w[0] > 0.05)
        })
        .take(50)
        .collect();
    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for p in &pts {
        let (_, hp) = u4_derivatives(p);
        e1 = e1.max(max_entry_diff(&fd_hessian(p, 1e-3), &hp));
        e2 = e2.max(max_entry_diff(&fd_hessian(p, 5e-4), &hp));
    }
    // pointwise ratios drown in round-off where the truncation error is tiny,
    // so the order is read off the worst-case errors
    let mut chamber = ResidualReport::new("hessian.fd_chamber", &[e1, e2], 1e-5)
        .with("err_h1e-3", e1)
        .with("err_h5e-4", e2)
        .with("ratio", e1 / e2);
    chamber.points = pts.len();
    chamber.pass &= e1 / e2 >= 3.0;
    vec![ResidualReport::new("hessian.origin", &[d_exact], 1e-6), chamber, origin]
}

pub fn check_v_pde(opts: &VerifyOptions) -> ResidualReport {
    let pts = sobol3(opts.face_points, 0.05, 2.0);
    let res = opts.exec.map(pts.len(), |k| {
        residual_v_pde(&GapVector::new(pts[k].to_vec()).expect("valid gaps"), FD_STEP).unwrap_or(f64::NAN)
    });
    ResidualReport::new("vpde.interior", &res, 1e-6).with("h", FD_STEP)
}

pub fn check_reflections(opts: &VerifyOptions) -> Vec<ResidualReport> {
    let pts = sobol3(opts.face_points, 0.05, 2.0);
    let names = ["reflections.y3", "reflections.y2", "reflections.y1"];
    // residual k lives on the face where coordinate 2 - k vanishes
    (0..3)
        .map(|k| {
            let zero = 2 - k;
            let res = opts.exec.map(pts.len(), |p| {
                let mut y = pts[p];
                y[zero] = 0.0;
                residual_reflections(&GapVector::new(y.to_vec()).expect("valid gaps"), FD_STEP)
                    .map(|r| r[k])
                    .unwrap_or(f64::NAN)
            });
            ResidualReport::new(names[k], &res, 1e-6).with("h", FD_STEP)
        })
        .collect()
}

pub fn check_hyperbolic(opts: &VerifyOptions) -> Vec<ResidualReport> {
    let h = 1e-5;
    let grid: Vec<f64> = (1..=50).map(|i| 0.05 + 3.95 * i as f64 / 50.0).collect();
    let mut out = Vec::new();
    for (pair, name) in [(HyperbolicPair::FR1, "hyperbolic.f_r1"), (HyperbolicPair::HR2, "hyperbolic.h_r2")] {
        let res = opts.exec.map(grid.len() * grid.len(), |k| {
            let (x, y) = (grid[k / grid.len()], grid[k % grid.len()]);
            residual_hyperbolic(x, y, pair, h)
                .map(|r| r[0].abs().max(r[1].abs()))
                .unwrap_or(f64::NAN)
        });
        out.push(ResidualReport::new(name, &res, 1e-6).with("h", h));
    }
    let xs: Vec<f64> = (0..100).map(|i| 0.05 + 0.05 * i as f64).collect();
    let ic: Vec<f64> = xs
        .iter()
        .map(|&x| {
            let b = boundary_initial_conditions(x);
            let v = [f_fn(x, 0.0), r1_fn(x, 0.0), h_fn(x, 0.0), r2_fn(x, 0.0)];
            (0..4)
                .map(|k| v[k].as_ref().map(|v| (v - b[k]).abs()).unwrap_or(f64::NAN))
                .fold(0.0, nan_max)
        })
        .collect();
    out.push(ResidualReport::new("hyperbolic.initial", &ic, 1e-12));
    let compat: Vec<f64> = xs
        .iter()
        .map(|&y| {
            let a = f_fn(0.0, y).and_then(|f| r1_fn(0.0, y).map(|r| f - r));
            let b = h_fn(0.0, y).and_then(|f| r2_fn(0.0, y).map(|r| f - r));
            a.unwrap_or(f64::NAN).abs().max(b.unwrap_or(f64::NAN).abs())
        })
        .collect();
    out.push(ResidualReport::new("hyperbolic.compatibility", &compat, 1e-12));
    out
}

/// First-derivative matching on the three tie loci of the chamber formula,
/// and continuity of the symmetric Hessian across each locus.
pub fn check_regularity(opts: &VerifyOptions) -> Vec<ResidualReport> {
    let mut base: Vec<[f64; 4]> = vec![[0.3, 0.3, 0.7, 1.1], [0.1, 0.4, 0.4, 1.0], [0.1, 0.4, 0.9, 0.9]];
    base.extend(sobol4(opts.face_points, -2.0, 2.0));
    let mut out = Vec::new();
    for (a, name) in [(0usize, "regularity.x1_x2"), (1, "regularity.x2_x3"), (2, "regularity.x3_x4")] {
        let pts: Vec<[f64; 4]> = base
            .iter()
            .map(|p| {
                let mut z = *p;
                z.sort_by(f64::total_cmp);
                z[a + 1] = z[a];
                z
            })
            .collect();
        let grads = opts.exec.map(pts.len(), |k| {
            let (g, _) = u4_derivatives(&pts[k]);
            (g[a] - g[a + 1]).abs()
        });
        out.push(ResidualReport::new(format!("{name}.gradient"), &grads, 1e-8));
        let eps = 1e-7;
        let hess = opts.exec.map(pts.len(), |k| {
            let mut lo = pts[k];
            let mut hi = pts[k];
            lo[a + 1] -= eps;
            hi[a + 1] += eps;
            let (_, h0) = u4_derivatives(&pts[k]);
            let (_, hl) = u4_derivatives(&lo);
            let (_, hh) = u4_derivatives(&hi);
            max_entry_diff(&hl, &hh).max(max_entry_diff(&hl, &h0))
        });
        out.push(ResidualReport::new(format!("{name}.hessian"), &hess, 1e-5).with("eps", eps));
    }
    out
}

/// `hamiltonian_argmax` contains the comb set and its complement.
pub fn check_argmax(opts: &VerifyOptions) -> ResidualReport {
    let pts = sobol4(opts.face_points, -2.0, 2.0);
    let misses = opts.exec.map(pts.len(), |k| {
        let x = RegretState::new(pts[k].to_vec()).expect("finite");
        let am = hamiltonian_argmax(&x, 1e-9).unwrap_or_default();
        let c = comb_set_array(&pts[k]);
        (!(am.contains(&c) && am.contains(&c.complement(4)))) as u8 as f64
    });
    ResidualReport::new("argmax.contains_comb", &misses, 0.0)
}

/// `sqrt(delta) V^delta(0)` against its limit along a decreasing `delta`
/// list; passes when the error decreases strictly along the list and the
/// last error is at most `tolerance`.
pub fn convergence_table(
    n: usize,
    deltas: &[f64],
    radius_rule: impl Fn(f64) -> usize,
    tol: f64,
    tolerance: f64,
    exec: Exec,
) -> Result<ResidualReport> {
    if deltas.windows(2).any(|w| w[1] >= w[0]) {
        return Err(invalid("deltas", "must be strictly decreasing"));
    }
    let target = match n {
        3 => U3_ORIGIN,
        4 => U4_ORIGIN,
        2 => 1.0 / (2.0 * SQRT_2),
        _ => return Err(invalid("n", "use 2, 3 or 4")),
    };
    let mut rows = Vec::new();
    for &d in deltas {
        let radius = radius_rule(d);
        let sol = solve(&SolveOptions::new(n, d, radius, tol)?.with_exec(exec), Dynamics::Minimax)?;
        let scaled = d.sqrt() * sol.grid.origin();
        rows.push(ConvergenceRow {
            n,
            delta: d,
            radius,
            scaled_value: scaled,
            target,
            error: (scaled - target).abs(),
            iterations: sol.grid.iterations,
        });
    }
    let errs: Vec<f64> = rows.iter().map(|r| r.error).collect();
    let last = *errs.last().unwrap_or(&f64::NAN);
    let mut rep = ResidualReport::new(format!("convergence.n{n}"), &[last], tolerance);
    rep.pass &= errs.windows(2).all(|w| w[1] < w[0]);
    rep.table = rows;
    Ok(rep)
}

/// Radius used by the convergence suite: `ceil(c / sqrt(delta))`.
pub fn radius_rule(c: f64) -> impl Fn(f64) -> usize {
    move |d: f64| (c / d.sqrt()).ceil() as usize
}

pub fn check_convergence(opts: &VerifyOptions) -> Result<Vec<ResidualReport>> {
    let tol = 1e-8;
    let (c, n3): (f64, &[f64]) = if opts.quick {
        (4.0, &[0.16, 0.04])
    } else {
        (8.0, &[0.16, 0.04, 0.01])
    };
    let mut out = vec![
        convergence_table(3, n3, radius_rule(c), tol, 0.1, opts.exec)?,
        convergence_table(4, &[0.16, 0.04], radius_rule(c), tol, 0.15, opts.exec)?,
    ];
    let d = 0.04;
    let radius = radius_rule(c)(d);
    let v = solve(&SolveOptions::new(4, d, radius, tol)?.with_exec(opts.exec), Dynamics::Minimax)?;
    let u = solve(&SolveOptions::new(4, d, radius, tol)?.with_exec(opts.exec), Dynamics::BalancedComb)?;
    let gap = d.sqrt() * (u.grid.origin() - v.grid.origin());
    out.push(
        ResidualReport::new("convergence.balanced_comb", &[gap], 0.05)
            .with("delta", d)
            .with("radius", radius as f64)
            .with("scaled_vdelta", d.sqrt() * v.grid.origin())
            .with("scaled_underline", d.sqrt() * u.grid.origin()),
    );
    Ok(out)
}

/// Runs a suite and returns one report per check.
pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<ResidualReport>> {
    Ok(match suite {
        Suite::Hjb => {
            let mut v = vec![check_hjb(opts)];
            v.extend(check_origin_hessian());
            v
        }
        Suite::Vpde => vec![check_v_pde(opts)],
        Suite::Reflections => check_reflections(opts),
        Suite::Hyperbolic => check_hyperbolic(opts),
        Suite::Combgaps => {
            let mut v = check_comb_gaps(opts);
            v.push(check_argmax(opts));
            v
        }
        Suite::Regularity => check_regularity(opts),
        Suite::Convergence => check_convergence(opts)?,
        Suite::All => {
            let mut v = Vec::new();
            for s in [
                Suite::Hjb,
                Suite::Vpde,
                Suite::Reflections,
                Suite::Hyperbolic,
                Suite::Combgaps,
                Suite::Regularity,
                Suite::Convergence,
            ] {
                v.extend(run_suite(s, opts)?);
            }
            v
        }
    })
}

/// Plain-text table of reports.
pub fn summary_table(reports: &[ResidualReport]) -> String {
    let mut s = format!("{:<28} {:>7} {:>12} {:>10}  result\n", "check", "points", "max|res|", "tol");
    for r in reports {
        s.push_str(&r.to_string());
        s.push('\n');
        for row in &r.table {
            s.push_str(&format!(
                "    n={} delta={} radius={} sqrt(delta)V(0)={:.6} target={:.6} error={:.3e}\n",
                row.n, row.delta, row.radius, row.scaled_value, row.target, row.error
            ));
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gv(y: [f64; 3]) -> GapVector {
        GapVector::new(y.to_vec()).unwrap()
    }

    fn rs(x: [f64; 4]) -> RegretState {
        RegretState::new(x.to_vec()).unwrap()
    }

    #[test]
    fn hjb_examples() {
        assert!(residual_hjb(&rs([0.1, 0.2, 0.3, 0.4])).unwrap().abs() < 1e-8);
        assert!(residual_hjb(&rs([0.0; 4])).unwrap().abs() < 1e-7);
        assert!(residual_hjb(&rs([0.1, 0.1, 0.5, 0.9])).unwrap().abs() < 1e-7);
    }

    #[test]
    fn v_pde_and_faces() {
        assert!(residual_v_pde(&gv([0.4, 0.7, 0.9]), FD_STEP).unwrap().abs() < 1e-6);
        assert!(residual_reflections(&gv([0.4, 0.7, 0.0]), FD_STEP).unwrap()[0].abs() < 1e-6);
        assert!(residual_reflections(&gv([0.4, 0.0, 0.9]), FD_STEP).unwrap()[1].abs() < 1e-6);
        assert!(residual_reflections(&gv([0.0, 0.7, 0.9]), FD_STEP).unwrap()[2].abs() < 1e-6);
        // off the face the condition does not hold
        assert!(residual_reflections(&gv([0.4, 0.7, 0.5]), FD_STEP).unwrap()[0].abs() > 1e-3);
        assert!(residual_v_pde(&gv([0.0, 0.7, 0.9]), FD_STEP).is_err());
    }

    #[test]
    fn hyperbolic_examples() {
        for pair in [HyperbolicPair::FR1, HyperbolicPair::HR2] {
            let r = residual_hyperbolic(0.5, 0.8, pair, 1e-5).unwrap();
            assert!(r[0].abs() < 1e-6 && r[1].abs() < 1e-6, "{r:?}");
        }
        assert!(residual_hyperbolic(0.0, 0.8, HyperbolicPair::FR1, 1e-5).is_err());
    }

    #[test]
    fn regularity_examples() {
        for (x, a) in [([0.3, 0.3, 0.7, 1.1], 0), ([0.1, 0.4, 0.4, 1.0], 1), ([0.1, 0.4, 0.9, 0.9], 2)] {
            let (g, _) = u4_derivatives(&x);
            assert!((g[a] - g[a + 1]).abs() < 1e-8);
        }
    }

    #[test]
    fn gaps_at_empty_set_equal_v() {
        let x = [0.2, -0.5, 1.0, 0.4];
        let g = comb_gaps(&rs(x)).unwrap();
        let v = v3_raw([0.7, 0.2, 0.6]);
        assert!((g[0] - v).abs() < 1e-12);
    }

    #[test]
    fn locus_projection_keeps_order() {
        let p = [0.5, -1.0, 0.2, 1.5];
        let q = onto_locus(&p, &[(0, 1)], 0.0);
        assert_eq!(q, [0.5, -1.0, -1.0, 1.5]);
        let q = onto_locus(&p, &[(0, 1), (1, 2), (2, 3)], 1e-3);
        assert!((q[3] - (-1.0 + 3e-3)).abs() < 1e-15);
    }

    #[test]
    fn suite_parsing() {
        for name in Suite::NAMES {
            Suite::parse(name).unwrap();
        }
        assert!(Suite::parse("bogus").is_err());
    }

    #[test]
    fn small_suites_pass() {
        let opts = VerifyOptions {
            sobol_points: 400,
            face_points: 100,
            quick: true,
            exec: Exec::Sequential,
        };
        for s in [Suite::Hjb, Suite::Vpde, Suite::Reflections, Suite::Combgaps, Suite::Regularity] {
            for r in run_suite(s, &opts).unwrap() {
                assert!(r.pass, "{r}");
            }
        }
    }

    #[test]
    fn report_json_round_trip() {
        let r = ResidualReport::new("x", &[1e-9, -2e-9], 1e-8).with("h", 1e-4);
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<ResidualReport>(&s).unwrap(), r);
        let nan = ResidualReport::new("y", &[0.0, f64::NAN], 1.0);
        assert!(!nan.pass);
    }
}
