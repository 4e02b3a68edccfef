//! Obliquely reflected Brownian motion in the orthant, simulated with a
//! pushed Euler scheme, and Monte Carlo estimates of discounted local-time
//! functionals.
//!
//! All components are driven by one scalar Brownian motion with signs given
//! by `drive`, so the covariance is rank one. A step moves freely, then
//! solves the one-step Skorokhod problem `y = y_free + R dλ >= 0`,
//! `dλ >= 0`, `dλ_i y_i = 0`; `dλ` is the local-time increment.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::closed_form::GapVector;
use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::game_sim::mean_stderr;
use crate::rng::stream;

pub const POSITION_SLACK: f64 = 1e-12;
const PUSH_MAX_ITER: usize = 10_000;
const PUSH_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSpec {
    pub dim: usize,
    /// Signs of the common Brownian increment per component.
    pub drive: Vec<f64>,
    /// Row-major `dim x dim` reflection matrix with unit diagonal.
    pub reflection: Vec<f64>,
    /// Component whose discounted local time is accumulated.
    pub target: usize,
}

impl ReflectionSpec {
    /// Three gaps of the four-expert problem.
    pub fn three_gap() -> Self {
        Self {
            dim: 3,
            drive: vec![1.0, -1.0, 1.0],
            reflection: vec![1.0, -0.5, 0.0, -0.5, 1.0, -0.5, 0.0, -0.5, 1.0],
            target: 2,
        }
    }

    /// Reduced system on the diagonal `y_1 = y_3`.
    pub fn two_gap() -> Self {
        Self {
            dim: 2,
            drive: vec![1.0, -1.0],
            reflection: vec![1.0, -0.5, -1.0, 1.0],
            target: 0,
        }
    }

    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Self::two_gap()),
            3 => Ok(Self::three_gap()),
            _ => Err(invalid("dim", format!("{dim} unsupported (use 2 or 3)"))),
        }
    }

    #[inline]
    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.reflection[i * self.dim + j]
    }

    /// `Gamma = drive drive^T`.
    pub fn covariance(&self) -> Vec<f64> {
        let d = self.dim;
        (0..d * d).map(|k| self.drive[k / d] * self.drive[k % d]).collect()
    }

    /// Unit diagonal and spectral radius of `|R - I|` below one.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        if !(2..=3).contains(&d) || self.drive.len() != d || self.reflection.len() != d * d {
            return Err(Error::Dimension {
                expected: d * d,
                got: self.reflection.len(),
            });
        }
        if self.target >= d {
            return Err(invalid("target", "outside the dimension"));
        }
        if (0..d).any(|i| self.r(i, i) != 1.0) {
            return Err(invalid("reflection", "diagonal must be 1"));
        }
        let rho = self.off_diagonal_radius();
        if !(rho < 1.0) {
            return Err(invalid("reflection", format!("spectral radius of |R - I| is {rho}")));
        }
        Ok(())
    }

    /// Power iteration on `I + |R - I|`; the shift keeps bipartite
    /// patterns from oscillating and is removed at the end.
    pub fn off_diagonal_radius(&self) -> f64 {
        let d = self.dim;
        let q = |i: usize, j: usize| if i == j { 1.0 } else { self.r(i, j).abs() };
        let mut v = vec![1.0; d];
        let mut rho = 0.0;
        for _ in 0..500 {
            let w: Vec<f64> = (0..d).map(|i| (0..d).map(|j| q(i, j) * v[j]).sum()).collect();
            let norm = w.iter().cloned().fold(0.0, f64::max);
            rho = norm / v.iter().cloned().fold(0.0, f64::max);
            v = w.iter().map(|x| x / norm).collect();
        }
        rho - 1.0
    }
}

/// One-step Skorokhod problem by the projected Gauss-Seidel fixed point
/// `dλ_i = max(0, -(y_free_i + sum_{j != i} R_ij dλ_j))`, swept in place.
pub fn skorokhod_push(y_free: &[f64], spec: &ReflectionSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = spec.dim;
    if y_free.len() != d {
        return Err(Error::Dimension {
            expected: d,
            got: y_free.len(),
        });
    }
    if let Some((index, &value)) = y_free.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index, value });
    }
    let mut dl = [0.0; 3];
    let mut y = [0.0; 3];
    push_in_place(y_free, spec, &mut dl[..d], &mut y[..d])?;
    Ok((y[..d].to_vec(), dl[..d].to_vec()))
}

#[inline]
fn push_in_place(y_free: &[f64], spec: &ReflectionSpec, dl: &mut [f64], y: &mut [f64]) -> Result<()> {
    let d = spec.dim;
    dl.fill(0.0);
    if y_free.iter().all(|v| *v >= 0.0) {
        y.copy_from_slice(y_free);
        return Ok(());
    }
    let mut change = 0.0;
    for _ in 0..PUSH_MAX_ITER {
        change = 0.0;
        for i in 0..d {
            let mut s = y_free[i];
            for j in 0..d {
                if j != i {
                    s += spec.r(i, j) * dl[j];
                }
            }
            let next = (-s).max(0.0);
            change = f64::max(change, (next - dl[i]).abs());
            dl[i] = next;
        }
        if change <= PUSH_TOL {
            for i in 0..d {
                let mut s = y_free[i];
                for j in 0..d {
                    s += spec.r(i, j) * dl[j];
                }
                // complementarity: a pushed face sits exactly at zero
                y[i] = if dl[i] > 0.0 { 0.0 } else { s.max(0.0) };
            }
            return Ok(());
        }
    }
    Err(Error::PushNotConverged {
        iterations: PUSH_MAX_ITER,
        residual: change,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RbmPath {
    pub y: Vec<f64>,
    /// Accumulated local times.
    pub lambda: Vec<f64>,
    pub t: f64,
    /// `int e^{-s} dΛ_target`.
    pub disc_lambda: f64,
    /// `int e^{-s} Λ_target(s) ds`, for checking the two forms agree.
    pub disc_lambda_dt: f64,
}

impl RbmPath {
    pub fn start(y0: &[f64]) -> Self {
        Self {
            y: y0.to_vec(),
            lambda: vec![0.0; y0.len()],
            t: 0.0,
            disc_lambda: 0.0,
            disc_lambda_dt: 0.0,
        }
    }

    /// Free move `y + drive dW`, push, then accumulate local time.
    pub fn step(&mut self, dt: f64, dw: f64, spec: &ReflectionSpec) -> Result<()> {
        if !(dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        let d = spec.dim;
        let mut free = [0.0; 3];
        for i in 0..d {
            free[i] = self.y[i] + spec.drive[i] * dw;
        }
        let mut dl = [0.0; 3];
        let mut y = [0.0; 3];
        push_in_place(&free[..d], spec, &mut dl[..d], &mut y[..d])?;
        let k = spec.target;
        // left-point rule for the time integral, increments booked at t
        let disc = (-self.t).exp();
        self.disc_lambda_dt += disc * self.lambda[k] * dt;
        self.disc_lambda += disc * dl[k];
        for i in 0..d {
            self.lambda[i] += dl[i];
            self.y[i] = y[i];
        }
        self.t += dt;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub horizon: f64,
    /// Same functional through `int e^{-t} Λ_t dt`.
    pub mean_time_form: f64,
}

impl McEstimate {
    pub const CSV_HEADER: [&'static str; 7] = ["y0", "dt", "horizon", "n", "mean", "stderr", "seed"];

    pub fn csv_record(&self, y0: &[f64], seed: u64) -> Vec<String> {
        let y: Vec<String> = y0.iter().map(|v| format!("{v:.17e}")).collect();
        vec![
            y.join(" "),
            format!("{:.17e}", self.dt),
            format!("{:.17e}", self.horizon),
            self.n_paths.to_string(),
            format!("{:.17e}", self.mean),
            format!("{:.17e}", self.stderr),
            seed.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
}

impl McConfig {
    pub fn new(dt: f64, horizon: f64, n_paths: usize, seed: u64) -> Result<Self> {
        if !(dt > 0.0 && dt < horizon) {
            return Err(invalid("dt", "must lie in (0, horizon)"));
        }
        if !(horizon >= 8.0) {
            return Err(invalid("horizon", "must be at least 8"));
        }
        if n_paths < 1 {
            return Err(invalid("n_paths", "must be at least 1"));
        }
        Ok(Self {
            dt,
            horizon,
            n_paths,
            seed,
        })
    }
}

/// `1/2 E int_0^horizon e^{-s} dΛ_target` from `y0`, path `k` on stream `k`.
pub fn estimate_local_time(spec: &ReflectionSpec, y0: &[f64], cfg: &McConfig, exec: Exec) -> Result<McEstimate> {
    spec.validate()?;
    if y0.len() != spec.dim {
        return Err(Error::Dimension {
            expected: spec.dim,
            got: y0.len(),
        });
    }
    if let Some((index, &value)) = y0.iter().enumerate().find(|(_, v)| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::NegativeGap { index, value });
    }
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let sdt = cfg.dt.sqrt();
    let out = exec.map(cfg.n_paths, |k| -> Result<(f64, f64)> {
        let mut rng = stream(cfg.seed, k as u64);
        let mut path = RbmPath::start(y0);
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut rng);
            path.step(cfg.dt, sdt * z, spec)?;
        }
        Ok((0.5 * path.disc_lambda, 0.5 * path.disc_lambda_dt))
    });
    let out = out.into_iter().collect::<Result<Vec<_>>>()?;
    let (mean, stderr) = mean_stderr(out.iter().map(|o| o.0));
    let (mean_time_form, _) = mean_stderr(out.iter().map(|o| o.1));
    Ok(McEstimate {
        mean,
        stderr,
        n_paths: cfg.n_paths,
        dt: cfg.dt,
        horizon: cfg.horizon,
        mean_time_form,
    })
}

/// Estimate of `v(y0)` from the three-gap system.
pub fn estimate_v_mc(y0: &GapVector, cfg: &McConfig, exec: Exec) -> Result<McEstimate> {
    estimate_local_time(&ReflectionSpec::three_gap(), y0.as_slice(), cfg, exec)
}

/// Estimate of `V(y1, y2)` from the reduced two-gap system.
#[allow(non_snake_case)]
pub fn estimate_V_mc(y1: f64, y2: f64, cfg: &McConfig, exec: Exec) -> Result<McEstimate> {
    estimate_local_time(&ReflectionSpec::two_gap(), &[y1, y2], cfg, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn default_specs_are_valid() {
        let s3 = ReflectionSpec::three_gap();
        s3.validate().unwrap();
        assert!((s3.off_diagonal_radius() - 0.5 * 2f64.sqrt()).abs() < 1e-9);
        let s2 = ReflectionSpec::two_gap();
        s2.validate().unwrap();
        assert!((s2.off_diagonal_radius() - 0.5f64.sqrt()).abs() < 1e-9);
        let mut bad = s3.clone();
        bad.reflection[1] = -1.0;
        bad.reflection[3] = -1.0;
        assert!(bad.validate().is_err());
        assert_eq!(s3.covariance()[1], -1.0);
    }

    #[test]
    fn push_inside_is_identity() {
        let (y, dl) = skorokhod_push(&[0.1, 0.0, 3.0], &ReflectionSpec::three_gap()).unwrap();
        assert_eq!(y, vec![0.1, 0.0, 3.0]);
        assert_eq!(dl, vec![0.0; 3]);
    }

    #[test]
    fn single_face_push() {
        let a = 0.3;
        let (y, dl) = skorokhod_push(&[-a, 5.0, 7.0], &ReflectionSpec::three_gap()).unwrap();
        assert!((dl[0] - a).abs() < 1e-15 && dl[1] == 0.0 && dl[2] == 0.0);
        assert_eq!(y[0], 0.0);
        assert!((y[1] - (5.0 - a / 2.0)).abs() < 1e-15);
        assert_eq!(y[2], 7.0);
    }

    #[test]
    fn push_complementarity_sweep() {
        let spec = ReflectionSpec::three_gap();
        let mut rng = stream(42, 0);
        for _ in 0..20000 {
            let yf: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let (y, dl) = skorokhod_push(&yf, &spec).unwrap();
            for i in 0..3 {
                let s: f64 = yf[i] + (0..3).map(|j| spec.r(i, j) * dl[j]).sum::<f64>();
                assert!(s >= -1e-10, "{yf:?}");
                assert!(y[i] >= 0.0 && dl[i] >= 0.0);
                if dl[i] > 0.0 {
                    assert!(s.abs() <= 1e-10);
                } else {
                    assert!((y[i] - s).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn interior_step_and_zero_variation_sums() {
        let spec = ReflectionSpec::three_gap();
        let mut p = RbmPath::start(&[5.0, 5.0, 5.0]);
        p.step(1e-3, 0.01, &spec).unwrap();
        assert_eq!(p.y, vec![5.01, 4.99, 5.01]);
        assert_eq!(p.lambda, vec![0.0; 3]);
        assert!((p.y[0] + p.y[1] - 10.0).abs() < 1e-12);
        assert!((p.y[1] + p.y[2] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal_is_preserved_and_lambda_monotone() {
        let spec = ReflectionSpec::three_gap();
        let mut rng = stream(3, 1);
        let mut p = RbmPath::start(&[0.2, 0.1, 0.2]);
        let mut prev = p.lambda.clone();
        for _ in 0..20000 {
            let z: f64 = StandardNormal.sample(&mut rng);
            p.step(1e-3, 0.0316 * z, &spec).unwrap();
            assert!((p.y[0] - p.y[2]).abs() <= 1e-9);
            assert!(p.y.iter().all(|v| *v >= -POSITION_SLACK));
            for i in 0..3 {
                assert!(p.lambda[i] >= prev[i]);
            }
            prev = p.lambda.clone();
        }
        assert!(p.lambda[2] > 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(McConfig::new(1e-3, 4.0, 10, 0).is_err());
        assert!(McConfig::new(0.0, 12.0, 10, 0).is_err());
        assert!(McConfig::new(1e-3, 12.0, 0, 0).is_err());
        let cfg = McConfig::new(1e-2, 8.0, 2, 0).unwrap();
        assert!(estimate_V_mc(-1.0, 0.0, &cfg, Exec::Sequential).is_err());
    }
}
