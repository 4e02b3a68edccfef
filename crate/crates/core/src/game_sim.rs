//! Monte Carlo play of the discrete game under geometric stopping.
//!
//! The state carried through an episode is the regret vector
//! `x_i = G^i - G` (expert gain minus player gain). Each round nature picks a
//! subset `J`, the player picks an expert `i`, and `x <- x + e_J - 1{i in J} 1`.
//! The terminal regret is `max_i x_i`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::{comb_set_array, u4_derivatives, ExpertSubset, RegretState};
use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::rng::{stream, PathRng};

/// How nature picks `J` each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum NaturePolicy {
    /// Comb set or its complement, probability 1/2 each (four experts).
    BalancedComb,
    /// Always the comb set (four experts).
    PureComb,
    FixedSubset { subset: ExpertSubset },
    /// State-independent law: `probs[bits]` is the probability of subset `bits`.
    Custom { probs: Vec<f64> },
}

/// How the player picks `i` each round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PlayerPolicy {
    /// `alpha_i = d_i u(sqrt(delta) x)` (four experts).
    GradientU,
    Uniform,
    /// Point mass on the current leader, lowest index on ties.
    FollowLeader,
    MultiplicativeWeights { eta: f64 },
}

/// `w_i ∝ exp(eta G^i)`.
pub fn mw_player(eta: f64) -> Result<PlayerPolicy> {
    if !(eta > 0.0) {
        return Err(invalid("eta", "must be positive"));
    }
    Ok(PlayerPolicy::MultiplicativeWeights { eta })
}

impl NaturePolicy {
    pub fn id(&self) -> String {
        match self {
            NaturePolicy::BalancedComb => "balanced_comb".into(),
            NaturePolicy::PureComb => "pure_comb".into(),
            NaturePolicy::FixedSubset { subset } => format!("fixed_subset{subset}"),
            NaturePolicy::Custom { .. } => "custom".into(),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            NaturePolicy::BalancedComb | NaturePolicy::PureComb if n != 4 => {
                Err(invalid("nature", "comb strategies need four experts"))
            }
            NaturePolicy::FixedSubset { subset } => ExpertSubset::new(subset.bits(), n).map(|_| ()),
            NaturePolicy::Custom { probs } => {
                if probs.len() != 1 << n {
                    return Err(invalid("nature", format!("custom table needs {} entries", 1 << n)));
                }
                let sum: f64 = probs.iter().sum();
                if probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                    return Err(invalid("nature", "custom table is not a probability vector"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Ranking is scale invariant, so the comb set of the lattice state equals
    /// that of the continuum point `sqrt(delta) x`.
    fn draw(&self, n: usize, x: &[f64], rng: &mut PathRng) -> ExpertSubset {
        let u: f64 = rng.random();
        match self {
            NaturePolicy::BalancedComb => {
                let c = comb_set_array(&[x[0], x[1], x[2], x[3]]);
                if u < 0.5 {
                    c
                } else {
                    c.complement(4)
                }
            }
            NaturePolicy::PureComb => comb_set_array(&[x[0], x[1], x[2], x[3]]),
            NaturePolicy::FixedSubset { subset } => *subset,
            NaturePolicy::Custom { probs } => {
                let mut acc = 0.0;
                for (bits, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return ExpertSubset::new(bits as u8, n).unwrap_or(ExpertSubset::EMPTY);
                    }
                }
                // round-off past the last positive entry
                let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(0);
                ExpertSubset::new(last as u8, n).unwrap_or(ExpertSubset::EMPTY)
            }
        }
    }
}

impl PlayerPolicy {
    pub fn id(&self) -> String {
        match self {
            PlayerPolicy::GradientU => "gradient_u".into(),
            PlayerPolicy::Uniform => "uniform".into(),
            PlayerPolicy::FollowLeader => "follow_leader".into(),
            PlayerPolicy::MultiplicativeWeights { eta } => format!("mw(eta={eta})"),
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            PlayerPolicy::GradientU if n != 4 => Err(invalid("player", "gradient_u needs four experts")),
            PlayerPolicy::MultiplicativeWeights { eta } => mw_player(*eta).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Mixed strategy at regret state `x`; writes `alpha[..n]`.
    pub fn alpha(&self, x: &[f64], sqrt_delta: f64, alpha: &mut [f64]) {
        let n = x.len();
        match self {
            PlayerPolicy::GradientU => {
                let p = [x[0] * sqrt_delta, x[1] * sqrt_delta, x[2] * sqrt_delta, x[3] * sqrt_delta];
                let (g, _) = u4_derivatives(&p);
                let mut sum = 0.0;
                for i in 0..4 {
                    alpha[i] = g[i].max(0.0);
                    sum += alpha[i];
                }
                alpha[..4].iter_mut().for_each(|a| *a /= sum);
            }
            PlayerPolicy::Uniform => alpha[..n].fill(1.0 / n as f64),
            PlayerPolicy::FollowLeader => {
                let lead = leader(x);
                for i in 0..n {
                    alpha[i] = if i == lead { 1.0 } else { 0.0 };
                }
            }
            // G^i = x_i + G, and the common G cancels after normalizing
            PlayerPolicy::MultiplicativeWeights { eta } => {
                let top = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let mut sum = 0.0;
                for i in 0..n {
                    alpha[i] = (eta * (x[i] - top)).exp();
                    sum += alpha[i];
                }
                alpha[..n].iter_mut().for_each(|a| *a /= sum);
            }
        }
    }

    fn draw(&self, x: &[f64], sqrt_delta: f64, rng: &mut PathRng) -> usize {
        let u: f64 = rng.random();
        let n = x.len();
        let mut alpha = [0.0; 4];
        self.alpha(x, sqrt_delta, &mut alpha);
        let mut acc = 0.0;
        for (i, a) in alpha[..n].iter().enumerate() {
            acc += a;
            if u < acc {
                return i;
            }
        }
        alpha[..n].iter().rposition(|a| *a > 0.0).unwrap_or(n - 1)
    }
}

fn leader(x: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i] > x[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub delta: f64,
    pub x0: RegretState,
    pub n_episodes: usize,
    pub seed: u64,
    pub nature: NaturePolicy,
    pub player: PlayerPolicy,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid("delta", format!("{} is outside (0, 1]", self.delta)));
        }
        if self.n_episodes < 1 {
            return Err(invalid("n_episodes", "must be at least 1"));
        }
        let n = self.x0.dim();
        if !(2..=4).contains(&n) {
            return Err(invalid("x0", format!("{n} experts unsupported (use 2, 3 or 4)")));
        }
        self.nature.validate(n)?;
        self.player.validate(n)
    }
}

/// Draws `T` with `P(T = t) = delta (1 - delta)^t`, `t >= 0`, by inverse CDF.
pub fn draw_stopping_time(delta: f64, rng: &mut PathRng) -> u64 {
    if delta >= 1.0 {
        return 0;
    }
    let u = 1.0 - rng.random::<f64>();
    (u.ln() / (1.0 - delta).ln()).floor() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    /// State before the round.
    pub x: Vec<f64>,
    pub subset: ExpertSubset,
    pub expert: usize,
    /// 1 when the player's pick was in the subset.
    pub gain: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameTrace {
    pub steps: Vec<TraceStep>,
    pub terminal: Vec<f64>,
    pub regret: f64,
}

fn run_episode(cfg: &SimConfig, rng: &mut PathRng, mut trace: Option<&mut Vec<TraceStep>>) -> (Vec<f64>, u64) {
    let n = cfg.x0.dim();
    let sd = cfg.delta.sqrt();
    let t = draw_stopping_time(cfg.delta, rng);
    let mut x = cfg.x0.as_slice().to_vec();
    for _ in 0..t {
        let j = cfg.nature.draw(n, &x, rng);
        let i = cfg.player.draw(&x, sd, rng);
        let gain = j.contains(i) as u8;
        if let Some(tr) = trace.as_deref_mut() {
            tr.push(TraceStep {
                x: x.clone(),
                subset: j,
                expert: i,
                gain,
            });
        }
        for (k, v) in x.iter_mut().enumerate() {
            *v += j.contains(k) as u8 as f64 - gain as f64;
        }
    }
    (x, t)
}

fn max_of(x: &[f64]) -> f64 {
    x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

/// Plays one episode on the given stream and records every round.
pub fn simulate_episode(cfg: &SimConfig, rng: &mut PathRng) -> Result<GameTrace> {
    cfg.validate()?;
    let mut steps = Vec::new();
    let (terminal, _) = run_episode(cfg, rng, Some(&mut steps));
    Ok(GameTrace {
        regret: max_of(&terminal),
        steps,
        terminal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
    pub mean_t: f64,
    pub stderr_t: f64,
}

impl SimResult {
    pub const CSV_HEADER: [&'static str; 9] =
        ["delta", "x0", "nature", "player", "n", "mean", "stderr", "mean_T", "seed"];

    pub fn csv_record(&self, cfg: &SimConfig) -> Vec<String> {
        let x0: Vec<String> = cfg.x0.as_slice().iter().map(|v| format!("{v:.17e}")).collect();
        vec![
            format!("{:.17e}", cfg.delta),
            x0.join(" "),
            cfg.nature.id(),
            cfg.player.id(),
            self.n.to_string(),
            format!("{:.17e}", self.mean),
            format!("{:.17e}", self.stderr),
            format!("{:.17e}", self.mean_t),
            cfg.seed.to_string(),
        ]
    }
}

/// Mean and standard error (`std / sqrt(n)`) summed in index order.
pub(crate) fn mean_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = xs.clone().count() as f64;
    let mean = xs.clone().sum::<f64>() / n;
    if n < 2.0 {
        return (mean, 0.0);
    }
    let var = xs.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Average terminal regret over `n_episodes`, episode `k` on stream `k`.
pub fn estimate_regret(cfg: &SimConfig, exec: Exec) -> Result<SimResult> {
    cfg.validate()?;
    let out = exec.map(cfg.n_episodes, |k| {
        let mut rng = stream(cfg.seed, k as u64);
        let (x, t) = run_episode(cfg, &mut rng, None);
        (max_of(&x), t as f64)
    });
    let (mean, stderr) = mean_stderr(out.iter().map(|o| o.0));
    let (mean_t, stderr_t) = mean_stderr(out.iter().map(|o| o.1));
    Ok(SimResult {
        mean,
        stderr,
        n: cfg.n_episodes,
        mean_t,
        stderr_t,
    })
}
