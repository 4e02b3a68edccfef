//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on failure.
//!
//! Runs with `harness = false` so the lines are always printed.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use regret_lab::closed_form::{u4_array, u4_derivatives, v2d, v3, v3_raw, GapVector, RegretState, U4_ORIGIN};
use regret_lab::game_sim::{estimate_regret, mw_player, NaturePolicy, PlayerPolicy, SimConfig};
use regret_lab::game_solver::{
    dpp_inner, dpp_inner_dual, solve, Dynamics, SolveOptions, SubsetCosts,
};
use regret_lab::rbm_sim::{estimate_V_mc, estimate_v_mc, McConfig};
use regret_lab::verify::{
    check_comb_gaps, check_hjb, check_hyperbolic, check_origin_hessian, check_reflections, check_v_pde,
    ResidualReport, VerifyOptions,
};
use regret_lab::Exec;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn reports(rs: &[ResidualReport]) -> Outcome {
    let detail = rs
        .iter()
        .map(|r| format!("{} max {:.2e} (tol {:.0e})", r.check, r.max_residual, r.tolerance))
        .collect::<Vec<_>>()
        .join("; ");
    outcome(rs.iter().all(|r| r.pass), detail)
}

fn exec() -> Exec {
    Exec::default()
}

fn c1_origin_value() -> Outcome {
    let v = u4_array(&[0.0; 4]);
    let closed = PI / (4.0 * SQRT_2);
    let pass = (v - 0.5553603672697958).abs() <= 1e-12 && (v - closed).abs() <= 1e-12;
    outcome(pass, format!("u4(0) = {v:.16}"))
}

fn c2_origin_hessian() -> Outcome {
    let k = PI / (8.0 * SQRT_2);
    let (_, h) = u4_derivatives(&[0.0; 4]);
    let mut worst: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            let e = if i == j { 3.0 * k } else { -k };
            worst = worst.max((h[i][j] - e).abs());
        }
    }
    let fd = check_origin_hessian();
    let mut o = reports(&fd);
    o.pass &= worst <= 1e-6;
    o.detail = format!("entrywise {worst:.2e}; {}; fd ratios chamber {:.2} origin {:.2}", o.detail,
        fd[1].metadata["ratio"], fd[2].metadata["ratio"]);
    o
}

fn c3_hjb() -> Outcome {
    reports(&[check_hjb(&VerifyOptions::default())])
}

fn c4_comb() -> Outcome {
    reports(&check_comb_gaps(&VerifyOptions::default()))
}

fn c5_vpde() -> Outcome {
    let opts = VerifyOptions::default();
    let mut rs = vec![check_v_pde(&opts)];
    rs.extend(check_reflections(&opts));
    reports(&rs)
}

fn c6_hyperbolic() -> Outcome {
    reports(&check_hyperbolic(&VerifyOptions::default()))
}

fn c7_diagonal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let a: f64 = rng.random_range(0.0..3.0);
        let b: f64 = rng.random_range(0.0..3.0);
        let lhs = v3(&GapVector::new(vec![a, b, a]).unwrap()).unwrap();
        worst = worst.max((lhs - v2d(a, b).unwrap()).abs());
    }
    outcome(worst <= 1e-12, format!("max |v3(a,b,a) - V(a,b)| = {worst:.2e}"))
}

struct Solves {
    n4_r40: f64,
}

fn scaled_origin(n: usize, delta: f64, radius: usize, dynamics: Dynamics) -> f64 {
    let opts = SolveOptions::new(n, delta, radius, 1e-8).unwrap().with_exec(exec());
    delta.sqrt() * solve(&opts, dynamics).unwrap().grid.origin()
}

fn c8_convergence(store: &mut Solves) -> Outcome {
    let t3 = 2.0 / (3.0 * SQRT_2);
    let n3_04 = scaled_origin(3, 0.04, 40, Dynamics::Minimax);
    let n3_01 = scaled_origin(3, 0.01, 80, Dynamics::Minimax);
    let n4_16 = scaled_origin(4, 0.16, 20, Dynamics::Minimax);
    let n4_04 = scaled_origin(4, 0.04, 40, Dynamics::Minimax);
    let n4_04_wide = scaled_origin(4, 0.04, 60, Dynamics::Minimax);
    store.n4_r40 = n4_04;
    let (e3a, e3b) = ((n3_04 - t3).abs(), (n3_01 - t3).abs());
    let (e4a, e4b) = ((n4_16 - U4_ORIGIN).abs(), (n4_04 - U4_ORIGIN).abs());
    // sensitivity of V^delta(0) itself, before scaling
    let trunc = (n4_04_wide - n4_04).abs() / 0.04f64.sqrt();
    let pass = e3b < 0.1 && e3b < e3a && e4b < 0.15 && e4b < e4a && trunc < 0.02;
    outcome(
        pass,
        format!(
            "N=3 err {e3a:.4} -> {e3b:.4}; N=4 err {e4a:.4} -> {e4b:.4}; radius 40 vs 60 |dV(0)| {trunc:.2e}"
        ),
    )
}

fn c9_balanced(store: &Solves) -> Outcome {
    let u = scaled_origin(4, 0.04, 40, Dynamics::BalancedComb);
    let gap = (u - store.n4_r40).abs();
    let pass = gap <= 0.05 && u <= store.n4_r40 + 0.04f64.sqrt() * 1e-8;
    outcome(pass, format!("balanced comb {u:.5} vs minimax {:.5}, gap {gap:.2e}", store.n4_r40))
}

/// `min over a simplex grid of max_J (c_J - alpha(J))`.
fn grid_oracle(n: usize, c: &[f64], step: f64) -> f64 {
    let k = (1.0 / step).round() as usize;
    let eval = |a: &[f64]| {
        (0..1usize << n)
            .map(|j| c[j] - (0..n).filter(|i| (j >> i) & 1 == 1).map(|i| a[i]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut best = f64::INFINITY;
    match n {
        2 => {
            for i in 0..=k {
                let a = i as f64 / k as f64;
                best = best.min(eval(&[a, 1.0 - a]));
            }
        }
        3 => {
            for i in 0..=k {
                for j in 0..=k - i {
                    let (a, b) = (i as f64 / k as f64, j as f64 / k as f64);
                    best = best.min(eval(&[a, b, 1.0 - a - b]));
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

fn c10_lp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut gap: f64 = 0.0;
    for k in 0..1000 {
        let n = 2 + k % 3;
        let c: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let c = SubsetCosts::new(n, c).unwrap();
        let (p, _) = dpp_inner(&c).unwrap();
        let (d, _) = dpp_inner_dual(&c).unwrap();
        gap = gap.max((p - d).abs());
    }
    let mut oracle: f64 = 0.0;
    for k in 0..100 {
        let n = 2 + k % 2;
        let c: Vec<f64> = (0..1 << n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (v, _) = dpp_inner(&SubsetCosts::new(n, c.clone()).unwrap()).unwrap();
        oracle = oracle.max((v - grid_oracle(n, &c, 2e-3)).abs());
    }
    outcome(gap <= 1e-9 && oracle <= 3e-3, format!("duality gap {gap:.2e}; grid oracle {oracle:.2e}"))
}

fn c11_rbm() -> Outcome {
    let cfg = McConfig::new(1e-3, 12.0, 20_000, 11).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for y in [[0.0, 0.0, 0.0], [0.5, 0.5, 0.5], [1.0, 0.2, 2.0]] {
        let g = GapVector::new(y.to_vec()).unwrap();
        let e = estimate_v_mc(&g, &cfg, exec()).unwrap();
        let exact = v3_raw(y);
        let ok = (e.mean - exact).abs() <= 3.0 * e.stderr + 0.03;
        pass &= ok;
        parts.push(format!("v{y:?} {:.4}±{:.4} vs {exact:.4}", e.mean, e.stderr));
    }
    for (a, b) in [(0.0, 0.0), (0.7, 0.0), (0.3, 0.6)] {
        let e = estimate_V_mc(a, b, &cfg, exec()).unwrap();
        let exact = v2d(a, b).unwrap();
        pass &= (e.mean - exact).abs() <= 3.0 * e.stderr + 0.03;
        parts.push(format!("V({a},{b}) {:.4}±{:.4} vs {exact:.4}", e.mean, e.stderr));
    }
    outcome(pass, parts.join("; "))
}

fn c12_game_sim() -> Outcome {
    let origin = RegretState::new(vec![0.0; 4]).unwrap();
    let big = SimConfig {
        delta: 0.01,
        x0: origin.clone(),
        n_episodes: 200_000,
        seed: 12,
        nature: NaturePolicy::BalancedComb,
        player: PlayerPolicy::Uniform,
    };
    let r = estimate_regret(&big, exec()).unwrap();
    let scaled = 0.1 * r.mean;
    let law = (r.mean_t - 99.0).abs() <= 5.0 * r.stderr_t;
    let limit = (scaled - U4_ORIGIN).abs() <= 4.0 * 0.1 * r.stderr + 0.1;

    let mut invariant = true;
    let mut means = Vec::new();
    let base = SimConfig {
        delta: 0.04,
        n_episodes: 20_000,
        seed: 120,
        ..big.clone()
    };
    let players = [
        PlayerPolicy::Uniform,
        PlayerPolicy::FollowLeader,
        mw_player(0.5).unwrap(),
        PlayerPolicy::GradientU,
    ];
    let results: Vec<_> = players
        .iter()
        .map(|p| estimate_regret(&SimConfig { player: p.clone(), ..base.clone() }, exec()).unwrap())
        .collect();
    for (p, r) in players.iter().zip(&results) {
        let r0 = &results[0];
        invariant &= (r.mean - r0.mean).abs() <= 4.0 * (r.stderr.powi(2) + r0.stderr.powi(2)).sqrt();
        means.push(format!("{} {:.3}", p.id(), r.mean));
    }
    outcome(
        law && limit && invariant,
        format!(
            "mean T {:.3} (se {:.3}); sqrt(delta) E[R] {scaled:.4} (se {:.4}); delta=0.04 means: {}",
            r.mean_t,
            r.stderr_t,
            0.1 * r.stderr,
            means.join(", ")
        ),
    )
}

fn c13_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut perms: Vec<[usize; 4]> = Vec::new();
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut s = p;
                    s.sort();
                    if s == [0, 1, 2, 3] {
                        perms.push(p);
                    }
                }
            }
        }
    }
    let (mut sym, mut tr, mut mono_violations): (f64, f64, usize) = (0.0, 0.0, 0);
    for _ in 0..1000 {
        let x: [f64; 4] = [0, 1, 2, 3].map(|_| rng.random_range(-3.0..3.0));
        let u = u4_array(&x);
        for p in &perms {
            sym = sym.max((u4_array(&p.map(|k| x[k])) - u).abs());
        }
        let lam: f64 = rng.random_range(-5.0..5.0);
        tr = tr.max((u4_array(&x.map(|v| v + lam)) - u - lam).abs());
        let k = rng.random_range(0..4usize);
        let mut y = x;
        y[k] += rng.random_range(0.0..1.0);
        if u4_array(&y) < u - 1e-12 {
            mono_violations += 1;
        }
    }
    outcome(
        perms.len() == 24 && sym <= 1e-12 && tr <= 1e-10 && mono_violations == 0,
        format!("24 permutations {sym:.1e}; translation {tr:.1e}; monotonicity violations {mono_violations}"),
    )
}

fn main() -> ExitCode {
    let mut store = Solves { n4_r40: f64::NAN };
    let mut failed = 0;
    let mut run = |k: usize, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "criterion {k:>2} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failed += 1;
        }
    };
    run(1, "origin value", &mut c1_origin_value);
    run(2, "origin Hessian", &mut c2_origin_hessian);
    run(3, "HJB residual", &mut c3_hjb);
    run(4, "comb optimality", &mut c4_comb);
    run(5, "v PDE and reflections", &mut c5_vpde);
    run(6, "hyperbolic system", &mut c6_hyperbolic);
    run(7, "diagonal identity", &mut c7_diagonal);
    run(8, "discrete game convergence", &mut || c8_convergence(&mut store));
    let s = Solves { n4_r40: store.n4_r40 };
    run(9, "balanced comb best response", &mut || c9_balanced(&s));
    run(10, "LP duality", &mut c10_lp);
    run(11, "RBM Monte Carlo", &mut c11_rbm);
    run(12, "game simulation", &mut c12_game_sim);
    run(13, "symmetry and monotonicity", &mut c13_properties);
    println!("acceptance: {} of 13 criteria passed", 13 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
