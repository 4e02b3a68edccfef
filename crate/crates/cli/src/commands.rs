use std::f64::consts::SQRT_2;
use std::path::PathBuf;

use anyhow::{Context, Result};
use serde_json::{json, Map, Value};

use regret_lab::closed_form::{
    comb_pair, f_fn, h_fn, hamiltonian_argmax, phi, r1_fn, r2_fn, u3, u4, u4_grad, u4_hess, v1_fn,
    v2_fn, v2d, v3, w2_gap, ExpertSubset, GapVector, RegretState, U3_ORIGIN, U4_ORIGIN,
};
use regret_lab::game_sim::{estimate_regret, mw_player, NaturePolicy, PlayerPolicy, SimConfig, SimResult};
use regret_lab::game_solver::{rescaled_value, solve, BoundaryRule, Dynamics, SolveOptions, ValueGrid};
use regret_lab::rbm_sim::{estimate_V_mc, estimate_v_mc, McConfig, McEstimate};
use regret_lab::verify::{run_suite, summary_table, Suite, VerifyOptions};
use regret_lab::Exec;

use crate::output::{join17, merge, read_config, sig17, write_csv, write_manifest, Run};
use crate::{Cli, Cmd, SimKind, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

struct Globals {
    threads: usize,
    seed: u64,
    json: bool,
    exec: Exec,
}

fn globals(cli: &Cli, config: &Map<String, Value>) -> Result<Globals> {
    let threads = match cli.threads {
        Some(t) => t,
        None => config.get("threads").and_then(Value::as_u64).unwrap_or(1) as usize,
    };
    let seed = match cli.seed {
        Some(s) => s,
        None => config.get("seed").and_then(Value::as_u64).unwrap_or(0),
    };
    let json = cli.json || config.get("json").and_then(Value::as_bool).unwrap_or(false);
    let exec = Exec::from_threads(threads);
    #[cfg(feature = "parallel")]
    if exec == Exec::Parallel {
        // a second build (as in tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(Globals {
        threads,
        seed,
        json,
        exec,
    })
}

pub fn run(cli: Cli) -> Result<bool> {
    let config = read_config(cli.config.as_deref())?;
    let g = globals(&cli, &config)?;
    match &cli.cmd {
        Cmd::Eval(a) => eval(&merge(a, &config)?, &g),
        Cmd::Solve(a) => solve_cmd(&merge(a, &config)?, &g),
        Cmd::Report(a) => report(&merge(a, &config)?, &g),
        Cmd::Simulate { kind: SimKind::Game(a) } => sim_game(&merge(a, &config)?, &g),
        Cmd::Simulate { kind: SimKind::Rbm(a) } => sim_rbm(&merge(a, &config)?, &g),
        Cmd::Verify(a) => verify(&merge(a, &config)?, &g),
    }
}

fn state(point: &[f64]) -> Result<RegretState> {
    Ok(RegretState::new(point.to_vec())?)
}

fn expect_len(point: &[f64], n: usize, what: &str) -> Result<()> {
    if point.len() != n {
        return Err(usage(format!("{what} takes {n} coordinates, got {}", point.len())));
    }
    Ok(())
}

const EVAL_FUNCTIONS: &str = "u4, u3, v3, V2d, V1, V2, f, r1, h, r2, grad, hess, comb, argmax, phi";

fn eval(a: &crate::EvalArgs, g: &Globals) -> Result<bool> {
    let run = Run::start("eval", g.threads);
    let f = a
        .function
        .as_deref()
        .ok_or_else(|| usage(format!("missing function (one of {EVAL_FUNCTIONS})")))?;
    let p = &a.point;
    if let Some(bad) = p.iter().find(|v| !v.is_finite()) {
        return Err(usage(format!("non-finite coordinate {bad}")));
    }
    let scalar = |v: f64| (sig17(v), json!(v));
    let (text, value): (String, Value) = match f {
        "u4" => scalar(u4(&state(p)?)?),
        "u3" => scalar(u3(&state(p)?)?),
        "phi" => scalar(phi(&state(p)?)),
        "v3" => scalar(v3(&GapVector::new(p.clone())?)?),
        "V2d" => {
            expect_len(p, 2, f)?;
            scalar(v2d(p[0], p[1])?)
        }
        "V1" | "V2" => {
            expect_len(p, 1, f)?;
            scalar(if f == "V1" { v1_fn(p[0])? } else { v2_fn(p[0])? })
        }
        "f" | "r1" | "h" | "r2" => {
            expect_len(p, 2, f)?;
            let fun = match f {
                "f" => f_fn,
                "r1" => r1_fn,
                "h" => h_fn,
                _ => r2_fn,
            };
            scalar(fun(p[0], p[1])?)
        }
        "grad" => {
            let gr = u4_grad(&state(p)?)?;
            (join17(&gr), json!(gr))
        }
        "hess" => {
            let h = u4_hess(&state(p)?)?;
            let rows: Vec<String> = h.iter().map(|r| join17(r)).collect();
            (rows.join("\n"), json!(h))
        }
        "comb" => {
            let s = state(p)?;
            s.expect_dim(4)?;
            let x: [f64; 4] = [p[0], p[1], p[2], p[3]];
            let (i4, i2) = comb_pair(&x);
            let txt = format!("{{{},{}}}", i4 + 1, i2 + 1);
            (txt.clone(), json!([i4 + 1, i2 + 1]))
        }
        "argmax" => {
            let set = hamiltonian_argmax(&state(p)?, a.tol.unwrap_or(1e-9))?;
            let names: Vec<String> = set.iter().map(ExpertSubset::to_string).collect();
            (names.join(" "), json!(names))
        }
        other => return Err(usage(format!("unknown function '{other}' (valid: {EVAL_FUNCTIONS})"))),
    };
    if g.json {
        let m = run.manifest(a, None, vec![])?;
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({"function": f, "point": p, "value": value, "manifest": m}))?
        );
    } else {
        println!("{text}");
    }
    Ok(true)
}

fn solve_cmd(a: &crate::SolveArgs, g: &Globals) -> Result<bool> {
    let run = Run::start("solve", g.threads);
    let n = a.n.unwrap_or(4);
    let delta = a.delta.unwrap_or(0.04);
    let radius = a.radius.unwrap_or(40);
    let tol = a.tol.unwrap_or(1e-8);
    let boundary = match a.boundary.as_deref().unwrap_or("continuum_closure") {
        "continuum_closure" => BoundaryRule::ContinuumClosure,
        "phi" => BoundaryRule::Phi,
        b => return Err(usage(format!("unknown boundary '{b}' (valid: continuum_closure, phi)"))),
    };
    let dynamics = match a.dynamics.as_deref().unwrap_or("minimax") {
        "minimax" => Dynamics::Minimax,
        "balanced_comb" => Dynamics::BalancedComb,
        d => return Err(usage(format!("unknown dynamics '{d}' (valid: minimax, balanced_comb)"))),
    };
    let opts = SolveOptions::new(n, delta, radius, tol)?
        .with_exec(g.exec)
        .with_boundary(boundary);
    let sol = solve(&opts, dynamics)?;
    let grid = &sol.grid;
    let mut outputs = Vec::new();
    if let Some(out) = &a.out {
        grid.save(out).with_context(|| format!("writing {}", out.display()))?;
        outputs.push(out.clone());
    }
    let m = run.manifest(a, None, outputs)?;
    if let Some(out) = &a.out {
        write_manifest(out, &m)?;
    }
    let summary = json!({
        "n": n, "delta": delta, "radius": radius, "iterations": grid.iterations,
        "last_change": grid.last_change, "origin": grid.origin(),
        "scaled_origin": grid.rescaled_origin(),
    });
    if g.json {
        println!("{}", serde_json::to_string_pretty(&json!({"summary": summary, "manifest": m}))?);
    } else {
        println!("n {n} delta {} radius {radius} iterations {}", sig17(delta), grid.iterations);
        println!("V(0) {}", sig17(grid.origin()));
        println!("sqrt(delta) V(0) {}", sig17(grid.rescaled_origin()));
    }
    Ok(true)
}

fn limit_value(x: &RegretState) -> Result<f64> {
    Ok(match x.dim() {
        4 => u4(x)?,
        3 => u3(x)?,
        _ => {
            let s = x.as_slice();
            s[0].max(s[1]) + w2_gap((s[0] - s[1]).abs())
        }
    })
}

fn report(a: &crate::ReportArgs, g: &Globals) -> Result<bool> {
    let run = Run::start("report", g.threads);
    let path = a.grid.as_ref().ok_or_else(|| usage("missing --grid"))?;
    let grid = ValueGrid::load(path).with_context(|| format!("loading {}", path.display()))?;
    let target = match grid.n {
        4 => U4_ORIGIN,
        3 => U3_ORIGIN,
        _ => 1.0 / (2.0 * SQRT_2),
    };
    let scaled = grid.rescaled_origin();
    let mut out = json!({
        "n": grid.n, "delta": grid.delta.get(), "radius": grid.radius,
        "scaled_origin": scaled, "limit": target, "error": (scaled - target).abs(),
        "scaled_max_excess": grid.scaled_max_excess(),
    });
    if !a.x.is_empty() {
        let x = state(&a.x)?;
        let v = rescaled_value(&grid, &x)?;
        let lim = limit_value(&x)?;
        out["x"] = json!(a.x);
        out["rescaled_value"] = json!(v);
        out["limit_at_x"] = json!(lim);
    }
    if g.json {
        let m = run.manifest(a, None, vec![])?;
        out["manifest"] = serde_json::to_value(m)?;
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!("n {} delta {} radius {}", grid.n, sig17(grid.delta.get()), grid.radius);
        println!("sqrt(delta) V(0) {}  limit {}  error {}", sig17(scaled), sig17(target), sig17((scaled - target).abs()));
        println!("sqrt(delta) max |V - Phi| {}", sig17(grid.scaled_max_excess()));
        if let Some(v) = out.get("rescaled_value").and_then(Value::as_f64) {
            let lim = out["limit_at_x"].as_f64().unwrap_or(f64::NAN);
            println!("u_delta(x) {}  limit {}", sig17(v), sig17(lim));
        }
    }
    Ok(true)
}

const NATURES: &str = "balanced_comb, pure_comb, fixed_subset, custom";
const PLAYERS: &str = "gradient_u, uniform, follow_leader, mw";

fn parse_subset(s: &str, n: usize) -> Result<ExpertSubset> {
    let mut members = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let k: usize = part.parse().map_err(|_| usage(format!("bad subset member '{part}'")))?;
        if k < 1 || k > n {
            return Err(usage(format!("subset member {k} outside 1..={n}")));
        }
        members.push(k - 1);
    }
    Ok(ExpertSubset::from_members(&members))
}

fn sim_game(a: &crate::GameArgs, g: &Globals) -> Result<bool> {
    let run = Run::start("simulate game", g.threads);
    let x0 = if a.x0.is_empty() { vec![0.0; 4] } else { a.x0.clone() };
    let n = x0.len();
    let nature = match a.nature.as_deref().unwrap_or("balanced_comb") {
        "balanced_comb" => NaturePolicy::BalancedComb,
        "pure_comb" => NaturePolicy::PureComb,
        "fixed_subset" => NaturePolicy::FixedSubset {
            subset: parse_subset(a.subset.as_deref().ok_or_else(|| usage("fixed_subset needs --subset"))?, n)?,
        },
        "custom" => NaturePolicy::Custom { probs: a.probs.clone() },
        other => return Err(usage(format!("unknown nature policy '{other}' (valid: {NATURES})"))),
    };
    let player = match a.player.as_deref().unwrap_or("uniform") {
        "gradient_u" => PlayerPolicy::GradientU,
        "uniform" => PlayerPolicy::Uniform,
        "follow_leader" => PlayerPolicy::FollowLeader,
        "mw" | "multiplicative_weights" => mw_player(a.eta.unwrap_or(1.0))?,
        other => return Err(usage(format!("unknown player policy '{other}' (valid: {PLAYERS})"))),
    };
    let cfg = SimConfig {
        delta: a.delta.unwrap_or(0.04),
        x0: RegretState::new(x0)?,
        n_episodes: a.episodes.unwrap_or(10_000),
        seed: g.seed,
        nature,
        player,
    };
    let r = estimate_regret(&cfg, g.exec)?;
    let csv = write_csv(a.out.as_deref(), &SimResult::CSV_HEADER, &[r.csv_record(&cfg)])?;
    emit(&run, a, g, a.out.clone(), csv, serde_json::to_value(&r)?)
}

fn sim_rbm(a: &crate::RbmArgs, g: &Globals) -> Result<bool> {
    let run = Run::start("simulate rbm", g.threads);
    let y0 = if a.y0.is_empty() { vec![0.0; 3] } else { a.y0.clone() };
    let cfg = McConfig::new(a.dt.unwrap_or(1e-3), a.horizon.unwrap_or(12.0), a.paths.unwrap_or(20_000), g.seed)?;
    let e: McEstimate = match y0.len() {
        3 => estimate_v_mc(&GapVector::new(y0.clone())?, &cfg, g.exec)?,
        2 => estimate_V_mc(y0[0], y0[1], &cfg, g.exec)?,
        k => return Err(usage(format!("--y0 takes 2 or 3 coordinates, got {k}"))),
    };
    let csv = write_csv(a.out.as_deref(), &McEstimate::CSV_HEADER, &[e.csv_record(&y0, g.seed)])?;
    emit(&run, a, g, a.out.clone(), csv, serde_json::to_value(&e)?)
}

fn emit(run: &Run, params: &impl serde::Serialize, g: &Globals, out: Option<PathBuf>, csv: String, result: Value) -> Result<bool> {
    let m = run.manifest(params, Some(g.seed), out.iter().cloned().collect())?;
    if let Some(o) = &out {
        write_manifest(o, &m)?;
    }
    if g.json {
        println!("{}", serde_json::to_string_pretty(&json!({"result": result, "manifest": m}))?);
    } else if out.is_none() {
        print!("{csv}");
    } else {
        println!("{}", serde_json::to_string(&result)?);
    }
    Ok(true)
}

fn verify(a: &crate::VerifyArgs, g: &Globals) -> Result<bool> {
    let run = Run::start("verify", g.threads);
    let name = a
        .suite
        .as_deref()
        .ok_or_else(|| usage(format!("missing suite (one of {})", Suite::NAMES.join(", "))))?;
    let suite = Suite::parse(name).map_err(|e| usage(e.to_string()))?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        sobol_points: a.points.unwrap_or(defaults.sobol_points),
        face_points: a.face_points.unwrap_or(defaults.face_points),
        quick: a.quick,
        exec: g.exec,
    };
    let reports = run_suite(suite, &opts)?;
    let pass = reports.iter().all(|r| r.pass);
    let m = run.manifest(a, None, a.out.iter().cloned().collect())?;
    let doc = json!({"suite": name, "pass": pass, "reports": reports, "manifest": m});
    if let Some(out) = &a.out {
        std::fs::write(out, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("writing {}", out.display()))?;
        write_manifest(out, &m)?;
    }
    if g.json {
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        print!("{}", summary_table(&reports));
        println!("{}", if pass { "all checks passed" } else { "some checks FAILED" });
    }
    Ok(pass)
}
