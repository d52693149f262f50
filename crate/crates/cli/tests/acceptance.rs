//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::process::{Command, ExitCode};
use std::time::Instant;

use causal_gamble::causal_info::directed_information;
use causal_gamble::compression::{expected_length_from_joint, rate_report, shannon_lengths_from_joint};
use causal_gamble::gambling::{
    delta_growth, growth_exact, growth_monte_carlo, kelly_partial_bet, kkt_residual, optimal_full_strategy,
    optimal_partial_strategy, single_race_growth, Allocation, BettingStrategy, OddsModel,
};
use causal_gamble::markov_example::{fig2_left, fig2_right};
use causal_gamble::portfolio::{causal_portfolio_growth, horse_race_embedding, optimal_causal_portfolio};
use causal_gamble::{Budget, ProcessSpec};
use common::*;
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bsc(p: f64, q: f64) -> f64 {
    (1.0 - p) * q + (1.0 - q) * p
}

/// Observation block entropies for the Markov example by listing all
/// hidden paths: `H(Y^len)` and `H(Y^len | X_0)`.
fn observation_entropies(p: f64, q: f64, len: usize) -> (f64, f64) {
    let ny = 1usize << len;
    let mut joint = vec![[0.0f64; 2]; ny];
    for xbits in 0..1usize << (len + 1) {
        let x = |i: usize| xbits >> i & 1;
        let mut px = 0.5;
        for i in 1..=len {
            px *= if x(i) == x(i - 1) { 1.0 - p } else { p };
        }
        for (ybits, cell) in joint.iter_mut().enumerate() {
            let mut pr = px;
            for i in 0..len {
                pr *= if ybits >> i & 1 == x(i + 1) { 1.0 - q } else { q };
            }
            cell[x(0)] += pr;
        }
    }
    let ent = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    let plain = joint.iter().map(|c| ent(c[0] + c[1])).sum();
    let with_start: f64 = joint.iter().map(|c| ent(c[0]) + ent(c[1])).sum::<f64>() - 1.0;
    (plain, with_start)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let rows = fig2_left().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(rows.len() == 51, || format!("{} grid points", rows.len()))?;
    let mut worst: f64 = 0.0;
    for row in &rows {
        let oracle = h2(bsc(0.2, row.value)) - h2(row.value);
        worst = worst.max((row.delta_w - oracle).abs());
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    ensure((rows[0].delta_w - 0.721928).abs() < 1e-6, || format!("dW(0) = {}", rows[0].delta_w))?;
    ensure(rows[50].delta_w.abs() < 1e-12, || format!("dW(0.5) = {}", rows[50].delta_w))?;
    ensure(elapsed < 1.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!(
        "51 points, max |dW - closed form| = {worst:.1e}, dW(0) = {:.6}, dW(0.5) = {:.1e}, {elapsed:.3}s",
        rows[0].delta_w, rows[50].delta_w
    ))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let rows = fig2_right().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    ensure(rows.len() == 11, || format!("{} grid points", rows.len()))?;
    let (p, q) = (0.2, 0.25);
    let hq = h2(q);
    let mut entropies = vec![(0.0, 0.0)];
    entropies.extend((1..=11).map(|len| observation_entropies(p, q, len)));
    let mut worst: f64 = 0.0;
    for (k, row) in rows.iter().enumerate() {
        let lower = entropies[k + 1].1 - entropies[k].1 - hq;
        let upper = entropies[k + 1].0 - entropies[k].0 - hq;
        worst = worst.max((row.delta_w - lower).abs());
        ensure(row.delta_w <= upper + 1e-12, || format!("k={k}: {} above bound {upper}", row.delta_w))?;
        if k > 0 {
            ensure(row.delta_w >= rows[k - 1].delta_w - 1e-12, || format!("decrease at k={k}"))?;
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation from enumeration {worst:e}"))?;
    ensure((rows[0].delta_w - 0.122790).abs() <= 1e-6, || format!("dW(0) = {}", rows[0].delta_w))?;
    ensure(elapsed < 30.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!(
        "nondecreasing {:.6} -> {:.6}, below H(Y_k+1|Y^k) - h(q) at every k, {elapsed:.3}s",
        rows[0].delta_w, rows[10].delta_w
    ))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    let instances = 120;
    for _ in 0..instances {
        let n = r.random_range(1..=4);
        let spec = random_spec(&mut r, n);
        let odds = random_odds(&mut r, spec.x_size());
        let d = delta_growth(&spec, &odds, n, Budget::default()).map_err(|e| e.to_string())?;
        let joint = spec.joint_pmf(n).map_err(|e| e.to_string())?;
        worst = worst.max((d - naive_directed_information(&joint) / n as f64).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, || format!("max |dW - I/n| = {worst:e}"))?;
    ensure(elapsed < 60.0, || format!("took {elapsed:.3}s"))?;
    Ok(format!("{instances} instances, max |dW - I/n| = {worst:.1e}, {elapsed:.3}s"))
}

fn criterion_4() -> Outcome {
    let mut r = rng(4);
    let mut worst = f64::NEG_INFINITY;
    let specs = 60;
    for _ in 0..specs {
        let n = r.random_range(1..=3);
        let spec = random_spec(&mut r, n);
        let odds = random_odds(&mut r, spec.x_size());
        let (xs, ys) = (spec.x_size(), spec.y_size());
        let best = optimal_full_strategy(&spec, n, Budget::default()).map_err(|e| e.to_string())?;
        let w_best = growth_exact(&best, &spec, &odds, n, Budget::default()).map_err(|e| e.to_string())?.w;
        for _ in 0..50 {
            let other = BettingStrategy::tabular_from_fn(xs, ys, n, |_, _, _| {
                Some(Allocation::full(random_pmf(&mut r, xs, false)).unwrap())
            })
            .map_err(|e| e.to_string())?;
            let w = growth_exact(&other, &spec, &odds, n, Budget::default()).map_err(|e| e.to_string())?.w;
            worst = worst.max(w - w_best);
        }
    }
    ensure(worst <= 1e-9, || format!("a random strategy beat b=p by {worst:e}"))?;
    Ok(format!("{specs} specs x 50 strategies, best excess over b=p = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let a = kelly_partial_bet(&[0.9, 0.1], &[1.2, 1.2]).map_err(|e| e.to_string())?;
    ensure((a.cash - 0.6).abs() < 1e-12 && (a.bets[0] - 0.4).abs() < 1e-12 && a.bets[1] == 0.0, || {
        format!("p=(0.9,0.1): {a:?}")
    })?;
    let b = kelly_partial_bet(&[0.5, 0.5], &[1.2, 1.2]).map_err(|e| e.to_string())?;
    ensure(b.cash == 1.0 && b.bets == vec![0.0, 0.0], || format!("p=(0.5,0.5): {b:?}"))?;
    let mut r = rng(5);
    let (mut worst_kkt, mut worst_gap): (f64, f64) = (0.0, 0.0);
    let instances = 120;
    for _ in 0..instances {
        let m = r.random_range(1..=4);
        let sparse = r.random_bool(0.2);
        let p = random_pmf(&mut r, m, sparse);
        let o: Vec<f64> = (0..m).map(|_| r.random_range(0.3..5.0)).collect();
        let alloc = kelly_partial_bet(&p, &o).map_err(|e| e.to_string())?;
        worst_kkt = worst_kkt.max(kkt_residual(&p, &o, &alloc));
        worst_gap = worst_gap.max((single_race_growth(&p, &o, &alloc) - kelly_grid_oracle(&p, &o)).abs());
    }
    ensure(worst_kkt <= 1e-9, || format!("KKT residual {worst_kkt:e}"))?;
    ensure(worst_gap <= 1e-3, || format!("grid gap {worst_gap:e} bits"))?;
    Ok(format!(
        "worked examples exact; {instances} instances, max KKT residual {worst_kkt:.1e}, max grid gap {worst_gap:.1e} bits"
    ))
}

fn criterion_6() -> Outcome {
    let spec = ProcessSpec::markov_bsc(0.2, 0.25).map_err(|e| e.to_string())?;
    let odds = OddsModel::uniform_fair(2);
    let s = optimal_full_strategy(&spec, 8, Budget::default()).map_err(|e| e.to_string())?;
    let exact = growth_exact(&s, &spec, &odds, 8, Budget::default()).map_err(|e| e.to_string())?.w;
    let mc = growth_monte_carlo(&s, &spec, &odds, 8, 100_000, 2009).map_err(|e| e.to_string())?;
    let se = mc.mc_stderr.unwrap_or(f64::NAN);
    let z = (mc.w - exact) / se;
    ensure(z.abs() <= 4.0, || format!("MC {} vs exact {exact}, z = {z:.2}", mc.w))?;
    Ok(format!("exact W = {exact:.6}, MC = {:.6} +- {se:.1e} (z = {z:.2})", mc.w))
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    let instances = 30;
    for _ in 0..instances {
        let n = r.random_range(1..=3);
        let spec = random_spec(&mut r, n);
        let odds = random_odds(&mut r, spec.x_size());
        let market = horse_race_embedding(&spec, &odds).map_err(|e| e.to_string())?;
        let ps = optimal_causal_portfolio(&market, n, true, Budget::default()).map_err(|e| e.to_string())?;
        let wp = causal_portfolio_growth(&ps, &market, n, Budget::default()).map_err(|e| e.to_string())?.w;
        let kelly = optimal_partial_strategy(&spec, &odds, n, Budget::default()).map_err(|e| e.to_string())?;
        let wk = growth_exact(&kelly, &spec, &odds, n, Budget::default()).map_err(|e| e.to_string())?.w;
        worst = worst.max((wp - wk).abs());
    }
    ensure(worst <= 1e-6, || format!("max growth difference {worst:e}"))?;
    Ok(format!("{instances} instances, max |W_portfolio - W_kelly| = {worst:.1e}"))
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut specs: Vec<(String, ProcessSpec, usize)> = vec![(
        "markov_bsc(0.2,0.25)".into(),
        ProcessSpec::markov_bsc(0.2, 0.25).map_err(|e| e.to_string())?,
        10,
    )];
    specs.push(("random markov 2x2".into(), random_markov_spec(&mut r, 2, 2, false), 10));
    specs.push(("random markov 3x2".into(), random_markov_spec(&mut r, 3, 2, false), 6));
    specs.push(("random iid 2x3".into(), random_iid_spec(&mut r, 2, 3, false), 6));
    specs.push(("random history 2x2".into(), random_history_spec(&mut r, 2, 2, 4, false), 4));
    let mut worst_savings_gap: f64 = 0.0;
    for (name, spec, n) in &specs {
        for m in 1..=*n {
            let joint = spec.joint_pmf(m).map_err(|e| e.to_string())?;
            let info = directed_information(&joint).map_err(|e| e.to_string())?;
            // brute-force references on small tables, library values on the large ones
            let small = joint.probs().len() <= 1 << 16;
            let h = if small { naive_causal_entropy(&joint, 0) } else { info.h_causal };
            let len = expected_length_from_joint(&shannon_lengths_from_joint(&joint, true), &joint)
                .map_err(|e| e.to_string())?;
            ensure(h <= len + 1e-9 && len < h + m as f64, || format!("{name} n={m}: H={h} E[len]={len}"))?;
            let report = rate_report(spec, m, Budget::default()).map_err(|e| e.to_string())?;
            let di = if small { naive_directed_information(&joint) } else { info.directed_info } / m as f64;
            worst_savings_gap = worst_savings_gap.max((report.savings - di).abs());
        }
    }
    ensure(worst_savings_gap < 1.0, || format!("savings off by {worst_savings_gap} bit/symbol"))?;
    // all-deterministic conditionals sit on the upper edge of the one-bit floor
    let perfect = ProcessSpec::markov_bsc(0.2, 0.0).map_err(|e| e.to_string())?;
    let joint = perfect.joint_pmf(10).map_err(|e| e.to_string())?;
    let len = expected_length_from_joint(&shannon_lengths_from_joint(&joint, true), &joint).map_err(|e| e.to_string())?;
    let h_perfect = directed_information(&joint).map_err(|e| e.to_string())?.h_causal;
    ensure(len <= h_perfect + 10.0 + 1e-9, || format!("q=0: E[len]={len}"))?;
    let dyadic = ProcessSpec::iid_from_rows(&[vec![0.25, 0.0], vec![0.25, 0.0], vec![0.0, 0.25], vec![0.0, 0.25]])
        .map_err(|e| e.to_string())?;
    // 8 joint symbols: n = 7 is the largest horizon within the default budget
    for m in 1..=7 {
        let rep = rate_report(&dyadic, m, Budget::default()).map_err(|e| e.to_string())?;
        ensure((rep.savings - rep.directed_info_per_symbol).abs() < 1e-12 && (rep.savings - 1.0).abs() < 1e-12, || {
            format!("dyadic n={m}: savings {} vs {}", rep.savings, rep.directed_info_per_symbol)
        })?;
    }
    Ok(format!(
        "{} specs up to n=10 strictly inside [H, H+n); q=0 boundary E[len] = H + n; max |savings - I/n| = {worst_savings_gap:.3}; dyadic savings = I/n = 1 exactly",
        specs.len()
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_causal-gamble"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim())
    })?;
    Ok(out.stdout)
}

fn criterion_9() -> Outcome {
    let commands: &[&[&str]] = &[
        &["dinfo", "--preset", "markov_bsc"],
        &["dinfo", "--preset", "iid-independent", "--k", "2"],
        &["growth", "--preset", "markov_bsc", "--trials", "20000"],
        &["growth", "--preset", "sub-fair", "--seed", "17"],
        &["fig2", "left"],
        &["fig2", "right"],
        &["compress", "--preset", "markov_bsc"],
        &["compress", "--preset", "dyadic"],
        &["portfolio", "--preset", "markov_bsc", "--n", "4"],
        &["portfolio", "--preset", "iid-independent"],
    ];
    for args in commands {
        let first = run_cli(args)?;
        let second = run_cli(args)?;
        ensure(!first.is_empty(), || format!("`{}` printed nothing", args.join(" ")))?;
        ensure(first == second, || format!("`{}` differs between runs", args.join(" ")))?;
    }
    Ok(format!("{} commands rerun, byte-identical output", commands.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("1 fig2 left closed form", criterion_1),
        ("2 fig2 right lookahead", criterion_2),
        ("3 growth gain = directed information", criterion_3),
        ("4 proportional betting optimal", criterion_4),
        ("5 kelly partial bets", criterion_5),
        ("6 monte carlo consistency", criterion_6),
        ("7 horse-race embedding", criterion_7),
        ("8 compression sandwich", criterion_8),
        ("9 cli determinism", criterion_9),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match check() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
