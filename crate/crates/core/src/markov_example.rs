//! Closed forms for the two-horse Markov race observed through a binary
//! symmetric channel.
//!
//! The winner repeats with probability `1 - p`, starts uniform, and the side
//! information equals the winner with probability `1 - q`. The increase in
//! growth rate is `h(p*q) - h(q)` without lookahead and
//! `H(Y_{k+1} | Y^k, X_0) - h(q)` with lookahead `k`.

use rayon::prelude::*;

use crate::causal_info::mutual_information;
use crate::error::{Error, Result};
use crate::joint::Budget;
use crate::process::ProcessSpec;
use crate::report::fmt_sig;

/// Default cap on the lookahead; enumeration cost grows as `2^k`.
pub const DEFAULT_MAX_LOOKAHEAD: usize = 20;

fn check(name: &'static str, x: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&x) {
        Ok(x)
    } else {
        Err(Error::ProbabilityOutOfRange { name, value: x })
    }
}

/// Validated parameters of the example.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExampleParams {
    pub p: f64,
    pub q: f64,
    pub k: usize,
}

impl ExampleParams {
    pub fn new(p: f64, q: f64, k: usize) -> Result<Self> {
        Ok(Self {
            p: check("p", p)?,
            q: check("q", q)?,
            k,
        })
    }
}

/// `h(x) = -x log2 x - (1-x) log2 (1-x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    check("x", x)?;
    Ok(h(x))
}

fn h(x: f64) -> f64 {
    let term = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    term(x) + term(1.0 - x)
}

/// `p * q = (1-p) q + (1-q) p`.
pub fn bernoulli_convolve(p: f64, q: f64) -> Result<f64> {
    check("p", p)?;
    check("q", q)?;
    Ok((1.0 - p) * q + (1.0 - q) * p)
}

/// `h(p*q) - h(q)` bits per race.
pub fn delta_w_closed_form(p: f64, q: f64) -> Result<f64> {
    Ok(h(bernoulli_convolve(p, q)?) - h(q))
}

/// Block entropies of the observation sequence.
///
/// `start` is the law of `X_0`; entry `j` of the result is `H(Y^j | X_0)`
/// when conditioning on the start state, else `H(Y^j)`.
fn block_entropies(p: f64, q: f64, depth: usize, condition_on_start: bool) -> Vec<f64> {
    let mut totals = vec![0.0; depth + 1];
    let starts: Vec<(f64, [f64; 2])> = if condition_on_start {
        vec![(0.5, [1.0, 0.0]), (0.5, [0.0, 1.0])]
    } else {
        vec![(1.0, [0.5, 0.5])]
    };
    for (weight, alpha) in starts {
        let mut acc = vec![0.0; depth + 1];
        walk(p, q, alpha, 0, depth, &mut acc);
        for (t, a) in totals.iter_mut().zip(&acc) {
            *t += weight * a;
        }
    }
    totals
}

// Forward recursion over observation prefixes; `alpha[x] = P(y^j, X_j = x)`.
fn walk(p: f64, q: f64, alpha: [f64; 2], j: usize, depth: usize, acc: &mut [f64]) {
    if j == depth {
        return;
    }
    let predicted = [
        alpha[0] * (1.0 - p) + alpha[1] * p,
        alpha[0] * p + alpha[1] * (1.0 - p),
    ];
    for y in 0..2 {
        let emit = |x: usize| if x == y { 1.0 - q } else { q };
        let next = [predicted[0] * emit(0), predicted[1] * emit(1)];
        let prob = next[0] + next[1];
        if prob <= 0.0 {
            continue;
        }
        acc[j + 1] -= prob * prob.log2();
        walk(p, q, next, j + 1, depth, acc);
    }
}

/// Conditional observation entropies bracketing the entropy rate of `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct EntropyBracket {
    /// `H(Y_{k+1} | Y^k, X_0)`, nondecreasing in `k`.
    pub lower: Vec<f64>,
    /// `H(Y_{k+1} | Y^k)`, nonincreasing in `k`.
    pub upper: Vec<f64>,
    /// `H(Y^n) / n` for `n = 1..=k_max + 1`.
    pub block_rate: Vec<f64>,
}

/// Bracketing sequences for `k = 0..=k_max`.
pub fn entropy_bracket(p: f64, q: f64, k_max: usize) -> Result<EntropyBracket> {
    check("p", p)?;
    check("q", q)?;
    let depth = k_max + 1;
    let with_start = block_entropies(p, q, depth, true);
    let plain = block_entropies(p, q, depth, false);
    Ok(EntropyBracket {
        lower: (0..depth).map(|k| with_start[k + 1] - with_start[k]).collect(),
        upper: (0..depth).map(|k| plain[k + 1] - plain[k]).collect(),
        block_rate: (1..=depth).map(|n| plain[n] / n as f64).collect(),
    })
}

/// Growth-rate increase with lookahead `k`: `H(Y_{k+1} | Y^k, X_0) - h(q)`.
pub fn delta_w_lookahead(p: f64, q: f64, k: usize) -> Result<f64> {
    delta_w_lookahead_with_max(p, q, k, DEFAULT_MAX_LOOKAHEAD)
}

pub fn delta_w_lookahead_with_max(p: f64, q: f64, k: usize, max: usize) -> Result<f64> {
    if k > max {
        return Err(Error::LookaheadBudget { requested: k, max });
    }
    let params = ExampleParams::new(p, q, k)?;
    let with_start = block_entropies(params.p, params.q, k + 1, true);
    Ok(with_start[k + 1] - with_start[k] - h(q))
}

/// `I(X^n; Y^n) / n` for the example, by exact enumeration.
pub fn delta_w_full_side_info(p: f64, q: f64, n: usize, budget: Budget) -> Result<f64> {
    let spec = ProcessSpec::markov_bsc(p, q)?;
    let joint = spec.joint_pmf_with_budget(n, budget)?;
    Ok(mutual_information(&joint) / n as f64)
}

/// Swept side-information parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    /// Crossover probability, no lookahead.
    Q,
    /// Lookahead at fixed crossover.
    K,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Q => "q",
            SweepParam::K => "k",
        }
    }
}

/// One sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub delta_w: f64,
}

impl SweepRow {
    pub const CSV_HEADER: [&'static str; 3] = ["param", "value", "delta_w"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![self.param.name().into(), fmt_sig(self.value), fmt_sig(self.delta_w)]
    }
}

/// Sweeps `q` (with `k = 0`) or `k` (with `q` fixed) at flip probability `p`.
///
/// For a `k` sweep the grid values must be nonnegative integers.
pub fn sweep(param: SweepParam, grid: &[f64], p: f64, fixed_q: f64) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&value| {
            let delta_w = match param {
                SweepParam::Q => delta_w_closed_form(p, value)?,
                SweepParam::K => {
                    if value < 0.0 || value.fract() != 0.0 {
                        return Err(Error::Config(format!("lookahead {value} is not a nonnegative integer")));
                    }
                    delta_w_lookahead(p, fixed_q, value as usize)?
                }
            };
            Ok(SweepRow { param, value, delta_w })
        })
        .collect()
}

/// `q = 0, 0.01, .., 0.5` at `p = 0.2`, no lookahead.
pub fn fig2_left() -> Result<Vec<SweepRow>> {
    let grid: Vec<f64> = (0..=50).map(|i| i as f64 / 100.0).collect();
    sweep(SweepParam::Q, &grid, 0.2, 0.0)
}

/// `k = 0..=10` at `p = 0.2`, `q = 0.25`.
pub fn fig2_right() -> Result<Vec<SweepRow>> {
    let grid: Vec<f64> = (0..=10).map(f64::from).collect();
    sweep(SweepParam::K, &grid, 0.2, 0.25)
}
