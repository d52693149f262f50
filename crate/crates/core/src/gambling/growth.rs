use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::causal_info::causal_entropy;
use crate::error::{Error, Result};
use crate::gambling::odds::OddsModel;
use crate::gambling::strategy::{BettingStrategy, History};
use crate::joint::{Budget, JointTable};
use crate::process::{ProcessSpec, SamplePath, Sampler};
use crate::report::fmt_sig;

/// Exact and/or simulated growth of one strategy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub n: usize,
    /// `W = E[log2 S]`; the Monte Carlo mean when only simulated.
    pub w: f64,
    pub growth_rate: f64,
    /// `E[log2 o(X^n)]`, full-investment strategies only.
    pub e_log_odds: Option<f64>,
    /// `H(X^n || Y^n)`, full-investment strategies only.
    pub h_causal: Option<f64>,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub trials: Option<usize>,
}

impl GrowthReport {
    pub const CSV_HEADER: [&'static str; 8] = [
        "n",
        "W",
        "growth_rate",
        "E_log_odds",
        "H_causal",
        "mc_estimate",
        "mc_stderr",
        "trials",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(fmt_sig).unwrap_or_default();
        vec![
            self.n.to_string(),
            fmt_sig(self.w),
            fmt_sig(self.growth_rate),
            opt(self.e_log_odds),
            opt(self.h_causal),
            opt(self.mc_estimate),
            opt(self.mc_stderr),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
        ]
    }
}

/// Per-race wealth factors along one realized path.
#[derive(Clone, Debug, PartialEq)]
pub struct WealthTrajectory {
    pub factors: Vec<f64>,
    /// `log2 S_i` after each race, starting from `S_0 = 1`.
    pub log_wealth: Vec<f64>,
}

impl WealthTrajectory {
    pub fn final_log_wealth(&self) -> f64 {
        self.log_wealth.last().copied().unwrap_or(0.0)
    }
}

fn check_shapes(strategy: &BettingStrategy, odds: &OddsModel, x_size: usize, y_size: usize, n: usize) -> Result<()> {
    if strategy.horses() != x_size || odds.horses() != x_size {
        return Err(Error::Dimension(format!(
            "{} horses in the process, {} in the strategy, {} in the odds",
            x_size,
            strategy.horses(),
            odds.horses()
        )));
    }
    if strategy.side_size() != y_size {
        return Err(Error::Dimension(format!(
            "side alphabet {} in the process, {} in the strategy",
            y_size,
            strategy.side_size()
        )));
    }
    if let Some(h) = strategy.horizon() {
        if h < n {
            return Err(Error::UndefinedStrategy { step: h + 1 });
        }
    }
    odds.check_horizon(n)
}

/// Wealth recursion `S_i = S_{i-1} (b0 + b(x_i) o(x_i))` along `path`.
pub fn wealth_trajectory(strategy: &BettingStrategy, odds: &OddsModel, path: &SamplePath) -> Result<WealthTrajectory> {
    let n = path.x.len();
    if path.y.len() < n {
        return Err(Error::HorizonMismatch("side information shorter than the race".into()));
    }
    let (m, ys) = (strategy.horses(), strategy.side_size());
    let mut factors = Vec::with_capacity(n);
    let mut log_wealth = Vec::with_capacity(n);
    let mut acc = 0.0;
    for step in 1..=n {
        let h = History::from_symbols(step, &path.x[..step - 1], &path.y[..step], m, ys);
        let allocation = strategy.lookup(&h).ok_or(Error::UndefinedStrategy { step })?;
        let row = odds
            .row_for(&h)
            .ok_or_else(|| Error::HorizonMismatch(format!("no odds for race {step}")))?;
        let f = allocation.factor(path.x[step - 1], row);
        acc += f.log2();
        factors.push(f);
        log_wealth.push(acc);
    }
    Ok(WealthTrajectory { factors, log_wealth })
}

/// `E[log2 o(X_i | X^{i-1})]` summed over races.
pub(crate) fn expected_log_odds(joint: &JointTable, odds: &OddsModel) -> f64 {
    let xs = joint.x_size();
    let mut total = 0.0;
    for step in 1..=joint.n_x() {
        let px = joint.marginal(step, 0);
        for (xnum, &p) in px.probs().iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let h = History {
                step,
                x_past: xnum / xs,
                y_now: 0,
                x_size: xs,
                y_size: 1,
            };
            let row = odds.row_for(&h).expect("odds horizon checked");
            total += p * row[xnum % xs].log2();
        }
    }
    total
}

/// Exact growth over an enumerated joint table.
pub fn growth_from_joint(strategy: &BettingStrategy, joint: &JointTable, odds: &OddsModel) -> Result<GrowthReport> {
    let n = joint.n_x();
    let (xs, ys) = (joint.x_size(), joint.y_size());
    check_shapes(strategy, odds, xs, ys, n)?;
    let mut w = 0.0;
    // chain rule: W = sum_i E[log2(b0 + b(X_i) o(X_i))]
    for step in 1..=n {
        let m = joint.marginal(step, step);
        let yc = ys.pow(step as u32);
        for (idx, &p) in m.probs().iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let xnum = idx / yc;
            let h = History {
                step,
                x_past: xnum / xs,
                y_now: idx % yc,
                x_size: xs,
                y_size: ys,
            };
            let allocation = strategy.lookup(&h).ok_or(Error::UndefinedStrategy { step })?;
            let row = odds.row_for(&h).expect("odds horizon checked");
            w += p * allocation.factor(xnum % xs, row).log2();
        }
    }
    let (e_log_odds, h_causal) = if strategy.is_full_investment() {
        (Some(expected_log_odds(joint, odds)), Some(causal_entropy(joint)))
    } else {
        (None, None)
    };
    Ok(GrowthReport {
        n,
        w,
        growth_rate: w / n as f64,
        e_log_odds,
        h_causal,
        mc_estimate: None,
        mc_stderr: None,
        trials: None,
    })
}

/// Exact growth `W = sum p(x^n, y^n) log2 S(x^n || y^n)`.
pub fn growth_exact(
    strategy: &BettingStrategy,
    spec: &ProcessSpec,
    odds: &OddsModel,
    n: usize,
    budget: Budget,
) -> Result<GrowthReport> {
    check_shapes(strategy, odds, spec.x_size(), spec.y_size(), n)?;
    let joint = spec.joint_pmf_with_budget(n, budget)?;
    growth_from_joint(strategy, &joint, odds)
}

/// Seeds trial `t` independently of execution order.
pub(crate) fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Monte Carlo growth: mean and standard error of `log2 S` over `trials` paths.
pub fn growth_monte_carlo(
    strategy: &BettingStrategy,
    spec: &ProcessSpec,
    odds: &OddsModel,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<GrowthReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be >= 1".into()));
    }
    check_shapes(strategy, odds, spec.x_size(), spec.y_size(), n)?;
    let sampler = Sampler::new(spec)?;
    let samples: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let (x, y) = sampler.draw(n, 0, &mut rng)?;
            let path = SamplePath { x, y, seed };
            Ok(wealth_trajectory(strategy, odds, &path)?.final_log_wealth())
        })
        .collect::<Result<_>>()?;
    let (mean, stderr) = mean_and_stderr(&samples);
    Ok(GrowthReport {
        n,
        w: mean,
        growth_rate: mean / n as f64,
        e_log_odds: None,
        h_causal: None,
        mc_estimate: Some(mean),
        mc_stderr: Some(stderr),
        trials: Some(trials),
    })
}

pub(crate) fn mean_and_stderr(samples: &[f64]) -> (f64, f64) {
    let k = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / k;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}
