//! Horse-race betting with causal side information.
//!
//! At race `i` the gambler has seen the winners `x^{i-1}` and the side
//! information `y^i`, keeps a fraction `b0` in cash and bets `b(x_i)` on each
//! horse. Wealth is multiplied by `b0 + b(x_i) o(x_i | x^{i-1})`.

mod growth;
mod kelly;
mod odds;
mod strategy;

pub use growth::{
    growth_exact, growth_from_joint, growth_monte_carlo, wealth_trajectory, GrowthReport, WealthTrajectory,
};
pub use kelly::{kelly_partial_bet, kkt_residual, single_race_growth};
pub use odds::{Fairness, OddsModel, FAIRNESS_TOL};
pub use strategy::{Allocation, BettingStrategy, SIMPLEX_TOL};

pub(crate) use strategy::History;

use crate::causal_info::{directed_information, INFO_TOL};
use crate::error::{Error, Result};
use crate::joint::{Budget, JointTable};
use crate::process::{MemoryOrder, ProcessSpec};

/// `p(x | y)` from a pair row laid out `x * |Y| + y`; `None` if `y` is impossible.
fn posterior(row: &[f64], xs: usize, ys: usize, y: usize) -> Option<Vec<f64>> {
    let col: Vec<f64> = (0..xs).map(|x| row[x * ys + y]).collect();
    let total: f64 = col.iter().sum();
    (total > 0.0).then(|| col.into_iter().map(|v| v / total).collect())
}

/// Applies `rule` to the conditional pmf of every memory-one history.
fn markov_strategy<F>(spec: &ProcessSpec, mut rule: F) -> Result<BettingStrategy>
where
    F: FnMut(&[f64], Option<usize>) -> Result<Allocation>,
{
    let (xs, ys) = (spec.x_size(), spec.y_size());
    let mut decide = |row: &[f64], y: usize, last_x: Option<usize>| -> Result<Option<Allocation>> {
        Ok(Some(match posterior(row, xs, ys, y) {
            Some(p) => rule(&p, last_x)?,
            None => Allocation::uniform(xs),
        }))
    };
    let initial = spec.pair_kernel(None).expect("memory order <= 1");
    let first = (0..ys)
        .map(|y| decide(initial, y, None))
        .collect::<Result<Vec<_>>>()?;
    let mut later = Vec::with_capacity(xs * ys * ys);
    for xp in 0..xs {
        for yp in 0..ys {
            let row = spec.pair_kernel(Some((xp, yp))).expect("memory order <= 1");
            for y in 0..ys {
                later.push(decide(row, y, Some(xp))?);
            }
        }
    }
    BettingStrategy::markov(xs, ys, first, later)
}

/// Applies `rule` to `p(x_i | x^{i-1}, y^i)` at every history of the table.
fn tabular_strategy<F>(joint: &JointTable, mut rule: F) -> Result<BettingStrategy>
where
    F: FnMut(usize, &[usize], &[f64]) -> Result<Allocation>,
{
    let (xs, ys, n) = (joint.x_size(), joint.y_size(), joint.n_x());
    let marginals: Vec<_> = (1..=n).map(|i| joint.marginal(i, i)).collect();
    let mut failure = None;
    let strategy = BettingStrategy::tabular_from_fn(xs, ys, n, |step, xh, yh| {
        let m = &marginals[step - 1];
        let mut col: Vec<f64> = (0..xs)
            .map(|x| {
                let mut full = xh.to_vec();
                full.push(x);
                m.prob(&full, yh)
            })
            .collect();
        let total: f64 = col.iter().sum();
        if total <= 0.0 {
            return Some(Allocation::uniform(xs));
        }
        col.iter_mut().for_each(|v| *v /= total);
        match rule(step, xh, &col) {
            Ok(a) => Some(a),
            Err(e) => {
                failure.get_or_insert(e);
                None
            }
        }
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(strategy),
    }
}

/// Growth-optimal full-investment strategy `b(x_i | x^{i-1}, y^i) = p(x_i | x^{i-1}, y^i)`.
///
/// Memory-one specs give a memory-one strategy valid for every horizon;
/// history specs are enumerated up to `n`. Impossible histories bet uniformly.
pub fn optimal_full_strategy(spec: &ProcessSpec, n: usize, budget: Budget) -> Result<BettingStrategy> {
    match spec.memory_order() {
        MemoryOrder::Iid | MemoryOrder::Markov => markov_strategy(spec, |p, _| Ok(Allocation { cash: 0.0, bets: p.to_vec() })),
        MemoryOrder::History(_) => {
            let joint = spec.joint_pmf_with_budget(n, budget)?;
            tabular_strategy(&joint, |_, _, p| Ok(Allocation { cash: 0.0, bets: p.to_vec() }))
        }
    }
}

/// Growth-optimal full-investment strategy without side information, `b = p(x_i | x^{i-1})`.
pub fn optimal_blind_strategy(spec: &ProcessSpec, n: usize, budget: Budget) -> Result<BettingStrategy> {
    let joint = spec.joint_pmf_with_budget(n, budget)?;
    let xs = joint.x_size();
    let marginals: Vec<_> = (1..=n).map(|i| joint.marginal(i, 0)).collect();
    BettingStrategy::blind_from_fn(xs, joint.y_size(), n, |step, xh| {
        let m = &marginals[step - 1];
        let col: Vec<f64> = (0..xs)
            .map(|x| {
                let mut full = xh.to_vec();
                full.push(x);
                m.prob(&full, &[])
            })
            .collect();
        let total: f64 = col.iter().sum();
        Some(if total > 0.0 {
            Allocation {
                cash: 0.0,
                bets: col.into_iter().map(|v| v / total).collect(),
            }
        } else {
            Allocation::uniform(xs)
        })
    })
}

/// Growth-optimal strategy with a cash option: the single-race program is
/// solved independently at every history with that history's posterior.
pub fn optimal_partial_strategy(
    spec: &ProcessSpec,
    odds: &OddsModel,
    n: usize,
    budget: Budget,
) -> Result<BettingStrategy> {
    if odds.horses() != spec.x_size() {
        return Err(Error::Dimension(format!(
            "{} horses in the process, {} in the odds",
            spec.x_size(),
            odds.horses()
        )));
    }
    odds.check_horizon(n)?;
    let memory_one = matches!(spec.memory_order(), MemoryOrder::Iid | MemoryOrder::Markov);
    if memory_one && !matches!(odds, OddsModel::History(_)) {
        markov_strategy(spec, |p, last| {
            let past: Vec<usize> = last.into_iter().collect();
            let row = odds.row(past.len() + 1, &past).expect("memory-one odds");
            kelly_partial_bet(p, row)
        })
    } else {
        let joint = spec.joint_pmf_with_budget(n, budget)?;
        tabular_strategy(&joint, |step, xh, p| {
            let row = odds
                .row(step, xh)
                .ok_or_else(|| Error::HorizonMismatch(format!("no odds for race {step}")))?;
            kelly_partial_bet(p, row)
        })
    }
}

/// Increase in growth rate from causal side information, in bits per race.
///
/// Computed as the difference of the optimal growths with and without side
/// information, and cross-checked against `I(Y^n -> X^n) / n`.
pub fn delta_growth(spec: &ProcessSpec, odds: &OddsModel, n: usize, budget: Budget) -> Result<f64> {
    let joint = spec.joint_pmf_with_budget(n, budget)?;
    let informed = optimal_full_strategy(spec, n, budget)?;
    let blind = optimal_blind_strategy(spec, n, budget)?;
    let with_side = growth_from_joint(&informed, &joint, odds)?.w;
    let without = growth_from_joint(&blind, &joint, odds)?.w;
    let by_growth = (with_side - without) / n as f64;
    let by_information = directed_information(&joint)?.directed_info / n as f64;
    if (by_growth - by_information).abs() > INFO_TOL {
        return Err(Error::Inconsistent {
            what: "growth increase vs directed information",
            first: by_growth,
            second: by_information,
        });
    }
    Ok(by_growth)
}
