//! Single-race growth-optimal betting with a cash option.
//!
//! Solves
//!
//! ```text
//! maximize   sum_x p(x) log(b0 + b(x) o(x))
//! subject to b0 + sum_x b(x) = 1,  b0 >= 0,  b(x) >= 0
//! ```
//!
//! With super-fair or fair odds the answer is proportional betting `b = p`.
//! With sub-fair odds horses are admitted greedily in order of decreasing
//! expected return `p(x) o(x)` while the return beats the current cash level
//! `(1 - sum_A p) / (1 - sum_A 1/o)`; the final level is the cash fraction and
//! `b(x) = p(x) - b0 / o(x)` on the admitted set.

use crate::error::{Error, Result};
use crate::gambling::odds::{Fairness, FAIRNESS_TOL};
use crate::gambling::strategy::Allocation;
use crate::process::KERNEL_TOL;

fn validate(p: &[f64], odds: &[f64]) -> Result<()> {
    if p.is_empty() || p.len() != odds.len() {
        return Err(Error::Dimension(format!(
            "{} probabilities for {} odds",
            p.len(),
            odds.len()
        )));
    }
    if let Some(&bad) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidEntry {
            what: "win probability".into(),
            value: bad,
        });
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > KERNEL_TOL {
        return Err(Error::NotNormalized {
            what: "win probabilities".into(),
            sum,
        });
    }
    if let Some(&bad) = odds.iter().find(|o| !o.is_finite() || **o <= 0.0) {
        return Err(Error::InvalidEntry {
            what: "odds".into(),
            value: bad,
        });
    }
    Ok(())
}

/// Growth-optimal `(b0, b)` for one race with win probabilities `p`.
pub fn kelly_partial_bet(p: &[f64], odds: &[f64]) -> Result<Allocation> {
    validate(p, odds)?;
    if Fairness::of(odds) != Fairness::SubFair {
        return Ok(Allocation {
            cash: 0.0,
            bets: p.to_vec(),
        });
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    // stable sort keeps ascending horse index among ties
    order.sort_by(|&a, &b| (p[b] * odds[b]).total_cmp(&(p[a] * odds[a])));

    let mut mass = 0.0;
    let mut inverse = 0.0;
    let mut level = 1.0;
    let mut active = Vec::new();
    for &x in &order {
        let next_inverse = inverse + 1.0 / odds[x];
        if p[x] * odds[x] <= level || next_inverse >= 1.0 - FAIRNESS_TOL {
            break;
        }
        mass += p[x];
        inverse = next_inverse;
        level = ((1.0 - mass) / (1.0 - inverse)).max(0.0);
        active.push(x);
    }
    let mut bets = vec![0.0; p.len()];
    for &x in &active {
        bets[x] = (p[x] - level / odds[x]).max(0.0);
    }
    Ok(Allocation { cash: level, bets })
}

/// Expected `log2` wealth multiplier of one race.
pub fn single_race_growth(p: &[f64], odds: &[f64], allocation: &Allocation) -> f64 {
    p.iter()
        .enumerate()
        .filter(|(_, &px)| px > 0.0)
        .map(|(x, &px)| px * allocation.factor(x, odds).log2())
        .sum()
}

/// Largest violation of the optimality conditions of the single-race program.
///
/// With multiplier 1 the conditions read `p(x) o(x) / (b0 + b(x) o(x)) <= 1`,
/// tight where `b(x) > 0`, and `sum_x p(x) / (b0 + b(x) o(x)) <= 1`, tight
/// where `b0 > 0`.
pub fn kkt_residual(p: &[f64], odds: &[f64], allocation: &Allocation) -> f64 {
    let mut worst: f64 = 0.0;
    let mut cash_gradient = 0.0;
    for (x, &px) in p.iter().enumerate() {
        if px <= 0.0 {
            continue;
        }
        let factor = allocation.factor(x, odds);
        if factor <= 0.0 {
            return f64::INFINITY;
        }
        let g = px * odds[x] / factor;
        cash_gradient += px / factor;
        worst = worst.max(if allocation.bets[x] > 0.0 {
            (g - 1.0).abs()
        } else {
            g - 1.0
        });
    }
    let cash_violation = if allocation.cash > 0.0 {
        (cash_gradient - 1.0).abs()
    } else {
        cash_gradient - 1.0
    };
    worst.max(cash_violation).max(0.0)
}
