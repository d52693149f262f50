//! Log-optimal causal portfolios over finite-support markets.
//!
//! A [`MarketSpec`] pairs an outcome process (outcome index `X_i` with side
//! information `Y_i`) with the price-relative vector each outcome produces.
//! A horse race with odds `o` embeds as `m + 1` stocks: stock `k` pays `o(k)`
//! when horse `k` wins and nothing otherwise, the last stock is cash.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gambling::{GrowthReport, History, OddsModel};
use crate::joint::{decode, Budget, JointTable};
use crate::process::{ProcessSpec, KERNEL_TOL};

/// First-order tolerance at which the optimizer stops.
pub const TARGET_RESIDUAL: f64 = 1e-10;
/// Largest KKT residual accepted on a returned portfolio.
pub const KKT_TOL: f64 = 1e-8;
/// Iteration cap of the multiplicative ascent.
pub const MAX_ITERATIONS: usize = 100_000;

const POLISH_EVERY: usize = 25;
const CHAIN_RULE_TOL: f64 = 1e-9;

/// Nonnegative weights over stocks summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Portfolio {
    pub weights: Vec<f64>,
}

impl Portfolio {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(&bad) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::InvalidEntry {
                what: "portfolio weight".into(),
                value: bad,
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > KERNEL_TOL {
            return Err(Error::NotNormalized {
                what: "portfolio".into(),
                sum,
            });
        }
        Ok(Self { weights })
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            weights: vec![1.0 / m as f64; m],
        }
    }

    /// Wealth multiplier `b . x`.
    pub fn ret(&self, relatives: &[f64]) -> f64 {
        self.weights.iter().zip(relatives).map(|(b, x)| b * x).sum()
    }
}

/// Finite distribution over price-relative vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    probs: Vec<f64>,
    vectors: Vec<Vec<f64>>,
}

impl FiniteDistribution {
    pub fn new(probs: Vec<f64>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if probs.len() != vectors.len() || vectors.is_empty() {
            return Err(Error::Dimension(format!(
                "{} probabilities for {} price-relative vectors",
                probs.len(),
                vectors.len()
            )));
        }
        crate::process::check_row("market distribution", &probs, probs.len())?;
        let m = vectors[0].len();
        if m == 0 || vectors.iter().any(|v| v.len() != m) {
            return Err(Error::Dimension("price-relative vectors must share a positive length".into()));
        }
        if let Some(&bad) = vectors.iter().flatten().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidEntry {
                what: "price relative".into(),
                value: bad,
            });
        }
        let (probs, vectors) = probs
            .into_iter()
            .zip(vectors)
            .filter(|(p, _)| *p > 0.0)
            .unzip();
        Ok(Self { probs, vectors })
    }

    pub fn stocks(&self) -> usize {
        self.vectors[0].len()
    }

    /// `E[log2(b . X)]`.
    pub fn growth(&self, portfolio: &Portfolio) -> f64 {
        self.probs
            .iter()
            .zip(&self.vectors)
            .map(|(p, v)| p * portfolio.ret(v).log2())
            .sum()
    }

    /// `E[X_k / (b . X)]` for every stock.
    fn gradient(&self, b: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; b.len()];
        for (p, v) in self.probs.iter().zip(&self.vectors) {
            let r: f64 = b.iter().zip(v).map(|(w, x)| w * x).sum();
            for (gk, xk) in g.iter_mut().zip(v) {
                *gk += p * xk / r;
            }
        }
        g
    }

    fn log_growth(&self, b: &[f64]) -> f64 {
        self.probs
            .iter()
            .zip(&self.vectors)
            .map(|(p, v)| {
                let r: f64 = b.iter().zip(v).map(|(w, x)| w * x).sum();
                p * r.ln()
            })
            .sum()
    }
}

/// Largest violation of `E[X_k/(b.X)] <= 1`, tight on the support of `b`.
pub fn kkt_residual(dist: &FiniteDistribution, portfolio: &Portfolio) -> f64 {
    residual(&portfolio.weights, &dist.gradient(&portfolio.weights))
}

fn residual(b: &[f64], g: &[f64]) -> f64 {
    b.iter()
        .zip(g)
        .map(|(&w, &gk)| {
            if !gk.is_finite() {
                f64::INFINITY
            } else if w > 0.0 {
                (gk - 1.0).abs()
            } else {
                (gk - 1.0).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Result of [`log_optimal_portfolio`].
#[derive(Clone, Debug, PartialEq)]
pub struct LogOptimal {
    pub portfolio: Portfolio,
    /// `E[log2(b . X)]`
    pub growth: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Maximizes `E[log(b . X)]` over the simplex.
///
/// Multiplicative ascent `b_k <- b_k E[X_k / (b . X)]` from the uniform
/// portfolio, with periodic Newton polishing on the current support.
/// Directions along which the objective is flat are left where the uniform
/// start puts them.
pub fn log_optimal_portfolio(dist: &FiniteDistribution) -> Result<LogOptimal> {
    if dist.vectors.iter().any(|v| v.iter().all(|&x| x == 0.0)) {
        return Err(Error::InfeasibleMarket(
            "an outcome with positive probability has all price relatives zero".into(),
        ));
    }
    let m = dist.stocks();
    let mut b = vec![1.0 / m as f64; m];
    let mut best = (f64::INFINITY, b.clone());
    for it in 0..MAX_ITERATIONS {
        let g = dist.gradient(&b);
        let res = residual(&b, &g);
        if res < best.0 {
            best = (res, b.clone());
        }
        if res <= TARGET_RESIDUAL {
            return Ok(finish(dist, b, res, it));
        }
        if it % POLISH_EVERY == 0 {
            if let Some(polished) = polish(dist, &b, &g) {
                let pg = dist.gradient(&polished);
                let pres = residual(&polished, &pg);
                if pres <= TARGET_RESIDUAL {
                    return Ok(finish(dist, polished, pres, it));
                }
                if pres < best.0 {
                    best = (pres, polished);
                }
            }
        }
        for (w, gk) in b.iter_mut().zip(&g) {
            *w *= gk;
        }
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|w| *w /= s);
    }
    let (res, b) = best;
    if res <= KKT_TOL {
        Ok(finish(dist, b, res, MAX_ITERATIONS))
    } else {
        Err(Error::NoConvergence {
            iterations: MAX_ITERATIONS,
            residual: res,
        })
    }
}

fn finish(dist: &FiniteDistribution, b: Vec<f64>, residual: f64, iterations: usize) -> LogOptimal {
    let portfolio = Portfolio { weights: b };
    LogOptimal {
        growth: dist.growth(&portfolio),
        portfolio,
        residual,
        iterations,
    }
}

/// Newton's method restricted to the face spanned by the likely support.
fn polish(dist: &FiniteDistribution, b: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let m = b.len();
    let mut support: Vec<usize> = (0..m).filter(|&k| g[k] > 1.0 - 1e-3 && b[k] > 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let mut x = vec![0.0; m];
    let mass: f64 = support.iter().map(|&k| b[k]).sum();
    for &k in &support {
        x[k] = b[k] / mass;
    }
    if !dist.log_growth(&x).is_finite() {
        return None;
    }
    for _ in 0..200 {
        if support.len() == 1 {
            break;
        }
        let gx = dist.gradient(&x);
        let r = *support.last().expect("nonempty support");
        let free = &support[..support.len() - 1];
        let d = free.len();
        let grad = DVector::from_iterator(d, free.iter().map(|&j| gx[j] - gx[r]));
        if grad.amax() < 1e-15 {
            break;
        }
        // negated Hessian in reduced coordinates: E[(X_j - X_r)(X_l - X_r) / (b.X)^2]
        let mut neg_h = DMatrix::<f64>::zeros(d, d);
        for (p, v) in dist.probs.iter().zip(&dist.vectors) {
            let ret: f64 = x.iter().zip(v).map(|(w, xv)| w * xv).sum();
            let scale = p / (ret * ret);
            for (a, &j) in free.iter().enumerate() {
                let dj = v[j] - v[r];
                if dj == 0.0 {
                    continue;
                }
                for (c, &l) in free.iter().enumerate() {
                    neg_h[(a, c)] += scale * dj * (v[l] - v[r]);
                }
            }
        }
        let step = neg_h.svd(true, true).solve(&grad, 1e-14).ok()?;
        let mut dir = vec![0.0; m];
        let mut total = 0.0;
        for (a, &j) in free.iter().enumerate() {
            dir[j] = step[a];
            total += step[a];
        }
        dir[r] = -total;
        // longest feasible step along dir
        let mut t_max: f64 = 1.0;
        let mut blocking = None;
        for &k in &support {
            if dir[k] < 0.0 {
                let t = x[k] / -dir[k];
                if t < t_max {
                    t_max = t;
                    blocking = Some(k);
                }
            }
        }
        let f0 = dist.log_growth(&x);
        let mut t = t_max;
        let mut accepted = None;
        for _ in 0..60 {
            let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| (xi + t * di).max(0.0)).collect();
            let f = dist.log_growth(&cand);
            if f.is_finite() && f >= f0 - 1e-15 {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let cand = accepted?;
        let moved = cand.iter().zip(&x).map(|(a, c)| (a - c).abs()).fold(0.0, f64::max);
        x = cand;
        if t == t_max && t_max < 1.0 {
            if let Some(k) = blocking {
                x[k] = 0.0;
                support.retain(|&s| s != k);
            }
        }
        let s: f64 = x.iter().sum();
        x.iter_mut().for_each(|w| *w /= s);
        if moved < 1e-16 {
            break;
        }
    }
    Some(x)
}

#[derive(Clone, Debug, PartialEq)]
enum Relatives {
    /// One vector per outcome.
    Static(Vec<Vec<f64>>),
    /// Horse-race embedding: payoff `o(k)` on stock `k`, cash last.
    Embedded(OddsModel),
}

/// Finite-support stock market driven by an outcome process.
#[derive(Clone, Debug, PartialEq)]
pub struct MarketSpec {
    stocks: usize,
    outcomes: ProcessSpec,
    relatives: Relatives,
}

impl MarketSpec {
    /// Market where outcome `j` of `outcomes` yields `vectors[j]`.
    pub fn new(outcomes: ProcessSpec, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.len() != outcomes.x_size() {
            return Err(Error::Dimension(format!(
                "{} price-relative vectors for {} outcomes",
                vectors.len(),
                outcomes.x_size()
            )));
        }
        let stocks = vectors[0].len();
        if stocks == 0 || vectors.iter().any(|v| v.len() != stocks) {
            return Err(Error::Dimension("price-relative vectors must share a positive length".into()));
        }
        if let Some(&bad) = vectors.iter().flatten().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidEntry {
                what: "price relative".into(),
                value: bad,
            });
        }
        Ok(Self {
            stocks,
            outcomes,
            relatives: Relatives::Static(vectors),
        })
    }

    pub fn stocks(&self) -> usize {
        self.stocks
    }

    pub fn outcomes(&self) -> &ProcessSpec {
        &self.outcomes
    }

    pub fn is_horse_race(&self) -> bool {
        matches!(self.relatives, Relatives::Embedded(_))
    }

    /// Price relatives of `outcome` at race `step` after outcomes `x_past`.
    pub fn relative(&self, step: usize, x_past: &[usize], outcome: usize) -> Vec<f64> {
        let h = History::from_symbols(step, x_past, &vec![0; step], self.outcomes.x_size(), 1);
        self.relative_at(&h, outcome)
    }

    fn relative_at(&self, h: &History, outcome: usize) -> Vec<f64> {
        match &self.relatives {
            Relatives::Static(v) => v[outcome].clone(),
            Relatives::Embedded(odds) => {
                let row = odds.row_for(h).expect("odds horizon checked");
                let mut v = vec![0.0; self.stocks];
                v[outcome] = row[outcome];
                v[self.stocks - 1] = 1.0;
                v
            }
        }
    }

    fn check_horizon(&self, n: usize) -> Result<()> {
        match &self.relatives {
            Relatives::Embedded(odds) => match odds.horizon() {
                Some(h) if h < n => Err(Error::HorizonMismatch(format!("odds cover {h} races, {n} requested"))),
                _ => Ok(()),
            },
            Relatives::Static(_) => Ok(()),
        }
    }
}

/// `m + 1` stocks: horse `k` pays `o(k)` in stock `k`, stock `m + 1` is cash.
pub fn horse_race_embedding(spec: &ProcessSpec, odds: &OddsModel) -> Result<MarketSpec> {
    if odds.horses() != spec.x_size() {
        return Err(Error::Dimension(format!(
            "{} horses in the process, {} in the odds",
            spec.x_size(),
            odds.horses()
        )));
    }
    Ok(MarketSpec {
        stocks: spec.x_size() + 1,
        outcomes: spec.clone(),
        relatives: Relatives::Embedded(odds.clone()),
    })
}

#[derive(Clone, Debug, PartialEq)]
enum PortfolioLayout {
    /// `steps[i-1][x_past * |Y|^i + y_now]`
    Causal(Vec<Vec<Option<Portfolio>>>),
    /// `steps[i-1][x_past]`
    Blind(Vec<Vec<Option<Portfolio>>>),
    Constant(Portfolio),
}

/// Per-history portfolio choice `b(x^{i-1}, y^i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PortfolioStrategy {
    stocks: usize,
    layout: PortfolioLayout,
}

impl PortfolioStrategy {
    /// Constant-rebalanced portfolio.
    pub fn constant(portfolio: Portfolio) -> Self {
        Self {
            stocks: portfolio.weights.len(),
            layout: PortfolioLayout::Constant(portfolio),
        }
    }

    pub fn stocks(&self) -> usize {
        self.stocks
    }

    fn lookup(&self, h: &History) -> Option<&Portfolio> {
        match &self.layout {
            PortfolioLayout::Causal(steps) => steps
                .get(h.step - 1)?
                .get(h.x_past * h.y_size.pow(h.step as u32) + h.y_now)?
                .as_ref(),
            PortfolioLayout::Blind(steps) => steps.get(h.step - 1)?.get(h.x_past)?.as_ref(),
            PortfolioLayout::Constant(p) => Some(p),
        }
    }

    /// Portfolio for race `step` given `x^{step-1}` and `y^{step}`.
    pub fn portfolio(&self, step: usize, xs: &[usize], ys: &[usize], x_size: usize, y_size: usize) -> Option<&Portfolio> {
        if step == 0 || xs.len() + 1 != step || ys.len() != step {
            return None;
        }
        self.lookup(&History::from_symbols(step, xs, ys, x_size, y_size))
    }
}

/// Distribution of the next price-relative vector at one history.
fn history_distribution(market: &MarketSpec, h: &History, cond: &[f64]) -> Option<FiniteDistribution> {
    let total: f64 = cond.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let probs = cond.iter().map(|c| c / total).collect();
    let vectors = (0..cond.len()).map(|x| market.relative_at(h, x)).collect();
    FiniteDistribution::new(probs, vectors).ok()
}

/// Log-optimal portfolio at every history up to `n`, with or without side information.
pub fn optimal_causal_portfolio(
    market: &MarketSpec,
    n: usize,
    side_info: bool,
    budget: Budget,
) -> Result<PortfolioStrategy> {
    market.check_horizon(n)?;
    let joint = market.outcomes.joint_pmf_with_budget(n, budget)?;
    let (xs, ys) = (joint.x_size(), joint.y_size());
    let mut steps = Vec::with_capacity(n);
    for step in 1..=n {
        let y_len = if side_info { step } else { 0 };
        let marg = joint.marginal(step, y_len);
        let yc = ys.pow(y_len as u32);
        let rows: Vec<Option<Portfolio>> = (0..xs.pow(step as u32 - 1) * yc)
            .into_par_iter()
            .map(|idx| {
                let (x_past, y_now) = (idx / yc, idx % yc);
                let cond: Vec<f64> = (0..xs).map(|x| marg.probs()[(x_past * xs + x) * yc + y_now]).collect();
                let h = History {
                    step,
                    x_past,
                    y_now,
                    x_size: xs,
                    y_size: if side_info { ys } else { 1 },
                };
                match history_distribution(market, &h, &cond) {
                    Some(dist) => log_optimal_portfolio(&dist).map(|r| Some(r.portfolio)),
                    None => Ok(Some(Portfolio::uniform(market.stocks))),
                }
            })
            .collect::<Result<_>>()?;
        steps.push(rows);
    }
    Ok(PortfolioStrategy {
        stocks: market.stocks,
        layout: if side_info {
            PortfolioLayout::Causal(steps)
        } else {
            PortfolioLayout::Blind(steps)
        },
    })
}

/// Exact growth of a causal portfolio strategy.
///
/// Evaluated both through the per-race chain rule and as the expected
/// log-wealth over full paths; the two must agree within 1e-9.
pub fn causal_portfolio_growth(
    strategy: &PortfolioStrategy,
    market: &MarketSpec,
    n: usize,
    budget: Budget,
) -> Result<GrowthReport> {
    if strategy.stocks != market.stocks {
        return Err(Error::Dimension(format!(
            "strategy has {} stocks, market {}",
            strategy.stocks, market.stocks
        )));
    }
    market.check_horizon(n)?;
    let joint = market.outcomes.joint_pmf_with_budget(n, budget)?;
    let by_chain = chain_rule_growth(strategy, market, &joint)?;
    let by_paths = path_growth(strategy, market, &joint)?;
    let agree = if by_chain.is_finite() || by_paths.is_finite() {
        (by_chain - by_paths).abs() <= CHAIN_RULE_TOL
    } else {
        by_chain == by_paths
    };
    if !agree {
        return Err(Error::Inconsistent {
            what: "portfolio growth chain rule",
            first: by_chain,
            second: by_paths,
        });
    }
    Ok(GrowthReport {
        n,
        w: by_chain,
        growth_rate: by_chain / n as f64,
        e_log_odds: None,
        h_causal: None,
        mc_estimate: None,
        mc_stderr: None,
        trials: None,
    })
}

fn history_for(strategy: &PortfolioStrategy, step: usize, x_past: usize, y_now: usize, xs: usize, ys: usize) -> History {
    let blind = matches!(strategy.layout, PortfolioLayout::Blind(_));
    History {
        step,
        x_past,
        y_now: if blind { 0 } else { y_now },
        x_size: xs,
        y_size: if blind { 1 } else { ys },
    }
}

fn chain_rule_growth(strategy: &PortfolioStrategy, market: &MarketSpec, joint: &JointTable) -> Result<f64> {
    let (xs, ys) = (joint.x_size(), joint.y_size());
    let mut w = 0.0;
    for step in 1..=joint.n_x() {
        let marg = joint.marginal(step, step);
        let yc = ys.pow(step as u32);
        for (idx, &p) in marg.probs().iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            let xnum = idx / yc;
            let h = history_for(strategy, step, xnum / xs, idx % yc, xs, ys);
            let b = strategy.lookup(&h).ok_or(Error::UndefinedStrategy { step })?;
            w += p * b.ret(&market.relative_at(&h, xnum % xs)).log2();
        }
    }
    Ok(w)
}

fn path_growth(strategy: &PortfolioStrategy, market: &MarketSpec, joint: &JointTable) -> Result<f64> {
    let (xs, ys, n) = (joint.x_size(), joint.y_size(), joint.n_x());
    let yc = joint.y_count();
    let mut w = 0.0;
    for (idx, &p) in joint.probs().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let x = decode(idx / yc, xs, n);
        let y = decode(idx % yc, ys, n);
        let mut log_s = 0.0;
        for step in 1..=n {
            let x_past = crate::joint::encode(&x[..step - 1], xs);
            let y_now = crate::joint::encode(&y[..step], ys);
            let h = history_for(strategy, step, x_past, y_now, xs, ys);
            let b = strategy.lookup(&h).ok_or(Error::UndefinedStrategy { step })?;
            log_s += b.ret(&market.relative_at(&h, x[step - 1])).log2();
        }
        w += p * log_s;
    }
    Ok(w)
}
