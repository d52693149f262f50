use anyhow::Result;
use causal_gamble::causal_info::{directed_information, directed_information_lookahead, InfoReport};
use causal_gamble::compression::{rate_report, RateReport};
use causal_gamble::config::ExperimentConfig;
use causal_gamble::gambling::{
    delta_growth, growth_exact, growth_monte_carlo, optimal_blind_strategy, optimal_full_strategy,
    optimal_partial_strategy, BettingStrategy, GrowthReport,
};
use causal_gamble::markov_example::SweepRow;
use causal_gamble::portfolio::{causal_portfolio_growth, optimal_causal_portfolio};
use causal_gamble::report::{fmt_info, fmt_sig};

/// Header plus formatted rows.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|c| c.to_string()).collect()
}

pub fn fig2(cfg: &ExperimentConfig) -> Result<Table> {
    Ok(Table {
        header: header(&SweepRow::CSV_HEADER),
        rows: cfg.sweep_rows()?.iter().map(SweepRow::csv_record).collect(),
    })
}

/// One row per horizon `1..=n`; a lookahead column is added when `k > 0`.
pub fn dinfo(cfg: &ExperimentConfig) -> Result<Table> {
    let spec = cfg.process_spec()?;
    let budget = cfg.budget();
    let mut cols = header(&InfoReport::CSV_HEADER);
    if cfg.k > 0 {
        cols.push(format!("directed_info_lookahead_{}", cfg.k));
    }
    let mut rows = Vec::with_capacity(cfg.n);
    for n in 1..=cfg.n {
        let joint = spec.joint_pmf_with_budget(n, budget)?;
        let mut row = directed_information(&joint)?.csv_record().to_vec();
        if cfg.k > 0 {
            let ahead = spec.joint_pmf_lookahead(n, cfg.k, budget)?;
            row.push(fmt_info(directed_information_lookahead(&ahead, cfg.k)?));
        }
        rows.push(row);
    }
    Ok(Table { header: cols, rows })
}

/// Full-investment, blind and cash-allowed optimal strategies at horizon `n`.
pub fn growth(cfg: &ExperimentConfig) -> Result<Table> {
    let spec = cfg.process_spec()?;
    let odds = cfg.odds_model(spec.x_size())?;
    let (n, budget) = (cfg.n, cfg.budget());
    let delta = delta_growth(&spec, &odds, n, budget)?;
    let strategies: [(&str, BettingStrategy); 3] = [
        ("full", optimal_full_strategy(&spec, n, budget)?),
        ("blind", optimal_blind_strategy(&spec, n, budget)?),
        ("partial", optimal_partial_strategy(&spec, &odds, n, budget)?),
    ];
    let mut cols = vec!["strategy".to_string()];
    cols.extend(header(&GrowthReport::CSV_HEADER));
    cols.push("delta_w".into());
    let mut rows = Vec::new();
    for (name, strategy) in &strategies {
        let exact = growth_exact(strategy, &spec, &odds, n, budget)?;
        let mc = growth_monte_carlo(strategy, &spec, &odds, n, cfg.trials, cfg.seed)?;
        // the causal-entropy decomposition applies to informed strategies only
        let h_causal = if *name == "blind" { None } else { exact.h_causal };
        let merged = GrowthReport {
            h_causal,
            mc_estimate: mc.mc_estimate,
            mc_stderr: mc.mc_stderr,
            trials: mc.trials,
            ..exact
        };
        let mut row = vec![name.to_string()];
        row.extend(merged.csv_record());
        row.push(fmt_info(delta));
        rows.push(row);
    }
    Ok(Table { header: cols, rows })
}

pub fn compress(cfg: &ExperimentConfig) -> Result<Table> {
    let spec = cfg.process_spec()?;
    let rows = (1..=cfg.n)
        .map(|n| Ok(rate_report(&spec, n, cfg.budget())?.csv_record()))
        .collect::<Result<_>>()?;
    Ok(Table {
        header: header(&RateReport::CSV_HEADER),
        rows,
    })
}

/// Growth rates with and without side information for `1..=n`; for a
/// horse-race market the gambling optimum is reported alongside.
pub fn portfolio(cfg: &ExperimentConfig) -> Result<Table> {
    let market = cfg.market_spec()?;
    let spec = market.outcomes().clone();
    let (n, budget) = (cfg.n, cfg.budget());
    let causal = optimal_causal_portfolio(&market, n, true, budget)?;
    let blind = optimal_causal_portfolio(&market, n, false, budget)?;
    let embedded = if market.is_horse_race() {
        let odds = cfg.odds_model(spec.x_size())?;
        let strategy = optimal_partial_strategy(&spec, &odds, n, budget)?;
        Some((odds, strategy))
    } else {
        None
    };
    let mut rows = Vec::with_capacity(n);
    for m in 1..=n {
        let with_side = causal_portfolio_growth(&causal, &market, m, budget)?.growth_rate;
        let without = causal_portfolio_growth(&blind, &market, m, budget)?.growth_rate;
        let joint = spec.joint_pmf_with_budget(m, budget)?;
        let di = directed_information(&joint)?.directed_info / m as f64;
        let check = match &embedded {
            Some((odds, strategy)) => fmt_sig(growth_exact(strategy, &spec, odds, m, budget)?.growth_rate),
            None => String::new(),
        };
        rows.push(vec![
            m.to_string(),
            fmt_sig(without),
            fmt_sig(with_side),
            fmt_info(with_side - without),
            fmt_info(di),
            check,
        ]);
    }
    Ok(Table {
        header: header(&[
            "n",
            "growth_rate_no_side_info",
            "growth_rate_with_side_info",
            "delta_w",
            "directed_info_per_symbol",
            "gambling_partial_growth_rate",
        ]),
        rows,
    })
}
