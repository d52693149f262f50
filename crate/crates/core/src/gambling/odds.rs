use serde::Serialize;

use crate::error::{Error, Result};
use crate::gambling::History;

/// Tolerance used to classify odds as fair.
pub const FAIRNESS_TOL: f64 = 1e-12;

/// Whether a bookmaker's odds favor the gambler.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Fairness {
    /// `sum 1/o < 1`
    SuperFair,
    /// `sum 1/o = 1`
    Fair,
    /// `sum 1/o > 1`
    SubFair,
}

impl Fairness {
    pub fn of(odds: &[f64]) -> Fairness {
        let s: f64 = odds.iter().map(|o| 1.0 / o).sum();
        if (s - 1.0).abs() <= FAIRNESS_TOL {
            Fairness::Fair
        } else if s < 1.0 {
            Fairness::SuperFair
        } else {
            Fairness::SubFair
        }
    }
}

/// Payoff `o(x_i | x^{i-1})` per unit wagered on the winner.
#[derive(Clone, Debug, PartialEq)]
pub enum OddsModel {
    /// Same odds every race.
    Constant(Vec<f64>),
    /// Odds depend on the previous winner.
    Markov {
        initial: Vec<f64>,
        after: Vec<Vec<f64>>,
    },
    /// Explicit per-step tables; `tables[i]` has one row per `x^i`.
    History(Vec<Vec<Vec<f64>>>),
}

fn check_odds(what: &str, row: &[f64], m: usize) -> Result<()> {
    if row.len() != m {
        return Err(Error::Dimension(format!(
            "{what} has {} entries, expected {m}",
            row.len()
        )));
    }
    if let Some(&bad) = row.iter().find(|o| !o.is_finite() || **o <= 0.0) {
        return Err(Error::InvalidEntry {
            what: what.into(),
            value: bad,
        });
    }
    Ok(())
}

impl OddsModel {
    /// `o(x) = m` for every horse.
    pub fn uniform_fair(m: usize) -> OddsModel {
        OddsModel::Constant(vec![m as f64; m])
    }

    pub fn constant(odds: Vec<f64>) -> Result<OddsModel> {
        if odds.is_empty() {
            return Err(Error::Dimension("odds need at least one horse".into()));
        }
        check_odds("odds", &odds, odds.len())?;
        Ok(OddsModel::Constant(odds))
    }

    pub fn markov(initial: Vec<f64>, after: Vec<Vec<f64>>) -> Result<OddsModel> {
        let m = initial.len();
        if m == 0 {
            return Err(Error::Dimension("odds need at least one horse".into()));
        }
        check_odds("initial odds", &initial, m)?;
        if after.len() != m {
            return Err(Error::Dimension(format!(
                "memory-1 odds need {m} rows, got {}",
                after.len()
            )));
        }
        for (i, row) in after.iter().enumerate() {
            check_odds(&format!("odds after horse {i}"), row, m)?;
        }
        Ok(OddsModel::Markov { initial, after })
    }

    pub fn history(tables: Vec<Vec<Vec<f64>>>) -> Result<OddsModel> {
        let m = tables
            .first()
            .and_then(|t| t.first())
            .map_or(0, Vec::len);
        if m == 0 {
            return Err(Error::Dimension("odds need at least one horse".into()));
        }
        for (i, table) in tables.iter().enumerate() {
            if table.len() != m.pow(i as u32) {
                return Err(Error::Dimension(format!(
                    "odds table for race {} needs {} rows, got {}",
                    i + 1,
                    m.pow(i as u32),
                    table.len()
                )));
            }
            for row in table {
                check_odds(&format!("odds for race {}", i + 1), row, m)?;
            }
        }
        Ok(OddsModel::History(tables))
    }

    pub fn horses(&self) -> usize {
        match self {
            OddsModel::Constant(o) => o.len(),
            OddsModel::Markov { initial, .. } => initial.len(),
            OddsModel::History(t) => t[0][0].len(),
        }
    }

    /// Largest horizon the model covers, if bounded.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            OddsModel::History(t) => Some(t.len()),
            _ => None,
        }
    }

    pub fn has_memory(&self) -> bool {
        !matches!(self, OddsModel::Constant(_))
    }

    /// Odds row for race `step` (1-based) after winners `x_past`.
    pub fn row(&self, step: usize, x_past: &[usize]) -> Option<&[f64]> {
        let m = self.horses();
        let past = crate::joint::encode(x_past, m);
        self.row_at(step, past, x_past.last().copied())
    }

    pub(crate) fn row_for(&self, h: &History) -> Option<&[f64]> {
        self.row_at(h.step, h.x_past, h.last_x())
    }

    fn row_at(&self, step: usize, past: usize, last: Option<usize>) -> Option<&[f64]> {
        match self {
            OddsModel::Constant(o) => Some(o),
            OddsModel::Markov { initial, after } => match last {
                None => Some(initial),
                Some(x) => Some(&after[x]),
            },
            OddsModel::History(t) => t.get(step - 1).map(|table| table[past].as_slice()),
        }
    }

    /// Fairness of the race `step` after `x_past`.
    pub fn fairness(&self, step: usize, x_past: &[usize]) -> Option<Fairness> {
        self.row(step, x_past).map(Fairness::of)
    }

    /// Fails unless the model covers `n` races.
    pub(crate) fn check_horizon(&self, n: usize) -> Result<()> {
        match self.horizon() {
            Some(h) if h < n => Err(Error::HorizonMismatch(format!(
                "odds cover {h} races, {n} requested"
            ))),
            _ => Ok(()),
        }
    }
}
