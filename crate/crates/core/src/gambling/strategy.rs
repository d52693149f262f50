use crate::error::{Error, Result};
use crate::joint::encode;
use crate::report::fmt_sig;

/// Tolerance on the allocation simplex.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Wealth split for one race: cash kept back plus a bet on every horse.
#[derive(Clone, Debug, PartialEq)]
pub struct Allocation {
    pub cash: f64,
    pub bets: Vec<f64>,
}

impl Allocation {
    /// Checked constructor: nonnegative entries summing to one.
    pub fn new(cash: f64, bets: Vec<f64>) -> Result<Self> {
        if !cash.is_finite() || cash < 0.0 {
            return Err(Error::InvalidEntry {
                what: "cash fraction".into(),
                value: cash,
            });
        }
        if let Some(&bad) = bets.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return Err(Error::InvalidEntry {
                what: "bet fraction".into(),
                value: bad,
            });
        }
        let sum = cash + bets.iter().sum::<f64>();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::NotNormalized {
                what: "allocation".into(),
                sum,
            });
        }
        Ok(Self { cash, bets })
    }

    /// Everything wagered, split as `bets`.
    pub fn full(bets: Vec<f64>) -> Result<Self> {
        Self::new(0.0, bets)
    }

    pub fn uniform(m: usize) -> Self {
        Self {
            cash: 0.0,
            bets: vec![1.0 / m as f64; m],
        }
    }

    /// Wealth multiplier when `winner` wins at `odds`.
    pub fn factor(&self, winner: usize, odds: &[f64]) -> f64 {
        self.cash + self.bets[winner] * odds[winner]
    }
}

/// Position in the betting sequence: race `step` (1-based), winners
/// `x^{step-1}` and side information `y^{step}`, both as base-radix numbers.
#[derive(Clone, Copy, Debug)]
pub(crate) struct History {
    pub step: usize,
    pub x_past: usize,
    pub y_now: usize,
    pub x_size: usize,
    pub y_size: usize,
}

impl History {
    pub fn from_symbols(step: usize, xs: &[usize], ys: &[usize], x_size: usize, y_size: usize) -> Self {
        debug_assert_eq!(xs.len() + 1, step);
        debug_assert_eq!(ys.len(), step);
        History {
            step,
            x_past: encode(xs, x_size),
            y_now: encode(ys, y_size),
            x_size,
            y_size,
        }
    }

    pub fn last_x(&self) -> Option<usize> {
        (self.step > 1).then(|| self.x_past % self.x_size)
    }

    pub fn previous_y(&self) -> Option<usize> {
        (self.step > 1).then(|| (self.y_now / self.y_size) % self.y_size)
    }

    pub fn current_y(&self) -> usize {
        self.y_now % self.y_size
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Layout {
    /// `steps[i-1][x_past * |Y|^i + y_now]`
    Tabular(Vec<Vec<Option<Allocation>>>),
    /// Depends on winners only: `steps[i-1][x_past]`.
    Blind(Vec<Vec<Option<Allocation>>>),
    /// First race keyed by `y_1`, later races by `(x_{i-1}, y_{i-1}, y_i)`.
    Markov {
        first: Vec<Option<Allocation>>,
        later: Vec<Option<Allocation>>,
    },
}

/// A betting scheme `{b0(x^{i-1}, y^i), b(x_i | x^{i-1}, y^i)}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BettingStrategy {
    horses: usize,
    side_size: usize,
    layout: Layout,
}

impl BettingStrategy {
    /// Full-history strategy over `horizon` races, built row by row.
    ///
    /// `rule(step, x^{step-1}, y^{step})` returns the allocation for that
    /// history, or `None` to leave it undefined.
    pub fn tabular_from_fn<F>(horses: usize, side_size: usize, horizon: usize, mut rule: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize], &[usize]) -> Option<Allocation>,
    {
        let mut steps = Vec::with_capacity(horizon);
        for step in 1..=horizon {
            let yc = side_size.pow(step as u32);
            let xc = horses.pow(step as u32 - 1);
            let mut rows = Vec::with_capacity(xc * yc);
            for x_past in 0..xc {
                let xs = crate::joint::decode(x_past, horses, step - 1);
                for y_now in 0..yc {
                    let ys = crate::joint::decode(y_now, side_size, step);
                    let row = rule(step, &xs, &ys);
                    if let Some(a) = &row {
                        check_width(a, horses)?;
                    }
                    rows.push(row);
                }
            }
            steps.push(rows);
        }
        Ok(Self {
            horses,
            side_size,
            layout: Layout::Tabular(steps),
        })
    }

    /// Strategy that ignores side information.
    pub fn blind_from_fn<F>(horses: usize, side_size: usize, horizon: usize, mut rule: F) -> Result<Self>
    where
        F: FnMut(usize, &[usize]) -> Option<Allocation>,
    {
        let mut steps = Vec::with_capacity(horizon);
        for step in 1..=horizon {
            let xc = horses.pow(step as u32 - 1);
            let mut rows = Vec::with_capacity(xc);
            for x_past in 0..xc {
                let xs = crate::joint::decode(x_past, horses, step - 1);
                let row = rule(step, &xs);
                if let Some(a) = &row {
                    check_width(a, horses)?;
                }
                rows.push(row);
            }
            steps.push(rows);
        }
        Ok(Self {
            horses,
            side_size,
            layout: Layout::Blind(steps),
        })
    }

    /// Memory-one strategy valid for every horizon.
    ///
    /// `first[y_1]` covers the first race and
    /// `later[(x_prev * |Y| + y_prev) * |Y| + y]` every later one.
    pub fn markov(
        horses: usize,
        side_size: usize,
        first: Vec<Option<Allocation>>,
        later: Vec<Option<Allocation>>,
    ) -> Result<Self> {
        if first.len() != side_size || later.len() != horses * side_size * side_size {
            return Err(Error::Dimension("memory-one strategy table has the wrong size".into()));
        }
        for a in first.iter().chain(&later).flatten() {
            check_width(a, horses)?;
        }
        Ok(Self {
            horses,
            side_size,
            layout: Layout::Markov { first, later },
        })
    }

    /// The same allocation for every race and history.
    pub fn constant(horses: usize, side_size: usize, allocation: Allocation) -> Result<Self> {
        let later = vec![Some(allocation.clone()); horses * side_size * side_size];
        Self::markov(horses, side_size, vec![Some(allocation); side_size], later)
    }

    pub fn horses(&self) -> usize {
        self.horses
    }

    pub fn side_size(&self) -> usize {
        self.side_size
    }

    /// Number of races covered, `None` when unbounded.
    pub fn horizon(&self) -> Option<usize> {
        match &self.layout {
            Layout::Tabular(s) | Layout::Blind(s) => Some(s.len()),
            Layout::Markov { .. } => None,
        }
    }

    /// True when every defined row keeps no cash.
    pub fn is_full_investment(&self) -> bool {
        self.rows().all(|a| a.cash == 0.0)
    }

    fn rows(&self) -> Box<dyn Iterator<Item = &Allocation> + '_> {
        match &self.layout {
            Layout::Tabular(s) | Layout::Blind(s) => Box::new(s.iter().flatten().flatten()),
            Layout::Markov { first, later } => Box::new(first.iter().chain(later).flatten()),
        }
    }

    /// Allocation for race `step` (1-based) given `x^{step-1}` and `y^{step}`.
    pub fn allocation(&self, step: usize, xs: &[usize], ys: &[usize]) -> Option<&Allocation> {
        if step == 0 || xs.len() + 1 != step || ys.len() != step {
            return None;
        }
        self.lookup(&History::from_symbols(step, xs, ys, self.horses, self.side_size))
    }

    pub(crate) fn lookup(&self, h: &History) -> Option<&Allocation> {
        match &self.layout {
            Layout::Tabular(steps) => {
                let rows = steps.get(h.step - 1)?;
                rows.get(h.x_past * self.side_size.pow(h.step as u32) + h.y_now)?
                    .as_ref()
            }
            Layout::Blind(steps) => steps.get(h.step - 1)?.get(h.x_past)?.as_ref(),
            Layout::Markov { first, later } => match (h.last_x(), h.previous_y()) {
                (Some(x), Some(y)) => {
                    let ys = self.side_size;
                    later[(x * ys + y) * ys + h.current_y()].as_ref()
                }
                _ => first[h.current_y()].as_ref(),
            },
        }
    }

    /// CSV header for [`Self::csv_rows`].
    pub fn csv_header(&self) -> Vec<String> {
        let mut h = vec!["step".into(), "x_history".into(), "y_history".into(), "cash".into()];
        h.extend((0..self.horses).map(|x| format!("b{x}")));
        h
    }

    /// One row per defined history. Memory-one layouts list race 1 and a
    /// generic `2+` race keyed by the last symbols.
    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        let join = |s: &[usize]| s.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ");
        let render = |step: String, xh: String, yh: String, a: &Allocation| {
            let mut row = vec![step, xh, yh, fmt_sig(a.cash)];
            row.extend(a.bets.iter().map(|&b| fmt_sig(b)));
            row
        };
        let (m, ys) = (self.horses, self.side_size);
        let mut out = Vec::new();
        match &self.layout {
            Layout::Tabular(steps) => {
                for (i, rows) in steps.iter().enumerate() {
                    let step = i + 1;
                    let yc = ys.pow(step as u32);
                    for (idx, a) in rows.iter().enumerate() {
                        if let Some(a) = a {
                            let xh = crate::joint::decode(idx / yc, m, step - 1);
                            let yh = crate::joint::decode(idx % yc, ys, step);
                            out.push(render(step.to_string(), join(&xh), join(&yh), a));
                        }
                    }
                }
            }
            Layout::Blind(steps) => {
                for (i, rows) in steps.iter().enumerate() {
                    for (idx, a) in rows.iter().enumerate() {
                        if let Some(a) = a {
                            let xh = crate::joint::decode(idx, m, i);
                            out.push(render((i + 1).to_string(), join(&xh), String::new(), a));
                        }
                    }
                }
            }
            Layout::Markov { first, later } => {
                for (y, a) in first.iter().enumerate() {
                    if let Some(a) = a {
                        out.push(render("1".into(), String::new(), y.to_string(), a));
                    }
                }
                for (idx, a) in later.iter().enumerate() {
                    if let Some(a) = a {
                        let (x, yp, y) = (idx / (ys * ys), (idx / ys) % ys, idx % ys);
                        out.push(render("2+".into(), x.to_string(), format!("{yp} {y}"), a));
                    }
                }
            }
        }
        out
    }
}

fn check_width(a: &Allocation, horses: usize) -> Result<()> {
    if a.bets.len() != horses {
        return Err(Error::Dimension(format!(
            "allocation has {} bets for {horses} horses",
            a.bets.len()
        )));
    }
    Ok(())
}
