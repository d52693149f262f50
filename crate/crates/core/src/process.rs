//! Finite-alphabet pair processes `(X_i, Y_i)`.
//!
//! A [`ProcessSpec`] is the generative law of the horse-race outcome `X_i`
//! together with the side information `Y_i`. It is stored as per-step kernels
//! over the pair alphabet, either i.i.d., first-order Markov in the pair, or
//! as an explicit joint table for a fixed horizon.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::joint::{decode, pow_u128, Budget, JointTable};

/// Tolerance on kernel row sums.
pub const KERNEL_TOL: f64 = 1e-12;

/// Finite alphabet `{0, .., size-1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::Dimension("alphabet size must be >= 1".into()));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }
}

/// How far back the pair kernel looks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemoryOrder {
    /// i.i.d. pairs.
    Iid,
    /// `p(x_i, y_i | x_{i-1}, y_{i-1})`.
    Markov,
    /// Explicit joint table for a fixed horizon.
    History(usize),
}

#[derive(Clone, Debug, PartialEq)]
enum Kernel {
    Iid {
        joint: Vec<f64>,
    },
    Markov {
        initial: Vec<f64>,
        /// One row per previous pair `x_prev * |Y| + y_prev`.
        transition: Vec<Vec<f64>>,
    },
    History(JointTable),
}

/// Generative law of the pair process.
///
/// Pair rows are laid out `x * |Y| + y`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSpec {
    x: Alphabet,
    y: Alphabet,
    kernel: Kernel,
}

fn check_probability(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::ProbabilityOutOfRange { name, value });
    }
    Ok(())
}

pub(crate) fn check_row(what: &str, row: &[f64], len: usize) -> Result<()> {
    if row.len() != len {
        return Err(Error::Dimension(format!(
            "{what} has {} entries, expected {len}",
            row.len()
        )));
    }
    if let Some(&bad) = row.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::InvalidEntry {
            what: what.to_string(),
            value: bad,
        });
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > KERNEL_TOL {
        return Err(Error::NotNormalized {
            what: what.to_string(),
            sum,
        });
    }
    Ok(())
}

impl ProcessSpec {
    /// Binary winner that repeats with probability `1 - p`, starting uniform,
    /// observed through a binary symmetric channel with crossover `q`.
    pub fn markov_bsc(p: f64, q: f64) -> Result<Self> {
        check_probability("p", p)?;
        check_probability("q", q)?;
        let stay = |a: usize, b: usize| if a == b { 1.0 - p } else { p };
        let obs = |x: usize, y: usize| if x == y { 1.0 - q } else { q };
        let mut initial = vec![0.0; 4];
        for x in 0..2 {
            for y in 0..2 {
                initial[x * 2 + y] = 0.5 * obs(x, y);
            }
        }
        let mut transition = Vec::with_capacity(4);
        for xp in 0..2 {
            for _yp in 0..2 {
                let mut row = vec![0.0; 4];
                for x in 0..2 {
                    for y in 0..2 {
                        row[x * 2 + y] = stay(xp, x) * obs(x, y);
                    }
                }
                transition.push(row);
            }
        }
        Self::markov(2, 2, initial, transition)
    }

    /// i.i.d. pairs drawn from `joint`, laid out `x * |Y| + y`.
    pub fn iid_pair(x_size: usize, y_size: usize, joint: Vec<f64>) -> Result<Self> {
        let x = Alphabet::new(x_size)?;
        let y = Alphabet::new(y_size)?;
        check_row("joint pmf", &joint, x_size * y_size)?;
        Ok(Self {
            x,
            y,
            kernel: Kernel::Iid { joint },
        })
    }

    /// i.i.d. pairs from a matrix with one row per `x` and one column per `y`.
    pub fn iid_from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let y_size = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != y_size) {
            return Err(Error::Dimension("ragged joint pmf rows".into()));
        }
        Self::iid_pair(rows.len(), y_size, rows.concat())
    }

    /// First-order Markov pair process.
    pub fn markov(
        x_size: usize,
        y_size: usize,
        initial: Vec<f64>,
        transition: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let x = Alphabet::new(x_size)?;
        let y = Alphabet::new(y_size)?;
        let pairs = x_size * y_size;
        check_row("initial kernel", &initial, pairs)?;
        if transition.len() != pairs {
            return Err(Error::Dimension(format!(
                "transition kernel has {} rows, expected {pairs}",
                transition.len()
            )));
        }
        for (i, row) in transition.iter().enumerate() {
            check_row(&format!("transition row {i}"), row, pairs)?;
        }
        Ok(Self {
            x,
            y,
            kernel: Kernel::Markov {
                initial,
                transition,
            },
        })
    }

    /// Arbitrary law given as a joint table over a fixed horizon.
    pub fn from_history(table: JointTable) -> Result<Self> {
        if table.n_x() != table.n_y() || table.n_x() == 0 {
            return Err(Error::HorizonMismatch(
                "history table must have equal, positive x and y horizons".into(),
            ));
        }
        Ok(Self {
            x: Alphabet::new(table.x_size())?,
            y: Alphabet::new(table.y_size())?,
            kernel: Kernel::History(table),
        })
    }

    pub fn x_size(&self) -> usize {
        self.x.size()
    }

    pub fn y_size(&self) -> usize {
        self.y.size()
    }

    pub fn memory_order(&self) -> MemoryOrder {
        match &self.kernel {
            Kernel::Iid { .. } => MemoryOrder::Iid,
            Kernel::Markov { .. } => MemoryOrder::Markov,
            Kernel::History(t) => MemoryOrder::History(t.n_x()),
        }
    }

    /// Pair kernel row `p(x_i, y_i | previous pair)` for memory order <= 1.
    /// `prev` is `None` at the first step.
    pub fn pair_kernel(&self, prev: Option<(usize, usize)>) -> Option<&[f64]> {
        match (&self.kernel, prev) {
            (Kernel::Iid { joint }, _) => Some(joint),
            (Kernel::Markov { initial, .. }, None) => Some(initial),
            (Kernel::Markov { transition, .. }, Some((x, y))) => {
                Some(&transition[x * self.y_size() + y])
            }
            (Kernel::History(_), _) => None,
        }
    }

    /// The stored table for a history-kernel spec.
    pub fn history_table(&self) -> Option<&JointTable> {
        match &self.kernel {
            Kernel::History(t) => Some(t),
            _ => None,
        }
    }

    /// Exact joint pmf of `(x^n, y^n)` under the default budget.
    pub fn joint_pmf(&self, n: usize) -> Result<JointTable> {
        self.joint_pmf_lookahead(n, 0, Budget::default())
    }

    pub fn joint_pmf_with_budget(&self, n: usize, budget: Budget) -> Result<JointTable> {
        self.joint_pmf_lookahead(n, 0, budget)
    }

    /// Exact joint pmf of `(x^n, y^{n+k})`.
    pub fn joint_pmf_lookahead(&self, n: usize, k: usize, budget: Budget) -> Result<JointTable> {
        if n == 0 {
            return Err(Error::HorizonMismatch("horizon must be >= 1".into()));
        }
        let (xs, ys) = (self.x_size(), self.y_size());
        let n_y = n + k;
        if let Kernel::History(table) = &self.kernel {
            if n_y > table.n_x() {
                return Err(Error::HorizonMismatch(format!(
                    "history spec covers {} steps, {} requested",
                    table.n_x(),
                    n_y
                )));
            }
            budget.check(pow_u128(xs * ys, table.n_x()))?;
            return marginalize_history(table, n, n_y);
        }
        budget.check(pow_u128(xs * ys, n_y))?;
        let y_count = ys.pow(n_y as u32);
        let mut probs = vec![0.0; xs.pow(n as u32) * y_count];
        let mut walk = PathWalk {
            spec: self,
            n_x: n,
            n_y,
            y_count,
            out: &mut probs,
        };
        walk.visit(0, None, 0, 0, 0.0);
        JointTable::new(xs, ys, n, n_y, probs)
    }

    /// Draws one path with `n` outcomes and `n + k` side-information symbols.
    pub fn sample_path(&self, n: usize, k: usize, seed: u64) -> Result<SamplePath> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = Sampler::new(self)?;
        let (x, y) = sampler.draw(n, k, &mut rng)?;
        Ok(SamplePath { x, y, seed })
    }
}

struct PathWalk<'a> {
    spec: &'a ProcessSpec,
    n_x: usize,
    n_y: usize,
    y_count: usize,
    out: &'a mut [f64],
}

impl PathWalk<'_> {
    // Path products accumulate in the log domain.
    fn visit(&mut self, step: usize, prev: Option<(usize, usize)>, xnum: usize, ynum: usize, logp: f64) {
        if step == self.n_y {
            self.out[xnum * self.y_count + ynum] += logp.exp();
            return;
        }
        let (xs, ys) = (self.spec.x_size(), self.spec.y_size());
        let row = self.spec.pair_kernel(prev).expect("memory order <= 1");
        for x in 0..xs {
            for y in 0..ys {
                let w = row[x * ys + y];
                if w == 0.0 {
                    continue;
                }
                let next_x = if step < self.n_x { xnum * xs + x } else { xnum };
                self.visit(step + 1, Some((x, y)), next_x, ynum * ys + y, logp + w.ln());
            }
        }
    }
}

fn marginalize_history(table: &JointTable, n_x: usize, n_y: usize) -> Result<JointTable> {
    let m = table.marginal(n_x, n_y);
    JointTable::new(table.x_size(), table.y_size(), n_x, n_y, m.probs().to_vec())
}

/// One sampled realization of the pair process.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SamplePath {
    pub x: Vec<usize>,
    /// Side information, `n + k` symbols long.
    pub y: Vec<usize>,
    pub seed: u64,
}

/// Reusable sampler with precomputed categorical tables.
#[derive(Clone, Debug)]
pub struct Sampler<'a> {
    spec: &'a ProcessSpec,
    rows: Vec<WeightedIndex<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(spec: &'a ProcessSpec) -> Result<Self> {
        let weighted = |row: &[f64]| {
            WeightedIndex::new(row.iter().copied())
                .map_err(|e| Error::Dimension(format!("cannot sample kernel row: {e}")))
        };
        let rows = match &spec.kernel {
            Kernel::Iid { joint } => vec![weighted(joint)?],
            Kernel::Markov {
                initial,
                transition,
            } => {
                let mut rows = vec![weighted(initial)?];
                for row in transition {
                    rows.push(weighted(row)?);
                }
                rows
            }
            Kernel::History(table) => vec![weighted(table.probs())?],
        };
        Ok(Self { spec, rows })
    }

    /// Draws `(x^n, y^{n+k})` from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, k: usize, rng: &mut R) -> Result<(Vec<usize>, Vec<usize>)> {
        let ys = self.spec.y_size();
        let total = n + k;
        match &self.spec.kernel {
            Kernel::History(table) => {
                if total > table.n_x() {
                    return Err(Error::HorizonMismatch(format!(
                        "history spec covers {} steps, {} requested",
                        table.n_x(),
                        total
                    )));
                }
                let idx = self.rows[0].sample(rng);
                let yc = table.y_count();
                let mut x = decode(idx / yc, table.x_size(), table.n_x());
                let mut y = decode(idx % yc, ys, table.n_y());
                x.truncate(n);
                y.truncate(total);
                Ok((x, y))
            }
            kernel => {
                let mut x = Vec::with_capacity(total);
                let mut y = Vec::with_capacity(total);
                let mut prev: Option<usize> = None;
                for _ in 0..total {
                    let row = match (kernel, prev) {
                        (Kernel::Markov { .. }, Some(pair)) => &self.rows[1 + pair],
                        _ => &self.rows[0],
                    };
                    let pair = row.sample(rng);
                    x.push(pair / ys);
                    y.push(pair % ys);
                    prev = Some(pair);
                }
                x.truncate(n);
                Ok((x, y))
            }
        }
    }
}
