//! Exact joint pmfs over finite-horizon path pairs `(x^n, y^m)`.
//!
//! Cells are stored with the whole `x` sequence as the most significant
//! part of the index: `index = xnum * |Y|^m + ynum`, where both numbers are
//! read most-significant-symbol-first. Prefix marginals `p(x^a, y^b)` are
//! then strided block sums and never need per-cell digit decoding.

use crate::error::{Error, Result};

/// Tolerance on the total mass of a joint table.
pub const JOINT_TOL: f64 = 1e-9;

/// Default cap on the number of enumerated table entries.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Upper bound on exact enumeration work.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget(pub u128);

impl Default for Budget {
    fn default() -> Self {
        Budget(DEFAULT_BUDGET)
    }
}

impl Budget {
    /// Fails with [`Error::EnumerationRefused`] if `required` exceeds the budget.
    pub fn check(self, required: u128) -> Result<()> {
        if required > self.0 {
            Err(Error::EnumerationRefused {
                required,
                budget: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// `base^exp` with saturation, for budget arithmetic.
pub(crate) fn pow_u128(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}

/// Entropy in bits of an (unnormalized sub-)pmf, with `0 log 0 = 0`.
pub fn entropy_bits(probs: &[f64]) -> f64 {
    let mut h = 0.0;
    for &p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Exact pmf over `(x^n_x, y^n_y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    x_size: usize,
    y_size: usize,
    n_x: usize,
    n_y: usize,
    probs: Vec<f64>,
}

impl JointTable {
    /// Wraps a probability vector laid out as `xnum * |Y|^n_y + ynum`.
    pub fn new(
        x_size: usize,
        y_size: usize,
        n_x: usize,
        n_y: usize,
        probs: Vec<f64>,
    ) -> Result<Self> {
        if x_size == 0 || y_size == 0 {
            return Err(Error::Dimension("alphabet sizes must be >= 1".into()));
        }
        let expected = pow_u128(x_size, n_x).saturating_mul(pow_u128(y_size, n_y));
        if probs.len() as u128 != expected {
            return Err(Error::Dimension(format!(
                "joint table has {} entries, expected {}",
                probs.len(),
                expected
            )));
        }
        if let Some(&bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidEntry {
                what: "joint table".into(),
                value: bad,
            });
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > JOINT_TOL {
            return Err(Error::NotNormalized {
                what: "joint table".into(),
                sum,
            });
        }
        Ok(Self {
            x_size,
            y_size,
            n_x,
            n_y,
            probs,
        })
    }

    pub fn x_size(&self) -> usize {
        self.x_size
    }

    pub fn y_size(&self) -> usize {
        self.y_size
    }

    /// Horizon of the `x` sequence.
    pub fn n_x(&self) -> usize {
        self.n_x
    }

    /// Horizon of the `y` sequence (`n_x + k` with lookahead `k`).
    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of distinct `y` sequences.
    pub fn y_count(&self) -> usize {
        self.y_size.pow(self.n_y as u32)
    }

    pub fn x_count(&self) -> usize {
        self.x_size.pow(self.n_x as u32)
    }

    /// Index of a pair of sequences.
    pub fn index(&self, xs: &[usize], ys: &[usize]) -> usize {
        debug_assert_eq!(xs.len(), self.n_x);
        debug_assert_eq!(ys.len(), self.n_y);
        encode(xs, self.x_size) * self.y_count() + encode(ys, self.y_size)
    }

    pub fn prob(&self, xs: &[usize], ys: &[usize]) -> f64 {
        self.probs[self.index(xs, ys)]
    }

    /// Marginal `p(x^a, y^b)` for prefix lengths `a <= n_x`, `b <= n_y`.
    pub fn marginal(&self, a: usize, b: usize) -> Marginal {
        assert!(a <= self.n_x && b <= self.n_y, "prefix beyond horizon");
        let xa = self.x_size.pow(a as u32);
        let xr = self.x_size.pow((self.n_x - a) as u32);
        let yb = self.y_size.pow(b as u32);
        let yr = self.y_size.pow((self.n_y - b) as u32);
        let y_all = yb * yr;
        let mut out = vec![0.0; xa * yb];
        for xp in 0..xa {
            let row = &mut out[xp * yb..(xp + 1) * yb];
            for xs in 0..xr {
                let base = (xp * xr + xs) * y_all;
                for (yp, cell) in row.iter_mut().enumerate() {
                    let start = base + yp * yr;
                    *cell += self.probs[start..start + yr].iter().sum::<f64>();
                }
            }
        }
        Marginal {
            x_size: self.x_size,
            y_size: self.y_size,
            a,
            b,
            probs: out,
        }
    }

    /// Entropy of the `p(x^a, y^b)` marginal, in bits.
    pub fn marginal_entropy(&self, a: usize, b: usize) -> f64 {
        entropy_bits(&self.marginal(a, b).probs)
    }

    /// Same pmf with the roles of `x` and `y` exchanged.
    pub fn transposed(&self) -> JointTable {
        let xc = self.x_count();
        let yc = self.y_count();
        let mut probs = vec![0.0; self.probs.len()];
        for x in 0..xc {
            for y in 0..yc {
                probs[y * xc + x] = self.probs[x * yc + y];
            }
        }
        JointTable {
            x_size: self.y_size,
            y_size: self.x_size,
            n_x: self.n_y,
            n_y: self.n_x,
            probs,
        }
    }

    /// Iterates `(x^n, y^m, p)` over all cells. Intended for small tables.
    pub fn cells(&self) -> impl Iterator<Item = (Vec<usize>, Vec<usize>, f64)> + '_ {
        let yc = self.y_count();
        self.probs.iter().enumerate().map(move |(i, &p)| {
            (
                decode(i / yc, self.x_size, self.n_x),
                decode(i % yc, self.y_size, self.n_y),
                p,
            )
        })
    }
}

/// Prefix marginal `p(x^a, y^b)`, indexed `xnum * |Y|^b + ynum`.
#[derive(Clone, Debug, PartialEq)]
pub struct Marginal {
    x_size: usize,
    y_size: usize,
    a: usize,
    b: usize,
    probs: Vec<f64>,
}

impl Marginal {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, xs: &[usize], ys: &[usize]) -> f64 {
        debug_assert_eq!(xs.len(), self.a);
        debug_assert_eq!(ys.len(), self.b);
        self.probs[encode(xs, self.x_size) * self.y_size.pow(self.b as u32) + encode(ys, self.y_size)]
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.probs)
    }
}

/// Reads `symbols` as a base-`radix` number, first symbol most significant.
pub fn encode(symbols: &[usize], radix: usize) -> usize {
    symbols.iter().fold(0, |acc, &s| acc * radix + s)
}

/// Inverse of [`encode`] for a fixed length.
pub fn decode(mut value: usize, radix: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = value % radix;
        value /= radix;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> JointTable {
        // x^2 over {0,1}, y^1 over {0,1,2}
        let probs: Vec<f64> = (1..=12).map(|v| v as f64 / 78.0).collect();
        JointTable::new(2, 3, 2, 1, probs).unwrap()
    }

    #[test]
    fn marginal_matches_brute_force() {
        let t = table();
        for a in 0..=2 {
            for b in 0..=1 {
                let m = t.marginal(a, b);
                let mut brute = vec![0.0; 2usize.pow(a as u32) * 3usize.pow(b as u32)];
                for (xs, ys, p) in t.cells() {
                    let idx = encode(&xs[..a], 2) * 3usize.pow(b as u32) + encode(&ys[..b], 3);
                    brute[idx] += p;
                }
                for (u, v) in m.probs().iter().zip(&brute) {
                    assert!((u - v).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn transposed_swaps_roles() {
        let t = table();
        let tt = t.transposed();
        assert_eq!(tt.n_x(), 1);
        assert_eq!(tt.n_y(), 2);
        for (xs, ys, p) in t.cells() {
            assert_eq!(tt.prob(&ys, &xs), p);
        }
        assert_eq!(tt.transposed(), t);
    }

    #[test]
    fn rejects_unnormalized_and_negative() {
        assert!(matches!(
            JointTable::new(2, 1, 1, 0, vec![0.5, 0.6]),
            Err(Error::NotNormalized { .. })
        ));
        assert!(matches!(
            JointTable::new(2, 1, 1, 0, vec![1.5, -0.5]),
            Err(Error::InvalidEntry { .. })
        ));
        assert!(matches!(
            JointTable::new(2, 1, 2, 0, vec![0.5, 0.5]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn budget_refusal_names_requirement() {
        let err = Budget(10).check(11).unwrap_err();
        assert!(err.to_string().contains("11"));
    }

    #[test]
    fn entropy_conventions() {
        assert_eq!(entropy_bits(&[1.0, 0.0]), 0.0);
        assert!((entropy_bits(&[0.25; 4]) - 2.0).abs() < 1e-15);
    }
}
