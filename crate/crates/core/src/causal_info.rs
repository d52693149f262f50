//! Causal conditioning, causally conditional entropy and directed information.
//!
//! Every quantity is an exact sum over a [`JointTable`]; logarithms are base 2.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::joint::{entropy_bits, JointTable};

/// Tolerance for identities between derived quantities.
pub const INFO_TOL: f64 = 1e-9;

/// `p(x^n || y^{n-d})` for every `(x^n, y^{n-d})`.
///
/// Entries whose conditioning history has probability zero are `None`.
#[derive(Clone, Debug)]
pub struct CausalPmfTable {
    x_size: usize,
    y_size: usize,
    n: usize,
    delay: usize,
    values: Vec<Option<f64>>,
}

impl CausalPmfTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delay(&self) -> usize {
        self.delay
    }

    /// Number of conditioning `y` symbols, `n - d`.
    pub fn y_len(&self) -> usize {
        self.n - self.delay
    }

    pub fn get(&self, xs: &[usize], ys: &[usize]) -> Option<f64> {
        let yc = self.y_size.pow(self.y_len() as u32);
        let xnum = crate::joint::encode(xs, self.x_size);
        let ynum = crate::joint::encode(ys, self.y_size);
        self.values[xnum * yc + ynum]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }
}

/// Builds `p(x^n || y^{n-d}) = prod_i p(x_i | x^{i-1}, y^{i-d})` for `d` in `{0, 1}`.
pub fn causal_conditional_pmf(joint: &JointTable, delay: usize) -> Result<CausalPmfTable> {
    if delay > 1 {
        return Err(Error::HorizonMismatch(format!("delay must be 0 or 1, got {delay}")));
    }
    let n = joint.n_x();
    if n < delay || joint.n_y() < n - delay {
        return Err(Error::HorizonMismatch(format!(
            "joint covers y^{} but y^{} is required",
            joint.n_y(),
            n.saturating_sub(delay)
        )));
    }
    let (xs, ys) = (joint.x_size(), joint.y_size());
    let y_len = n - delay;
    // numerators p(x^i, y^{i-d}) and denominators p(x^{i-1}, y^{i-d})
    let steps: Vec<_> = (1..=n)
        .map(|i| {
            let b = i.saturating_sub(delay);
            (joint.marginal(i, b), joint.marginal(i - 1, b), b)
        })
        .collect();
    let xc = xs.pow(n as u32);
    let yc = ys.pow(y_len as u32);
    let mut values = Vec::with_capacity(xc * yc);
    for xnum in 0..xc {
        for ynum in 0..yc {
            let mut prod = Some(1.0);
            for (i, (num, den, b)) in steps.iter().enumerate() {
                let i = i + 1;
                let xpre = xnum / xs.pow((n - i) as u32);
                let ypre = ynum / ys.pow((y_len - b) as u32);
                let yb = ys.pow(*b as u32);
                let d = den.probs()[(xpre / xs) * yb + ypre];
                if d <= 0.0 {
                    prod = None;
                    break;
                }
                let p = num.probs()[xpre * yb + ypre] / d;
                prod = prod.map(|acc| acc * p);
            }
            values.push(prod);
        }
    }
    Ok(CausalPmfTable {
        x_size: xs,
        y_size: ys,
        n,
        delay,
        values,
    })
}

/// `H(X^n || Y^n) = sum_i H(X_i | X^{i-1}, Y^i)` in bits.
pub fn causal_entropy(joint: &JointTable) -> f64 {
    causal_entropy_lookahead(joint, 0)
}

/// `sum_i H(X_i | X^{i-1}, Y^{i+k})`, with `y` indices capped at the table horizon.
pub fn causal_entropy_lookahead(joint: &JointTable, k: usize) -> f64 {
    let n = joint.n_x();
    (1..=n)
        .map(|i| {
            let b = (i + k).min(joint.n_y());
            joint.marginal_entropy(i, b) - joint.marginal_entropy(i - 1, b)
        })
        .sum()
}

/// Exact information quantities for one horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InfoReport {
    pub n: usize,
    /// `H(X^n)`
    pub h_xn: f64,
    /// `H(X^n || Y^n)`
    pub h_causal: f64,
    /// `I(Y^n -> X^n)`
    pub directed_info: f64,
    /// `I(X^n; Y^n)`
    pub mutual_info: f64,
    /// `I(X_i; Y^i | X^{i-1})` for `i = 1..n`
    #[serde(skip)]
    pub per_step: Vec<f64>,
}

impl InfoReport {
    pub const CSV_HEADER: [&'static str; 5] = ["n", "H_Xn", "H_causal", "directed_info", "mutual_info"];

    pub fn csv_record(&self) -> [String; 5] {
        [
            self.n.to_string(),
            crate::report::fmt_sig(self.h_xn),
            crate::report::fmt_sig(self.h_causal),
            crate::report::fmt_info(self.directed_info),
            crate::report::fmt_info(self.mutual_info),
        ]
    }
}

/// `I(X_i; Y^i | X^{i-1})` evaluated directly as a log-ratio expectation.
fn conditional_mi_step(joint: &JointTable, i: usize) -> f64 {
    let (xs, ys) = (joint.x_size(), joint.y_size());
    let full = joint.marginal(i, i);
    let past_x_y = joint.marginal(i - 1, i);
    let x_now = joint.marginal(i, 0);
    let x_past = joint.marginal(i - 1, 0);
    let yc = ys.pow(i as u32);
    let mut acc = 0.0;
    for xnum in 0..xs.pow(i as u32) {
        let xp = xnum / xs;
        for ynum in 0..yc {
            let p = full.probs()[xnum * yc + ynum];
            if p <= 0.0 {
                continue;
            }
            let ratio = p * x_past.probs()[xp]
                / (past_x_y.probs()[xp * yc + ynum] * x_now.probs()[xnum]);
            acc += p * ratio.log2();
        }
    }
    acc
}

/// Directed information `I(Y^n -> X^n)` by two routes, cross-checked.
///
/// The per-step conditional mutual informations are summed directly and
/// compared with `H(X^n) - H(X^n || Y^n)`.
pub fn directed_information(joint: &JointTable) -> Result<InfoReport> {
    let n = joint.n_x();
    if joint.n_y() < n {
        return Err(Error::HorizonMismatch(format!(
            "joint covers y^{} but y^{n} is required",
            joint.n_y()
        )));
    }
    let h_xn = joint.marginal_entropy(n, 0);
    let h_causal = causal_entropy(joint);
    let per_step: Vec<f64> = (1..=n).map(|i| conditional_mi_step(joint, i)).collect();
    let by_steps: f64 = per_step.iter().sum();
    let by_entropy = h_xn - h_causal;
    if (by_steps - by_entropy).abs() > INFO_TOL {
        return Err(Error::Inconsistent {
            what: "directed information",
            first: by_steps,
            second: by_entropy,
        });
    }
    Ok(InfoReport {
        n,
        h_xn,
        h_causal,
        directed_info: by_entropy,
        mutual_info: mutual_information(joint),
        per_step,
    })
}

/// `I(Y^{n+k} -> X^n) = H(X^n) - sum_i H(X_i | X^{i-1}, Y^{i+k})`.
pub fn directed_information_lookahead(joint: &JointTable, k: usize) -> Result<f64> {
    if joint.n_y() != joint.n_x() + k {
        return Err(Error::HorizonMismatch(format!(
            "lookahead {k} needs y^{} but the table covers y^{}",
            joint.n_x() + k,
            joint.n_y()
        )));
    }
    Ok(joint.marginal_entropy(joint.n_x(), 0) - causal_entropy_lookahead(joint, k))
}

/// Block mutual information `I(X^n; Y^m)`.
pub fn mutual_information(joint: &JointTable) -> f64 {
    joint.marginal_entropy(joint.n_x(), 0) + joint.marginal_entropy(0, joint.n_y())
        - entropy_bits(joint.probs())
}

/// Terms `I(Y_i; X_i^n | X^{i-1}, Y^{i-1})`, whose sum is again `I(Y^n -> X^n)`.
pub fn reverse_conditional_terms(joint: &JointTable) -> Vec<f64> {
    let n = joint.n_x();
    (1..=n)
        .map(|i| {
            let h_y_given_past = joint.marginal_entropy(i - 1, i) - joint.marginal_entropy(i - 1, i - 1);
            let h_y_given_all_x = joint.marginal_entropy(n, i) - joint.marginal_entropy(n, i - 1);
            h_y_given_past - h_y_given_all_x
        })
        .collect()
}
