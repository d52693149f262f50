//! Random instances and brute-force reference computations shared by the
//! integration tests. The references sum over joint cells with hash maps and
//! never touch the library's marginal code.

#![allow(dead_code)]

use std::collections::HashMap;

use causal_gamble::gambling::OddsModel;
use causal_gamble::{JointTable, ProcessSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pmf; with `sparse`, some entries are zeroed.
pub fn random_pmf<R: Rng>(rng: &mut R, len: usize, sparse: bool) -> Vec<f64> {
    loop {
        let mut w: Vec<f64> = (0..len)
            .map(|_| {
                if sparse && rng.random_bool(0.2) {
                    0.0
                } else {
                    -(1.0 - rng.random::<f64>()).ln()
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            w.iter_mut().for_each(|v| *v /= total);
            let fix = 1.0 - w.iter().sum::<f64>();
            if let Some(max) = w.iter_mut().max_by(|a, b| a.total_cmp(b)) {
                *max += fix;
            }
            return w;
        }
    }
}

pub fn random_markov_spec<R: Rng>(rng: &mut R, xs: usize, ys: usize, sparse: bool) -> ProcessSpec {
    let pairs = xs * ys;
    let initial = random_pmf(rng, pairs, sparse);
    let transition = (0..pairs).map(|_| random_pmf(rng, pairs, sparse)).collect();
    ProcessSpec::markov(xs, ys, initial, transition).unwrap()
}

pub fn random_iid_spec<R: Rng>(rng: &mut R, xs: usize, ys: usize, sparse: bool) -> ProcessSpec {
    ProcessSpec::iid_pair(xs, ys, random_pmf(rng, xs * ys, sparse)).unwrap()
}

/// Arbitrary law over `n` steps, no Markov structure.
pub fn random_history_spec<R: Rng>(rng: &mut R, xs: usize, ys: usize, n: usize, sparse: bool) -> ProcessSpec {
    let cells = (xs * ys).pow(n as u32);
    let table = JointTable::new(xs, ys, n, n, random_pmf(rng, cells, sparse)).unwrap();
    ProcessSpec::from_history(table).unwrap()
}

/// One of the three spec families with alphabet sizes in 2..=3.
pub fn random_spec<R: Rng>(rng: &mut R, n: usize) -> ProcessSpec {
    let xs = rng.random_range(2..=3);
    let ys = rng.random_range(2..=3);
    let sparse = rng.random_bool(0.3);
    match rng.random_range(0..3) {
        0 => random_iid_spec(rng, xs, ys, sparse),
        1 => random_markov_spec(rng, xs, ys, sparse),
        _ => random_history_spec(rng, xs, ys, n, sparse),
    }
}

pub fn random_odds<R: Rng>(rng: &mut R, m: usize) -> OddsModel {
    match rng.random_range(0..3) {
        0 => OddsModel::uniform_fair(m),
        1 => OddsModel::constant((0..m).map(|_| rng.random_range(0.5..6.0)).collect()).unwrap(),
        _ => {
            let initial = (0..m).map(|_| rng.random_range(0.5..6.0)).collect();
            let after = (0..m)
                .map(|_| (0..m).map(|_| rng.random_range(0.5..6.0)).collect())
                .collect();
            OddsModel::markov(initial, after).unwrap()
        }
    }
}

fn entropy_of(map: &HashMap<Vec<usize>, f64>) -> f64 {
    map.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// `H` of the marginal on `x^a, y^b`, by hashing prefixes.
pub fn prefix_entropy(joint: &JointTable, a: usize, b: usize) -> f64 {
    let mut map: HashMap<Vec<usize>, f64> = HashMap::new();
    for (x, y, p) in joint.cells() {
        let mut key = x[..a].to_vec();
        key.push(usize::MAX);
        key.extend_from_slice(&y[..b]);
        *map.entry(key).or_default() += p;
    }
    entropy_of(&map)
}

/// `sum_i H(X_i | X^{i-1}, Y^{min(i+k, n_y)})`.
pub fn naive_causal_entropy(joint: &JointTable, k: usize) -> f64 {
    (1..=joint.n_x())
        .map(|i| {
            let b = (i + k).min(joint.n_y());
            prefix_entropy(joint, i, b) - prefix_entropy(joint, i - 1, b)
        })
        .sum()
}

/// `sum_i I(X_i; Y^i | X^{i-1})` summed as log-ratios over cells.
pub fn naive_directed_information(joint: &JointTable) -> f64 {
    let n = joint.n_x();
    let mut total = 0.0;
    for i in 1..=n {
        let mut xy: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
        let mut pxy: HashMap<(Vec<usize>, Vec<usize>), f64> = HashMap::new();
        let mut x: HashMap<Vec<usize>, f64> = HashMap::new();
        let mut px: HashMap<Vec<usize>, f64> = HashMap::new();
        for (xv, yv, p) in joint.cells() {
            *xy.entry((xv[..i].to_vec(), yv[..i].to_vec())).or_default() += p;
            *pxy.entry((xv[..i - 1].to_vec(), yv[..i].to_vec())).or_default() += p;
            *x.entry(xv[..i].to_vec()).or_default() += p;
            *px.entry(xv[..i - 1].to_vec()).or_default() += p;
        }
        for ((xv, yv), &p) in &xy {
            if p <= 0.0 {
                continue;
            }
            let past = xv[..i - 1].to_vec();
            let ratio = p * px[&past] / (pxy[&(past, yv.clone())] * x[xv]);
            total += p * ratio.log2();
        }
    }
    total
}

pub fn naive_mutual_information(joint: &JointTable) -> f64 {
    prefix_entropy(joint, joint.n_x(), 0) + prefix_entropy(joint, 0, joint.n_y())
        - prefix_entropy(joint, joint.n_x(), joint.n_y())
}

/// `H(X^n, Y^n)` split as `H(X^n || Y^n) + H(Y^n || X^{n-1})`.
pub fn naive_reverse_causal_entropy(joint: &JointTable) -> f64 {
    (1..=joint.n_y())
        .map(|i| prefix_entropy(joint, i - 1, i) - prefix_entropy(joint, i - 1, i - 1))
        .sum()
}

/// Binary entropy in bits.
pub fn h2(x: f64) -> f64 {
    let t = |v: f64| if v > 0.0 { -v * v.log2() } else { 0.0 };
    t(x) + t(1.0 - x)
}

/// Best single-race growth over a `1e-4` grid of cash fractions; for each
/// cash level the bets solve the separable inner problem by bisection on its
/// multiplier.
pub fn kelly_grid_oracle(p: &[f64], o: &[f64]) -> f64 {
    let growth = |c: f64, b: &[f64]| -> f64 {
        p.iter()
            .zip(o)
            .zip(b)
            .filter(|((&pi, _), _)| pi > 0.0)
            .map(|((&pi, &oi), &bi)| pi * (c + bi * oi).log2())
            .sum()
    };
    let mut best = f64::NEG_INFINITY;
    for i in 0..=10_000 {
        let c = i as f64 / 10_000.0;
        let bets = if c == 0.0 {
            p.to_vec()
        } else {
            let alloc = |lambda: f64| -> Vec<f64> {
                p.iter().zip(o).map(|(&pi, &oi)| (pi / lambda - c / oi).max(0.0)).collect()
            };
            let hi0 = p.iter().zip(o).map(|(a, b)| a * b).fold(0.0, f64::max) / c;
            let (mut lo, mut hi) = (1e-12_f64, hi0.max(1e-12));
            for _ in 0..80 {
                let mid = (lo * hi).sqrt();
                if alloc(mid).iter().sum::<f64>() > 1.0 - c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            alloc(hi)
        };
        best = best.max(growth(c, &bets));
    }
    best
}

/// `E[log2 S]` summed path by path, wealth multiplied out along each path.
pub fn path_growth(
    joint: &JointTable,
    allocation: impl Fn(usize, &[usize], &[usize]) -> (f64, Vec<f64>),
    odds: impl Fn(usize, &[usize]) -> Vec<f64>,
) -> f64 {
    let mut total = 0.0;
    for (x, y, p) in joint.cells() {
        if p <= 0.0 {
            continue;
        }
        let mut wealth = 1.0;
        for i in 1..=x.len() {
            let (cash, bets) = allocation(i, &x[..i - 1], &y[..i]);
            let o = odds(i, &x[..i - 1]);
            wealth *= cash + bets[x[i - 1]] * o[x[i - 1]];
        }
        total += p * wealth.log2();
    }
    total
}
