mod common;

use causal_gamble::causal_info::{
    causal_conditional_pmf, causal_entropy, causal_entropy_lookahead, directed_information,
    directed_information_lookahead, mutual_information, reverse_conditional_terms,
};
use causal_gamble::joint::decode;
use causal_gamble::{Budget, ProcessSpec};
use common::*;
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn matches_reference_sums(seed in any::<u64>(), n in 1usize..=3) {
        let spec = random_spec(&mut rng(seed), n);
        let joint = spec.joint_pmf(n).unwrap();
        let r = directed_information(&joint).unwrap();
        prop_assert!((r.directed_info - naive_directed_information(&joint)).abs() < TOL);
        prop_assert!((r.h_causal - naive_causal_entropy(&joint, 0)).abs() < TOL);
        prop_assert!((r.mutual_info - naive_mutual_information(&joint)).abs() < TOL);
        prop_assert!((r.h_xn - prefix_entropy(&joint, n, 0)).abs() < TOL);
    }

    #[test]
    fn nonnegative_and_below_mutual_information(seed in any::<u64>(), n in 1usize..=3) {
        let spec = random_spec(&mut rng(seed), n);
        let joint = spec.joint_pmf(n).unwrap();
        let r = directed_information(&joint).unwrap();
        prop_assert!(r.directed_info >= -TOL);
        prop_assert!(r.per_step.iter().all(|&t| t >= -TOL));
        prop_assert!(r.directed_info <= r.mutual_info + TOL);
        prop_assert!(r.h_causal <= r.h_xn + TOL);
    }

    #[test]
    fn conservation_of_information(seed in any::<u64>(), n in 1usize..=3) {
        // H(X^n, Y^n) = H(X^n || Y^n) + H(Y^n || X^{n-1})
        let spec = random_spec(&mut rng(seed), n);
        let joint = spec.joint_pmf(n).unwrap();
        let total = prefix_entropy(&joint, n, n);
        let split = causal_entropy(&joint) + naive_reverse_causal_entropy(&joint);
        prop_assert!((total - split).abs() < TOL);
        // I(X^n; Y^n) = I(Y^n -> X^n) + I(X^{n-1} -> Y^n)
        let forward = directed_information(&joint).unwrap().directed_info;
        let backward = prefix_entropy(&joint, 0, n) - naive_reverse_causal_entropy(&joint);
        prop_assert!((mutual_information(&joint) - forward - backward).abs() < TOL);
    }

    #[test]
    fn reverse_terms_sum_to_directed_information(seed in any::<u64>(), n in 1usize..=3) {
        let spec = random_spec(&mut rng(seed), n);
        let joint = spec.joint_pmf(n).unwrap();
        let di = directed_information(&joint).unwrap().directed_info;
        let terms: f64 = reverse_conditional_terms(&joint).iter().sum();
        prop_assert!((terms - di).abs() < TOL);
    }

    #[test]
    fn iid_pairs_collapse_to_single_letter(seed in any::<u64>(), n in 1usize..=4) {
        let mut r = rng(seed);
        let sparse = r.random_bool(0.3);
        let spec = random_iid_spec(&mut r, 2, 3, sparse);
        let one = directed_information(&spec.joint_pmf(1).unwrap()).unwrap();
        let many = directed_information(&spec.joint_pmf(n).unwrap()).unwrap();
        let nf = n as f64;
        prop_assert!((many.directed_info - nf * one.mutual_info).abs() < TOL);
        prop_assert!((many.mutual_info - nf * one.mutual_info).abs() < TOL);
        prop_assert!((many.h_causal - nf * one.h_causal).abs() < TOL);
    }

    #[test]
    fn lookahead_is_monotone(seed in any::<u64>(), n in 1usize..=2) {
        let spec = random_spec(&mut rng(seed), n + 2);
        let mut previous = directed_information(&spec.joint_pmf(n).unwrap()).unwrap().directed_info;
        for k in 1..=2 {
            let joint = spec.joint_pmf_lookahead(n, k, Budget::default()).unwrap();
            let ahead = directed_information_lookahead(&joint, k).unwrap();
            prop_assert!((causal_entropy_lookahead(&joint, k) - naive_causal_entropy(&joint, k)).abs() < TOL);
            prop_assert!(ahead >= previous - TOL);
            previous = ahead;
        }
    }

    #[test]
    fn causal_conditioning_factorizes(seed in any::<u64>(), n in 1usize..=3) {
        // p(x^n, y^n) = p(x^n || y^n) p(y^n || x^{n-1}), and p(. || y^n) sums to one
        let spec = random_spec(&mut rng(seed), n);
        let joint = spec.joint_pmf(n).unwrap();
        let fwd = causal_conditional_pmf(&joint, 0).unwrap();
        let back = causal_conditional_pmf(&joint.transposed(), 1).unwrap();
        let (xs, ys) = (joint.x_size(), joint.y_size());
        for ynum in 0..ys.pow(n as u32) {
            let y = decode(ynum, ys, n);
            let mut total = 0.0;
            let mut all_defined = true;
            for xnum in 0..xs.pow(n as u32) {
                let x = decode(xnum, xs, n);
                let p = joint.prob(&x, &y);
                match (fwd.get(&x, &y), back.get(&y, &x[..n - 1])) {
                    (Some(f), Some(b)) => {
                        prop_assert!((f * b - p).abs() < TOL);
                        total += f;
                    }
                    (f, _) => {
                        prop_assert!(p == 0.0);
                        all_defined &= f.is_some();
                        total += f.unwrap_or(0.0);
                    }
                }
            }
            if all_defined {
                prop_assert!((total - 1.0).abs() < TOL);
            }
        }
    }
}

#[test]
fn markov_example_finite_horizon_formula() {
    // (1/n) I(Y^n -> X^n) = h(p*q) - h(q) + (1 - h(p*q)) / n for the uniform start
    for &(p, q) in &[(0.2, 0.25), (0.1, 0.05), (0.35, 0.4), (0.2, 0.0)] {
        let spec = ProcessSpec::markov_bsc(p, q).unwrap();
        let pq = (1.0 - p) * q + (1.0 - q) * p;
        let limit = h2(pq) - h2(q);
        let mut previous = f64::INFINITY;
        for n in 1..=8 {
            let di = directed_information(&spec.joint_pmf(n).unwrap()).unwrap().directed_info / n as f64;
            let expected = limit + (1.0 - h2(pq)) / n as f64;
            assert!((di - expected).abs() < TOL, "p={p} q={q} n={n}: {di} vs {expected}");
            assert!(di <= previous + TOL);
            previous = di;
        }
    }
}

#[test]
fn independent_pairs_carry_no_directed_information() {
    let spec = ProcessSpec::iid_from_rows(&[vec![0.42, 0.28], vec![0.18, 0.12]]).unwrap();
    for n in 1..=5 {
        let r = directed_information(&spec.joint_pmf(n).unwrap()).unwrap();
        assert!(r.directed_info.abs() < 1e-12);
        assert!(r.mutual_info.abs() < 1e-12);
    }
}
