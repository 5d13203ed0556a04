//! Exact results against an independent brute-force count of index tuples.

use num_bigint::BigUint;
use tractability::exact::{exact_cardinality, Method};
use tractability::spectrum::SpectrumSpec;

#[derive(Debug, PartialEq)]
struct Brute {
    n_min: usize,
    card_a: usize,
    level: f64,
}

/// Sorted products of every tuple; `lambdas` must already carry all mass that matters.
fn brute(lambdas: &[f64], total: f64, d: usize, eps2: f64) -> Brute {
    let mut products = vec![1.0f64];
    for _ in 0..d {
        products = products
            .iter()
            .flat_map(|p| lambdas.iter().map(move |l| p * l * l))
            .collect();
    }
    products.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let norm = total.powi(d as i32);
    let tol = 1e-11;
    let mut tail = 1.0;
    for (i, p) in products.iter().enumerate() {
        tail -= p / norm;
        if tail <= eps2 + tol {
            let level = *p;
            let same = |q: &f64| (q - level).abs() <= 1e-12 * level;
            let card_a = products.iter().take_while(|q| **q >= level || same(q)).count();
            return Brute {
                n_min: i + 1,
                card_a,
                level: level.sqrt(),
            };
        }
    }
    unreachable!("the full mass is reached");
}

fn check(spec: &SpectrumSpec, lambdas: &[f64], total: f64, d: usize, eps: f64) {
    let want = brute(lambdas, total, d, eps * eps);
    for method in [Method::Enumerative, Method::Convolution] {
        let got = exact_cardinality::<f64>(spec, d, eps, method).unwrap();
        assert_eq!(got.n_min, BigUint::from(want.n_min), "{method} d={d} eps={eps}");
        assert_eq!(got.card_a, BigUint::from(want.card_a), "{method} d={d} eps={eps}");
        assert!((got.zeta_value() - want.level).abs() <= 1e-12 * want.level, "{method} d={d} eps={eps}");
    }
}

#[test]
fn finite_lists_match_brute_force() {
    let lists: [&[f64]; 3] = [&[1.0, 0.6, 0.3], &[0.9, 0.5, 0.5, 0.2], &[1.0, 0.7, 0.45, 0.3, 0.1]];
    for lambdas in lists {
        let spec = SpectrumSpec::explicit(lambdas.to_vec());
        let total: f64 = lambdas.iter().map(|l| l * l).sum();
        for d in 1..=4 {
            for eps in [0.1, 0.3, 0.5, 0.8] {
                check(&spec, lambdas, total, d, eps);
            }
        }
    }
}

#[test]
fn geometric_matches_brute_force() {
    // 2^-i for i <= 40 leaves at most 40 * 2^-40 of the mass outside, below every threshold used
    let lambdas: Vec<f64> = (1..=40).map(|i| 0.5f64.powi(i).sqrt()).collect();
    let spec = SpectrumSpec::catalog("geometric_half");
    for d in 1..=3 {
        for eps in [0.2, 0.5, 0.7] {
            check(&spec, &lambdas, 1.0, d, eps);
        }
    }
}

#[test]
fn hand_instances() {
    let spec = SpectrumSpec::catalog("geometric_half");
    let one = exact_cardinality::<f64>(&spec, 1, 0.5, Method::Convolution).unwrap();
    assert_eq!(one.n_min, BigUint::from(2u32));
    assert!(one.theta.abs() < 1e-12);
    let two = exact_cardinality::<f64>(&spec, 2, 0.5, Method::Convolution).unwrap();
    assert_eq!(two.card_a, BigUint::from(10u32));
    assert_eq!(two.n_min, BigUint::from(8u32));
    assert!((two.tail_mass - 0.1875).abs() < 1e-15);
}
