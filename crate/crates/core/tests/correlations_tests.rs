mod common;

use siegel_lab_core::approximants::{ScaleOverrides, SiegelParams};
use siegel_lab_core::correlations::*;
use siegel_lab_core::quad_char::{quality_proxy, QuadChar};

#[test]
fn beta_p_examples() {
    // residues of {0,1} cover Z/2Z: parity obstruction
    assert_eq!(beta_p(&[0, 1], 2).unwrap(), 0.0);
    // (1-1/3)^{-2}(1-2/3) = (9/4)(1/3) = 3/4
    assert!((beta_p(&[0, 2], 3).unwrap() - 0.75).abs() < 1e-15);
    // empty product
    assert_eq!(beta_p(&[], 7).unwrap(), 1.0);
    // k=1: (1-1/p)^{-1}(1-1/p) = 1
    for p in [2u64, 3, 97] {
        assert!((beta_p(&[5], p).unwrap() - 1.0).abs() < 1e-15);
    }
}

#[test]
fn singular_series_twin_constant() {
    let (v, tail) = singular_series(&[0, 2], 1_000_000).unwrap();
    assert!((v - 1.3203236316).abs() < 1e-5, "{v}");
    assert!(tail > 0.0 && tail < 1e-4);
    // parity obstruction
    let (v0, t0) = singular_series(&[0, 1], 1000).unwrap();
    assert_eq!((v0, t0), (0.0, 0.0));
    // cutoff precondition
    assert!(singular_series(&[0, 2000], 100).is_err());
}

#[test]
fn singular_series_enclosures_nest() {
    let h = [0u64, 2];
    let (v1, t1) = singular_series(&h, 10_000).unwrap();
    let (v2, t2) = singular_series(&h, 100_000).unwrap();
    let (v3, t3) = singular_series(&h, 1_000_000).unwrap();
    assert!(t1 > t2 && t2 > t3);
    // every enclosure must contain the best value
    for (v, t) in [(v1, t1), (v2, t2)] {
        assert!(v3 > v - t && v3 < v + t);
    }
}

#[test]
fn singular_series_translation_invariant() {
    for shift in [1u64, 5, 30] {
        let (a, _) = singular_series(&[0, 2, 6], 10_000).unwrap();
        let (b, _) = singular_series(&[shift, 2 + shift, 6 + shift], 10_000).unwrap();
        assert!((a - b).abs() < 1e-12, "shift {shift}: {a} vs {b}");
    }
}

#[test]
fn crt_merge_examples() {
    assert_eq!(crt_merge(&[(2, 0), (2, 1)]), None);
    // n ≡ 0 (2) and n ≡ -1 ≡ 2 (3) → n ≡ 2 (6)
    assert_eq!(crt_merge(&[(2, 0), (3, 1)]), Some((2, 6)));
    assert_eq!(crt_merge(&[(7, 3)]), Some((4, 7)));
    assert_eq!(crt_merge(&[]), Some((0, 1)));
    // non-coprime compatible moduli
    assert_eq!(crt_merge(&[(4, 1), (6, 3)]), Some((3, 12)));
}

#[test]
fn crt_merge_brute_force() {
    let configs: Vec<Vec<(u64, u64)>> = vec![
        vec![(2, 0), (3, 2), (5, 1)],
        vec![(4, 2), (6, 0)],
        vec![(4, 1), (6, 0)],
        vec![(9, 4), (12, 7)],
        vec![(8, 3), (12, 7), (5, 0)],
    ];
    for pairs in configs {
        let l: u64 = pairs.iter().fold(1, |acc, &(d, _)| acc / gcd(acc, d) * d);
        let solutions: Vec<u64> = (0..l)
            .filter(|&n| pairs.iter().all(|&(d, h)| (n + h) % d == 0))
            .collect();
        match crt_merge(&pairs) {
            None => assert!(solutions.is_empty(), "{pairs:?}"),
            Some((a, d)) => {
                assert_eq!(d, l, "{pairs:?}");
                assert_eq!(solutions, vec![a], "{pairs:?}");
            }
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn correlate_naive_oracle_liouville() {
    let x = 10_000u64;
    let got = correlate(x, &[(Factor::Liouville, 0), (Factor::Liouville, 1)]).unwrap();
    let mut expect = 0.0f64;
    for n in 1..=x {
        expect += common::oracle_lambda(n) as f64 * common::oracle_lambda(n + 1) as f64;
    }
    expect /= x as f64;
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

#[test]
fn correlate_all_ones_is_exactly_one() {
    assert_eq!(correlate(100_000, &[(Factor::One, 0), (Factor::One, 5)]).unwrap(), 1.0);
    assert_eq!(correlate(17, &[]).unwrap(), 1.0);
}

#[test]
fn correlate_chebyshev_average() {
    let v = correlate(1_000_000, &[(Factor::Mangoldt, 0)]).unwrap();
    assert!((v - 0.9983).abs() < 0.005, "{v}");
}

#[test]
fn correlate_linear_in_each_factor() {
    // E (λ+μ)(n) g(n+1) = E λ g + E μ g at x = 10⁴
    let x = 10_000u64;
    let a = correlate(x, &[(Factor::Liouville, 0), (Factor::Tau, 1)]).unwrap();
    let b = correlate(x, &[(Factor::Mu, 0), (Factor::Tau, 1)]).unwrap();
    // sum factor (λ+μ) via direct loop
    let mut expect = 0.0f64;
    for n in 1..=x {
        expect += (common::oracle_lambda(n) as f64 + common::oracle_mu(n) as f64)
            * common::oracle_tau(n + 1) as f64;
    }
    expect /= x as f64;
    assert!((a + b - expect).abs() < 1e-9, "{} vs {expect}", a + b);
}

#[test]
fn correlate_windowing_invariance() {
    // window size must not change the value bitwise... it is part of the
    // configuration, so different sizes may differ in the last ulp; equal
    // configurations must agree exactly
    let factors = [(Factor::Liouville, 0u64), (Factor::Liouville, 2)];
    let a = correlate_windowed(300_000, &factors, 1 << 16).unwrap();
    let b = correlate_windowed(300_000, &factors, 1 << 16).unwrap();
    assert_eq!(a.to_bits(), b.to_bits());
    let c = correlate_windowed(300_000, &factors, 1 << 12).unwrap();
    assert!((a - c).abs() < 1e-10);
}

#[test]
fn correlate_deterministic_across_thread_counts() {
    let factors = [(Factor::Mangoldt, 0u64), (Factor::Mangoldt, 2)];
    let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let a = pool1.install(|| correlate_windowed(400_000, &factors, 1 << 16).unwrap());
    let b = pool8.install(|| correlate_windowed(400_000, &factors, 1 << 16).unwrap());
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn siegel_factors_window_against_per_n() {
    let chi = QuadChar::new(-7).unwrap();
    let r = 20.0;
    let f = Factor::lambda_siegel(r, &chi);
    let arr = f.window(1000, 2000).unwrap();
    for n in 1000..=2000u64 {
        let direct = siegel_lab_core::approximants::lambda_siegel(n, r, &chi) as f64;
        assert_eq!(arr[(n - 1000) as usize], direct, "n = {n}");
    }
    let f = Factor::mangoldt_siegel(r, &chi).unwrap();
    let arr = f.window(1, 1500).unwrap();
    for n in 1..=1500u64 {
        let direct = siegel_lab_core::approximants::mangoldt_siegel(n, r, &chi);
        assert!(
            (arr[(n - 1) as usize] - direct).abs() < 1e-9,
            "mangoldt_siegel n = {n}"
        );
    }
}

#[test]
fn mangoldt_sharp_factor_window_against_per_n() {
    let chi = QuadChar::new(-3).unwrap();
    let eta = quality_proxy(&chi, Some(50.0)).unwrap();
    let params = SiegelParams::new(
        100_000,
        2,
        0,
        0.5,
        eta,
        ScaleOverrides {
            r: Some(50.0),
            d: Some(10.0),
            r0: Some(50.0),
        },
    )
    .unwrap();
    let f = Factor::mangoldt_sharp(&params, &chi, 1e-10, 100_000).unwrap();
    let arr = f.window(80, 400).unwrap();
    for n in (80..=400u64).step_by(7) {
        let direct =
            siegel_lab_core::approximants::mangoldt_sharp(n, &params, &chi, 1e-11).unwrap();
        assert!(
            (arr[(n - 80) as usize] - direct).abs() < 1e-6,
            "n = {n}: {} vs {direct}",
            arr[(n - 80) as usize]
        );
    }
}

#[test]
fn ld_scan_additive_over_partition() {
    let chi = QuadChar::new(-3).unwrap();
    let eta = quality_proxy(&chi, Some(50.0)).unwrap();
    let params = SiegelParams::new(
        10_000,
        2,
        0,
        0.5,
        eta,
        ScaleOverrides {
            r: Some(30.0),
            d: Some(10.0),
            r0: Some(30.0),
        },
    )
    .unwrap();
    let whole =
        level_of_distribution_scan(&params, &chi, 7, 3, (1, 600), None, 1e-9).unwrap();
    let left =
        level_of_distribution_scan(&params, &chi, 7, 3, (1, 300), None, 1e-9).unwrap();
    let right =
        level_of_distribution_scan(&params, &chi, 7, 3, (301, 600), None, 1e-9).unwrap();
    assert!(
        (whole.sum - left.sum - right.sum).abs() < 1e-10,
        "{} vs {} + {}",
        whole.sum,
        left.sum,
        right.sum
    );
    assert_eq!(whole.terms, left.terms + right.terms);
    // q = 1 cross-check against per-n flat evaluation
    let q1 = level_of_distribution_scan(&params, &chi, 1, 0, (1, 150), None, 1e-10).unwrap();
    let mut expect = 0.0f64;
    for n in 1..=150u64 {
        expect += siegel_lab_core::approximants::chi_log_flat(n, &params, &chi, 1e-10).unwrap();
    }
    assert!((q1.sum - expect).abs() < 1e-8, "{} vs {expect}", q1.sum);
}
