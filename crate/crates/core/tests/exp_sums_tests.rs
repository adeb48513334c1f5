mod common;

use num_complex::Complex64;
use siegel_lab_core::exp_sums::*;
use siegel_lab_core::quad_char::QuadChar;

fn naive_kloosterman(u1: i64, u2: i64, q: u64) -> Complex64 {
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let mut s = Complex64::new(0.0, 0.0);
    for x in 1..q {
        if gcd(x, q) != 1 {
            continue;
        }
        // brute-force inverse
        let xb = (1..q).find(|&y| x * y % q == 1).unwrap();
        let th = 2.0 * std::f64::consts::PI
            * ((u1.rem_euclid(q as i64) as u64 * x + u2.rem_euclid(q as i64) as u64 * xb) % q)
                as f64
            / q as f64;
        s += Complex64::new(th.cos(), th.sin());
    }
    s
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

#[test]
fn kloosterman_matches_naive() {
    for q in [1u64, 2, 3, 5, 12, 17, 35, 64] {
        for u1 in [0i64, 1, 3, -2] {
            for u2 in [0i64, 1, 7] {
                let fast = kloosterman(u1, u2, q);
                let slow = naive_kloosterman(u1, u2, q);
                assert!((fast - slow).norm() < 1e-9, "S({u1},{u2};{q})");
            }
        }
    }
}

#[test]
fn kloosterman_all_matches_single() {
    for q in [1u64, 6, 13, 20] {
        let all = kloosterman_all(q);
        for u1 in 0..q {
            for u2 in 0..q {
                let single = kloosterman(u1 as i64, u2 as i64, q);
                assert!(
                    (all[(u1 * q + u2) as usize] - single).norm() < 1e-9,
                    "q = {q}, ({u1},{u2})"
                );
            }
        }
    }
}

#[test]
fn kloosterman_symmetries() {
    for q in [5u64, 12, 21] {
        for u1 in 0..q {
            for u2 in 0..q {
                let a = kloosterman(u1 as i64, u2 as i64, q);
                let b = kloosterman(u2 as i64, u1 as i64, q);
                assert!((a - b).norm() < 1e-9, "swap symmetry");
                // real-valued: x ↔ -x pairs conjugate terms
                assert!(a.im.abs() < 1e-9, "S is real, got {a}");
            }
        }
    }
    // S(0,0;q) = φ(q)
    for q in 1..=50u64 {
        let s = kloosterman(0, 0, q);
        assert!((s.re - totient(q) as f64).abs() < 1e-9, "q = {q}");
    }
}

#[test]
fn kloosterman_twisted_multiplicativity() {
    // S(u,v;q1 q2) = S(u q̄2, v q̄2; q1)·S(u q̄1, v q̄1; q2), coprime moduli
    for &(q1, q2) in &[(3u64, 4u64), (5, 7), (8, 9), (4, 25)] {
        let q = q1 * q2;
        let q1_inv_mod_q2 = (1..q2).find(|&y| q1 * y % q2 == 1).unwrap();
        let q2_inv_mod_q1 = (1..q1).find(|&y| q2 * y % q1 == 1).unwrap();
        for u in 0..6i64 {
            for v in 0..6i64 {
                let lhs = kloosterman(u, v, q);
                let rhs = kloosterman(u * q2_inv_mod_q1 as i64, v * q2_inv_mod_q1 as i64, q1)
                    * kloosterman(u * q1_inv_mod_q2 as i64, v * q1_inv_mod_q2 as i64, q2);
                assert!((lhs - rhs).norm() < 1e-8, "({u},{v};{q1}·{q2})");
            }
        }
    }
}

#[test]
fn estermann_bound_exhaustive_small() {
    for q in 1..=80u64 {
        let all = kloosterman_all(q);
        for u1 in 0..q {
            for u2 in 0..q {
                let s = all[(u1 * q + u2) as usize].norm();
                let bound = estermann_bound(u1 as i64, u2 as i64, q);
                assert!(s <= bound + 1e-6, "S({u1},{u2};{q}) = {s} > {bound}");
            }
        }
    }
}

fn hyperbola_naive(
    q: u64,
    a: i64,
    f: &PeriodicWeight,
    u1: i64,
    u2: i64,
) -> Complex64 {
    let am = a.rem_euclid(q as i64) as u64;
    let mut s = Complex64::new(0.0, 0.0);
    for n1 in 0..q {
        for n2 in 0..q {
            if (n1 * n2) % q != am {
                continue;
            }
            let th = 2.0 * std::f64::consts::PI
                * ((u1.rem_euclid(q as i64) as u64 * n1
                    + u2.rem_euclid(q as i64) as u64 * n2)
                    % q) as f64
                / q as f64;
            s += f.eval(n1, n2) * Complex64::new(th.cos(), th.sin());
        }
    }
    s / (q as f64 * q as f64)
}

fn test_weight(q0: u64) -> PeriodicWeight {
    if q0 == 1 {
        return PeriodicWeight::constant_one();
    }
    let vals: Vec<Complex64> = (0..q0 * q0)
        .map(|i| {
            let th = 0.7 * i as f64;
            Complex64::new(th.cos(), th.sin()) * 0.9
        })
        .collect();
    PeriodicWeight::new(q0, vals).unwrap()
}

#[test]
fn hyperbola_coeffs_match_naive_double_loop() {
    for &(q, a, q0) in &[(6u64, 1i64, 1u64), (12, 4, 4), (15, 3, 3), (16, 8, 8)] {
        let f = test_weight(q0);
        let all = hyperbola_coeffs_all(q, a, &f).unwrap();
        for u1 in 0..q {
            for u2 in 0..q {
                let direct = hyperbola_fourier_coeff(q, a, &f, u1 as i64, u2 as i64).unwrap();
                let naive = hyperbola_naive(q, a, &f, u1 as i64, u2 as i64);
                assert!((direct - naive).norm() < 1e-10, "q={q} u=({u1},{u2})");
                assert!(
                    (all[(u1 * q + u2) as usize] - naive).norm() < 1e-10,
                    "all q={q} u=({u1},{u2})"
                );
            }
        }
    }
}

#[test]
fn hyperbola_coeff_bound_holds() {
    for &(q, a, q0) in &[(12u64, 4i64, 4u64), (30, 6, 6), (36, 9, 9)] {
        let f = test_weight(q0);
        let all = hyperbola_coeffs_all(q, a, &f).unwrap();
        for u1 in 0..q {
            for u2 in 0..q {
                let c = all[(u1 * q + u2) as usize].norm();
                let bound = hyperbola_coeff_bound(q, q0, u1 as i64, u2 as i64);
                assert!(c <= bound + 1e-9, "q={q} u=({u1},{u2}): {c} > {bound}");
            }
        }
    }
}

#[test]
fn hyperbola_preconditions() {
    let f = test_weight(4);
    assert!(hyperbola_fourier_coeff(10, 1, &f, 0, 0).is_err()); // 4 ∤ 10
    assert!(hyperbola_fourier_coeff(12, 6, &f, 0, 0).is_err()); // (6,12) = 6 ∤ 4
    let too_big = PeriodicWeight::new(2, vec![Complex64::new(2.0, 0.0); 4]);
    assert!(too_big.is_err());
}

#[test]
fn mfe_expansion_identity_grid() {
    // ≥ 50 configurations, including non-coprime a: exact pointwise identity
    // and coefficient vanishing at frequencies divisible by q/q0
    let mut configs = 0u32;
    for &q in &[6u64, 8, 12, 15, 16, 18, 20, 24, 30] {
        for &q0_div in &[1u64, 2, 3, 4, 6] {
            if q % q0_div != 0 {
                continue;
            }
            let q0 = q0_div;
            for a in [1i64, 2, 3, 4, 6, 8] {
                let g = gcd(a.rem_euclid(q as i64) as u64, q);
                if q0 % g != 0 {
                    continue;
                }
                let f = test_weight(q0);
                let dec = mfe_decompose(q, a, &f).unwrap();
                configs += 1;
                // pointwise identity over every residue pair
                for n1 in 0..q {
                    for n2 in 0..q {
                        let lhs = if (n1 * n2) % q == a.rem_euclid(q as i64) as u64 {
                            f.eval(n1, n2)
                        } else {
                            Complex64::new(0.0, 0.0)
                        };
                        let rhs = dec.rhs(&f, n1, n2);
                        assert!(
                            (lhs - rhs).norm() < 1e-9,
                            "q={q} a={a} q0={q0} n=({n1},{n2}): {lhs} vs {rhs}"
                        );
                    }
                }
                // vanishing + bound on the residual coefficients
                let step = q / dec.q0;
                for u1 in 0..q {
                    for u2 in 0..q {
                        let c = dec.coeffs[(u1 * q + u2) as usize];
                        if u1 % step == 0 || u2 % step == 0 {
                            assert!(
                                c.norm() < 1e-10,
                                "q={q} a={a} q0={q0}: c({u1},{u2}) = {c} should vanish"
                            );
                        }
                        assert!(
                            c.norm() <= dec.coeff_bound(u1 as i64, u2 as i64) + 1e-9,
                            "q={q} a={a} q0={q0}: coefficient bound fails at ({u1},{u2})"
                        );
                    }
                }
            }
        }
    }
    assert!(configs >= 50, "only {configs} configurations");
}

#[test]
fn mfe_alpha_matches_averaged_indicator() {
    // α·q0'/q must equal the density of the residue system it replaces:
    // E_{a' ∈ A} 1_{n≡a' (q)} = (α q0'/q)·1_{n≡a (q0')}·1_{(n,q)=(a,q)}
    for &(q, a, q0) in &[(12u64, 4i64, 4u64), (30, 6, 6), (24, 8, 8), (18, 3, 3)] {
        let f = test_weight(q0);
        let dec = mfe_decompose(q, a, &f).unwrap();
        let am = a.rem_euclid(q as i64) as u64;
        let g_a = gcd(am, q);
        // A = { a' mod q : a' ≡ a (q0'), (a', q) = (a, q) }
        let a_set: Vec<u64> = (1..=q)
            .map(|r| r % q)
            .filter(|&r| r % dec.q0_prime == am % dec.q0_prime && gcd(r, q) == g_a)
            .collect();
        assert!(!a_set.is_empty());
        for n in 0..q {
            let avg = a_set.iter().filter(|&&r| n % q == r).count() as f64 / a_set.len() as f64;
            let main = if n % dec.q0_prime == am % dec.q0_prime && gcd(n, q) == g_a {
                dec.alpha * dec.q0_prime as f64 / q as f64
            } else {
                0.0
            };
            assert!(
                (avg - main).abs() < 1e-12,
                "q={q} a={a} q0={q0} n={n}: {avg} vs {main}"
            );
        }
    }
}

#[test]
fn char_shift_sum_direct_loop() {
    let chi = QuadChar::new(-7).unwrap();
    let x = 5_000u64;
    let factors = [
        ShiftFactor { d: 6, h: 0, d_prime: Some(3) },
        ShiftFactor { d: 5, h: 2, d_prime: None },
    ];
    let got = char_shift_sum(&chi, &factors, (1, x), x).unwrap();
    let mut expect = 0.0f64;
    for n in 1..=x {
        if n % 6 == 0 && (n + 2) % 5 == 0 {
            expect += chi.eval(n / 3) as f64;
        }
    }
    expect /= x as f64;
    assert!((got.value - expect).abs() < 1e-12, "{} vs {expect}", got.value);
    assert!(got.skeleton > 0.0);
}

#[test]
fn char_shift_sum_incompatible_is_zero() {
    let chi = QuadChar::new(-7).unwrap();
    let factors = [
        ShiftFactor { d: 2, h: 0, d_prime: Some(2) },
        ShiftFactor { d: 2, h: 1, d_prime: None },
    ];
    let got = char_shift_sum(&chi, &factors, (1, 1000), 1000).unwrap();
    assert_eq!(got.value, 0.0);
}

#[test]
fn char_shift_sum_weil_interval_scan() {
    // |E| should sit well under the skeleton times a modest constant over
    // many intervals (qualitative square-root cancellation check)
    let chi = QuadChar::new(-163).unwrap();
    let x = 200_000u64;
    let factors = [ShiftFactor { d: 1, h: 0, d_prime: Some(1) }];
    let mut worst_ratio = 0.0f64;
    for k in 0..10 {
        let lo = k * 20_000 + 1;
        let hi = (k + 1) * 20_000;
        let got = char_shift_sum(&chi, &factors, (lo, hi), x).unwrap();
        worst_ratio = worst_ratio.max(got.value.abs() / got.skeleton);
    }
    assert!(worst_ratio < 30.0, "worst ratio {worst_ratio}");
}

#[test]
fn char_shift_sum_preconditions() {
    let chi = QuadChar::new(-7).unwrap();
    // no χ-twisted factor
    let factors = [ShiftFactor { d: 2, h: 0, d_prime: None }];
    assert!(char_shift_sum(&chi, &factors, (1, 10), 10).is_err());
    // d' must divide d
    let factors = [ShiftFactor { d: 4, h: 0, d_prime: Some(3) }];
    assert!(char_shift_sum(&chi, &factors, (1, 10), 10).is_err());
}
