//! Shared independent oracles: trial-division arithmetic functions and
//! class-number / fundamental-unit enumeration for the class number formula.
#![allow(dead_code)]

pub fn trial_factor(n: u64) -> Vec<(u64, u32)> {
    let mut n = n;
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn oracle_lambda(n: u64) -> i8 {
    let omega: u32 = trial_factor(n).iter().map(|&(_, e)| e).sum();
    if omega % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn oracle_mu(n: u64) -> i8 {
    let f = trial_factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn oracle_tau(n: u64) -> u32 {
    trial_factor(n).iter().map(|&(_, e)| e + 1).product()
}

pub fn oracle_mangoldt(n: u64) -> f64 {
    let f = trial_factor(n);
    if f.len() == 1 {
        (f[0].0 as f64).ln()
    } else {
        0.0
    }
}

fn isqrt_u128(n: u128) -> u128 {
    if n == 0 {
        return 0;
    }
    let mut x = (n as f64).sqrt() as u128 + 2;
    while x * x > n {
        x -= 1;
    }
    x
}

/// h(Δ) for Δ < 0 by counting reduced positive-definite forms
/// (a,b,c), b² − 4ac = Δ, |b| ≤ a ≤ c, with b ≥ 0 when |b| = a or a = c.
pub fn class_number_neg(delta: i64) -> u64 {
    assert!(delta < 0 && (delta % 4 == 0 || delta.rem_euclid(4) == 1));
    let d = -delta;
    let mut h = 0u64;
    let a_max = ((d as f64 / 3.0).sqrt()) as i64 + 1;
    for a in 1..=a_max {
        for b in -a + 1..=a {
            let num = b * b + d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a {
                continue;
            }
            if (b < 0) && (b.abs() == a || a == c) {
                continue;
            }
            h += 1;
        }
    }
    h
}

/// Unit-count w for the imaginary quadratic order of discriminant Δ.
pub fn unit_count_neg(delta: i64) -> u64 {
    match delta {
        -3 => 6,
        -4 => 4,
        _ => 2,
    }
}

/// Narrow class number h⁺(Δ) for Δ > 0 by counting ρ-cycles of reduced
/// indefinite forms: (a,b,c) with b² − 4ac = Δ and |√Δ − 2|a|| < b < √Δ.
pub fn narrow_class_number_pos(delta: i64) -> u64 {
    assert!(delta > 0);
    let sqrt_d = (delta as f64).sqrt();
    let b_max = sqrt_d.floor() as i64;
    let mut reduced: Vec<(i64, i64, i64)> = Vec::new();
    for b in 1..=b_max {
        if (b * b - delta) % 2 != 0 {
            continue; // b must have the parity of Δ
        }
        let ac4 = b * b - delta; // negative
        if ac4 % 4 != 0 {
            continue;
        }
        let ac = ac4 / 4;
        // enumerate divisors a of ac (both signs); c = ac / a
        let mag = (-ac) as u64;
        let mut divs = Vec::new();
        let mut t = 1u64;
        while t * t <= mag {
            if mag % t == 0 {
                divs.push(t);
                divs.push(mag / t);
            }
            t += 1;
        }
        divs.sort_unstable();
        divs.dedup();
        for &da in &divs {
            for &a in &[da as i64, -(da as i64)] {
                let c = ac / a;
                let bf = b as f64;
                if (sqrt_d - 2.0 * (a.abs() as f64)).abs() < bf && bf < sqrt_d {
                    reduced.push((a, b, c));
                }
            }
        }
    }
    reduced.sort_unstable();
    reduced.dedup();
    // group into ρ-cycles
    let rho = |(_, b, c): (i64, i64, i64)| -> (i64, i64, i64) {
        // b' ≡ -b (mod 2c), √Δ − 2|c| < b' < √Δ
        let m = 2 * c.abs();
        let mut bp = (-b).rem_euclid(m);
        // lift into the window (√Δ − 2|c|, √Δ)
        while (bp as f64) < sqrt_d - m as f64 {
            bp += m;
        }
        while bp as f64 >= sqrt_d {
            bp -= m;
        }
        let cp = (bp * bp - delta) / (4 * c);
        (c, bp, cp)
    };
    let mut seen = std::collections::HashSet::new();
    let mut cycles = 0u64;
    for &f in &reduced {
        if seen.contains(&f) {
            continue;
        }
        cycles += 1;
        let mut g = f;
        loop {
            if !seen.insert(g) {
                break;
            }
            g = rho(g);
        }
    }
    cycles
}

/// ln ε⁺ for Δ > 0: smallest t, u ≥ 1 with t² − Δu² = 4 gives
/// ε⁺ = (t + u√Δ)/2.
pub fn log_fundamental_totally_positive_unit(delta: i64) -> f64 {
    // scan for the fundamental unit of either norm: the first u hitting
    // t² − Δu² = ±4 gives ε₀; the totally positive generator is ε₀ itself
    // for norm +4 and ε₀² for norm −4 (whose log is twice as large —
    // searching only +4 would need astronomically larger u)
    let d = delta as u128;
    for u in 1u128..=20_000_000 {
        let du2 = d * u * u;
        for t2 in [du2 + 4, du2.wrapping_sub(4)] {
            if t2 > du2 + 4 {
                continue; // underflow of du2 - 4
            }
            let t = isqrt_u128(t2);
            if t * t == t2 {
                let log_eps = ((t as f64 + (u as f64) * (delta as f64).sqrt()) / 2.0).ln();
                return if t2 == du2 + 4 { log_eps } else { 2.0 * log_eps };
            }
        }
    }
    panic!("no norm-±4 Pell solution found for delta = {delta}");
}

/// Class number formula value of L(1, χ_Δ) for fundamental Δ.
pub fn class_number_formula_l1(delta: i64) -> f64 {
    if delta < 0 {
        let h = class_number_neg(delta) as f64;
        let w = unit_count_neg(delta) as f64;
        2.0 * std::f64::consts::PI * h / (w * ((-delta) as f64).sqrt())
    } else {
        let h = narrow_class_number_pos(delta) as f64;
        h * log_fundamental_totally_positive_unit(delta) / (delta as f64).sqrt()
    }
}
