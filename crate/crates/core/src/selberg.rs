//! The smoothed Selberg sieve ν(n) = (Σ_{d|n} μ(d)ψ_{≤R}(d))², a majorant
//! for the indicator of R-rough numbers, together with its exact Type-I
//! weight expansion Σ_{d|n} a_d.

use crate::approximants::{TypeICoeffs, Twist};
use crate::arith::{build_window, factorize, ArithTable};
use crate::smoothing::psi_le;
use crate::util::gcd_u64;
use crate::{Error, Kahan, Result};
use std::collections::HashMap;

pub const DEFAULT_WEIGHT_BOUND: f64 = 1e7;

/// Sieve level R with the materialized weights a_d on squarefree d ≤ R².
#[derive(Clone, Debug)]
pub struct SieveNu {
    pub r: f64,
    pub weights: TypeICoeffs,
}

impl SieveNu {
    /// Σ_d |a_d|/d, reported as a finite diagnostic (the literature bounds
    /// it by powers of log R with unspecified constants).
    pub fn abs_weight_l1(&self) -> f64 {
        let mut s = Kahan::new();
        for (&d, &a) in &self.weights.entries {
            s.add(a.abs() / d as f64);
        }
        s.value()
    }
}

/// ν(n) = (Σ_{d|n} μ(d)ψ_{≤R}(d))² by direct enumeration of the squarefree
/// divisors below R.
pub fn nu_direct(n: u64, r: f64) -> f64 {
    let primes: Vec<u64> = factorize(n).into_iter().map(|(p, _)| p).collect();
    let mut sum = Kahan::new();
    let mut stack: Vec<(usize, u64, f64)> = vec![(0, 1, 1.0)];
    while let Some((i, d, sign)) = stack.pop() {
        if i == primes.len() {
            sum.add(sign * psi_le(r, d as f64));
            continue;
        }
        stack.push((i + 1, d, sign));
        if let Some(dp) = d.checked_mul(primes[i]) {
            if (dp as f64) < r {
                stack.push((i + 1, dp, -sign));
            }
        }
    }
    let s = sum.value();
    s * s
}

/// Expand the square: a_d = Σ_{[d₁,d₂]=d} μψ_{≤R}(d₁)·μψ_{≤R}(d₂) by a pair
/// loop over the squarefree support below R.  Exact finite expansion:
/// Σ_{d|n} a_d = ν(n) for every n.
pub fn nu_weights(r: f64) -> Result<SieveNu> {
    nu_weights_bounded(r, DEFAULT_WEIGHT_BOUND)
}

pub fn nu_weights_bounded(r: f64, bound: f64) -> Result<SieveNu> {
    if !(r > 1.0) {
        return Err(Error::Config(format!("sieve level R = {r} must exceed 1")));
    }
    if r * r > bound {
        return Err(Error::SupportTooLarge {
            what: "R^2",
            got: r * r,
            bound,
        });
    }
    // support: squarefree d < R with weight μ(d)ψ_{≤R}(d)
    let mut support: Vec<(u64, f64)> = vec![(1, 1.0)];
    let top = r.ceil() as u64;
    if top > 2 {
        let table = build_window(1, top - 1)?;
        for n in 2..top {
            if (n as f64) >= r {
                break;
            }
            let mu = table.mu_at(n);
            if mu != 0 {
                let w = mu as f64 * psi_le(r, n as f64);
                if w != 0.0 {
                    support.push((n, w));
                }
            }
        }
    }
    let mut acc: HashMap<u64, f64> = HashMap::new();
    for &(d1, w1) in &support {
        for &(d2, w2) in &support {
            let l = d1 / gcd_u64(d1, d2) * d2;
            *acc.entry(l).or_insert(0.0) += w1 * w2;
        }
    }
    let entries = acc.into_iter().filter(|&(_, v)| v != 0.0).collect();
    Ok(SieveNu {
        r,
        weights: TypeICoeffs {
            cutoff: r * r,
            entries,
            twist: Twist::None,
        },
    })
}

/// ν over a window via progression scattering of the weights.
pub fn nu_array(r: f64, lo: u64, hi: u64) -> Result<Vec<f64>> {
    Ok(nu_weights(r)?.weights.scatter(lo, hi, None))
}

/// Count of n in the window violating the majorant property
/// 1_{(>R)}(n) ≤ ν(n) (up to 1e-10); the contract is zero.
pub fn majorant_check(table: &ArithTable, r: f64) -> Result<u64> {
    let nu = nu_array(r, table.lo, table.hi)?;
    let mut violations = 0u64;
    for n in table.lo..=table.hi {
        let i = table.idx(n);
        let rough = n == 1 || (table.spf[i] as f64) > r;
        if rough && 1.0 > nu[i] + 1e-10 {
            violations += 1;
        }
    }
    Ok(violations)
}

/// E_{n≤x} ∏_j ν(n+h_j) 1_{d_j | n+h_j} · ∏_j 1_{d'_j | n+h'_j}, the
/// sieve-weighted congruence average.
pub fn nusieve_lhs(
    x: u64,
    nu_shifts: &[(u64, u64)],
    plain_shifts: &[(u64, u64)],
    r: f64,
) -> Result<f64> {
    if x == 0 {
        return Err(Error::Config("x must be positive".into()));
    }
    for &(d, _) in nu_shifts.iter().chain(plain_shifts) {
        if d == 0 {
            return Err(Error::Config("zero modulus".into()));
        }
        if d > x {
            return Err(Error::Config(format!("modulus {d} exceeds x = {x}")));
        }
    }
    let weights = nu_weights(r)?;
    let nu_arrays: Vec<Vec<f64>> = nu_shifts
        .iter()
        .map(|&(_, h)| weights.weights.scatter(1 + h, x + h, None))
        .collect();
    let mut s = Kahan::new();
    'outer: for n in 1..=x {
        let mut prod = 1.0f64;
        for (j, &(d, h)) in nu_shifts.iter().enumerate() {
            if (n + h) % d != 0 {
                continue 'outer;
            }
            prod *= nu_arrays[j][(n - 1) as usize];
        }
        for &(d, h) in plain_shifts {
            if (n + h) % d != 0 {
                continue 'outer;
            }
        }
        if prod != 0.0 {
            s.add(prod);
        }
    }
    Ok(s.value() / x as f64)
}
