//! Real primitive quadratic characters via the Kronecker symbol,
//! exceptional-prime statistics, and L(1,χ), L'(1,χ) by period blocking
//! with an Euler–Maclaurin-accelerated tail.

use crate::arith::primes_in_range;
use crate::{Error, Kahan, Result};
use serde::{Deserialize, Serialize};

/// Kronecker symbol (a | n) for n >= 0.
pub fn kronecker(a: i64, n: u64) -> i32 {
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut a = a;
    let mut n = n as i64;
    if a % 2 == 0 && n % 2 == 0 {
        return 0;
    }
    // strip factors of 2 from n: each contributes (a|2)
    let mut v = 0u32;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    let mut k = if v % 2 == 0 {
        1
    } else {
        match a.rem_euclid(8) {
            1 | 7 => 1,
            3 | 5 => -1,
            _ => 0,
        }
    };
    if k == 0 {
        return 0;
    }
    // Jacobi symbol (a | n) for odd positive n, quadratic reciprocity loop.
    loop {
        if n == 1 {
            return k;
        }
        a = a.rem_euclid(n);
        if a == 0 {
            return 0;
        }
        let mut w = 0u32;
        while a % 2 == 0 {
            a /= 2;
            w += 1;
        }
        if w % 2 == 1 && matches!(n % 8, 3 | 5) {
            k = -k;
        }
        if a % 4 == 3 && n % 4 == 3 {
            k = -k;
        }
        std::mem::swap(&mut a, &mut n);
    }
}

/// True for Δ ≡ 1 (4) squarefree, or Δ = 4m with m ≡ 2,3 (4) squarefree.
/// Δ = 1 (the trivial character) is excluded.
pub fn is_fundamental_discriminant(delta: i64) -> bool {
    if delta == 0 || delta == 1 {
        return false;
    }
    let r = delta.rem_euclid(4);
    if r == 1 {
        return squarefree_i64(delta);
    }
    if r == 0 {
        let m = delta / 4;
        let mr = m.rem_euclid(4);
        return (mr == 2 || mr == 3) && squarefree_i64(m);
    }
    false
}

fn squarefree_i64(n: i64) -> bool {
    let mut m = n.unsigned_abs();
    let mut d = 2u64;
    while d * d <= m {
        if m % (d * d) == 0 {
            return false;
        }
        while m % d == 0 {
            m /= d;
        }
        d += 1;
    }
    true
}

/// Real primitive quadratic character of fundamental discriminant Δ,
/// conductor |Δ|.  Values are cached per residue class.  Reports serialize
/// only Δ; reconstruct with [`QuadChar::new`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadChar {
    delta: i64,
    conductor: u64,
    table: Vec<i8>,
}

impl QuadChar {
    pub fn new(delta: i64) -> Result<Self> {
        if !is_fundamental_discriminant(delta) {
            return Err(Error::NotFundamental(delta));
        }
        let conductor = delta.unsigned_abs();
        let table = (0..conductor)
            .map(|r| kronecker(delta, r) as i8)
            .collect();
        Ok(Self {
            delta,
            conductor,
            table,
        })
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    /// χ(n) ∈ {-1, 0, +1}, periodic mod the conductor.
    #[inline]
    pub fn eval(&self, n: u64) -> i32 {
        self.table[(n % self.conductor) as usize] as i32
    }

}

pub fn chi_eval(chi: &QuadChar, n: u64) -> i32 {
    chi.eval(n)
}

/// Primes p in [lo, hi] with χ(p) ≠ -1, ascending.
pub fn exceptional_primes(chi: &QuadChar, lo: u64, hi: u64) -> Vec<u64> {
    primes_in_range(lo, hi)
        .into_iter()
        .filter(|&p| chi.eval(p) != -1)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SeriesKind {
    /// Σ χ(n)/n
    Reciprocal,
    /// Σ χ(n) log n / n
    LogReciprocal,
}

impl SeriesKind {
    #[inline]
    fn f(self, u: f64) -> f64 {
        match self {
            SeriesKind::Reciprocal => 1.0 / u,
            SeriesKind::LogReciprocal => u.ln() / u,
        }
    }

    #[inline]
    fn f1(self, u: f64) -> f64 {
        match self {
            SeriesKind::Reciprocal => -1.0 / (u * u),
            SeriesKind::LogReciprocal => (1.0 - u.ln()) / (u * u),
        }
    }

    #[inline]
    fn f3(self, u: f64) -> f64 {
        let u4 = u * u * u * u;
        match self {
            SeriesKind::Reciprocal => -6.0 / u4,
            SeriesKind::LogReciprocal => (11.0 - 6.0 * u.ln()) / u4,
        }
    }

    /// Closed form of ∫_J^∞ Σ_r χ(r) f(tq+r) dt.  The divergent parts cancel
    /// against Σ_r χ(r) = 0, leaving a finite character-weighted log moment.
    fn integral_tail(self, chi: &QuadChar, j: u64) -> f64 {
        let q = chi.conductor();
        let mut s = Kahan::new();
        for r in 1..=q {
            let c = chi.eval(r) as f64;
            if c == 0.0 {
                continue;
            }
            let u = (j * q + r) as f64;
            let term = match self {
                SeriesKind::Reciprocal => -u.ln(),
                SeriesKind::LogReciprocal => -0.5 * u.ln() * u.ln(),
            };
            s.add(c * term);
        }
        s.value() / q as f64
    }
}

/// Σ_{j >= J} G(j) for the block sums G(j) = Σ_{r=1..q} χ(r) f(jq+r),
/// via Euler–Maclaurin: ∫ G + G(J)/2 - G'(J)/12 + G'''(J)/720.  Character
/// cancellation over complete periods makes G(j) = O(1/j²), so the dropped
/// fifth-derivative term is far below any tolerance used here.
fn em_tail(chi: &QuadChar, kind: SeriesKind, j: u64) -> f64 {
    let q = chi.conductor();
    let qf = q as f64;
    let (mut g0, mut g1, mut g3) = (Kahan::new(), Kahan::new(), Kahan::new());
    for r in 1..=q {
        let c = chi.eval(r) as f64;
        if c == 0.0 {
            continue;
        }
        let u = (j * q + r) as f64;
        g0.add(c * kind.f(u));
        g1.add(c * kind.f1(u));
        g3.add(c * kind.f3(u));
    }
    kind.integral_tail(chi, j) + g0.value() / 2.0 - qf * g1.value() / 12.0
        + qf * qf * qf * g3.value() / 720.0
}

fn dirichlet_series(chi: &QuadChar, kind: SeriesKind, tol: f64) -> Result<f64> {
    let q = chi.conductor();
    let mut blocks: u64 = 64;
    let mut prev: Option<f64> = None;
    for _ in 0..16 {
        let mut s = Kahan::new();
        for n in 1..=blocks * q {
            let c = chi.eval(n) as f64;
            if c != 0.0 {
                s.add(c * kind.f(n as f64));
            }
        }
        let value = s.value() + em_tail(chi, kind, blocks);
        if let Some(p) = prev {
            if (p - value).abs() <= tol / 2.0 {
                return Ok(value);
            }
        }
        prev = Some(value);
        blocks *= 2;
    }
    Err(Error::Nonconvergence(format!(
        "L-series blocks failed to contract for delta = {}",
        chi.delta()
    )))
}

/// L(1,χ) = Σ χ(n)/n to absolute error ≤ tol.
pub fn l_one(chi: &QuadChar, tol: f64) -> Result<f64> {
    dirichlet_series(chi, SeriesKind::Reciprocal, tol)
}

/// L'(1,χ) = -Σ χ(n) log n / n to absolute error ≤ tol.
pub fn l_prime_one(chi: &QuadChar, tol: f64) -> Result<f64> {
    Ok(-dirichlet_series(chi, SeriesKind::LogReciprocal, tol)?)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum QualityMethod {
    #[serde(rename = "user-supplied")]
    UserSupplied,
    #[serde(rename = "lprime-ratio")]
    LprimeRatio,
}

/// Stand-in for the quality η of a Siegel zero.  No computable character has
/// one, so η is either user-supplied or the ratio (L'/L)(1,χ)/log q_χ
/// clamped below at the floor 10; the method is recorded in
/// every report.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct QualityProxy {
    pub eta_hat: f64,
    pub method: QualityMethod,
}

pub fn quality_proxy(chi: &QuadChar, user_eta: Option<f64>) -> Result<QualityProxy> {
    if let Some(eta) = user_eta {
        if eta < 10.0 {
            return Err(Error::EtaBelowFloor(eta));
        }
        return Ok(QualityProxy {
            eta_hat: eta,
            method: QualityMethod::UserSupplied,
        });
    }
    let l1 = l_one(chi, 1e-10)?;
    let lp = l_prime_one(chi, 1e-10)?;
    let ratio = lp / l1 / (chi.conductor() as f64).ln();
    Ok(QualityProxy {
        eta_hat: ratio.max(10.0),
        method: QualityMethod::LprimeRatio,
    })
}

/// Σ_{n≤x} (1*χ)(n)/n by the hyperbola method: Σ_{d≤x} χ(d)/d · H(⌊x/d⌋)
/// with harmonic partial sums grown incrementally while d descends, so the
/// whole computation is O(x) time and O(1) memory.
pub fn one_star_chi_partial(chi: &QuadChar, x: u64) -> f64 {
    if x == 0 {
        return 0.0;
    }
    let mut total = Kahan::new();
    let mut harmonic = Kahan::new();
    let mut covered = 0u64; // H(covered) accumulated so far
    for d in (1..=x).rev() {
        let k = x / d;
        while covered < k {
            covered += 1;
            harmonic.add(1.0 / covered as f64);
        }
        let c = chi.eval(d) as f64;
        if c != 0.0 {
            total.add(c / d as f64 * harmonic.value());
        }
    }
    total.value()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExceptionalBand {
    pub m: u32,
    pub lo: f64,
    pub hi: f64,
    /// Σ 1/p* over exceptional primes in (lo, hi]
    pub sum: f64,
    /// diagnostic comparator m/η̂^{1/m}; not an asserted bound
    pub comparator: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExceptionalSumReport {
    pub delta: i64,
    pub x: u64,
    pub eps: f64,
    pub eta_hat: f64,
    pub threshold: f64,
    /// Σ 1/p* over exceptional primes in (q^{(1+ε)/2}, x]
    pub lhs: f64,
    /// diagnostic comparator log_{q_χ}(x)/η̂; not an asserted bound
    pub comparator: f64,
    pub bands: Vec<ExceptionalBand>,
}

/// Partial sums of 1/p* over exceptional primes, with the dyadic-in-exponent
/// band sums and their constant-free comparators.
pub fn exceptional_sum_report(
    chi: &QuadChar,
    x: u64,
    eps: f64,
    eta: &QualityProxy,
) -> Result<ExceptionalSumReport> {
    let q = chi.conductor() as f64;
    let threshold = q.powf((1.0 + eps) / 2.0);
    if (x as f64) < threshold {
        return Err(Error::RangeTooSmall(format!(
            "need x >= q^((1+eps)/2) = {threshold:.3}, got {x}"
        )));
    }
    let recip_sum = |lo: f64, hi: f64| -> f64 {
        if hi < lo {
            return 0.0;
        }
        let lo_n = (lo.floor() as u64).saturating_add(1);
        let hi_n = hi.floor() as u64;
        let mut s = Kahan::new();
        for p in exceptional_primes(chi, lo_n, hi_n) {
            if (p as f64) > lo && (p as f64) <= hi {
                s.add(1.0 / p as f64);
            }
        }
        s.value()
    };
    let lhs = recip_sum(threshold, x as f64);
    let comparator = (x as f64).ln() / q.ln() / eta.eta_hat;
    let m_max = (eta.eta_hat.ln().sqrt() + 1.0).floor() as u32;
    let mut bands = Vec::new();
    for m in 2..=m_max.max(2) {
        let lo = q.powf((1.0 + eps) / (2.0 * m as f64));
        let hi = q.powf((1.0 + eps) / (2.0 * (m as f64 - 1.0)));
        bands.push(ExceptionalBand {
            m,
            lo,
            hi,
            sum: recip_sum(lo, hi),
            comparator: m as f64 / eta.eta_hat.powf(1.0 / m as f64),
        });
    }
    Ok(ExceptionalSumReport {
        delta: chi.delta(),
        x,
        eps,
        eta_hat: eta.eta_hat,
        threshold,
        lhs,
        comparator,
        bands,
    })
}
