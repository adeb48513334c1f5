//! Kloosterman sums, hyperbola Fourier coefficients, and the modified
//! Fourier expansion of congruence indicators on hyperbolas — all exact
//! finite sums over unit-circle root tables, sized for desk moduli.

use crate::util::{gcd_u64, inv_mod};
use crate::arith::factorize;
use crate::quad_char::QuadChar;
use crate::{Error, Result};
use num_complex::Complex64;

/// Root table e_q(k) = e^{2πik/q} for k = 0..q.
pub fn root_table(q: u64) -> Vec<Complex64> {
    (0..q)
        .map(|k| {
            let th = 2.0 * std::f64::consts::PI * k as f64 / q as f64;
            Complex64::new(th.cos(), th.sin())
        })
        .collect()
}

pub fn totient(q: u64) -> u64 {
    let mut t = q;
    for (p, _) in factorize(q) {
        t = t / p * (p - 1);
    }
    t
}

pub fn divisor_count(q: u64) -> u64 {
    factorize(q).iter().map(|&(_, e)| (e + 1) as u64).product()
}

fn gcd3(u1: i64, u2: i64, q: u64) -> u64 {
    gcd_u64(gcd_u64(u1.unsigned_abs() % q.max(1), u2.unsigned_abs() % q.max(1)).max(0), q)
}

/// S(u₁,u₂;q) = Σ_{x mod q, (x,q)=1} e_q(u₁x + u₂x̄), summed in ascending x.
pub fn kloosterman(u1: i64, u2: i64, q: u64) -> Complex64 {
    if q == 1 {
        return Complex64::new(1.0, 0.0);
    }
    let roots = root_table(q);
    let u1 = u1.rem_euclid(q as i64) as u64;
    let u2 = u2.rem_euclid(q as i64) as u64;
    let mut s = Complex64::new(0.0, 0.0);
    for x in 1..q {
        if gcd_u64(x, q) != 1 {
            continue;
        }
        let xb = inv_mod(x, q).expect("unit has an inverse");
        let idx = ((u1 as u128 * x as u128 + u2 as u128 * xb as u128) % q as u128) as usize;
        s += roots[idx];
    }
    s
}

/// All S(u₁,u₂;q) at once (row-major u₁·q + u₂), via incremental phase
/// indices: cost φ(q)·q² table adds, no transcendental calls in the loop.
pub fn kloosterman_all(q: u64) -> Vec<Complex64> {
    assert!(q >= 1);
    let qs = q as usize;
    let roots = root_table(q);
    let mut out = vec![Complex64::new(0.0, 0.0); qs * qs];
    if q == 1 {
        out[0] = Complex64::new(1.0, 0.0);
        return out;
    }
    for x in 1..q {
        if gcd_u64(x, q) != 1 {
            continue;
        }
        let xb = inv_mod(x, q).unwrap();
        let mut p1 = 0u64; // u1*x mod q
        for u1 in 0..qs {
            let mut idx = p1; // u1*x + u2*xb mod q
            let row = &mut out[u1 * qs..(u1 + 1) * qs];
            for cell in row.iter_mut() {
                *cell += roots[idx as usize];
                idx += xb;
                if idx >= q {
                    idx -= q;
                }
            }
            p1 += x;
            if p1 >= q {
                p1 -= q;
            }
        }
    }
    out
}

/// Estermann/Weil bound τ(q)·√q·(u₁,u₂,q)^{1/2}.
pub fn estermann_bound(u1: i64, u2: i64, q: u64) -> f64 {
    divisor_count(q) as f64 * (q as f64).sqrt() * (gcd3(u1, u2, q) as f64).sqrt()
}

/// 1-bounded weight of period q₀ on Z², indexed by (n₁ mod q₀, n₂ mod q₀).
#[derive(Clone, Debug)]
pub struct PeriodicWeight {
    q0: u64,
    values: Vec<Complex64>,
}

impl PeriodicWeight {
    pub fn new(q0: u64, values: Vec<Complex64>) -> Result<Self> {
        if q0 == 0 || values.len() != (q0 * q0) as usize {
            return Err(Error::Config(format!(
                "periodic weight needs q0² = {} values, got {}",
                q0 * q0,
                values.len()
            )));
        }
        if values.iter().any(|v| v.norm() > 1.0 + 1e-12) {
            return Err(Error::Config("periodic weight must be 1-bounded".into()));
        }
        Ok(Self { q0, values })
    }

    pub fn constant_one() -> Self {
        Self {
            q0: 1,
            values: vec![Complex64::new(1.0, 0.0)],
        }
    }

    pub fn period(&self) -> u64 {
        self.q0
    }

    #[inline]
    pub fn eval(&self, n1: u64, n2: u64) -> Complex64 {
        self.values[((n1 % self.q0) * self.q0 + n2 % self.q0) as usize]
    }
}

fn check_hyperbola_preconditions(q: u64, a: i64, f: &PeriodicWeight) -> Result<u64> {
    if q == 0 {
        return Err(Error::Precondition("q must be positive".into()));
    }
    if q % f.period() != 0 {
        return Err(Error::Precondition(format!(
            "period q0 = {} must divide q = {q}",
            f.period()
        )));
    }
    let aq = gcd_u64(a.rem_euclid(q as i64) as u64, q).max(1);
    let aq = if a.rem_euclid(q as i64) == 0 { q } else { aq };
    if f.period() % aq != 0 {
        return Err(Error::Precondition(format!(
            "(a,q) = {aq} must divide q0 = {}",
            f.period()
        )));
    }
    Ok(aq)
}

/// Solutions n₂ mod q of n₁·n₂ ≡ a (q), for fixed n₁.
fn hyperbola_fiber(n1: u64, a: u64, q: u64) -> Vec<u64> {
    let g = gcd_u64(n1.max(1), q);
    let g = if n1 == 0 { q } else { g };
    if a % g != 0 {
        return Vec::new();
    }
    if n1 == 0 {
        // 0·n2 ≡ a needs a ≡ 0; all residues solve
        return (0..q).collect();
    }
    let qg = q / g;
    let base = if qg == 1 {
        0
    } else {
        (a / g % qg * inv_mod(n1 / g % qg, qg).unwrap() % qg) % qg
    };
    (0..g).map(|k| base + k * qg).collect()
}

/// E_{n₁,n₂ mod q} f(n₁,n₂) 1_{n₁n₂≡a (q)} e_q(u₁n₁+u₂n₂): enumerate the
/// hyperbola support directly.
pub fn hyperbola_fourier_coeff(
    q: u64,
    a: i64,
    f: &PeriodicWeight,
    u1: i64,
    u2: i64,
) -> Result<Complex64> {
    check_hyperbola_preconditions(q, a, f)?;
    let roots = root_table(q);
    let am = a.rem_euclid(q as i64) as u64;
    let u1 = u1.rem_euclid(q as i64) as u64;
    let u2 = u2.rem_euclid(q as i64) as u64;
    let mut s = Complex64::new(0.0, 0.0);
    for n1 in 0..q {
        for n2 in hyperbola_fiber(n1, am, q) {
            let idx = ((u1 as u128 * n1 as u128 + u2 as u128 * n2 as u128) % q as u128) as usize;
            s += f.eval(n1, n2) * roots[idx];
        }
    }
    Ok(s / (q as f64 * q as f64))
}

/// All q² hyperbola Fourier coefficients at once (row-major u₁·q + u₂),
/// direct phase accumulation over the hyperbola support.
pub fn hyperbola_coeffs_all(q: u64, a: i64, f: &PeriodicWeight) -> Result<Vec<Complex64>> {
    check_hyperbola_preconditions(q, a, f)?;
    let qs = q as usize;
    let roots = root_table(q);
    let am = a.rem_euclid(q as i64) as u64;
    let mut out = vec![Complex64::new(0.0, 0.0); qs * qs];
    for n1 in 0..q {
        for n2 in hyperbola_fiber(n1, am, q) {
            let v = f.eval(n1, n2);
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut p1 = 0u64;
            for u1 in 0..qs {
                let mut idx = p1;
                let row = &mut out[u1 * qs..(u1 + 1) * qs];
                for cell in row.iter_mut() {
                    *cell += v * roots[idx as usize];
                    idx += n2;
                    if idx >= q {
                        idx -= q;
                    }
                }
                p1 += n1;
                if p1 >= q {
                    p1 -= q;
                }
            }
        }
    }
    let norm = 1.0 / (q as f64 * q as f64);
    for c in &mut out {
        *c *= norm;
    }
    Ok(out)
}

/// Hyperbola coefficient bound τ(q₀)²·q₀^{3/2}·τ(q)·q^{−3/2}·(u₁,u₂,q)^{1/2}.
pub fn hyperbola_coeff_bound(q: u64, q0: u64, u1: i64, u2: i64) -> f64 {
    let tq0 = divisor_count(q0) as f64;
    tq0 * tq0
        * (q0 as f64).powf(1.5)
        * divisor_count(q) as f64
        * (q as f64).powf(-1.5)
        * (gcd3(u1, u2, q) as f64).sqrt()
}

/// Result of the modified Fourier expansion of f·1_{n₁n₂≡a (q)}: the
/// weighted main congruence term (coefficient α·q₀'/q on the relaxed
/// modulus q₀') plus a Fourier part whose coefficients vanish whenever
/// q/q₀ divides u₁ or u₂.
#[derive(Clone, Debug)]
pub struct MfeDecomposition {
    pub q: u64,
    pub a: u64,
    pub q0: u64,
    pub q0_prime: u64,
    pub alpha: f64,
    /// c_{u₁,u₂}, row-major u₁·q + u₂
    pub coeffs: Vec<Complex64>,
}

impl MfeDecomposition {
    /// Coefficient magnitude bound from the expansion lemma.
    pub fn coeff_bound(&self, u1: i64, u2: i64) -> f64 {
        2.0 * hyperbola_coeff_bound(self.q, self.q0, u1, u2)
    }

    /// The main term at (n₁,n₂): (αq₀'/q)·f·1_{n₁n₂≡a (q₀')}·1_{(n₁n₂,q)=(a,q)}.
    pub fn main_term(&self, f: &PeriodicWeight, n1: u64, n2: u64) -> Complex64 {
        let prod = (n1 as u128 * n2 as u128) as u128;
        let pm_q0p = (prod % self.q0_prime as u128) as u64;
        if pm_q0p != self.a % self.q0_prime {
            return Complex64::new(0.0, 0.0);
        }
        let pm_q = (prod % self.q as u128) as u64;
        let g_n = if pm_q == 0 { self.q } else { gcd_u64(pm_q, self.q) };
        let g_a = if self.a % self.q == 0 {
            self.q
        } else {
            gcd_u64(self.a % self.q, self.q)
        };
        if g_n != g_a {
            return Complex64::new(0.0, 0.0);
        }
        f.eval(n1, n2) * (self.alpha * self.q0_prime as f64 / self.q as f64)
    }

    /// Re-evaluate the right-hand side of the expansion at (n₁,n₂),
    /// restricting the Fourier part to the allowed frequencies
    /// (q/q₀ ∤ u₁ and q/q₀ ∤ u₂).
    pub fn rhs(&self, f: &PeriodicWeight, n1: u64, n2: u64) -> Complex64 {
        let roots = root_table(self.q);
        let step = self.q / self.q0;
        let mut s = self.main_term(f, n1, n2);
        for u1 in 0..self.q {
            if step > 0 && u1 % step == 0 {
                continue;
            }
            for u2 in 0..self.q {
                if step > 0 && u2 % step == 0 {
                    continue;
                }
                let c = self.coeffs[(u1 * self.q + u2) as usize];
                let idx =
                    ((u1 as u128 * n1 as u128 + u2 as u128 * n2 as u128) % self.q as u128) as usize;
                s += c * roots[idx];
            }
        }
        s
    }
}

/// Modified Fourier expansion: subtract the α-weighted main term from
/// f·1_{n₁n₂≡a (q)} and take the discrete Fourier transform of the residual
/// (row-column, O(q³)).  The vanishing of the coefficients at frequencies
/// divisible by q/q₀ is a property the tests check, not an assumption.
pub fn mfe_decompose(q: u64, a: i64, f: &PeriodicWeight) -> Result<MfeDecomposition> {
    check_hyperbola_preconditions(q, a, f)?;
    let q0 = f.period();
    let am = a.rem_euclid(q as i64) as u64;
    let g_a = if am == 0 { q } else { gcd_u64(am, q) };
    let q0_prime = gcd_u64(q0.saturating_mul(g_a), q);
    // α = ∏ p/(p-1) over p | q/q0' with p ∤ q0'/(a,q)
    let mut alpha = 1.0f64;
    for (p, _) in factorize(q / q0_prime) {
        if (q0_prime / g_a) % p != 0 {
            alpha *= p as f64 / (p - 1) as f64;
        }
    }
    let decomp = MfeDecomposition {
        q,
        a: am,
        q0,
        q0_prime,
        alpha,
        coeffs: Vec::new(),
    };
    // residual on the full q×q grid
    let qs = q as usize;
    let mut residual = vec![Complex64::new(0.0, 0.0); qs * qs];
    for n1 in 0..q {
        for n2 in hyperbola_fiber(n1, am, q) {
            residual[(n1 * q + n2) as usize] += f.eval(n1, n2);
        }
    }
    for n1 in 0..q {
        for n2 in 0..q {
            let m = decomp.main_term(f, n1, n2);
            if m != Complex64::new(0.0, 0.0) {
                residual[(n1 * q + n2) as usize] -= m;
            }
        }
    }
    // c_{u1,u2} = E residual · e_q(-(u1 n1 + u2 n2)), row-column transform
    let conj_roots: Vec<Complex64> = root_table(q).iter().map(|z| z.conj()).collect();
    let mut half = vec![Complex64::new(0.0, 0.0); qs * qs]; // [n1][u2]
    for n1 in 0..qs {
        for u2 in 0..qs {
            let mut s = Complex64::new(0.0, 0.0);
            for n2 in 0..qs {
                let r = residual[n1 * qs + n2];
                if r != Complex64::new(0.0, 0.0) {
                    s += r * conj_roots[u2 * n2 % qs];
                }
            }
            half[n1 * qs + u2] = s;
        }
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); qs * qs];
    for u1 in 0..qs {
        for u2 in 0..qs {
            let mut s = Complex64::new(0.0, 0.0);
            for n1 in 0..qs {
                s += half[n1 * qs + u2] * conj_roots[u1 * n1 % qs];
            }
            coeffs[u1 * qs + u2] = s / (q as f64 * q as f64);
        }
    }
    Ok(MfeDecomposition { coeffs, ..decomp })
}

/// One congruence-and-character factor of a shifted Type-I average.
#[derive(Clone, Copy, Debug)]
pub struct ShiftFactor {
    pub d: u64,
    pub h: u64,
    /// when present, multiply by χ((n+h)/d'); requires d' | d
    pub d_prime: Option<u64>,
}

#[derive(Clone, Copy, Debug)]
pub struct CharShiftSum {
    pub value: f64,
    /// constant-free comparator q_χ^{1/2}·(∏d, q_χ)^{1/2}·(1/(q_χ∏d) + 1/x)
    pub skeleton: f64,
}

/// E_{n≤x} 1_I(n) ∏ 1_{d_j|n+h_j} ∏_{j∈J} χ((n+h_j)/d'_j), walking only the
/// merged residue class.
pub fn char_shift_sum(
    chi: &QuadChar,
    factors: &[ShiftFactor],
    interval: (u64, u64),
    x: u64,
) -> Result<CharShiftSum> {
    if x == 0 {
        return Err(Error::Config("x must be positive".into()));
    }
    if factors.is_empty() || factors.iter().all(|f| f.d_prime.is_none()) {
        return Err(Error::Precondition(
            "need at least one χ-twisted factor (J nonempty)".into(),
        ));
    }
    let mut d_product = 1.0f64;
    for f in factors {
        if f.d == 0 {
            return Err(Error::Config("zero modulus".into()));
        }
        if let Some(dp) = f.d_prime {
            if dp == 0 || f.d % dp != 0 {
                return Err(Error::Precondition(format!(
                    "d' = {dp} must divide d = {}",
                    f.d
                )));
            }
        }
        d_product *= f.d as f64;
    }
    let q = chi.conductor() as f64;
    let d_prod_int: u64 = factors.iter().map(|f| f.d).product();
    let skeleton = q.sqrt()
        * (gcd_u64(d_prod_int, chi.conductor()) as f64).sqrt()
        * (1.0 / (q * d_product) + 1.0 / x as f64);
    let pairs: Vec<(u64, u64)> = factors.iter().map(|f| (f.d, f.h)).collect();
    let merged = crate::correlations::crt_merge(&pairs);
    let (a, d) = match merged {
        None => {
            return Ok(CharShiftSum {
                value: 0.0,
                skeleton,
            })
        }
        Some(ad) => ad,
    };
    let lo = interval.0.max(1);
    let hi = interval.1.min(x);
    let mut s = crate::Kahan::new();
    // first n >= lo with n ≡ a (d)
    let mut n = if lo % d <= a {
        lo - lo % d + a
    } else {
        lo - lo % d + d + a
    };
    if n < lo {
        n += d;
    }
    while n <= hi {
        let mut term = 1.0f64;
        for f in factors {
            if let Some(dp) = f.d_prime {
                let c = chi.eval((n + f.h) / dp);
                if c == 0 {
                    term = 0.0;
                    break;
                }
                term *= c as f64;
            }
        }
        if term != 0.0 {
            s.add(term);
        }
        n += d;
    }
    Ok(CharShiftSum {
        value: s.value() / x as f64,
        skeleton,
    })
}
