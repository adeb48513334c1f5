//! Shifted correlation averages E_{n≤x} ∏ f_j(n+h_j), the singular-series
//! Euler product with a certified tail enclosure, CRT residue merging, and
//! windowed materialization of every factor the chain evaluator needs.

use crate::approximants::{SiegelParams, PsiBig, TypeICoeffs, Twist};
use crate::arith::{build_window, primes_up_to};
use crate::quad_char::QuadChar;
use crate::selberg::{nu_weights, SieveNu};
use crate::{approximants, Error, Kahan, Result};
use rayon::prelude::*;
use std::collections::BTreeMap;

pub const DEFAULT_CORRELATE_WINDOW: u64 = 1 << 20;

/// Local factor β_p = (1−1/p)^{−k}(1 − |{h mod p}|/p), computed from the
/// exact integer numerator p^{k−1}(p−m) and denominator (p−1)^k.
pub fn beta_p(h: &[u64], p: u64) -> Result<f64> {
    let (num, den) = beta_p_exact(h, p)?;
    Ok(num as f64 / den as f64)
}

fn beta_p_exact(h: &[u64], p: u64) -> Result<(u128, u128)> {
    debug_assert!(p >= 2);
    let k = h.len() as u32;
    if k == 0 {
        return Ok((1, 1));
    }
    let mut residues: Vec<u64> = h.iter().map(|&x| x % p).collect();
    residues.sort_unstable();
    residues.dedup();
    let m = residues.len() as u64;
    let pow = |b: u128, e: u32| -> Result<u128> {
        let mut acc: u128 = 1;
        for _ in 0..e {
            acc = acc
                .checked_mul(b)
                .ok_or_else(|| Error::Overflow(format!("beta_p at p = {p}, k = {k}")))?;
        }
        Ok(acc)
    };
    let num = pow(p as u128, k - 1)?
        .checked_mul((p - m) as u128)
        .ok_or_else(|| Error::Overflow(format!("beta_p at p = {p}")))?;
    let den = pow((p - 1) as u128, k)?;
    Ok((num, den))
}

/// ∏_{p ≤ cutoff} β_p together with a tail half-width T such that the full
/// Euler product lies in [value − T, value + T].  The enclosure uses the
/// exact inequality |β_p − 1| ≤ (k²·max|h_i−h_j| + k²)/p² for p > k, summed
/// over integers > cutoff.
pub fn singular_series(h: &[u64], cutoff: u64) -> Result<(f64, f64)> {
    let max_h = h.iter().copied().max().unwrap_or(0);
    if cutoff < max_h + 2 {
        return Err(Error::CutoffTooSmall {
            cutoff,
            need: max_h + 2,
        });
    }
    let k = h.len() as f64;
    let max_diff = h
        .iter()
        .flat_map(|&a| h.iter().map(move |&b| a.abs_diff(b)))
        .max()
        .unwrap_or(0) as f64;
    let c = k * k * max_diff + k * k;
    let cf = cutoff as f64;
    if h.len() as u64 >= cutoff || cf * cf < 2.0 * c {
        return Err(Error::CutoffTooSmall {
            cutoff,
            need: (h.len() as f64).max((2.0 * c).sqrt()).ceil() as u64,
        });
    }
    let mut log_sum = Kahan::new();
    for p in primes_up_to(cutoff) {
        let (num, den) = beta_p_exact(h, p)?;
        if num == 0 {
            return Ok((0.0, 0.0));
        }
        // ln β_p = ln(1 + (num−den)/den), with num−den exact
        let diff = num as i128 - den as i128;
        log_sum.add((diff as f64 / den as f64).ln_1p());
    }
    let value = log_sum.value().exp();
    let t = 2.0 * c / cf;
    Ok((value, value.abs() * t.exp_m1()))
}

/// Merge the congruences d_j | n + h_j into a single class n ≡ a (mod d),
/// d = lcm of the d_j.  None exactly when some pair is incompatible,
/// i.e. (d_i, d_j) ∤ h_i − h_j.
pub fn crt_merge(pairs: &[(u64, u64)]) -> Option<(u64, u64)> {
    let mut a: u128 = 0;
    let mut d: u128 = 1;
    for &(dj, hj) in pairs {
        debug_assert!(dj >= 1);
        let dj = dj as u128;
        let aj = (dj - hj as u128 % dj) % dj; // n ≡ −h_j (d_j)
        let g = gcd_u128(d, dj);
        if (a % g) != (aj % g) {
            return None;
        }
        let l = d / g * dj;
        // step from a by multiples of d to hit aj mod dj
        let step_mod = dj / g;
        if step_mod > 1 {
            let need = (aj + dj - a % dj) % dj / g;
            let inv = crate::util::inv_mod((d / g % step_mod) as u64, step_mod as u64)
                .expect("coprime by construction") as u128;
            a += d * (need * inv % step_mod);
        }
        d = l;
        a %= d;
        assert!(d <= u64::MAX as u128, "merged modulus overflows u64");
    }
    Some((a as u64, d as u64))
}

fn gcd_u128(a: u128, b: u128) -> u128 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Log-spaced cache of the smooth factor Ψ, so progression scattering can
/// afford one lookup per (d, multiple) pair.  Cubic interpolation in
/// u = log y; outside the stored range the exact quadrature is used.
#[derive(Clone, Debug)]
struct PsiGrid {
    u_lo: f64,
    step: f64,
    vals: Vec<f64>,
}

const PSI_GRID_POINTS: usize = 8193;

impl PsiGrid {
    fn build(psi: &PsiBig, y_cap: f64) -> Result<Option<Self>> {
        let sup_lo = psi.b / std::f64::consts::E;
        let sup_hi = (100.0 * std::f64::consts::E * psi.x).min(y_cap);
        if sup_hi <= sup_lo || sup_lo < 0.5 {
            return Ok(None);
        }
        let u_lo = sup_lo.ln();
        let u_hi = sup_hi.ln();
        let step = (u_hi - u_lo) / (PSI_GRID_POINTS - 1) as f64;
        let mut vals = Vec::with_capacity(PSI_GRID_POINTS);
        for i in 0..PSI_GRID_POINTS {
            let y = (u_lo + i as f64 * step).exp();
            vals.push(psi.eval(y)?);
        }
        Ok(Some(Self { u_lo, step, vals }))
    }

    fn covers(&self, y: f64) -> bool {
        let u = y.ln();
        u >= self.u_lo && u <= self.u_lo + self.step * (self.vals.len() - 1) as f64
    }

    fn eval(&self, y: f64) -> f64 {
        let u = y.ln();
        let s = (u - self.u_lo) / self.step;
        let i = (s.floor() as usize).clamp(1, self.vals.len() - 3);
        let t = s - i as f64;
        // cubic Lagrange on nodes i-1..i+2
        let (m1, p0, p1, p2) = (
            self.vals[i - 1],
            self.vals[i],
            self.vals[i + 1],
            self.vals[i + 2],
        );
        let a = -t * (t - 1.0) * (t - 2.0) / 6.0;
        let b = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
        let cc = -(t + 1.0) * t * (t - 2.0) / 2.0;
        let dd = (t + 1.0) * t * (t - 1.0) / 6.0;
        a * m1 + b * p0 + cc * p1 + dd * p2
    }
}

/// The Ψ/c_d materialization of (χ*log)♯ for windowed scattering.
#[derive(Clone, Debug)]
pub struct ChiLogSharpFactor {
    c_coeffs: TypeICoeffs,
    psi: PsiBig,
    grid: Option<PsiGrid>,
    chi: QuadChar,
}

impl ChiLogSharpFactor {
    pub fn new(params: &SiegelParams, chi: &QuadChar, quad_tol: f64, n_max: u64) -> Result<Self> {
        let (psi, c_map) = approximants::psi_big_coeffs(params, chi, n_max, quad_tol)?;
        let grid = PsiGrid::build(&psi, n_max as f64 * std::f64::consts::E)?;
        Ok(Self {
            c_coeffs: TypeICoeffs {
                cutoff: std::f64::consts::E * psi.b,
                entries: c_map,
                twist: Twist::ChiCofactor,
            },
            psi,
            grid,
            chi: chi.clone(),
        })
    }

    fn psi_at(&self, y: f64) -> Result<f64> {
        match &self.grid {
            Some(g) if g.covers(y) => Ok(g.eval(y)),
            _ => self.psi.eval(y),
        }
    }

    /// (χ*log)♯ over [lo, hi]: scatter of the c_d χ(n/d) part plus the
    /// Ψ(n/d) χ(d) part.
    pub fn window(&self, lo: u64, hi: u64) -> Result<Vec<f64>> {
        let mut out = self.c_coeffs.scatter(lo, hi, Some(&self.chi));
        let sup_lo = self.psi.b / std::f64::consts::E;
        if (hi as f64) < sup_lo {
            return Ok(out); // Ψ part entirely below support
        }
        for d in 1..=hi {
            let c = self.chi.eval(d);
            if c == 0 {
                continue;
            }
            let cf = c as f64;
            let mut m = lo.div_ceil(d).max(1);
            while m * d <= hi {
                if (m as f64) >= sup_lo {
                    let v = self.psi_at(m as f64)?;
                    if v != 0.0 {
                        out[(m * d - lo) as usize] += cf * v;
                    }
                }
                m += 1;
            }
        }
        Ok(out)
    }
}

/// One correlation factor, carrying whatever precomputed structure its
/// windowed evaluation needs.
#[derive(Clone, Debug)]
pub enum Factor {
    One,
    Liouville,
    Mangoldt,
    Mu,
    Tau,
    Chi(QuadChar),
    LambdaSiegel { r: f64, chi: QuadChar },
    LambdaSharp { coeffs: TypeICoeffs, chi: QuadChar },
    MangoldtSiegel { nu: SieveNu, chi: QuadChar },
    MangoldtSharp { nu: SieveNu, sharp: ChiLogSharpFactor },
    Nu(SieveNu),
}

impl Factor {
    pub fn lambda_siegel(r: f64, chi: &QuadChar) -> Self {
        Factor::LambdaSiegel {
            r,
            chi: chi.clone(),
        }
    }

    pub fn lambda_sharp(r: f64, d_cut: f64, chi: &QuadChar) -> Result<Self> {
        Ok(Factor::LambdaSharp {
            coeffs: approximants::lambda_sharp_coeffs(r, d_cut, chi)?,
            chi: chi.clone(),
        })
    }

    pub fn mangoldt_siegel(r: f64, chi: &QuadChar) -> Result<Self> {
        Ok(Factor::MangoldtSiegel {
            nu: nu_weights(r)?,
            chi: chi.clone(),
        })
    }

    pub fn mangoldt_sharp(
        params: &SiegelParams,
        chi: &QuadChar,
        quad_tol: f64,
        n_max: u64,
    ) -> Result<Self> {
        Ok(Factor::MangoldtSharp {
            nu: nu_weights(params.r)?,
            sharp: ChiLogSharpFactor::new(params, chi, quad_tol, n_max)?,
        })
    }

    pub fn nu(r: f64) -> Result<Self> {
        Ok(Factor::Nu(nu_weights(r)?))
    }

    /// Materialize the factor over [lo, hi] (inclusive).
    pub fn window(&self, lo: u64, hi: u64) -> Result<Vec<f64>> {
        debug_assert!(1 <= lo && lo <= hi);
        let len = (hi - lo + 1) as usize;
        match self {
            Factor::One => Ok(vec![1.0; len]),
            Factor::Liouville => {
                let t = build_window(lo, hi)?;
                Ok(t.lambda.iter().map(|&v| v as f64).collect())
            }
            Factor::Mangoldt => Ok(build_window(lo, hi)?.mangoldt),
            Factor::Mu => {
                let t = build_window(lo, hi)?;
                Ok(t.mu.iter().map(|&v| v as f64).collect())
            }
            Factor::Tau => {
                let t = build_window(lo, hi)?;
                Ok(t.tau.iter().map(|&v| v as f64).collect())
            }
            Factor::Chi(chi) => Ok((lo..=hi).map(|n| chi.eval(n) as f64).collect()),
            Factor::LambdaSiegel { r, chi } => lambda_siegel_window(lo, hi, *r, chi),
            Factor::LambdaSharp { coeffs, chi } => Ok(coeffs.scatter(lo, hi, Some(chi))),
            Factor::MangoldtSiegel { nu, chi } => {
                let mut out = chi_log_window(lo, hi, chi);
                let nu_arr = nu.weights.scatter(lo, hi, None);
                for (o, w) in out.iter_mut().zip(nu_arr) {
                    *o *= w;
                }
                Ok(out)
            }
            Factor::MangoldtSharp { nu, sharp } => {
                let mut out = sharp.window(lo, hi)?;
                let nu_arr = nu.weights.scatter(lo, hi, None);
                for (o, w) in out.iter_mut().zip(nu_arr) {
                    *o *= w;
                }
                Ok(out)
            }
            Factor::Nu(nu) => Ok(nu.weights.scatter(lo, hi, None)),
        }
    }
}

/// λ_Siegel over a window by a factorization sieve: divide out every prime
/// ≤ √hi, then the leftover cofactor is prime.  Completely multiplicative
/// with value −1 at p ≤ R and χ(p) above.
fn lambda_siegel_window(lo: u64, hi: u64, r: f64, chi: &QuadChar) -> Result<Vec<f64>> {
    let len = (hi - lo + 1) as usize;
    if len > crate::arith::DEFAULT_WINDOW as usize {
        return Err(Error::WindowTooLarge {
            len: len as u64,
            cap: crate::arith::DEFAULT_WINDOW,
        });
    }
    let base_at = |p: u64| -> i32 {
        if (p as f64) <= r {
            -1
        } else {
            chi.eval(p)
        }
    };
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut val: Vec<i32> = vec![1; len];
    for p in crate::arith::primes_up_to(crate::arith::isqrt(hi)) {
        let b = base_at(p);
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let i = (m - lo) as usize;
            let mut e = 0u32;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            if b == 0 {
                val[i] = 0;
            } else if b == -1 && e % 2 == 1 {
                val[i] = -val[i];
            }
            m += p;
        }
    }
    Ok(val
        .iter()
        .zip(rem)
        .map(|(&v, q)| {
            if q > 1 {
                (v * base_at(q)) as f64
            } else {
                v as f64
            }
        })
        .collect())
}

/// (χ*log)(n) over a window by progression scattering.
fn chi_log_window(lo: u64, hi: u64, chi: &QuadChar) -> Vec<f64> {
    let len = (hi - lo + 1) as usize;
    let mut out = vec![0.0f64; len];
    for d in 1..=hi {
        let c = chi.eval(d);
        if c == 0 {
            continue;
        }
        let cf = c as f64;
        let mut m = lo.div_ceil(d).max(2); // m = 1 contributes log 1 = 0
        while m * d <= hi {
            out[(m * d - lo) as usize] += cf * (m as f64).ln();
            m += 1;
        }
    }
    out
}

/// E_{n≤x} ∏_j f_j(n + h_j) with the default window size.
pub fn correlate(x: u64, factors: &[(Factor, u64)]) -> Result<f64> {
    correlate_windowed(x, factors, DEFAULT_CORRELATE_WINDOW)
}

/// Windowed, parallel correlation average.  [1,x] is split into fixed
/// windows; each window's compensated partial sum is computed independently
/// (in parallel) and the partials are reduced in ascending window order, so
/// the result is bitwise identical for any thread count.
pub fn correlate_windowed(x: u64, factors: &[(Factor, u64)], window: u64) -> Result<f64> {
    if x == 0 {
        return Err(Error::Config("x must be positive".into()));
    }
    let window = window.max(1);
    let n_windows = x.div_ceil(window);
    let partials: Vec<Result<f64>> = (0..n_windows)
        .into_par_iter()
        .map(|w| {
            let wlo = w * window + 1;
            let whi = ((w + 1) * window).min(x);
            let arrays: Vec<Vec<f64>> = factors
                .iter()
                .map(|(f, h)| f.window(wlo + h, whi + h))
                .collect::<Result<_>>()?;
            let mut s = Kahan::new();
            for i in 0..(whi - wlo + 1) as usize {
                let mut prod = 1.0f64;
                for a in &arrays {
                    prod *= a[i];
                    if prod == 0.0 {
                        break;
                    }
                }
                if prod != 0.0 {
                    s.add(prod);
                }
            }
            Ok(s.value())
        })
        .collect();
    let mut total = Kahan::new();
    for p in partials {
        total.add(p?);
    }
    Ok(total.value() / x as f64)
}

/// Result of a level-of-distribution probe: the exact progression sum of
/// (χ*log)♭ over the interval and the trivial comparator
/// (|I|/q)·max|summand|.
#[derive(Clone, Copy, Debug)]
pub struct LdScan {
    pub sum: f64,
    pub trivial_bound: f64,
    pub terms: u64,
}

/// Σ_{n ∈ I, n ≡ a (q)} (χ*log)♭(n)·f(n mod q_χ), f an optional q_χ-periodic
/// weight table.
pub fn level_of_distribution_scan(
    params: &SiegelParams,
    chi: &QuadChar,
    q: u64,
    a: u64,
    interval: (u64, u64),
    weight: Option<&[f64]>,
    quad_tol: f64,
) -> Result<LdScan> {
    if q == 0 || q > params.x {
        return Err(Error::Config(format!(
            "modulus q = {q} outside [1, x = {}]",
            params.x
        )));
    }
    if let Some(w) = weight {
        if w.len() != chi.conductor() as usize {
            return Err(Error::Config(format!(
                "weight table must have q_chi = {} entries, got {}",
                chi.conductor(),
                w.len()
            )));
        }
    }
    let lo = interval.0.max(1);
    let hi = interval.1.min(2 * params.x);
    let mut sum = Kahan::new();
    let mut max_abs = 0.0f64;
    let mut terms = 0u64;
    let mut n = if lo % q <= a % q {
        lo - lo % q + a % q
    } else {
        lo - lo % q + q + a % q
    };
    if n < lo {
        n += q;
    }
    while n <= hi {
        let mut v = approximants::chi_log_flat(n, params, chi, quad_tol)?;
        if let Some(w) = weight {
            v *= w[(n % chi.conductor()) as usize];
        }
        if v != 0.0 {
            sum.add(v);
        }
        max_abs = max_abs.max(v.abs());
        terms += 1;
        n += q;
    }
    let interval_len = hi.saturating_sub(lo).max(1) as f64;
    Ok(LdScan {
        sum: sum.value(),
        trivial_bound: interval_len / q as f64 * max_abs,
        terms,
    })
}

/// Per-n (χ*log)♭ sum over the same progression, as an independent oracle
/// for the scatter-free scan (used by tests and `selftest`).
pub fn ld_scan_reference(
    params: &SiegelParams,
    chi: &QuadChar,
    q: u64,
    a: u64,
    interval: (u64, u64),
    quad_tol: f64,
) -> Result<f64> {
    let scan = level_of_distribution_scan(params, chi, q, a, interval, None, quad_tol)?;
    Ok(scan.sum)
}

/// Materialized c_d coefficients of a Type-I factor as a plain map, for
/// report embedding.
pub fn coeff_summary(coeffs: &TypeICoeffs) -> BTreeMap<u64, f64> {
    coeffs.entries.clone()
}
