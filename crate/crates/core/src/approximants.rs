//! The four approximants: the completely multiplicative Siegel model for λ,
//! its sharp/flat Type-I split, the almost-prime model (χ*log)·ν for Λ, and
//! the three-integral Type-I truncation of χ*log together with its Ψ/c_d
//! coefficient form.

use crate::arith::{divisors, divisors_up_to, factorize};
use crate::quad_char::{QuadChar, QualityProxy};
use crate::selberg;
use crate::smoothing::{phi_t, psi_gt, psi_le, quad_log};
use crate::{Error, Kahan, Result};
use serde::Serialize;
use std::collections::BTreeMap;

pub const DEFAULT_COEFF_BOUND: f64 = 1e7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Formula,
    Override,
    Clamped,
}

/// Scale system (x, R, D, R₀) with the quality proxy and exponents.  Scales
/// come from the defining formulas unless overridden, and are clamped into
/// [2, x] (R₀ into [2, R]) with the provenance recorded.
#[derive(Clone, Debug, Serialize)]
pub struct SiegelParams {
    pub x: u64,
    pub k: u32,
    pub ell: u32,
    pub eps0: f64,
    pub eta: QualityProxy,
    pub r: f64,
    pub r_provenance: Provenance,
    pub d: f64,
    pub d_provenance: Provenance,
    pub r0: f64,
    pub r0_provenance: Provenance,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ScaleOverrides {
    pub r: Option<f64>,
    pub d: Option<f64>,
    pub r0: Option<f64>,
}

impl SiegelParams {
    pub fn new(
        x: u64,
        k: u32,
        ell: u32,
        eps0: f64,
        eta: QualityProxy,
        overrides: ScaleOverrides,
    ) -> Result<Self> {
        if x < 2 {
            return Err(Error::Config(format!("x = {x} too small")));
        }
        if x > 1 << 62 {
            return Err(Error::Overflow(format!("x = {x} exceeds 2^62")));
        }
        if !(eps0 > 0.0 && eps0 < 1.0) {
            return Err(Error::Config(format!("eps0 = {eps0} outside (0,1)")));
        }
        let xf = x as f64;
        let log_eta = eta.eta_hat.ln();
        let clamp = |v: f64, lo: f64, hi: f64, over: bool| -> (f64, Provenance) {
            if over {
                (v, Provenance::Override)
            } else if v < lo {
                (lo, Provenance::Clamped)
            } else if v > hi {
                (hi, Provenance::Clamped)
            } else {
                (v, Provenance::Formula)
            }
        };
        let r_raw = overrides
            .r
            .unwrap_or_else(|| xf.powf(1.0 / log_eta.powf(1.0 / (5.0 * k.max(1) as f64))));
        let (r, r_provenance) = clamp(r_raw, 2.0, xf, overrides.r.is_some());
        let d_raw = overrides
            .d
            .unwrap_or_else(|| xf.powf(eps0 / (10.0 * (k + ell).max(1) as f64)));
        let (d, d_provenance) = clamp(d_raw, 2.0, xf, overrides.d.is_some());
        let r0_raw = overrides
            .r0
            .unwrap_or_else(|| xf.powf(1.0 / log_eta.sqrt()));
        let (r0, r0_provenance) = clamp(r0_raw, 2.0, r, overrides.r0.is_some());
        Ok(Self {
            x,
            k,
            ell,
            eps0,
            eta,
            r,
            r_provenance,
            d,
            d_provenance,
            r0,
            r0_provenance,
        })
    }

    /// The Type-I truncation scale D·q_χ² appearing in every t-integral.
    pub fn big_b(&self, chi: &QuadChar) -> f64 {
        let q = chi.conductor() as f64;
        self.d * q * q
    }

    /// True when the middle t-window [Dq², x/(Dq²)²] is empty, i.e. the
    /// sharp truncation of χ*log degenerates to plain χ*log.  Typical at
    /// desk scale; flagged in reports, not an error.
    pub fn degenerate_sharp_window(&self, chi: &QuadChar) -> bool {
        let b = self.big_b(chi);
        b * b * b >= self.x as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Twist {
    None,
    ChiCofactor,
}

/// Finite coefficient map representing a Type-I sum Σ_{d|n} c_d, optionally
/// with a χ(n/d) cofactor.
#[derive(Clone, Debug, Serialize)]
pub struct TypeICoeffs {
    pub cutoff: f64,
    pub entries: BTreeMap<u64, f64>,
    pub twist: Twist,
}

impl TypeICoeffs {
    /// Direct evaluation at n by divisor enumeration.
    pub fn eval(&self, n: u64, chi: Option<&QuadChar>) -> f64 {
        debug_assert!(matches!(self.twist, Twist::None) == chi.is_none());
        let bound = self.cutoff.floor() as u64;
        let mut s = Kahan::new();
        for d in divisors_up_to(n, bound.max(1)) {
            if let Some(&c) = self.entries.get(&d) {
                let t = match chi {
                    Some(chi) => chi.eval(n / d) as f64,
                    None => 1.0,
                };
                if t != 0.0 {
                    s.add(c * t);
                }
            }
        }
        s.value()
    }

    /// Scatter the represented sum over the window [lo, hi]: out[n-lo] =
    /// Σ_{d|n} c_d (· χ(n/d)).  Coefficients are visited in ascending key
    /// order and multiples ascending, so the float accumulation order is
    /// fixed.
    pub fn scatter(&self, lo: u64, hi: u64, chi: Option<&QuadChar>) -> Vec<f64> {
        debug_assert!(matches!(self.twist, Twist::None) == chi.is_none());
        let len = (hi - lo + 1) as usize;
        let mut out = vec![0.0f64; len];
        for (&d, &c) in &self.entries {
            if d > hi {
                break;
            }
            let mut m = lo.div_ceil(d);
            while m * d <= hi {
                let i = (m * d - lo) as usize;
                match chi {
                    Some(chi) => {
                        let t = chi.eval(m) as i32;
                        if t != 0 {
                            out[i] += c * t as f64;
                        }
                    }
                    None => out[i] += c,
                }
                m += 1;
            }
        }
        out
    }
}

/// λ_Siegel: completely multiplicative, λ at primes ≤ R, χ at primes > R.
pub fn lambda_siegel(n: u64, r: f64, chi: &QuadChar) -> i32 {
    lambda_siegel_from_factors(&factorize(n), r, chi)
}

pub fn lambda_siegel_from_factors(factors: &[(u64, u32)], r: f64, chi: &QuadChar) -> i32 {
    let mut acc = 1i32;
    for &(p, e) in factors {
        let base = if (p as f64) <= r {
            -1
        } else {
            chi.eval(p)
        };
        if base == 0 {
            return 0;
        }
        if base == -1 && e % 2 == 1 {
            acc = -acc;
        }
    }
    acc
}

/// True iff n has no exceptional prime factor above R; then λ and λ_Siegel
/// agree at every prime dividing n, hence at n.
pub fn lambda_agreement_predicate(n: u64, r: f64, chi: &QuadChar) -> bool {
    factorize(n)
        .iter()
        .all(|&(p, _)| (p as f64) <= r || chi.eval(p) == -1)
}

/// Local factor of λ*μχ at p^j: (-1)^j (1 + χ(p)).  Vanishes identically
/// when χ(p) = -1, which keeps the coefficient support sparse.
#[inline]
fn lambda_mu_chi_local(chi_p: i32, j: u32) -> f64 {
    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
    sign * (1.0 + chi_p as f64)
}

/// (λ*μχ)(d) for explicitly factored d; zero unless stated otherwise.
pub fn lambda_mu_chi(d: u64, chi: &QuadChar) -> f64 {
    factorize(d)
        .iter()
        .map(|&(p, e)| lambda_mu_chi_local(chi.eval(p), e))
        .product()
}

/// Coefficients b_d of the Type-I form λ♯(n) = Σ_{d|n} b_d χ(n/d):
/// b_d = (λ*μχ)(d)·ψ_{≤D}(d) over R-smooth d, generated multiplicatively
/// over the sparse support (primes with χ(p) ≠ -1).
pub fn lambda_sharp_coeffs(r: f64, d_cut: f64, chi: &QuadChar) -> Result<TypeICoeffs> {
    if d_cut > DEFAULT_COEFF_BOUND {
        return Err(Error::SupportTooLarge {
            what: "D",
            got: d_cut,
            bound: DEFAULT_COEFF_BOUND,
        });
    }
    let p_max = r.min(d_cut).floor() as u64;
    let primes: Vec<u64> = crate::arith::primes_up_to(p_max)
        .into_iter()
        .filter(|&p| chi.eval(p) != -1)
        .collect();
    let mut entries = BTreeMap::new();
    // DFS over R-smooth d < D supported on the surviving primes.
    let mut stack: Vec<(usize, u64, f64)> = vec![(0, 1, 1.0)];
    while let Some((i, d, v)) = stack.pop() {
        if i == primes.len() {
            let w = v * psi_le(d_cut, d as f64);
            if w != 0.0 {
                entries.insert(d, w);
            }
            continue;
        }
        let p = primes[i];
        stack.push((i + 1, d, v));
        let mut pe = d;
        let mut j = 0u32;
        loop {
            pe = match pe.checked_mul(p) {
                Some(t) if (t as f64) < d_cut => t,
                _ => break,
            };
            j += 1;
            stack.push((i + 1, pe, v * lambda_mu_chi_local(chi.eval(p), j)));
        }
    }
    Ok(TypeICoeffs {
        cutoff: d_cut,
        entries,
        twist: Twist::ChiCofactor,
    })
}

/// λ♯(n) from a prebuilt coefficient table.
pub fn lambda_sharp_eval(n: u64, coeffs: &TypeICoeffs, chi: &QuadChar) -> f64 {
    coeffs.eval(n, Some(chi))
}

/// λ♭(n) = λ_Siegel(n) − λ♯(n).
pub fn lambda_flat(n: u64, r: f64, coeffs: &TypeICoeffs, chi: &QuadChar) -> f64 {
    lambda_siegel(n, r, chi) as f64 - lambda_sharp_eval(n, coeffs, chi)
}

/// Independent evaluation of λ♭ straight from its defining convolution
/// (λ*μχ)_{(≤R)} ψ_{>D} * χ, with no D-truncation of the support.
pub fn lambda_flat_direct(n: u64, r: f64, d_cut: f64, chi: &QuadChar) -> f64 {
    let mut s = Kahan::new();
    for d in divisors(n) {
        let co = chi.eval(n / d);
        if co == 0 {
            continue;
        }
        let factors = factorize(d);
        if factors.iter().any(|&(p, _)| (p as f64) > r) {
            continue; // not R-smooth
        }
        let v: f64 = factors
            .iter()
            .map(|&(p, e)| lambda_mu_chi_local(chi.eval(p), e))
            .product();
        if v == 0.0 {
            continue;
        }
        let w = psi_gt(d_cut, d as f64);
        if w != 0.0 {
            s.add(v * w * co as f64);
        }
    }
    s.value()
}

/// (χ*log)(n) = Σ_{d|n} χ(d) log(n/d).  Nonnegative, since χ*log = (1*χ)*Λ
/// and both factors are nonnegative.
pub fn chi_log(n: u64, chi: &QuadChar) -> f64 {
    let mut s = Kahan::new();
    for d in divisors(n) {
        let c = chi.eval(d);
        if c != 0 {
            s.add(c as f64 * ((n / d) as f64).ln());
        }
    }
    s.value()
}

/// (χ*log)(n) for all n ≤ n_max by progression scattering; index n, entry 0
/// unused.
pub fn chi_log_array(n_max: u64, chi: &QuadChar) -> Vec<f64> {
    let mut out = vec![0.0f64; n_max as usize + 1];
    for d in 1..=n_max {
        let c = chi.eval(d);
        if c == 0 {
            continue;
        }
        let cf = c as f64;
        let mut m = 2u64; // log 1 = 0: m = 1 contributes nothing
        while d * m <= n_max {
            out[(d * m) as usize] += cf * (m as f64).ln();
            m += 1;
        }
    }
    out
}

/// Λ_Siegel(n) = (χ*log)(n)·ν(n), the almost-prime Siegel model for Λ.
pub fn mangoldt_siegel(n: u64, r: f64, chi: &QuadChar) -> f64 {
    let nu = selberg::nu_direct(n, r);
    if nu == 0.0 {
        0.0
    } else {
        chi_log(n, chi) * nu
    }
}

/// Shared tail factor K₃ = ∫_B^{100x} ψ_{>B²}(x/t) log t dt/t.  The
/// integrand vanishes for t ≥ x/B, so the effective window is
/// [B, min(100x, x/B)].
fn k3_integral(x: f64, b: f64, tol: f64) -> Result<f64> {
    let b2 = b * b;
    let hi = (100.0 * x).min(x / b);
    if hi <= b {
        return Ok(0.0);
    }
    quad_log(&|t: f64| psi_gt(b2, x / t) * t.ln(), b, hi, tol)
}

/// ∫ Φ_t(d) log t dt/t over [max(1/100, d/e), min(B, d·e)] by quadrature.
fn bump_log_integral(d: f64, b: f64, tol: f64) -> Result<f64> {
    let lo = (d / std::f64::consts::E).max(0.01);
    let hi = (d * std::f64::consts::E).min(b);
    if hi <= lo {
        return Ok(0.0);
    }
    quad_log(&|t: f64| phi_t(t, d) * t.ln(), lo, hi, tol)
}

/// (χ*log)♯(n): the three-integral truncation, evaluated by swapping the
/// divisor sum outside the t-integrals so each divisor contributes a short
/// quadrature over its own bump window.
pub fn chi_log_sharp(n: u64, params: &SiegelParams, chi: &QuadChar, quad_tol: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("n must be positive".into()));
    }
    let x = params.x as f64;
    if n as f64 > 2.0 * x {
        return Err(Error::Precondition(format!("n = {n} exceeds 2x = {}", 2.0 * x)));
    }
    let b = params.big_b(chi);
    let b2 = b * b;
    let k3 = k3_integral(x, b, quad_tol)?;
    let mut s = Kahan::new();
    for d in divisors(n) {
        let co = chi.eval(n / d) as f64;
        let df = d as f64;
        if co != 0.0 {
            // first integral: Σ_d Φ_t(d) χ(n/d) over t ∈ [1/100, B]
            let i1 = bump_log_integral(df, b, quad_tol)?;
            if i1 != 0.0 {
                s.add(co * i1);
            }
            // third integral: Φ_B(d) χ(n/d) times the shared K₃
            if k3 != 0.0 {
                let w = phi_t(b, df);
                if w != 0.0 {
                    s.add(co * w * k3);
                }
            }
        }
        // second integral: Σ_d Φ_t(n/d) χ(d), window [B, 100x] ∩ bump of n/d
        let cd = chi.eval(d) as f64;
        if cd != 0.0 {
            let y = (n / d) as f64;
            let lo = (y / std::f64::consts::E).max(b);
            let hi = (y * std::f64::consts::E).min(100.0 * x);
            if hi > lo {
                let i2 = quad_log(
                    &|t: f64| psi_le(b2, x / t) * phi_t(t, y) * t.ln(),
                    lo,
                    hi,
                    quad_tol,
                )?;
                if i2 != 0.0 {
                    s.add(cd * i2);
                }
            }
        }
    }
    Ok(s.value())
}

/// (χ*log)♭(n): the complementary flat integral
/// ∫_B^{100x} ψ_{>B²}(x/t) χ*(Φ_t − Φ_B)(n) log t dt/t, again decomposed per
/// divisor.  The Φ_B part factors out of the t-integral as −Φ_B(d)·K₃.
pub fn chi_log_flat(n: u64, params: &SiegelParams, chi: &QuadChar, quad_tol: f64) -> Result<f64> {
    let x = params.x as f64;
    let b = params.big_b(chi);
    let b2 = b * b;
    let k3 = k3_integral(x, b, quad_tol)?;
    // integrand vanishes for t ≥ x/B (ψ_{>B²} side)
    let t_hi_global = (100.0 * x).min(x / b);
    let mut s = Kahan::new();
    for d in divisors(n) {
        let co = chi.eval(n / d) as f64;
        if co == 0.0 {
            continue;
        }
        let df = d as f64;
        let mut contrib = 0.0;
        let lo = (df / std::f64::consts::E).max(b);
        let hi = (df * std::f64::consts::E).min(t_hi_global);
        if hi > lo {
            contrib += quad_log(
                &|t: f64| psi_gt(b2, x / t) * phi_t(t, df) * t.ln(),
                lo,
                hi,
                quad_tol,
            )?;
        }
        if k3 != 0.0 {
            let w = phi_t(b, df);
            if w != 0.0 {
                contrib -= w * k3;
            }
        }
        if contrib != 0.0 {
            s.add(co * contrib);
        }
    }
    Ok(s.value())
}

/// Λ♯(n) = (χ*log)♯(n)·ν(n).
pub fn mangoldt_sharp(n: u64, params: &SiegelParams, chi: &QuadChar, quad_tol: f64) -> Result<f64> {
    let nu = selberg::nu_direct(n, params.r);
    if nu == 0.0 {
        return Ok(0.0);
    }
    Ok(chi_log_sharp(n, params, chi, quad_tol)? * nu)
}

/// Λ♭(n) = Λ_Siegel(n) − Λ♯(n) by definition; [`mangoldt_flat_direct`]
/// evaluates it independently as (χ*log)♭·ν.
pub fn mangoldt_flat(n: u64, params: &SiegelParams, chi: &QuadChar, quad_tol: f64) -> Result<f64> {
    Ok(mangoldt_siegel(n, params.r, chi) - mangoldt_sharp(n, params, chi, quad_tol)?)
}

pub fn mangoldt_flat_direct(
    n: u64,
    params: &SiegelParams,
    chi: &QuadChar,
    quad_tol: f64,
) -> Result<f64> {
    let nu = selberg::nu_direct(n, params.r);
    if nu == 0.0 {
        return Ok(0.0);
    }
    Ok(chi_log_flat(n, params, chi, quad_tol)? * nu)
}

/// The smooth factor Ψ(y) = ∫_B^{100x} ψ_{≤B²}(x/t) Φ_t(y) log t dt/t of the
/// Ψ/c_d coefficient form.  Supported on y ∈ (B/e, 100ex).
#[derive(Clone, Debug)]
pub struct PsiBig {
    pub x: f64,
    pub b: f64,
    pub quad_tol: f64,
}

impl PsiBig {
    pub fn eval(&self, y: f64) -> Result<f64> {
        self.eval_tol(y, self.quad_tol)
    }

    pub fn eval_tol(&self, y: f64, tol: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        let lo = (y / std::f64::consts::E).max(self.b);
        let hi = (y * std::f64::consts::E).min(100.0 * self.x);
        if hi <= lo {
            return Ok(0.0);
        }
        let b2 = self.b * self.b;
        quad_log(
            &|t: f64| psi_le(b2, self.x / t) * phi_t(t, y) * t.ln(),
            lo,
            hi,
            tol,
        )
    }
}

/// c_d = ∫_{1/100}^B Φ_t(d) log t dt/t + Φ_B(d)·K₃.  When the bump of d
/// sits entirely inside [1/100, B] the first integral is exactly log d (the
/// smooth dyadic log identity), so quadrature is needed only in the
/// transition band d ∈ (B/e, eB).
pub fn c_coeff(d: u64, b: f64, k3: f64, quad_tol: f64) -> Result<f64> {
    let df = d as f64;
    if df >= std::f64::consts::E * b {
        return Ok(0.0);
    }
    let mut v = if df * std::f64::consts::E <= b {
        df.ln()
    } else {
        bump_log_integral(df, b, quad_tol)?
    };
    if k3 != 0.0 {
        let w = phi_t(b, df);
        if w != 0.0 {
            v += w * k3;
        }
    }
    Ok(v)
}

/// The Ψ/c_d decomposition (χ*log)♯(n) = Σ_{d|n} (Ψ(n/d)χ(d) + c_d χ(n/d)).
/// The returned map materializes c_d for d ≤ min(d_limit, eB); all other
/// coefficients vanish.
pub fn psi_big_coeffs(
    params: &SiegelParams,
    chi: &QuadChar,
    d_limit: u64,
    quad_tol: f64,
) -> Result<(PsiBig, BTreeMap<u64, f64>)> {
    let x = params.x as f64;
    let b = params.big_b(chi);
    let k3 = k3_integral(x, b, quad_tol)?;
    let d_max = (std::f64::consts::E * b).floor() as u64;
    let mut map = BTreeMap::new();
    for d in 1..=d_limit.min(d_max) {
        let v = c_coeff(d, b, k3, quad_tol)?;
        if v != 0.0 {
            map.insert(d, v);
        }
    }
    Ok((
        PsiBig {
            x,
            b,
            quad_tol,
        },
        map,
    ))
}
