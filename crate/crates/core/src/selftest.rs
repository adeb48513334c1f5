//! Reduced-size invariant suite behind the `selftest` subcommand: every
//! module exercised against an independent oracle or identity, sized to
//! finish in minutes on a laptop.

use crate::approximants::{self, ScaleOverrides, SiegelParams};
use crate::arith::{self, build_window};
use crate::chain::{chain_report, ShiftSystem};
use crate::correlations::{self, Factor};
use crate::exp_sums::{self, PeriodicWeight};
use crate::quad_char::{self, QuadChar};
use crate::selberg;
use crate::smoothing;
use crate::Result;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn run_or_fail(name: &'static str, f: impl FnOnce() -> Result<Check>) -> Check {
    match f() {
        Ok(c) => c,
        Err(e) => check(name, false, format!("error: {e}")),
    }
}

fn sieve_vs_trial_division() -> Result<Check> {
    let hi = 20_000;
    let t = build_window(1, hi)?;
    for n in 1..=hi {
        let f = arith::factorize(n);
        let omega: u32 = f.iter().map(|&(_, e)| e).sum();
        let lam = if omega % 2 == 0 { 1i8 } else { -1 };
        let mu = if f.iter().any(|&(_, e)| e > 1) {
            0
        } else if f.len() % 2 == 0 {
            1i8
        } else {
            -1
        };
        let tau: u32 = f.iter().map(|&(_, e)| e + 1).product();
        let van = if f.len() == 1 { (f[0].0 as f64).ln() } else { 0.0 };
        if t.lambda_at(n) != lam
            || t.mu_at(n) != mu
            || t.tau_at(n) != tau
            || (t.mangoldt_at(n) - van).abs() > 1e-12
        {
            return Ok(check(
                "sieve-oracle",
                false,
                format!("mismatch at n = {n}"),
            ));
        }
    }
    // Chebyshev identity sum_{d|n} Lambda(d) = log n
    for n in 2..=2_000u64 {
        let s: f64 = arith::divisors(n).iter().map(|&d| t.mangoldt_at(d)).sum();
        if (s - (n as f64).ln()).abs() > 1e-9 {
            return Ok(check(
                "sieve-oracle",
                false,
                format!("Chebyshev identity fails at n = {n}"),
            ));
        }
    }
    Ok(check("sieve-oracle", true, format!("n <= {hi}")))
}

fn singular_series_enclosures() -> Result<Check> {
    let h = [0u64, 2];
    let (v1, t1) = correlations::singular_series(&h, 100_000)?;
    let (v2, t2) = correlations::singular_series(&h, 1_000_000)?;
    let overlap = (v1 - t1).max(v2 - t2) <= (v1 + t1).min(v2 + t2);
    let near = (v2 - 1.3203236316f64).abs() < 1e-4;
    Ok(check(
        "singular-series",
        overlap && near,
        format!("values {v1:.10} / {v2:.10}, enclosures overlap: {overlap}"),
    ))
}

fn chowla_small() -> Result<Check> {
    let v = correlations::correlate(100_000, &[(Factor::Liouville, 0), (Factor::Liouville, 1)])?;
    Ok(check(
        "chowla-desk",
        v.abs() <= 0.05,
        format!("E lambda(n)lambda(n+1) = {v:.5}"),
    ))
}

fn sharp_flat_identity() -> Result<Check> {
    let chi = QuadChar::new(-4)?;
    let (r, d) = (30.0, 300.0);
    let coeffs = approximants::lambda_sharp_coeffs(r, d, &chi)?;
    let mut worst = 0.0f64;
    for n in 1..=2_000u64 {
        let s = approximants::lambda_sharp_eval(n, &coeffs, &chi);
        let fl = approximants::lambda_flat_direct(n, r, d, &chi);
        let ls = approximants::lambda_siegel(n, r, &chi) as f64;
        worst = worst.max((s + fl - ls).abs());
        if approximants::lambda_agreement_predicate(n, r, &chi) {
            let lam = arith::factorize(n)
                .iter()
                .map(|&(_, e)| e)
                .sum::<u32>()
                % 2;
            let lam = if lam == 0 { 1.0 } else { -1.0 };
            if (ls - lam).abs() > 0.0 {
                return Ok(check(
                    "sharp-flat-identity",
                    false,
                    format!("agreement predicate broken at n = {n}"),
                ));
            }
        }
    }
    Ok(check(
        "sharp-flat-identity",
        worst <= 1e-9,
        format!("max |lambda_sharp + lambda_flat - lambda_siegel| = {worst:.2e}"),
    ))
}

fn selberg_majorant() -> Result<Check> {
    let r = 30.0;
    let t = build_window(1, 100_000)?;
    let violations = selberg::majorant_check(&t, r)?;
    let nu = selberg::nu_weights(r)?;
    let mut worst = 0.0f64;
    for n in (7..100_000u64).step_by(997) {
        let direct = selberg::nu_direct(n, r);
        let expanded = nu.weights.eval(n, None);
        worst = worst.max((direct - expanded).abs());
    }
    Ok(check(
        "selberg-majorant",
        violations == 0 && worst <= 1e-10,
        format!("violations = {violations}, max weight-expansion gap = {worst:.2e}"),
    ))
}

fn quadrature_identities() -> Result<Check> {
    let mut worst = 0.0f64;
    for n in [1u64, 97, 1_000_000] {
        worst = worst.max(smoothing::log_identity_residual(n, 1e-11)?);
    }
    let (c0, c1) = smoothing::fourier_checks(150.0, 1e-6)?;
    let pass = worst <= 1e-8 && (c0 - 1.0).abs() <= 1e-5 && c1.abs() <= 1e-5;
    Ok(check(
        "quadrature",
        pass,
        format!("log-identity {worst:.2e}, fourier ({c0:.6}, {c1:.2e})"),
    ))
}

fn exponential_sums() -> Result<Check> {
    for q in 1..=60u64 {
        let all = exp_sums::kloosterman_all(q);
        for u1 in 0..q {
            for u2 in 0..q {
                let s = all[(u1 * q + u2) as usize];
                if s.norm() > exp_sums::estermann_bound(u1 as i64, u2 as i64, q) + 1e-6 {
                    return Ok(check(
                        "exp-sums",
                        false,
                        format!("Estermann bound fails at ({u1},{u2};{q})"),
                    ));
                }
            }
        }
    }
    // expansion identity on a few configurations, including non-coprime a
    for &(q, a, q0) in &[(12u64, 1i64, 4u64), (12, 4, 4), (30, 6, 6), (16, 8, 8)] {
        let f = PeriodicWeight::constant_one();
        let f = if q0 > 1 {
            let vals: Vec<Complex64> = (0..q0 * q0)
                .map(|i| Complex64::new(if i % 2 == 0 { 1.0 } else { 0.5 }, 0.0))
                .collect();
            PeriodicWeight::new(q0, vals)?
        } else {
            f
        };
        let dec = exp_sums::mfe_decompose(q, a, &f)?;
        for n1 in 0..q {
            for n2 in 0..q {
                let lhs = if (n1 * n2) % q == a.rem_euclid(q as i64) as u64 {
                    f.eval(n1, n2)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                if (lhs - dec.rhs(&f, n1, n2)).norm() > 1e-9 {
                    return Ok(check(
                        "exp-sums",
                        false,
                        format!("expansion identity fails at q={q}, a={a}, n=({n1},{n2})"),
                    ));
                }
            }
        }
    }
    Ok(check("exp-sums", true, "q <= 60 exhaustive + expansions".into()))
}

fn l_function_closed_forms() -> Result<Check> {
    use std::f64::consts::PI;
    let cases = [
        (-4i64, PI / 4.0),
        (-3, PI / (3.0 * 3.0f64.sqrt())),
        (5, 2.0 / 5.0f64.sqrt() * ((1.0 + 5.0f64.sqrt()) / 2.0).ln()),
        (8, (1.0 + 2.0f64.sqrt()).ln() / 2.0f64.sqrt()),
    ];
    let mut worst = 0.0f64;
    for &(delta, expect) in &cases {
        let chi = QuadChar::new(delta)?;
        let l = quad_char::l_one(&chi, 1e-10)?;
        worst = worst.max((l - expect).abs());
    }
    Ok(check(
        "l-functions",
        worst <= 1e-8,
        format!("max closed-form gap = {worst:.2e}"),
    ))
}

fn chain_small() -> Result<Check> {
    let chi = QuadChar::new(-3)?;
    let eta = quad_char::quality_proxy(&chi, Some(50.0))?;
    let params = SiegelParams::new(
        20_000,
        2,
        0,
        0.5,
        eta,
        ScaleOverrides {
            r: Some(50.0),
            d: Some(100.0),
            r0: None,
        },
    )?;
    let shifts = ShiftSystem::new(vec![0, 2], vec![])?;
    let report = chain_report(&params, &shifts, &chi, 1e-9, 1 << 14)?;
    let raw = correlations::correlate_windowed(
        params.x,
        &[(Factor::Mangoldt, 0), (Factor::Mangoldt, 2)],
        1 << 14,
    )?;
    let bit_identical = report.lines[0].value.to_bits() == raw.to_bits();
    let report2 = chain_report(&params, &shifts, &chi, 1e-9, 1 << 14)?;
    let deterministic = report.to_canonical_json() == report2.to_canonical_json();
    let finite = report.lines.iter().all(|l| l.value.is_finite());
    Ok(check(
        "chain-end-to-end",
        bit_identical && deterministic && finite,
        format!(
            "line(i) = {:.6}, bit-identical: {bit_identical}, deterministic: {deterministic}",
            report.lines[0].value
        ),
    ))
}

/// Run every check; green iff all pass.
pub fn run_selftest() -> Vec<Check> {
    let suite: Vec<(&'static str, Box<dyn FnOnce() -> Result<Check>>)> = vec![
        ("sieve-oracle", Box::new(sieve_vs_trial_division)),
        ("singular-series", Box::new(singular_series_enclosures)),
        ("chowla-desk", Box::new(chowla_small)),
        ("sharp-flat-identity", Box::new(sharp_flat_identity)),
        ("selberg-majorant", Box::new(selberg_majorant)),
        ("quadrature", Box::new(quadrature_identities)),
        ("exp-sums", Box::new(exponential_sums)),
        ("l-functions", Box::new(l_function_closed_forms)),
        ("chain-end-to-end", Box::new(chain_small)),
    ];
    suite
        .into_iter()
        .map(|(name, f)| run_or_fail(name, f))
        .collect()
}
