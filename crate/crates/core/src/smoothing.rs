//! The fixed smooth cutoffs ψ (plateau bump, 1 on [-1/2,1/2], 0 outside
//! [-1,1]) and φ (mass-one bump on [-1,1]), their scaled variants, and the
//! adaptive log-space quadrature used by every t-integral.

use crate::{Error, Kahan, Result};
use once_cell::sync::Lazy;
use sha2::{Digest, Sha256};

#[inline]
fn bump_g(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// Plateau cutoff: 1 on [-1/2,1/2], 0 outside (-1,1), and on the transition
/// band the standard partition of unity g(1-|u|)/(g(1-|u|)+g(|u|-1/2)) with
/// g(s) = exp(-1/s).  C∞ and reproducible bit-for-bit from the formula.
pub fn psi(u: f64) -> f64 {
    let a = u.abs();
    if a <= 0.5 {
        1.0
    } else if a >= 1.0 {
        0.0
    } else {
        let num = bump_g(1.0 - a);
        num / (num + bump_g(a - 0.5))
    }
}

/// Normalization for φ, fixed once at startup by quadrature.
static PHI_NORM: Lazy<f64> = Lazy::new(|| {
    let mass = adaptive_simpson(&|u: f64| bump_g(1.0 - u * u), -1.0, 1.0, 1e-13)
        .expect("phi normalization quadrature");
    1.0 / mass
});

/// Mass-one even bump supported on [-1,1]: c·exp(-1/(1-u²)).
pub fn phi(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        *PHI_NORM * bump_g(1.0 - u * u)
    }
}

/// ψ_{≤z}(n) = ψ(log_z n): 1 up to √z, 0 from z on.
pub fn psi_le(z: f64, n: f64) -> f64 {
    debug_assert!(z > 1.0 && n > 0.0);
    psi(n.ln() / z.ln())
}

/// ψ_{>z}(n) = 1 − ψ_{≤z}(n).
pub fn psi_gt(z: f64, n: f64) -> f64 {
    1.0 - psi_le(z, n)
}

/// Φ_t(n) = φ(log(n/t)), a smooth cutoff of n to [t/e, et].
pub fn phi_t(t: f64, n: f64) -> f64 {
    debug_assert!(t > 0.0 && n > 0.0);
    phi((n / t).ln())
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

fn adapt(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature(format!(
            "max refinement depth reached on [{a}, {b}]"
        )));
    }
    let l = adapt(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)?;
    let r = adapt(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature of g over [a,b], estimated error ≤ tol.
/// The interval is pre-split so that compactly supported integrands cannot
/// fool the initial coarse samples.
pub fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(b > a) {
        return Ok(0.0);
    }
    const PRESPLIT: usize = 8;
    let mut total = Kahan::new();
    let h = (b - a) / PRESPLIT as f64;
    for i in 0..PRESPLIT {
        let x0 = a + i as f64 * h;
        let x1 = if i + 1 == PRESPLIT { b } else { x0 + h };
        let m = 0.5 * (x0 + x1);
        let (f0, fm, f1) = (g(x0), g(m), g(x1));
        let whole = simpson(f0, fm, f1, x1 - x0);
        total.add(adapt(
            g,
            x0,
            x1,
            f0,
            fm,
            f1,
            whole,
            tol / PRESPLIT as f64,
            48,
        )?);
    }
    Ok(total.value())
}

/// ∫_a^b f(t) dt/t computed as ∫ f(e^u) du in u = log t coordinates.
pub fn quad_log(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a > 0.0 && b > a) {
        return if a == b || b < a {
            Ok(0.0)
        } else {
            Err(Error::Quadrature(format!("bad quad_log range [{a}, {b}]")))
        };
    }
    adaptive_simpson(&|u: f64| f(u.exp()), a.ln(), b.ln(), tol)
}

/// |∫ Φ_t(n) log t dt/t − log n|, integrating over the support [n/e, ne].
/// The identity value is exactly log n, so this measures pure quadrature
/// error.
pub fn log_identity_residual(n: u64, quad_tol: f64) -> Result<f64> {
    let nf = n as f64;
    let integral = quad_log(
        &|t: f64| phi_t(t, nf) * t.ln(),
        nf / std::f64::consts::E,
        nf * std::f64::consts::E,
        quad_tol,
    )?;
    Ok((integral - nf.ln()).abs())
}

/// Fourier transform of u ↦ e^u ψ(u) at frequency t, by quadrature over the
/// support [-1,1]: f(t) = (1/2π) ∫ e^{(1+it)u} ψ(u) du.
pub fn e_psi_transform(t: f64, u_tol: f64) -> Result<(f64, f64)> {
    let re = adaptive_simpson(&|u: f64| u.exp() * psi(u) * (t * u).cos(), -1.0, 1.0, u_tol)?;
    let im = adaptive_simpson(&|u: f64| u.exp() * psi(u) * (t * u).sin(), -1.0, 1.0, u_tol)?;
    let c = 1.0 / (2.0 * std::f64::consts::PI);
    Ok((c * re, c * im))
}

/// Numerical check of the two Fourier identities: ∫_ℝ f(t) dt = ψ(0) = 1 and
/// ∫_ℝ (1+it) f(t) dt = −ψ'(0) = 0, truncating to |t| ≤ t_max (the transform
/// of a bump decays faster than any polynomial).  Returns the two computed
/// integrals.  Symmetry f(−t) = conj f(t) reduces both to real integrals
/// over [0, t_max].
pub fn fourier_checks(t_max: f64, tol: f64) -> Result<(f64, f64)> {
    // Inner transforms carry quadrature jitter, so the outer t-integral uses
    // fixed composite Gauss–Legendre panels instead of adaptive refinement
    // (adaptivity would chase the jitter as if it were structure).  The
    // integrand oscillates in t no faster than 1 rad (|u| ≤ 1), so 10-point
    // panels of unit width are far inside the rule's accuracy.
    const GL_NODES: [f64; 5] = [
        0.1488743389816312,
        0.4333953941292472,
        0.6794095682990244,
        0.8650633666889845,
        0.9739065285171717,
    ];
    const GL_WEIGHTS: [f64; 5] = [
        0.2955242247147529,
        0.2692667193099963,
        0.2190863625159820,
        0.1494513491505806,
        0.0666713443086881,
    ];
    let u_tol = (tol * 1e-3).max(5e-14);
    let mut re_part = Kahan::new();
    let mut t_im_part = Kahan::new();
    let panels = t_max.ceil() as usize;
    let h = t_max / panels as f64;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for i in 0..GL_NODES.len() {
            for sign in [-1.0f64, 1.0] {
                let t = mid + sign * GL_NODES[i] * h / 2.0;
                let (re, im) = e_psi_transform(t, u_tol)?;
                let w = GL_WEIGHTS[i] * h / 2.0;
                re_part.add(w * re);
                t_im_part.add(w * t * im);
            }
        }
    }
    let check0 = 2.0 * re_part.value();
    let check1 = check0 - 2.0 * t_im_part.value();
    if !check0.is_finite() || !check1.is_finite() {
        return Err(Error::Quadrature("inner transform quadrature failed".into()));
    }
    Ok((check0, check1))
}

/// Hash of sampled ψ and φ values; embedded in reports so results can be
/// tied to the concrete cutoff choice (the underlying constructions only fix
/// the cutoffs up to smoothness).
pub fn cutoff_fingerprint() -> String {
    let mut h = Sha256::new();
    for k in 0..=1024 {
        let u = k as f64 / 1024.0;
        h.update(psi(u).to_le_bytes());
        h.update(phi(u).to_le_bytes());
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}
