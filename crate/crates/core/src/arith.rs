//! Segmented sieving of λ, Λ, μ, τ and smallest prime factors, plus the
//! factorization utilities (smooth/rough split, greedy factor packing,
//! bounded divisor lists) that the Type-I machinery leans on.

use crate::{Error, Result};
use rayon::prelude::*;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Default per-window entry cap: keeps all five arrays in a few hundred MB.
pub const DEFAULT_WINDOW: u64 = 1 << 24;

const CACHE_MAGIC: &[u8; 4] = b"SGL1";
const CACHE_VERSION: u32 = 1;

/// Sieved window [lo, hi] of the base arithmetic functions, indexed by n - lo.
/// Immutable after construction; safe for concurrent reads.
#[derive(Clone, Debug, PartialEq)]
pub struct ArithTable {
    pub lo: u64,
    pub hi: u64,
    /// (-1)^Ω(n)
    pub lambda: Vec<i8>,
    /// log p at prime powers p^j, else 0
    pub mangoldt: Vec<f64>,
    /// Möbius μ(n)
    pub mu: Vec<i8>,
    /// divisor count τ(n)
    pub tau: Vec<u32>,
    /// smallest prime factor, spf(1) = 1
    pub spf: Vec<u64>,
}

impl ArithTable {
    #[inline]
    pub fn idx(&self, n: u64) -> usize {
        debug_assert!(n >= self.lo && n <= self.hi);
        (n - self.lo) as usize
    }

    #[inline]
    pub fn lambda_at(&self, n: u64) -> i8 {
        self.lambda[self.idx(n)]
    }

    #[inline]
    pub fn mangoldt_at(&self, n: u64) -> f64 {
        self.mangoldt[self.idx(n)]
    }

    #[inline]
    pub fn mu_at(&self, n: u64) -> i8 {
        self.mu[self.idx(n)]
    }

    #[inline]
    pub fn tau_at(&self, n: u64) -> u32 {
        self.tau[self.idx(n)]
    }

    #[inline]
    pub fn spf_at(&self, n: u64) -> u64 {
        self.spf[self.idx(n)]
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false // lo <= hi is a construction invariant
    }

    /// Factor n by walking the spf chain.  Requires lo = 1 and n <= hi so
    /// every quotient stays inside the table.
    pub fn factor(&self, n: u64) -> Vec<(u64, u32)> {
        assert_eq!(self.lo, 1, "spf chain needs a table rooted at 1");
        assert!(n >= 1 && n <= self.hi);
        let mut out = Vec::new();
        let mut m = n;
        while m > 1 {
            let p = self.spf_at(m);
            let mut e = 0u32;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            out.push((p, e));
        }
        out
    }
}

/// Simple sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for p in 2..=n {
        if !composite[p] {
            primes.push(p as u64);
            let mut m = p * p;
            while m <= n {
                composite[m] = true;
                m += p;
            }
        }
    }
    primes
}

/// Primes in [lo, hi] by a segmented sieve, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || hi < lo {
        return Vec::new();
    }
    let lo = lo.max(2);
    let base = primes_up_to(isqrt(hi));
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in &base {
        let start = lo.div_ceil(p).max(2) * p;
        let mut m = start;
        while m <= hi {
            if m != p {
                composite[(m - lo) as usize] = true;
            }
            m += p;
        }
    }
    (0..len)
        .filter(|&i| !composite[i])
        .map(|i| lo + i as u64)
        .collect()
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |s| s > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |s| s <= n) {
        r += 1;
    }
    r
}

/// Sieve one window with all arrays filled.  Errors when the window exceeds
/// the default entry cap; use [`build_table`] to stitch larger ranges.
pub fn build_window(lo: u64, hi: u64) -> Result<ArithTable> {
    build_window_capped(lo, hi, DEFAULT_WINDOW)
}

pub fn build_window_capped(lo: u64, hi: u64, cap: u64) -> Result<ArithTable> {
    if lo < 1 || hi < lo {
        return Err(Error::Config(format!("bad window [{lo}, {hi}]")));
    }
    if hi > i64::MAX as u64 {
        return Err(Error::Overflow(format!("hi = {hi} exceeds 2^63 - 1")));
    }
    let len = hi - lo + 1;
    if len > cap {
        return Err(Error::WindowTooLarge { len, cap });
    }
    let base = primes_up_to(isqrt(hi));
    let mut t = alloc_table(lo, hi);
    fill_window(&mut t, &base);
    Ok(t)
}

/// Sieve [lo, hi] as a sequence of windows of at most `window` entries,
/// concatenated into one table.  Windows are filled in parallel; the result
/// is identical to a single-window sieve (seamlessness is a tested
/// invariant), so the parallelism cannot perturb output.
pub fn build_table(lo: u64, hi: u64, window: u64) -> Result<ArithTable> {
    if lo < 1 || hi < lo {
        return Err(Error::Config(format!("bad range [{lo}, {hi}]")));
    }
    if hi > i64::MAX as u64 {
        return Err(Error::Overflow(format!("hi = {hi} exceeds 2^63 - 1")));
    }
    let window = window.max(1);
    let base = primes_up_to(isqrt(hi));
    let mut t = alloc_table(lo, hi);
    let w = window as usize;
    let starts: Vec<u64> = (lo..=hi).step_by(w).collect();
    // Split the arrays into per-window slices so each chunk is filled
    // independently.
    let chunks: Vec<_> = {
        let mut rest = (
            t.lambda.as_mut_slice(),
            t.mangoldt.as_mut_slice(),
            t.mu.as_mut_slice(),
            t.tau.as_mut_slice(),
            t.spf.as_mut_slice(),
        );
        let mut out = Vec::with_capacity(starts.len());
        for &s in &starts {
            let e = (s + window - 1).min(hi);
            let n = (e - s + 1) as usize;
            let (la, la_r) = rest.0.split_at_mut(n);
            let (ma, ma_r) = rest.1.split_at_mut(n);
            let (mu, mu_r) = rest.2.split_at_mut(n);
            let (ta, ta_r) = rest.3.split_at_mut(n);
            let (sp, sp_r) = rest.4.split_at_mut(n);
            rest = (la_r, ma_r, mu_r, ta_r, sp_r);
            out.push((s, e, la, ma, mu, ta, sp));
        }
        out
    };
    chunks
        .into_par_iter()
        .for_each(|(s, e, la, ma, mu, ta, sp)| {
            let mut sub = alloc_table(s, e);
            fill_window(&mut sub, &base);
            la.copy_from_slice(&sub.lambda);
            ma.copy_from_slice(&sub.mangoldt);
            mu.copy_from_slice(&sub.mu);
            ta.copy_from_slice(&sub.tau);
            sp.copy_from_slice(&sub.spf);
        });
    Ok(t)
}

fn alloc_table(lo: u64, hi: u64) -> ArithTable {
    let len = (hi - lo + 1) as usize;
    ArithTable {
        lo,
        hi,
        lambda: vec![0; len],
        mangoldt: vec![0.0; len],
        mu: vec![0; len],
        tau: vec![0; len],
        spf: vec![0; len],
    }
}

/// One smallest-prime-factor pass drives all five arrays at once: divide out
/// each base prime, track Ω, squarefreeness, divisor count and the number of
/// distinct primes; whatever remains after the pass is a single prime
/// exceeding sqrt(hi).
fn fill_window(t: &mut ArithTable, base: &[u64]) {
    let lo = t.lo;
    let hi = t.hi;
    let len = t.len();
    let mut rem: Vec<u64> = (lo..=hi).collect();
    let mut omega = vec![0u8; len];
    let mut distinct = vec![0u8; len];
    let mut nonsqfree = vec![false; len];
    t.tau.fill(1);
    for &p in base {
        if p.saturating_mul(p) > hi {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m <= hi {
            let i = (m - lo) as usize;
            let mut e = 0u32;
            while rem[i] % p == 0 {
                rem[i] /= p;
                e += 1;
            }
            omega[i] += e as u8;
            distinct[i] += 1;
            t.tau[i] *= e + 1;
            if t.spf[i] == 0 {
                t.spf[i] = p;
            }
            if e >= 2 {
                nonsqfree[i] = true;
            }
            m += p;
        }
    }
    for i in 0..len {
        let n = lo + i as u64;
        if n == 1 {
            t.lambda[i] = 1;
            t.mu[i] = 1;
            t.tau[i] = 1;
            t.spf[i] = 1;
            t.mangoldt[i] = 0.0;
            continue;
        }
        let r = rem[i];
        if r > 1 {
            // leftover cofactor is prime (> sqrt(hi))
            omega[i] += 1;
            distinct[i] += 1;
            t.tau[i] *= 2;
            if t.spf[i] == 0 {
                t.spf[i] = r;
            }
        }
        let sign = if omega[i] % 2 == 0 { 1 } else { -1 };
        t.lambda[i] = sign;
        t.mu[i] = if nonsqfree[i] { 0 } else { sign };
        t.mangoldt[i] = if distinct[i] == 1 {
            (t.spf[i] as f64).ln()
        } else {
            0.0
        };
    }
}

/// Trial-division factorization; intended for desk-scale n.
pub fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut m = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    out
}

/// Split n = smooth · rough with every prime of `smooth` at most z and every
/// prime of `rough` above z.
pub fn smooth_rough_split(n: u64, z: f64) -> (u64, u64) {
    let mut smooth = 1u64;
    let mut rough = 1u64;
    for (p, e) in factorize(n) {
        let part = p.pow(e);
        if (p as f64) <= z {
            smooth *= part;
        } else {
            rough *= part;
        }
    }
    (smooth, rough)
}

/// Greedy packing of the z-smooth part of n into factors bounded by y:
/// n = rough · ∏ parts with each part z-smooth and ≤ y.  Packing primes in
/// ascending order means every closed part would overflow y with the next
/// prime, so each part except possibly the last exceeds y/z, giving the
/// count bound 1 + log_{y/z} n.
pub fn landreau_factor(n: u64, y: f64, z: f64) -> Result<(u64, Vec<u64>)> {
    if !(y > z && z > 1.0) {
        return Err(Error::InvalidThresholds { y, z });
    }
    let mut rough = 1u64;
    let mut parts = Vec::new();
    let mut cur = 1u64;
    for (p, e) in factorize(n) {
        if (p as f64) > z {
            rough *= p.pow(e);
            continue;
        }
        for _ in 0..e {
            if (cur as f64) * (p as f64) > y {
                parts.push(cur);
                cur = p;
            } else {
                cur *= p;
            }
        }
    }
    if cur > 1 {
        parts.push(cur);
    }
    Ok((rough, parts))
}

/// All divisors d | n with d <= bound, ascending.
pub fn divisors_up_to(n: u64, bound: u64) -> Vec<u64> {
    let mut divs = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = divs.len();
        let mut pe = 1u64;
        for _ in 0..e {
            pe = match pe.checked_mul(p) {
                Some(v) => v,
                None => break,
            };
            for i in 0..prev {
                if let Some(d) = divs[i].checked_mul(pe) {
                    if d <= bound {
                        divs.push(d);
                    }
                }
            }
        }
        divs.retain(|&d| d <= bound);
    }
    divs.sort_unstable();
    divs
}

/// All divisors of n, ascending.
pub fn divisors(n: u64) -> Vec<u64> {
    divisors_up_to(n, u64::MAX)
}

/// Canonical cache file name for a window.
pub fn cache_file_name(lo: u64, hi: u64) -> String {
    format!("sgl1-{lo}-{hi}-v{CACHE_VERSION}.bin")
}

/// Little-endian binary dump: magic "SGL1", version, lo, hi, length, then the
/// five raw arrays in declaration order.
pub fn write_cache(table: &ArithTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&CACHE_VERSION.to_le_bytes())?;
    w.write_all(&table.lo.to_le_bytes())?;
    w.write_all(&table.hi.to_le_bytes())?;
    w.write_all(&(table.len() as u64).to_le_bytes())?;
    for &v in &table.lambda {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in &table.mangoldt {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in &table.mu {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in &table.tau {
        w.write_all(&v.to_le_bytes())?;
    }
    for &v in &table.spf {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_cache(path: &Path) -> Result<ArithTable> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != CACHE_MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let version = u32::from_le_bytes(b4);
    if version != CACHE_VERSION {
        return Err(Error::CacheFormat(format!("unsupported version {version}")));
    }
    r.read_exact(&mut b8)?;
    let lo = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let hi = u64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let len = u64::from_le_bytes(b8);
    if lo < 1 || hi < lo || len != hi - lo + 1 {
        return Err(Error::CacheFormat("inconsistent header".into()));
    }
    let len = len as usize;
    let mut t = alloc_table(lo, hi);
    let mut b1 = [0u8; 1];
    for i in 0..len {
        r.read_exact(&mut b1)?;
        t.lambda[i] = i8::from_le_bytes(b1);
    }
    for i in 0..len {
        r.read_exact(&mut b8)?;
        t.mangoldt[i] = f64::from_le_bytes(b8);
    }
    for i in 0..len {
        r.read_exact(&mut b1)?;
        t.mu[i] = i8::from_le_bytes(b1);
    }
    for i in 0..len {
        r.read_exact(&mut b4)?;
        t.tau[i] = u32::from_le_bytes(b4);
    }
    for i in 0..len {
        r.read_exact(&mut b8)?;
        t.spf[i] = u64::from_le_bytes(b8);
    }
    Ok(t)
}
