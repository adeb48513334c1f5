//! The five-line approximation chain for Hardy–Littlewood–Chowla averages:
//! (Λ,λ) → (Λ,λ_Siegel) → (Λ_Siegel,λ_Siegel) → (Λ_Siegel,λ♯) → (Λ♯,λ♯),
//! each line evaluated with the same windowed correlation pipeline, the
//! inter-line gaps reported as data, and the last line set against the
//! singular series.

use crate::approximants::SiegelParams;
use crate::correlations::{self, Factor};
use crate::quad_char::QuadChar;
use crate::smoothing::cutoff_fingerprint;
use crate::{Error, Result};
use serde::Serialize;

pub const REPORT_VERSION: u32 = 1;
pub const SINGULAR_SERIES_CUTOFF: u64 = 1_000_000;

/// Shift system h_1..h_k (von Mangoldt side) and h'_1..h'_ℓ (Liouville
/// side); all k+ℓ shifts pairwise distinct.
#[derive(Clone, Debug, Serialize)]
pub struct ShiftSystem {
    pub h: Vec<u64>,
    pub h_prime: Vec<u64>,
}

impl ShiftSystem {
    pub fn new(h: Vec<u64>, h_prime: Vec<u64>) -> Result<Self> {
        let mut all: Vec<u64> = h.iter().chain(h_prime.iter()).copied().collect();
        all.sort_unstable();
        let before = all.len();
        all.dedup();
        if all.len() != before {
            return Err(Error::Config("shifts must be pairwise distinct".into()));
        }
        Ok(Self { h, h_prime })
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn ell(&self) -> usize {
        self.h_prime.len()
    }

    pub fn max_shift(&self) -> u64 {
        self.h
            .iter()
            .chain(self.h_prime.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainLine {
    pub label: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainGap {
    pub from: &'static str,
    pub to: &'static str,
    pub abs: f64,
    /// gap relative to |line (i)|; absent when line (i) vanishes
    pub rel_to_first: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SingularSeriesReport {
    pub value: f64,
    pub tail: f64,
    pub cutoff: u64,
}

/// Full chain evaluation report.  Serialization is canonical: identical
/// configuration gives byte-identical JSON (no timestamps or timings in the
/// serialized form — wall-clock data would break the determinism contract).
#[derive(Clone, Debug, Serialize)]
pub struct ChainReport {
    pub report_version: u32,
    pub software_version: &'static str,
    pub delta: i64,
    pub x: u64,
    pub shifts: ShiftSystem,
    pub params: SiegelParams,
    pub quad_tol: f64,
    pub window: u64,
    pub cutoff_fingerprint: String,
    pub degenerate_sharp_window: bool,
    pub lines: Vec<ChainLine>,
    pub gaps: Vec<ChainGap>,
    pub singular_series: SingularSeriesReport,
    /// |line (v) − 𝔖|
    pub final_gap: f64,
}

impl ChainReport {
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

const LINE_LABELS: [&str; 5] = [
    "mangoldt-liouville",
    "mangoldt-liouville_siegel",
    "mangoldt_siegel-liouville_siegel",
    "mangoldt_siegel-liouville_sharp",
    "mangoldt_sharp-liouville_sharp",
];

/// Evaluate the five chain lines at x with the given scales and report the
/// gaps.  k ≤ 2 enforced here (the mixed-correlation setting); raw
/// correlations of any arity remain available through `correlate`.
pub fn chain_report(
    params: &SiegelParams,
    shifts: &ShiftSystem,
    chi: &QuadChar,
    quad_tol: f64,
    window: u64,
) -> Result<ChainReport> {
    if shifts.k() > 2 {
        return Err(Error::Config(format!(
            "chain mode requires k <= 2, got k = {}",
            shifts.k()
        )));
    }
    let x = params.x;
    let n_max = x + shifts.max_shift();

    // the five (Λ-side, λ-side) factor assignments
    let mangoldt = Factor::Mangoldt;
    let mangoldt_siegel = Factor::mangoldt_siegel(params.r, chi)?;
    let mangoldt_sharp = Factor::mangoldt_sharp(params, chi, quad_tol, n_max)?;
    let liouville = Factor::Liouville;
    let liouville_siegel = Factor::lambda_siegel(params.r0, chi);
    let liouville_sharp = Factor::lambda_sharp(params.r0, params.d, chi)?;

    let assemble = |big: &Factor, small: &Factor| -> Vec<(Factor, u64)> {
        shifts
            .h
            .iter()
            .map(|&h| (big.clone(), h))
            .chain(shifts.h_prime.iter().map(|&h| (small.clone(), h)))
            .collect()
    };
    let line_factors = [
        assemble(&mangoldt, &liouville),
        assemble(&mangoldt, &liouville_siegel),
        assemble(&mangoldt_siegel, &liouville_siegel),
        assemble(&mangoldt_siegel, &liouville_sharp),
        assemble(&mangoldt_sharp, &liouville_sharp),
    ];
    let mut lines = Vec::with_capacity(5);
    for (label, factors) in LINE_LABELS.iter().zip(line_factors.iter()) {
        let value = correlations::correlate_windowed(x, factors, window)?;
        if !value.is_finite() {
            return Err(Error::Nonconvergence(format!(
                "chain line {label} is not finite"
            )));
        }
        lines.push(ChainLine { label, value });
    }

    let first = lines[0].value;
    let gaps: Vec<ChainGap> = lines
        .windows(2)
        .map(|w| {
            let abs = (w[0].value - w[1].value).abs();
            ChainGap {
                from: w[0].label,
                to: w[1].label,
                abs,
                rel_to_first: if first != 0.0 {
                    Some(abs / first.abs())
                } else {
                    None
                },
            }
        })
        .collect();

    let singular_series = if shifts.ell() > 0 {
        SingularSeriesReport {
            value: 0.0,
            tail: 0.0,
            cutoff: SINGULAR_SERIES_CUTOFF,
        }
    } else if shifts.k() == 0 {
        SingularSeriesReport {
            value: 1.0,
            tail: 0.0,
            cutoff: SINGULAR_SERIES_CUTOFF,
        }
    } else {
        let (value, tail) = correlations::singular_series(&shifts.h, SINGULAR_SERIES_CUTOFF)?;
        SingularSeriesReport {
            value,
            tail,
            cutoff: SINGULAR_SERIES_CUTOFF,
        }
    };
    let final_gap = (lines[4].value - singular_series.value).abs();

    Ok(ChainReport {
        report_version: REPORT_VERSION,
        software_version: env!("CARGO_PKG_VERSION"),
        delta: chi.delta(),
        x,
        shifts: shifts.clone(),
        params: params.clone(),
        quad_tol,
        window,
        cutoff_fingerprint: cutoff_fingerprint(),
        degenerate_sharp_window: params.degenerate_sharp_window(chi),
        lines,
        gaps,
        singular_series,
        final_gap,
    })
}
