//! Thin command-line surface over `siegel-lab-core`.  The CLI layer stays
//! single-threaded; worker parallelism lives behind the library's windowed
//! reductions and is only sized here (`--threads`).
//!
//! Exit codes: 0 success, 2 configuration error, 3 computation error,
//! 4 selftest failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use siegel_lab_core::approximants::{self, ScaleOverrides, SiegelParams};
use siegel_lab_core::arith;
use siegel_lab_core::chain::{chain_report, ChainReport, ShiftSystem};
use siegel_lab_core::correlations::{
    correlate_windowed, level_of_distribution_scan, Factor, DEFAULT_CORRELATE_WINDOW,
};
use siegel_lab_core::exp_sums::{estermann_bound, kloosterman, kloosterman_all};
use siegel_lab_core::quad_char::{l_one, l_prime_one, quality_proxy, QuadChar, QualityProxy};
use siegel_lab_core::selberg;
use siegel_lab_core::smoothing::cutoff_fingerprint;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "siegel-lab", version, about)]
struct Cli {
    /// plain-text key=value defaults, merged under the flags (flags win)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// worker thread count for the parallel reductions
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// output path (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// build a sieve window (cached under SIEGEL_LAB_CACHE_DIR) and dump it as CSV
    Sieve(SieveArgs),
    /// character card: L(1,χ), L'(1,χ), quality proxy, exceptional-prime sums
    Char(CharArgs),
    /// dump an approximant coefficient table (b_d, a_d or c_d) as CSV
    Approx(ApproxArgs),
    /// windowed correlation average E_{n≤x} ∏ f_i(n+h_i)
    Correlate(CorrelateArgs),
    /// five-line approximation-chain report as JSON
    Chain(ChainArgs),
    /// Kloosterman spot values and exhaustive bound scans
    Expsum(ExpsumArgs),
    /// progression-restricted sums of the flat Type-I remainder
    #[command(name = "ld-scan")]
    LdScan(LdScanArgs),
    /// run the full invariant suite
    Selftest,
}

#[derive(Args)]
struct SieveArgs {
    #[arg(long)]
    lo: Option<u64>,
    #[arg(long)]
    hi: Option<u64>,
    /// window size used while sieving
    #[arg(long)]
    windows: Option<u64>,
}

#[derive(Args)]
struct CharArgs {
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i64>,
    /// user-supplied quality η̂ (proxy from L'/L when omitted)
    #[arg(long)]
    eta: Option<f64>,
    /// upper end of the exceptional-prime scan
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    eps0: Option<f64>,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i64>,
    /// which coefficient table: b (λ♯), a (sieve weights) or c (Type-I c_d)
    #[arg(long)]
    table: Option<String>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long = "R0")]
    r0: Option<f64>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    /// largest d emitted for the c_d table
    #[arg(long)]
    limit: Option<u64>,
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
}

#[derive(Args)]
struct CorrelateArgs {
    /// single value or comma-separated sweep, e.g. 1e6,2e6,4e6
    #[arg(long)]
    x: Option<String>,
    /// comma-separated name:shift list, e.g. lambda:0,lambda:1
    #[arg(long)]
    factors: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long = "R0")]
    r0: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
    #[arg(long)]
    windows: Option<u64>,
    /// csv (default) or json
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i64>,
    #[arg(long)]
    x: Option<String>,
    /// number of von Mangoldt shifts; must match --shifts when both given
    #[arg(long)]
    k: Option<usize>,
    /// comma-separated Λ-side shifts, e.g. 0,2
    #[arg(long)]
    shifts: Option<String>,
    /// comma-separated λ-side shifts
    #[arg(long = "shifts-prime")]
    shifts_prime: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long = "R0")]
    r0: Option<f64>,
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
    #[arg(long)]
    windows: Option<u64>,
}

#[derive(Args)]
struct ExpsumArgs {
    #[arg(long)]
    q: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    u1: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    u2: Option<i64>,
    /// exhaustive scan: emit max |S|/bound per modulus up to this q
    #[arg(long = "scan-qmax")]
    scan_qmax: Option<u64>,
}

#[derive(Args)]
struct LdScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<i64>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    a: Option<u64>,
    /// inclusive range, e.g. 1,100000
    #[arg(long)]
    interval: Option<String>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "D")]
    d: Option<f64>,
    #[arg(long = "R0")]
    r0: Option<f64>,
    #[arg(long = "quad-tol")]
    quad_tol: Option<f64>,
}

enum Failure {
    Config(String),
    Compute(String),
    Selftest,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Compute(_) => 3,
            Failure::Selftest => 4,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn compute_err(e: siegel_lab_core::Error) -> Failure {
    Failure::Compute(e.to_string())
}

/// key=value defaults from `--config`; '#' starts a comment.
struct FileCfg(BTreeMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| config_err(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        Ok(FileCfg(map))
    }

    /// flag value if present, else the parsed config-file value
    fn fill<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, Failure> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => match self.0.get(key) {
                Some(s) => s
                    .parse()
                    .map(Some)
                    .map_err(|_| config_err(format!("config key {key}: cannot parse {s:?}"))),
                None => Ok(None),
            },
        }
    }
}

fn require<T>(v: Option<T>, key: &str) -> Result<T, Failure> {
    v.ok_or_else(|| config_err(format!("missing required option --{key}")))
}

/// integer count, accepting scientific shorthand like 1e7
fn parse_count(s: &str) -> Result<u64, Failure> {
    if let Ok(n) = s.parse::<u64>() {
        return Ok(n);
    }
    let f: f64 = s
        .parse()
        .map_err(|_| config_err(format!("cannot parse count {s:?}")))?;
    if !(f.is_finite() && f >= 1.0 && f <= 1e18 && f.fract() == 0.0) {
        return Err(config_err(format!("{s:?} is not a positive integer")));
    }
    Ok(f as u64)
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>, Failure> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| config_err(format!("cannot parse {what} entry {p:?}")))
        })
        .collect()
}

fn emit(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            // tolerate a closed pipe (e.g. `siegel-lab ... | head`)
            match writeln!(lock, "{content}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Failure::Compute(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn character(delta: i64) -> Result<QuadChar, Failure> {
    QuadChar::new(delta).map_err(|e| config_err(e.to_string()))
}

fn quality(chi: &QuadChar, eta: Option<f64>) -> Result<QualityProxy, Failure> {
    quality_proxy(chi, eta).map_err(|e| config_err(e.to_string()))
}

fn siegel_params(
    x: u64,
    k: u32,
    ell: u32,
    eps0: f64,
    eta: QualityProxy,
    r: Option<f64>,
    d: Option<f64>,
    r0: Option<f64>,
) -> Result<SiegelParams, Failure> {
    SiegelParams::new(x, k, ell, eps0, eta, ScaleOverrides { r, d, r0 })
        .map_err(|e| config_err(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("config error: {m}"),
                Failure::Compute(m) => eprintln!("computation error: {m}"),
                Failure::Selftest => eprintln!("selftest failed"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = FileCfg::load(cli.config.as_deref())?;
    if let Some(threads) = cfg.fill(cli.threads, "threads")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| config_err(format!("thread pool: {e}")))?;
    }
    let out = cli.out.as_deref();
    match cli.cmd {
        Cmd::Sieve(a) => cmd_sieve(a, &cfg, out),
        Cmd::Char(a) => cmd_char(a, &cfg, out),
        Cmd::Approx(a) => cmd_approx(a, &cfg, out),
        Cmd::Correlate(a) => cmd_correlate(a, &cfg, out),
        Cmd::Chain(a) => cmd_chain(a, &cfg, out),
        Cmd::Expsum(a) => cmd_expsum(a, &cfg, out),
        Cmd::LdScan(a) => cmd_ld_scan(a, &cfg, out),
        Cmd::Selftest => cmd_selftest(),
    }
}

fn cmd_sieve(a: SieveArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    let lo = require(cfg.fill(a.lo, "lo")?, "lo")?;
    let hi = require(cfg.fill(a.hi, "hi")?, "hi")?;
    let window = cfg.fill(a.windows, "windows")?.unwrap_or(DEFAULT_CORRELATE_WINDOW);
    let cache_path = std::env::var_os("SIEGEL_LAB_CACHE_DIR")
        .map(|dir| PathBuf::from(dir).join(arith::cache_file_name(lo, hi)));
    let table = match &cache_path {
        Some(p) if p.exists() => arith::read_cache(p).map_err(compute_err)?,
        _ => {
            let t = arith::build_table(lo, hi, window).map_err(|e| config_err(e.to_string()))?;
            if let Some(p) = &cache_path {
                arith::write_cache(&t, p).map_err(compute_err)?;
            }
            t
        }
    };
    let mut csv = String::from("n,spf,lambda,mu,tau,mangoldt\n");
    for n in lo.max(2)..=hi {
        let _ = writeln!(
            csv,
            "{n},{},{},{},{},{}",
            table.spf_at(n),
            table.lambda_at(n),
            table.mu_at(n),
            table.tau_at(n),
            table.mangoldt_at(n)
        );
    }
    emit(out, csv.trim_end())
}

fn cmd_char(a: CharArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    let delta = require(cfg.fill(a.delta, "delta")?, "delta")?;
    let x = match cfg.fill(a.x, "x")? {
        Some(s) => parse_count(&s)?,
        None => 1_000_000,
    };
    let eps0 = cfg.fill(a.eps0, "eps0")?.unwrap_or(0.5);
    let eta_flag = cfg.fill(a.eta, "eta")?;
    let chi = character(delta)?;
    let l1 = l_one(&chi, 1e-10).map_err(compute_err)?;
    let lp1 = l_prime_one(&chi, 1e-10).map_err(compute_err)?;
    let eta = quality(&chi, eta_flag)?;
    let exceptional = siegel_lab_core::quad_char::exceptional_sum_report(&chi, x, eps0, &eta)
        .map_err(compute_err)?;
    let doc = json!({
        "report_version": 1,
        "software_version": VERSION,
        "config": { "delta": delta, "x": x, "eps0": eps0, "eta": eta_flag },
        "delta": delta,
        "conductor": chi.conductor(),
        "L1": l1,
        "Lprime1": lp1,
        "eta_hat": eta.eta_hat,
        "eta_method": eta.method,
        "exceptional_sums": exceptional,
        "cutoff_fingerprint": cutoff_fingerprint(),
    });
    emit(out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_approx(a: ApproxArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    let delta = require(cfg.fill(a.delta, "delta")?, "delta")?;
    let table = require(cfg.fill(a.table, "table")?, "table")?;
    let chi = character(delta)?;
    let quad_tol = cfg.fill(a.quad_tol, "quad-tol")?.unwrap_or(1e-10);
    let r = cfg.fill(a.r, "R")?;
    let d = cfg.fill(a.d, "D")?;
    let r0 = cfg.fill(a.r0, "R0")?;
    let entries: BTreeMap<u64, f64> = match table.as_str() {
        "b" => {
            let scale = require(r0.or(r), "R0")?;
            let coeffs = approximants::lambda_sharp_coeffs(scale, require(d, "D")?, &chi)
                .map_err(|e| config_err(e.to_string()))?;
            coeffs.entries
        }
        "a" => {
            let nu = selberg::nu_weights(require(r, "R")?).map_err(|e| config_err(e.to_string()))?;
            nu.weights.entries
        }
        "c" => {
            let x = parse_count(&require(cfg.fill(a.x, "x")?, "x")?)?;
            let eta = quality(&chi, cfg.fill(a.eta, "eta")?)?;
            let params = siegel_params(x, 2, 0, 0.5, eta, r, d, r0)?;
            let limit = cfg.fill(a.limit, "limit")?.unwrap_or(x.min(10_000));
            let (_, c) = approximants::psi_big_coeffs(&params, &chi, limit, quad_tol)
                .map_err(compute_err)?;
            c
        }
        other => return Err(config_err(format!("unknown table {other:?}; expected b, a or c"))),
    };
    let mut csv = String::from("d,value\n");
    for (d, v) in entries {
        let _ = writeln!(csv, "{d},{v}");
    }
    emit(out, csv.trim_end())
}

/// `name:shift` factor specs; the capitalized names are the von Mangoldt
/// approximants, the lowercase ones the Liouville family.
fn build_factors(
    spec: &str,
    delta: Option<i64>,
    r: Option<f64>,
    d: Option<f64>,
    r0: Option<f64>,
    eta: Option<f64>,
    x: u64,
    quad_tol: f64,
) -> Result<Vec<(Factor, u64)>, Failure> {
    let mut chi_cache: Option<QuadChar> = None;
    let mut chi = |delta: Option<i64>| -> Result<QuadChar, Failure> {
        if chi_cache.is_none() {
            chi_cache = Some(character(require(delta, "delta")?)?);
        }
        Ok(chi_cache.clone().unwrap())
    };
    let mut factors = Vec::new();
    let mut max_shift = 0u64;
    let mut specs = Vec::new();
    for part in spec.split(',').filter(|p| !p.trim().is_empty()) {
        let (name, shift) = part
            .trim()
            .split_once(':')
            .ok_or_else(|| config_err(format!("factor {part:?} is not name:shift")))?;
        let shift: u64 = shift
            .parse()
            .map_err(|_| config_err(format!("bad shift in factor {part:?}")))?;
        max_shift = max_shift.max(shift);
        specs.push((name.to_string(), shift));
    }
    for (name, shift) in specs {
        let f = match name.as_str() {
            "one" => Factor::One,
            "lambda" => Factor::Liouville,
            "mangoldt" => Factor::Mangoldt,
            "mu" => Factor::Mu,
            "tau" => Factor::Tau,
            "chi" => Factor::Chi(chi(delta)?),
            "lambda_siegel" => Factor::lambda_siegel(require(r0.or(r), "R0")?, &chi(delta)?),
            "lambda_sharp" => Factor::lambda_sharp(
                require(r0.or(r), "R0")?,
                require(d, "D")?,
                &chi(delta)?,
            )
            .map_err(|e| config_err(e.to_string()))?,
            "Lambda_siegel" => Factor::mangoldt_siegel(require(r, "R")?, &chi(delta)?)
                .map_err(|e| config_err(e.to_string()))?,
            "Lambda_sharp" => {
                let chi = chi(delta)?;
                let eta = quality(&chi, eta)?;
                let params = siegel_params(x, 2, 0, 0.5, eta, r, d, r0)?;
                Factor::mangoldt_sharp(&params, &chi, quad_tol, x + max_shift)
                    .map_err(compute_err)?
            }
            "nu" => Factor::nu(require(r, "R")?).map_err(|e| config_err(e.to_string()))?,
            other => return Err(config_err(format!("unknown factor name {other:?}"))),
        };
        factors.push((f, shift));
    }
    Ok(factors)
}

fn cmd_correlate(a: CorrelateArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    let xs: Vec<u64> = parse_list::<String>(&require(cfg.fill(a.x, "x")?, "x")?, "x")?
        .iter()
        .map(|s| parse_count(s))
        .collect::<Result<_, _>>()?;
    if xs.is_empty() {
        return Err(config_err("empty --x list"));
    }
    let spec = require(cfg.fill(a.factors, "factors")?, "factors")?;
    let delta = cfg.fill(a.delta, "delta")?;
    let r = cfg.fill(a.r, "R")?;
    let d = cfg.fill(a.d, "D")?;
    let r0 = cfg.fill(a.r0, "R0")?;
    let eta = cfg.fill(a.eta, "eta")?;
    let quad_tol = cfg.fill(a.quad_tol, "quad-tol")?.unwrap_or(1e-9);
    let window = cfg.fill(a.windows, "windows")?.unwrap_or(DEFAULT_CORRELATE_WINDOW);
    let format = cfg.fill(a.format, "format")?.unwrap_or_else(|| "csv".into());

    let mut results = Vec::new();
    for &x in &xs {
        let factors = build_factors(&spec, delta, r, d, r0, eta, x, quad_tol)?;
        let value = correlate_windowed(x, &factors, window).map_err(compute_err)?;
        results.push((x, value));
    }
    match format.as_str() {
        "csv" => {
            let mut csv = String::from("x,value\n");
            for (x, v) in &results {
                let _ = writeln!(csv, "{x},{v}");
            }
            emit(out, csv.trim_end())
        }
        "json" => {
            let doc = json!({
                "report_version": 1,
                "software_version": VERSION,
                "config": {
                    "factors": spec, "delta": delta, "R": r, "D": d, "R0": r0,
                    "eta": eta, "quad_tol": quad_tol, "window": window,
                },
                "results": results.iter().map(|&(x, v)| json!({"x": x, "value": v})).collect::<Vec<_>>(),
                "cutoff_fingerprint": cutoff_fingerprint(),
            });
            emit(out, &serde_json::to_string_pretty(&doc).unwrap())
        }
        other => Err(config_err(format!("unknown format {other:?}; expected csv or json"))),
    }
}

#[derive(Serialize)]
struct ChainDocument<'a> {
    config: serde_json::Value,
    report: &'a ChainReport,
}

fn cmd_chain(a: ChainArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    let delta = require(cfg.fill(a.delta, "delta")?, "delta")?;
    let x = parse_count(&require(cfg.fill(a.x, "x")?, "x")?)?;
    let shifts: Vec<u64> = match cfg.fill(a.shifts, "shifts")? {
        Some(s) => parse_list(&s, "shift")?,
        None => Vec::new(),
    };
    let shifts_prime: Vec<u64> = match cfg.fill(a.shifts_prime, "shifts-prime")? {
        Some(s) => parse_list(&s, "shift")?,
        None => Vec::new(),
    };
    if let Some(k) = cfg.fill(a.k, "k")? {
        if k != shifts.len() {
            return Err(config_err(format!(
                "--k {k} disagrees with {} entries in --shifts",
                shifts.len()
            )));
        }
    }
    let eps0 = cfg.fill(a.eps0, "eps0")?.unwrap_or(0.5);
    let quad_tol = cfg.fill(a.quad_tol, "quad-tol")?.unwrap_or(1e-9);
    let window = cfg.fill(a.windows, "windows")?.unwrap_or(DEFAULT_CORRELATE_WINDOW);
    let eta_flag = cfg.fill(a.eta, "eta")?;
    let r = cfg.fill(a.r, "R")?;
    let d = cfg.fill(a.d, "D")?;
    let r0 = cfg.fill(a.r0, "R0")?;

    let chi = character(delta)?;
    let eta = quality(&chi, eta_flag)?;
    let system = ShiftSystem::new(shifts.clone(), shifts_prime.clone())
        .map_err(|e| config_err(e.to_string()))?;
    let params = siegel_params(x, system.k() as u32, system.ell() as u32, eps0, eta, r, d, r0)?;
    let report = chain_report(&params, &system, &chi, quad_tol, window).map_err(compute_err)?;
    let doc = ChainDocument {
        config: json!({
            "delta": delta, "x": x, "shifts": shifts, "shifts_prime": shifts_prime,
            "eta": eta_flag, "eps0": eps0, "R": r, "D": d, "R0": r0,
            "quad_tol": quad_tol, "window": window,
        }),
        report: &report,
    };
    emit(out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_expsum(a: ExpsumArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    if let Some(q_max) = cfg.fill(a.scan_qmax, "scan-qmax")? {
        use rayon::prelude::*;
        let rows: Vec<(u64, f64)> = (1..=q_max)
            .into_par_iter()
            .map(|q| {
                let all = kloosterman_all(q);
                let mut max_ratio = 0.0f64;
                for u1 in 0..q {
                    for u2 in 0..q {
                        let ratio = all[(u1 * q + u2) as usize].norm()
                            / estermann_bound(u1 as i64, u2 as i64, q);
                        max_ratio = max_ratio.max(ratio);
                    }
                }
                (q, max_ratio)
            })
            .collect();
        let mut csv = String::from("q,max_ratio\n");
        for (q, r) in rows {
            let _ = writeln!(csv, "{q},{r}");
        }
        return emit(out, csv.trim_end());
    }
    let q = require(cfg.fill(a.q, "q")?, "q")?;
    if q == 0 {
        return Err(config_err("q must be positive"));
    }
    let u1 = cfg.fill(a.u1, "u1")?.unwrap_or(0);
    let u2 = cfg.fill(a.u2, "u2")?.unwrap_or(0);
    let s = kloosterman(u1, u2, q);
    let doc = json!({
        "q": q, "u1": u1, "u2": u2,
        "re": s.re, "im": s.im, "abs": s.norm(),
        "estermann_bound": estermann_bound(u1, u2, q),
    });
    emit(out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_ld_scan(a: LdScanArgs, cfg: &FileCfg, out: Option<&Path>) -> Result<(), Failure> {
    let delta = require(cfg.fill(a.delta, "delta")?, "delta")?;
    let x = parse_count(&require(cfg.fill(a.x, "x")?, "x")?)?;
    let q = require(cfg.fill(a.q, "q")?, "q")?;
    let res = require(cfg.fill(a.a, "a")?, "a")?;
    let interval = require(cfg.fill(a.interval, "interval")?, "interval")?;
    let ends: Vec<u64> = parse_list(&interval, "interval")?;
    let [lo, hi] = ends[..] else {
        return Err(config_err("--interval needs exactly lo,hi"));
    };
    let quad_tol = cfg.fill(a.quad_tol, "quad-tol")?.unwrap_or(1e-9);
    let chi = character(delta)?;
    let eta = quality(&chi, cfg.fill(a.eta, "eta")?)?;
    let params = siegel_params(
        x,
        2,
        0,
        0.5,
        eta,
        cfg.fill(a.r, "R")?,
        cfg.fill(a.d, "D")?,
        cfg.fill(a.r0, "R0")?,
    )?;
    let scan = level_of_distribution_scan(&params, &chi, q, res, (lo, hi), None, quad_tol)
        .map_err(compute_err)?;
    let doc = json!({
        "report_version": 1,
        "software_version": VERSION,
        "config": { "delta": delta, "x": x, "q": q, "a": res, "interval": [lo, hi], "quad_tol": quad_tol },
        "sum": scan.sum,
        "trivial_bound": scan.trivial_bound,
        "terms": scan.terms,
        "cutoff_fingerprint": cutoff_fingerprint(),
    });
    emit(out, &serde_json::to_string_pretty(&doc).unwrap())
}

fn cmd_selftest() -> Result<(), Failure> {
    let mut ok = true;
    for check in siegel_lab_core::selftest::run_selftest() {
        println!(
            "{}: {} ({})",
            check.name,
            if check.pass { "PASS" } else { "FAIL" },
            check.detail
        );
        ok &= check.pass;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Selftest)
    }
}
