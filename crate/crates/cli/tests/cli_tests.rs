use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_siegel-lab"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn siegel-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn correlate_csv_matches_library() {
    let out = run(&["correlate", "--x", "1e4", "--factors", "lambda:0,lambda:1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,value"));
    let row = lines.next().unwrap();
    let (x, value) = row.split_once(',').unwrap();
    assert_eq!(x, "10000");
    let expect = siegel_lab_core::correlations::correlate(
        10_000,
        &[
            (siegel_lab_core::correlations::Factor::Liouville, 0),
            (siegel_lab_core::correlations::Factor::Liouville, 1),
        ],
    )
    .unwrap();
    assert_eq!(value.parse::<f64>().unwrap().to_bits(), expect.to_bits());
}

#[test]
fn correlate_sweep_emits_one_row_per_x() {
    let out = run(&["correlate", "--x", "1000,2000,4000", "--factors", "mangoldt:0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("1000,"));
    assert!(rows[3].starts_with("4000,"));
}

#[test]
fn chain_json_is_deterministic_across_thread_counts() {
    let args = [
        "chain", "--delta", "-3", "--x", "2e4", "--shifts", "0,2", "--eta", "50", "--R", "50",
        "--D", "10", "--windows", "16384",
    ];
    let a = run(&args);
    let b = bin().args(args).arg("--threads").arg("1").output().unwrap();
    let c = bin().args(args).arg("--threads").arg("8").output().unwrap();
    assert!(a.status.success() && b.status.success() && c.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(b.stdout, c.stdout);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(doc["report"]["report_version"], 1);
    assert_eq!(doc["report"]["lines"].as_array().unwrap().len(), 5);
    assert_eq!(doc["config"]["delta"], -3);
    assert!(doc["report"]["cutoff_fingerprint"].is_string());
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "x = 1e4   # sweep default\nfactors = lambda:0,lambda:1\n").unwrap();
    let merged = run(&["correlate", "--config", cfg.to_str().unwrap()]);
    assert!(merged.status.success());
    assert!(stdout(&merged).contains("10000,"));
    // flags win over the file
    let flagged = run(&[
        "correlate",
        "--config",
        cfg.to_str().unwrap(),
        "--x",
        "2000",
    ]);
    assert!(flagged.status.success());
    assert!(stdout(&flagged).contains("2000,"));
    assert!(!stdout(&flagged).contains("10000,"));
}

#[test]
fn exit_codes() {
    // 2: non-fundamental discriminant
    let bad_delta = run(&["char", "--delta", "7"]);
    assert_eq!(bad_delta.status.code(), Some(2));
    // 2: missing required option
    let missing = run(&["correlate", "--x", "100"]);
    assert_eq!(missing.status.code(), Some(2));
    // 2: unknown factor name
    let bad_factor = run(&["correlate", "--x", "100", "--factors", "zeta:0"]);
    assert_eq!(bad_factor.status.code(), Some(2));
    // 0: a successful run
    let ok = run(&["expsum", "--q", "5", "--u1", "1", "--u2", "2"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn sieve_uses_cache_dir() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin()
        .args(["sieve", "--lo", "1", "--hi", "50"])
        .env("SIEGEL_LAB_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(first.status.success());
    let cached: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(cached.len(), 1);
    let second = bin()
        .args(["sieve", "--lo", "1", "--hi", "50"])
        .env("SIEGEL_LAB_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.starts_with("n,spf,lambda,mu,tau,mangoldt"));
    assert!(text.lines().any(|l| l == "49,7,1,0,3,1.9459101490553132"));
}

#[test]
fn approx_tables_have_header_and_rows() {
    for table in ["b", "a"] {
        let out = run(&["approx", "--delta", "-4", "--table", table, "--R", "30", "--D", "50"]);
        assert!(out.status.success(), "table {table}");
        let text = stdout(&out);
        assert!(text.starts_with("d,value"));
        assert!(text.lines().count() > 2);
    }
}

#[test]
fn char_card_contains_l_values() {
    let out = run(&["char", "--delta", "-4", "--x", "1000"]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["L1"].as_f64().unwrap() - std::f64::consts::PI / 4.0).abs() < 1e-8);
    assert_eq!(doc["conductor"], 4);
    assert!(doc["exceptional_sums"]["bands"].is_array());
}

#[test]
fn expsum_scan_is_csv_with_weil_ratios() {
    let out = run(&["expsum", "--scan-qmax", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("q,max_ratio"));
    for line in lines {
        let (_, ratio) = line.split_once(',').unwrap();
        let r: f64 = ratio.parse().unwrap();
        assert!(r <= 1.0 + 1e-12, "{line}");
    }
}

#[test]
fn selftest_exits_zero() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().count() >= 9);
    assert!(text.lines().all(|l| l.contains("PASS")));
}
