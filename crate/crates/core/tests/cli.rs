use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copula-outage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

/// Data rows (header excluded) parsed as numbers.
fn rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect()
}

fn header(text: &str) -> &str {
    text.lines().find(|l| !l.starts_with('#')).unwrap()
}

#[test]
fn p2p_single_point() {
    let o = run(&[
        "outage", "p2p", "--lx", "1", "--ly", "1", "--snr-db", "10", "--rate", "1",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(header(&text), "rate,lower,upper");
    assert!(text.ends_with("\n1,0,0.095162581964\n"), "{text}");
}

#[test]
fn uniform_sum_curve() {
    let o = run(&[
        "bounds",
        "sum",
        "uniform:1:3",
        "uniform:2:5",
        "--from",
        "0",
        "--to",
        "20",
        "--points",
        "201",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("# fx=uniform:1:3\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 201);
    for row in &r {
        let s = row[0];
        assert!(
            (row[1] - ((s - 5.0) / 3.0).clamp(0.0, 1.0)).abs() < 1e-9,
            "{row:?}"
        );
        assert!(
            (row[2] - ((s - 3.0) / 3.0).clamp(0.0, 1.0)).abs() < 1e-9,
            "{row:?}"
        );
    }
    assert!(r.windows(2).all(|w| w[0][0] < w[1][0]));
}

#[test]
fn uniform_product_lower_reaches_one_at_15() {
    let o = run(&[
        "bounds",
        "product",
        "uniform:1:3",
        "uniform:2:5",
        "--from",
        "0",
        "--to",
        "20",
        "--points",
        "201",
    ]);
    assert!(o.status.success());
    for row in rows(&stdout(&o)) {
        assert!(
            (row[1] - ((row[0] - 5.0) / 10.0).clamp(0.0, 1.0)).abs() < 1e-6,
            "{row:?}"
        );
        assert!(row[1] <= row[2]);
    }
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let o = run(&[
        "bounds", "sum", "exp:1", "exp:1", "--from", "0", "--to", "0", "--points", "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("start < stop"));
}

#[test]
fn parse_failures_exit_2() {
    for args in [
        vec![
            "bounds",
            "sum",
            "gauss:0:1",
            "exp:1",
            "--from",
            "0",
            "--to",
            "1",
        ],
        vec![
            "bounds", "sum", "exp:-1", "exp:1", "--from", "0", "--to", "1",
        ],
        vec![
            "bounds", "cube", "exp:1", "exp:1", "--from", "0", "--to", "1",
        ],
        vec!["outage", "p2p", "--rate", "1", "--snr-db", "abc"],
        vec!["outage", "p2p", "--rate", "-1"],
        vec![
            "outage",
            "corr",
            "--rate",
            "1",
            "--rho",
            "0.5",
            "--samples",
            "10",
        ],
        vec![
            "outage",
            "ris",
            "--rate-from",
            "0",
            "--rate-to",
            "1",
            "--log",
        ],
        vec!["verify", "--samples", "5"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bad_thread_env_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_copula-outage"))
        .args(["outage", "p2p", "--rate", "1"])
        .env("COPULA_OUTAGE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn corr_estimates_stay_in_band() {
    let args = [
        "outage",
        "corr",
        "--snr-db",
        "10",
        "--rate",
        "1",
        "--rho-from",
        "0",
        "--rho-to",
        "1",
        "--points",
        "21",
        "--samples",
        "1000000",
        "--seed",
        "42",
    ];
    let o = run(&args);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(header(&text), "rho,mc_estimate,mc_stderr,lower,upper");
    assert!(text.contains("# seed=42\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 21);
    for row in r {
        assert!(row[1] >= 0.0 && row[1] <= 0.095_162_581_96, "{row:?}");
        assert_eq!((row[3], row[4]), (0.0, 0.095162581964));
    }
}

#[test]
fn ris_columns_are_ordered() {
    let o = run(&[
        "outage",
        "ris",
        "--lx",
        "1",
        "--ly",
        "1",
        "--snr-db",
        "0",
        "--rate-from",
        "0.001",
        "--rate-to",
        "10",
        "--points",
        "50",
        "--log",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(header(&text), "rate,lower,independent,upper");
    let r = rows(&text);
    assert_eq!(r.len(), 50);
    assert_eq!((r[0][0], r[49][0]), (0.001, 10.0));
    for row in r {
        assert!(row[1] <= row[2] && row[2] <= row[3], "{row:?}");
    }
}

#[test]
fn mac_rate_sweep() {
    let o = run(&[
        "outage",
        "mac",
        "--lx",
        "10",
        "--ly",
        "10",
        "--rate-from",
        "0.5",
        "--rate-to",
        "1",
        "--points",
        "2",
    ]);
    assert!(o.status.success());
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 2);
    for row in &r {
        assert_eq!(row[0], row[1]);
        assert!(row[2] <= row[3]);
    }
    // both sums exceed 1 at lx = ly = 10, R1 = R2 = 1
    assert_eq!(r[1][3], 1.0);
}

#[test]
fn verify_passes_and_is_deterministic() {
    let a = run(&["verify", "--samples", "100000", "--seed", "7"]);
    let b = run(&["verify", "--samples", "100000", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    assert!(!stdout(&a).contains("FAIL"));
}

#[test]
fn verify_flags_faulty_copula() {
    let o = run(&["verify", "--inject-faulty-copula"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("FAIL copula-validity[max(a,b)]"));
    assert!(text.contains("GroundedBoundary"));
}

#[test]
fn seed_changes_monte_carlo_output() {
    let base = [
        "outage",
        "corr",
        "--rate",
        "1",
        "--snr-db",
        "10",
        "--rho",
        "0.5",
        "--samples",
        "10000",
    ];
    let a = run(&[&base[..], &["--seed", "1"]].concat());
    let b = run(&[&base[..], &["--seed", "2"]].concat());
    assert_ne!(rows(&stdout(&a)), rows(&stdout(&b)));
}
