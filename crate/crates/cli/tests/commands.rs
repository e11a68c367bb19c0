use std::path::Path;
use std::process::{Command, Output};

use mmd_cli::io::{read_series, write_series, SeriesFormat};

fn mmd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmd")).args(args).output().unwrap()
}

fn mmd_env(args: &[&str], key: &str, value: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mmd"))
        .args(args)
        .env(key, value)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn ok(o: &Output) {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        o.status.code(),
        String::from_utf8_lossy(&o.stdout),
        String::from_utf8_lossy(&o.stderr)
    );
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

fn set_key(config: &Path, key: &str, value: &str) {
    let text = std::fs::read_to_string(config).unwrap();
    let mut lines: Vec<String> = text
        .lines()
        .filter(|l| !l.starts_with(&format!("{key} =")))
        .map(String::from)
        .collect();
    lines.insert(0, format!("{key} = {value}"));
    std::fs::write(config, lines.join("\n")).unwrap();
}

#[test]
fn generate_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&mmd(&["generate", "--example", "ex2", "--fundamental", "20", "--len", "4096", "--noise", "0.1", "--seed", "7", "--out", p(out)]));
    }
    for name in ["signal.txt", "phase_0.txt", "phase_1.txt", "component_0.txt", "truth_1.csv", "run.toml"] {
        assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap(), "{name}");
    }
    let c = dir.path().join("c");
    ok(&mmd(&["generate", "--example", "ex2", "--fundamental", "20", "--len", "4096", "--noise", "0.1", "--seed", "8", "--out", p(&c)]));
    assert_ne!(std::fs::read(a.join("signal.txt")).unwrap(), std::fs::read(c.join("signal.txt")).unwrap());
}

#[test]
fn generate_then_decompose_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&mmd(&["generate", "--example", "ex3", "--len", "16384", "--binary", "--out", p(&data)]));
    let config = data.join("run.toml");
    set_key(&config, "levels", "[0, 1]");
    set_key(&config, "Ls", "100");
    let out = dir.path().join("out");
    ok(&mmd(&["decompose", "--config", p(&config), "--out", p(&out)]));
    for k in 0..2 {
        for name in [
            format!("coefficients_{k}.csv"),
            format!("shapes_{k}.csv"),
            format!("component_{k}.bin"),
            format!("approx_{k}_l0.bin"),
            format!("approx_{k}_l1.bin"),
        ] {
            assert!(out.join(&name).exists(), "{name}");
        }
    }
    assert!(out.join("trace.csv").exists());
    let signal = read_series(&data.join("signal.bin")).unwrap();
    let residual = read_series(&out.join("residual.bin")).unwrap();
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ratio = norm(&residual) / norm(&signal);
    assert!(ratio < 1e-2, "residual ratio {ratio}");
    let header = std::fs::read_to_string(out.join("coefficients_0.csv")).unwrap();
    assert!(header.starts_with("n,a,b\n"));
    let trace = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,relative_residual\n"));

    // identical inputs give identical artifacts
    let again = dir.path().join("again");
    ok(&mmd_env(&["decompose", "--config", p(&config), "--out", p(&again)], "MMD_THREADS", "1"));
    for name in ["residual.bin", "shapes_1.csv", "coefficients_0.csv", "trace.csv"] {
        assert_eq!(std::fs::read(out.join(name)).unwrap(), std::fs::read(again.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn single_component_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("one.toml");
    std::fs::write(
        &spec,
        r#"
[[component]]
fundamental = 24
alpha_cos = 0.3
alpha_sin = 0.1
warp = 0.004
shape = { kind = "piecewise_linear", knots = [[0.0, 0.0], [0.3, 1.0], [0.4, -0.6], [0.7, 0.1]] }
"#,
    )
    .unwrap();
    let data = dir.path().join("data");
    ok(&mmd(&["generate", "--example", "custom", "--spec", p(&spec), "--len", "8192", "--out", p(&data)]));
    let config = data.join("run.toml");
    set_key(&config, "M0", "1");
    set_key(&config, "Ls", "256");
    set_key(&config, "scheme", "\"rdsa1\"");
    let out = dir.path().join("out");
    ok(&mmd(&["decompose", "--config", p(&config), "--out", p(&out)]));
    let apx = dir.path().join("apx");
    ok(&mmd(&[
        "approximate",
        "--coefficients",
        p(&out.join("coefficients_0.csv")),
        "--shapes",
        p(&out.join("shapes_0.csv")),
        "--phase",
        p(&data.join("phase_0.txt")),
        "--fundamental",
        "24",
        "--levels",
        "0,1",
        "--out",
        p(&apx),
    ]));
    let signal = read_series(&data.join("signal.txt")).unwrap();
    let full = read_series(&apx.join("approx_l1.txt")).unwrap();
    let err = rel(&full, &signal);
    assert!(err <= 2e-2, "round trip error {err}");
    let coarse = read_series(&apx.join("approx_l0.txt")).unwrap();
    assert!(rel(&coarse, &signal) > err);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&mmd(&["generate", "--example", "ex2", "--fundamental", "16", "--len", "2048", "--out", p(&data)]));
    let config = data.join("run.toml");

    // missing phase file
    std::fs::remove_file(data.join("phase_1.txt")).unwrap();
    assert_eq!(code(&mmd(&["decompose", "--config", p(&config), "--out", p(&dir.path().join("o"))])), 3);

    // malformed config
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "J1 = [\n").unwrap();
    assert_eq!(code(&mmd(&["decompose", "--config", p(&bad), "--out", p(&dir.path().join("o"))])), 2);

    // unknown flag
    assert_eq!(code(&mmd(&["whiteness", "--nope"])), 2);

    // bandwidth violation
    ok(&mmd(&["generate", "--example", "ex2", "--fundamental", "16", "--len", "2048", "--out", p(&data)]));
    set_key(&config, "M0", "9");
    assert_eq!(code(&mmd(&["decompose", "--config", p(&config), "--out", p(&dir.path().join("o"))])), 3);

    // output path blocked by a regular file
    set_key(&config, "M0", "0");
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "x").unwrap();
    assert_eq!(code(&mmd(&["decompose", "--config", p(&config), "--out", p(&blocker.join("sub"))])), 5);

    // a single-entry trace is too short for eta
    let trace = dir.path().join("trace.csv");
    std::fs::write(&trace, "iteration,relative_residual\n0,1e0\n").unwrap();
    assert_eq!(code(&mmd(&["converge", "--trace", p(&trace)])), 4);

    // thread cap
    assert_eq!(code(&mmd_env(&["converge", "--trace", p(&trace)], "MMD_THREADS", "0")), 3);
}

#[test]
fn converge_reports_constant_eta_for_geometric_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let rows: String = (0..8).map(|j| format!("{j},{:e}\n", 0.5f64.powi(j))).collect();
    std::fs::write(&trace, format!("iteration,relative_residual\n{rows}")).unwrap();
    let out = dir.path().join("report.csv");
    ok(&mmd(&["converge", "--trace", p(&trace), "--out", p(&out)]));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("j,relative_residual,mu,eta"));
    let etas: Vec<f64> = lines
        .filter_map(|l| l.split(',').nth(3).filter(|s| !s.is_empty()).map(|s| s.parse().unwrap()))
        .collect();
    assert_eq!(etas.len(), 6);
    for e in etas {
        assert!((e - 2f64.ln()).abs() < 1e-12, "{e}");
    }
}

#[test]
fn whiteness_separates_noise_from_tones() {
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let dir = tempfile::tempdir().unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let noise: Vec<f64> = (0..1 << 14).map(|_| normal.sample(&mut rng)).collect();
    let path = dir.path().join("noise.bin");
    write_series(&path, &noise, SeriesFormat::Binary).unwrap();
    let out = dir.path().join("acf.csv");
    let o = mmd(&["whiteness", "--input", p(&path), "--max-lag", "100", "--out", p(&out)]);
    ok(&o);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let percent: f64 = stdout.split('%').next().unwrap().trim().parse().unwrap();
    assert!(percent >= 90.0, "{stdout}");
    assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 102);

    let tone: Vec<f64> = (0..4096).map(|i| (i as f64 * 0.3).sin()).collect();
    let path = dir.path().join("tone.txt");
    write_series(&path, &tone, SeriesFormat::Text).unwrap();
    let o = mmd(&["whiteness", "--input", p(&path), "--max-lag", "50"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    let percent: f64 = stdout.split('%').next().unwrap().trim().parse().unwrap();
    assert!(percent < 20.0, "{stdout}");

    let zero = dir.path().join("zero.txt");
    write_series(&zero, &[0.0; 64], SeriesFormat::Text).unwrap();
    let o = mmd(&["whiteness", "--input", p(&zero), "--max-lag", "10"]);
    ok(&o);
    assert!(String::from_utf8_lossy(&o.stdout).contains("degenerate"));

    let empty = dir.path().join("empty.txt");
    std::fs::write(&empty, "").unwrap();
    assert_eq!(code(&mmd(&["whiteness", "--input", p(&empty)])), 3);
}

#[test]
fn oracle_and_bench_produce_tables() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&mmd(&["generate", "--example", "ex2", "--fundamental", "16", "--len", "4096", "--out", p(&data)]));
    let out = dir.path().join("oracle.csv");
    ok(&mmd(&[
        "oracle",
        "--signal",
        p(&data.join("component_0.txt")),
        "--phase",
        p(&data.join("phase_0.txt")),
        "--n",
        "-1",
        "--parity",
        "sin",
        "--bins",
        "64",
        "--out",
        p(&out),
    ]));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("index,value,occupied,count\n"));
    assert_eq!(text.lines().count(), 65);

    let bench = dir.path().join("bench.csv");
    let o = mmd(&["bench", "--log-lengths", "10", "--fundamentals", "20", "--shape-len", "64", "--out", p(&bench)]);
    ok(&o);
    assert_eq!(std::fs::read_to_string(&bench).unwrap().lines().count(), 2);
    assert_eq!(code(&mmd(&["bench", "--log-lengths", "10", "--reps", "2"])), 3);
}
