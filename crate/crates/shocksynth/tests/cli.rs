use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shocksynth::io::{read_signal, write_signal};
use shocksynth::nzdf::impulse_response;
use shocksynth::{discretize, residual_motion, NzdfParams, Signal};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shocksynth")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn srs_of_zero_signal_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("zero.csv");
    let out = dir.path().join("srs.csv");
    write_signal(&Signal::zeros(20_000.0, 200).unwrap(), &input).unwrap();
    let r = bin(&["srs", "--input", p(&input), "--out", p(&out)]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("freq_hz,srs_m_s2"));
    let rows: Vec<&str> = lines.collect();
    // 100 Hz to fs/4 at six per octave
    assert_eq!(rows.len(), 35);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn srs_of_surrogate_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.csv");
    let out = dir.path().join("srs.csv");
    assert_eq!(code(&bin(&["demo-ref", "--fs", "20000", "--fmax", "2000", "--out", p(&reference)])), 0);
    assert_eq!(code(&bin(&["srs", "--input", p(&reference), "--fmax", "2000", "--out", p(&out)])), 0);
    let text = fs::read_to_string(&out).unwrap();
    for row in text.lines().skip(1) {
        let v: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v > 0.0, "{row}");
    }
}

#[test]
fn missing_input_is_a_usage_error() {
    let r = bin(&["srs", "--input", "/nonexistent/x.csv", "--out", "/tmp/never.csv"]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("/nonexistent/x.csv"));
}

#[test]
fn filter_output_comes_to_rest() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.csv");
    let out = dir.path().join("filtered.csv");
    assert_eq!(code(&bin(&["demo-ref", "--out", p(&reference)])), 0);
    let r = bin(&["filter", "--input", p(&reference), "--fc", "4525.5", "--out", p(&out)]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let filtered = read_signal(&out).unwrap();
    assert!(residual_motion(&filtered, 1e-3).unwrap().pass);
    let bode = fs::read_to_string(dir.path().join("filtered.bode.csv")).unwrap();
    assert!(bode.starts_with("freq_hz,mag_db,phase_deg\n"));
    assert_eq!(bode.lines().count(), 401);
}

#[test]
fn filtering_an_impulse_gives_the_impulse_response() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("imp.csv");
    let out = dir.path().join("h.csv");
    let fs = 50_000.0;
    let mut x = vec![0.0; 100];
    x[0] = fs;
    write_signal(&Signal::new(fs, x).unwrap(), &input).unwrap();
    assert_eq!(code(&bin(&["filter", "--input", p(&input), "--fc", "1000", "--out", p(&out)])), 0);
    let got = read_signal(&out).unwrap();
    let filt = discretize(&NzdfParams::new(1000.0).unwrap(), fs).unwrap();
    let want = impulse_response(&filt, 99.0 / fs).unwrap();
    assert_eq!(got.samples(), want.samples());
}

#[test]
fn filter_above_nyquist_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_signal(&Signal::zeros(10_000.0, 10).unwrap(), &input).unwrap();
    let out = dir.path().join("y.csv");
    assert_eq!(code(&bin(&["filter", "--input", p(&input), "--fc", "5000", "--out", p(&out)])), 2);
    assert!(!out.exists());
}

#[test]
fn rate_flag_must_match_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("x.csv");
    write_signal(&Signal::zeros(10_000.0, 10).unwrap(), &input).unwrap();
    let r = bin(&["srs", "--fs", "20000", "--input", p(&input), "--out", p(&dir.path().join("s.csv"))]);
    assert_eq!(code(&r), 2);
}

#[test]
fn bank_has_41_filters() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bank.csv");
    let r = bin(&["bank", "--fs", "100000", "--fmin", "100", "--fmax", "10000", "--ppo", "6", "--out", p(&out)]);
    assert_eq!(code(&r), 0);
    let text = fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 42);
    assert_eq!(header[0], "freq_hz");
    assert_eq!(header[1], "100");
}

#[test]
fn bank_writes_basis() {
    let dir = tempfile::tempdir().unwrap();
    let reference = dir.path().join("ref.csv");
    let basis = dir.path().join("basis.csv");
    assert_eq!(code(&bin(&["demo-ref", "--fs", "20000", "--fmax", "2000", "--out", p(&reference)])), 0);
    let r = bin(&[
        "bank",
        "--fs",
        "20000",
        "--fmin",
        "200",
        "--fmax",
        "1000",
        "--ppo",
        "3",
        "--reference",
        p(&reference),
        "--basis-out",
        p(&basis),
        "--out",
        p(&dir.path().join("b.csv")),
    ]);
    assert_eq!(code(&r), 0, "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(&basis).unwrap();
    assert!(text.starts_with("time_s,200,"));
}

#[test]
fn zero_ppo_is_a_usage_error() {
    assert_eq!(code(&bin(&["bank", "--fs", "100000", "--ppo", "0", "--out", "/tmp/never.csv"])), 2);
}

#[test]
fn demo_ref_is_reproducible_and_at_rest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(code(&bin(&["demo-ref", "--seed", "4", "--out", p(&a)])), 0);
    assert_eq!(code(&bin(&["demo-ref", "--seed", "4", "--out", p(&b)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(residual_motion(&read_signal(&a).unwrap(), 1e-3).unwrap().pass);
}

#[test]
fn demo_ref_needs_ten_times_fmax() {
    let r = bin(&["demo-ref", "--fs", "50000", "--fmax", "10000", "--out", "/tmp/never.csv"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn synth_rejects_bad_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.csv");
    fs::write(&spec, "freq_hz,peak_accel_m_s2\n100,abc\n").unwrap();
    let r = bin(&[
        "synth",
        "--spec",
        p(&spec),
        "--out",
        p(&dir.path().join("s.csv")),
        "--report",
        p(&dir.path().join("r.json")),
    ]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("line 2"));
}

#[test]
fn unreachable_tolerance_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.csv");
    fs::write(&spec, "freq_hz,peak_accel_m_s2\n200,100\n300,5000\n400,100\n").unwrap();
    let (out, report) = (dir.path().join("s.csv"), dir.path().join("r.json"));
    let r = bin(&[
        "synth",
        "--fs",
        "20000",
        "--spec",
        p(&spec),
        "--tolerance-db",
        "0.01",
        "--swarm",
        "10",
        "--iters",
        "3",
        "--out",
        p(&out),
        "--report",
        p(&report),
    ]);
    assert_eq!(code(&r), 1, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("exceeds the tolerance"));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass_srs"], false);
    assert_eq!(v["pass_net_zero"], true);
    assert_eq!(v["iterations"], 3);
}

#[test]
fn verify_half_sine_fails_net_zero() {
    let dir = tempfile::tempdir().unwrap();
    let sig = dir.path().join("hs.csv");
    let fs = 100_000.0;
    let x = (0..=1100).map(|i| 100.0 * (std::f64::consts::PI * i as f64 / 1100.0).sin()).collect();
    write_signal(&Signal::new(fs, x).unwrap(), &sig).unwrap();
    let report = dir.path().join("r.json");
    let r = bin(&["verify", "--signal", p(&sig), "--spec", p(&data("pyro_spec.csv")), "--report", p(&report)]);
    assert_eq!(code(&r), 1);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass_net_zero"], false);
    assert!(v["residual_velocity_ratio"].as_f64().unwrap() > 0.99);
    assert!(v["seed"].is_null());
}

#[test]
fn help_lists_commands() {
    let r = bin(&["--help"]);
    assert_eq!(code(&r), 0);
    let text = String::from_utf8_lossy(&r.stdout);
    for cmd in ["srs", "filter", "bank", "synth", "verify", "demo-ref"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}
