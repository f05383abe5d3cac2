//! End-to-end checks of the `dpc` binary: golden outputs, exit codes,
//! and diagnostics formatting.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_dpc")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
}

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name);
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn simulate_matches_golden() {
    let file = data("pair.dpc");
    let out = stdout_of(&[
        "simulate",
        "--circuit",
        file.to_str().unwrap(),
        "--times",
        "0.25,0.5,1",
    ]);
    assert_eq!(out, golden("simulate_pair.csv"));
}

#[test]
fn spectrum_json_matches_golden_and_parses() {
    let out = stdout_of(&[
        "spectrum",
        "--builder",
        "chain",
        "--n",
        "3",
        "--format",
        "json",
    ]);
    assert_eq!(out, golden("spectrum_chain3.json"));
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed.as_array().unwrap().len(), 3);
}

#[test]
fn erase_matches_golden() {
    let out = stdout_of(&["erase", "--n", "2", "--alpha", "1", "--beta", "0"]);
    assert_eq!(out, golden("erase_n2.csv"));
}

#[test]
fn render_matches_golden() {
    let out = stdout_of(&[
        "render",
        "--builder",
        "square",
        "--rows",
        "2",
        "--cols",
        "2",
        "--loss",
        "s1_1=1",
        "--loss",
        "s1_2=1",
        "--init",
        "s2_1=1",
        "--field",
        "asymptotic",
    ]);
    assert_eq!(out, golden("render_cell_loss.svg"));
    assert!(out.starts_with("<svg"));
}

#[test]
fn scan_matches_golden() {
    let out = stdout_of(&["scan", "--n-chain", "2", "--n-res", "6", "--points", "3"]);
    assert_eq!(out, golden("scan_default.csv"));
    assert!(out
        .lines()
        .next()
        .unwrap()
        .starts_with("lambda_nm,kappa1,kappa2,I1,I2"));
}

#[test]
fn localized_matches_golden() {
    let out = stdout_of(&[
        "localized",
        "--builder",
        "square",
        "--rows",
        "4",
        "--cols",
        "4",
        "--max-support",
        "3",
    ]);
    assert_eq!(out, golden("localized_square4.csv"));
}

#[test]
fn kernel_matches_golden() {
    let out = stdout_of(&[
        "kernel",
        "--builder",
        "two-arm",
        "--n",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(out, golden("kernel_two_arm.json"));
}

#[test]
fn outputs_are_reproducible_across_runs() {
    let args = [
        "asymptotic",
        "--builder",
        "chain",
        "--n",
        "5",
        "--init",
        "m1=2,1",
    ];
    assert_eq!(stdout_of(&args), stdout_of(&args));
}

#[test]
fn parse_errors_exit_2_and_name_every_problem() {
    let file = data("broken.dpc");
    let out = run(&["spectrum", "--circuit", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("duplicate mode"), "{stderr}");
    assert!(stderr.contains("unknown mode `c`"), "{stderr}");
    assert!(stderr.contains("negative rate"), "{stderr}");
    assert!(stderr.contains("unknown mode `q`"), "{stderr}");
    assert!(stderr.contains("2:"), "locations missing: {stderr}");
}

#[test]
fn usage_errors_exit_1() {
    let out = run(&["simulate", "--builder", "chain", "--times", "1"]);
    assert_eq!(out.status.code(), Some(1)); // missing --n

    let out = run(&["bogus-subcommand"]);
    assert_eq!(out.status.code(), Some(1));

    let out = run(&["erase", "--n", "2", "--beta", "0", "--weight", "0.5"]);
    assert_eq!(out.status.code(), Some(1)); // weights don't sum to one
}

#[test]
fn numeric_failures_exit_3() {
    // cutoff far too small for the requested Gibbs temperature
    let out = run(&[
        "oracle",
        "--builder",
        "chain",
        "--n",
        "2",
        "--state",
        "gibbs",
        "--beta-g",
        "0.2",
        "--cutoff",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(3));

    // coherent amplitude far beyond the cutoff: leakage flagged
    let out = run(&[
        "oracle",
        "--builder",
        "chain",
        "--n",
        "2",
        "--state",
        "coherent",
        "--init",
        "m1=1.5",
        "--cutoff",
        "2",
        "--t",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reads_circuit_from_stdin() {
    use std::io::Write as _;
    let mut child = Command::new(bin())
        .args(["asymptotic", "--circuit", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .stderr(std::process::Stdio::null())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"mode a\nmode b\ndiss 1 a:1 b:-1\ninit a 2 0\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    // asymptotic state is the uniform mean: amplitude 1 on both modes
    for line in text.lines().skip(1) {
        let re: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((re - 1.0).abs() < 1e-9, "{line}");
    }
}

#[test]
fn oracle_gibbs_reports_small_residual() {
    let out = stdout_of(&[
        "oracle",
        "--builder",
        "chain",
        "--n",
        "2",
        "--state",
        "gibbs",
        "--beta-g",
        "1",
        "--cutoff",
        "6",
        "--format",
        "json",
    ]);
    let parsed: serde_json::Value = serde_json::from_str(&out).unwrap();
    let residual = parsed[0]["residual"].as_f64().unwrap();
    assert!(residual < 1e-6, "residual {residual}");
}

#[test]
fn waveguide_compare_reports_deviation_column() {
    let out = stdout_of(&[
        "waveguide",
        "--n-chain",
        "2",
        "--n-res",
        "20",
        "--kappa1",
        "0.15",
        "--kappa2",
        "0.3",
        "--z",
        "10,20",
        "--compare",
    ]);
    let header = out.lines().next().unwrap();
    assert_eq!(header, "z_mm,I1,I2,chain_power,lindblad_linf");
    assert_eq!(out.lines().count(), 3);
}

#[test]
fn device_config_comes_from_dpc_set_entries() {
    let dir = std::env::temp_dir().join("dpc-cli-test-device");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("device.dpc");
    std::fs::write(
        &path,
        "set n_chain 3\nset kappa1 0.1\nset kappa2 0.2\nset input 1\n",
    )
    .unwrap();
    let out = stdout_of(&[
        "scan",
        "--device-config",
        path.to_str().unwrap(),
        "--points",
        "2",
    ]);
    let header = out.lines().next().unwrap();
    assert_eq!(header, "lambda_nm,kappa1,kappa2,I1,I2,I3");
    // explicit flags override the file
    let out = stdout_of(&[
        "scan",
        "--device-config",
        path.to_str().unwrap(),
        "--points",
        "2",
        "--n-chain",
        "2",
    ]);
    assert_eq!(out.lines().next().unwrap(), "lambda_nm,kappa1,kappa2,I1,I2");
}
