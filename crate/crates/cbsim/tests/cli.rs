//! End-to-end checks of the cbsim binary: exit codes, output files,
//! manifest round-trips.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cbsim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cbsim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to spawn cbsim")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

#[test]
fn ber_sweep_writes_csv_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsim(
        tmp.path(),
        &[
            "ber-sweep",
            "--L",
            "8",
            "--gamma-db",
            "-12:4:-4",
            "--bits",
            "40",
            "--seed",
            "7",
            "--order",
            "64",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&tmp.path().join("ber.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "gamma_hat_db,actual_ber,actual_ci,artificial_ber,artificial_ci,analytic_ber,total_bits"
    );
    assert_eq!(lines.count(), 3); // -12, -8, -4
    let manifest = read(&tmp.path().join("ber_manifest.txt"));
    assert!(manifest.contains("subcommand = ber-sweep"));
    assert!(manifest.contains("layout_seed = 7"));
    assert!(manifest.contains("data_seed = 8"));
    assert!(manifest.contains("noise_seed = 9"));
}

#[test]
fn manifest_round_trip_reproduces_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    fs::create_dir_all(&first).unwrap();
    fs::create_dir_all(&second).unwrap();

    let out = cbsim(
        &first,
        &[
            "ber-sweep",
            "--L",
            "8",
            "--gamma-db",
            "-10,-6",
            "--bits",
            "60",
            "--seed",
            "3",
            "--order",
            "64",
        ],
    );
    assert!(out.status.success());
    let manifest_path = first.join("ber_manifest.txt");

    let out = cbsim(
        &second,
        &["ber-sweep", "--config", manifest_path.to_str().unwrap()],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        read(&first.join("ber.csv")),
        read(&second.join("ber.csv")),
        "rerun from manifest must reproduce identical CSV bytes"
    );
    assert_eq!(read(&manifest_path), read(&second.join("ber_manifest.txt")));
}

#[test]
fn non_power_of_two_exits_2_citing_requirement() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsim(tmp.path(), &["ber-sweep", "--L", "48"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("power of 2") && stderr.contains("`l`"),
        "stderr: {stderr}"
    );
}

#[test]
fn unknown_config_key_exits_2_naming_key() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "l = 8\nbandwidth = 40\n").unwrap();
    let out = cbsim(
        tmp.path(),
        &["ber-sweep", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bandwidth"), "stderr: {stderr}");
}

#[test]
fn wrong_subcommand_for_manifest_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("gain.cfg");
    fs::write(&cfg, "subcommand = gain-stats\nl = 8\n").unwrap();
    let out = cbsim(
        tmp.path(),
        &["ber-sweep", "--config", cfg.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn place_exports_readable_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsim(
        tmp.path(),
        &["place", "--L", "16", "--r-max", "50", "--seed", "9"],
    );
    assert!(out.status.success());
    let csv = read(&tmp.path().join("layout.csv"));
    let layout = cbsim::geometry::NetworkLayout::read_csv(csv.as_bytes()).unwrap();
    assert_eq!(layout.len(), 16);
    assert_eq!(layout.r_max(), 50.0);
    assert_eq!(layout.seed(), Some(9));
    assert!(cbsim::geometry::validate_layout(&layout).is_empty());
}

#[test]
fn place_far_field_warning_on_stderr() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsim(
        tmp.path(),
        &[
            "place", "--L", "4", "--r-max", "100", "--seed", "1", "--d", "100",
        ],
    );
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("far-field"), "stderr: {stderr}");
}

#[test]
fn gain_stats_csv_header_and_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsim(
        tmp.path(),
        &[
            "gain-stats",
            "--L",
            "16",
            "--sizes",
            "4:4:16",
            "--subsets",
            "20",
            "--seed",
            "5",
            "--order",
            "256",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = read(&tmp.path().join("gain_stats.csv"));
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "subset_size,n_samples,min_gain,mean_gain,max_gain"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("4,20,"));
    assert!(rows[3].starts_with("16,20,"));
}

#[test]
fn out_dir_env_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let outdir = tmp.path().join("results");
    let out = Command::new(env!("CARGO_BIN_EXE_cbsim"))
        .args(["linearization-error", "--L", "128"])
        .env("CBSIM_OUT_DIR", &outdir)
        .current_dir(tmp.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(outdir.join("linearization_manifest.txt").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("(65, 63)"), "stdout: {stdout}");
    assert!(stdout.contains("0.0571"), "stdout: {stdout}");
}

#[test]
fn validate_waveform_passes_at_toy_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let out = cbsim(
        tmp.path(),
        &[
            "validate-waveform",
            "--L",
            "8",
            "--cases",
            "25",
            "--seed",
            "2",
        ],
    );
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("max relative deviation"),
        "stdout: {stdout}"
    );
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("base.cfg");
    fs::write(
        &cfg,
        "l = 8\nbits_per_node = 30\ngamma_db = -8\nquadrature_order = 64\nmodels = idealized\n",
    )
    .unwrap();
    let out = cbsim(
        tmp.path(),
        &[
            "ber-sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--bits",
            "10",
        ],
    );
    assert!(out.status.success());
    let manifest = read(&tmp.path().join("ber_manifest.txt"));
    assert!(manifest.contains("bits_per_node = 10"), "{manifest}");
    assert!(manifest.contains("l = 8"), "{manifest}");
}
