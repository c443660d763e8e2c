//! The `cbsim` command-line front end.
//!
//! Subcommands: `place`, `gain-stats`, `ber-sweep`, `validate-waveform`,
//! `linearization-error`. Every run writes a manifest of `key = value`
//! lines next to its outputs; feeding that manifest back through
//! `--config` reproduces the outputs byte for byte (flags override file
//! values). Exit codes: 0 success, 2 configuration error (the message
//! names the offending key), 1 runtime failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::beamform::build_gain_context;
use crate::channel::{waveform_oracle, GainModel, RadioParams};
use crate::decode::linearization_error;
use crate::error::{Error, Result};
use crate::experiments::{
    ber_summary, parse_decoder, parse_float_grid, parse_models, parse_size_grid,
    run_ber_experiment, run_gain_experiment, write_ber_csv, write_gain_csv, ExperimentConfig,
};
use crate::geometry::{place_nodes, validate_layout};
use crate::rng::StreamRng;

/// Environment variable supplying the default output directory.
pub const OUT_DIR_ENV: &str = "CBSIM_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "cbsim",
    version,
    about = "Individual-data cooperative beamforming link simulator (DSSS/BFSK)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Place nodes uniformly on a disk and export the layout as CSV
    Place(PlaceArgs),
    /// Min/mean/max beamforming gain over random subsets, per subset size
    GainStats(SweepArgs),
    /// Three-curve BER sweep: actual, artificial and analytic BER vs SNR
    BerSweep(SweepArgs),
    /// Compare chip-level decision variables against the waveform
    /// correlator pair on random single-chip cases
    ValidateWaveform(ValidateArgs),
    /// Brute-force the 3/2-power linearization error over all splits
    LinearizationError(LinArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output directory (default: $CBSIM_OUT_DIR or the working directory)
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Stem for output files (default: subcommand-specific)
    #[arg(long)]
    prefix: Option<String>,
}

impl OutputArgs {
    fn dir(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    fn path(&self, default_stem: &str, suffix: &str) -> PathBuf {
        let stem = self.prefix.as_deref().unwrap_or(default_stem);
        self.dir().join(format!("{stem}{suffix}"))
    }
}

#[derive(Args, Debug)]
struct PlaceArgs {
    /// Number of nodes (power of 2 for the other subcommands; free here)
    #[arg(long = "L")]
    l: usize,
    /// Field radius in meters
    #[arg(long, default_value_t = 100.0)]
    r_max: f64,
    /// RNG seed
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Receiver elevation angle in radians
    #[arg(long)]
    theta0: Option<f64>,
    /// Receiver distance in meters (default: 100 * r_max)
    #[arg(long)]
    d: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Config file of `key = value` lines; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of nodes and spreading-code length (power of 2)
    #[arg(long = "L")]
    l: Option<usize>,
    #[arg(long)]
    r_max: Option<f64>,
    #[arg(long)]
    theta0: Option<f64>,
    /// Carrier frequency in Hz
    #[arg(long)]
    f_c: Option<f64>,
    /// Tone half-separation in Hz (tones at f_c +/- delta_f)
    #[arg(long)]
    delta_f: Option<f64>,
    /// Chip rate in chips/s
    #[arg(long)]
    r_ch: Option<f64>,
    /// Bits per node
    #[arg(long)]
    bits: Option<usize>,
    /// Normalized-SNR grid in dB: `start:step:stop` or a comma list
    #[arg(long, allow_hyphen_values = true)]
    gamma_db: Option<String>,
    /// Master seed: sets layout/data/noise seeds to seed, seed+1, seed+2
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    layout_seed: Option<u64>,
    #[arg(long)]
    data_seed: Option<u64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    /// Quadrature order: `auto` or an integer >= 16
    #[arg(long)]
    order: Option<String>,
    /// Gain models to simulate: comma list of exact, idealized
    #[arg(long)]
    models: Option<String>,
    /// Receiver: bit-level, chip-level or power-2-3
    #[arg(long)]
    decoder: Option<String>,
    /// Disable AWGN (gain-variability-only run)
    #[arg(long)]
    noiseless: bool,
    /// Subset sizes for gain statistics: `all` or `start:step:stop`
    #[arg(long)]
    sizes: Option<String>,
    /// Random subsets per size for gain statistics
    #[arg(long)]
    subsets: Option<usize>,
    /// Independent layouts to average over (default 1, as in the paper)
    #[arg(long)]
    n_layouts: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

impl SweepArgs {
    /// default config -> config file -> flag overrides.
    fn build_config(&self, subcommand: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = fs::read_to_string(path)?;
            if let Some(declared) = cfg.apply_text(&text)? {
                if declared != subcommand {
                    return Err(Error::config(
                        "subcommand",
                        format!("config file was written by `{declared}`, not `{subcommand}`"),
                    ));
                }
            }
        }
        if let Some(seed) = self.seed {
            cfg.layout_seed = seed;
            cfg.data_seed = seed.wrapping_add(1);
            cfg.noise_seed = seed.wrapping_add(2);
        }
        if let Some(l) = self.l {
            cfg.l = l;
        }
        if let Some(v) = self.r_max {
            cfg.r_max = v;
        }
        if let Some(v) = self.theta0 {
            cfg.theta0 = v;
        }
        if let Some(v) = self.f_c {
            cfg.f_c = v;
        }
        if let Some(v) = self.delta_f {
            cfg.delta_f = v;
        }
        if let Some(v) = self.r_ch {
            cfg.r_ch = v;
        }
        if let Some(v) = self.bits {
            cfg.bits_per_node = v;
        }
        if let Some(spec) = &self.gamma_db {
            cfg.gamma_db_grid = parse_float_grid(spec)?;
        }
        if let Some(v) = self.layout_seed {
            cfg.layout_seed = v;
        }
        if let Some(v) = self.data_seed {
            cfg.data_seed = v;
        }
        if let Some(v) = self.noise_seed {
            cfg.noise_seed = v;
        }
        if let Some(spec) = &self.order {
            cfg.quadrature_order = if spec.trim() == "auto" {
                None
            } else {
                Some(spec.trim().parse().map_err(|_| {
                    Error::config(
                        "order",
                        format!("expected `auto` or an integer, got `{spec}`"),
                    )
                })?)
            };
        }
        if let Some(spec) = &self.models {
            cfg.models = parse_models(spec)?;
        }
        if let Some(spec) = &self.decoder {
            cfg.decoder = parse_decoder(spec)?;
        }
        if self.noiseless {
            cfg.noiseless = true;
        }
        if let Some(spec) = &self.sizes {
            cfg.subset_sizes = parse_size_grid(spec)?;
        }
        if let Some(v) = self.subsets {
            cfg.subset_samples = v;
        }
        if let Some(v) = self.n_layouts {
            cfg.n_layouts = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Number of nodes
    #[arg(long = "L", default_value_t = 8)]
    l: usize,
    /// Random single-chip cases to check
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 11)]
    seed: u64,
    /// Waveform samples per chip (>= 8 per carrier period)
    #[arg(long, default_value_t = 1024)]
    samples_per_chip: usize,
    /// Relative tolerance on the correlator-vs-kappa match
    #[arg(long, default_value_t = 0.02)]
    tolerance: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct LinArgs {
    /// Number of nodes (splits a + b = L are scanned exhaustively)
    #[arg(long = "L")]
    l: usize,
    #[command(flatten)]
    output: OutputArgs,
}

/// Entry point used by `main`; returns the process exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Testable entry point.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            // --help / --version are not errors
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                1
            }
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Place(args) => cmd_place(args),
        Command::GainStats(args) => cmd_gain_stats(args),
        Command::BerSweep(args) => cmd_ber_sweep(args),
        Command::ValidateWaveform(args) => cmd_validate_waveform(args),
        Command::LinearizationError(args) => cmd_linearization(args),
    }
}

fn cmd_place(args: PlaceArgs) -> Result<()> {
    let mut layout = place_nodes(args.l, args.r_max, args.seed)?;
    if let Some(theta0) = args.theta0 {
        layout = layout.with_theta0(theta0);
    }
    if let Some(d) = args.d {
        layout = layout.with_distance(d);
    }
    for issue in validate_layout(&layout) {
        eprintln!("warning: {issue}");
    }
    let mut csv = Vec::new();
    layout.write_csv(&mut csv)?;
    let csv_path = args.output.path("layout", ".csv");
    write_file(&csv_path, &csv)?;

    let mut manifest = String::from("subcommand = place\n");
    manifest.push_str(&format!("l = {}\n", args.l));
    manifest.push_str(&format!("r_max = {}\n", args.r_max));
    manifest.push_str(&format!("theta0 = {}\n", layout.theta0()));
    manifest.push_str(&format!("d = {}\n", layout.d()));
    manifest.push_str(&format!("layout_seed = {}\n", args.seed));
    write_file(
        &args.output.path("layout", "_manifest.txt"),
        manifest.as_bytes(),
    )?;

    println!("wrote {} ({} nodes)", csv_path.display(), args.l);
    Ok(())
}

fn cmd_gain_stats(args: SweepArgs) -> Result<()> {
    let cfg = args.build_config("gain-stats")?;
    let rows = run_gain_experiment(&cfg)?;
    let mut csv = Vec::new();
    write_gain_csv(&rows, &mut csv)?;
    let csv_path = args.output.path("gain_stats", ".csv");
    write_file(&csv_path, &csv)?;
    write_file(
        &args.output.path("gain_stats", "_manifest.txt"),
        cfg.manifest("gain-stats").as_bytes(),
    )?;

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.subset_size as f64, r.mean))
        .collect();
    if pts.len() >= 2 {
        let (slope, intercept) = linear_fit(&pts);
        println!(
            "wrote {} ({} sizes); mean-gain fit: slope {:.4}, intercept {:.4}",
            csv_path.display(),
            rows.len(),
            slope,
            intercept
        );
    } else {
        println!("wrote {} ({} sizes)", csv_path.display(), rows.len());
    }
    Ok(())
}

fn cmd_ber_sweep(args: SweepArgs) -> Result<()> {
    let cfg = args.build_config("ber-sweep")?;
    let curve = run_ber_experiment(&cfg)?;
    let mut csv = Vec::new();
    write_ber_csv(&curve, &mut csv)?;
    let csv_path = args.output.path("ber", ".csv");
    write_file(&csv_path, &csv)?;
    write_file(
        &args.output.path("ber", "_manifest.txt"),
        cfg.manifest("ber-sweep").as_bytes(),
    )?;
    println!("wrote {}", csv_path.display());
    print!("{}", ber_summary(&curve));
    Ok(())
}

fn cmd_validate_waveform(args: ValidateArgs) -> Result<()> {
    if args.l == 0 {
        return Err(Error::config("L", "need at least one node"));
    }
    // downshifted link: f_c = 32 R_ch keeps every correlator harmonic an
    // integer number of periods per chip
    let r_ch = 128_000.0;
    let f_c = 32.0 * r_ch;
    let params = RadioParams::new(f_c, r_ch / 2.0, r_ch, 1.7, 1.0, 1.0, 0.0)?;
    let layout = place_nodes(args.l, 100.0, args.seed)?;
    let wavelength = crate::SPEED_OF_LIGHT / f_c;
    let ctx = build_gain_context(&layout, wavelength, 1024)?;
    let model = GainModel::Exact(&ctx);
    let amp = params.amplitude();

    let mut rng = StreamRng::new(args.seed, &[b'w' as u64]);
    let mut scratch = Vec::new();
    let mut worst: f64 = 0.0;
    for case in 0..args.cases {
        let members: Vec<bool> = (0..args.l).map(|_| rng.next_u64() & 1 == 1).collect();
        let (z1, z2) = waveform_oracle(&members, &model, &params, args.samples_per_chip)?;
        let kappa = amp * model.amplification_diff(&members, &mut scratch);
        let rel = ((z1 - z2) - kappa).abs() / kappa.abs().max(amp);
        worst = worst.max(rel);
        if rel > args.tolerance {
            eprintln!(
                "case {case}: correlator difference {} vs kappa {kappa} (relative {rel:.3e})",
                z1 - z2
            );
        }
    }

    let mut manifest = String::from("subcommand = validate-waveform\n");
    manifest.push_str(&format!("l = {}\n", args.l));
    manifest.push_str(&format!("cases = {}\n", args.cases));
    manifest.push_str(&format!("seed = {}\n", args.seed));
    manifest.push_str(&format!("samples_per_chip = {}\n", args.samples_per_chip));
    manifest.push_str(&format!("tolerance = {}\n", args.tolerance));
    write_file(
        &args.output.path("waveform", "_manifest.txt"),
        manifest.as_bytes(),
    )?;

    println!(
        "{} cases at L = {}: max relative deviation {:.3e} (tolerance {})",
        args.cases, args.l, worst, args.tolerance
    );
    if worst > args.tolerance {
        return Err(Error::invalid(
            "waveform",
            format!(
                "max deviation {worst:.3e} exceeds tolerance {}",
                args.tolerance
            ),
        ));
    }
    Ok(())
}

fn cmd_linearization(args: LinArgs) -> Result<()> {
    let (max_err, (a, b)) =
        linearization_error(args.l).map_err(|e| Error::config("L", e.to_string()))?;
    let bound = 1.0 - 2.0 * std::f64::consts::SQRT_2 / 3.0;
    let mut manifest = String::from("subcommand = linearization-error\n");
    manifest.push_str(&format!("l = {}\n", args.l));
    write_file(
        &args.output.path("linearization", "_manifest.txt"),
        manifest.as_bytes(),
    )?;
    println!(
        "L = {}: max relative error {max_err:.6} at (a, b) = ({a}, {b}); bound 1 - 2*sqrt(2)/3 = {bound:.6}",
        args.l
    );
    Ok(())
}

/// Ordinary least squares y = slope * x + intercept.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_fit_recovers_line() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|x| (x as f64, 3.0 * x as f64 - 2.0)).collect();
        let (slope, intercept) = linear_fit(&pts);
        assert!((slope - 3.0).abs() < 1e-12);
        assert!((intercept + 2.0).abs() < 1e-12);
    }

    #[test]
    fn help_exits_zero_and_bad_flag_exits_two() {
        assert_eq!(run_from(["cbsim", "--help"]), 0);
        assert_eq!(run_from(["cbsim", "--no-such-flag"]), 2);
        assert_eq!(run_from(["cbsim", "frobnicate"]), 2);
    }
}
