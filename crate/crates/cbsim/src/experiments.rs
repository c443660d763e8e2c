//! Reproducible experiment drivers: beamforming-gain statistics over
//! random subsets and the three-curve BER sweep (simulated actual BER,
//! simulated artificial BER, closed-form analytic BER).
//!
//! All randomness flows through counter-based streams keyed by
//! `(seed, layout index, SNR-point index, bit index)`, so results are
//! independent of thread count and bit-identical across reruns. The same
//! data/noise draws feed every gain model at a point (matched runs).

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analysis::{ber_tilde, db_to_linear};
use crate::beamform::{
    build_gain_context, default_quadrature_order, gain_statistics, GainContext, GainStats,
};
use crate::channel::{GainModel, RadioParams};
use crate::codebook::{build_hadamard, SpreadingCodebook};
use crate::decode::{
    bit_level_decode, chip_level_decode, power_twothirds_decode, DecodeResult, DecodeScheme,
};
use crate::error::{Error, Result};
use crate::geometry::{place_nodes, NetworkLayout};
use crate::rng::StreamRng;

/// Desk-scale default quadrature order for BER sweeps; accuracy there is
/// dominated by Monte Carlo noise, not by the gain integral.
pub const BER_SWEEP_DEFAULT_ORDER: usize = 512;

/// Gain models a BER sweep can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainModelKind {
    /// Quadrature-exact per-subset gains ("actual BER").
    Exact,
    /// `A = |S|^{3/2}` ("artificial BER").
    Idealized,
}

impl std::fmt::Display for GainModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GainModelKind::Exact => "exact",
            GainModelKind::Idealized => "idealized",
        })
    }
}

/// Subset sizes to sweep in the gain experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeGrid {
    /// Every size 1..=L.
    All,
    /// start..=stop in steps of step.
    Range {
        start: usize,
        step: usize,
        stop: usize,
    },
}

impl SizeGrid {
    fn sizes(&self, l: usize) -> Vec<usize> {
        match *self {
            SizeGrid::All => (1..=l).collect(),
            SizeGrid::Range { start, step, stop } => (start..=stop).step_by(step.max(1)).collect(),
        }
    }
}

/// Full description of one experiment run; also the manifest content.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub l: usize,
    pub r_max: f64,
    pub theta0: f64,
    pub f_c: f64,
    pub delta_f: f64,
    pub r_ch: f64,
    pub bits_per_node: usize,
    pub gamma_db_grid: Vec<f64>,
    pub layout_seed: u64,
    pub data_seed: u64,
    pub noise_seed: u64,
    /// None = auto: 512 for BER sweeps, bandwidth-scaled for gain stats.
    pub quadrature_order: Option<usize>,
    pub models: Vec<GainModelKind>,
    pub decoder: DecodeScheme,
    pub noiseless: bool,
    pub subset_sizes: SizeGrid,
    pub subset_samples: usize,
    pub n_layouts: usize,
}

impl Default for ExperimentConfig {
    /// Desk-scale defaults; paper scale is L=128 with 10^4 bits/node.
    fn default() -> Self {
        ExperimentConfig {
            l: 32,
            r_max: 100.0,
            theta0: std::f64::consts::FRAC_PI_3,
            f_c: 2.45e9,
            delta_f: 64e3,
            r_ch: 128_000.0,
            bits_per_node: 1000,
            gamma_db_grid: (0..7).map(|k| -14.0 + 2.0 * k as f64).collect(),
            layout_seed: 7,
            data_seed: 8,
            noise_seed: 9,
            quadrature_order: None,
            models: vec![GainModelKind::Exact, GainModelKind::Idealized],
            decoder: DecodeScheme::BitLevel,
            noiseless: false,
            subset_sizes: SizeGrid::All,
            subset_samples: 200,
            n_layouts: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || !self.l.is_power_of_two() {
            return Err(Error::config(
                "l",
                format!("node count must be a power of 2, got {}", self.l),
            ));
        }
        if !self.r_max.is_finite() || self.r_max <= 0.0 {
            return Err(Error::config("r_max", "must be positive"));
        }
        if !self.f_c.is_finite() || self.f_c <= 0.0 {
            return Err(Error::config("f_c", "must be positive"));
        }
        if !self.r_ch.is_finite() || self.r_ch <= 0.0 {
            return Err(Error::config("r_ch", "must be positive"));
        }
        if 2.0 * self.delta_f < self.r_ch {
            return Err(Error::config(
                "delta_f",
                "tone separation 2*delta_f must be at least the chip rate",
            ));
        }
        if self.bits_per_node == 0 {
            return Err(Error::config("bits_per_node", "must be at least 1"));
        }
        if self.gamma_db_grid.is_empty() {
            return Err(Error::config("gamma_db", "grid must be nonempty"));
        }
        if self.models.is_empty() {
            return Err(Error::config("models", "need at least one gain model"));
        }
        if self.subset_samples == 0 {
            return Err(Error::config("subsets", "must be at least 1"));
        }
        if self.n_layouts == 0 {
            return Err(Error::config("n_layouts", "must be at least 1"));
        }
        if let SizeGrid::Range { start, step, stop } = self.subset_sizes {
            if start == 0 || stop > self.l || start > stop || step == 0 {
                return Err(Error::config(
                    "sizes",
                    format!("range {start}:{step}:{stop} invalid for L = {}", self.l),
                ));
            }
        }
        if let Some(order) = self.quadrature_order {
            if order < 16 {
                return Err(Error::config("quadrature_order", "must be at least 16"));
            }
        }
        Ok(())
    }

    /// Layout for layout index `i` (multi-layout mode derives seeds).
    fn layout(&self, i: usize) -> Result<NetworkLayout> {
        let seed = if self.n_layouts == 1 {
            self.layout_seed
        } else {
            StreamRng::new(self.layout_seed, &[i as u64]).next_u64()
        };
        Ok(place_nodes(self.l, self.r_max, seed)?.with_theta0(self.theta0))
    }

    fn wavelength(&self) -> f64 {
        crate::SPEED_OF_LIGHT / self.f_c
    }

    fn ber_order(&self) -> usize {
        self.quadrature_order.unwrap_or(BER_SWEEP_DEFAULT_ORDER)
    }

    fn gain_order(&self, layout: &NetworkLayout) -> usize {
        self.quadrature_order
            .unwrap_or_else(|| default_quadrature_order(layout, self.wavelength()))
    }
}

/// Simulated BER of one gain model at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelBer {
    pub errors: u64,
    pub ber: f64,
    /// Normal-approximation 95% binomial half-width.
    pub ci_half_width: f64,
}

impl ModelBer {
    fn new(errors: u64, total: u64) -> Self {
        let p = errors as f64 / total as f64;
        ModelBer {
            errors,
            ber: p,
            ci_half_width: 1.96 * (p * (1.0 - p) / total as f64).sqrt(),
        }
    }

    /// Fewer than 10 errors: the estimate is statistically unreliable.
    pub fn unreliable(&self) -> bool {
        self.errors < 10
    }
}

/// One SNR point of the three-curve sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub gamma_db: f64,
    pub actual: Option<ModelBer>,
    pub artificial: Option<ModelBer>,
    pub analytic_ber: f64,
    pub total_bits: u64,
}

/// The assembled sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    pub l: usize,
    pub points: Vec<BerPoint>,
}

/// Per-worker scratch for the bit-block simulation loop.
struct Workspace {
    bits: Vec<i8>,
    members: Vec<bool>,
    noise: Vec<f64>,
    kappas: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl Workspace {
    fn new(l: usize) -> Self {
        Workspace {
            bits: vec![0; l],
            members: vec![false; l],
            noise: vec![0.0; l],
            kappas: vec![0.0; l],
            scratch: Vec::new(),
        }
    }
}

fn decode_block(
    kappas: &[f64],
    codebook: &SpreadingCodebook,
    decoder: DecodeScheme,
    model: &GainModel,
    params: &RadioParams,
) -> Result<DecodeResult> {
    match decoder {
        DecodeScheme::BitLevel => bit_level_decode(kappas, codebook),
        DecodeScheme::ChipLevel => chip_level_decode(kappas, codebook, model, params),
        DecodeScheme::PowerTwoThirds => power_twothirds_decode(kappas, codebook),
    }
}

/// Simulates one bit period for every requested model; returns bit-error
/// counts in `cfg.models` order.
#[allow(clippy::too_many_arguments)]
fn simulate_bit(
    cfg: &ExperimentConfig,
    codebook: &SpreadingCodebook,
    ctx: Option<&GainContext>,
    params: &RadioParams,
    keys: (usize, usize, usize), // (layout, point, bit)
    ws: &mut Workspace,
) -> Result<Vec<u64>> {
    let l = cfg.l;
    let (layout_idx, point_idx, bit_idx) = keys;
    let key_slice = [layout_idx as u64, point_idx as u64, bit_idx as u64];

    // transmitted bits of all nodes for this bit period
    let mut data_rng = StreamRng::new(cfg.data_seed, &key_slice);
    let mut word = 0u64;
    for (node, b) in ws.bits.iter_mut().enumerate() {
        if node % 64 == 0 {
            word = data_rng.next_u64();
        }
        *b = if (word >> (node % 64)) & 1 == 1 {
            1
        } else {
            -1
        };
    }

    // shared per-chip noise (matched across models)
    if cfg.noiseless {
        ws.noise.fill(0.0);
    } else {
        let sd = params.chip_noise_variance(l).sqrt();
        StreamRng::new(cfg.noise_seed, &key_slice).fill_gaussian(&mut ws.noise, sd);
    }

    let amp = params.amplitude();
    let mut errors = vec![0u64; cfg.models.len()];
    for (mi, kind) in cfg.models.iter().enumerate() {
        let model = match kind {
            GainModelKind::Exact => {
                GainModel::Exact(ctx.expect("gain context required for the exact model"))
            }
            GainModelKind::Idealized => GainModel::Idealized,
        };
        for m in 0..l {
            for (node, mem) in ws.members.iter_mut().enumerate() {
                *mem = ws.bits[node] * codebook.chip(node, m) > 0;
            }
            let adiff = model.amplification_diff(&ws.members, &mut ws.scratch);
            ws.kappas[m] = amp * adiff + ws.noise[m];
        }
        let decoded = decode_block(&ws.kappas, codebook, cfg.decoder, &model, params)?;
        let mut errs = 0u64;
        for node in 0..l {
            if decoded.hard_bits(node)[0] != ws.bits[node] {
                errs += 1;
            }
        }
        errors[mi] = errs;
    }
    Ok(errors)
}

/// Runs the BER sweep over the configured SNR grid and gain models.
pub fn run_ber_experiment(cfg: &ExperimentConfig) -> Result<BerCurve> {
    cfg.validate()?;
    let codebook = build_hadamard(cfg.l)?;
    let needs_ctx = cfg.models.contains(&GainModelKind::Exact);

    // one context per layout, built once and shared across SNR points
    let mut layouts: Vec<Option<GainContext>> = Vec::with_capacity(cfg.n_layouts);
    for i in 0..cfg.n_layouts {
        let layout = cfg.layout(i)?;
        layouts.push(if needs_ctx {
            Some(build_gain_context(
                &layout,
                cfg.wavelength(),
                cfg.ber_order(),
            )?)
        } else {
            None
        });
    }

    let total_bits = (cfg.l * cfg.bits_per_node * cfg.n_layouts) as u64;
    let mut points = Vec::with_capacity(cfg.gamma_db_grid.len());
    for (pi, &gamma_db) in cfg.gamma_db_grid.iter().enumerate() {
        let gamma = db_to_linear(gamma_db);
        let params = RadioParams::new(
            cfg.f_c,
            cfg.delta_f,
            cfg.r_ch,
            gamma,
            1.0,
            1.0,
            if cfg.noiseless { 0.0 } else { 1.0 },
        )?;
        let mut errors = vec![0u64; cfg.models.len()];
        for (layout_idx, ctx) in layouts.iter().enumerate() {
            let block_errors = (0..cfg.bits_per_node)
                .into_par_iter()
                .map_init(
                    || Workspace::new(cfg.l),
                    |ws, n| {
                        simulate_bit(
                            cfg,
                            &codebook,
                            ctx.as_ref(),
                            &params,
                            (layout_idx, pi, n),
                            ws,
                        )
                    },
                )
                .try_reduce(
                    || vec![0u64; cfg.models.len()],
                    |mut acc, e| {
                        for (a, b) in acc.iter_mut().zip(&e) {
                            *a += b;
                        }
                        Ok(acc)
                    },
                )?;
            for (a, b) in errors.iter_mut().zip(&block_errors) {
                *a += b;
            }
        }

        let model_ber = |kind: GainModelKind| -> Option<ModelBer> {
            cfg.models
                .iter()
                .position(|&k| k == kind)
                .map(|mi| ModelBer::new(errors[mi], total_bits))
        };
        points.push(BerPoint {
            gamma_db,
            actual: model_ber(GainModelKind::Exact),
            artificial: model_ber(GainModelKind::Idealized),
            analytic_ber: ber_tilde(cfg.l, gamma),
            total_bits,
        });
    }
    Ok(BerCurve { l: cfg.l, points })
}

/// Gain statistics over random subsets of one fixed layout, one row per
/// requested subset size.
pub fn run_gain_experiment(cfg: &ExperimentConfig) -> Result<Vec<GainStats>> {
    cfg.validate()?;
    let layout = cfg.layout(0)?;
    let ctx = build_gain_context(&layout, cfg.wavelength(), cfg.gain_order(&layout))?;
    cfg.subset_sizes
        .sizes(cfg.l)
        .into_iter()
        .map(|size| gain_statistics(&ctx, size, cfg.subset_samples, cfg.data_seed))
        .collect()
}

/// `subset_size,n_samples,min_gain,mean_gain,max_gain` per row.
pub fn write_gain_csv<W: Write>(rows: &[GainStats], mut w: W) -> Result<()> {
    writeln!(w, "subset_size,n_samples,min_gain,mean_gain,max_gain")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.subset_size, r.n_samples, r.min, r.mean, r.max
        )?;
    }
    Ok(())
}

/// `gamma_hat_db,actual_ber,actual_ci,artificial_ber,artificial_ci,analytic_ber,total_bits`
/// per row; columns of models that were not run stay empty.
pub fn write_ber_csv<W: Write>(curve: &BerCurve, mut w: W) -> Result<()> {
    writeln!(
        w,
        "gamma_hat_db,actual_ber,actual_ci,artificial_ber,artificial_ci,analytic_ber,total_bits"
    )?;
    for p in &curve.points {
        let fmt = |m: &Option<ModelBer>| match m {
            Some(m) => format!("{},{}", m.ber, m.ci_half_width),
            None => ",".to_string(),
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            p.gamma_db,
            fmt(&p.actual),
            fmt(&p.artificial),
            p.analytic_ber,
            p.total_bits
        )?;
    }
    Ok(())
}

/// Human-oriented sweep summary; flags statistically unreliable points.
pub fn ber_summary(curve: &BerCurve) -> String {
    let mut out = String::new();
    for p in &curve.points {
        out.push_str(&format!("gamma_hat = {:+.2} dB:", p.gamma_db));
        for (name, m) in [("actual", &p.actual), ("artificial", &p.artificial)] {
            if let Some(m) = m {
                out.push_str(&format!(" {name} = {:.3e} ({} errors)", m.ber, m.errors));
                if m.unreliable() {
                    out.push_str(" [unreliable: <10 errors]");
                }
            }
        }
        out.push_str(&format!(" analytic = {:.3e}\n", p.analytic_ber));
    }
    out
}

// ---- manifest / key-value config interface ----

fn grid_to_string(grid: &[f64]) -> String {
    grid.iter()
        .map(|g| g.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_float_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = |reason: String| Error::config("gamma_db", reason);
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("expected start:step:stop, got `{spec}`")));
        }
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad number `{p}`")))
            })
            .collect::<Result<_>>()?;
        let (start, step, stop) = (nums[0], nums[1], nums[2]);
        if step == 0.0 || !step.is_finite() {
            return Err(bad("step must be nonzero".into()));
        }
        let span = (stop - start) / step;
        if span < -1e-9 {
            return Err(bad(format!(
                "step {step} never reaches {stop} from {start}"
            )));
        }
        let count = (span + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|k| start + step * k as f64).collect())
    } else {
        spec.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| bad(format!("bad number `{p}`")))
            })
            .collect()
    }
}

/// Parses `start:step:stop` over positive integers, or `all`.
pub fn parse_size_grid(spec: &str) -> Result<SizeGrid> {
    if spec.trim() == "all" {
        return Ok(SizeGrid::All);
    }
    let bad = |reason: String| Error::config("sizes", reason);
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(format!(
            "expected `all` or start:step:stop, got `{spec}`"
        )));
    }
    let nums: Vec<usize> = parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| bad(format!("bad integer `{p}`")))
        })
        .collect::<Result<_>>()?;
    Ok(SizeGrid::Range {
        start: nums[0],
        step: nums[1],
        stop: nums[2],
    })
}

fn size_grid_to_string(grid: SizeGrid) -> String {
    match grid {
        SizeGrid::All => "all".into(),
        SizeGrid::Range { start, step, stop } => format!("{start}:{step}:{stop}"),
    }
}

fn models_to_string(models: &[GainModelKind]) -> String {
    models
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn parse_models(spec: &str) -> Result<Vec<GainModelKind>> {
    spec.split(',')
        .map(|tok| match tok.trim() {
            "exact" => Ok(GainModelKind::Exact),
            "idealized" => Ok(GainModelKind::Idealized),
            other => Err(Error::config(
                "models",
                format!("unknown model `{other}` (expected exact, idealized)"),
            )),
        })
        .collect()
}

pub fn parse_decoder(spec: &str) -> Result<DecodeScheme> {
    match spec.trim() {
        "bit-level" => Ok(DecodeScheme::BitLevel),
        "chip-level" => Ok(DecodeScheme::ChipLevel),
        "power-2-3" => Ok(DecodeScheme::PowerTwoThirds),
        other => Err(Error::config(
            "decoder",
            format!("unknown decoder `{other}` (expected bit-level, chip-level, power-2-3)"),
        )),
    }
}

impl ExperimentConfig {
    /// Serializes the full configuration as `key = value` lines. The text
    /// is itself a valid config file: rerunning the same subcommand with
    /// it reproduces the outputs byte for byte.
    pub fn manifest(&self, subcommand: &str) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("subcommand", subcommand.into());
        kv("l", self.l.to_string());
        kv("r_max", self.r_max.to_string());
        kv("theta0", self.theta0.to_string());
        kv("f_c", self.f_c.to_string());
        kv("delta_f", self.delta_f.to_string());
        kv("r_ch", self.r_ch.to_string());
        kv("bits_per_node", self.bits_per_node.to_string());
        kv("gamma_db", grid_to_string(&self.gamma_db_grid));
        kv("layout_seed", self.layout_seed.to_string());
        kv("data_seed", self.data_seed.to_string());
        kv("noise_seed", self.noise_seed.to_string());
        kv(
            "quadrature_order",
            self.quadrature_order
                .map_or("auto".into(), |o| o.to_string()),
        );
        kv("models", models_to_string(&self.models));
        kv("decoder", self.decoder.to_string());
        kv("noiseless", self.noiseless.to_string());
        kv("sizes", size_grid_to_string(self.subset_sizes));
        kv("subsets", self.subset_samples.to_string());
        kv("n_layouts", self.n_layouts.to_string());
        s
    }

    /// Applies one `key = value` assignment; unknown keys are rejected.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let int = |v: &str, key: &str| -> Result<u64> {
            v.parse()
                .map_err(|_| Error::config(key, format!("bad integer `{v}`")))
        };
        let float = |v: &str, key: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::config(key, format!("bad number `{v}`")))
        };
        match key {
            "subcommand" => {} // informational; checked by the CLI
            "l" => self.l = int(value, key)? as usize,
            "r_max" => self.r_max = float(value, key)?,
            "theta0" => self.theta0 = float(value, key)?,
            "f_c" => self.f_c = float(value, key)?,
            "delta_f" => self.delta_f = float(value, key)?,
            "r_ch" => self.r_ch = float(value, key)?,
            "bits_per_node" => self.bits_per_node = int(value, key)? as usize,
            "gamma_db" => self.gamma_db_grid = parse_float_grid(value)?,
            "layout_seed" => self.layout_seed = int(value, key)?,
            "data_seed" => self.data_seed = int(value, key)?,
            "noise_seed" => self.noise_seed = int(value, key)?,
            "quadrature_order" => {
                self.quadrature_order = if value.trim() == "auto" {
                    None
                } else {
                    Some(int(value, key)? as usize)
                }
            }
            "models" => self.models = parse_models(value)?,
            "decoder" => self.decoder = parse_decoder(value)?,
            "noiseless" => {
                self.noiseless = value.trim().parse().map_err(|_| {
                    Error::config(key, format!("expected true or false, got `{value}`"))
                })?
            }
            "sizes" => self.subset_sizes = parse_size_grid(value)?,
            "subsets" => self.subset_samples = int(value, key)? as usize,
            "n_layouts" => self.n_layouts = int(value, key)? as usize,
            other => {
                return Err(Error::config(
                    other,
                    "unknown configuration key".to_string(),
                ))
            }
        }
        Ok(())
    }

    /// Applies a whole `key = value` file (comments with `#`, blank lines
    /// ignored). Returns the `subcommand` value if the file declares one.
    pub fn apply_text(&mut self, text: &str) -> Result<Option<String>> {
        let mut subcommand = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let key = key.trim();
            let value = value.trim();
            if key == "subcommand" {
                subcommand = Some(value.to_string());
            }
            self.apply(key, value)?;
        }
        Ok(subcommand)
    }
}
