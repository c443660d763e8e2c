//! Per-chip received decision variables under a selectable gain model
//! and AWGN, plus a waveform-level oracle for the chip-level shortcut.
//!
//! The fast path never synthesizes carriers: for chip `q` with transmitting
//! subsets (S1, S2) it directly forms
//!
//! ```text
//! kappa_q = sqrt(E_b P(d)) * [A(S1) - A(S2)] + w_q,
//! w_q ~ N(0, 2 sigma_N^2 T_b / T_ch) = N(0, 2 L sigma_N^2)
//! ```
//!
//! with the amplification `A` supplied by the gain model. The bandpass
//! correlator pair exists only in [`waveform_oracle`], which checks the
//! shortcut's scaling conventions at toy carrier frequencies.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::beamform::GainContext;
use crate::codebook::{BitStream, SpreadingCodebook};
use crate::error::{Error, Result};
use crate::rng::StreamRng;
use crate::SPEED_OF_LIGHT;

/// Radio-level constants of the link.
///
/// `delta_f` is the tone half-separation: the BFSK tones sit at
/// `f_c +/- delta_f`. Coherent orthogonality over one chip requires the
/// full separation `2 delta_f` to be at least the chip rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadioParams {
    pub f_c: f64,
    pub delta_f: f64,
    pub r_ch: f64,
    pub e_b: f64,
    pub d: f64,
    pub p_d: f64,
    pub sigma_n2: f64,
}

impl RadioParams {
    pub fn new(
        f_c: f64,
        delta_f: f64,
        r_ch: f64,
        e_b: f64,
        d: f64,
        p_d: f64,
        sigma_n2: f64,
    ) -> Result<Self> {
        if !f_c.is_finite() || f_c <= 0.0 {
            return Err(Error::invalid("f_c", "carrier frequency must be positive"));
        }
        if !r_ch.is_finite() || r_ch <= 0.0 {
            return Err(Error::invalid("r_ch", "chip rate must be positive"));
        }
        if !delta_f.is_finite() || delta_f <= 0.0 || 2.0 * delta_f < r_ch {
            return Err(Error::invalid(
                "delta_f",
                format!(
                    "tone separation 2*{delta_f} breaks orthogonality; need >= chip rate {r_ch}"
                ),
            ));
        }
        if !e_b.is_finite() || e_b < 0.0 {
            return Err(Error::invalid("e_b", "energy per bit must be >= 0"));
        }
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::invalid("d", "receiver distance must be positive"));
        }
        if !p_d.is_finite() || p_d <= 0.0 {
            return Err(Error::invalid("p_d", "path-loss factor must be positive"));
        }
        if !sigma_n2.is_finite() || sigma_n2 < 0.0 {
            return Err(Error::invalid("sigma_n2", "noise variance must be >= 0"));
        }
        Ok(RadioParams {
            f_c,
            delta_f,
            r_ch,
            e_b,
            d,
            p_d,
            sigma_n2,
        })
    }

    /// Normalized-SNR mode: the sweep variable is
    /// `gamma_hat = E_b P(d) / sigma_N^2`, the receive SNR a single node
    /// would see without beamforming gain. Internally `E_b P(d)` is set to
    /// `gamma_hat` and `sigma_N^2` to 1, with the paper's radio constants.
    pub fn normalized(gamma_hat: f64) -> Result<Self> {
        if !gamma_hat.is_finite() || gamma_hat < 0.0 {
            return Err(Error::invalid("gamma_hat", "normalized SNR must be >= 0"));
        }
        RadioParams::new(2.45e9, 64e3, 128_000.0, gamma_hat, 1.0, 1.0, 1.0)
    }

    /// Same, but noiseless (for gain-variability-only runs).
    pub fn normalized_noiseless(signal_energy: f64) -> Result<Self> {
        let mut p = RadioParams::normalized(signal_energy)?;
        p.sigma_n2 = 0.0;
        Ok(p)
    }

    pub fn t_ch(&self) -> f64 {
        1.0 / self.r_ch
    }

    pub fn t_b(&self, l: usize) -> f64 {
        l as f64 * self.t_ch()
    }

    /// Received amplitude factor sqrt(E_b P(d)).
    pub fn amplitude(&self) -> f64 {
        (self.e_b * self.p_d).sqrt()
    }

    /// Variance of the per-chip noise `w_q`: `2 sigma_N^2 T_b / T_ch`.
    pub fn chip_noise_variance(&self, l: usize) -> f64 {
        2.0 * l as f64 * self.sigma_n2
    }
}

/// Free-space path loss `(c / (4 pi d f_c))^2`.
pub fn path_loss(d: f64, f_c: f64) -> Result<f64> {
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::invalid("d", "distance must be positive"));
    }
    if !f_c.is_finite() || f_c <= 0.0 {
        return Err(Error::invalid("f_c", "frequency must be positive"));
    }
    let x = SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * d * f_c);
    Ok(x * x)
}

/// How the per-subset amplification `A` is computed.
#[derive(Debug, Clone, Copy)]
pub enum GainModel<'a> {
    /// Quadrature-exact `sqrt(G(S)) |S|` from a gain context.
    Exact(&'a GainContext),
    /// `A(S) = |S|^{3/2}` (gain exactly linear in subset size).
    Idealized,
    /// Linearized difference `(3/2) sqrt(L/2) (|S1| - |S2|)`.
    Linearized,
    /// Unit gains: `A(S) = |S|`, the plain DSSS aggregate.
    Unit,
}

impl GainModel<'_> {
    /// `A(S1) - A(S2)` for one chip's membership split. `scratch` is only
    /// touched by the exact model and is resized on demand.
    pub fn amplification_diff(&self, members: &[bool], scratch: &mut Vec<Complex64>) -> f64 {
        let l = members.len();
        let n1 = members.iter().filter(|&&m| m).count();
        let n2 = l - n1;
        match self {
            GainModel::Exact(ctx) => {
                assert_eq!(
                    l,
                    ctx.n_nodes(),
                    "gain context built for a different layout size"
                );
                scratch.resize(ctx.order(), Complex64::new(0.0, 0.0));
                let (a1, a2) = ctx.amplification_pair_with(members, scratch);
                a1 - a2
            }
            GainModel::Idealized => (n1 as f64).powf(1.5) - (n2 as f64).powf(1.5),
            GainModel::Linearized => 1.5 * (l as f64 / 2.0).sqrt() * (n1 as f64 - n2 as f64),
            GainModel::Unit => n1 as f64 - n2 as f64,
        }
    }
}

/// Which nodes transmit at f1 (chip +1) in every chip period.
///
/// Materializes `n_chips * L` membership flags, which is fine for the
/// analysis scales this type serves; the BER sweeps in
/// [`crate::experiments`] stream one bit period at a time instead.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipPartition {
    l: usize,
    n_chips: usize,
    members: Vec<bool>, // row-major, chip q occupies [q*l, (q+1)*l)
}

impl ChipPartition {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn n_chips(&self) -> usize {
        self.n_chips
    }

    /// Membership row of chip `q`; `true` means the node transmits at f1.
    pub fn members_at(&self, q: usize) -> &[bool] {
        &self.members[q * self.l..(q + 1) * self.l]
    }

    pub fn count_f1(&self, q: usize) -> usize {
        self.members_at(q).iter().filter(|&&m| m).count()
    }

    /// `|S1| - |S2|`, the transmitted aggregate chip value.
    pub fn aggregate(&self, q: usize) -> i64 {
        2 * self.count_f1(q) as i64 - self.l as i64
    }
}

/// Splits every chip period into the f1/f2 transmitting subsets: node `l`
/// is in S1 at chip `q = n L + k` iff its chip `b_n c_k` is +1.
pub fn partition_chips(codebook: &SpreadingCodebook, bits: &[BitStream]) -> Result<ChipPartition> {
    let l = codebook.len();
    if bits.len() != l {
        return Err(Error::LengthMismatch {
            expected: l,
            actual: bits.len(),
        });
    }
    let n_bits = bits[0].len();
    if let Some(bad) = bits.iter().find(|b| b.len() != n_bits) {
        return Err(Error::LengthMismatch {
            expected: n_bits,
            actual: bad.len(),
        });
    }
    let n_chips = n_bits * l;
    let mut members = vec![false; n_chips * l];
    for n in 0..n_bits {
        for k in 0..l {
            let q = n * l + k;
            let row = &mut members[q * l..(q + 1) * l];
            for (node, stream) in bits.iter().enumerate() {
                row[node] = stream.bits()[n] * codebook.chip(node, k) > 0;
            }
        }
    }
    Ok(ChipPartition {
        l,
        n_chips,
        members,
    })
}

/// Per-chip noise sample: the stream is keyed by the chip index, so chips
/// can be generated independently in any order.
pub fn chip_noise(seed: u64, chip: usize, std_dev: f64) -> f64 {
    StreamRng::new(seed, &[chip as u64]).next_gaussian_pair().0 * std_dev
}

/// Forms the noisy decision-variable sequence `kappa_q` for a chip
/// partition under the given gain model. Deterministic per `(seed, q)`.
pub fn kappa_sequence(
    partition: &ChipPartition,
    model: &GainModel,
    params: &RadioParams,
    seed: u64,
) -> Vec<f64> {
    let amp = params.amplitude();
    let noise_sd = params.chip_noise_variance(partition.l()).sqrt();
    (0..partition.n_chips())
        .into_par_iter()
        .map_init(Vec::new, |scratch, q| {
            let adiff = model.amplification_diff(partition.members_at(q), scratch);
            amp * adiff + chip_noise(seed, q, noise_sd)
        })
        .collect()
}

/// Synthesizes one chip of the received bandpass waveform and runs the two
/// coherent tone correlators of the BFSK demodulator:
///
/// ```text
/// zeta_i = sqrt(2 T_b) / T_ch * Int_0^{T_ch} y(t) cos(2 pi f_i t) dt
/// ```
///
/// with `y(t) = sqrt(2 E_b P / T_b) [A(S1) cos(2 pi f_1 t) + A(S2) cos(2 pi f_2 t)]`
/// (all modulator phases zero, no noise). The midpoint-rule integration is
/// exact when carrier and tones are integer multiples of half the chip
/// rate, so pick toy carriers like `f_c = 32 R_ch` rather than RF values.
/// `zeta_1 - zeta_2` must reproduce the noiseless `kappa` of the same chip.
pub fn waveform_oracle(
    members: &[bool],
    model: &GainModel,
    params: &RadioParams,
    samples_per_chip: usize,
) -> Result<(f64, f64)> {
    let l = members.len();
    if l == 0 {
        return Err(Error::invalid("members", "chip partition must be nonempty"));
    }
    let min_samples = (8.0 * params.f_c / params.r_ch).ceil() as usize;
    if samples_per_chip < min_samples {
        return Err(Error::invalid(
            "samples_per_chip",
            format!(
                "carrier undersampled: need >= {min_samples} samples per chip for f_c = {} and R_ch = {}",
                params.f_c, params.r_ch
            ),
        ));
    }

    let mut scratch = Vec::new();
    let n1 = members.iter().filter(|&&m| m).count();
    let inverted: Vec<bool> = members.iter().map(|&m| !m).collect();
    let a1 = subset_amplification(model, members, n1, &mut scratch);
    let a2 = subset_amplification(model, &inverted, l - n1, &mut scratch);

    let t_ch = params.t_ch();
    let t_b = params.t_b(l);
    let amp = (2.0 * params.e_b * params.p_d / t_b).sqrt();
    let f1 = params.f_c + params.delta_f;
    let f2 = params.f_c - params.delta_f;
    let dt = t_ch / samples_per_chip as f64;
    let scale = (2.0 * t_b).sqrt() / t_ch;

    let mut z1 = 0.0;
    let mut z2 = 0.0;
    for s in 0..samples_per_chip {
        let t = (s as f64 + 0.5) * dt;
        let y = amp
            * (a1 * (std::f64::consts::TAU * f1 * t).cos()
                + a2 * (std::f64::consts::TAU * f2 * t).cos());
        z1 += y * (std::f64::consts::TAU * f1 * t).cos();
        z2 += y * (std::f64::consts::TAU * f2 * t).cos();
    }
    Ok((scale * z1 * dt, scale * z2 * dt))
}

/// Amplification of the membership-selected subset alone.
fn subset_amplification(
    model: &GainModel,
    members: &[bool],
    n: usize,
    scratch: &mut Vec<Complex64>,
) -> f64 {
    if n == 0 {
        return 0.0;
    }
    match model {
        GainModel::Exact(ctx) => {
            scratch.resize(ctx.order(), Complex64::new(0.0, 0.0));
            ctx.amplification_pair_with(members, scratch).0
        }
        GainModel::Idealized => (n as f64).powf(1.5),
        GainModel::Linearized => 1.5 * (members.len() as f64 / 2.0).sqrt() * n as f64,
        GainModel::Unit => n as f64,
    }
}
