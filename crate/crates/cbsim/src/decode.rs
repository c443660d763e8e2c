//! Recovering node bit streams from the noisy decision variables.
//!
//! Bit-level decoding (the preferred receiver) despreads the raw kappa
//! sequence with each node's code before any per-chip decision. Chip-level
//! decoding first snaps every kappa to the nearest noiseless aggregate
//! value, then despreads. The power-2/3 variant pre-inverts the gain
//! nonlinearity before bit-level decoding.

use crate::channel::{GainModel, RadioParams};
use crate::codebook::SpreadingCodebook;
use crate::error::{Error, Result};

/// Which receiver produced a [`DecodeResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeScheme {
    BitLevel,
    ChipLevel,
    PowerTwoThirds,
}

impl std::fmt::Display for DecodeScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DecodeScheme::BitLevel => "bit-level",
            DecodeScheme::ChipLevel => "chip-level",
            DecodeScheme::PowerTwoThirds => "power-2-3",
        })
    }
}

/// Per-node decision statistics and hard bits. A zero statistic resolves
/// to +1 (fixed tie-break, measure-zero under noise).
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    scheme: DecodeScheme,
    l: usize,
    n_bits: usize,
    stats: Vec<f64>, // node-major: stats[node * n_bits + n]
    hard: Vec<i8>,
}

impl DecodeResult {
    fn from_stats(scheme: DecodeScheme, l: usize, n_bits: usize, stats: Vec<f64>) -> Self {
        let hard = stats
            .iter()
            .map(|&s| if s >= 0.0 { 1i8 } else { -1 })
            .collect();
        DecodeResult {
            scheme,
            l,
            n_bits,
            stats,
            hard,
        }
    }

    pub fn scheme(&self) -> DecodeScheme {
        self.scheme
    }

    pub fn n_nodes(&self) -> usize {
        self.l
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn statistic(&self, node: usize, bit: usize) -> f64 {
        self.stats[node * self.n_bits + bit]
    }

    /// Hard decisions of one node, in transmission order.
    pub fn hard_bits(&self, node: usize) -> &[i8] {
        &self.hard[node * self.n_bits..(node + 1) * self.n_bits]
    }

    /// Hamming distance against the transmitted bits of one node.
    pub fn bit_errors(&self, node: usize, sent: &[i8]) -> usize {
        self.hard_bits(node)
            .iter()
            .zip(sent)
            .filter(|(a, b)| a != b)
            .count()
    }
}

fn check_kappa_len(kappas: &[f64], l: usize) -> Result<usize> {
    if l == 0 {
        return Err(Error::invalid("codebook", "empty codebook"));
    }
    if kappas.is_empty() || !kappas.len().is_multiple_of(l) {
        return Err(Error::invalid(
            "kappas",
            format!(
                "length {} is not a positive multiple of the code length {l}",
                kappas.len()
            ),
        ));
    }
    Ok(kappas.len() / l)
}

/// Despreads each bit period of the raw kappa sequence with every node's
/// code: `stat(l, n) = sum_m kappa[n L + m] c_m^(l)`.
pub fn bit_level_decode(kappas: &[f64], codebook: &SpreadingCodebook) -> Result<DecodeResult> {
    let l = codebook.len();
    let n_bits = check_kappa_len(kappas, l)?;
    let mut stats = vec![0.0f64; l * n_bits];
    for node in 0..l {
        let code = codebook.code(node);
        let row = &mut stats[node * n_bits..(node + 1) * n_bits];
        for (n, slot) in row.iter_mut().enumerate() {
            let chunk = &kappas[n * l..(n + 1) * l];
            *slot = chunk.iter().zip(code).map(|(&k, &c)| k * c as f64).sum();
        }
    }
    Ok(DecodeResult::from_stats(
        DecodeScheme::BitLevel,
        l,
        n_bits,
        stats,
    ))
}

/// Applies the signed-magnitude 2/3 power to every kappa (inverting the
/// idealized 3/2-power gain growth), then decodes at bit level.
pub fn power_twothirds_decode(
    kappas: &[f64],
    codebook: &SpreadingCodebook,
) -> Result<DecodeResult> {
    let transformed: Vec<f64> = kappas
        .iter()
        .map(|&k| k.signum() * k.abs().powf(2.0 / 3.0))
        .collect();
    let mut out = bit_level_decode(&transformed, codebook)?;
    out.scheme = DecodeScheme::PowerTwoThirds;
    Ok(out)
}

/// The noiseless kappa value the receiver would see for aggregate `a`
/// under the given model's amplitude map. The exact model quantizes with
/// the idealized map: the receiver cannot know the per-chip subsets.
fn noiseless_value(model: &GainModel, l: usize, a: i64, amp: f64) -> f64 {
    let n1 = (l as i64 + a) as f64 / 2.0;
    let n2 = (l as i64 - a) as f64 / 2.0;
    let map = match model {
        GainModel::Exact(_) | GainModel::Idealized => n1.powf(1.5) - n2.powf(1.5),
        GainModel::Linearized => 1.5 * (l as f64 / 2.0).sqrt() * a as f64,
        GainModel::Unit => a as f64,
    };
    amp * map
}

/// Estimates each chip's aggregate by nearest-neighbor inversion of the
/// amplitude map over the achievable values `a = -L, -L+2, ..., L`, then
/// despreads the estimated aggregates and takes signs. An exact midpoint
/// snaps to the smaller `|a|` (and to positive `a` when tied).
pub fn chip_level_decode(
    kappas: &[f64],
    codebook: &SpreadingCodebook,
    model: &GainModel,
    params: &RadioParams,
) -> Result<DecodeResult> {
    let l = codebook.len();
    let n_bits = check_kappa_len(kappas, l)?;
    let amp = params.amplitude();

    // achievable aggregates share L's parity; the map is monotone in a
    let candidates: Vec<i64> = (-(l as i64)..=l as i64).step_by(2).collect();
    let values: Vec<f64> = candidates
        .iter()
        .map(|&a| noiseless_value(model, l, a, amp))
        .collect();

    let quantize = |kappa: f64| -> i64 {
        let idx = values.partition_point(|&v| v < kappa);
        if idx == 0 {
            return candidates[0];
        }
        if idx == values.len() {
            return candidates[values.len() - 1];
        }
        let (lo, hi) = (values[idx - 1], values[idx]);
        let (d_lo, d_hi) = (kappa - lo, hi - kappa);
        if d_lo < d_hi {
            candidates[idx - 1]
        } else if d_hi < d_lo {
            candidates[idx]
        } else {
            // exact midpoint: smaller magnitude, then positive
            let (a, b) = (candidates[idx - 1], candidates[idx]);
            match a.abs().cmp(&b.abs()) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => a.max(b),
            }
        }
    };

    let estimates: Vec<i64> = kappas.iter().map(|&k| quantize(k)).collect();
    let mut stats = vec![0.0f64; l * n_bits];
    for node in 0..l {
        let code = codebook.code(node);
        let row = &mut stats[node * n_bits..(node + 1) * n_bits];
        for (n, slot) in row.iter_mut().enumerate() {
            let chunk = &estimates[n * l..(n + 1) * l];
            let dot: i64 = chunk.iter().zip(code).map(|(&a, &c)| a * c as i64).sum();
            *slot = dot as f64;
        }
    }
    Ok(DecodeResult::from_stats(
        DecodeScheme::ChipLevel,
        l,
        n_bits,
        stats,
    ))
}

/// Brute-force maximum of the linearization error
/// `(a^{3/2} - b^{3/2} - sqrt(L)(a - b)) / (a^{3/2} - b^{3/2})`
/// over all splits `a + b = L`, `a > b >= 0`; returns the maximum and the
/// split attaining it.
pub fn linearization_error(l: usize) -> Result<(f64, (u64, u64))> {
    if l < 2 {
        return Err(Error::invalid("l", "need at least 2 nodes"));
    }
    let sqrt_l = (l as f64).sqrt();
    let mut max_err = f64::NEG_INFINITY;
    let mut argmax = (l as u64, 0u64);
    let mut a = l as i64 / 2 + 1;
    while a <= l as i64 {
        let b = l as i64 - a;
        let fa = (a as f64).powf(1.5);
        let fb = (b as f64).powf(1.5);
        let denom = fa - fb;
        let err = (denom - sqrt_l * (a - b) as f64) / denom;
        if err > max_err {
            max_err = err;
            argmax = (a as u64, b as u64);
        }
        a += 1;
    }
    Ok((max_err, argmax))
}
