//! Cooperative-beamforming directivity of node subsets.
//!
//! The directivity of a transmitting subset S at elevation theta0 is
//!
//! ```text
//! D(S) = 2 pi |S|^2 / Int_{-pi}^{pi} | sum_{l in S} exp(-j a(phi) z_l(phi)) |^2 dphi
//! a(phi)   = 4 pi (R_max / lambda) sin(theta0) sin(phi / 2)
//! z_l(phi) = (r_l / R_max) sin(phi_l - phi / 2)
//! ```
//!
//! normalized so a single isotropic node has directivity exactly 1. The
//! integral is evaluated by Gauss-Legendre quadrature over a phase table
//! precomputed once per (layout, wavelength): entry (l, m) holds
//! `exp(-j a(phi_m) z_l(phi_m))`. A subset evaluation then only sums the
//! selected rows and applies the weights, and the cached all-nodes row sum
//! gives the complement subset's sum by subtraction — the dominant cost
//! saver when every chip period splits the network into two subsets.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::NetworkLayout;
use crate::quad::GaussLegendre;
use crate::rng::StreamRng;

/// A set of node indices into a layout (sorted, distinct).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSubset {
    indices: Vec<u32>,
}

impl NodeSubset {
    /// Builds a subset, checking indices are in range; duplicates are
    /// rejected. Order does not matter (set semantics).
    pub fn from_indices(indices: &[usize], layout_len: usize) -> Result<Self> {
        let mut v: Vec<u32> = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= layout_len {
                return Err(Error::invalid(
                    "subset",
                    format!("index {i} out of range for {layout_len} nodes"),
                ));
            }
            v.push(i as u32);
        }
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("subset", "duplicate node index"));
        }
        Ok(NodeSubset { indices: v })
    }

    /// All nodes of an `n`-node layout.
    pub fn full(n: usize) -> Self {
        NodeSubset {
            indices: (0..n as u32).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    /// The complement with respect to an `n`-node layout.
    pub fn complement(&self, n: usize) -> Self {
        let mut out = Vec::with_capacity(n - self.indices.len());
        let mut next = self.indices.iter().copied().peekable();
        for i in 0..n as u32 {
            if next.peek() == Some(&i) {
                next.next();
            } else {
                out.push(i);
            }
        }
        NodeSubset { indices: out }
    }
}

/// Precomputed quadrature state for one (layout, wavelength) pair.
#[derive(Debug, Clone)]
pub struct GainContext {
    n_nodes: usize,
    wavelength: f64,
    order: usize,
    /// Quadrature abscissae mapped to [-pi, pi].
    phis: Vec<f64>,
    /// Quadrature weights for the dphi integral; they sum to 2 pi.
    weights: Vec<f64>,
    /// Row-major (node x quad point) table of exp(-j a z_l).
    table: Vec<Complex64>,
    /// Row sum over all nodes, cached for complement evaluations.
    full_sum: Vec<Complex64>,
}

/// Order heuristic: the integrand's highest significant harmonic grows
/// like the largest pairwise phase span `4 pi (R_max/lambda) |sin theta0|`,
/// and Gauss-Legendre resolves a trigonometric harmonic k with about
/// `pi k / 2` nodes. Sized with ~15% headroom and a floor of 1024.
pub fn default_quadrature_order(layout: &NetworkLayout, wavelength: f64) -> usize {
    let z_max =
        4.0 * std::f64::consts::PI * (layout.r_max() / wavelength) * layout.theta0().sin().abs();
    let needed = std::f64::consts::FRAC_PI_2 * z_max * 1.15 + 64.0;
    (needed as usize).max(1024).next_power_of_two()
}

/// Fills the phase table and weight vector for the given layout.
pub fn build_gain_context(
    layout: &NetworkLayout,
    wavelength: f64,
    quadrature_order: usize,
) -> Result<GainContext> {
    if !wavelength.is_finite() || wavelength <= 0.0 {
        return Err(Error::invalid("wavelength", "must be positive"));
    }
    if quadrature_order < 16 {
        return Err(Error::invalid("quadrature_order", "must be at least 16"));
    }
    let rule = GaussLegendre::cached(quadrature_order)?;
    let phis: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|&x| std::f64::consts::PI * x)
        .collect();
    let weights: Vec<f64> = rule
        .weights()
        .iter()
        .map(|&w| std::f64::consts::PI * w)
        .collect();

    let n = layout.len();
    let order = quadrature_order;
    let sin_theta0 = layout.theta0().sin();
    let alpha_scale = 4.0 * std::f64::consts::PI * (layout.r_max() / wavelength) * sin_theta0;
    let mut table = vec![Complex64::new(0.0, 0.0); n * order];
    table
        .par_chunks_mut(order)
        .enumerate()
        .for_each(|(l, row)| {
            let node = layout.nodes()[l];
            let rr = node.r / layout.r_max();
            for (m, slot) in row.iter_mut().enumerate() {
                let half_phi = 0.5 * phis[m];
                let alpha = alpha_scale * half_phi.sin();
                let z = rr * (node.phi - half_phi).sin();
                let (s, c) = (-alpha * z).sin_cos();
                *slot = Complex64::new(c, s);
            }
        });

    let mut full_sum = vec![Complex64::new(0.0, 0.0); order];
    for row in table.chunks_exact(order) {
        for (acc, &v) in full_sum.iter_mut().zip(row) {
            *acc += v;
        }
    }

    Ok(GainContext {
        n_nodes: n,
        wavelength,
        order,
        phis,
        weights,
        table,
        full_sum,
    })
}

impl GainContext {
    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn quad_points(&self) -> &[f64] {
        &self.phis
    }

    pub fn quad_weights(&self) -> &[f64] {
        &self.weights
    }

    /// Phase-table row of one node.
    pub fn phase_row(&self, node: usize) -> &[Complex64] {
        &self.table[node * self.order..(node + 1) * self.order]
    }

    fn weighted_norm(&self, sum: &[Complex64]) -> f64 {
        self.weights
            .iter()
            .zip(sum)
            .map(|(&w, s)| w * s.norm_sqr())
            .sum()
    }

    fn sum_rows_into(&self, indices: &[u32], acc: &mut [Complex64]) {
        acc.fill(Complex64::new(0.0, 0.0));
        for &l in indices {
            let row = self.phase_row(l as usize);
            for (a, &v) in acc.iter_mut().zip(row) {
                *a += v;
            }
        }
    }

    /// Directivity of a nonempty subset (Eq. above). Errors on the empty
    /// subset: an undefined directivity should not silently read as zero.
    pub fn directivity(&self, subset: &NodeSubset) -> Result<f64> {
        if subset.is_empty() {
            return Err(Error::invalid("subset", "directivity of the empty subset"));
        }
        if let Some(&max) = subset.indices().last() {
            if max as usize >= self.n_nodes {
                return Err(Error::invalid("subset", "index out of range for context"));
            }
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); self.order];
        self.sum_rows_into(subset.indices(), &mut acc);
        let integral = self.weighted_norm(&acc);
        let n = subset.len() as f64;
        Ok(2.0 * std::f64::consts::PI * n * n / integral)
    }

    /// Beamforming power gain: efficiency times directivity with the
    /// efficiency factor fixed at 1.
    pub fn gain(&self, subset: &NodeSubset) -> Result<f64> {
        self.directivity(subset)
    }

    /// Coherent amplitude multiplier `sqrt(gain) * |S|`; 0 for the empty
    /// subset (a tone nobody transmits contributes no signal).
    pub fn amplification(&self, subset: &NodeSubset) -> Result<f64> {
        if subset.is_empty() {
            return Ok(0.0);
        }
        Ok(self.gain(subset)?.sqrt() * subset.len() as f64)
    }

    /// Amplifications of a membership partition and its complement, using
    /// the cached all-nodes sum so only the smaller side's rows are added.
    /// `members[l]` selects node `l` into the first subset.
    pub fn amplification_pair(&self, members: &[bool]) -> (f64, f64) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.order];
        self.amplification_pair_with(members, &mut scratch)
    }

    /// Scratch-buffer variant of [`GainContext::amplification_pair`] for
    /// per-chip hot loops.
    pub fn amplification_pair_with(
        &self,
        members: &[bool],
        scratch: &mut [Complex64],
    ) -> (f64, f64) {
        debug_assert_eq!(members.len(), self.n_nodes);
        debug_assert_eq!(scratch.len(), self.order);
        let n1 = members.iter().filter(|&&m| m).count();
        let n2 = self.n_nodes - n1;
        if n1 == 0 || n2 == 0 {
            // one side is the full set, the other empty
            let integral = self.weighted_norm(&self.full_sum);
            let nf = self.n_nodes as f64;
            let a_full = (2.0 * std::f64::consts::PI * nf * nf / integral).sqrt() * nf;
            return if n1 == 0 {
                (0.0, a_full)
            } else {
                (a_full, 0.0)
            };
        }
        // sum the smaller side's rows, derive the other by subtraction
        let sum_first = n1 <= n2;
        scratch.fill(Complex64::new(0.0, 0.0));
        for (l, &m) in members.iter().enumerate() {
            if m == sum_first {
                let row = self.phase_row(l);
                for (a, &v) in scratch.iter_mut().zip(row) {
                    *a += v;
                }
            }
        }
        let (mut i_small, mut i_large) = (0.0f64, 0.0f64);
        for ((&w, s), f) in self.weights.iter().zip(scratch.iter()).zip(&self.full_sum) {
            i_small += w * s.norm_sqr();
            let other = f - s;
            i_large += w * other.norm_sqr();
        }
        let amp = |n: usize, integral: f64| {
            let nf = n as f64;
            (2.0 * std::f64::consts::PI * nf * nf / integral).sqrt() * nf
        };
        if sum_first {
            (amp(n1, i_small), amp(n2, i_large))
        } else {
            (amp(n1, i_large), amp(n2, i_small))
        }
    }
}

/// Min / mean / max of the gain over random fixed-size subsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainStats {
    pub subset_size: usize,
    pub n_samples: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Samples `n_samples` uniformly random subsets of the given size and
/// reports gain statistics. Sample `i` draws from the stream keyed
/// `(seed, [subset_size, i])`, so results do not depend on how the work
/// is split across threads.
pub fn gain_statistics(
    ctx: &GainContext,
    subset_size: usize,
    n_samples: usize,
    seed: u64,
) -> Result<GainStats> {
    if subset_size == 0 || subset_size > ctx.n_nodes() {
        return Err(Error::invalid(
            "subset_size",
            format!("must be in 1..={}, got {subset_size}", ctx.n_nodes()),
        ));
    }
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let gains: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = StreamRng::new(seed, &[subset_size as u64, i as u64]);
            let idx = rng.sample_indices(ctx.n_nodes(), subset_size);
            let subset = NodeSubset { indices: idx };
            ctx.gain(&subset).expect("nonempty subset")
        })
        .collect();
    // sequential reduction keeps the mean identical across thread counts
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &g in &gains {
        min = min.min(g);
        max = max.max(g);
        sum += g;
    }
    Ok(GainStats {
        subset_size,
        n_samples,
        min,
        mean: sum / n_samples as f64,
        max,
    })
}

/// Doubling self-check: relative change of a subset's directivity when the
/// quadrature order doubles. Exposed as a diagnostic for order selection.
pub fn directivity_doubling_error(
    layout: &NetworkLayout,
    wavelength: f64,
    order: usize,
    subset: &NodeSubset,
) -> Result<f64> {
    let ctx_n = build_gain_context(layout, wavelength, order)?;
    let ctx_2n = build_gain_context(layout, wavelength, 2 * order)?;
    let d_n = ctx_n.directivity(subset)?;
    let d_2n = ctx_2n.directivity(subset)?;
    Ok((d_2n - d_n).abs() / d_2n.abs())
}
