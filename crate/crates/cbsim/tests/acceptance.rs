//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line with its runtime (visible with `--nocapture`). Parameters
//! and tolerances are pinned here, not configurable.
//!
//! Two known failures, kept at their stated parameters to document the
//! measured physics rather than hide it:
//!
//! * criterion 04 checks min/max gain overlap between subset sizes 31 and
//!   33 at L = 64 with 200 samples per size. The sample extremes at 200
//!   draws span about +/-2.5% around the mean while the two means differ
//!   by ~3%, so the intervals do not meet — for any layout seed. The
//!   overlap property itself is real and holds for adjacent sizes at
//!   L = 128 (and for 31/33 at L = 64 once the sample count reaches ~10^3);
//!   see `overlap_adjacent_sizes_paper_scale` in the beamform module tests.
//! * criterion 05 asserts a sub-1e-3 relative match between the two BFSK
//!   tones' directivities. The physically exact difference at the default
//!   geometry (100 m field, 2.45 GHz +/- 64 kHz tones) is 1e-3..5e-3 and
//!   scales linearly with the tone separation, so the check fails by
//!   construction.

use std::time::Instant;

use cbsim::analysis::{ber_tilde, db_to_linear};
use cbsim::beamform::{build_gain_context, default_quadrature_order, gain_statistics, NodeSubset};
use cbsim::channel::{chip_noise, waveform_oracle, GainModel, RadioParams};
use cbsim::cli::linear_fit;
use cbsim::codebook::{build_hadamard, despread_exact};
use cbsim::decode::{linearization_error, DecodeScheme};
use cbsim::experiments::{
    run_ber_experiment, run_gain_experiment, ExperimentConfig, GainModelKind, SizeGrid,
};
use cbsim::geometry::place_nodes;
use cbsim::rng::StreamRng;
use cbsim::{wavelength, SPEED_OF_LIGHT};

const F_C: f64 = 2.45e9;

fn report(criterion: &str, start: Instant) {
    println!(
        "criterion {criterion}: PASS ({:.2} s)",
        start.elapsed().as_secs_f64()
    );
}

#[test]
fn criterion_01_codebook_exactness() {
    let start = Instant::now();
    let mut l = 2usize;
    while l <= 256 {
        let cb = build_hadamard(l).unwrap();
        let mut rng = StreamRng::new(l as u64, &[1]);
        let bits: Vec<i64> = (0..l)
            .map(|_| if rng.next_u64() & 1 == 1 { 1 } else { -1 })
            .collect();
        let aggregate: Vec<i64> = (0..l)
            .map(|k| {
                (0..l)
                    .map(|node| bits[node] * cb.chip(node, k) as i64)
                    .sum()
            })
            .collect();
        for node in 0..l {
            let got = despread_exact(&aggregate, cb.code(node)).unwrap();
            assert_eq!(
                got,
                l as i64 * bits[node],
                "criterion 01: despreading identity broken at L = {l}, node {node}"
            );
        }
        // mutual orthogonality of every code pair, exact integers
        for i in 0..l {
            let agg_i: Vec<i64> = cb.code(i).iter().map(|&c| c as i64).collect();
            for k in 0..l {
                let dot = despread_exact(&agg_i, cb.code(k)).unwrap();
                assert_eq!(
                    dot,
                    if i == k { l as i64 } else { 0 },
                    "criterion 01: rows {i} and {k} not orthogonal at L = {l}"
                );
            }
        }
        l *= 2;
    }
    report("01 (codebook exactness, L = 2..256)", start);
}

#[test]
fn criterion_02_singleton_gain_anchor() {
    let start = Instant::now();
    let layout = place_nodes(16, 100.0, 3).unwrap();
    let ctx = build_gain_context(&layout, wavelength(F_C), 64).unwrap();
    for node in 0..16 {
        let s = NodeSubset::from_indices(&[node], 16).unwrap();
        let d = ctx.directivity(&s).unwrap();
        assert!(
            (d - 1.0).abs() <= 1e-9,
            "criterion 02: node {node} directivity {d} differs from 1"
        );
    }
    report("02 (singleton gain anchor)", start);
}

#[test]
fn criterion_03_gain_linearity_desk_scale() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        l: 32,
        subset_sizes: SizeGrid::Range {
            start: 2,
            step: 2,
            stop: 32,
        },
        subset_samples: 200,
        layout_seed: 7,
        data_seed: 8,
        ..ExperimentConfig::default()
    };
    let rows = run_gain_experiment(&cfg).unwrap();
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.subset_size as f64, r.mean))
        .collect();
    let (slope, intercept) = linear_fit(&pts);
    assert!(
        (0.9..=1.1).contains(&slope),
        "criterion 03: mean-gain slope {slope} outside [0.9, 1.1]"
    );
    assert!(
        intercept.abs() < 2.0,
        "criterion 03: intercept {intercept} not within |2|"
    );
    report("03 (gain linearity, desk scale)", start);
}

#[test]
fn criterion_04_gain_interval_overlap() {
    let start = Instant::now();
    let layout = place_nodes(64, 100.0, 7).unwrap();
    let lambda = wavelength(F_C);
    let order = default_quadrature_order(&layout, lambda);
    let ctx = build_gain_context(&layout, lambda, order).unwrap();
    let stats_31 = gain_statistics(&ctx, 31, 200, 11).unwrap();
    let stats_33 = gain_statistics(&ctx, 33, 200, 11).unwrap();
    assert!(
        stats_31.max > stats_33.min,
        "criterion 04: max gain at size 31 ({}) does not exceed min gain at size 33 ({})",
        stats_31.max,
        stats_33.min
    );
    report("04 (gain-interval overlap at L = 64)", start);
}

#[test]
fn criterion_05_tone_wavelength_insensitivity() {
    let start = Instant::now();
    let layout = place_nodes(128, 100.0, 7).unwrap();
    let lambda_hi = SPEED_OF_LIGHT / (F_C + 64e3);
    let lambda_lo = SPEED_OF_LIGHT / (F_C - 64e3);
    let order = default_quadrature_order(&layout, lambda_lo);
    let ctx_hi = build_gain_context(&layout, lambda_hi, order).unwrap();
    let ctx_lo = build_gain_context(&layout, lambda_lo, order).unwrap();
    let mut rng = StreamRng::new(5, &[]);
    let mut worst = (0.0f64, 0usize, 0usize); // (rel diff, subset #, size)
    for i in 0..20 {
        let size = 1 + rng.next_below(128) as usize;
        let idx: Vec<usize> = rng
            .sample_indices(128, size)
            .into_iter()
            .map(|v| v as usize)
            .collect();
        let subset = NodeSubset::from_indices(&idx, 128).unwrap();
        let d_hi = ctx_hi.directivity(&subset).unwrap();
        let d_lo = ctx_lo.directivity(&subset).unwrap();
        let rel = (d_hi - d_lo).abs() / d_hi;
        if rel > worst.0 {
            worst = (rel, i, size);
        }
    }
    assert!(
        worst.0 < 1e-3,
        "criterion 05: directivity differs by {:.3e} (relative) between the f1/f2 \
         wavelengths for subset {} of size {}; the tolerance 1e-3 is tighter than \
         the physical tone sensitivity at this geometry",
        worst.0,
        worst.1,
        worst.2
    );
    report("05 (tone-wavelength insensitivity)", start);
}

#[test]
fn criterion_06_noise_contract() {
    let start = Instant::now();
    let l = 32usize;
    let params = RadioParams::normalized(0.0).unwrap();
    let sd = params.chip_noise_variance(l).sqrt();
    let n = 1_000_000usize;
    let samples: Vec<f64> = (0..n).map(|q| chip_noise(2024, q, sd)).collect();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let target = 2.0 * l as f64;
    assert!(
        (var - target).abs() / target <= 0.01,
        "criterion 06: sample variance {var} deviates more than 1% from {target}"
    );
    let mut lag1 = 0.0;
    for w in samples.windows(2) {
        lag1 += (w[0] - mean) * (w[1] - mean);
    }
    lag1 /= (n - 1) as f64 * var;
    assert!(
        lag1.abs() < 0.01,
        "criterion 06: lag-1 autocorrelation {lag1} not below 0.01"
    );
    report("06 (noise variance and independence)", start);
}

#[test]
fn criterion_07_linearization_bound() {
    let start = Instant::now();
    let bound = 1.0 - 2.0 * std::f64::consts::SQRT_2 / 3.0;
    for l in [4usize, 16, 64, 128] {
        let (max_err, (a, b)) = linearization_error(l).unwrap();
        assert!(
            max_err <= bound + 1e-12,
            "criterion 07: L = {l} max error {max_err} exceeds bound {bound}"
        );
        if l == 128 {
            assert!(
                (max_err - 0.0572).abs() < 1e-3,
                "criterion 07: L = 128 max error {max_err} not within 1e-3 of 0.0572"
            );
            assert_eq!(
                (a, b),
                (65, 63),
                "criterion 07: maximum not at the most balanced odd split"
            );
        }
    }
    report("07 (linearization error bound)", start);
}

#[test]
fn criterion_08_artificial_vs_analytic_agreement() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        l: 32,
        bits_per_node: 10_000,
        gamma_db_grid: (0..8).map(|k| -10.0 + k as f64).collect(),
        models: vec![GainModelKind::Idealized],
        ..ExperimentConfig::default()
    };
    // grid sanity: analytic BER spans [1e-3, 1e-1]
    for &gdb in &cfg.gamma_db_grid {
        let p = ber_tilde(cfg.l, db_to_linear(gdb));
        assert!(
            (1e-3..=1e-1).contains(&p),
            "criterion 08: grid point {gdb} dB has analytic BER {p} outside [1e-3, 1e-1]"
        );
    }
    let curve = run_ber_experiment(&cfg).unwrap();
    let mut excursions = Vec::new();
    for p in &curve.points {
        let sim = p.artificial.unwrap();
        let ci = 1.96 * (p.analytic_ber * (1.0 - p.analytic_ber) / p.total_bits as f64).sqrt();
        if (sim.ber - p.analytic_ber).abs() > ci {
            excursions.push((p.gamma_db, sim.ber, p.analytic_ber, ci));
        }
    }
    assert!(
        excursions.len() <= 1,
        "criterion 08: {} grid points outside the 95% binomial CI of the analytic BER \
         (allowed 1): {excursions:?}",
        excursions.len()
    );
    report("08 (artificial vs analytic BER agreement)", start);
}

#[test]
fn criterion_09_zero_noise_zero_ber() {
    let start = Instant::now();
    for l in [16usize, 32] {
        let cfg = ExperimentConfig {
            l,
            bits_per_node: 1000,
            gamma_db_grid: vec![0.0],
            models: vec![GainModelKind::Exact],
            noiseless: true,
            quadrature_order: Some(512),
            ..ExperimentConfig::default()
        };
        let curve = run_ber_experiment(&cfg).unwrap();
        let errors = curve.points[0].actual.unwrap().errors;
        assert_eq!(
            errors, 0,
            "criterion 09: L = {l} gain variability alone produced {errors} bit errors"
        );
    }
    report("09 (zero-noise zero-BER, exact gains)", start);
}

#[test]
fn criterion_10_actual_vs_artificial_gap() {
    let start = Instant::now();
    let cfg = ExperimentConfig {
        l: 32,
        bits_per_node: 1000,
        gamma_db_grid: vec![-16.0, -10.0],
        models: vec![GainModelKind::Exact, GainModelKind::Idealized],
        quadrature_order: Some(512),
        ..ExperimentConfig::default()
    };
    let curve = run_ber_experiment(&cfg).unwrap();
    let relgap = |p: &cbsim::experiments::BerPoint| {
        let actual = p.actual.unwrap().ber;
        let artificial = p.artificial.unwrap().ber;
        (actual - artificial).abs() / artificial
    };
    let gap_low = relgap(&curve.points[0]); // -16 dB
    let gap_high = relgap(&curve.points[1]); // -10 dB
    assert!(
        gap_low < gap_high,
        "criterion 10: relative gap {gap_low:.4} at -16 dB is not smaller than \
         {gap_high:.4} at -10 dB"
    );
    report("10 (actual-artificial gap shrinks with SNR)", start);
}

#[test]
fn criterion_11_waveform_oracle_equivalence() {
    let start = Instant::now();
    let l = 8usize;
    let layout = place_nodes(l, 100.0, 77).unwrap();
    let r_ch = 128_000.0;
    let f_c_toy = 32.0 * r_ch;
    let params = RadioParams::new(f_c_toy, r_ch / 2.0, r_ch, 1.7, 1.0, 1.0, 0.0).unwrap();
    let ctx = build_gain_context(&layout, SPEED_OF_LIGHT / f_c_toy, 1024).unwrap();
    let model = GainModel::Exact(&ctx);
    let amp = params.amplitude();
    let mut rng = StreamRng::new(123, &[]);
    let mut scratch = Vec::new();
    for case in 0..100 {
        let members: Vec<bool> = (0..l).map(|_| rng.next_u64() & 1 == 1).collect();
        let (z1, z2) = waveform_oracle(&members, &model, &params, 1024).unwrap();
        let kappa = amp * model.amplification_diff(&members, &mut scratch);
        let rel = ((z1 - z2) - kappa).abs() / kappa.abs().max(amp);
        assert!(
            rel <= 0.02,
            "criterion 11: case {case} correlator difference {} vs kappa {kappa} \
             (relative deviation {rel:.3e})",
            z1 - z2
        );
    }
    report("11 (waveform-oracle equivalence)", start);
}

// keeps the decoder enum referenced so config-related criteria stay honest
// about which receiver they exercise
#[test]
fn acceptance_runs_use_bit_level_decoder() {
    assert_eq!(ExperimentConfig::default().decoder, DecodeScheme::BitLevel);
}
