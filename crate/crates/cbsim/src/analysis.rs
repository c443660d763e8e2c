//! Closed-form analytic quantities: Gaussian Q-function and the
//! approximate per-bit SNR and BER of the bit-level receiver.

/// Upper-tail probability of the standard normal, via the complementary
/// error function: `Q(x) = erfc(x / sqrt(2)) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Approximate per-bit receive SNR `9 L gamma_hat / 16`, with
/// `gamma_hat = E_b P(d) / sigma_N^2` the normalized (no-beamforming) SNR.
/// Independent of node and bit index.
pub fn snr_tilde(l: usize, gamma_hat: f64) -> f64 {
    9.0 * l as f64 * gamma_hat / 16.0
}

/// Closed-form BER approximation `Q(3 sqrt(L gamma_hat) / 4)`;
/// algebraically equal to `q_function(sqrt(snr_tilde(l, gamma_hat)))`.
pub fn ber_tilde(l: usize, gamma_hat: f64) -> f64 {
    q_function(0.75 * (l as f64 * gamma_hat).sqrt())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// One evaluated point of the analytic curves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPoint {
    pub l: usize,
    pub gamma_hat: f64,
    pub snr_tilde: f64,
    pub ber_tilde: f64,
}

impl AnalyticPoint {
    pub fn new(l: usize, gamma_hat: f64) -> Self {
        AnalyticPoint {
            l,
            gamma_hat,
            snr_tilde: snr_tilde(l, gamma_hat),
            ber_tilde: ber_tilde(l, gamma_hat),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::GaussLegendre;
    use crate::rng::StreamRng;

    /// Independent Gaussian-tail oracle: integrates the density over
    /// [x, x+40] in panels (positive integrand, no cancellation), with the
    /// remainder beyond x+40 negligible relative to the value.
    fn q_by_quadrature(x: f64) -> f64 {
        let rule = GaussLegendre::new(160).unwrap();
        let density = |t: f64| (-0.5 * t * t).exp();
        let breaks = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0];
        let mut integral = 0.0;
        for w in breaks.windows(2) {
            integral += rule.integrate(x + w[0], x + w[1], density);
        }
        integral / (2.0 * std::f64::consts::PI).sqrt()
    }

    #[test]
    fn q_at_zero_is_half() {
        assert_eq!(q_function(0.0), 0.5);
    }

    #[test]
    fn q_at_three_matches_frozen_value() {
        let got = q_function(3.0);
        let want = 1.349_898_031_630_094_6e-3;
        assert!(
            ((got - want) / want).abs() < 1e-10,
            "Q(3) = {got:e}, expected {want:e}"
        );
    }

    #[test]
    fn q_reflection_identity() {
        let x = 1.7;
        assert!((q_function(-x) - (1.0 - q_function(x))).abs() < 1e-15);
    }

    #[test]
    fn q_matches_tail_quadrature_oracle() {
        for &x in &[
            0.0, 0.3, 0.5, 1.0, 1.7, 2.0, 3.0, 5.0, 8.0, 12.0, 20.0, 30.0,
        ] {
            let got = q_function(x);
            let want = q_by_quadrature(x);
            assert!(
                ((got - want) / want).abs() < 1e-10,
                "x = {x}: Q = {got:e}, oracle {want:e}"
            );
        }
    }

    #[test]
    fn snr_tilde_values() {
        assert_eq!(snr_tilde(64, 1.0), 36.0);
        assert_eq!(snr_tilde(16, 0.0), 0.0);
        // monotone in both arguments
        assert!(snr_tilde(64, 2.0) > snr_tilde(64, 1.0));
        assert!(snr_tilde(128, 1.0) > snr_tilde(64, 1.0));
    }

    #[test]
    fn ber_tilde_values() {
        // L=64, gamma=0.25: 0.75 * sqrt(16) = 3
        let got = ber_tilde(64, 0.25);
        assert!(((got - 1.3498980316300946e-3) / got).abs() < 1e-10);
        assert_eq!(ber_tilde(32, 0.0), 0.5);
    }

    #[test]
    fn ber_consistent_with_snr() {
        let mut rng = StreamRng::new(1, &[]);
        for _ in 0..20 {
            let l = 1usize << (1 + rng.next_below(7));
            let gamma = 4.0 * rng.next_f64();
            let a = ber_tilde(l, gamma);
            let b = q_function(snr_tilde(l, gamma).sqrt());
            assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        }
    }

    #[test]
    fn ber_strictly_decreasing_in_l() {
        let gamma = 0.2;
        let mut prev = f64::INFINITY;
        for l in [2usize, 4, 8, 16, 32, 64, 128, 256] {
            let b = ber_tilde(l, gamma);
            assert!(b < prev, "L = {l}: {b} !< {prev}");
            prev = b;
        }
    }

    #[test]
    fn analytic_point_bundles_consistent_values() {
        let p = AnalyticPoint::new(64, 0.25);
        assert_eq!(p.snr_tilde, 9.0);
        assert!(p.ber_tilde <= 0.5 && p.ber_tilde >= 0.0);
        assert!((p.ber_tilde - q_function(3.0)).abs() < 1e-15);
    }

    #[test]
    fn db_conversions_round_trip() {
        for db in [-20.0, -3.0, 0.0, 10.0] {
            let lin = db_to_linear(db);
            assert!((linear_to_db(lin) - db).abs() < 1e-12);
        }
        assert!((db_to_linear(3.0) - 1.9952623149688795).abs() < 1e-12);
    }
}
