//! Counter-based random number streams for reproducible parallel Monte Carlo.
//!
//! Every consumer derives its own stream from a root seed plus a list of
//! integer keys (e.g. `(noise_seed, snr_index, bit_index)`). Draws are pure
//! functions of `(stream, counter)`, so work items may be evaluated in any
//! order — or concurrently — and still produce bit-identical results.
//!
//! The generator is the splitmix64 finalizer applied to a Weyl sequence,
//! which supports O(1) random access by counter and has no shared state.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// splitmix64 finalizer: a strong 64-bit mixing permutation.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A deterministic random stream identified by `(seed, keys...)`.
#[derive(Debug, Clone)]
pub struct StreamRng {
    base: u64,
    counter: u64,
}

impl StreamRng {
    /// Derives the stream for the given seed and key path.
    pub fn new(seed: u64, keys: &[u64]) -> Self {
        let mut base = mix(seed ^ GOLDEN_GAMMA);
        for &k in keys {
            base = mix(base.wrapping_add(mix(k ^ GOLDEN_GAMMA)));
        }
        StreamRng { base, counter: 0 }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let c = self.counter;
        self.counter += 1;
        mix(self
            .base
            .wrapping_add(c.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1]; safe as a logarithm argument.
    #[inline]
    pub fn next_open_f64(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n) by rejection (unbiased).
    pub fn next_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }

    /// One standard Gaussian pair via Box-Muller.
    pub fn next_gaussian_pair(&mut self) -> (f64, f64) {
        let u1 = self.next_open_f64();
        let u2 = self.next_f64();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        (radius * c, radius * s)
    }

    /// Fills `out` with N(0, sigma^2) samples.
    pub fn fill_gaussian(&mut self, out: &mut [f64], sigma: f64) {
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = self.next_gaussian_pair();
            pair[0] = sigma * a;
            pair[1] = sigma * b;
        }
        if let [last] = chunks.into_remainder() {
            *last = sigma * self.next_gaussian_pair().0;
        }
    }

    /// Samples `k` distinct indices from `0..n`, sorted ascending
    /// (partial Fisher-Yates on an index table).
    pub fn sample_indices(&mut self, n: usize, k: usize) -> Vec<u32> {
        assert!(k <= n);
        let mut pool: Vec<u32> = (0..n as u32).collect();
        for i in 0..k {
            let j = i + self.next_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        let mut picked = pool[..k].to_vec();
        picked.sort_unstable();
        picked
    }
}
