//! Link-level Monte Carlo simulator for individual-data cooperative
//! beamforming in wireless sensor networks over DSSS/BFSK.
//!
//! A set of `L` sensor nodes on a disk spread their individual bit streams
//! with Walsh-Hadamard codes and BFSK-modulate the chips onto two shared
//! tones, so at any instant the network partitions into two co-phased
//! transmitting subsets. The crate models the per-chip decision variables
//! at the fusion center under a selectable beamforming-gain model, decodes
//! them back to bits, and reproduces the gain-statistics and BER-vs-SNR
//! experiments along with the closed-form BER approximation.
//!
//! Modules follow the processing chain:
//!
//! * [`geometry`] - node placement and the spatial constants
//! * [`codebook`] - Walsh-Hadamard spreading and exact despreading
//! * [`quad`] - Gauss-Legendre quadrature backing the gain integral
//! * [`beamform`] - subset directivity/gain/amplification
//! * [`channel`] - chip partitions, path loss, noisy decision variables,
//!   and the waveform-level validation oracle
//! * [`decode`] - bit-level, chip-level and power-2/3 decoding
//! * [`analysis`] - Q-function and the closed-form SNR/BER approximations
//! * [`experiments`] - reproducible gain-statistics and BER-sweep runs
//! * [`cli`] - the `cbsim` command-line front end
//!
//! End-to-end at toy scale:
//!
//! ```
//! use cbsim::beamform::build_gain_context;
//! use cbsim::channel::{kappa_sequence, partition_chips, GainModel, RadioParams};
//! use cbsim::codebook::{build_hadamard, BitStream};
//! use cbsim::decode::bit_level_decode;
//! use cbsim::geometry::place_nodes;
//!
//! let l = 8;
//! let layout = place_nodes(l, 100.0, 7).unwrap();
//! let ctx = build_gain_context(&layout, cbsim::wavelength(2.45e9), 512).unwrap();
//! let codebook = build_hadamard(l).unwrap();
//!
//! // every node sends its own two bits
//! let bits: Vec<BitStream> = (0..l)
//!     .map(|node| BitStream::from_binary(&[1, (node % 2) as u8], node).unwrap())
//!     .collect();
//! let partition = partition_chips(&codebook, &bits).unwrap();
//!
//! // noiseless channel with quadrature-exact beamforming gains
//! let params = RadioParams::normalized_noiseless(1.0).unwrap();
//! let kappas = kappa_sequence(&partition, &GainModel::Exact(&ctx), &params, 0);
//!
//! let decoded = bit_level_decode(&kappas, &codebook).unwrap();
//! for node in 0..l {
//!     assert_eq!(decoded.hard_bits(node), bits[node].bits());
//! }
//! ```

pub mod analysis;
pub mod beamform;
pub mod channel;
pub mod cli;
pub mod codebook;
pub mod decode;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Free-space wavelength for a carrier frequency in Hz.
pub fn wavelength(f_hz: f64) -> f64 {
    SPEED_OF_LIGHT / f_hz
}
