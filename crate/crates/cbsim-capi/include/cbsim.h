/* C ABI for the cbsim cooperative-beamforming link simulator.
 *
 * Conventions: opaque handles from the _place/_new constructors must be
 * released with the matching _free; every fallible call returns a
 * CbStatus and writes results through out-pointers. All entry points are
 * panic-safe: internal failures surface as CB_STATUS_INTERNAL.
 *
 * Kept in sync by hand with crates/cbsim-capi/src/lib.rs.
 */

#ifndef CBSIM_H
#define CBSIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum CbStatus {
  CB_STATUS_OK = 0,
  CB_STATUS_NULL_POINTER = 1,
  CB_STATUS_INVALID_PARAMETER = 2,
  CB_STATUS_RUNTIME = 3,
  CB_STATUS_INTERNAL = 4,
} CbStatus;

/* Opaque handles. */
typedef struct CbLayout CbLayout;
typedef struct CbGainContext CbGainContext;

/* One simulated BER point; NaN marks models that were not run. */
typedef struct CbBerPoint {
  double gamma_db;
  double actual_ber;
  double actual_ci;
  uint64_t actual_errors;
  double artificial_ber;
  double artificial_ci;
  uint64_t artificial_errors;
  double analytic_ber;
  uint64_t total_bits;
} CbBerPoint;

/* Gain models for cb_ber_sweep_point's models_mask (OR-able). */
#define CB_MODEL_EXACT 1
#define CB_MODEL_IDEALIZED 2

/* Decoders for cb_ber_sweep_point. */
#define CB_DECODER_BIT_LEVEL 0
#define CB_DECODER_CHIP_LEVEL 1
#define CB_DECODER_POWER_2_3 2

/* Library version as a static NUL-terminated string. */
const char *cb_version(void);

/* Static description of a status code. */
const char *cb_status_message(CbStatus status);

/* Places l nodes uniformly on a disk of radius r_max (deterministic per
 * seed). On success writes a new handle to *out. */
CbStatus cb_layout_place(uint64_t l, double r_max, uint64_t seed,
                         CbLayout **out);

/* Overrides the receiver elevation angle (radians) and distance (m). */
CbStatus cb_layout_set_geometry(CbLayout *layout, double theta0, double d);

/* Number of nodes; 0 for a null handle. */
uint64_t cb_layout_len(const CbLayout *layout);

/* Reads one node's polar coordinates. */
CbStatus cb_layout_node(const CbLayout *layout, uint64_t idx, double *r_out,
                        double *phi_out);

void cb_layout_free(CbLayout *layout);

/* Builds the quadrature phase table for a layout at the given wavelength.
 * quadrature_order of 0 selects the bandwidth-scaled default. */
CbStatus cb_gain_context_new(const CbLayout *layout, double wavelength,
                             uint64_t quadrature_order, CbGainContext **out);

void cb_gain_context_free(CbGainContext *ctx);

/* Directivity of the node subset (errors on an empty subset). */
CbStatus cb_directivity(const CbGainContext *ctx, const uint64_t *indices,
                        uint64_t n, double *out);

/* Beamforming power gain of the node subset (efficiency 1). */
CbStatus cb_gain(const CbGainContext *ctx, const uint64_t *indices,
                 uint64_t n, double *out);

/* Coherent amplitude multiplier sqrt(gain) * |S|; 0 for an empty subset. */
CbStatus cb_amplification(const CbGainContext *ctx, const uint64_t *indices,
                          uint64_t n, double *out);

/* Min/mean/max gain over n_samples random subsets of the given size. */
CbStatus cb_gain_statistics(const CbGainContext *ctx, uint64_t subset_size,
                            uint64_t n_samples, uint64_t seed, double *min_out,
                            double *mean_out, double *max_out);

/* Gaussian upper-tail probability Q(x). */
double cb_q_function(double x);

/* Approximate per-bit SNR 9 L gamma_hat / 16. */
double cb_snr_tilde(uint64_t l, double gamma_hat);

/* Closed-form BER approximation Q(3 sqrt(L gamma_hat) / 4). */
double cb_ber_tilde(uint64_t l, double gamma_hat);

/* Maximum relative linearization error over all splits a + b = l, and the
 * split attaining it. */
CbStatus cb_linearization_error(uint64_t l, double *max_out, uint64_t *a_out,
                                uint64_t *b_out);

/* Simulates one normalized-SNR point of the BER sweep with the paper's
 * radio constants. models_mask ORs CB_MODEL_* flags; quadrature_order of 0
 * selects the desk-scale default; noiseless nonzero disables AWGN. */
CbStatus cb_ber_sweep_point(uint64_t l, uint64_t bits_per_node,
                            double gamma_db, uint64_t quadrature_order,
                            uint64_t layout_seed, uint64_t data_seed,
                            uint64_t noise_seed, int models_mask, int decoder,
                            int noiseless, CbBerPoint *out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* CBSIM_H */
