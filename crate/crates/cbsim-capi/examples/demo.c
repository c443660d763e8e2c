/* Minimal C consumer of the cbsim C ABI.
 *
 * Build (from the repository root, after `cargo build -p cbsim-capi`):
 *
 *   cc crates/cbsim-capi/examples/demo.c \
 *      -Icrates/cbsim-capi/include \
 *      -Ltarget/debug -lcbsim_capi -lm -lpthread -ldl \
 *      -o cbsim_demo
 *   ./cbsim_demo
 */

#include <stdio.h>
#include <stdlib.h>

#include "cbsim.h"

static void check(CbStatus status, const char *what) {
  if (status != CB_STATUS_OK) {
    fprintf(stderr, "%s failed: %s\n", what, cb_status_message(status));
    exit(1);
  }
}

int main(void) {
  printf("cbsim %s\n", cb_version());

  CbLayout *layout = NULL;
  check(cb_layout_place(16, 100.0, 7, &layout), "cb_layout_place");
  printf("placed %llu nodes\n", (unsigned long long)cb_layout_len(layout));

  CbGainContext *ctx = NULL;
  double wavelength = 299792458.0 / 2.45e9;
  check(cb_gain_context_new(layout, wavelength, 0, &ctx), "cb_gain_context_new");

  uint64_t one[] = {0};
  double d = 0.0;
  check(cb_directivity(ctx, one, 1, &d), "cb_directivity");
  printf("single-node directivity: %.12f\n", d);

  double min, mean, max;
  check(cb_gain_statistics(ctx, 8, 100, 3, &min, &mean, &max),
        "cb_gain_statistics");
  printf("gain over size-8 subsets: min %.3f mean %.3f max %.3f\n", min, mean,
         max);

  printf("analytic BER at L=64, gamma=0.25: %.6e\n", cb_ber_tilde(64, 0.25));

  double max_err;
  uint64_t a, b;
  check(cb_linearization_error(128, &max_err, &a, &b),
        "cb_linearization_error");
  printf("linearization error at L=128: %.6f at (%llu, %llu)\n", max_err,
         (unsigned long long)a, (unsigned long long)b);

  CbBerPoint point;
  check(cb_ber_sweep_point(16, 200, -8.0, 64, 1, 2, 3, CB_MODEL_IDEALIZED,
                           CB_DECODER_BIT_LEVEL, 0, &point),
        "cb_ber_sweep_point");
  printf("BER at -8 dB (idealized): %.4e (analytic %.4e)\n",
         point.artificial_ber, point.analytic_ber);

  cb_gain_context_free(ctx);
  cb_layout_free(layout);
  printf("ok\n");
  return 0;
}
