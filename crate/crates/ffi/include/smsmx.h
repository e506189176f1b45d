#ifndef SMSMX_H
#define SMSMX_H

/* Generated by cbindgen from crates/ffi/src. Do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define SMSMX_SCHEME_SM_SMX 0

#define SMSMX_SCHEME_PURE_SM 1

#define SMSMX_SCHEME_PURE_SMX 2

#define SMSMX_DETECTOR_ML 0

#define SMSMX_DETECTOR_TWO_STAGE 1

#define SMSMX_DETECTOR_SM_MRRC 2

// Result code of every fallible call.
typedef enum SmsmxStatus {
  SMSMX_STATUS_OK = 0,
  SMSMX_STATUS_NULL_POINTER = 1,
  SMSMX_STATUS_INVALID_ARGUMENT = 2,
  SMSMX_STATUS_INVALID_CONFIG = 3,
  SMSMX_STATUS_UNSUPPORTED_ORDER = 4,
  SMSMX_STATUS_LENGTH_MISMATCH = 5,
  SMSMX_STATUS_GROUP_OUT_OF_RANGE = 6,
  SMSMX_STATUS_CAP_EXCEEDED = 7,
  SMSMX_STATUS_DIMENSION_MISMATCH = 8,
  SMSMX_STATUS_RANK_DEFICIENT = 9,
  SMSMX_STATUS_SCHEME_MISMATCH = 10,
  SMSMX_STATUS_PARSE = 11,
  SMSMX_STATUS_IO = 12,
  SMSMX_STATUS_PANIC = 13,
} SmsmxStatus;

// Opaque scheme configuration plus its constellation.
typedef struct SmsmxLink SmsmxLink;

// Opaque parsed run configuration.
typedef struct SmsmxRunSpec SmsmxRunSpec;

typedef struct SmsmxComplex {
  double re;
  double im;
} SmsmxComplex;

// Statistics of one simulated SNR point.
typedef struct SmsmxErrorRecord {
  uint64_t frames;
  uint64_t bit_errors;
  uint64_t frame_errors;
  uint64_t group_errors;
  uint64_t symbol_errors;
  uint32_t eta;
  double ber;
  double fer;
  double elapsed_seconds;
} SmsmxErrorRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or NULL if none.
//
// The pointer stays valid until the next failing call on the same thread.
const char *smsmx_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *smsmx_version(void);

// Creates a link handle for `n` transmit antennas, `k` RF chains, `m`-QAM
// and `nr` receive antennas.
//
// # Safety
// `out` must be a valid pointer to writable storage for one handle.
enum SmsmxStatus smsmx_link_new(uint32_t n,
                                uint32_t k,
                                uint32_t m,
                                uint32_t nr,
                                uint32_t scheme,
                                struct SmsmxLink **out);

// Releases a link handle. NULL is ignored.
//
// # Safety
// `link` must come from `smsmx_link_new` and not have been freed.
void smsmx_link_free(struct SmsmxLink *link);

// Bits per channel use, or 0 for a NULL handle.
//
// # Safety
// `link` must be NULL or a live handle.
uint32_t smsmx_link_bits_per_frame(const struct SmsmxLink *link);

// Active antennas (RF chains) per channel use, or 0 for a NULL handle.
//
// # Safety
// `link` must be NULL or a live handle.
uint32_t smsmx_link_rf_chains(const struct SmsmxLink *link);

// Transmit antenna count, or 0 for a NULL handle.
//
// # Safety
// `link` must be NULL or a live handle.
uint32_t smsmx_link_tx_antennas(const struct SmsmxLink *link);

// Receive antenna count, or 0 for a NULL handle.
//
// # Safety
// `link` must be NULL or a live handle.
uint32_t smsmx_link_rx_antennas(const struct SmsmxLink *link);

// Encodes one frame of `bits_len` bits into a dense transmit vector of
// `out_len` (= N) entries.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum SmsmxStatus smsmx_link_encode(const struct SmsmxLink *link,
                                   const uint8_t *bits,
                                   size_t bits_len,
                                   struct SmsmxComplex *out,
                                   size_t out_len);

// Detects one frame from the received vector `y` (Nr entries) and channel
// `h` (Nr x N, row-major). Writes the frame bits, the group index and the
// residual metric; `out_group` and `out_metric` may be NULL.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum SmsmxStatus smsmx_link_detect(const struct SmsmxLink *link,
                                   uint32_t detector,
                                   const struct SmsmxComplex *y,
                                   size_t y_len,
                                   const struct SmsmxComplex *h,
                                   size_t h_len,
                                   uint8_t *out_bits,
                                   size_t bits_len,
                                   uint32_t *out_group,
                                   double *out_metric);

// Simulates one SNR point over Rayleigh fading. `snr_db` may be +INFINITY
// for the noiseless mode; `target_bit_errors = 0` disables early stopping.
//
// # Safety
// `link` must be a live handle and `out` valid for one record.
enum SmsmxStatus smsmx_simulate_point(const struct SmsmxLink *link,
                                      uint32_t detector,
                                      double snr_db,
                                      uint64_t master_seed,
                                      uint64_t max_frames,
                                      uint64_t target_bit_errors,
                                      struct SmsmxErrorRecord *out);

// Parses and validates a configuration document.
//
// # Safety
// `text` must be a NUL-terminated UTF-8 string; `out` valid for one handle.
enum SmsmxStatus smsmx_run_spec_parse(const char *text, struct SmsmxRunSpec **out);

// Releases a run spec handle. NULL is ignored.
//
// # Safety
// `spec` must come from `smsmx_run_spec_parse` and not have been freed.
void smsmx_run_spec_free(struct SmsmxRunSpec *spec);

// Number of SNR points in the spec's grid, or 0 for NULL.
//
// # Safety
// `spec` must be NULL or a live handle.
size_t smsmx_run_spec_num_points(const struct SmsmxRunSpec *spec);

// Creates a link handle matching the spec's scheme parameters.
//
// # Safety
// `spec` must be a live handle; `out` valid for one handle.
enum SmsmxStatus smsmx_run_spec_link(const struct SmsmxRunSpec *spec, struct SmsmxLink **out);

// Runs the full sweep and writes the CSV to `path`. Rows of points that
// completed before a failure are still written.
//
// # Safety
// `spec` must be a live handle; `path` a NUL-terminated UTF-8 string.
enum SmsmxStatus smsmx_run_spec_write_csv(const struct SmsmxRunSpec *spec, const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SMSMX_H */
