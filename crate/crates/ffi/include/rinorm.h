#ifndef RINORM_H
#define RINORM_H

/* Generated by cbindgen from rinorm-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a C API call.
 */
typedef enum RnStatus {
  RN_STATUS_OK = 0,
  RN_STATUS_NULL_POINTER = 1,
  RN_STATUS_UTF8 = 2,
  RN_STATUS_PARSE = 3,
  RN_STATUS_INVALID_ARGUMENT = 4,
  RN_STATUS_NUMERIC = 5,
} RnStatus;

/**
 * A disjunctification of a family (opaque).
 */
typedef struct RnDisjoint RnDisjoint;

/**
 * A family of distributions (opaque).
 */
typedef struct RnFamily RnFamily;

/**
 * A rearrangement-invariant function norm (opaque).
 */
typedef struct RnRiNorm RnRiNorm;

/**
 * A symmetric sequence norm (opaque).
 */
typedef struct RnSeqNorm RnSeqNorm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread. Valid until the
 * next failing call from the same thread.
 */
const char *rn_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rn_version(void);

/**
 * Parse a JSON array of distribution literals, e.g.
 * `[{"kind":"gaussian","sigma":1.0},{"kind":"uniform","b":1.0}]`.
 */
enum RnStatus rn_family_parse_json(const char *json, struct RnFamily **out);

size_t rn_family_len(const struct RnFamily *family);

void rn_family_free(struct RnFamily *family);

/**
 * P(|X_index| > t).
 */
enum RnStatus rn_family_survival(const struct RnFamily *family,
                                 size_t index,
                                 double t,
                                 double *out);

/**
 * Q(u) = inf{t : S(t) <= u} for u in (0,1).
 */
enum RnStatus rn_family_quantile(const struct RnFamily *family,
                                 size_t index,
                                 double u,
                                 double *out);

/**
 * Fill `out[0..count]` with seeded inverse-transform draws of member
 * `index`. Identical (seed, stream) reproduces the same values.
 */
enum RnStatus rn_family_sample(const struct RnFamily *family,
                               size_t index,
                               uint64_t seed,
                               uint64_t stream,
                               size_t count,
                               double *out);

/**
 * Parse a function-norm literal, e.g. `{"ri":"lorentz","p":2,"q":1}`.
 */
enum RnStatus rn_ri_norm_parse_json(const char *json, struct RnRiNorm **out);

void rn_ri_norm_free(struct RnRiNorm *norm);

/**
 * Parse a sequence-norm literal, e.g. `{"seq":"top_m","m":4}`.
 */
enum RnStatus rn_seq_norm_parse_json(const char *json, struct RnSeqNorm **out);

void rn_seq_norm_free(struct RnSeqNorm *norm);

/**
 * Sequence norm of `values[0..len]` (empty input gives 0).
 */
enum RnStatus rn_seq_norm_eval(const struct RnSeqNorm *norm,
                               const double *values,
                               size_t len,
                               double *out);

/**
 * Build the disjunctification Y of the family on [0, n].
 */
enum RnStatus rn_disjoint_new(const struct RnFamily *family, struct RnDisjoint **out);

void rn_disjoint_free(struct RnDisjoint *d);

/**
 * Y(t) for t in (0, n].
 */
enum RnStatus rn_disjoint_eval(const struct RnDisjoint *d, double t, double *out);

/**
 * \int_a^b Y for 0 <= a < b <= n.
 */
enum RnStatus rn_disjoint_integral(const struct RnDisjoint *d, double a, double b, double *out);

/**
 * Fill `out[0..len]` with (Y(1), ..., Y(len)); `len` must equal the
 * family size.
 */
enum RnStatus rn_disjoint_at_integers(const struct RnDisjoint *d, double *out, size_t len);

/**
 * The deterministic disjoint-sum side: M-norm of Y on [0,1] plus N-norm
 * of the integer samples.
 */
enum RnStatus rn_rhs_eval(const struct RnDisjoint *d,
                          const struct RnSeqNorm *seq,
                          const struct RnRiNorm *ri,
                          double *out);

/**
 * Seeded Monte Carlo estimate of the M-norm of the N-norm of the family.
 * Writes the estimate and its across-batch standard error.
 */
enum RnStatus rn_estimate_lhs(const struct RnFamily *family,
                              const struct RnSeqNorm *seq,
                              const struct RnRiNorm *ri,
                              size_t samples_per_batch,
                              size_t batches,
                              uint64_t seed,
                              double *out_value,
                              double *out_stderr);

/**
 * Run an experiment from a JSON config string, writing results.csv and
 * summary.json into `out_dir`. Returns the CLI exit-code contract:
 * 0 all pass, 1 numeric failure, 2 config error.
 */
int32_t rn_run_experiment_json(const char *config_json, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RINORM_H */
