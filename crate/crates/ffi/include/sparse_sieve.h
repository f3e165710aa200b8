#ifndef SPARSE_SIEVE_H
#define SPARSE_SIEVE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible call.
typedef enum SsvStatus {
  SSV_STATUS_OK = 0,
  // A required pointer argument was null.
  SSV_STATUS_ERR_NULL = 1,
  // A string argument was not valid UTF-8.
  SSV_STATUS_ERR_UTF8 = 2,
  SSV_STATUS_ERR_DOMAIN = 3,
  SSV_STATUS_ERR_PRECONDITION = 4,
  SSV_STATUS_ERR_VALIDATION = 5,
  SSV_STATUS_ERR_RANGE = 6,
  SSV_STATUS_ERR_CAPACITY = 7,
  SSV_STATUS_ERR_PRECISION = 8,
  SSV_STATUS_ERR_IO = 9,
  // An index was out of bounds.
  SSV_STATUS_ERR_INDEX = 10,
  // A Rust panic was caught at the boundary.
  SSV_STATUS_ERR_PANIC = 11,
} SsvStatus;

// Error terms over a dyadic window of Piatetski-Shapiro moduli.
typedef struct SsvBvReport SsvBvReport;

// A table of primes and prime powers up to some `x_max`.
typedef struct SsvPrimeTable SsvPrimeTable;

// A moduli sequence.
typedef struct SsvSequence SsvSequence;

typedef struct SsvEnergy {
  uint64_t n;
  uint64_t e_plus;
  uint64_t e_star;
  // Maximizing nonzero shift; meaningful only when `has_h_star` is 1.
  int64_t h_star;
  uint8_t has_h_star;
} SsvEnergy;

typedef struct SsvSieveResult {
  double total;
  double norm_sq;
  double ratio;
} SsvSieveResult;

typedef struct SsvSieveConstant {
  double delta_star_lower;
  double certificate;
  uint64_t iterations;
  uint64_t points;
  uint8_t converged;
  uint8_t restarted;
} SsvSieveConstant;

// Crossover points; a NaN field means the crossing does not exist.
typedef struct SsvCrossovers {
  double lambda;
  double mu;
  double sigma;
  double tau;
  uint8_t mu_capped;
  uint8_t window_nonempty;
} SsvCrossovers;

typedef struct SsvBvRow {
  uint64_t q;
  uint64_t phi_q;
  uint64_t a_star;
  double e;
  double abs_e;
} SsvBvRow;

typedef struct SsvBvSummary {
  uint64_t x;
  uint64_t r;
  uint64_t window_size;
  double m_alpha;
  double rho;
  double bt_max;
} SsvBvSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty after a success.
// The pointer stays valid until the next call on this thread.
const char *ssv_last_error(void);

// Library version as a static NUL-terminated string.
const char *ssv_version(void);

// First `q` values of `j^k`.
enum SsvStatus ssv_sequence_power(uint32_t k, uint64_t q, struct SsvSequence **out_seq);

// First `q` values of the integer polynomial with `coeffs[0..len]`, constant term first.
//
// # Safety
// `coeffs` must point to `len` readable values.
enum SsvStatus ssv_sequence_polynomial(const int64_t *coeffs,
                                       size_t len,
                                       uint64_t q,
                                       struct SsvSequence **out_seq);

// `⌊j^α⌋` for `j = 1..jmax`; `alpha` is decimal or `p/q` text.
//
// # Safety
// `alpha` must be a NUL-terminated string.
enum SsvStatus ssv_sequence_ps(const char *alpha, uint64_t jmax, struct SsvSequence **out_seq);

// A strictly increasing sequence of positive moduli given explicitly.
//
// # Safety
// `values` must point to `len` readable values.
enum SsvStatus ssv_sequence_explicit(const uint64_t *values,
                                     size_t len,
                                     struct SsvSequence **out_seq);

// # Safety
// `seq` must be null or a handle from an `ssv_sequence_*` constructor not yet freed.
void ssv_sequence_free(struct SsvSequence *seq);

// Number of terms; 0 for a null handle.
//
// # Safety
// `seq` must be null or a live handle.
size_t ssv_sequence_len(const struct SsvSequence *seq);

// Term `m_j` for `1 <= j <= len`.
//
// # Safety
// `seq` must be a live handle and `value` writable.
enum SsvStatus ssv_sequence_get(const struct SsvSequence *seq, size_t j, uint64_t *value);

// Additive energy `E⁺` and `E⁺_⋆ = max_{h≠0} E⁺_h` of a set of integers.
//
// # Safety
// `values` must point to `len` readable values and `result` be writable.
enum SsvStatus ssv_energy(const int64_t *values, size_t len, struct SsvEnergy *result);

// `Σ_{j≤q} Σ_{a mod m_j, (a,m_j)=1} |Σ_n a_n e(an/m_j)|²` for coefficients on `n = offset+1..offset+len`.
//
// # Safety
// `re` and `im` must point to `len` readable values and `result` be writable.
enum SsvStatus ssv_sieve_sum(const struct SsvSequence *seq,
                             size_t q,
                             const double *re,
                             const double *im,
                             size_t len,
                             int64_t offset,
                             struct SsvSieveResult *result);

// Certified lower estimate of the optimal large sieve constant by power iteration.
//
// # Safety
// `seq` must be a live handle and `result` writable.
enum SsvStatus ssv_sieve_constant(const struct SsvSequence *seq,
                                  size_t q,
                                  size_t n,
                                  int64_t offset,
                                  double tol,
                                  size_t max_iter,
                                  uint64_t seed,
                                  struct SsvSieveConstant *result);

// Exponent of `Q` in the bound named `bound` for degree `k` at `N = Q^ν`.
//
// # Safety
// `bound` must be a NUL-terminated string and `exponent` writable.
enum SsvStatus ssv_delta_exponent(const char *bound, uint32_t k, double nu, double *exponent);

// Crossover points of the exponent bounds for degree `k`.
//
// # Safety
// `result` must be writable.
enum SsvStatus ssv_crossovers(uint32_t k, struct SsvCrossovers *result);

// Level function `Φ(α)`.
//
// # Safety
// `value` must be writable.
enum SsvStatus ssv_phi_alpha(double alpha, double *value);

// Sieves primes and prime powers up to `x`.
//
// # Safety
// `out_table` must be writable.
enum SsvStatus ssv_prime_table_build(uint64_t x, struct SsvPrimeTable **out_table);

// # Safety
// `table` must be null or a live handle.
void ssv_prime_table_free(struct SsvPrimeTable *table);

// `π(x)` for `x` up to the table's limit.
//
// # Safety
// `table` must be a live handle and `count` writable.
enum SsvStatus ssv_prime_count(const struct SsvPrimeTable *table, uint64_t x, uint64_t *count);

// Worst-residue error terms for every Piatetski-Shapiro modulus in `[r, 2r]`.
//
// # Safety
// `table` must be a live handle, `alpha` a NUL-terminated string and `out_report` writable.
enum SsvStatus ssv_bv_sum(const struct SsvPrimeTable *table,
                          const char *alpha,
                          uint64_t x,
                          uint64_t r,
                          struct SsvBvReport **out_report);

// # Safety
// `report` must be null or a live handle.
void ssv_bv_report_free(struct SsvBvReport *report);

// Number of rows (moduli in the window); 0 for a null handle.
//
// # Safety
// `report` must be null or a live handle.
size_t ssv_bv_report_len(const struct SsvBvReport *report);

// Row `i` for `0 <= i < len`.
//
// # Safety
// `report` must be a live handle and `row` writable.
enum SsvStatus ssv_bv_report_row(const struct SsvBvReport *report, size_t i, struct SsvBvRow *row);

// # Safety
// `report` must be a live handle and `summary` writable.
enum SsvStatus ssv_bv_report_summary(const struct SsvBvReport *report,
                                     struct SsvBvSummary *summary);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* SPARSE_SIEVE_H */
