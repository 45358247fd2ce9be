/* C API for the compclass compressive-classification toolkit. */

#ifndef COMPCLASS_H
#define COMPCLASS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Classifier selector for `cc_classify`.
 */
typedef enum CcClassifier {
  CcClassifier_Correlation = 0,
  CcClassifier_MatchedFilter = 1,
} CcClassifier;

/**
 * Status codes returned by every fallible function.
 */
typedef enum CcStatus {
  CcStatus_Ok = 0,
  CcStatus_NullPointer = 1,
  CcStatus_InvalidArgument = 2,
  CcStatus_RankDeficient = 3,
  CcStatus_Infeasible = 4,
  CcStatus_DegenerateDifference = 5,
  CcStatus_ParseError = 6,
  CcStatus_IoError = 7,
} CcStatus;

/**
 * Opaque measurement-matrix handle.
 */
typedef struct CcMatrix CcMatrix;

/**
 * Tightness / equi-norm certificate of a matrix.
 *
 * `frame_constant_c` is NaN when the matrix is not tight and
 * `column_norm_psi` is NaN when it is not equi-norm.
 */
typedef struct CcCertificate {
  bool is_tight;
  bool is_equinorm;
  double frame_constant_c;
  double column_norm_psi;
  double tightness_residual;
} CcCertificate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the message from the last failing call on this thread into
 * `buffer` (NUL-terminated, truncated to `capacity`). Returns the full
 * message length in bytes, excluding the NUL.
 *
 * # Safety
 * `buffer` must point to `capacity` writable bytes, or be null (in which
 * case only the length is returned).
 */
size_t cc_last_error_message(char *buffer, size_t capacity);

/**
 * Builds an `n x cols` matrix from a row-major buffer of `n * cols`
 * doubles.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles and `out` to a
 * writable handle slot.
 */
enum CcStatus cc_matrix_from_data(size_t rows,
                                  size_t cols,
                                  const double *data,
                                  struct CcMatrix **out);

/**
 * Draws an `n x cols` matrix with i.i.d. standard Gaussian entries.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum CcStatus cc_matrix_generate_gaussian(size_t rows,
                                          size_t cols,
                                          uint64_t seed,
                                          struct CcMatrix **out);

/**
 * Reads a matrix file (`n N` header followed by rows).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable slot.
 */
enum CcStatus cc_matrix_read(const char *path, struct CcMatrix **out);

/**
 * Writes the matrix in the same text format `cc_matrix_read` accepts.
 *
 * # Safety
 * `handle` must be a live handle and `path` a NUL-terminated string.
 */
enum CcStatus cc_matrix_write(const struct CcMatrix *handle, const char *path);

/**
 * Number of rows, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t cc_matrix_rows(const struct CcMatrix *handle);

/**
 * Number of columns, or 0 for a null handle.
 *
 * # Safety
 * `handle` must be null or a live handle.
 */
size_t cc_matrix_cols(const struct CcMatrix *handle);

/**
 * Copies the entries row-major into `data` (`rows * cols` doubles).
 *
 * # Safety
 * `data` must point to `rows * cols` writable doubles.
 */
enum CcStatus cc_matrix_copy_data(const struct CcMatrix *handle, double *data);

/**
 * Row-orthogonalizes the matrix so the output satisfies
 * `Phi * Phi^T = c * I`, preserving the row space.
 *
 * # Safety
 * `handle` must be a live handle and `out` a writable slot.
 */
enum CcStatus cc_matrix_tighten(const struct CcMatrix *handle, double c, struct CcMatrix **out);

/**
 * Fills `cert` with the tightness / equi-norm certificate.
 *
 * # Safety
 * `handle` must be a live handle and `cert` a writable certificate.
 */
enum CcStatus cc_matrix_certify(const struct CcMatrix *handle, struct CcCertificate *cert);

/**
 * Releases a handle. Null is a no-op.
 *
 * # Safety
 * `handle` must be null or a pointer returned by this library that has
 * not been freed.
 */
void cc_matrix_free(struct CcMatrix *handle);

/**
 * Gaussian tail probability `Q(x) = P(Z > x)`.
 */
double cc_q_function(double x);

/**
 * Separation ratio `||Phi d||^2 / ||Phi^T Phi d||` for `d = s1 - s2`.
 *
 * # Safety
 * `s1` and `s2` must point to `len` readable doubles each; `out` must be
 * writable.
 */
enum CcStatus cc_separation_ratio(const struct CcMatrix *handle,
                                  const double *s1,
                                  const double *s2,
                                  size_t len,
                                  double *out);

/**
 * Exact 2-ary false-classification probability `Q(ratio / (2 sigma))`.
 *
 * # Safety
 * Same buffer requirements as `cc_separation_ratio`.
 */
enum CcStatus cc_error_probability_2ary(const struct CcMatrix *handle,
                                        const double *s1,
                                        const double *s2,
                                        size_t len,
                                        double sigma,
                                        double *out);

/**
 * Classifies a measurement `y` (length `rows`) against `m` hypothesis
 * signals stored contiguously in `signals` (`m * len` doubles, one
 * signal after another). Writes the decided 0-based index to `out`.
 *
 * The hypotheses must have disjoint-support orthogonality and equal
 * norms; otherwise `InvalidArgument` is returned.
 *
 * # Safety
 * `y` must point to `y_len` readable doubles, `signals` to
 * `num_signals * len` readable doubles, and `out` must be writable.
 */
enum CcStatus cc_classify(const struct CcMatrix *handle,
                          const double *y,
                          size_t y_len,
                          const double *signals,
                          size_t num_signals,
                          size_t len,
                          enum CcClassifier kind,
                          size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMPCLASS_H */
