#ifndef SSMLAB_H
#define SSMLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsmStatus {
  SSM_STATUS_OK = 0,
  SSM_STATUS_NULL_POINTER = 1,
  SSM_STATUS_INVALID_UTF8 = 2,
  SSM_STATUS_PARSE = 3,
  SSM_STATUS_INVALID_INPUT = 4,
  SSM_STATUS_PRECONDITION = 5,
  SSM_STATUS_NUMERICAL = 6,
  SSM_STATUS_UNSUPPORTED = 7,
  SSM_STATUS_IO = 8,
  SSM_STATUS_PANIC = 9,
} SsmStatus;

/*
 Scalar test function.
 */
typedef struct SsmFunction SsmFunction;

/*
 Perturbation path, self-adjoint or dissipative.
 */
typedef struct SsmInstance SsmInstance;

/*
 Outcome of one identity check.
 */
typedef struct SsmReport SsmReport;

/*
 Flat view of a report.
 */
typedef struct SsmReportSummary {
  double lhs_re;
  double lhs_im;
  double rhs_re;
  double rhs_im;
  double abs_residual;
  double rel_residual;
  double tolerance;
  size_t bound_checks;
  size_t failed_bound_checks;
  bool passed;
} SsmReportSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, empty after a success.
 Valid until the next call on the same thread.
 */
const char *ssm_last_error(void);

const char *ssm_version(void);

/*
 # Safety
 `s` must be null or a string returned by this library.
 */
void ssm_string_free(char *s);

/*
 Generates an instance from a JSON instance specification.

 # Safety
 `spec_json` must be a NUL-terminated string and `out` writable.
 */
enum SsmStatus ssm_instance_generate(const char *spec_json, struct SsmInstance **out);

/*
 Builds an instance from a JSON document with `base` and `direction`
 matrix tuples.

 # Safety
 `path_json` must be a NUL-terminated string and `out` writable.
 */
enum SsmStatus ssm_instance_from_json(const char *path_json, struct SsmInstance **out);

/*
 # Safety
 `inst` must be null or a handle from this library, freed once.
 */
void ssm_instance_free(struct SsmInstance *inst);

/*
 Matrix dimension, 0 for a null handle.

 # Safety
 `inst` must be null or a live handle.
 */
size_t ssm_instance_dim(const struct SsmInstance *inst);

/*
 Number of operators in the tuple, 0 for a null handle.

 # Safety
 `inst` must be null or a live handle.
 */
size_t ssm_instance_arity(const struct SsmInstance *inst);

/*
 True when the instance is a self-adjoint path.

 # Safety
 `inst` must be null or a live handle.
 */
bool ssm_instance_is_self_adjoint(const struct SsmInstance *inst);

/*
 Parses a function document (`"class": "trig"` or `"rational"`).

 # Safety
 `json` must be a NUL-terminated string and `out` writable.
 */
enum SsmStatus ssm_function_from_json(const char *json, struct SsmFunction **out);

/*
 # Safety
 `f` must be null or a handle from this library, freed once.
 */
void ssm_function_free(struct SsmFunction *f);

/*
 Evaluates `f` at a real point of length `n`.

 # Safety
 `x` must point to `n` doubles; `re` and `im` must be writable.
 */
enum SsmStatus ssm_function_eval(const struct SsmFunction *f,
                                 const double *x,
                                 size_t n,
                                 double *re,
                                 double *im);

/*
 First-order identity. Self-adjoint instances use the Krein measures
 with `q` quadrature nodes; dissipative instances need a rational `f`
 with poles in the lower half-plane.

 # Safety
 Handles must be live and `out` writable.
 */
enum SsmStatus ssm_verify_krein(const struct SsmInstance *inst,
                                const struct SsmFunction *f,
                                size_t q,
                                double tol,
                                struct SsmReport **out);

/*
 Second-order identity; `f` must be rational.

 # Safety
 Handles must be live and `out` writable.
 */
enum SsmStatus ssm_verify_koplienko(const struct SsmInstance *inst,
                                    const struct SsmFunction *f,
                                    size_t q,
                                    double tol,
                                    struct SsmReport **out);

/*
 First-order measure `j` (0-based) of a self-adjoint instance as CSV.

 # Safety
 `inst` must be live and `out` writable.
 */
enum SsmStatus ssm_krein_measure_csv(const struct SsmInstance *inst,
                                     size_t q,
                                     size_t j,
                                     char **out);

/*
 # Safety
 `r` must be null or a handle from this library, freed once.
 */
void ssm_report_free(struct SsmReport *r);

/*
 # Safety
 `r` must be live and `out` writable.
 */
enum SsmStatus ssm_report_summary(const struct SsmReport *r, struct SsmReportSummary *out);

/*
 Full report as JSON; release with [`ssm_string_free`].

 # Safety
 `r` must be live and `out` writable.
 */
enum SsmStatus ssm_report_to_json(const struct SsmReport *r, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SSMLAB_H */
