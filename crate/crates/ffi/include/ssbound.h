#ifndef SSBOUND_H
#define SSBOUND_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SsbStatus {
  SSB_STATUS_OK = 0,
  SSB_STATUS_NULL_POINTER = 1,
  SSB_STATUS_INVALID_UTF8 = 2,
  SSB_STATUS_CONFIG_ERROR = 3,
  SSB_STATUS_INVALID_ARGUMENT = 4,
  SSB_STATUS_ASSEMBLY_ERROR = 5,
  SSB_STATUS_SOLVER_FAILURE = 6,
  SSB_STATUS_IO_ERROR = 7,
  SSB_STATUS_PANIC = 8,
} SsbStatus;

/*
 A Lindblad model with its observable.
 */
typedef struct SsbModel SsbModel;

/*
 An assembled relaxation.
 */
typedef struct SsbProblem SsbProblem;

/*
 Constraint budgets; zero disables a family.
 */
typedef struct SsbBudget {
  size_t linear;
  size_t moment_matrix;
  /*
   Sites per reduced density matrix.
   */
  size_t reduced;
  /*
   Nonzero: all subsets of `reduced` sites rather than contiguous windows.
   */
  int32_t all_subsets;
  int32_t symmetry;
  int32_t safety_net;
} SsbBudget;

/*
 Outcome of one directional solve.
 */
typedef struct SsbBound {
  /*
   NaN unless `status` is 0 (optimal) or 1 (near-optimal).
   */
  double value;
  /*
   0 optimal, 1 near-optimal, 2 infeasible, 3 unbounded, 4 numerical failure.
   */
  int32_t status;
  uint32_t iterations;
  double wall_time_s;
} SsbBound;

typedef struct SsbInterval {
  struct SsbBound lb;
  struct SsbBound ub;
  double trivial_lb;
  double trivial_ub;
} SsbInterval;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL. Owned by the library.
 */
const char *ssb_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *ssb_version(void);

/*
 Build a model from a TOML configuration document.

 # Safety
 `config_toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SsbStatus ssb_model_from_config(const char *config_toml, struct SsbModel **out);

/*
 Release a model; NULL is ignored.

 # Safety
 `model` must come from `ssb_model_from_config` and not be used afterwards.
 */
void ssb_model_free(struct SsbModel *model);

/*
 Number of sites, or 0 for NULL.

 # Safety
 `model` must be NULL or a live handle.
 */
size_t ssb_model_num_sites(const struct SsbModel *model);

/*
 Replace the observable with a Pauli polynomial such as `"0.5*Z1 Z2 - X1"`.

 # Safety
 `model` must be a live handle and `text` NUL-terminated.
 */
enum SsbStatus ssb_model_set_observable(struct SsbModel *model, const char *text);

/*
 The budgets stated in the model's configuration.

 # Safety
 `model` must be a live handle and `out` valid.
 */
enum SsbStatus ssb_model_default_budget(const struct SsbModel *model, struct SsbBudget *out);

/*
 Assemble the relaxation of the model's observable under `budget`.

 # Safety
 `model` must be a live handle; `budget` and `out` valid pointers.
 */
enum SsbStatus ssb_problem_assemble(const struct SsbModel *model,
                                    const struct SsbBudget *budget,
                                    struct SsbProblem **out);

/*
 Release a problem; NULL is ignored.

 # Safety
 `problem` must come from `ssb_problem_assemble` and not be used afterwards.
 */
void ssb_problem_free(struct SsbProblem *problem);

/*
 Number of moment variables, or 0 for NULL.

 # Safety
 `problem` must be NULL or a live handle.
 */
size_t ssb_problem_num_variables(const struct SsbProblem *problem);

/*
 Number of equality constraints, or 0 for NULL.

 # Safety
 `problem` must be NULL or a live handle.
 */
size_t ssb_problem_num_equalities(const struct SsbProblem *problem);

/*
 Write sparse SDPA to `path` and the variable map next to it.

 # Safety
 `problem` must be a live handle and `path` NUL-terminated.
 */
enum SsbStatus ssb_problem_export_sdpa(const struct SsbProblem *problem, const char *path);

/*
 Solve both directions. Returns `SolverFailure` (with `out` filled) when
 either direction is not optimal or near-optimal. A non-positive
 `tolerance` selects the default.

 # Safety
 `problem` must be a live handle and `out` valid.
 */
enum SsbStatus ssb_problem_certify(const struct SsbProblem *problem,
                                   double tolerance,
                                   struct SsbInterval *out);

/*
 Exact extrema of the observable over the dense steady-state set.

 # Safety
 `model` must be a live handle; the output pointers valid.
 */
enum SsbStatus ssb_model_exact(const struct SsbModel *model,
                               double *out_min,
                               double *out_max,
                               size_t *out_dimension);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SSBOUND_H */
