#ifndef ISOQUAD_H
#define ISOQUAD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IsoquadMethod {
  ISOQUAD_METHOD_EXACT = 0,
  ISOQUAD_METHOD_FINITE_DIFFERENCE = 1,
} IsoquadMethod;

typedef enum IsoquadScheme {
  ISOQUAD_SCHEME_FD = 0,
  ISOQUAD_SCHEME_SP = 1,
} IsoquadScheme;

typedef enum IsoquadStatus {
  ISOQUAD_STATUS_OK = 0,
  ISOQUAD_STATUS_INVALID_QUADRILATERAL = 1,
  ISOQUAD_STATUS_DEGENERATE_JACOBIAN = 2,
  ISOQUAD_STATUS_NON_POSITIVE_FACTOR = 3,
  ISOQUAD_STATUS_KAPPA_OUT_OF_RANGE = 4,
  ISOQUAD_STATUS_FD_REQUIRES_UNIFORM_GRID = 5,
  ISOQUAD_STATUS_COMPLEX_SPECTRUM = 6,
  ISOQUAD_STATUS_BIFURCATION_DETECTED = 7,
  ISOQUAD_STATUS_INVALID_STEP = 8,
  ISOQUAD_STATUS_INVALID_ARGUMENT = 9,
  ISOQUAD_STATUS_NULL_POINTER = 10,
  ISOQUAD_STATUS_OUT_OF_RANGE = 11,
  ISOQUAD_STATUS_PANIC = 12,
} IsoquadStatus;

typedef struct IsoquadCurve IsoquadCurve;

typedef struct IsoquadQuad IsoquadQuad;

typedef struct IsoquadSearch IsoquadSearch;

// Shape parameter index: 0 alpha, 1 beta, 2 gamma, 3 delta.
typedef uint32_t IsoquadParam;

typedef struct IsoquadTraceConfig {
  IsoquadParam explicit_param;
  double t_half;
  size_t steps;
  enum IsoquadMethod method;
  double fd_increment;
  // Nonzero selects central differences for the fd method.
  uint8_t central_difference;
  double singular_tol;
  enum IsoquadScheme scheme;
  double kappa;
} IsoquadTraceConfig;

typedef struct IsoquadSearchConfig {
  double l;
  double h;
  double epsilon;
  enum IsoquadScheme scheme;
  double kappa;
  uint8_t area_prefilter;
  double area_tol;
  // 0 evaluates sequentially; negative uses the default thread pool.
  int32_t threads;
} IsoquadSearchConfig;

typedef struct IsoquadTracePoint {
  double t;
  double alpha;
  double beta;
  double gamma;
  double delta;
  double c;
  double residual_norm;
  double det_jacobian;
  uint8_t truncated;
} IsoquadTracePoint;

typedef struct IsoquadCandidate {
  double alpha;
  double beta;
  double gamma;
  double delta;
  double c;
  double lambdas[4];
  double err;
  double area;
  double perimeter;
} IsoquadCandidate;

typedef struct IsoquadSearchStats {
  size_t enumerated;
  size_t evaluated;
  size_t invalid;
  size_t complex_spectrum;
  size_t prefiltered;
  size_t accepted;
  size_t distinct_spectra;
  size_t share_area;
  size_t share_perimeter;
} IsoquadSearchStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message into `buf` (NUL terminated, truncated to
// `len`). Returns the full message length excluding the terminator, 0 when there is none.
size_t isoquad_last_error(char *buf, size_t len);

struct IsoquadTraceConfig isoquad_trace_config_default(void);

struct IsoquadSearchConfig isoquad_search_config_default(void);

// Validates and wraps V3 = (alpha, beta), V4 = (gamma, delta).
enum IsoquadStatus isoquad_quad_new(double alpha,
                                    double beta,
                                    double gamma,
                                    double delta,
                                    struct IsoquadQuad **quad);

void isoquad_quad_free(struct IsoquadQuad *quad);

// Area and perimeter; either output may be null.
enum IsoquadStatus isoquad_quad_measures(const struct IsoquadQuad *quad,
                                         double *area,
                                         double *perimeter);

// Ascending eigenvalues into `lambdas[4]`.
enum IsoquadStatus isoquad_eigenvalues(const struct IsoquadQuad *quad,
                                       enum IsoquadScheme scheme,
                                       double kappa,
                                       double *lambdas);

// `xi[k] = e_{4-k}(lambda)` into `xi[4]`; when `grad` is not null it receives the 4x4 row-major
// gradient `d xi[k] / d (alpha, beta, gamma, delta)`.
enum IsoquadStatus isoquad_invariants(const struct IsoquadQuad *quad,
                                      enum IsoquadScheme scheme,
                                      double kappa,
                                      double *xi,
                                      double *grad);

// Traces the isospectral curve through `quad`. A curve that stops early at a singular point is
// still returned as a success; see [`isoquad_curve_truncated`].
enum IsoquadStatus isoquad_trace(const struct IsoquadQuad *quad,
                                 const struct IsoquadTraceConfig *config,
                                 struct IsoquadCurve **curve);

void isoquad_curve_free(struct IsoquadCurve *curve);

// Number of points; 0 for a null handle.
size_t isoquad_curve_len(const struct IsoquadCurve *curve);

// Index of t = 0 in the ascending point list.
size_t isoquad_curve_start_index(const struct IsoquadCurve *curve);

// 1 when either branch stopped early, 0 otherwise (and for a null handle).
uint8_t isoquad_curve_truncated(const struct IsoquadCurve *curve);

enum IsoquadStatus isoquad_curve_get(const struct IsoquadCurve *curve,
                                     size_t index,
                                     struct IsoquadTracePoint *point);

enum IsoquadStatus isoquad_search(const struct IsoquadQuad *star,
                                  const struct IsoquadSearchConfig *config,
                                  struct IsoquadSearch **result);

void isoquad_search_free(struct IsoquadSearch *result);

// Number of accepted candidates; 0 for a null handle.
size_t isoquad_search_len(const struct IsoquadSearch *result);

enum IsoquadStatus isoquad_search_get(const struct IsoquadSearch *result,
                                      size_t index,
                                      struct IsoquadCandidate *candidate);

enum IsoquadStatus isoquad_search_stats(const struct IsoquadSearch *result,
                                        struct IsoquadSearchStats *stats);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ISOQUAD_H */
