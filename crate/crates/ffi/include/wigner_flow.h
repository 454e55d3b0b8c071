#ifndef WIGNER_FLOW_H
#define WIGNER_FLOW_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdint.h>

typedef enum WfStatus {
  WF_STATUS_OK = 0,
  WF_STATUS_NULL_POINTER = 1,
  WF_STATUS_INVALID_ARGUMENT = 2,
  WF_STATUS_OUT_OF_RANGE = 3,
  WF_STATUS_VELOCITY_UNDEFINED = 4,
  WF_STATUS_CORRECTION_REGIME_EXCEEDED = 5,
  WF_STATUS_MODEL_MISMATCH = 6,
  WF_STATUS_IO = 7,
  WF_STATUS_VERIFY_FAILED = 8,
  WF_STATUS_INTERNAL = 9,
  WF_STATUS_PANIC = 10,
} WfStatus;

typedef enum WfBranch {
  WF_BRANCH_CLOSED_POSITIVE = 0,
  WF_BRANCH_CLOSED_NEGATIVE = 1,
  WF_BRANCH_OPEN = 2,
  WF_BRANCH_EMPTY = 3,
  WF_BRANCH_THRESHOLD = 4,
} WfBranch;

typedef struct WfGaussian WfGaussian;

typedef struct WfModel WfModel;

typedef struct WfThermal WfThermal;

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *wf_last_error_message(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *wf_version(void);

/*
 Frees a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and not have been freed.
 */
void wf_string_free(char *s);

/*
 # Safety
 `out` must be a valid pointer to a double.
 */
enum WfStatus wf_bessel_i(uint32_t order, double x, double *out);

double wf_erf(double x);

double wf_erfc(double x);

double wf_erfcx(double x);

/*
 Physicists' Hermite polynomial `H_n(z)`.

 # Safety
 `out` must be a valid pointer to a double.
 */
enum WfStatus wf_hermite(uint32_t n, double z, double *out);

/*
 `cos k + ν² cos x`.

 # Safety
 `out` must be a valid pointer.
 */
enum WfStatus wf_model_harper(double nu2, struct WfModel **out);

/*
 # Safety
 `out` must be a valid pointer.
 */
enum WfStatus wf_model_harmonic(struct WfModel **out);

/*
 # Safety
 `out` must be a valid pointer.
 */
enum WfStatus wf_model_lotka_volterra(struct WfModel **out);

/*
 # Safety
 `model` must come from a `wf_model_*` constructor (or be null).
 */
void wf_model_free(struct WfModel *model);

/*
 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum WfStatus wf_model_energy(const struct WfModel *model, double x, double k, double *out);

/*
 Orbit class of the Harper level set at `energy`.
 */
enum WfBranch wf_classify_harper(double nu2, double energy);

/*
 Gaussian ensemble of width `gamma` for `model` (copied).

 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum WfStatus wf_gaussian_new(double gamma, const struct WfModel *model, struct WfGaussian **out);

/*
 # Safety
 `g` must come from [`wf_gaussian_new`] (or be null).
 */
void wf_gaussian_free(struct WfGaussian *g);

/*
 Closed-form `(∂_x J_x, ∂_k J_k)`.

 # Safety
 `g` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_gaussian_div_closed(const struct WfGaussian *g,
                                     double x,
                                     double k,
                                     double *dx,
                                     double *dk);

/*
 Hermite-series `(∂_x J_x, ∂_k J_k)` through `eta_max`.

 # Safety
 `g` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_gaussian_div_series(const struct WfGaussian *g,
                                     double x,
                                     double k,
                                     uint32_t eta_max,
                                     double *dx,
                                     double *dk);

/*
 Harper erf currents.

 # Safety
 `g` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_gaussian_currents(const struct WfGaussian *g,
                                   double x,
                                   double k,
                                   double *jx,
                                   double *jk);

/*
 Harper quantum velocity `J / G`.

 # Safety
 `g` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_gaussian_velocity(const struct WfGaussian *g,
                                   double x,
                                   double k,
                                   double *wx,
                                   double *wk);

/*
 Harper `∇·w`.

 # Safety
 `g` must be a live handle and `out` valid.
 */
enum WfStatus wf_gaussian_div_w(const struct WfGaussian *g, double x, double k, double *out);

/*
 Thermal ensemble at inverse temperature `beta` for `model` (copied).

 # Safety
 `model` must be a live handle and `out` a valid pointer.
 */
enum WfStatus wf_thermal_new(const struct WfModel *model, double beta, struct WfThermal **out);

/*
 # Safety
 `t` must come from [`wf_thermal_new`] (or be null).
 */
void wf_thermal_free(struct WfThermal *t);

/*
 Classical and second-order partition functions.

 # Safety
 `t` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_thermal_partition(const struct WfThermal *t,
                                   double *z_classical,
                                   double *z_corrected);

/*
 `W₀` and `W_St` at a point.

 # Safety
 `t` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_thermal_wigner(const struct WfThermal *t,
                                double x,
                                double k,
                                double *w0,
                                double *w_st2);

/*
 Second-order currents.

 # Safety
 `t` must be a live handle and the out-pointers valid.
 */
enum WfStatus wf_thermal_currents(const struct WfThermal *t,
                                  double x,
                                  double k,
                                  double *jx,
                                  double *jk);

/*
 Second-order `∇·w`.

 # Safety
 `t` must be a live handle and `out` valid.
 */
enum WfStatus wf_thermal_div_w(const struct WfThermal *t, double x, double k, double *out);

/*
 Runs the full oracle suite and hands back the JSON report, to be released
 with [`wf_string_free`]. Returns `VerifyFailed` (with the report still
 written) when any check fails.

 # Safety
 `out` must be a valid pointer.
 */
enum WfStatus wf_verify_json(char **out);

/*
 Looks a built-in model up by name (`harper`, `harmonic`,
 `lotka-volterra`).

 # Safety
 `name` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WfStatus wf_model_by_name(const char *name, double nu2, struct WfModel **out);

#endif  /* WIGNER_FLOW_H */
