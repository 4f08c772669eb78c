/* C interface to the ivse vortex-stretching laboratory. Generated; do not edit. */

#ifndef IVSE_H
#define IVSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this interface.
 *
 * `Ok` is zero; everything else indicates failure and leaves a message for
 * [`ivse_last_error_message`]. The variants follow the library's error
 * taxonomy: `Config` and `Geometry` mean the request was wrong, the rest mean
 * the computation could not be carried out.
 */
typedef enum IvseStatus {
  IvseStatus_Ok = 0,
  /**
   * Invalid configuration value or combination.
   */
  IvseStatus_Config = 1,
  /**
   * Geometry not representable on the requested grid.
   */
  IvseStatus_Geometry = 2,
  /**
   * Kernel evaluated at a singular configuration.
   */
  IvseStatus_SingularEvaluation = 3,
  /**
   * A mathematically required property failed to hold.
   */
  IvseStatus_Numerical = 4,
  /**
   * Input outside the domain of the operation.
   */
  IvseStatus_Domain = 5,
  /**
   * No cells above the support threshold.
   */
  IvseStatus_EmptySupport = 6,
  /**
   * Malformed snapshot or report structure.
   */
  IvseStatus_Format = 7,
  /**
   * Operating-system I/O failure.
   */
  IvseStatus_Io = 8,
  /**
   * JSON (de)serialization failure.
   */
  IvseStatus_Json = 9,
  /**
   * A required pointer argument was null.
   */
  IvseStatus_NullPointer = 10,
  /**
   * A string argument was not valid UTF-8.
   */
  IvseStatus_InvalidUtf8 = 11,
  /**
   * The library panicked; state on this handle should not be trusted.
   */
  IvseStatus_Panic = 12,
} IvseStatus;

/**
 * Opaque handle to a meridian vorticity field sampled on its grid.
 */
typedef struct IvseField IvseField;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Never freed.
 */
const char *ivse_version(void);

/**
 * Message from the most recent failing call on this thread, empty if none.
 *
 * The pointer stays valid until the next failing call on the same thread;
 * copy the string out before calling anything else. Never free it.
 */
const char *ivse_last_error_message(void);

/**
 * Sample the two-ring datum with centers `(r_c, ±z_c)`, semi-axes
 * `(rho_r, rho_z)` and the given (negative) amplitude on an `n_r × n_z`
 * cell-centered grid over `[r_min, r_max] × [z_min, z_max]`, and return an
 * owning handle through `out`.
 *
 * On failure `*out` is untouched. Release with [`ivse_field_free`].
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
enum IvseStatus ivse_field_new(double r_c,
                               double z_c,
                               double rho_r,
                               double rho_z,
                               double amplitude,
                               double r_min,
                               double r_max,
                               double z_min,
                               double z_max,
                               size_t n_r,
                               size_t n_z,
                               struct IvseField **out);

/**
 * Release a handle from [`ivse_field_new`]. Null is a no-op.
 *
 * # Safety
 * `field` must be null or a pointer previously returned by
 * [`ivse_field_new`] that has not been freed already.
 */
void ivse_field_free(struct IvseField *field);

/**
 * Growth functional `Q = −∫ r ω dr dz` of the field.
 *
 * # Safety
 * `field` must be a live handle; `out` must point to writable storage.
 */
enum IvseStatus ivse_field_q(const struct IvseField *field, double *out);

/**
 * Sup norm `‖ω‖_∞` over the grid.
 *
 * # Safety
 * `field` must be a live handle; `out` must point to writable storage.
 */
enum IvseStatus ivse_field_sup_norm(const struct IvseField *field, double *out);

/**
 * Interaction-kernel lower constant κ of the field's support, minimized over
 * pairs by the refining search at the default level schedule.
 *
 * `rule_order` is the azimuthal quadrature order (32 reproduces the CLI
 * default). Cells with `|ω| ≤ 1e-12` are treated as empty.
 *
 * # Safety
 * `field` must be a live handle; `out` must point to writable storage.
 */
enum IvseStatus ivse_field_kappa(const struct IvseField *field, size_t rule_order, double *out);

/**
 * Induced meridian velocity `(u_r, u_z)` at the probe `(r, z)` by direct
 * kernel summation over the field's support.
 *
 * `delta` is the kernel regularization; zero is exact but fails with
 * [`IvseStatus::SingularEvaluation`] if the probe coincides with a source
 * cell center. Probes below the symmetry plane (`z < 0`) are valid.
 *
 * # Safety
 * `field` must be a live handle; `out_u_r` and `out_u_z` must point to
 * writable storage.
 */
enum IvseStatus ivse_field_velocity(const struct IvseField *field,
                                    size_t rule_order,
                                    double delta,
                                    double r,
                                    double z,
                                    double *out_u_r,
                                    double *out_u_z);

/**
 * Run one mode from a flat JSON configuration and return the report as a
 * newly allocated JSON string through `out_report_json`.
 *
 * The configuration uses exactly the CLI's keys and must include `"mode"`
 * (`"simulate"`, `"euler"`, `"compare"`, `"kappa"`, `"oracle"`, or
 * `"verify"`); unset keys take the mode's defaults. The returned document is
 * `{"tool_version", "mode", "report"}` where `report` matches the
 * corresponding CLI report file. Nothing is written to disk. Free the string
 * with [`ivse_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string; `out_report_json` must
 * point to writable storage for one pointer.
 */
enum IvseStatus ivse_run_json(const char *config_json, char **out_report_json);

/**
 * Release a string returned by this interface. Null is a no-op.
 *
 * # Safety
 * `s` must be null or a string returned by [`ivse_run_json`] that has not
 * been freed already.
 */
void ivse_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IVSE_H */
