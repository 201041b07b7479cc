#ifndef LEO_CHANNEL_H
#define LEO_CHANNEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LcStatus {
  LC_STATUS_OK = 0,
  LC_STATUS_NULL_POINTER = 1,
  LC_STATUS_INVALID_ARGUMENT = 2,
  LC_STATUS_PARSE = 3,
  LC_STATUS_PROPAGATION = 4,
  LC_STATUS_NO_PASS = 5,
  LC_STATUS_CONFIG = 6,
  LC_STATUS_IO = 7,
  LC_STATUS_RUNTIME = 8,
  LC_STATUS_PANIC = 9,
} LcStatus;

/**
 * Opaque satellite ephemeris.
 */
typedef struct LcEphemeris LcEphemeris;

/**
 * Opaque scene.
 */
typedef struct LcScene LcScene;

typedef struct LcPassWindow {
  double t_start_unix;
  double t0_unix;
  double t_end_unix;
  double theta_max_deg;
  double gamma_t0_deg;
  double t_du_min;
  double t_du_analytic_min;
} LcPassWindow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, empty after a success.
 * Valid until the next call into the library from the same thread.
 */
const char *lc_last_error(void);

/**
 * Library version, static string.
 */
const char *lc_version(void);

/**
 * Free-space path loss, dB.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum LcStatus lc_fspl_db(double d_km, double fc_mhz, double *out);

/**
 * Rain attenuation, dB, with the constant elevation coefficient.
 *
 * # Safety
 * `out` must be a valid pointer to a double.
 */
enum LcStatus lc_rain_attenuation_db(double rain_rate_mm_h,
                                     double k,
                                     double alpha,
                                     double elevation_deg,
                                     double *out);

/**
 * Central angle between site and sub-satellite point at culmination, deg.
 *
 * # Safety
 * `out_deg` must be a valid pointer to a double.
 */
enum LcStatus lc_gamma_at_culmination(double theta_max_deg,
                                      double r_e_km,
                                      double r_km,
                                      double *out_deg);

/**
 * Parse a two-line element set and initialise SGP4 (WGS-72).
 *
 * # Safety
 * `line1` and `line2` must be NUL-terminated strings; `out` must be valid.
 */
enum LcStatus lc_ephemeris_from_tle(const char *line1, const char *line2, struct LcEphemeris **out);

/**
 * # Safety
 * `eph` must be NULL or a handle from [`lc_ephemeris_from_tle`] not yet freed.
 */
void lc_ephemeris_free(struct LcEphemeris *eph);

/**
 * TLE epoch as Unix seconds.
 *
 * # Safety
 * `eph` must be a live handle and `out` a valid pointer.
 */
enum LcStatus lc_ephemeris_epoch(const struct LcEphemeris *eph, double *out);

/**
 * Earth-fixed position (km) and velocity (km/s) at a Unix time.
 *
 * # Safety
 * `eph` must be a live handle; `pos` and `vel` must each point to 3 doubles.
 */
enum LcStatus lc_ephemeris_state_ecef(const struct LcEphemeris *eph,
                                      double unix_s,
                                      double *pos,
                                      double *vel);

/**
 * First pass above `min_elev_deg` rising after `start_unix`.
 *
 * # Safety
 * `eph` must be a live handle and `out` a valid pointer.
 */
enum LcStatus lc_find_pass(const struct LcEphemeris *eph,
                           double lat_deg,
                           double lon_deg,
                           double alt_km,
                           double min_elev_deg,
                           double step_s,
                           double start_unix,
                           double fc_hz,
                           struct LcPassWindow *out);

/**
 * Box-building city on a street grid (lengths in metres, concrete).
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LcStatus lc_scene_city(size_t grid_nx,
                            size_t grid_ny,
                            double block_w_m,
                            double street_w_m,
                            double height_min_m,
                            double height_max_m,
                            uint64_t seed,
                            struct LcScene **out);

/**
 * Square concrete ground plane centred on the origin.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum LcStatus lc_scene_ground(double half_extent_m, struct LcScene **out);

/**
 * # Safety
 * `scene` must be NULL or a live scene handle.
 */
void lc_scene_free(struct LcScene *scene);

/**
 * Number of triangles, 0 for NULL.
 *
 * # Safety
 * `scene` must be NULL or a live scene handle.
 */
size_t lc_scene_triangle_count(const struct LcScene *scene);

/**
 * Nearest hit along a ray (km, scene frame). `*hit` is set to 0 on a miss,
 * in which case distance and face are left untouched.
 *
 * # Safety
 * `scene` must be live; `origin` and `dir` must each point to 3 doubles;
 * `hit`, `distance_km` and `face_id` must be valid.
 */
enum LcStatus lc_scene_intersect(const struct LcScene *scene,
                                 const double *origin,
                                 const double *dir,
                                 int32_t *hit,
                                 double *distance_km,
                                 uint32_t *face_id);

/**
 * Run a full pass simulation from a TOML config and write the CSV outputs
 * into `out_dir` (NULL keeps the configured directory).
 *
 * # Safety
 * `config_path` must be a NUL-terminated string; `out_dir` NULL or one.
 */
enum LcStatus lc_simulate(const char *config_path, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEO_CHANNEL_H */
