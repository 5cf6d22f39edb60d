#ifndef PEDHEADING_H
#define PEDHEADING_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

/**
 * Result code of every `ph_*` call.
 */
typedef enum PhStatus {
  PH_STATUS_OK = 0,
  PH_STATUS_NULL_POINTER = 1,
  PH_STATUS_INVALID_INPUT = 2,
  PH_STATUS_DEGENERATE_FIELD = 3,
  PH_STATUS_INSUFFICIENT_DATA = 4,
  PH_STATUS_PARSE = 5,
  PH_STATUS_IO = 6,
  PH_STATUS_OUT_OF_RANGE = 7,
  PH_STATUS_PANIC = 8,
} PhStatus;

/**
 * Phone orientation relative to the walker.
 */
typedef enum PhPose {
  PH_POSE_FLAT = 0,
  PH_POSE_POCKET_TILT = 1,
  PH_POSE_SHIRT_VERTICAL = 2,
  /**
   * Use `PhSimConfig::pose_quat`.
   */
  PH_POSE_CUSTOM = 3,
} PhPose;

/**
 * Owned list of windowed heading estimates.
 */
typedef struct PhEstimates PhEstimates;

/**
 * Owned ground-truth heading schedule.
 */
typedef struct PhGroundTruth PhGroundTruth;

/**
 * Owned IMU trace.
 */
typedef struct PhTrace PhTrace;

/**
 * One IMU reading. Vectors are phone-frame (x, y, z).
 */
typedef struct PhImuSample {
  double t;
  /**
   * m/s².
   */
  double accel[3];
  /**
   * rad/s.
   */
  double gyro[3];
  /**
   * µT.
   */
  double mag[3];
} PhImuSample;

typedef struct PhTurn {
  double t;
  double heading_deg;
} PhTurn;

/**
 * Constant phone-frame offset (µT) added to the magnetometer over `[t_start, t_end)`.
 */
typedef struct PhMagDisturbance {
  double t_start;
  double t_end;
  double offset[3];
} PhMagDisturbance;

/**
 * Walk simulator settings. Fill with `ph_sim_config_default` first.
 */
typedef struct PhSimConfig {
  double heading_deg;
  enum PhPose pose;
  /**
   * Phone→user unit quaternion (w, x, y, z); read only for `PH_POSE_CUSTOM`.
   */
  double pose_quat[4];
  double duration;
  double rate;
  double step_freq;
  double accel_forward_amp;
  double accel_lateral_amp;
  double accel_vertical_amp;
  double yaw_sway_deg;
  double noise_accel_sigma;
  double noise_gyro_sigma;
  double noise_mag_sigma;
  /**
   * Constant phone-frame gyro bias, rad/s.
   */
  double gyro_bias[3];
  /**
   * Extra bias about the world vertical, deg/s.
   */
  double yaw_bias_deg_s;
  double dip_deg;
  double field_strength;
  uint64_t seed;
  const struct PhTurn *turns;
  size_t n_turns;
  const struct PhMagDisturbance *disturbances;
  size_t n_disturbances;
} PhSimConfig;

/**
 * Fusion and windowing settings. Fill with `ph_estimate_config_default` first.
 */
typedef struct PhEstimateConfig {
  double window_s;
  double hop_s;
  double delta;
  double min_energy;
  double anisotropy_min;
  double gravity_tolerance;
  double gravity_gain;
  double reliability_window;
  double reliability_threshold;
  double yaw_blend;
  double rate_smoothing;
  /**
   * Resample to this rate (Hz) before fusion; 0 keeps the input grid.
   */
  double resample_hz;
} PhEstimateConfig;

/**
 * One window's estimate. Angles are degrees clockwise from North.
 */
typedef struct PhHeadingEstimate {
  double t_center;
  double theta_deg;
  double axis_deg;
  double confidence;
  double gamma_deg;
} PhHeadingEstimate;

/**
 * Heading error percentiles in degrees.
 */
typedef struct PhErrorSummary {
  double p50;
  double p75;
  double max;
  size_t n;
} PhErrorSummary;

typedef struct PhLatency {
  /**
   * Mean settle time over all turns, NaN when the truth has no turns.
   */
  double mean_settle_s;
  size_t n_turns;
  size_t n_unsettled;
} PhLatency;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *ph_version(void);

/**
 * Message for the last failed call on this thread, or NULL after a success.
 * The pointer stays valid until the next `ph_*` call on the same thread.
 */
const char *ph_last_error_message(void);

/**
 * World→phone quaternion for Euler angles in radians, written to `q_out[4]` as (w, x, y, z).
 */
enum PhStatus ph_quaternion_from_euler(double alpha, double beta, double gamma, double *q_out);

/**
 * Rotates `v[3]` by the unit quaternion `q[4]` (w, x, y, z) into `v_out[3]`.
 */
enum PhStatus ph_rotate_vector(const double *q, const double *v, double *v_out);

/**
 * Pitch `alpha` and roll `beta` (radians) from a phone-frame gravity reading.
 */
enum PhStatus ph_euler_from_gravity(const double *g, double *alpha_out, double *beta_out);

/**
 * Tilt-compensated yaw in radians, `[0, 2π)`, clockwise from North.
 */
enum PhStatus ph_yaw_from_magnetics(const double *m, double alpha, double beta, double *gamma_out);

/**
 * Builds a trace from `n` samples with strictly increasing timestamps.
 */
enum PhStatus ph_trace_from_samples(const struct PhImuSample *samples,
                                    size_t n,
                                    struct PhTrace **trace_out);

/**
 * Reads a trace CSV (`t,ax,ay,az,wx,wy,wz,mx,my,mz`).
 */
enum PhStatus ph_trace_read_csv(const char *path_utf8, struct PhTrace **trace_out);

enum PhStatus ph_trace_write_csv(const struct PhTrace *trace, const char *path_utf8);

enum PhStatus ph_trace_len(const struct PhTrace *trace, size_t *len_out);

enum PhStatus ph_trace_get(const struct PhTrace *trace,
                           size_t index,
                           struct PhImuSample *sample_out);

/**
 * Releases a trace. NULL is ignored.
 */
void ph_trace_free(struct PhTrace *trace);

enum PhStatus ph_truth_read_csv(const char *path_utf8, struct PhGroundTruth **truth_out);

enum PhStatus ph_truth_write_csv(const struct PhGroundTruth *truth, const char *path_utf8);

/**
 * True heading (degrees) at time `t`; `PH_STATUS_OUT_OF_RANGE` outside the schedule.
 */
enum PhStatus ph_truth_heading_at(const struct PhGroundTruth *truth,
                                  double t,
                                  double *heading_deg_out);

void ph_truth_free(struct PhGroundTruth *truth);

enum PhStatus ph_sim_config_default(struct PhSimConfig *cfg_out);

/**
 * Simulates a walk. `truth_out` may be NULL when the schedule is not needed.
 */
enum PhStatus ph_simulate(const struct PhSimConfig *cfg,
                          struct PhTrace **trace_out,
                          struct PhGroundTruth **truth_out);

enum PhStatus ph_estimate_config_default(struct PhEstimateConfig *cfg_out);

/**
 * Runs orientation fusion and windowed heading estimation over a trace.
 */
enum PhStatus ph_estimate(const struct PhTrace *trace,
                          const struct PhEstimateConfig *cfg,
                          struct PhEstimates **estimates_out);

/**
 * Reads an estimates CSV as written by `ph_estimates_write_csv`.
 */
enum PhStatus ph_estimates_read_csv(const char *path_utf8, struct PhEstimates **estimates_out);

enum PhStatus ph_estimates_write_csv(const struct PhEstimates *estimates, const char *path_utf8);

enum PhStatus ph_estimates_len(const struct PhEstimates *estimates, size_t *len_out);

enum PhStatus ph_estimates_get(const struct PhEstimates *estimates,
                               size_t index,
                               struct PhHeadingEstimate *estimate_out);

void ph_estimates_free(struct PhEstimates *estimates);

/**
 * Error percentiles over estimates at least `guard_s` seconds from any turn.
 */
enum PhStatus ph_score(const struct PhEstimates *estimates,
                       const struct PhGroundTruth *truth,
                       double guard_s,
                       struct PhErrorSummary *summary_out);

/**
 * Settle times after each heading change. `emit_delay_s` is added to every
 * window centre before comparing with the turn time (half the window length
 * for a causal estimator).
 */
enum PhStatus ph_turn_latency(const struct PhEstimates *estimates,
                              const struct PhGroundTruth *truth,
                              double emit_delay_s,
                              struct PhLatency *latency_out);

/**
 * Circular distance between two headings in degrees, `[0, 180]`.
 */
double ph_heading_difference(double a_deg, double b_deg);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PEDHEADING_H */
