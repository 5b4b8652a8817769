#ifndef UAVFARM_H
#define UAVFARM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum UavStatus {
  UAV_OK = 0,
  UAV_NULL_POINTER = 1,
  UAV_INVALID_ARGUMENT = 2,
  UAV_CONFIG = 3,
  UAV_CONTRACT = 4,
  UAV_DOMAIN = 5,
  UAV_DIVERGENCE = 6,
  UAV_CHECKPOINT = 7,
  UAV_IO = 8,
  UAV_PANIC = 9,
  UAV_OTHER = 10,
} UavStatus;

/**
 * Opaque simulator handle.
 */
typedef struct UavEnv UavEnv;

/**
 * Opaque Q-network handle.
 */
typedef struct UavQNet UavQNet;

/**
 * Episode figures of an environment handle.
 */
typedef struct UavMetrics {
  double energy_j;
  double recognition_pct;
  double collection_pct;
  double completion_s;
} UavMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *uavfarm_last_error(void);

/**
 * Flight power in watts at planar velocity (`vx`, `vy`) m/s.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UavStatus uavfarm_flight_power(double vx, double vy, double *out);

/**
 * Total energy in joules of one step of `dt` seconds at (`vx`, `vy`).
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UavStatus uavfarm_step_energy(double vx, double vy, double dt, double *out);

/**
 * Path loss in dB over `dist` metres.
 *
 * # Safety
 * `out` must be null or valid for one write.
 */
enum UavStatus uavfarm_path_loss_db(double dist, double *out);

/**
 * BPSK bit error rate at a linear SINR.
 */
double uavfarm_ber_bpsk(double sinr);

/**
 * Probability that a packet of `bits` bits has at least one bit error.
 */
double uavfarm_packet_loss_rate(double ber, uint32_t bits);

/**
 * Probability of collecting a sensor's packet, positions in metres.
 *
 * # Safety
 * `uav` and `sensor` must point to three readable doubles; `out` must be
 * valid for one write.
 */
enum UavStatus uavfarm_collection_probability(const double *uav, const double *sensor, double *out);

/**
 * Creates a simulator from a TOML experiment config (null for the default
 * configuration). `layout_seed` fixes the farm, `episode_seed` the first
 * episode.
 *
 * # Safety
 * `config_toml` must be null or a NUL-terminated string; `out` must be
 * valid for one write.
 */
enum UavStatus uavfarm_env_new(const char *config_toml,
                               uint64_t layout_seed,
                               uint64_t episode_seed,
                               struct UavEnv **out);

/**
 * Releases an environment handle. Null is ignored.
 *
 * # Safety
 * `env` must be null or a handle from [`uavfarm_env_new`] not yet freed.
 */
void uavfarm_env_free(struct UavEnv *env);

/**
 * Number of UAVs, or 0 for a null handle.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
size_t uavfarm_env_n_uavs(const struct UavEnv *env);

/**
 * Length of one UAV's observation vector, or 0 for a null handle.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
size_t uavfarm_env_obs_len(const struct UavEnv *env);

/**
 * Starts a new episode on the same farm layout.
 *
 * # Safety
 * `env` must be null or a live handle.
 */
enum UavStatus uavfarm_env_reset(struct UavEnv *env, uint64_t episode_seed);

/**
 * Writes UAV `uav`'s observation into `buf`, which must hold `len` doubles
 * with `len == uavfarm_env_obs_len(env)`.
 *
 * # Safety
 * `env` must be a live handle and `buf` valid for `len` writes.
 */
enum UavStatus uavfarm_env_observe(const struct UavEnv *env, size_t uav, double *buf, size_t len);

/**
 * Advances every UAV by one step. `actions[i]` is a compass index 0..=7
 * (N, NE, E, SE, S, SW, W, NW) or -1 to hover; dead UAVs' entries are
 * ignored. Per-UAV rewards go to `rewards` (may be null) and whether the
 * episode ended to `episode_done` (may be null).
 *
 * # Safety
 * `env` must be a live handle, `actions` readable and `rewards` (if not
 * null) writable for `n` elements, `episode_done` null or writable.
 */
enum UavStatus uavfarm_env_step(struct UavEnv *env,
                                const int32_t *actions,
                                size_t n,
                                double *rewards,
                                bool *episode_done);

/**
 * Figures of the finished episode; `UAV_CONTRACT` while it is still running.
 *
 * # Safety
 * `env` must be a live handle and `out` valid for one write.
 */
enum UavStatus uavfarm_env_metrics(const struct UavEnv *env, struct UavMetrics *out);

/**
 * Loads a `.qnet` checkpoint written by the trainer.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for one write.
 */
enum UavStatus uavfarm_qnet_load(const char *path, struct UavQNet **out);

/**
 * Releases a Q-network handle. Null is ignored.
 *
 * # Safety
 * `net` must be null or a handle from [`uavfarm_qnet_load`] not yet freed.
 */
void uavfarm_qnet_free(struct UavQNet *net);

/**
 * Input width, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t uavfarm_qnet_input_len(const struct UavQNet *net);

/**
 * Output width (number of actions), or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t uavfarm_qnet_output_len(const struct UavQNet *net);

/**
 * Evaluates the network on one state.
 *
 * # Safety
 * `net` must be a live handle, `input` readable for `in_len` and `output`
 * writable for `out_len` doubles.
 */
enum UavStatus uavfarm_qnet_forward(const struct UavQNet *net,
                                    const double *input,
                                    size_t in_len,
                                    double *output,
                                    size_t out_len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UAVFARM_H */
