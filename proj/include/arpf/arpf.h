/* Copyright 2026 The arpf authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the arpf distributed particle-filtering library.
 *
 * All objects are opaque handles created and destroyed by the library.
 * Functions return ARPF_OK on success; on failure they return a status code
 * and leave a human-readable message in arpf_last_error() (thread-local).
 * Output parameters are untouched on failure unless noted.
 */

#ifndef ARPF_ARPF_H_
#define ARPF_ARPF_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum arpf_status {
  ARPF_OK = 0,
  ARPF_ERROR_INVALID_ARGUMENT = 1,
  ARPF_ERROR_IO = 2,
  ARPF_ERROR_PARSE = 3,
  ARPF_ERROR_DIVERGENCE = 4, /* no replicate finished without weight collapse */
  ARPF_ERROR_INTERNAL = 5
} arpf_status;

typedef struct arpf_config arpf_config;   /* scenario configuration */
typedef struct arpf_scene arpf_scene;     /* ground truth + rendered frames */
typedef struct arpf_results arpf_results; /* per-iteration rows + summaries */

/* One CSV row: per-iteration metrics of one replicate. */
typedef struct arpf_row {
  uint32_t run_id;
  uint32_t iteration;
  double pe_eff;       /* effective PE count, in [1, M] */
  double pe_eff_frac;  /* pe_eff / M */
  double err_px;       /* position error of the global estimate */
  uint64_t exchanged;  /* particles moved this iteration */
  uint64_t messages;   /* payload messages this iteration */
  uint64_t bytes;      /* payload bytes this iteration */
} arpf_row;

typedef struct arpf_run_summary {
  uint32_t run_id;
  uint32_t iterations;
  double rmse_px;
  uint64_t total_exchanged;
  uint64_t total_messages;
  uint64_t total_bytes;
  double wall_time_s; /* 0 for results loaded from CSV */
  int flagged;        /* 1 if the run stopped on divergence */
} arpf_run_summary;

const char * arpf_version(void);
const char * arpf_status_name(arpf_status status);

/* Message of the last failure on this thread; empty string if none. */
const char * arpf_last_error(void);

/* --- configuration ------------------------------------------------------ */

/* A fresh config with library defaults. Free with arpf_config_free. */
arpf_config * arpf_config_new(void);
void arpf_config_free(arpf_config * config);

/* Loads a JSON config file over the current values. */
arpf_status arpf_config_load_file(arpf_config * config, const char * path);

/* Sets one key (same names as the config file / CLI flags, e.g. "pes",
 * "algo", "sigma_psf") from its string form. */
arpf_status arpf_config_set(arpf_config * config, const char * key, const char * value);

/* Reads one key back in the same string form. Writes at most buflen bytes
 * (always NUL-terminated); fails with ARPF_ERROR_INVALID_ARGUMENT when the
 * buffer is too small or the key is unknown. */
arpf_status arpf_config_get(const arpf_config * config, const char * key, char * buf,
  size_t buflen);

arpf_status arpf_config_write_file(const arpf_config * config, const char * path);

/* --- scenes --------------------------------------------------------------*/

/* Generates the scene the config describes, from the given seed. */
arpf_status arpf_scene_generate(const arpf_config * config, uint64_t seed, arpf_scene ** out);
arpf_status arpf_scene_load(const char * path, arpf_scene ** out);
arpf_status arpf_scene_save(const arpf_scene * scene, const char * path);
void arpf_scene_free(arpf_scene * scene);

uint32_t arpf_scene_width(const arpf_scene * scene);
uint32_t arpf_scene_height(const arpf_scene * scene);
uint32_t arpf_scene_frame_count(const arpf_scene * scene);

/* Ground-truth state (x, y, vx, vy, i0) at a frame. */
arpf_status arpf_scene_truth(const arpf_scene * scene, uint32_t frame, double out_state[5]);

/* Borrowed pointer to a frame's row-major pixel counts; valid until the
 * scene is freed. */
arpf_status arpf_scene_frame_pixels(const arpf_scene * scene, uint32_t frame,
  const double ** pixels, size_t * count);

/* --- runs ----------------------------------------------------------------*/

/* Runs all replicates of the configured scenario, generating one scene per
 * replicate. On ARPF_ERROR_DIVERGENCE (every replicate flagged) *out is
 * still populated with the flagged runs. */
arpf_status arpf_run(const arpf_config * config, arpf_results ** out);

/* Same, but every replicate runs against the given scene. */
arpf_status arpf_run_with_scene(const arpf_config * config, const arpf_scene * scene,
  arpf_results ** out);

void arpf_results_free(arpf_results * results);

size_t arpf_results_row_count(const arpf_results * results);
arpf_status arpf_results_row(const arpf_results * results, size_t index, arpf_row * out);

size_t arpf_results_run_count(const arpf_results * results);
arpf_status arpf_results_run_summary(const arpf_results * results, size_t index,
  arpf_run_summary * out);

/* CSV with the fixed header
 *   run_id,iteration,pe_eff,pe_eff_frac,err_px,exchanged,messages,bytes
 * and a JSON summary (per-run RMSE, totals, wall time, flags). */
arpf_status arpf_results_write_csv(const arpf_results * results, const char * path);
arpf_status arpf_results_write_summary(const arpf_results * results, const char * path);
arpf_status arpf_results_load_csv(const char * path, arpf_results ** out);

#ifdef __cplusplus
}
#endif

#endif /* ARPF_ARPF_H_ */
