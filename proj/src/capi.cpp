// Copyright 2026 The arpf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "arpf/arpf.h"

#include <algorithm>
#include <exception>
#include <string>
#include <utility>

#include "bench.hpp"
#include "errors.hpp"
#include "synth.hpp"

struct arpf_config
{
  arpf::ScenarioConfig cfg;
};

struct arpf_scene
{
  arpf::Scene scene;
};

struct arpf_results
{
  arpf::ResultSet results;
};

namespace
{

thread_local std::string g_last_error;

void set_error(const std::string & message)
{
  g_last_error = message;
}

/// Runs `fn`, translating exceptions into status codes + the thread-local
/// error message.
template <typename Fn>
arpf_status guarded(Fn && fn)
{
  try {
    g_last_error.clear();
    fn();
    return ARPF_OK;
  } catch (const arpf::InvalidArgument & e) {
    set_error(e.what());
    return ARPF_ERROR_INVALID_ARGUMENT;
  } catch (const arpf::DivergenceError & e) {
    set_error(e.what());
    return ARPF_ERROR_DIVERGENCE;
  } catch (const arpf::IoError & e) {
    set_error(e.what());
    return ARPF_ERROR_IO;
  } catch (const arpf::ParseError & e) {
    set_error(e.what());
    return ARPF_ERROR_PARSE;
  } catch (const std::exception & e) {
    set_error(e.what());
    return ARPF_ERROR_INTERNAL;
  } catch (...) {
    set_error("unknown error");
    return ARPF_ERROR_INTERNAL;
  }
}

arpf_status finish_run(arpf::ResultSet results, arpf_results ** out)
{
  const bool any_success =
    results.runs.empty() ||
    std::any_of(results.runs.begin(), results.runs.end(),
      [](const arpf::RunRecord & r) { return !r.flagged; });
  *out = new arpf_results{std::move(results)};
  if (!any_success) {
    set_error("every replicate diverged");
    return ARPF_ERROR_DIVERGENCE;
  }
  return ARPF_OK;
}

}  // namespace

extern "C" {

const char * arpf_version(void)
{
#ifdef ARPF_VERSION
  return ARPF_VERSION;
#else
  return "0.0.0";
#endif
}

const char * arpf_status_name(arpf_status status)
{
  switch (status) {
    case ARPF_OK:
      return "ok";
    case ARPF_ERROR_INVALID_ARGUMENT:
      return "invalid argument";
    case ARPF_ERROR_IO:
      return "i/o error";
    case ARPF_ERROR_PARSE:
      return "parse error";
    case ARPF_ERROR_DIVERGENCE:
      return "divergence";
    case ARPF_ERROR_INTERNAL:
    default:
      return "internal error";
  }
}

const char * arpf_last_error(void)
{
  return g_last_error.c_str();
}

arpf_config * arpf_config_new(void)
{
  return new arpf_config{};
}

void arpf_config_free(arpf_config * config)
{
  delete config;
}

arpf_status arpf_config_load_file(arpf_config * config, const char * path)
{
  if (config == nullptr || path == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { config->cfg = arpf::load_config_file(path); });
}

arpf_status arpf_config_set(arpf_config * config, const char * key, const char * value)
{
  if (config == nullptr || key == nullptr || value == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { arpf::apply_key_value(config->cfg, key, value); });
}

arpf_status arpf_config_get(const arpf_config * config, const char * key, char * buf,
  size_t buflen)
{
  if (config == nullptr || key == nullptr || buf == nullptr || buflen == 0) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const std::string value = arpf::get_key_value(config->cfg, key);
    if (value.size() + 1 > buflen) {
      throw arpf::InvalidArgument("buffer too small for config value");
    }
    std::copy(value.begin(), value.end(), buf);
    buf[value.size()] = '\0';
  });
}

arpf_status arpf_config_write_file(const arpf_config * config, const char * path)
{
  if (config == nullptr || path == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { arpf::write_config_file(config->cfg, path); });
}

arpf_status arpf_scene_generate(const arpf_config * config, uint64_t seed, arpf_scene ** out)
{
  if (config == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    arpf::validate(config->cfg);
    *out = new arpf_scene{arpf::make_scene(arpf::scene_params(config->cfg), seed)};
  });
}

arpf_status arpf_scene_load(const char * path, arpf_scene ** out)
{
  if (path == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out = new arpf_scene{arpf::load_scene(path)}; });
}

arpf_status arpf_scene_save(const arpf_scene * scene, const char * path)
{
  if (scene == nullptr || path == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { arpf::save_scene(scene->scene, path); });
}

void arpf_scene_free(arpf_scene * scene)
{
  delete scene;
}

uint32_t arpf_scene_width(const arpf_scene * scene)
{
  return scene != nullptr ? scene->scene.width : 0;
}

uint32_t arpf_scene_height(const arpf_scene * scene)
{
  return scene != nullptr ? scene->scene.height : 0;
}

uint32_t arpf_scene_frame_count(const arpf_scene * scene)
{
  return scene != nullptr ? static_cast<uint32_t>(scene->scene.frames.size()) : 0;
}

arpf_status arpf_scene_truth(const arpf_scene * scene, uint32_t frame, double out_state[5])
{
  if (scene == nullptr || out_state == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  if (frame >= scene->scene.trajectory.states.size()) {
    set_error("frame index out of range");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  const arpf::StateVector & s = scene->scene.trajectory.states[frame];
  out_state[0] = s.x;
  out_state[1] = s.y;
  out_state[2] = s.vx;
  out_state[3] = s.vy;
  out_state[4] = s.i0;
  return ARPF_OK;
}

arpf_status arpf_scene_frame_pixels(const arpf_scene * scene, uint32_t frame,
  const double ** pixels, size_t * count)
{
  if (scene == nullptr || pixels == nullptr || count == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  if (frame >= scene->scene.frames.size()) {
    set_error("frame index out of range");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  *pixels = scene->scene.frames[frame].pixels.data();
  *count = scene->scene.frames[frame].pixels.size();
  return ARPF_OK;
}

arpf_status arpf_run(const arpf_config * config, arpf_results ** out)
{
  if (config == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  arpf_status status = ARPF_OK;
  const arpf_status guard = guarded([&] {
    arpf::ResultSet rs = arpf::run_scenario(config->cfg);
    status = finish_run(std::move(rs), out);
  });
  return guard != ARPF_OK ? guard : status;
}

arpf_status arpf_run_with_scene(const arpf_config * config, const arpf_scene * scene,
  arpf_results ** out)
{
  if (config == nullptr || scene == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  arpf_status status = ARPF_OK;
  const arpf_status guard = guarded([&] {
    arpf::ResultSet rs = arpf::run_scenario_with_scene(config->cfg, scene->scene);
    status = finish_run(std::move(rs), out);
  });
  return guard != ARPF_OK ? guard : status;
}

void arpf_results_free(arpf_results * results)
{
  delete results;
}

size_t arpf_results_row_count(const arpf_results * results)
{
  if (results == nullptr) {
    return 0;
  }
  size_t n = 0;
  for (const arpf::RunRecord & run : results->results.runs) {
    n += run.rows.size();
  }
  return n;
}

arpf_status arpf_results_row(const arpf_results * results, size_t index, arpf_row * out)
{
  if (results == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  for (const arpf::RunRecord & run : results->results.runs) {
    if (index < run.rows.size()) {
      const arpf::RunRow & r = run.rows[index];
      *out = arpf_row{r.run_id, r.iteration, r.pe_eff, r.pe_eff_frac, r.err_px, r.exchanged,
        r.messages, r.bytes};
      return ARPF_OK;
    }
    index -= run.rows.size();
  }
  set_error("row index out of range");
  return ARPF_ERROR_INVALID_ARGUMENT;
}

size_t arpf_results_run_count(const arpf_results * results)
{
  return results != nullptr ? results->results.runs.size() : 0;
}

arpf_status arpf_results_run_summary(const arpf_results * results, size_t index,
  arpf_run_summary * out)
{
  if (results == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  if (index >= results->results.runs.size()) {
    set_error("run index out of range");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  const arpf::RunRecord & run = results->results.runs[index];
  out->run_id = run.run_id;
  out->iterations = static_cast<uint32_t>(run.rows.size());
  out->rmse_px = run.rmse_px;
  out->total_exchanged = run.total_exchanged;
  out->total_messages = run.total_messages;
  out->total_bytes = run.total_bytes;
  out->wall_time_s = run.wall_time_s;
  out->flagged = run.flagged ? 1 : 0;
  return ARPF_OK;
}

arpf_status arpf_results_write_csv(const arpf_results * results, const char * path)
{
  if (results == nullptr || path == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { arpf::write_csv(results->results, path); });
}

arpf_status arpf_results_write_summary(const arpf_results * results, const char * path)
{
  if (results == nullptr || path == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { arpf::write_summary(results->results, path); });
}

arpf_status arpf_results_load_csv(const char * path, arpf_results ** out)
{
  if (path == nullptr || out == nullptr) {
    set_error("null argument");
    return ARPF_ERROR_INVALID_ARGUMENT;
  }
  return guarded([&] { *out = new arpf_results{arpf::load_csv(path)}; });
}

}  // extern "C"
