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

#ifndef ARPF_BENCH_HPP_
#define ARPF_BENCH_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpf.hpp"
#include "synth.hpp"

namespace arpf
{

enum class Mode { tracking, info_sharing };
enum class Algo { sir_independent, rna_fixed, arna };

/// One benchmark scenario; every field has a config-file key and a CLI flag
/// of the same name.
struct ScenarioConfig
{
  Mode mode = Mode::tracking;
  Algo algo = Algo::arna;
  double ratio = 0.1;  // rna_fixed exchange ratio, in [0, 0.5]
  std::uint32_t pes = 24;
  std::uint32_t particles_per_pe = 40;
  std::uint32_t frames = 50;
  double snr = 2.0;
  std::uint64_t seed = 1;
  std::uint32_t replicates = 1;
  double cutoff = 0.99;
  Backend backend = Backend::sequential;
  std::string out = "results";
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  DynamicsParams dynamics;
  ObservationParams observation;  // width/height taken from the fields above
  double v_max = 2.0;       // info-sharing velocity init bound (px/frame)
  double scene_speed = 1.0; // truth speed at frame 0 (px/frame)
  bool init_jitter = true;
  bool noise_free = false;
};

struct RunRow
{
  std::uint32_t run_id = 0;
  std::uint32_t iteration = 0;
  double pe_eff = 0.0;
  double pe_eff_frac = 0.0;
  double err_px = 0.0;
  std::uint64_t exchanged = 0;
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct RunRecord
{
  std::uint32_t run_id = 0;
  std::vector<RunRow> rows;
  std::vector<std::uint32_t> degenerate_iterations;
  double rmse_px = 0.0;
  std::uint64_t total_exchanged = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t total_bytes = 0;
  double wall_time_s = 0.0;
  bool flagged = false;  // run stopped on divergence
};

struct ResultSet
{
  ScenarioConfig config;
  std::vector<RunRecord> runs;
};

Mode parse_mode(const std::string & s);
Algo parse_algo(const std::string & s);
Backend parse_backend(const std::string & s);
std::string to_string(Mode m);
std::string to_string(Algo a);
std::string to_string(Backend b);

void validate(const ScenarioConfig & cfg);

/// The scene a config describes (dims, frame count, snr, model, noise mode).
SceneParams scene_params(const ScenarioConfig & cfg);

/// Per-PE states with their private streams, empty ensembles.
std::vector<PEState> make_pes(const ScenarioConfig & cfg, std::uint64_t replicate_root);

/// All particles on all PEs at the frame-0 truth, plus one step of dynamics
/// noise per particle unless init_jitter is off; uniform weights.
void init_tracking(const ScenarioConfig & cfg, const Scene & scene, std::vector<PEState> & pes);

/// PE 0 at truth as in tracking; all other PEs uniform over position, with
/// velocities in [-v_max, v_max]^2 and intensity in [0, 2 i0_true].
void init_info_sharing(const ScenarioConfig & cfg, const Scene & scene,
  std::vector<PEState> & pes);

/// Root-mean-square position error over frames, in pixels.
double rmse(std::span<const StateVector> estimates, const Trajectory & truth);

/// Generated scenes keyed by (params, seed); lets paired arms share scenes.
class SceneCache
{
public:
  const Scene & get(const SceneParams & params, std::uint64_t seed);

private:
  struct Entry
  {
    SceneParams params;
    std::uint64_t seed;
    Scene scene;
  };
  std::vector<Entry> entries_;
};

/// One replicate on the given scene. `rep` selects the replicate's random
/// streams, so records depend only on (cfg, rep, scene) and not on execution
/// order.
RunRecord run_replicate(const ScenarioConfig & cfg, std::uint32_t rep, const Scene & scene);

/// Generates (or takes from the cache) one scene per replicate and runs the
/// configured algorithm over it. Divergence flags the run instead of
/// aborting the set.
ResultSet run_scenario(const ScenarioConfig & cfg, SceneCache * cache = nullptr);

/// All replicates against one fixed scene (e.g. a loaded container).
ResultSet run_scenario_with_scene(const ScenarioConfig & cfg, const Scene & scene);

inline constexpr const char * kCsvHeader =
  "run_id,iteration,pe_eff,pe_eff_frac,err_px,exchanged,messages,bytes";

void write_csv(const ResultSet & results, const std::string & path);
void write_summary(const ResultSet & results, const std::string & path);

/// Reads rows written by write_csv; per-run totals and RMSE are recomputed
/// from the rows (wall time and flags live in the summary file only).
ResultSet load_csv(const std::string & path);

/// Applies one config-file key / CLI flag value; throws InvalidArgument for
/// unknown keys or unparseable values.
void apply_key_value(ScenarioConfig & cfg, const std::string & key, const std::string & value);

/// Current value of a config key, in the same string form apply_key_value
/// accepts.
std::string get_key_value(const ScenarioConfig & cfg, const std::string & key);

ScenarioConfig load_config_file(const std::string & path);
void write_config_file(const ScenarioConfig & cfg, const std::string & path);

}  // namespace arpf

#endif  // ARPF_BENCH_HPP_
