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

#include "bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "errors.hpp"

namespace arpf
{

namespace
{

using nlohmann::json;

std::string format_double(double v)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const char * what)
{
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(std::string("cannot parse number for ") + what + ": '" + std::string(s) + "'");
  }
  return v;
}

std::uint64_t parse_u64(std::string_view s, const char * what)
{
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ParseError(std::string("cannot parse integer for ") + what + ": '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(const std::string & s, const char * what)
{
  if (s == "true" || s == "1") {
    return true;
  }
  if (s == "false" || s == "0") {
    return false;
  }
  throw ParseError(std::string("cannot parse boolean for ") + what + ": '" + s + "'");
}

void fill_at_truth(const ScenarioConfig & cfg, const StateVector & truth0, PEState & pe)
{
  const double logw = -std::log(static_cast<double>(cfg.particles_per_pe));
  pe.particles.clear();
  pe.particles.reserve(cfg.particles_per_pe);
  for (std::uint32_t i = 0; i < cfg.particles_per_pe; ++i) {
    const StateVector s =
      cfg.init_jitter ? jitter_state(truth0, cfg.dynamics, pe.rng) : truth0;
    pe.particles.push_back(Particle{s, logw, static_cast<std::int32_t>(pe.id)});
  }
}

ExchangePolicy policy_for(const ScenarioConfig & cfg)
{
  ExchangePolicy p;
  switch (cfg.algo) {
    case Algo::sir_independent:
      p.mode = ExchangePolicy::Mode::sir_independent;
      break;
    case Algo::rna_fixed:
      p.mode = ExchangePolicy::Mode::fixed;
      break;
    case Algo::arna:
      p.mode = ExchangePolicy::Mode::adaptive;
      break;
  }
  p.fixed_ratio = cfg.ratio;
  p.cutoff = cfg.cutoff;
  return p;
}

void finalize_record(RunRecord & rec)
{
  double acc = 0.0;
  for (const RunRow & row : rec.rows) {
    acc += row.err_px * row.err_px;
    rec.total_exchanged += row.exchanged;
    rec.total_messages += row.messages;
    rec.total_bytes += row.bytes;
  }
  rec.rmse_px = rec.rows.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(rec.rows.size()));
}

json config_to_json(const ScenarioConfig & cfg)
{
  json j;
  j["mode"] = to_string(cfg.mode);
  j["algo"] = to_string(cfg.algo);
  j["ratio"] = cfg.ratio;
  j["pes"] = cfg.pes;
  j["particles_per_pe"] = cfg.particles_per_pe;
  j["frames"] = cfg.frames;
  j["snr"] = cfg.snr;
  j["seed"] = cfg.seed;
  j["replicates"] = cfg.replicates;
  j["cutoff"] = cfg.cutoff;
  j["backend"] = to_string(cfg.backend);
  j["out"] = cfg.out;
  j["width"] = cfg.width;
  j["height"] = cfg.height;
  j["sigma_pos"] = cfg.dynamics.sigma_pos;
  j["sigma_vel"] = cfg.dynamics.sigma_vel;
  j["sigma_i"] = cfg.dynamics.sigma_i;
  j["sigma_psf"] = cfg.observation.sigma_psf;
  j["background"] = cfg.observation.background;
  j["roi_radius"] = cfg.observation.roi_radius;
  j["v_max"] = cfg.v_max;
  j["scene_speed"] = cfg.scene_speed;
  j["init_jitter"] = cfg.init_jitter;
  j["noise_free"] = cfg.noise_free;
  return j;
}

}  // namespace

Mode parse_mode(const std::string & s)
{
  if (s == "tracking") {
    return Mode::tracking;
  }
  if (s == "info_sharing" || s == "info-sharing") {
    return Mode::info_sharing;
  }
  throw InvalidArgument("mode must be 'tracking' or 'info_sharing', got '" + s + "'");
}

Algo parse_algo(const std::string & s)
{
  if (s == "sir") {
    return Algo::sir_independent;
  }
  if (s == "rna") {
    return Algo::rna_fixed;
  }
  if (s == "arna") {
    return Algo::arna;
  }
  throw InvalidArgument("algo must be 'sir', 'rna' or 'arna', got '" + s + "'");
}

Backend parse_backend(const std::string & s)
{
  if (s == "sequential") {
    return Backend::sequential;
  }
  if (s == "parallel") {
    return Backend::parallel;
  }
  throw InvalidArgument("backend must be 'sequential' or 'parallel', got '" + s + "'");
}

std::string to_string(Mode m)
{
  return m == Mode::tracking ? "tracking" : "info_sharing";
}

std::string to_string(Algo a)
{
  switch (a) {
    case Algo::sir_independent:
      return "sir";
    case Algo::rna_fixed:
      return "rna";
    case Algo::arna:
    default:
      return "arna";
  }
}

std::string to_string(Backend b)
{
  return b == Backend::sequential ? "sequential" : "parallel";
}

void validate(const ScenarioConfig & cfg)
{
  if (cfg.pes < 1) {
    throw InvalidArgument("config: pes must be >= 1");
  }
  if (cfg.particles_per_pe < 1) {
    throw InvalidArgument("config: particles_per_pe must be >= 1");
  }
  if (cfg.frames < 1) {
    throw InvalidArgument("config: frames must be >= 1");
  }
  if (!(cfg.ratio >= 0.0) || cfg.ratio > 0.5) {
    throw InvalidArgument("config: ratio must be in [0, 0.5]");
  }
  if (!(cfg.cutoff > 0.0) || cfg.cutoff > 1.0) {
    throw InvalidArgument("config: cutoff must be in (0, 1]");
  }
  if (!(cfg.snr > 0.0)) {
    throw InvalidArgument("config: snr must be > 0");
  }
  if (cfg.width < 16 || cfg.height < 16) {
    throw InvalidArgument("config: frames must be at least 16x16 px");
  }
  validate(cfg.dynamics);
  ObservationParams obs = cfg.observation;
  obs.width = cfg.width;
  obs.height = cfg.height;
  validate(obs);
}

SceneParams scene_params(const ScenarioConfig & cfg)
{
  SceneParams sp;
  sp.width = cfg.width;
  sp.height = cfg.height;
  sp.frame_count = cfg.frames;
  sp.snr = cfg.snr;
  sp.noise_free = cfg.noise_free;
  sp.init_speed = cfg.scene_speed;
  sp.dynamics = cfg.dynamics;
  sp.observation = cfg.observation;
  return sp;
}

std::vector<PEState> make_pes(const ScenarioConfig & cfg, std::uint64_t replicate_root)
{
  std::vector<PEState> pes;
  pes.reserve(cfg.pes);
  for (std::uint32_t i = 0; i < cfg.pes; ++i) {
    pes.push_back(PEState{i, {}, Rng(mix_seed(replicate_root, {streams::pe, i}))});
  }
  return pes;
}

void init_tracking(const ScenarioConfig & cfg, const Scene & scene, std::vector<PEState> & pes)
{
  if (scene.trajectory.states.empty()) {
    throw InvalidArgument("init: scene has no frames");
  }
  const StateVector truth0 = scene.trajectory.states.front();
  for (PEState & pe : pes) {
    fill_at_truth(cfg, truth0, pe);
  }
}

void init_info_sharing(const ScenarioConfig & cfg, const Scene & scene,
  std::vector<PEState> & pes)
{
  if (scene.trajectory.states.empty()) {
    throw InvalidArgument("init: scene has no frames");
  }
  const StateVector truth0 = scene.trajectory.states.front();
  const double logw = -std::log(static_cast<double>(cfg.particles_per_pe));
  for (PEState & pe : pes) {
    if (pe.id == 0) {
      fill_at_truth(cfg, truth0, pe);
      continue;
    }
    pe.particles.clear();
    pe.particles.reserve(cfg.particles_per_pe);
    for (std::uint32_t i = 0; i < cfg.particles_per_pe; ++i) {
      StateVector s;
      s.x = pe.rng.uniform(0.0, static_cast<double>(scene.width));
      s.y = pe.rng.uniform(0.0, static_cast<double>(scene.height));
      s.vx = pe.rng.uniform(-cfg.v_max, cfg.v_max);
      s.vy = pe.rng.uniform(-cfg.v_max, cfg.v_max);
      s.i0 = pe.rng.uniform(0.0, 2.0 * truth0.i0);
      pe.particles.push_back(Particle{s, logw, static_cast<std::int32_t>(pe.id)});
    }
  }
}

double rmse(std::span<const StateVector> estimates, const Trajectory & truth)
{
  if (estimates.size() != truth.states.size()) {
    throw InvalidArgument("rmse: estimate and truth lengths differ");
  }
  if (estimates.empty()) {
    return 0.0;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double dx = estimates[i].x - truth.states[i].x;
    const double dy = estimates[i].y - truth.states[i].y;
    acc += dx * dx + dy * dy;
  }
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

const Scene & SceneCache::get(const SceneParams & params, std::uint64_t seed)
{
  for (const Entry & e : entries_) {
    if (e.seed == seed && e.params == params) {
      return e.scene;
    }
  }
  entries_.push_back(Entry{params, seed, make_scene(params, seed)});
  return entries_.back().scene;
}

RunRecord run_replicate(const ScenarioConfig & cfg, std::uint32_t rep, const Scene & scene)
{
  const std::uint64_t root = mix_seed(cfg.seed, {rep});
  std::vector<PEState> pes = make_pes(cfg, root);
  if (cfg.mode == Mode::tracking) {
    init_tracking(cfg, scene, pes);
  } else {
    init_info_sharing(cfg, scene, pes);
  }

  GlobalReduction initial;
  initial.log_total_weight = 0.0;
  initial.pe_eff = cfg.mode == Mode::tracking ? static_cast<double>(cfg.pes) : 1.0;

  ObservationParams obs = cfg.observation;
  obs.width = scene.width;
  obs.height = scene.height;

  Rng coordinator(mix_seed(root, {streams::coordinator}));

  const auto t0 = std::chrono::steady_clock::now();
  const FilterRun fr = run_filter(pes, scene.frames, cfg.dynamics, obs, policy_for(cfg), initial,
    cfg.backend, coordinator);
  const auto t1 = std::chrono::steady_clock::now();

  RunRecord rec;
  rec.run_id = rep;
  rec.flagged = fr.diverged;
  rec.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
  rec.rows.reserve(fr.records.size());
  for (std::size_t k = 0; k < fr.records.size(); ++k) {
    const IterationRecord & it = fr.records[k];
    RunRow row;
    row.run_id = rep;
    row.iteration = static_cast<std::uint32_t>(k);
    row.pe_eff = it.reduction.pe_eff;
    row.pe_eff_frac = it.reduction.pe_eff / static_cast<double>(cfg.pes);
    const StateVector & truth = scene.trajectory.states[k];
    row.err_px = std::hypot(it.reduction.estimate.x - truth.x, it.reduction.estimate.y - truth.y);
    row.exchanged = it.exchanged;
    row.messages = it.messages;
    row.bytes = it.bytes;
    rec.rows.push_back(row);
    if (it.degenerate) {
      rec.degenerate_iterations.push_back(static_cast<std::uint32_t>(k));
    }
  }
  finalize_record(rec);
  return rec;
}

ResultSet run_scenario(const ScenarioConfig & cfg, SceneCache * cache)
{
  validate(cfg);
  ResultSet rs;
  rs.config = cfg;
  const SceneParams sp = scene_params(cfg);
  for (std::uint32_t rep = 0; rep < cfg.replicates; ++rep) {
    const std::uint64_t root = mix_seed(cfg.seed, {rep});
    const std::uint64_t scene_seed = mix_seed(root, {streams::scene});
    if (cache != nullptr) {
      rs.runs.push_back(run_replicate(cfg, rep, cache->get(sp, scene_seed)));
    } else {
      const Scene scene = make_scene(sp, scene_seed);
      rs.runs.push_back(run_replicate(cfg, rep, scene));
    }
  }
  return rs;
}

ResultSet run_scenario_with_scene(const ScenarioConfig & cfg, const Scene & scene)
{
  validate(cfg);
  if (scene.frames.empty()) {
    throw InvalidArgument("run: scene has no frames");
  }
  ResultSet rs;
  rs.config = cfg;
  for (std::uint32_t rep = 0; rep < cfg.replicates; ++rep) {
    rs.runs.push_back(run_replicate(cfg, rep, scene));
  }
  return rs;
}

void write_csv(const ResultSet & results, const std::string & path)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open CSV for writing: " + path);
  }
  out << kCsvHeader << '\n';
  for (const RunRecord & run : results.runs) {
    for (const RunRow & r : run.rows) {
      out << r.run_id << ',' << r.iteration << ',' << format_double(r.pe_eff) << ','
          << format_double(r.pe_eff_frac) << ',' << format_double(r.err_px) << ',' << r.exchanged
          << ',' << r.messages << ',' << r.bytes << '\n';
    }
  }
  if (!out) {
    throw IoError("short write on CSV: " + path);
  }
}

void write_summary(const ResultSet & results, const std::string & path)
{
  json j;
  j["config"] = config_to_json(results.config);
  json runs = json::array();
  std::vector<double> rmses;
  std::vector<double> final_fracs;
  for (const RunRecord & run : results.runs) {
    json r;
    r["run_id"] = run.run_id;
    r["iterations"] = run.rows.size();
    r["rmse_px"] = run.rmse_px;
    r["total_exchanged"] = run.total_exchanged;
    r["total_messages"] = run.total_messages;
    r["total_bytes"] = run.total_bytes;
    r["wall_time_s"] = run.wall_time_s;
    r["flagged"] = run.flagged;
    r["degenerate_iterations"] = run.degenerate_iterations;
    runs.push_back(std::move(r));
    if (!run.flagged) {
      rmses.push_back(run.rmse_px);
      if (!run.rows.empty()) {
        final_fracs.push_back(run.rows.back().pe_eff_frac);
      }
    }
  }
  j["runs"] = std::move(runs);

  json agg;
  agg["successful_runs"] = rmses.size();
  if (!rmses.empty()) {
    double mean = 0.0;
    for (double v : rmses) {
      mean += v;
    }
    agg["mean_rmse_px"] = mean / static_cast<double>(rmses.size());
  } else {
    agg["mean_rmse_px"] = nullptr;
  }
  if (!final_fracs.empty()) {
    std::sort(final_fracs.begin(), final_fracs.end());
    agg["median_final_pe_eff_frac"] = final_fracs[final_fracs.size() / 2];
  } else {
    agg["median_final_pe_eff_frac"] = nullptr;
  }
  j["aggregate"] = std::move(agg);

  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open summary for writing: " + path);
  }
  out << j.dump(2) << '\n';
  if (!out) {
    throw IoError("short write on summary: " + path);
  }
}

ResultSet load_csv(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open CSV: " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ParseError("unexpected CSV header in " + path);
  }
  ResultSet rs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != 8) {
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected 8 fields");
    }
    RunRow row;
    row.run_id = static_cast<std::uint32_t>(parse_u64(fields[0], "run_id"));
    row.iteration = static_cast<std::uint32_t>(parse_u64(fields[1], "iteration"));
    row.pe_eff = parse_double(fields[2], "pe_eff");
    row.pe_eff_frac = parse_double(fields[3], "pe_eff_frac");
    row.err_px = parse_double(fields[4], "err_px");
    row.exchanged = parse_u64(fields[5], "exchanged");
    row.messages = parse_u64(fields[6], "messages");
    row.bytes = parse_u64(fields[7], "bytes");
    if (rs.runs.empty() || rs.runs.back().run_id != row.run_id) {
      RunRecord rec;
      rec.run_id = row.run_id;
      rs.runs.push_back(std::move(rec));
    }
    rs.runs.back().rows.push_back(row);
  }
  for (RunRecord & run : rs.runs) {
    finalize_record(run);
  }
  return rs;
}

void apply_key_value(ScenarioConfig & cfg, const std::string & key, const std::string & value)
{
  try {
    if (key == "mode") {
      cfg.mode = parse_mode(value);
    } else if (key == "algo") {
      cfg.algo = parse_algo(value);
    } else if (key == "ratio") {
      cfg.ratio = parse_double(value, key.c_str());
    } else if (key == "pes") {
      cfg.pes = static_cast<std::uint32_t>(parse_u64(value, key.c_str()));
    } else if (key == "particles_per_pe") {
      cfg.particles_per_pe = static_cast<std::uint32_t>(parse_u64(value, key.c_str()));
    } else if (key == "frames") {
      cfg.frames = static_cast<std::uint32_t>(parse_u64(value, key.c_str()));
    } else if (key == "snr") {
      cfg.snr = parse_double(value, key.c_str());
    } else if (key == "seed") {
      cfg.seed = parse_u64(value, key.c_str());
    } else if (key == "replicates") {
      cfg.replicates = static_cast<std::uint32_t>(parse_u64(value, key.c_str()));
    } else if (key == "cutoff") {
      cfg.cutoff = parse_double(value, key.c_str());
    } else if (key == "backend") {
      cfg.backend = parse_backend(value);
    } else if (key == "out") {
      cfg.out = value;
    } else if (key == "width") {
      cfg.width = static_cast<std::uint32_t>(parse_u64(value, key.c_str()));
    } else if (key == "height") {
      cfg.height = static_cast<std::uint32_t>(parse_u64(value, key.c_str()));
    } else if (key == "sigma_pos") {
      cfg.dynamics.sigma_pos = parse_double(value, key.c_str());
    } else if (key == "sigma_vel") {
      cfg.dynamics.sigma_vel = parse_double(value, key.c_str());
    } else if (key == "sigma_i") {
      cfg.dynamics.sigma_i = parse_double(value, key.c_str());
    } else if (key == "sigma_psf") {
      cfg.observation.sigma_psf = parse_double(value, key.c_str());
    } else if (key == "background") {
      cfg.observation.background = parse_double(value, key.c_str());
    } else if (key == "roi_radius") {
      cfg.observation.roi_radius = static_cast<int>(parse_u64(value, key.c_str()));
    } else if (key == "v_max") {
      cfg.v_max = parse_double(value, key.c_str());
    } else if (key == "scene_speed") {
      cfg.scene_speed = parse_double(value, key.c_str());
    } else if (key == "init_jitter") {
      cfg.init_jitter = parse_bool(value, key.c_str());
    } else if (key == "noise_free") {
      cfg.noise_free = parse_bool(value, key.c_str());
    } else {
      throw InvalidArgument("unknown config key: '" + key + "'");
    }
  } catch (const ParseError & e) {
    throw InvalidArgument(e.what());
  }
}

std::string get_key_value(const ScenarioConfig & cfg, const std::string & key)
{
  const json j = config_to_json(cfg);
  if (!j.contains(key)) {
    throw InvalidArgument("unknown config key: '" + key + "'");
  }
  const json & value = j.at(key);
  if (value.is_string()) {
    return value.get<std::string>();
  }
  if (value.is_boolean()) {
    return value.get<bool>() ? "true" : "false";
  }
  return value.dump();
}

ScenarioConfig load_config_file(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file: " + path);
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception & e) {
    throw ParseError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ParseError("config file " + path + ": expected a JSON object");
  }
  ScenarioConfig cfg;
  for (const auto & [key, value] : j.items()) {
    std::string s;
    if (value.is_string()) {
      s = value.get<std::string>();
    } else if (value.is_boolean()) {
      s = value.get<bool>() ? "true" : "false";
    } else {
      s = value.dump();
    }
    apply_key_value(cfg, key, s);
  }
  return cfg;
}

void write_config_file(const ScenarioConfig & cfg, const std::string & path)
{
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw IoError("cannot open config file for writing: " + path);
  }
  out << config_to_json(cfg).dump(2) << '\n';
  if (!out) {
    throw IoError("short write on config file: " + path);
  }
}

}  // namespace arpf
