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

// Benchmark driver built entirely on the shared-library C interface.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arpf/arpf.h"

namespace
{

struct ConfigDeleter
{
  void operator()(arpf_config * c) const { arpf_config_free(c); }
};
struct SceneDeleter
{
  void operator()(arpf_scene * s) const { arpf_scene_free(s); }
};
struct ResultsDeleter
{
  void operator()(arpf_results * r) const { arpf_results_free(r); }
};

using ConfigPtr = std::unique_ptr<arpf_config, ConfigDeleter>;
using ScenePtr = std::unique_ptr<arpf_scene, SceneDeleter>;
using ResultsPtr = std::unique_ptr<arpf_results, ResultsDeleter>;

[[noreturn]] void die(const std::string & context, arpf_status status)
{
  std::fprintf(stderr, "arpf: %s: %s (%s)\n", context.c_str(), arpf_last_error(),
    arpf_status_name(status));
  std::exit(status == ARPF_OK ? 1 : static_cast<int>(status));
}

void check(const std::string & context, arpf_status status)
{
  if (status != ARPF_OK) {
    die(context, status);
  }
}

/// Every scenario option, stored as strings so only flags the user actually
/// passed are forwarded to the config (flags override the config file).
struct FlagSet
{
  std::vector<std::pair<std::string, std::string>> assignments;

  void add_option(CLI::App * cmd, const std::string & flag, const std::string & key,
    const std::string & help)
  {
    auto value = std::make_shared<std::string>();
    cmd->add_option_function<std::string>(
      flag,
      [this, key, value](const std::string & v) { assignments.emplace_back(key, v); },
      help);
  }

  void register_all(CLI::App * cmd)
  {
    add_option(cmd, "--mode", "mode", "Scenario mode: tracking | info_sharing");
    add_option(cmd, "--algo", "algo", "Algorithm: sir | rna | arna");
    add_option(cmd, "--ratio", "ratio", "RNA fixed exchange ratio in [0, 0.5]");
    add_option(cmd, "--pes", "pes", "Number of processing elements M");
    add_option(cmd, "--particles-per-pe", "particles_per_pe", "Particles per PE (N_p)");
    add_option(cmd, "--frames", "frames", "Frames per scene");
    add_option(cmd, "--snr", "snr", "Scene signal-to-noise ratio");
    add_option(cmd, "--seed", "seed", "Base seed");
    add_option(cmd, "--replicates", "replicates", "Replicate count");
    add_option(cmd, "--cutoff", "cutoff", "ARNA pe_eff/M cutoff in (0, 1]");
    add_option(cmd, "--backend", "backend", "Backend: sequential | parallel");
    add_option(cmd, "--out", "out", "Output path prefix");
    add_option(cmd, "--width", "width", "Frame width (px)");
    add_option(cmd, "--height", "height", "Frame height (px)");
    add_option(cmd, "--sigma-pos", "sigma_pos", "Position process noise std (px)");
    add_option(cmd, "--sigma-vel", "sigma_vel", "Velocity process noise std (px/frame)");
    add_option(cmd, "--sigma-i", "sigma_i", "Intensity process noise std (counts)");
    add_option(cmd, "--sigma-psf", "sigma_psf", "Spot profile std (px)");
    add_option(cmd, "--background", "background", "Mean background level (counts)");
    add_option(cmd, "--roi-radius", "roi_radius", "Likelihood window half-width (px)");
    add_option(cmd, "--v-max", "v_max", "Info-sharing velocity init bound (px/frame)");
    add_option(cmd, "--scene-speed", "scene_speed", "Truth speed at frame 0 (px/frame)");
    add_option(cmd, "--init-jitter", "init_jitter", "Jitter initial particles (true|false)");
    add_option(cmd, "--noise-free", "noise_free", "Render frames without noise (true|false)");
  }

  void apply(arpf_config * config) const
  {
    for (const auto & [key, value] : assignments) {
      check("--" + key, arpf_config_set(config, key.c_str(), value.c_str()));
    }
  }
};

ConfigPtr build_config(const std::string & config_path, const FlagSet & flags)
{
  ConfigPtr config(arpf_config_new());
  if (!config_path.empty()) {
    check("loading " + config_path, arpf_config_load_file(config.get(), config_path.c_str()));
  }
  flags.apply(config.get());
  return config;
}

std::string get_out_prefix(const arpf_config * config)
{
  char buf[4096];
  check("reading out prefix", arpf_config_get(config, "out", buf, sizeof(buf)));
  return std::string(buf);
}

void print_summaries(const arpf_results * results)
{
  const size_t runs = arpf_results_run_count(results);
  std::printf("%-6s %-10s %-12s %-12s %-12s %-12s %-8s\n", "run", "iters", "rmse_px",
    "exchanged", "messages", "bytes", "status");
  for (size_t i = 0; i < runs; ++i) {
    arpf_run_summary s;
    check("summary", arpf_results_run_summary(results, i, &s));
    std::printf("%-6u %-10u %-12.6g %-12llu %-12llu %-12llu %-8s\n", s.run_id, s.iterations,
      s.rmse_px, static_cast<unsigned long long>(s.total_exchanged),
      static_cast<unsigned long long>(s.total_messages),
      static_cast<unsigned long long>(s.total_bytes), s.flagged != 0 ? "FLAGGED" : "ok");
  }
}

int cmd_run(const std::string & config_path, const FlagSet & flags, const std::string & scene_path)
{
  ConfigPtr config = build_config(config_path, flags);

  ResultsPtr results;
  arpf_status status = ARPF_OK;
  if (!scene_path.empty()) {
    ScenePtr scene;
    arpf_scene * raw_scene = nullptr;
    check("loading scene " + scene_path, arpf_scene_load(scene_path.c_str(), &raw_scene));
    scene.reset(raw_scene);
    arpf_results * raw = nullptr;
    status = arpf_run_with_scene(config.get(), scene.get(), &raw);
    results.reset(raw);
  } else {
    arpf_results * raw = nullptr;
    status = arpf_run(config.get(), &raw);
    results.reset(raw);
  }
  if (status != ARPF_OK && status != ARPF_ERROR_DIVERGENCE) {
    die("run", status);
  }

  const std::string prefix = get_out_prefix(config.get());
  const std::string csv_path = prefix + ".csv";
  const std::string summary_path = prefix + "_summary.json";
  check("writing " + csv_path, arpf_results_write_csv(results.get(), csv_path.c_str()));
  check("writing " + summary_path,
    arpf_results_write_summary(results.get(), summary_path.c_str()));

  print_summaries(results.get());
  std::printf("wrote %s and %s\n", csv_path.c_str(), summary_path.c_str());

  if (status == ARPF_ERROR_DIVERGENCE) {
    std::fprintf(stderr, "arpf: no replicate finished without divergence\n");
    return static_cast<int>(status);
  }
  return 0;
}

int cmd_gen_scene(const std::string & config_path, const FlagSet & flags, std::uint64_t seed,
  const std::string & out_path)
{
  ConfigPtr config = build_config(config_path, flags);
  arpf_scene * raw = nullptr;
  check("generating scene", arpf_scene_generate(config.get(), seed, &raw));
  ScenePtr scene(raw);
  check("saving scene " + out_path, arpf_scene_save(scene.get(), out_path.c_str()));
  std::printf("scene: %ux%u px, %u frames -> %s\n", arpf_scene_width(scene.get()),
    arpf_scene_height(scene.get()), arpf_scene_frame_count(scene.get()), out_path.c_str());
  return 0;
}

double median(std::vector<double> values)
{
  std::sort(values.begin(), values.end());
  return values[values.size() / 2];
}

int cmd_report(const std::vector<std::string> & csv_paths)
{
  std::vector<double> rmses;
  std::vector<double> finals;
  for (const std::string & path : csv_paths) {
    arpf_results * raw = nullptr;
    check("loading " + path, arpf_results_load_csv(path.c_str(), &raw));
    ResultsPtr results(raw);
    std::printf("== %s\n", path.c_str());
    print_summaries(results.get());

    const size_t runs = arpf_results_run_count(results.get());
    const size_t rows = arpf_results_row_count(results.get());
    for (size_t i = 0; i < runs; ++i) {
      arpf_run_summary s;
      check("summary", arpf_results_run_summary(results.get(), i, &s));
      rmses.push_back(s.rmse_px);
    }
    // Final pe_eff fraction of each run: scan rows, last row per run id.
    std::vector<double> last_frac;
    std::uint32_t current = 0;
    bool have = false;
    for (size_t i = 0; i < rows; ++i) {
      arpf_row r;
      check("row", arpf_results_row(results.get(), i, &r));
      if (!have || r.run_id != current) {
        current = r.run_id;
        have = true;
        last_frac.push_back(r.pe_eff_frac);
      } else {
        last_frac.back() = r.pe_eff_frac;
      }
    }
    finals.insert(finals.end(), last_frac.begin(), last_frac.end());
  }
  if (!rmses.empty()) {
    double mean = 0.0;
    for (double v : rmses) {
      mean += v;
    }
    mean /= static_cast<double>(rmses.size());
    std::printf("aggregate: runs=%zu mean_rmse_px=%.6g median_rmse_px=%.6g "
                "median_final_pe_eff_frac=%.6g\n",
      rmses.size(), mean, median(rmses), finals.empty() ? 0.0 : median(finals));
  } else {
    std::printf("aggregate: no runs\n");
  }
  return 0;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{std::string("arpf ") + arpf_version() +
               " - distributed particle-filter benchmark harness"};
  app.require_subcommand(1);

  // run
  auto * run = app.add_subcommand("run", "Run a scenario and write CSV + summary");
  std::string run_config;
  std::string run_scene;
  FlagSet run_flags;
  run->add_option("--config", run_config, "JSON config file (flags override it)");
  run->add_option("--scene", run_scene, "Scene container to run against");
  run_flags.register_all(run);

  // gen-scene
  auto * gen = app.add_subcommand("gen-scene", "Generate a scene container");
  std::string gen_config;
  std::string gen_out = "scene.arpf";
  std::uint64_t gen_seed = 1;
  FlagSet gen_flags;
  gen->add_option("--config", gen_config, "JSON config file (flags override it)");
  gen->add_option("--scene-out", gen_out, "Scene output path");
  gen->add_option("--scene-seed", gen_seed, "Seed for the scene streams");
  gen_flags.register_all(gen);

  // report
  auto * report = app.add_subcommand("report", "Summarize result CSVs");
  std::vector<std::string> report_csvs;
  report->add_option("csv", report_csvs, "Result CSV files")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    return cmd_run(run_config, run_flags, run_scene);
  }
  if (gen->parsed()) {
    return cmd_gen_scene(gen_config, gen_flags, gen_seed, gen_out);
  }
  if (report->parsed()) {
    return cmd_report(report_csvs);
  }
  return 1;
}
