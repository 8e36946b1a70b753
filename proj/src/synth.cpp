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

#include "synth.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "errors.hpp"

namespace arpf
{

namespace
{

constexpr char kSceneMagic[8] = {'A', 'R', 'P', 'F', 'S', 'C', 'N', '1'};

void reflect_into(double & pos, double & vel, double lo, double hi)
{
  if (!(lo < hi)) {
    pos = 0.5 * (lo + hi);
    return;
  }
  while (pos < lo || pos > hi) {
    pos = pos < lo ? 2.0 * lo - pos : 2.0 * hi - pos;
    vel = -vel;
  }
}

template <typename T>
void write_raw(std::ofstream & out, const T & value)
{
  out.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
void read_raw(std::ifstream & in, T & value)
{
  in.read(reinterpret_cast<char *>(&value), sizeof(T));
}

}  // namespace

Trajectory generate_trajectory(std::size_t frame_count, const StateVector & init,
  const DynamicsParams & dynamics, std::uint32_t width, std::uint32_t height, double margin,
  Rng & rng)
{
  if (frame_count < 1) {
    throw InvalidArgument("trajectory: frame_count must be >= 1");
  }
  const double x_hi = static_cast<double>(width) - margin;
  const double y_hi = static_cast<double>(height) - margin;
  if (init.x < margin || init.x > x_hi || init.y < margin || init.y > y_hi) {
    throw InvalidArgument("trajectory: initial position outside the reflecting bounds");
  }

  Trajectory traj;
  traj.states.reserve(frame_count);
  traj.states.push_back(init);
  for (std::size_t t = 1; t < frame_count; ++t) {
    StateVector s = propagate(traj.states.back(), dynamics, rng);
    reflect_into(s.x, s.vx, margin, x_hi);
    reflect_into(s.y, s.vy, margin, y_hi);
    traj.states.push_back(s);
  }
  return traj;
}

double snr_to_intensity(double snr, double background)
{
  if (!(snr > 0.0)) {
    throw InvalidArgument("snr must be > 0");
  }
  // Positive root of i0^2 - snr^2 i0 - snr^2 b = 0.
  const double s2 = snr * snr;
  return 0.5 * (s2 + std::sqrt(s2 * s2 + 4.0 * s2 * background));
}

Frame render_frame(const StateVector & truth, const ObservationParams & o, Rng & rng,
  bool noise_free)
{
  Frame f;
  f.width = o.width;
  f.height = o.height;
  f.pixels.resize(static_cast<std::size_t>(o.width) * o.height);
  std::size_t idx = 0;
  for (std::uint32_t v = 0; v < o.height; ++v) {
    for (std::uint32_t u = 0; u < o.width; ++u, ++idx) {
      const double mean = expected_intensity(truth, o, static_cast<double>(u), static_cast<double>(v));
      f.pixels[idx] = noise_free ? mean : static_cast<double>(rng.poisson(mean));
    }
  }
  return f;
}

Scene make_scene(const SceneParams & params, std::uint64_t seed)
{
  ObservationParams obs = params.observation;
  obs.width = params.width;
  obs.height = params.height;
  validate(obs);
  validate(params.dynamics);

  Scene scene;
  scene.width = params.width;
  scene.height = params.height;
  scene.snr = params.snr;
  scene.seed = seed;
  scene.noise_free = params.noise_free;

  const double margin = 3.0 * obs.sigma_psf;
  Rng traj_rng(mix_seed(seed, {streams::trajectory}));
  StateVector init;
  init.x = traj_rng.uniform(0.25 * params.width, 0.75 * params.width);
  init.y = traj_rng.uniform(0.25 * params.height, 0.75 * params.height);
  const double theta = traj_rng.uniform(0.0, 2.0 * std::numbers::pi);
  init.vx = params.init_speed * std::cos(theta);
  init.vy = params.init_speed * std::sin(theta);
  init.i0 = snr_to_intensity(params.snr, obs.background);

  scene.trajectory =
    generate_trajectory(params.frame_count, init, params.dynamics, params.width, params.height,
      margin, traj_rng);

  scene.frames.reserve(params.frame_count);
  for (std::uint32_t f = 0; f < params.frame_count; ++f) {
    Rng frame_rng(mix_seed(seed, {streams::frame, f}));
    scene.frames.push_back(render_frame(scene.trajectory.states[f], obs, frame_rng, params.noise_free));
  }
  return scene;
}

void save_scene(const Scene & scene, const std::string & path)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open scene file for writing: " + path);
  }
  out.write(kSceneMagic, sizeof(kSceneMagic));
  const std::uint32_t frame_count = static_cast<std::uint32_t>(scene.frames.size());
  const std::uint32_t flags = scene.noise_free ? 1u : 0u;
  write_raw(out, scene.width);
  write_raw(out, scene.height);
  write_raw(out, frame_count);
  write_raw(out, flags);
  write_raw(out, scene.snr);
  write_raw(out, scene.seed);
  for (const StateVector & s : scene.trajectory.states) {
    write_raw(out, s.x);
    write_raw(out, s.y);
    write_raw(out, s.vx);
    write_raw(out, s.vy);
    write_raw(out, s.i0);
  }
  for (const Frame & f : scene.frames) {
    out.write(reinterpret_cast<const char *>(f.pixels.data()),
      static_cast<std::streamsize>(f.pixels.size() * sizeof(double)));
  }
  if (!out) {
    throw IoError("short write while saving scene: " + path);
  }
}

Scene load_scene(const std::string & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open scene file: " + path);
  }
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kSceneMagic, sizeof(magic)) != 0) {
    throw ParseError("not a scene container: " + path);
  }
  Scene scene;
  std::uint32_t frame_count = 0;
  std::uint32_t flags = 0;
  read_raw(in, scene.width);
  read_raw(in, scene.height);
  read_raw(in, frame_count);
  read_raw(in, flags);
  read_raw(in, scene.snr);
  read_raw(in, scene.seed);
  if (!in || scene.width == 0 || scene.height == 0) {
    throw ParseError("corrupt scene header: " + path);
  }
  scene.noise_free = (flags & 1u) != 0;
  scene.trajectory.states.resize(frame_count);
  for (StateVector & s : scene.trajectory.states) {
    read_raw(in, s.x);
    read_raw(in, s.y);
    read_raw(in, s.vx);
    read_raw(in, s.vy);
    read_raw(in, s.i0);
  }
  const std::size_t n_pixels = static_cast<std::size_t>(scene.width) * scene.height;
  scene.frames.resize(frame_count);
  for (Frame & f : scene.frames) {
    f.width = scene.width;
    f.height = scene.height;
    f.pixels.resize(n_pixels);
    in.read(reinterpret_cast<char *>(f.pixels.data()),
      static_cast<std::streamsize>(n_pixels * sizeof(double)));
  }
  if (!in) {
    throw ParseError("truncated scene container: " + path);
  }
  return scene;
}

}  // namespace arpf
