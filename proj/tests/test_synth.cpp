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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <vector>

#include <doctest.h>

#include "errors.hpp"
#include "support/stats.hpp"
#include "synth.hpp"

using namespace arpf;

namespace
{

DynamicsParams zero_noise()
{
  DynamicsParams p;
  p.sigma_pos = 0.0;
  p.sigma_vel = 0.0;
  p.sigma_i = 0.0;
  return p;
}

/// Independent bisection oracle for the SNR equation snr = i0/sqrt(i0+b).
double snr_root_by_bisection(double snr, double b)
{
  auto f = [&](double i0) { return i0 / std::sqrt(i0 + b) - snr; };
  double lo = 1e-9;
  double hi = 1e6;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("generate_trajectory: noise-free straight line")
{
  Rng rng(1);
  const StateVector init{10.0, 10.0, 1.0, 0.0, 100.0};
  const Trajectory t = generate_trajectory(3, init, zero_noise(), 64, 64, 4.5, rng);
  REQUIRE(t.states.size() == 3);
  CHECK(t.states[0].x == 10.0);
  CHECK(t.states[1].x == 11.0);
  CHECK(t.states[2].x == 12.0);
  CHECK(t.states[2].y == 10.0);
}

TEST_CASE("generate_trajectory: reflection at the right margin")
{
  Rng rng(2);
  const double margin = 4.5;  // x range [4.5, 59.5]
  const StateVector init{58.0, 30.0, 2.0, 0.0, 100.0};
  const Trajectory t = generate_trajectory(4, init, zero_noise(), 64, 64, margin, rng);
  // 58 -> 60 reflects to 59, then decreases with vx = -2.
  CHECK(t.states[1].x == doctest::Approx(59.0).epsilon(1e-12));
  CHECK(t.states[1].vx == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(t.states[2].x == doctest::Approx(57.0).epsilon(1e-12));
  CHECK(t.states[3].x < t.states[2].x);
}

TEST_CASE("generate_trajectory: 50 frames stay inside 512x512 margins")
{
  const double margin = 4.5;
  DynamicsParams p;  // defaults, noisy
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    const StateVector init{256.0, 256.0, 1.5, -1.0, 100.0};
    const Trajectory t = generate_trajectory(50, init, p, 512, 512, margin, rng);
    for (const StateVector & s : t.states) {
      CHECK(s.x >= margin);
      CHECK(s.x <= 512.0 - margin);
      CHECK(s.y >= margin);
      CHECK(s.y <= 512.0 - margin);
    }
  }
}

TEST_CASE("generate_trajectory: init outside bounds rejected")
{
  Rng rng(3);
  CHECK_THROWS_AS(
    generate_trajectory(3, StateVector{1.0, 30.0, 0.0, 0.0, 10.0}, zero_noise(), 64, 64, 4.5, rng),
    InvalidArgument);
}

TEST_CASE("snr_to_intensity: frozen values and bisection oracle")
{
  CHECK(snr_to_intensity(2.0, 10.0) ==
        doctest::Approx(2.0 + 2.0 * std::sqrt(11.0)).epsilon(1e-12));
  CHECK(snr_to_intensity(2.0, 10.0) == doctest::Approx(8.63324958071080).epsilon(1e-10));
  CHECK(snr_to_intensity(2.0, 0.0) == doctest::Approx(4.0).epsilon(1e-12));
  for (double snr : {0.5, 1.0, 2.0, 5.0}) {
    for (double b : {0.0, 1.0, 10.0, 100.0}) {
      CHECK(snr_to_intensity(snr, b) ==
            doctest::Approx(snr_root_by_bisection(snr, b)).epsilon(1e-9));
    }
  }
  // monotone in snr at fixed background
  double prev = 0.0;
  for (double snr = 0.5; snr < 6.0; snr += 0.5) {
    const double i0 = snr_to_intensity(snr, 10.0);
    CHECK(i0 > prev);
    prev = i0;
  }
  CHECK_THROWS_AS(snr_to_intensity(0.0, 10.0), InvalidArgument);
}

TEST_CASE("render_frame: noise-free center pixel is i0 + background")
{
  ObservationParams o;
  o.width = 32;
  o.height = 32;
  Rng rng(5);
  const StateVector truth{16.0, 16.0, 0.0, 0.0, 50.0};
  const Frame f = render_frame(truth, o, rng, /*noise_free=*/true);
  CHECK(f.at(16, 16) == doctest::Approx(60.0).epsilon(1e-12));
}

TEST_CASE("render_frame: Monte Carlo center-pixel mean")
{
  ObservationParams o;
  o.width = 8;
  o.height = 8;
  const double i0 = snr_to_intensity(2.0, o.background);
  const StateVector truth{4.0, 4.0, 0.0, 0.0, i0};
  Rng rng(6);
  const int n = 10000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Frame f = render_frame(truth, o, rng);
    sum += f.at(4, 4);
    for (double px : f.pixels) {
      REQUIRE(px >= 0.0);
    }
  }
  const double mean = sum / n;
  const double lambda = i0 + o.background;
  CHECK(std::fabs(mean - lambda) < 3.0 * std::sqrt(lambda / n));
}

TEST_CASE("render_frame: background-only frame average converges to background")
{
  ObservationParams o;
  o.width = 512;
  o.height = 512;
  Rng rng(7);
  const Frame f = render_frame(StateVector{256.0, 256.0, 0.0, 0.0, 0.0}, o, rng);
  double sum = 0.0;
  for (double px : f.pixels) {
    sum += px;
  }
  const double mean = sum / static_cast<double>(f.pixels.size());
  CHECK(std::fabs(mean - o.background) < 3.0 * std::sqrt(o.background) / 512.0);
}

TEST_CASE("make_scene: same seed gives a bitwise-identical scene")
{
  SceneParams sp;
  sp.width = 64;
  sp.height = 64;
  sp.frame_count = 5;
  const Scene a = make_scene(sp, 42);
  const Scene b = make_scene(sp, 42);
  REQUIRE(a.frames.size() == b.frames.size());
  REQUIRE(a.trajectory.states.size() == b.trajectory.states.size());
  for (std::size_t i = 0; i < a.trajectory.states.size(); ++i) {
    CHECK(a.trajectory.states[i] == b.trajectory.states[i]);
  }
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    CHECK(a.frames[i].pixels == b.frames[i].pixels);
  }
  const Scene c = make_scene(sp, 43);
  CHECK(c.frames[0].pixels != a.frames[0].pixels);
}

TEST_CASE("scene container: save/load round-trip is exact")
{
  SceneParams sp;
  sp.width = 48;
  sp.height = 40;
  sp.frame_count = 3;
  const Scene scene = make_scene(sp, 9);

  const auto path = (std::filesystem::temp_directory_path() / "arpf_scene_rt.arpf").string();
  save_scene(scene, path);
  const Scene loaded = load_scene(path);
  std::filesystem::remove(path);

  CHECK(loaded.width == scene.width);
  CHECK(loaded.height == scene.height);
  CHECK(loaded.snr == scene.snr);
  CHECK(loaded.seed == scene.seed);
  CHECK(loaded.noise_free == scene.noise_free);
  REQUIRE(loaded.frames.size() == scene.frames.size());
  for (std::size_t i = 0; i < scene.frames.size(); ++i) {
    CHECK(loaded.frames[i].pixels == scene.frames[i].pixels);
    CHECK(loaded.trajectory.states[i] == scene.trajectory.states[i]);
  }
}

TEST_CASE("scene container: loading garbage is a parse error")
{
  const auto path = (std::filesystem::temp_directory_path() / "arpf_scene_bad.arpf").string();
  {
    std::FILE * f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    std::fputs("definitely not a scene", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_scene(path), ParseError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_scene(path), IoError);
}
