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

#ifndef ARPF_SYNTH_HPP_
#define ARPF_SYNTH_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "state_model.hpp"

namespace arpf
{

struct Trajectory
{
  std::vector<StateVector> states;  // one per frame
};

/// Ground truth plus rendered noisy frames; everything derives from `seed`.
struct Scene
{
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  double snr = 0.0;
  std::uint64_t seed = 0;
  bool noise_free = false;
  Trajectory trajectory;
  std::vector<Frame> frames;
};

struct SceneParams
{
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  std::uint32_t frame_count = 50;
  double snr = 2.0;
  bool noise_free = false;
  double init_speed = 1.0;  // truth speed at frame 0 (px/frame)
  DynamicsParams dynamics;
  ObservationParams observation;  // width/height fields are overridden

  friend bool operator==(const SceneParams &, const SceneParams &) = default;
};

/// Constant-velocity truth with reflecting borders: whenever a position would
/// leave [margin, dim - margin], it is mirrored back in and the velocity
/// component flips sign.
Trajectory generate_trajectory(std::size_t frame_count, const StateVector & init,
  const DynamicsParams & dynamics, std::uint32_t width, std::uint32_t height, double margin,
  Rng & rng);

/// Peak intensity i0 solving snr = i0 / sqrt(i0 + background).
double snr_to_intensity(double snr, double background);

/// Draws each pixel Poisson with the spot-model mean; `noise_free`
/// substitutes the mean itself.
Frame render_frame(const StateVector & truth, const ObservationParams & o, Rng & rng,
  bool noise_free = false);

Scene make_scene(const SceneParams & params, std::uint64_t seed);

// Binary scene container (layout documented in the README).
void save_scene(const Scene & scene, const std::string & path);
Scene load_scene(const std::string & path);

}  // namespace arpf

#endif  // ARPF_SYNTH_HPP_
