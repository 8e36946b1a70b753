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

#ifndef ARPF_STATE_MODEL_HPP_
#define ARPF_STATE_MODEL_HPP_

#include <cstdint>
#include <vector>

#include "rng.hpp"

namespace arpf
{

/// Object state: position (px), velocity (px/frame), peak intensity above
/// background (counts).
struct StateVector
{
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double i0 = 0.0;

  friend bool operator==(const StateVector &, const StateVector &) = default;
};

/// Nearly-constant-velocity transition prior.
struct DynamicsParams
{
  double sigma_pos = 0.5;  // position process noise std (px)
  double sigma_vel = 0.2;  // velocity process noise std (px/frame)
  double sigma_i = 2.0;    // intensity process noise std (counts)
  double dt = 1.0;         // frames
};

/// Gaussian-spot appearance model and likelihood window.
struct ObservationParams
{
  double sigma_psf = 1.5;   // spot std (px)
  double background = 10.0; // mean background level (counts)
  int roi_radius = 5;       // likelihood window half-width (px)
  std::uint32_t width = 0;  // frame width (px)
  std::uint32_t height = 0; // frame height (px)
};

struct Frame
{
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<double> pixels;  // row-major, nonnegative counts

  double at(std::uint32_t u, std::uint32_t v) const { return pixels[static_cast<std::size_t>(v) * width + u]; }
};

void validate(const DynamicsParams & p);
void validate(const ObservationParams & o);

/// One step of the transition prior. Draw order is fixed (x, y, vx, vy, i0);
/// intensity is clamped at zero.
StateVector propagate(const StateVector & s, const DynamicsParams & p, Rng & rng);

/// Adds one step of process noise without advecting the position.
StateVector jitter_state(const StateVector & s, const DynamicsParams & p, Rng & rng);

/// Mean photon count at pixel (u, v): background + i0 * Gaussian profile.
double expected_intensity(const StateVector & s, const ObservationParams & o, double u, double v);

/// Log-likelihood assigned to states whose evaluation window misses the
/// frame entirely: an all-background window minus 50 nats.
double log_likelihood_floor(const ObservationParams & o);

/// Poisson log-likelihood of the frame under state s, summed over a square
/// window of half-width roi_radius around the rounded position and clipped
/// to the frame. `lgamma_plane`, when given, must hold lgamma(z+1) per pixel
/// (see make_lgamma_plane); it only removes the per-call lgamma cost, the
/// value is identical.
double log_likelihood(const StateVector & s, const Frame & f, const ObservationParams & o,
  const double * lgamma_plane = nullptr);

/// lgamma(z+1) for every pixel of f, for reuse across many likelihood calls.
std::vector<double> make_lgamma_plane(const Frame & f);

}  // namespace arpf

#endif  // ARPF_STATE_MODEL_HPP_
