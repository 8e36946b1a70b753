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

#include "state_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "errors.hpp"

namespace arpf
{

namespace
{
// Keeps ln(lambda) finite when background and intensity are both zero.
constexpr double kLambdaFloor = 1e-12;
}  // namespace

void validate(const DynamicsParams & p)
{
  if (!(p.sigma_pos >= 0.0) || !(p.sigma_vel >= 0.0) || !(p.sigma_i >= 0.0)) {
    throw InvalidArgument("dynamics: process-noise sigmas must be >= 0");
  }
  if (!(p.dt > 0.0)) {
    throw InvalidArgument("dynamics: dt must be > 0");
  }
}

void validate(const ObservationParams & o)
{
  if (!(o.sigma_psf > 0.0)) {
    throw InvalidArgument("observation: sigma_psf must be > 0");
  }
  if (!(o.background >= 0.0)) {
    throw InvalidArgument("observation: background must be >= 0");
  }
  if (static_cast<double>(o.roi_radius) < 3.0 * o.sigma_psf) {
    throw InvalidArgument("observation: roi_radius must be >= 3 * sigma_psf");
  }
}

StateVector propagate(const StateVector & s, const DynamicsParams & p, Rng & rng)
{
  StateVector n;
  n.x = s.x + s.vx * p.dt + rng.normal(0.0, p.sigma_pos);
  n.y = s.y + s.vy * p.dt + rng.normal(0.0, p.sigma_pos);
  n.vx = s.vx + rng.normal(0.0, p.sigma_vel);
  n.vy = s.vy + rng.normal(0.0, p.sigma_vel);
  n.i0 = std::max(0.0, s.i0 + rng.normal(0.0, p.sigma_i));
  return n;
}

StateVector jitter_state(const StateVector & s, const DynamicsParams & p, Rng & rng)
{
  StateVector n;
  n.x = s.x + rng.normal(0.0, p.sigma_pos);
  n.y = s.y + rng.normal(0.0, p.sigma_pos);
  n.vx = s.vx + rng.normal(0.0, p.sigma_vel);
  n.vy = s.vy + rng.normal(0.0, p.sigma_vel);
  n.i0 = std::max(0.0, s.i0 + rng.normal(0.0, p.sigma_i));
  return n;
}

double expected_intensity(const StateVector & s, const ObservationParams & o, double u, double v)
{
  const double du = u - s.x;
  const double dv = v - s.y;
  const double inv2s2 = 1.0 / (2.0 * o.sigma_psf * o.sigma_psf);
  return o.background + s.i0 * std::exp(-(du * du + dv * dv) * inv2s2);
}

double log_likelihood_floor(const ObservationParams & o)
{
  const double side = 2.0 * static_cast<double>(o.roi_radius) + 1.0;
  const double b = o.background;
  const double per_pixel = b > 0.0 ? b * std::log(b) - b - std::lgamma(b + 1.0) : 0.0;
  return side * side * per_pixel - 50.0;
}

double log_likelihood(const StateVector & s, const Frame & f, const ObservationParams & o,
  const double * lgamma_plane)
{
  // Positions far enough out that rounding is meaningless go straight to the
  // floor; also catches non-finite coordinates.
  if (!(std::abs(s.x) < 1e9) || !(std::abs(s.y) < 1e9)) {
    return log_likelihood_floor(o);
  }
  const std::int64_t cx = std::llround(s.x);
  const std::int64_t cy = std::llround(s.y);
  const std::int64_t r = o.roi_radius;
  const std::int64_t u_lo = std::max<std::int64_t>(0, cx - r);
  const std::int64_t u_hi = std::min<std::int64_t>(static_cast<std::int64_t>(f.width) - 1, cx + r);
  const std::int64_t v_lo = std::max<std::int64_t>(0, cy - r);
  const std::int64_t v_hi = std::min<std::int64_t>(static_cast<std::int64_t>(f.height) - 1, cy + r);
  if (u_lo > u_hi || v_lo > v_hi) {
    return log_likelihood_floor(o);
  }

  const double inv2s2 = 1.0 / (2.0 * o.sigma_psf * o.sigma_psf);
  double ll = 0.0;
  for (std::int64_t v = v_lo; v <= v_hi; ++v) {
    const double dv = static_cast<double>(v) - s.y;
    const std::size_t row = static_cast<std::size_t>(v) * f.width;
    for (std::int64_t u = u_lo; u <= u_hi; ++u) {
      const double du = static_cast<double>(u) - s.x;
      double lambda = o.background + s.i0 * std::exp(-(du * du + dv * dv) * inv2s2);
      lambda = std::max(lambda, kLambdaFloor);
      const std::size_t idx = row + static_cast<std::size_t>(u);
      const double z = f.pixels[idx];
      const double lg = lgamma_plane != nullptr ? lgamma_plane[idx] : std::lgamma(z + 1.0);
      ll += z * std::log(lambda) - lambda - lg;
    }
  }
  return ll;
}

std::vector<double> make_lgamma_plane(const Frame & f)
{
  std::vector<double> plane(f.pixels.size());
  for (std::size_t i = 0; i < f.pixels.size(); ++i) {
    plane[i] = std::lgamma(f.pixels[i] + 1.0);
  }
  return plane;
}

}  // namespace arpf
