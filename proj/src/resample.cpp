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

#include "resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "errors.hpp"

namespace arpf
{

namespace
{
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

WeightedEnsemble normalize(WeightedEnsemble e)
{
  if (e.states.size() != e.weights.size()) {
    throw InvalidArgument("ensemble: states and weights differ in length");
  }
  double sum = 0.0;
  for (double w : e.weights) {
    if (!(w >= 0.0)) {
      throw InvalidArgument("ensemble: weights must be finite and >= 0");
    }
    sum += w;
  }
  if (!(sum > 0.0)) {
    throw DivergenceError("normalize: all particle weights are zero");
  }
  for (double & w : e.weights) {
    w /= sum;
  }
  return e;
}

double effective_sample_size(std::span<const double> weights)
{
  double sq = 0.0;
  for (double w : weights) {
    sq += w * w;
  }
  return 1.0 / sq;
}

std::vector<std::uint32_t> systematic_resample_indices(std::span<const double> normalized_weights,
  Rng & rng)
{
  const std::size_t n = normalized_weights.size();
  if (n == 0) {
    throw InvalidArgument("systematic resampling: empty ensemble");
  }
  const double step = 1.0 / static_cast<double>(n);
  double u = rng.uniform01() * step;
  std::vector<std::uint32_t> indices(n);
  std::size_t j = 0;
  double cumulative = normalized_weights[0];
  for (std::size_t i = 0; i < n; ++i) {
    while (cumulative < u && j + 1 < n) {
      ++j;
      cumulative += normalized_weights[j];
    }
    indices[i] = static_cast<std::uint32_t>(j);
    u += step;
  }
  return indices;
}

WeightedEnsemble systematic_resample(const WeightedEnsemble & e, Rng & rng)
{
  const auto indices = systematic_resample_indices(e.weights, rng);
  WeightedEnsemble out;
  out.states.reserve(e.size());
  for (std::uint32_t i : indices) {
    out.states.push_back(e.states[i]);
  }
  out.weights.assign(e.size(), 1.0 / static_cast<double>(e.size()));
  return out;
}

StateVector weighted_mean(std::span<const StateVector> states, std::span<const double> weights)
{
  StateVector m;
  for (std::size_t i = 0; i < states.size(); ++i) {
    const double w = weights[i];
    m.x += w * states[i].x;
    m.y += w * states[i].y;
    m.vx += w * states[i].vx;
    m.vy += w * states[i].vy;
    m.i0 += w * states[i].i0;
  }
  return m;
}

StateVector estimate(const WeightedEnsemble & e)
{
  return weighted_mean(e.states, e.weights);
}

WeightUpdate update_log_weights(std::span<const double> log_weights,
  std::span<const double> log_likelihoods)
{
  const std::size_t n = log_weights.size();
  if (n == 0 || log_likelihoods.size() != n) {
    throw InvalidArgument("weight update: size mismatch");
  }
  WeightUpdate up;
  up.normalized.resize(n);

  const double carried_max = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(carried_max)) {
    up.normalized.assign(n, 1.0 / static_cast<double>(n));
    up.log_weight_sum = kNegInf;
    up.degenerate = true;
    return up;
  }

  std::vector<double> shifted(n);
  double shifted_max = kNegInf;
  for (std::size_t i = 0; i < n; ++i) {
    shifted[i] = (log_weights[i] - carried_max) + log_likelihoods[i];
    shifted_max = std::max(shifted_max, shifted[i]);
  }
  if (!std::isfinite(shifted_max)) {
    up.normalized.assign(n, 1.0 / static_cast<double>(n));
    up.log_weight_sum = kNegInf;
    up.degenerate = true;
    return up;
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    up.normalized[i] = std::exp(shifted[i] - shifted_max);
    total += up.normalized[i];
  }
  for (double & w : up.normalized) {
    w /= total;
  }
  up.log_weight_sum = carried_max + shifted_max + std::log(total);
  return up;
}

SirResult sir_step(const WeightedEnsemble & e, const Frame & frame, const DynamicsParams & dyn,
  const ObservationParams & obs, double n_thresh, Rng & rng, const double * lgamma_plane)
{
  const std::size_t n = e.size();
  if (n == 0) {
    throw InvalidArgument("sir_step: empty ensemble");
  }

  SirResult r;
  r.ensemble.states.reserve(n);
  for (const StateVector & s : e.states) {
    r.ensemble.states.push_back(propagate(s, dyn, rng));
  }

  std::vector<double> log_w(n);
  std::vector<double> log_lik(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_w[i] = std::log(e.weights[i]);
    log_lik[i] = log_likelihood(r.ensemble.states[i], frame, obs, lgamma_plane);
  }
  WeightUpdate up = update_log_weights(log_w, log_lik);
  r.degenerate = up.degenerate;
  r.estimate = weighted_mean(r.ensemble.states, up.normalized);
  r.n_eff = effective_sample_size(up.normalized);

  if (r.n_eff < n_thresh) {
    const auto indices = systematic_resample_indices(up.normalized, rng);
    std::vector<StateVector> resampled;
    resampled.reserve(n);
    for (std::uint32_t i : indices) {
      resampled.push_back(r.ensemble.states[i]);
    }
    r.ensemble.states = std::move(resampled);
    r.ensemble.weights.assign(n, 1.0 / static_cast<double>(n));
    r.resampled = true;
  } else {
    r.ensemble.weights = std::move(up.normalized);
  }
  return r;
}

}  // namespace arpf
