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

#ifndef ARPF_RESAMPLE_HPP_
#define ARPF_RESAMPLE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "state_model.hpp"

namespace arpf
{

struct WeightedEnsemble
{
  std::vector<StateVector> states;
  std::vector<double> weights;  // nonnegative, same length as states

  std::size_t size() const { return states.size(); }
};

/// Scales weights to sum to one. Throws DivergenceError when the sum is zero.
WeightedEnsemble normalize(WeightedEnsemble e);

/// 1 / sum(w_i^2) for normalized weights; in [1, N].
double effective_sample_size(std::span<const double> weights);

/// Systematic resampling: one uniform offset u0 ~ U[0, 1/N), strata u0 + i/N
/// walked against the cumulative weights. Offspring counts of particle i are
/// always floor(N w_i) or ceil(N w_i). Consumes exactly one uniform draw.
std::vector<std::uint32_t> systematic_resample_indices(std::span<const double> normalized_weights,
  Rng & rng);

WeightedEnsemble systematic_resample(const WeightedEnsemble & e, Rng & rng);

StateVector weighted_mean(std::span<const StateVector> states, std::span<const double> weights);

/// Weighted posterior mean of a normalized ensemble.
StateVector estimate(const WeightedEnsemble & e);

/// Result of one log-space weight update (the (U) + renormalize steps).
struct WeightUpdate
{
  std::vector<double> normalized;  // sums to 1
  double log_weight_sum = 0.0;     // log sum_i exp(log_w_i + loglik_i)
  bool degenerate = false;         // every weight collapsed; reset to uniform
};

/// Multiplies carried weights by likelihoods entirely in log space. The
/// carried log-weights are shifted by their maximum before the likelihoods
/// are added, then the sum is shifted again before exponentiation; both
/// shifts cancel in the normalized output and are restored exactly in
/// log_weight_sum. When every carried weight is equal, the normalized output
/// therefore depends on the log-likelihoods alone, bit for bit.
WeightUpdate update_log_weights(std::span<const double> log_weights,
  std::span<const double> log_likelihoods);

struct SirResult
{
  WeightedEnsemble ensemble;  // weights normalized (uniform if resampled)
  StateVector estimate;
  double n_eff = 0.0;
  bool resampled = false;
  bool degenerate = false;
};

/// One full SIR step: propagate, weight by the frame likelihood, normalize,
/// estimate, and resample when the effective sample size drops below
/// n_thresh (nothing triggers at n_thresh = 0; n_thresh = N + 1 always
/// triggers).
SirResult sir_step(const WeightedEnsemble & e, const Frame & frame, const DynamicsParams & dyn,
  const ObservationParams & obs, double n_thresh, Rng & rng, const double * lgamma_plane = nullptr);

}  // namespace arpf

#endif  // ARPF_RESAMPLE_HPP_
