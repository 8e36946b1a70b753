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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "errors.hpp"
#include "resample.hpp"
#include "support/stats.hpp"
#include "synth.hpp"

using namespace arpf;

namespace
{

WeightedEnsemble ensemble_1d(const std::vector<double> & xs, const std::vector<double> & ws)
{
  WeightedEnsemble e;
  for (double x : xs) {
    e.states.push_back(StateVector{x, 0.0, 0.0, 0.0, 0.0});
  }
  e.weights = ws;
  return e;
}

std::vector<int> offspring_counts(const std::vector<std::uint32_t> & indices, std::size_t n)
{
  std::vector<int> counts(n, 0);
  for (std::uint32_t i : indices) {
    counts[i] += 1;
  }
  return counts;
}

}  // namespace

TEST_CASE("normalize: basic examples")
{
  auto e = normalize(ensemble_1d({0, 1}, {2.0, 2.0}));
  CHECK(e.weights[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(e.weights[1] == doctest::Approx(0.5).epsilon(1e-15));

  e = normalize(ensemble_1d({0, 1, 2}, {1.0, 0.0, 0.0}));
  CHECK(e.weights[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(e.weights[1] == 0.0);

  e = normalize(ensemble_1d({0, 1, 2, 3}, {1.0, 2.0, 3.0, 4.0}));
  CHECK(e.weights[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(e.weights[3] == doctest::Approx(0.4).epsilon(1e-15));

  const double total = std::accumulate(e.weights.begin(), e.weights.end(), 0.0);
  CHECK(std::fabs(total - 1.0) < 1e-12);

  CHECK_THROWS_AS(normalize(ensemble_1d({0, 1}, {0.0, 0.0})), DivergenceError);
  CHECK_THROWS_AS(normalize(ensemble_1d({0, 1}, {1.0, -0.5})), InvalidArgument);
}

TEST_CASE("effective_sample_size: examples and invariances")
{
  const std::vector<double> uniform(4, 0.25);
  CHECK(effective_sample_size(uniform) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(effective_sample_size(std::vector<double>{1, 0, 0, 0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(effective_sample_size(std::vector<double>{0.5, 0.5, 0, 0}) ==
        doctest::Approx(2.0).epsilon(1e-12));

  // permutation invariance
  Rng rng(1);
  std::vector<double> w{0.4, 0.3, 0.2, 0.1};
  const double base = effective_sample_size(w);
  for (int i = 0; i < 10; ++i) {
    std::swap(w[rng.below(4)], w[rng.below(4)]);
    CHECK(effective_sample_size(w) == doctest::Approx(base).epsilon(1e-12));
  }

  // scale invariance after normalization
  auto e1 = normalize(ensemble_1d({0, 1, 2}, {1.0, 2.0, 3.0}));
  auto e2 = normalize(ensemble_1d({0, 1, 2}, {10.0, 20.0, 30.0}));
  CHECK(effective_sample_size(e1.weights) ==
        doctest::Approx(effective_sample_size(e2.weights)).epsilon(1e-12));
}

TEST_CASE("systematic_resample: degenerate and uniform weights")
{
  Rng rng(2);
  const auto all_first = systematic_resample_indices(std::vector<double>{1, 0, 0, 0}, rng);
  CHECK(all_first == std::vector<std::uint32_t>{0, 0, 0, 0});

  const std::vector<double> uniform(6, 1.0 / 6.0);
  const auto one_each = systematic_resample_indices(uniform, rng);
  CHECK(one_each == std::vector<std::uint32_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("systematic_resample: offspring counts in {floor, ceil} of N w_i")
{
  Rng rng(3);
  const std::size_t n = 16;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> w(n);
    double sum = 0.0;
    for (double & v : w) {
      v = rng.uniform(0.0, 1.0);
      sum += v;
    }
    for (double & v : w) {
      v /= sum;
    }
    const auto counts = offspring_counts(systematic_resample_indices(w, rng), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double nw = static_cast<double>(n) * w[i];
      CHECK(counts[i] >= static_cast<int>(std::floor(nw)));
      CHECK(counts[i] <= static_cast<int>(std::ceil(nw)));
    }
  }
}

TEST_CASE("systematic_resample: resampled mean is unbiased")
{
  // Mean over repetitions of the resampled-ensemble mean matches the
  // weighted mean within three standard errors.
  Rng rng(4);
  const std::size_t n = 8;
  std::vector<double> xs;
  std::vector<double> ws;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(rng.uniform(-5.0, 5.0));
    ws.push_back(rng.uniform(0.01, 1.0));
    sum += ws.back();
  }
  for (double & w : ws) {
    w /= sum;
  }
  double target = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    target += ws[i] * xs[i];
  }

  const int reps = 100000;
  std::vector<double> means;
  means.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const auto idx = systematic_resample_indices(ws, rng);
    double m = 0.0;
    for (std::uint32_t i : idx) {
      m += xs[i];
    }
    means.push_back(m / static_cast<double>(n));
  }
  const double grand_mean = test_stats::mean(means);
  const double se = test_stats::sample_std(means) / std::sqrt(static_cast<double>(reps));
  CHECK(std::fabs(grand_mean - target) < 3.0 * se);
}

TEST_CASE("systematic_resample: ensemble wrapper resets weights to 1/N")
{
  Rng rng(5);
  const auto e = normalize(ensemble_1d({0, 1, 2, 3}, {4.0, 3.0, 2.0, 1.0}));
  const WeightedEnsemble out = systematic_resample(e, rng);
  REQUIRE(out.size() == 4);
  for (double w : out.weights) {
    CHECK(w == 0.25);
  }
}

TEST_CASE("estimate: weighted means")
{
  CHECK(estimate(ensemble_1d({7.5}, {1.0})).x == 7.5);
  CHECK(estimate(ensemble_1d({0.0, 2.0}, {0.5, 0.5})).x == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(estimate(ensemble_1d({0.0, 10.0}, {0.9, 0.1})).x == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("update_log_weights: equal carried weights reduce to softmax of log-likelihoods")
{
  const std::vector<double> loglik{-300.0, -280.5, -310.2, -290.0};
  std::vector<double> softmax(loglik.size());
  const double mx = *std::max_element(loglik.begin(), loglik.end());
  double total = 0.0;
  for (std::size_t i = 0; i < loglik.size(); ++i) {
    softmax[i] = std::exp(loglik[i] - mx);
    total += softmax[i];
  }
  for (double & v : softmax) {
    v /= total;
  }

  // Any equal carried log-weight gives bit-identical output.
  for (double carried : {-std::log(4.0), std::log(7.0), -1234.5}) {
    const std::vector<double> log_w(loglik.size(), carried);
    const WeightUpdate up = update_log_weights(log_w, loglik);
    CHECK(!up.degenerate);
    for (std::size_t i = 0; i < loglik.size(); ++i) {
      CHECK(up.normalized[i] == softmax[i]);
    }
    CHECK(up.log_weight_sum == doctest::Approx(carried + mx + std::log(total)).epsilon(1e-12));
  }
}

TEST_CASE("update_log_weights: matches linear arithmetic at moderate magnitudes")
{
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 5;
    std::vector<double> w(n);
    std::vector<double> lik(n);
    std::vector<double> log_w(n);
    std::vector<double> log_lik(n);
    for (std::size_t i = 0; i < n; ++i) {
      w[i] = rng.uniform(0.05, 2.0);
      lik[i] = rng.uniform(0.01, 3.0);
      log_w[i] = std::log(w[i]);
      log_lik[i] = std::log(lik[i]);
    }
    const WeightUpdate up = update_log_weights(log_w, log_lik);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += w[i] * lik[i];
    }
    CHECK(std::exp(up.log_weight_sum) == doctest::Approx(total).epsilon(1e-12));
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(up.normalized[i] == doctest::Approx(w[i] * lik[i] / total).epsilon(1e-12));
    }
  }
}

TEST_CASE("update_log_weights: total collapse resets to uniform and flags")
{
  const double ninf = -std::numeric_limits<double>::infinity();
  const WeightUpdate up = update_log_weights(std::vector<double>{ninf, ninf},
    std::vector<double>{-10.0, -20.0});
  CHECK(up.degenerate);
  CHECK(up.normalized == std::vector<double>{0.5, 0.5});
  CHECK(up.log_weight_sum == ninf);
}

TEST_CASE("sir_step: exact estimate with all particles at truth and no noise")
{
  ObservationParams o;
  o.width = 64;
  o.height = 64;
  const StateVector truth{20.0, 30.0, 0.0, 0.0, 50.0};
  Rng scene_rng(7);
  const Frame f = render_frame(truth, o, scene_rng, /*noise_free=*/true);

  DynamicsParams dyn;
  dyn.sigma_pos = dyn.sigma_vel = dyn.sigma_i = 0.0;

  WeightedEnsemble e;
  e.states.assign(4, truth);
  e.weights.assign(4, 0.25);

  Rng rng(8);
  const SirResult r = sir_step(e, f, dyn, o, 0.0, rng);
  CHECK(r.estimate == truth);
  CHECK(!r.resampled);  // n_thresh = 0 never triggers
  CHECK(r.n_eff == doctest::Approx(4.0).epsilon(1e-12));

  Rng rng2(8);
  const SirResult r2 = sir_step(e, f, dyn, o, 5.0, rng2);  // N + 1 always triggers
  CHECK(r2.resampled);
  for (double w : r2.ensemble.weights) {
    CHECK(w == 0.25);
  }
}

TEST_CASE("sir_step: one step pulls a +-3 px cloud within 0.5 px of truth")
{
  ObservationParams o;
  o.width = 64;
  o.height = 64;
  const StateVector truth{20.3, 17.6, 0.0, 0.0, 80.0};
  Rng scene_rng(9);
  const Frame f = render_frame(truth, o, scene_rng, /*noise_free=*/true);

  DynamicsParams dyn;
  dyn.sigma_pos = dyn.sigma_vel = dyn.sigma_i = 0.0;

  Rng init_rng(10);
  WeightedEnsemble e;
  const std::size_t n = 500;
  for (std::size_t i = 0; i < n; ++i) {
    StateVector s = truth;
    s.x += init_rng.uniform(-3.0, 3.0);
    s.y += init_rng.uniform(-3.0, 3.0);
    e.states.push_back(s);
  }
  e.weights.assign(n, 1.0 / static_cast<double>(n));

  Rng rng(11);
  const SirResult r = sir_step(e, f, dyn, o, 0.0, rng);
  CHECK(std::hypot(r.estimate.x - truth.x, r.estimate.y - truth.y) < 0.5);
}

TEST_CASE("sir_step: weights normalized after the update")
{
  ObservationParams o;
  o.width = 32;
  o.height = 32;
  Rng scene_rng(12);
  const Frame f = render_frame(StateVector{16.0, 16.0, 0.0, 0.0, 30.0}, o, scene_rng);

  WeightedEnsemble e;
  Rng init_rng(13);
  for (int i = 0; i < 32; ++i) {
    e.states.push_back(
      StateVector{init_rng.uniform(8.0, 24.0), init_rng.uniform(8.0, 24.0), 0.0, 0.0, 30.0});
  }
  e.weights.assign(32, 1.0 / 32.0);

  Rng rng(14);
  const SirResult r = sir_step(e, f, DynamicsParams{}, o, 16.0, rng);
  const double total =
    std::accumulate(r.ensemble.weights.begin(), r.ensemble.weights.end(), 0.0);
  CHECK(std::fabs(total - 1.0) < 1e-12);
}
