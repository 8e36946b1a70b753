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

#include "dpf.hpp"

#include <algorithm>
#include <atomic>
#include <barrier>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <utility>

#include "errors.hpp"

namespace arpf
{

namespace
{

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validate_pes(const std::vector<PEState> & pes)
{
  if (pes.empty()) {
    throw InvalidArgument("engine: no PEs");
  }
  const std::size_t n_p = pes[0].particles.size();
  if (n_p == 0) {
    throw InvalidArgument("engine: PEs hold no particles");
  }
  for (std::size_t i = 0; i < pes.size(); ++i) {
    if (pes[i].id != i) {
      throw InvalidArgument("engine: PEs must be ordered by id");
    }
    if (pes[i].particles.size() != n_p) {
      throw InvalidArgument("engine: every PE must hold the same particle count");
    }
  }
}

void check_conservation(const std::vector<PEState> & pes, std::size_t n_p)
{
  for (const PEState & pe : pes) {
    if (pe.particles.size() != n_p) {
      throw std::logic_error("engine: particle-count conservation violated");
    }
  }
}

/// Steps 2-6 of the distributed iteration for one PE: renormalize carried
/// weights by the previous global sum, propagate, weight against the frame,
/// estimate, resample locally, and reset the local weights. With
/// carry_weights = false this is a plain SIR step with unconditional
/// resampling and a memoryless weight sum. Returns the degenerate flag.
bool local_pe_step(PEState & pe, const Frame & frame, const double * plane,
  const DynamicsParams & dyn, const ObservationParams & obs, double prev_log_total,
  bool carry_weights)
{
  auto & particles = pe.particles;
  const std::size_t n = particles.size();

  if (carry_weights) {
    for (Particle & p : particles) {
      p.log_weight -= prev_log_total;
    }
  }
  for (Particle & p : particles) {
    p.state = propagate(p.state, dyn, pe.rng);
  }

  std::vector<double> log_w(n);
  std::vector<double> log_lik(n);
  for (std::size_t i = 0; i < n; ++i) {
    log_w[i] = particles[i].log_weight;
    log_lik[i] = log_likelihood(particles[i].state, frame, obs, plane);
  }
  const WeightUpdate up = update_log_weights(log_w, log_lik);

  StateVector est;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = up.normalized[i];
    est.x += w * particles[i].state.x;
    est.y += w * particles[i].state.y;
    est.vx += w * particles[i].state.vx;
    est.vy += w * particles[i].state.vy;
    est.i0 += w * particles[i].state.i0;
  }
  pe.local_estimate = est;
  pe.log_weight_sum = up.log_weight_sum;

  const auto indices = systematic_resample_indices(up.normalized, pe.rng);
  std::vector<Particle> next;
  next.reserve(n);
  for (std::uint32_t idx : indices) {
    next.push_back(particles[idx]);
  }
  const double reset = carry_weights && std::isfinite(up.log_weight_sum)
                         ? up.log_weight_sum
                         : -std::log(static_cast<double>(n));
  for (Particle & p : next) {
    p.log_weight = reset;
  }
  particles = std::move(next);
  return up.degenerate;
}

int fixed_exchange_count(int n_p, double fixed_ratio)
{
  if (!(fixed_ratio >= 0.0) || fixed_ratio > 0.5) {
    throw InvalidArgument("exchange: fixed_ratio must be in [0, 0.5]");
  }
  // The epsilon absorbs the representation error of ratios like 0.3 so the
  // intended floor is taken.
  return static_cast<int>(std::floor(fixed_ratio * static_cast<double>(n_p) + 1e-9));
}

IterationPlan make_plan(const ExchangePolicy & policy, std::uint32_t m, int n_p,
  const GlobalReduction & previous, Rng & coordinator, const RingPermutation & identity)
{
  switch (policy.mode) {
    case ExchangePolicy::Mode::sir_independent:
      return IterationPlan{identity, 0};
    case ExchangePolicy::Mode::fixed:
      return IterationPlan{identity, fixed_exchange_count(n_p, policy.fixed_ratio)};
    case ExchangePolicy::Mode::adaptive:
    default: {
      RingPermutation ring = randomize_ring(m, coordinator);
      const int n_ex = adaptive_exchange_count(n_p, previous.pe_eff, static_cast<int>(m), policy.cutoff);
      return IterationPlan{std::move(ring), n_ex};
    }
  }
}

IterationRecord reduce_and_record(const std::vector<PEState> & pes, int n_ex, bool degenerate)
{
  std::vector<StateVector> estimates(pes.size());
  std::vector<double> log_sums(pes.size());
  for (std::size_t i = 0; i < pes.size(); ++i) {
    estimates[i] = pes[i].local_estimate;
    log_sums[i] = pes[i].log_weight_sum;
  }
  IterationRecord rec;
  rec.reduction = reduce_log_weight_sums(estimates, log_sums);
  rec.degenerate = degenerate;
  if (n_ex > 0) {
    rec.exchanged = static_cast<std::uint64_t>(n_ex) * pes.size();
    rec.messages = pes.size();
    rec.bytes = rec.exchanged * kParticleWireBytes;
  }
  return rec;
}

void validate_policy(const ExchangePolicy & policy)
{
  if (policy.mode == ExchangePolicy::Mode::fixed &&
    (!(policy.fixed_ratio >= 0.0) || policy.fixed_ratio > 0.5)) {
    throw InvalidArgument("policy: fixed_ratio must be in [0, 0.5]");
  }
  if (policy.mode == ExchangePolicy::Mode::adaptive &&
    (!(policy.cutoff > 0.0) || policy.cutoff > 1.0)) {
    throw InvalidArgument("policy: cutoff must be in (0, 1]");
  }
}

}  // namespace

double pe_eff(std::span<const double> weight_sums)
{
  if (weight_sums.empty()) {
    throw InvalidArgument("pe_eff: no PEs");
  }
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weight_sums) {
    if (!std::isfinite(w) || w < 0.0) {
      throw InvalidArgument("pe_eff: weight sums must be finite and >= 0");
    }
    sum += w;
    sum_sq += w * w;
  }
  if (!(sum > 0.0)) {
    throw DivergenceError("pe_eff: no PE has any weight mass");
  }
  return (sum * sum) / sum_sq;
}

int adaptive_exchange_count(int n_p, double pe_eff_value, int m, double cutoff)
{
  if (n_p < 1 || m < 1) {
    throw InvalidArgument("adaptive exchange: need n_p >= 1 and m >= 1");
  }
  if (m == 1) {
    return 0;  // no neighbor exists
  }
  const double pe = std::clamp(pe_eff_value, 1.0, static_cast<double>(m));
  if (pe / static_cast<double>(m) > cutoff) {
    return 0;
  }
  double ratio = 0.5 - 0.5 * (pe - 1.0) / (static_cast<double>(m) - 1.0);
  ratio = std::clamp(ratio, 0.0, 0.5);
  return static_cast<int>(std::floor(static_cast<double>(n_p) * ratio));
}

std::vector<Particle> select_outgoing(std::vector<Particle> & particles, std::size_t n_ex,
  Rng & rng)
{
  const std::size_t n = particles.size();
  if (n_ex > n) {
    throw InvalidArgument("select_outgoing: n_ex exceeds ensemble size");
  }
  if (n_ex == 0) {
    return {};
  }
  // Partial Fisher-Yates: the first n_ex slots are a uniform ordered sample.
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  for (std::size_t i = 0; i < n_ex; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  std::vector<char> picked(n, 0);
  std::vector<Particle> outgoing;
  outgoing.reserve(n_ex);
  for (std::size_t i = 0; i < n_ex; ++i) {
    outgoing.push_back(particles[idx[i]]);
    picked[idx[i]] = 1;
  }
  std::vector<Particle> remaining;
  remaining.reserve(n - n_ex);
  for (std::size_t i = 0; i < n; ++i) {
    if (!picked[i]) {
      remaining.push_back(particles[i]);
    }
  }
  particles = std::move(remaining);
  return outgoing;
}

void exchange_step(std::vector<PEState> & pes, const RingPermutation & ring, std::size_t n_ex)
{
  if (n_ex == 0) {
    return;
  }
  const std::size_t m = pes.size();
  std::vector<std::vector<Particle>> outgoing(m);
  for (std::size_t i = 0; i < m; ++i) {
    outgoing[i] = select_outgoing(pes[i].particles, n_ex, pes[i].rng);
  }
  for (std::size_t i = 0; i < m; ++i) {
    auto & dest = pes[ring.successor(static_cast<std::uint32_t>(i))].particles;
    dest.insert(dest.end(), std::make_move_iterator(outgoing[i].begin()),
      std::make_move_iterator(outgoing[i].end()));
  }
}

GlobalReduction master_reduce(std::span<const StateVector> local_estimates,
  std::span<const double> local_weight_sums)
{
  if (local_estimates.empty() || local_estimates.size() != local_weight_sums.size()) {
    throw InvalidArgument("master_reduce: estimates and weight sums must match and be nonempty");
  }
  GlobalReduction gr;
  gr.pe_eff = pe_eff(local_weight_sums);  // also validates and detects divergence

  double total = 0.0;
  StateVector est;
  for (std::size_t i = 0; i < local_weight_sums.size(); ++i) {
    const double w = local_weight_sums[i];
    total += w;
    est.x += w * local_estimates[i].x;
    est.y += w * local_estimates[i].y;
    est.vx += w * local_estimates[i].vx;
    est.vy += w * local_estimates[i].vy;
    est.i0 += w * local_estimates[i].i0;
  }
  est.x /= total;
  est.y /= total;
  est.vx /= total;
  est.vy /= total;
  est.i0 /= total;
  gr.estimate = est;
  gr.log_total_weight = std::log(total);
  return gr;
}

GlobalReduction reduce_log_weight_sums(std::span<const StateVector> local_estimates,
  std::span<const double> log_weight_sums)
{
  if (local_estimates.empty() || local_estimates.size() != log_weight_sums.size()) {
    throw InvalidArgument("reduce: estimates and weight sums must match and be nonempty");
  }
  double mx = kNegInf;
  for (double l : log_weight_sums) {
    mx = std::max(mx, l);
  }
  if (!std::isfinite(mx)) {
    throw DivergenceError("reduce: every PE reports zero weight mass");
  }
  std::vector<double> relative(log_weight_sums.size());
  for (std::size_t i = 0; i < log_weight_sums.size(); ++i) {
    relative[i] = std::exp(log_weight_sums[i] - mx);
  }
  GlobalReduction gr = master_reduce(local_estimates, relative);
  gr.log_total_weight += mx;
  return gr;
}

IterationPlan rna_plan(std::uint32_t m, int n_p, double fixed_ratio)
{
  return IterationPlan{identity_ring(m), fixed_exchange_count(n_p, fixed_ratio)};
}

IterationPlan arna_plan(std::uint32_t m, int n_p, double cutoff, const GlobalReduction & previous,
  Rng & coordinator)
{
  RingPermutation ring = randomize_ring(m, coordinator);
  const int n_ex = adaptive_exchange_count(n_p, previous.pe_eff, static_cast<int>(m), cutoff);
  return IterationPlan{std::move(ring), n_ex};
}

IterationRecord dlb_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs, const IterationPlan & plan,
  const GlobalReduction & previous)
{
  validate_pes(pes);
  const std::size_t n_p = pes[0].particles.size();
  if (plan.ring.size() != pes.size()) {
    throw InvalidArgument("iteration: ring size does not match PE count");
  }
  if (plan.n_ex < 0 || static_cast<std::size_t>(plan.n_ex) > n_p) {
    throw InvalidArgument("iteration: n_ex out of range");
  }

  exchange_step(pes, plan.ring, static_cast<std::size_t>(plan.n_ex));
  check_conservation(pes, n_p);

  const std::vector<double> plane = make_lgamma_plane(frame);
  bool degenerate = false;
  for (PEState & pe : pes) {
    degenerate |= local_pe_step(pe, frame, plane.data(), dyn, obs, previous.log_total_weight, true);
  }
  check_conservation(pes, n_p);
  return reduce_and_record(pes, plan.n_ex, degenerate);
}

IterationRecord rna_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs, double fixed_ratio,
  const GlobalReduction & previous)
{
  validate_pes(pes);
  const auto plan = rna_plan(static_cast<std::uint32_t>(pes.size()),
    static_cast<int>(pes[0].particles.size()), fixed_ratio);
  return dlb_iteration(pes, frame, dyn, obs, plan, previous);
}

IterationRecord arna_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs, double cutoff,
  const GlobalReduction & previous, Rng & coordinator)
{
  validate_pes(pes);
  const auto plan = arna_plan(static_cast<std::uint32_t>(pes.size()),
    static_cast<int>(pes[0].particles.size()), cutoff, previous, coordinator);
  return dlb_iteration(pes, frame, dyn, obs, plan, previous);
}

IterationRecord sir_independent_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs)
{
  validate_pes(pes);
  const std::vector<double> plane = make_lgamma_plane(frame);
  bool degenerate = false;
  for (PEState & pe : pes) {
    degenerate |= local_pe_step(pe, frame, plane.data(), dyn, obs, 0.0, false);
  }
  check_conservation(pes, pes[0].particles.size());
  return reduce_and_record(pes, 0, degenerate);
}

namespace
{

FilterRun run_sequential(std::vector<PEState> & pes, std::span<const Frame> frames,
  const DynamicsParams & dyn, const ObservationParams & obs, const ExchangePolicy & policy,
  const GlobalReduction & initial, Rng & coordinator)
{
  const auto m = static_cast<std::uint32_t>(pes.size());
  const int n_p = static_cast<int>(pes[0].particles.size());
  const RingPermutation identity = identity_ring(m);

  FilterRun run;
  run.records.reserve(frames.size());
  GlobalReduction prev = initial;
  for (const Frame & frame : frames) {
    IterationRecord rec;
    try {
      if (policy.mode == ExchangePolicy::Mode::sir_independent) {
        rec = sir_independent_iteration(pes, frame, dyn, obs);
      } else {
        const IterationPlan plan = make_plan(policy, m, n_p, prev, coordinator, identity);
        rec = dlb_iteration(pes, frame, dyn, obs, plan, prev);
      }
    } catch (const DivergenceError &) {
      run.diverged = true;
      break;
    }
    prev = rec.reduction;
    run.records.push_back(std::move(rec));
  }
  return run;
}

FilterRun run_parallel(std::vector<PEState> & pes, std::span<const Frame> frames,
  const DynamicsParams & dyn, const ObservationParams & obs, const ExchangePolicy & policy,
  const GlobalReduction & initial, Rng & coordinator)
{
  const auto m = static_cast<std::uint32_t>(pes.size());
  const std::size_t n_p = pes[0].particles.size();
  const bool carry = policy.mode != ExchangePolicy::Mode::sir_independent;
  const RingPermutation identity = identity_ring(m);

  std::vector<std::vector<Particle>> mailboxes(m);
  std::vector<StateVector> estimates(m);
  std::vector<double> log_sums(m);
  std::vector<char> degenerate(m, 0);
  std::vector<IterationRecord> records;
  records.reserve(frames.size());

  GlobalReduction prev = initial;
  IterationPlan plan = make_plan(policy, m, static_cast<int>(n_p), prev, coordinator, identity);
  std::vector<double> plane = make_lgamma_plane(frames[0]);

  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto fail = [&](std::exception_ptr e) {
    std::scoped_lock lock(error_mutex);
    if (!error) {
      error = e;
    }
    stop.store(true);
  };

  std::barrier sync(static_cast<std::ptrdiff_t>(m));

  auto worker = [&](std::uint32_t pe_id) {
    for (std::size_t k = 0; k < frames.size(); ++k) {
      // Phase A: pick outgoing particles from the pre-iteration ensemble.
      if (!stop.load(std::memory_order_acquire)) {
        try {
          if (plan.n_ex > 0) {
            mailboxes[pe_id] =
              select_outgoing(pes[pe_id].particles, static_cast<std::size_t>(plan.n_ex), pes[pe_id].rng);
          }
        } catch (...) {
          fail(std::current_exception());
        }
      }
      sync.arrive_and_wait();

      // Phase B: receive from the ring predecessor, then run the local step.
      if (!stop.load(std::memory_order_acquire)) {
        try {
          if (plan.n_ex > 0) {
            auto & inbox = mailboxes[plan.ring.predecessor(pe_id)];
            auto & mine = pes[pe_id].particles;
            mine.insert(mine.end(), std::make_move_iterator(inbox.begin()),
              std::make_move_iterator(inbox.end()));
            inbox.clear();
            if (mine.size() != n_p) {
              throw std::logic_error("engine: particle-count conservation violated");
            }
          }
          degenerate[pe_id] = local_pe_step(pes[pe_id], frames[k], plane.data(), dyn, obs,
                                prev.log_total_weight, carry)
                                ? 1
                                : 0;
          estimates[pe_id] = pes[pe_id].local_estimate;
          log_sums[pe_id] = pes[pe_id].log_weight_sum;
        } catch (...) {
          fail(std::current_exception());
        }
      }
      sync.arrive_and_wait();

      // Phase C: worker 0 acts as master, reduces and plans the next round.
      if (pe_id == 0 && !stop.load(std::memory_order_acquire)) {
        try {
          IterationRecord rec;
          rec.reduction = reduce_log_weight_sums(estimates, log_sums);
          rec.degenerate = std::count(degenerate.begin(), degenerate.end(), 1) > 0;
          if (plan.n_ex > 0) {
            rec.exchanged = static_cast<std::uint64_t>(plan.n_ex) * m;
            rec.messages = m;
            rec.bytes = rec.exchanged * kParticleWireBytes;
          }
          prev = rec.reduction;
          records.push_back(std::move(rec));
          if (k + 1 < frames.size()) {
            plan = make_plan(policy, m, static_cast<int>(n_p), prev, coordinator, identity);
            plane = make_lgamma_plane(frames[k + 1]);
          }
        } catch (...) {
          fail(std::current_exception());
        }
      }
      sync.arrive_and_wait();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(m);
  for (std::uint32_t i = 0; i < m; ++i) {
    threads.emplace_back(worker, i);
  }
  for (std::thread & t : threads) {
    t.join();
  }
  FilterRun run;
  run.records = std::move(records);
  if (error) {
    try {
      std::rethrow_exception(error);
    } catch (const DivergenceError &) {
      run.diverged = true;
    }
  }
  return run;
}

}  // namespace

FilterRun run_filter(std::vector<PEState> & pes, std::span<const Frame> frames,
  const DynamicsParams & dyn, const ObservationParams & obs, const ExchangePolicy & policy,
  const GlobalReduction & initial, Backend backend, Rng & coordinator)
{
  validate_policy(policy);
  validate_pes(pes);
  if (frames.empty()) {
    return {};
  }
  if (backend == Backend::parallel) {
    return run_parallel(pes, frames, dyn, obs, policy, initial, coordinator);
  }
  return run_sequential(pes, frames, dyn, obs, policy, initial, coordinator);
}

}  // namespace arpf
