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

#ifndef ARPF_DPF_HPP_
#define ARPF_DPF_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "resample.hpp"
#include "state_model.hpp"
#include "topology.hpp"

namespace arpf
{

/// A particle as held (and shipped) by the distributed engine. Weights live
/// in log space end to end; see update_log_weights for why that is exact.
struct Particle
{
  StateVector state;
  double log_weight = 0.0;
  std::int32_t owner = 0;  // PE the particle was created on

  friend bool operator==(const Particle &, const Particle &) = default;
};

/// Everything one processing element owns. The ensemble size stays constant
/// across iterations; the rng stream is private to the PE, which is what
/// makes the sequential and parallel backends bit-identical.
struct PEState
{
  std::uint32_t id = 0;
  std::vector<Particle> particles;
  Rng rng{0};
  StateVector local_estimate{};
  double log_weight_sum = 0.0;  // log W_k^(m)
};

/// Result of the master reduction, broadcast to all PEs each iteration.
struct GlobalReduction
{
  StateVector estimate{};         // global weighted estimate
  double log_total_weight = 0.0;  // log W_k
  double pe_eff = 1.0;            // effective PE count, in [1, M]
};

struct ExchangePolicy
{
  enum class Mode { sir_independent, fixed, adaptive };
  Mode mode = Mode::adaptive;
  double fixed_ratio = 0.1;  // fraction of N_p sent per iteration (fixed mode), in [0, 0.5]
  double cutoff = 0.99;      // adaptive mode: no exchange while pe_eff/M > cutoff
};

enum class Backend { sequential, parallel };

/// On-wire footprint of one particle: five state components plus the weight
/// as 8-byte reals, plus a 4-byte owner id.
inline constexpr std::uint32_t kParticleWireBytes = 6 * 8 + 4;

struct IterationRecord
{
  GlobalReduction reduction;
  std::uint64_t exchanged = 0;  // particles moved this iteration
  std::uint64_t messages = 0;   // payload messages this iteration
  std::uint64_t bytes = 0;      // payload bytes this iteration
  bool degenerate = false;      // some PE needed a uniform weight reset
};

/// Effective number of PEs carrying weight mass: (sum W_m)^2 / sum W_m^2.
/// Scale invariant; equals M exactly when all sums are equal.
double pe_eff(std::span<const double> weight_sums);

/// Particles to send per PE this iteration, linear in (1 - (pe_eff - 1) /
/// (M - 1)) between 50% and 0% of N_p, floored; zero once pe_eff/M exceeds
/// the cutoff, and zero for M = 1 (no neighbor exists).
int adaptive_exchange_count(int n_p, double pe_eff_value, int m, double cutoff);

/// Removes a uniformly random n_ex-subset from `particles` (kept in original
/// order) and returns it; consumes exactly n_ex bounded draws.
std::vector<Particle> select_outgoing(std::vector<Particle> & particles, std::size_t n_ex,
  Rng & rng);

/// Every PE sends n_ex randomly chosen particles to its ring successor and
/// receives n_ex from its predecessor; ensemble sizes are unchanged.
void exchange_step(std::vector<PEState> & pes, const RingPermutation & ring, std::size_t n_ex);

/// Reduction over per-PE weight sums given in linear scale.
GlobalReduction master_reduce(std::span<const StateVector> local_estimates,
  std::span<const double> local_weight_sums);

/// Same reduction, but from log W^(m); shifts by the global max first so the
/// result is exact for any weight magnitudes.
GlobalReduction reduce_log_weight_sums(std::span<const StateVector> local_estimates,
  std::span<const double> log_weight_sums);

/// Topology and exchange volume agreed on before an iteration starts.
struct IterationPlan
{
  RingPermutation ring;
  int n_ex = 0;
};

IterationPlan rna_plan(std::uint32_t m, int n_p, double fixed_ratio);
IterationPlan arna_plan(std::uint32_t m, int n_p, double cutoff, const GlobalReduction & previous,
  Rng & coordinator);

/// One distributed iteration: exchange over the planned ring, renormalize
/// carried weights by the previous global weight sum, propagate and weight
/// against the frame, resample locally, reset local weights to W_k^(m), and
/// reduce at the master.
IterationRecord dlb_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs, const IterationPlan & plan,
  const GlobalReduction & previous);

/// Classical RNA: identity ring, fixed exchange ratio.
IterationRecord rna_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs, double fixed_ratio,
  const GlobalReduction & previous);

/// ARNA: freshly randomized ring and the adaptive exchange count, both driven
/// by the previous iteration's broadcast.
IterationRecord arna_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs, double cutoff,
  const GlobalReduction & previous, Rng & coordinator);

/// M independent SIR filters with unconditional local resampling; no
/// exchange, memoryless per-PE weight sums in the reduction.
IterationRecord sir_independent_iteration(std::vector<PEState> & pes, const Frame & frame,
  const DynamicsParams & dyn, const ObservationParams & obs);

struct FilterRun
{
  std::vector<IterationRecord> records;  // one per completed iteration
  bool diverged = false;                 // stopped early: every PE lost all weight mass
};

/// Runs one filter iteration per frame under the chosen policy. The
/// sequential backend executes PEs round-robin; the parallel backend runs
/// one worker per PE with neighbor mailboxes and barrier-synchronized
/// reduce/broadcast. Both produce identical results for identical per-PE
/// seeds. Divergence stops the run and is reported on the result; other
/// errors propagate.
FilterRun run_filter(std::vector<PEState> & pes, std::span<const Frame> frames,
  const DynamicsParams & dyn, const ObservationParams & obs, const ExchangePolicy & policy,
  const GlobalReduction & initial, Backend backend, Rng & coordinator);

}  // namespace arpf

#endif  // ARPF_DPF_HPP_
