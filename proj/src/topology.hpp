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

#ifndef ARPF_TOPOLOGY_HPP_
#define ARPF_TOPOLOGY_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "rng.hpp"

namespace arpf
{

/// Hamiltonian-cycle labeling of the M PEs. `order` is the cyclic visiting
/// order; each PE sends to its successor and receives from its predecessor.
/// Immutable once built.
class RingPermutation
{
public:
  std::uint32_t size() const { return static_cast<std::uint32_t>(order_.size()); }
  std::span<const std::uint32_t> order() const { return order_; }

  std::uint32_t successor(std::uint32_t pe) const;
  std::uint32_t predecessor(std::uint32_t pe) const;

  friend RingPermutation identity_ring(std::uint32_t m);
  friend RingPermutation randomize_ring(std::uint32_t m, Rng & rng);

private:
  explicit RingPermutation(std::vector<std::uint32_t> order);

  std::vector<std::uint32_t> order_;     // position -> pe id
  std::vector<std::uint32_t> position_;  // pe id -> position in order_
};

/// The fixed ring 0 -> 1 -> ... -> m-1 -> 0 used by classical RNA.
RingPermutation identity_ring(std::uint32_t m);

/// Uniformly random ring via a backward Fisher-Yates shuffle; every one of
/// the m! labelings has probability 1/m!.
RingPermutation randomize_ring(std::uint32_t m, Rng & rng);

}  // namespace arpf

#endif  // ARPF_TOPOLOGY_HPP_
