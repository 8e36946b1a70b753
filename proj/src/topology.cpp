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

#include "topology.hpp"

#include <numeric>
#include <utility>

#include "errors.hpp"

namespace arpf
{

RingPermutation::RingPermutation(std::vector<std::uint32_t> order) : order_(std::move(order))
{
  position_.resize(order_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) {
    position_[order_[i]] = i;
  }
}

std::uint32_t RingPermutation::successor(std::uint32_t pe) const
{
  if (pe >= size()) {
    throw InvalidArgument("ring: pe id out of range");
  }
  const std::uint32_t pos = position_[pe];
  return order_[(pos + 1) % size()];
}

std::uint32_t RingPermutation::predecessor(std::uint32_t pe) const
{
  if (pe >= size()) {
    throw InvalidArgument("ring: pe id out of range");
  }
  const std::uint32_t pos = position_[pe];
  return order_[(pos + size() - 1) % size()];
}

RingPermutation identity_ring(std::uint32_t m)
{
  if (m == 0) {
    throw InvalidArgument("ring: need at least one PE");
  }
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  return RingPermutation(std::move(order));
}

RingPermutation randomize_ring(std::uint32_t m, Rng & rng)
{
  if (m == 0) {
    throw InvalidArgument("ring: need at least one PE");
  }
  std::vector<std::uint32_t> order(m);
  std::iota(order.begin(), order.end(), 0u);
  for (std::uint32_t i = m - 1; i > 0; --i) {
    const auto j = static_cast<std::uint32_t>(rng.below(i + 1));
    std::swap(order[i], order[j]);
  }
  return RingPermutation(std::move(order));
}

}  // namespace arpf
