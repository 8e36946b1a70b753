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

#include <map>
#include <vector>

#include <doctest.h>

#include "errors.hpp"
#include "support/stats.hpp"
#include "topology.hpp"

using namespace arpf;

TEST_CASE("identity_ring: cyclic order")
{
  const RingPermutation one = identity_ring(1);
  CHECK(one.successor(0) == 0);
  CHECK(one.predecessor(0) == 0);

  const RingPermutation three = identity_ring(3);
  CHECK(three.successor(0) == 1);
  CHECK(three.successor(2) == 0);
  CHECK(three.predecessor(0) == 2);

  const RingPermutation two = identity_ring(2);
  CHECK(two.successor(0) == 1);
  CHECK(two.predecessor(0) == 1);

  const RingPermutation five = identity_ring(5);
  CHECK(five.successor(4) == 0);

  CHECK_THROWS_AS(identity_ring(0), InvalidArgument);
  CHECK_THROWS_AS(three.successor(3), InvalidArgument);
  CHECK_THROWS_AS(three.predecessor(7), InvalidArgument);
}

TEST_CASE("randomize_ring: always a Hamiltonian cycle")
{
  for (std::uint32_t m : {1u, 2u, 3u, 5u, 8u, 24u}) {
    Rng rng(100 + m);
    for (int rep = 0; rep < 50; ++rep) {
      const RingPermutation ring = randomize_ring(m, rng);
      std::vector<bool> seen(m, false);
      for (std::uint32_t id : ring.order()) {
        REQUIRE(id < m);
        REQUIRE(!seen[id]);
        seen[id] = true;
      }
      // walking successors visits every PE exactly once
      std::vector<bool> visited(m, false);
      std::uint32_t pe = ring.order()[0];
      for (std::uint32_t step = 0; step < m; ++step) {
        REQUIRE(!visited[pe]);
        visited[pe] = true;
        pe = ring.successor(pe);
      }
      CHECK(pe == ring.order()[0]);
      for (std::uint32_t id = 0; id < m; ++id) {
        CHECK(ring.predecessor(ring.successor(id)) == id);
        CHECK(ring.successor(ring.predecessor(id)) == id);
      }
    }
  }
}

TEST_CASE("randomize_ring: deterministic given the seed")
{
  Rng a(7);
  Rng b(7);
  for (int i = 0; i < 20; ++i) {
    const RingPermutation ra = randomize_ring(6, a);
    const RingPermutation rb = randomize_ring(6, b);
    const auto oa = ra.order();
    const auto ob = rb.order();
    CHECK(std::vector<std::uint32_t>(oa.begin(), oa.end()) ==
          std::vector<std::uint32_t>(ob.begin(), ob.end()));
  }
}

TEST_CASE("randomize_ring: Fisher-Yates uniformity over S_4")
{
  Rng rng(42);
  std::map<std::vector<std::uint32_t>, int> counts;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto order = randomize_ring(4, rng).order();
    counts[std::vector<std::uint32_t>(order.begin(), order.end())] += 1;
  }
  CHECK(counts.size() == 24);
  const double expected = n / 24.0;
  double chi2 = 0.0;
  for (const auto & [perm, count] : counts) {
    const double d = count - expected;
    chi2 += d * d / expected;
  }
  CHECK(test_stats::chi_square_p_value(chi2, 23.0) > 1e-3);
}
