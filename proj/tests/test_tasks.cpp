#include "doctest.h"

#include "qnu/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

using namespace qnu;

namespace {

// Brute force over bitmasks: connected induced subgraphs of size ≥ 2.
std::set<std::vector<NodeId>> connected_subsets(const NetworkSpec& net, std::size_t cap) {
  const std::size_t M = net.num_nodes();
  std::set<std::vector<NodeId>> out;
  for (unsigned mask = 0; mask < (1u << M); ++mask) {
    std::vector<NodeId> members;
    for (NodeId v = 0; v < M; ++v)
      if (mask >> v & 1u) members.push_back(v);
    if (members.size() < 2 || members.size() > cap) continue;
    unsigned seen = 1u << members.front();
    for (bool grew = true; grew;) {
      grew = false;
      for (NodeId a : members)
        for (NodeId b : members)
          if ((seen >> a & 1u) && !(seen >> b & 1u) && net.rate(a, b) > 0.0) {
            seen |= 1u << b;
            grew = true;
          }
    }
    if (seen == mask) out.insert(members);
  }
  return out;
}

}  // namespace

TEST_CASE("volume") {
  const UtilityModel two{2.0, std::nullopt};
  CHECK(volume(4, 2, two) == 4.0);
  CHECK(volume(2, 5, two) == 4.0);
  CHECK(volume(10, 10, UtilityModel{2.0, 256.0}) == doctest::Approx(204.8).epsilon(1e-14));
  CHECK(volume(3, 3, UtilityModel{3.0, std::nullopt}) == 27.0);
  CHECK_THROWS_AS(volume(1, 1, two), std::invalid_argument);
  CHECK_THROWS_AS(volume(2, 0, two), std::invalid_argument);
  CHECK_THROWS_AS((UtilityModel{1.0, std::nullopt}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((UtilityModel{2.0, 0.0}.validate()), std::invalid_argument);
}

TEST_CASE("demand coefficient") {
  CHECK(demand_coefficient(2, 1) == 2.0);
  CHECK(demand_coefficient(3, 2) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(demand_coefficient(4, 4) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
  CHECK(demand_coefficient(5, 5) == 2.0);
}

TEST_CASE("depth limits") {
  CHECK(max_depth(4, 0.0) == 4);
  CHECK(max_depth(20, 0.01) == 5);
  CHECK(max_depth(10, 0.01) == 10);
  CHECK(max_depth(11, 0.01) == 9);
  CHECK(max_depth(2, 1.0) == 0);

  const UtilityModel two;
  CHECK(optimal_depth(4, 0.0, two) == 4);
  CHECK(optimal_depth(2, 0.0, two) == 1);
  CHECK(optimal_depth(20, 0.01, two) == 5);
  CHECK(optimal_depth(3, 0.0, two) == 3);
  CHECK_FALSE(optimal_depth(3, 0.5, two).has_value());

  CHECK(error_size_cap(0.01) == 10u);
  CHECK(error_size_cap(0.04) == 5u);
  CHECK(error_size_cap(1.0) == 1u);
  CHECK_FALSE(error_size_cap(0.0).has_value());
}

TEST_CASE("optimal depth maximises volume per layer") {
  for (double beta : {1.2, 1.5, 2.0, 3.0})
    for (double eps : {0.0, 0.003, 0.01, 0.04})
      for (std::size_t m = 2; m <= 16; ++m) {
        const UtilityModel u{beta, std::nullopt};
        const int dmax = max_depth(m, eps);
        const auto d = optimal_depth(m, eps, u);
        if (dmax == 0) {
          CHECK_FALSE(d.has_value());
          continue;
        }
        REQUIRE(d.has_value());
        CHECK(static_cast<double>(m) * *d * eps <= 1.0 + 1e-12);
        for (int k = 1; k <= dmax; ++k)
          CHECK(volume(m, *d, u) / *d >= volume(m, k, u) / k);
        for (int k = 1; k < *d; ++k) CHECK(volume(m, *d, u) / *d > volume(m, k, u) / k);
      }
}

TEST_CASE("coalition ordering") {
  CHECK(Coalition({2, 0, 1}).members() == std::vector<NodeId>{0, 1, 2});
  CHECK_THROWS_AS(Coalition({1}), std::invalid_argument);
  CHECK_THROWS_AS(Coalition({1, 1}), std::invalid_argument);
  CHECK(Coalition({3, 4}) < Coalition({0, 1, 2}));
  CHECK(Coalition({0, 2}) < Coalition({1, 2}));
}

TEST_CASE("enumeration examples") {
  const auto chain4 = enumerate_coalitions(make_chain(4, 0.6, 0.9, 0.0));
  const std::vector<Coalition> intervals{Coalition({0, 1}), Coalition({1, 2}),
                                         Coalition({2, 3}), Coalition({0, 1, 2}),
                                         Coalition({1, 2, 3}), Coalition({0, 1, 2, 3})};
  CHECK(chain4 == intervals);

  EnumerationOptions all;
  all.mode = EnumerationMode::All;
  CHECK(enumerate_coalitions(make_chain(3, 0.6, 0.9, 0.0), all).size() == 4);

  const auto capped = enumerate_coalitions(make_chain(20, 0.6, 0.9, 0.01));
  REQUIRE_FALSE(capped.empty());
  CHECK(capped.back().size() == 10);
  CHECK(capped.size() == 19 + 18 + 17 + 16 + 15 + 14 + 13 + 12 + 11);

  EnumerationOptions unpruned;
  unpruned.prune = false;
  CHECK(enumerate_coalitions(make_chain(20, 0.6, 0.9, 0.01), unpruned).size() == 190);

  EnumerationOptions explicit_cap;
  explicit_cap.size_cap = 3;
  CHECK(enumerate_coalitions(make_chain(6, 0.6, 0.9, 0.0), explicit_cap).size() == 9);

  CHECK_THROWS_AS(enumerate_coalitions(make_chain(21, 0.6, 0.9, 0.0), all),
                  std::invalid_argument);
  EnumerationOptions tiny;
  tiny.max_coalitions = 3;
  CHECK_THROWS_AS(enumerate_coalitions(make_chain(6, 0.6, 0.9, 0.0), tiny), std::length_error);
}

TEST_CASE("connected enumeration matches brute force") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t M = 3 + rng() % 7;
    NetworkSpec::RateMap rates;
    for (NodeId a = 0; a < M; ++a)
      for (NodeId b = a + 1; b < M; ++b)
        if (rng() % 3 == 0) rates[NodePair(a, b)] = 0.5;
    const NetworkSpec net(std::vector<double>(M, 0.9), rates, trial % 2 ? 0.04 : 0.0);
    const auto got = enumerate_coalitions(net);
    const std::size_t cap = trial % 2 ? 5 : M;
    const auto want = connected_subsets(net, cap);
    std::set<std::vector<NodeId>> seen;
    for (const auto& c : got) seen.insert(c.members());
    CHECK(seen == want);
    CHECK(seen.size() == got.size());
    CHECK(std::is_sorted(got.begin(), got.end()));
  }
}

TEST_CASE("building tasks") {
  const UtilityModel two;
  const auto net3 = make_chain(3, 0.6, 0.9, 0.0);
  const auto tasks = build_tasks(net3, enumerate_coalitions(net3), two);
  REQUIRE(tasks.size() == 3);
  CHECK(tasks[0].coalition == Coalition({0, 1}));
  CHECK(tasks[0].depth == 1);
  CHECK(tasks[1].coalition == Coalition({1, 2}));
  CHECK(tasks[1].depth == 1);
  CHECK(tasks[2].coalition == Coalition({0, 1, 2}));
  CHECK(tasks[2].depth == 3);
  CHECK(tasks[2].volume_coefficient == 8.0);
  CHECK(tasks[2].demand_coefficient == 2.0);

  const auto noisy = make_chain(4, 0.6, 0.9, 0.6);
  EnumerationOptions unpruned;
  unpruned.prune = false;
  CHECK(build_tasks(noisy, enumerate_coalitions(noisy, unpruned), two).empty());

  const auto net11 = make_chain(11, 0.6, 0.9, 0.01);
  const auto tasks11 = build_tasks(net11, enumerate_coalitions(net11), two);
  // 55 intervals, less the 11-node one removed by the size cap.
  CHECK(tasks11.size() == 54);
  std::size_t largest = 0;
  for (const auto& t : tasks11) {
    largest = std::max(largest, t.size());
    CHECK(static_cast<double>(t.size()) * t.depth * 0.01 <= 1.0 + 1e-12);
  }
  CHECK(largest == 10);

  // Without the cap the full chain still admits depth 9 and stays.
  const auto tasks_unpruned = build_tasks(net11, enumerate_coalitions(net11, unpruned), two);
  CHECK(tasks_unpruned.size() == 55);
  CHECK(tasks_unpruned.back().size() == 11);
  CHECK(tasks_unpruned.back().depth == 9);
}
