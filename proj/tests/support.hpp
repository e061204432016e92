#pragma once

// Shared generators for property tests.

#include "qnu/netmodel.hpp"

#include <random>
#include <vector>

namespace qnu::testing {

/// Connected random network: a random spanning tree plus extra links, rates
/// in [0.1, 1], swap efficiencies in [0, 1], ε_eff drawn from a short list.
/// With `bipartite` set, extra links only join opposite tree levels, so the
/// physical graph has no triangles.
inline NetworkSpec random_network(std::mt19937& rng, std::size_t min_nodes, std::size_t max_nodes,
                                  bool bipartite = false) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t M = min_nodes + rng() % (max_nodes - min_nodes + 1);
  NetworkSpec::RateMap rates;
  std::vector<int> side(M, 0);
  for (NodeId v = 1; v < M; ++v) {
    const NodeId parent = rng() % v;
    side[v] = 1 - side[parent];
    rates[NodePair(parent, v)] = 0.1 + 0.9 * unit(rng);
  }
  for (NodeId a = 0; a < M; ++a)
    for (NodeId b = a + 1; b < M; ++b)
      if (unit(rng) < 0.2 && (!bipartite || side[a] != side[b]))
        rates[NodePair(a, b)] = 0.1 + 0.9 * unit(rng);
  std::vector<double> q(M);
  for (double& x : q) x = unit(rng);
  constexpr double kEps[] = {0.0, 0.0, 0.01, 0.03};
  return NetworkSpec(std::move(q), std::move(rates), kEps[rng() % 4]);
}

}  // namespace qnu::testing
