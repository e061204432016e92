#include "qnu/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace qnu {

namespace {

// Relative slack for integer thresholds computed from floating ε_eff, so that
// e.g. m·d = 1/ε lands on the feasible side despite rounding of ε itself.
constexpr double kThresholdSlack = 1e-12;

}  // namespace

void UtilityModel::validate() const {
  if (!(beta > 1.0) || !std::isfinite(beta))
    throw std::invalid_argument("utility model: beta must be > 1");
  if (taper_v0 && !(*taper_v0 > 0.0))
    throw std::invalid_argument("utility model: taper threshold must be > 0");
}

Coalition::Coalition(std::vector<NodeId> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
  if (members_.size() < 2) throw std::invalid_argument("coalition needs at least two nodes");
}

bool Coalition::contains(NodeId v) const {
  return std::binary_search(members_.begin(), members_.end(), v);
}

double volume(std::size_t m, int d, const UtilityModel& u) {
  if (m < 2 || d < 1) throw std::invalid_argument("volume: need m >= 2 and d >= 1");
  const double exponent = static_cast<double>(std::min<std::size_t>(m, static_cast<std::size_t>(d)));
  const double v = std::pow(u.beta, exponent);
  if (u.taper_v0) return v / (1.0 + v / *u.taper_v0);
  return v;
}

double demand_coefficient(std::size_t m, int d) {
  if (m < 2 || d < 1) throw std::invalid_argument("demand_coefficient: need m >= 2 and d >= 1");
  const double md = static_cast<double>(d);
  return m % 2 == 0 ? 2.0 * md / static_cast<double>(m - 1) : 2.0 * md / static_cast<double>(m);
}

int max_depth(std::size_t m, double epsilon_eff) {
  if (m < 2) throw std::invalid_argument("max_depth: need m >= 2");
  if (epsilon_eff < 0.0) throw std::invalid_argument("max_depth: epsilon_eff must be >= 0");
  if (epsilon_eff == 0.0) return static_cast<int>(m);
  const double bound = (1.0 + kThresholdSlack) / (epsilon_eff * static_cast<double>(m));
  if (bound >= static_cast<double>(m)) return static_cast<int>(m);
  return static_cast<int>(std::floor(bound));
}

std::optional<int> optimal_depth(std::size_t m, double epsilon_eff, const UtilityModel& u) {
  const int dmax = max_depth(m, epsilon_eff);
  if (dmax < 1) return std::nullopt;
  int best = 1;
  double best_density = volume(m, 1, u);
  for (int d = 2; d <= dmax; ++d) {
    const double density = volume(m, d, u) / d;
    if (density > best_density) {
      best = d;
      best_density = density;
    }
  }
  return best;
}

std::optional<std::size_t> error_size_cap(double epsilon_eff) {
  if (epsilon_eff < 0.0) throw std::invalid_argument("epsilon_eff must be >= 0");
  if (epsilon_eff == 0.0) return std::nullopt;
  return static_cast<std::size_t>(std::floor((1.0 + kThresholdSlack) / std::sqrt(epsilon_eff)));
}

std::size_t effective_size_cap(const NetworkSpec& net, const EnumerationOptions& opts) {
  const std::size_t M = net.num_nodes();
  if (opts.size_cap) {
    if (*opts.size_cap < 2) throw std::invalid_argument("size cap must be >= 2");
    return std::min(M, *opts.size_cap);
  }
  if (opts.prune) {
    if (const auto cap = error_size_cap(net.epsilon_eff())) return std::min(M, *cap);
  }
  return M;
}

namespace {

void check_budget(std::size_t count, const EnumerationOptions& opts) {
  if (count > opts.max_coalitions)
    throw std::length_error("coalition enumeration exceeded " +
                            std::to_string(opts.max_coalitions) + " candidates");
}

std::vector<Coalition> enumerate_all(std::size_t M, std::size_t cap,
                                     const EnumerationOptions& opts) {
  std::vector<Coalition> out;
  // Lexicographic k-subsets for each size in turn.
  for (std::size_t k = 2; k <= cap; ++k) {
    std::vector<NodeId> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    for (;;) {
      out.emplace_back(idx);
      check_budget(out.size(), opts);
      std::size_t i = k;
      while (i > 0 && idx[i - 1] == M - k + (i - 1)) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

// ESU-style enumeration: every connected subset is produced exactly once,
// rooted at its smallest member.
std::vector<Coalition> enumerate_connected(const NetworkSpec& net, std::size_t cap,
                                           const EnumerationOptions& opts) {
  const std::size_t M = net.num_nodes();
  const auto adj = net.adjacency();
  std::vector<Coalition> out;
  std::vector<NodeId> sub;
  std::vector<int> near_sub(M, 0);  // members of sub or adjacent to one

  const auto mark = [&](NodeId v, int delta) {
    near_sub[v] += delta;
    for (NodeId u : adj[v]) near_sub[u] += delta;
  };

  std::function<void(std::vector<NodeId>, NodeId)> extend = [&](std::vector<NodeId> ext,
                                                                NodeId root) {
    if (sub.size() >= 2) {
      out.emplace_back(sub);
      check_budget(out.size(), opts);
    }
    if (sub.size() == cap) return;
    while (!ext.empty()) {
      const NodeId w = ext.back();
      ext.pop_back();
      std::vector<NodeId> next = ext;
      for (NodeId u : adj[w])
        if (u > root && near_sub[u] == 0) next.push_back(u);
      sub.push_back(w);
      mark(w, +1);
      extend(std::move(next), root);
      mark(w, -1);
      sub.pop_back();
    }
  };

  for (NodeId v = 0; v < M; ++v) {
    sub.assign(1, v);
    mark(v, +1);
    std::vector<NodeId> ext;
    for (NodeId u : adj[v])
      if (u > v) ext.push_back(u);
    extend(std::move(ext), v);
    mark(v, -1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<Coalition> enumerate_coalitions(const NetworkSpec& net,
                                            const EnumerationOptions& opts) {
  const std::size_t cap = effective_size_cap(net, opts);
  if (opts.mode == EnumerationMode::All) {
    if (net.num_nodes() > kMaxAllModeNodes && !opts.force)
      throw std::invalid_argument("enumerate_coalitions: 'all' mode on more than " +
                                  std::to_string(kMaxAllModeNodes) +
                                  " nodes requires force");
    return enumerate_all(net.num_nodes(), cap, opts);
  }
  return enumerate_connected(net, cap, opts);
}

std::vector<TaskSpec> build_tasks(const NetworkSpec& net, std::span<const Coalition> coalitions,
                                  const UtilityModel& u) {
  u.validate();
  std::vector<TaskSpec> tasks;
  tasks.reserve(coalitions.size());
  for (const Coalition& c : coalitions) {
    if (c.members().back() >= net.num_nodes())
      throw std::invalid_argument("build_tasks: coalition references unknown node");
    const auto d = optimal_depth(c.size(), net.epsilon_eff(), u);
    if (!d) continue;
    tasks.push_back(TaskSpec{c, *d, volume(c.size(), *d, u), demand_coefficient(c.size(), *d)});
  }
  // Exactly one task per distinct coalition.
  std::stable_sort(tasks.begin(), tasks.end(),
                   [](const TaskSpec& a, const TaskSpec& b) { return a.coalition < b.coalition; });
  tasks.erase(std::unique(tasks.begin(), tasks.end(),
                          [](const TaskSpec& a, const TaskSpec& b) {
                            return a.coalition == b.coalition;
                          }),
              tasks.end());
  return tasks;
}

}  // namespace qnu
