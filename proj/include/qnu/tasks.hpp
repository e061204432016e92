#pragma once

// Coalitions, HOG task parameters and their volume / entanglement-demand
// coefficients.

#include "qnu/netmodel.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace qnu {

struct UtilityModel {
  double beta = 2.0;
  /// Volumes v are replaced by v / (1 + v / taper_v0) when set.
  std::optional<double> taper_v0;

  void validate() const;
};

/// Sorted, duplicate-free set of at least two nodes.
class Coalition {
 public:
  explicit Coalition(std::vector<NodeId> members);

  std::size_t size() const { return members_.size(); }
  const std::vector<NodeId>& members() const { return members_; }
  bool contains(NodeId v) const;

  /// Orders by size first, then lexicographically by members.
  auto operator<=>(const Coalition& other) const {
    if (auto c = size() <=> other.size(); c != 0) return c;
    return members_ <=> other.members_;
  }
  bool operator==(const Coalition&) const = default;

 private:
  std::vector<NodeId> members_;
};

struct TaskSpec {
  Coalition coalition;
  int depth;
  double volume_coefficient;
  double demand_coefficient;

  std::size_t size() const { return coalition.size(); }
};

/// β^min(m,d), tapered when the model asks for it.
double volume(std::size_t m, int d, const UtilityModel& u);

/// Pair-consumption per unit task rate for every pair inside an m-node
/// coalition running d layers: 2d/(m-1) for even m, 2d/m for odd m.
double demand_coefficient(std::size_t m, int d);

/// Largest depth allowed by m·d·ε_eff ≤ 1, capped at m. Zero when no depth fits.
int max_depth(std::size_t m, double epsilon_eff);

/// argmax over 1 ≤ d ≤ max_depth of volume(m,d)/d, smallest d on ties.
std::optional<int> optimal_depth(std::size_t m, double epsilon_eff, const UtilityModel& u);

/// ⌊1/√ε_eff⌋, or nullopt when ε_eff = 0.
std::optional<std::size_t> error_size_cap(double epsilon_eff);

enum class EnumerationMode { Connected, All };

struct EnumerationOptions {
  EnumerationMode mode = EnumerationMode::Connected;
  /// Explicit upper bound on coalition size; overrides the default cap.
  std::optional<std::size_t> size_cap;
  /// Apply the ⌊1/√ε_eff⌋ size cap when no explicit cap is given.
  bool prune = true;
  /// Allow `All` mode beyond kMaxAllModeNodes.
  bool force = false;
  /// Abort instead of materialising more coalitions than this.
  std::size_t max_coalitions = 2'000'000;
};

inline constexpr std::size_t kMaxAllModeNodes = 20;

std::size_t effective_size_cap(const NetworkSpec& net, const EnumerationOptions& opts);

/// Coalitions of size ≥ 2, sorted by size and then lexicographically. In
/// `Connected` mode only subsets inducing a connected physical subgraph are
/// returned.
std::vector<Coalition> enumerate_coalitions(const NetworkSpec& net,
                                            const EnumerationOptions& opts = {});

/// One task per coalition at its optimal depth; coalitions with no feasible
/// depth are dropped.
std::vector<TaskSpec> build_tasks(const NetworkSpec& net, std::span<const Coalition> coalitions,
                                  const UtilityModel& u);

}  // namespace qnu
