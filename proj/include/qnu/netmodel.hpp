#pragma once

// Quantum network instances: nodes with swap efficiencies, symmetric no-swap
// link rates, and the gate-error parameter. Rates carry no units in code; the
// convention throughout is "entangled pairs per unit time".

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qnu {

using NodeId = std::size_t;

/// Unordered node pair, stored with `lo < hi`.
class NodePair {
 public:
  NodePair(NodeId a, NodeId b);

  NodeId lo() const { return lo_; }
  NodeId hi() const { return hi_; }
  bool contains(NodeId v) const { return v == lo_ || v == hi_; }
  /// The endpoint that is not `v`; `v` must be an endpoint.
  NodeId other(NodeId v) const;

  auto operator<=>(const NodePair&) const = default;

 private:
  NodeId lo_;
  NodeId hi_;
};

/// All unordered pairs of {0..num_nodes-1} in lexicographic order.
std::vector<NodePair> all_pairs(std::size_t num_nodes);

/// Immutable network description. Every constructor validates; instances are
/// safe to share read-only across threads.
class NetworkSpec {
 public:
  using RateMap = std::map<NodePair, double>;

  NetworkSpec(std::vector<double> swap_efficiency, RateMap rates, double epsilon_eff = 0.0);

  /// Same network, with the per-pair error ē recorded and ε_eff = 2ē.
  NetworkSpec with_max_error(double ebar) const;
  NetworkSpec with_epsilon(double epsilon_eff) const;
  NetworkSpec with_swap_efficiency(double q) const;
  NetworkSpec scaled_rates(double factor) const;

  std::size_t num_nodes() const { return swap_efficiency_.size(); }
  double swap_efficiency(NodeId c) const { return swap_efficiency_.at(c); }
  const std::vector<double>& swap_efficiencies() const { return swap_efficiency_; }

  /// f_ab, zero for absent links.
  double rate(NodeId a, NodeId b) const;
  double rate(const NodePair& p) const;
  /// Physical links with positive rate, ordered by pair.
  const RateMap& links() const { return rates_; }

  double epsilon_eff() const { return epsilon_eff_; }
  std::optional<double> max_error() const { return ebar_; }

  /// Adjacency lists of the physical graph (edges where f_ab > 0), sorted.
  std::vector<std::vector<NodeId>> adjacency() const;

  bool operator==(const NetworkSpec&) const = default;

 private:
  void validate() const;

  std::vector<double> swap_efficiency_;
  RateMap rates_;
  double epsilon_eff_ = 0.0;
  std::optional<double> ebar_;
};

NetworkSpec make_chain(std::size_t num_nodes, double link_rate, double swap_efficiency,
                       double epsilon_eff = 0.0);

/// Hubs 0 and 1 joined by the bar; nodes 2..side+1 hang off hub 0 and
/// side+2..2*side+1 off hub 1.
NetworkSpec make_dumbbell(std::size_t side, double spoke_rate, double bar_rate,
                          double swap_efficiency, double epsilon_eff = 0.0);

/// Replaces `node` by `copies` virtual nodes joined pairwise by `local_rate`
/// links. The original id becomes the first copy and keeps every external
/// link; the remaining copies are appended as ids num_nodes()..
NetworkSpec split_node(const NetworkSpec& net, NodeId node, std::size_t copies,
                       double local_rate);

std::string to_json_string(const NetworkSpec& net);
NetworkSpec network_from_json_string(const std::string& text);

NetworkSpec load_network(const std::filesystem::path& path);
void save_network(const NetworkSpec& net, const std::filesystem::path& path);

}  // namespace qnu
