#pragma once

// Entanglement-swap rate region as linear constraints.
//
// For each unordered pair (a,b) the region demands
//
//   r_ab <= f_ab + Σ_c q_c w^c_ab - Σ_c (w^b_ac + w^a_bc)
//
// where w^c_ab is the rate of swaps at node c that consume one (a,c) and one
// (c,b) pair and yield (a,b) with efficiency q_c. The two per-side flow
// symbols of the textbook form are forced equal, so they share one variable.

#include "qnu/lp.hpp"
#include "qnu/netmodel.hpp"
#include "qnu/tasks.hpp"

#include <cstddef>
#include <map>
#include <vector>

namespace qnu {

using RateVector = std::map<NodePair, double>;

struct SwapFlow {
  NodePair produced;
  NodeId swap_node;
  double rate = 0.0;
};

/// Linear form: Σ coefficient·w over flow variables.
struct FlowTerm {
  std::size_t flow;
  double coefficient;
};

class RateConstraintSet {
 public:
  explicit RateConstraintSet(const NetworkSpec& net);

  std::size_t num_nodes() const { return num_nodes_; }
  /// Pairs in lexicographic order; row k belongs to pairs()[k].
  const std::vector<NodePair>& pairs() const { return pairs_; }
  /// Flow k is (produced pair, swap node), grouped by produced pair.
  const std::vector<std::pair<NodePair, NodeId>>& flows() const { return flows_; }

  std::size_t num_rows() const { return pairs_.size(); }
  std::size_t num_flows() const { return flows_.size(); }

  std::size_t pair_index(const NodePair& p) const;
  std::size_t flow_index(const NodePair& produced, NodeId swap_node) const;

  /// Net swap contribution to pair k, i.e. the flow part of
  /// r_k <= f_k + Σ terms·w.
  const std::vector<FlowTerm>& row_terms(std::size_t k) const { return rows_[k]; }
  double no_swap_rate(std::size_t k) const { return rhs_[k]; }

  /// Adds the rows  r_k - Σ terms·w <= f_k  to `lp`, with r_k at
  /// `pair_offset + k` and flow j at `flow_offset + j`. Returns the first row index.
  lp::Index append_to(lp::LinearProgram<double>& lp, lp::Index pair_offset,
                      lp::Index flow_offset) const;

 private:
  std::size_t num_nodes_;
  std::vector<NodePair> pairs_;
  std::vector<std::pair<NodePair, NodeId>> flows_;
  std::vector<std::vector<FlowTerm>> rows_;
  std::vector<double> rhs_;
};

RateConstraintSet build_rate_constraints(const NetworkSpec& net);

/// Utility rate when every physical link saturates the best feasible two-node
/// task and no swaps are performed.
double noswap_utility(const NetworkSpec& net, const UtilityModel& u);

enum class Feasibility { Feasible, Infeasible, SolverFailure };

struct FeasibilityResult {
  Feasibility status = Feasibility::SolverFailure;
  lp::Status solver_status = lp::Status::NumericalFailure;
  std::vector<SwapFlow> witness;

  bool feasible() const { return status == Feasibility::Feasible; }
};

inline constexpr double kFeasibilityTolerance = 1e-9;

/// Membership of R in the rate region; the tolerance is added to every row's
/// right-hand side. Witness flows are returned when feasible.
FeasibilityResult check_feasible(const NetworkSpec& net, const RateVector& rates,
                                 double tol = kFeasibilityTolerance);

/// Diverts rate r of (l,j) entanglement into (l,k) and (k,j) entanglement:
/// r_lj -= r, r_lk += r, r_kj += r.
RateVector lemma1_transform(const RateVector& rates, NodeId l, NodeId k, NodeId j, double r);

}  // namespace qnu
