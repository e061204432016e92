#include "qnu/rate_region.hpp"

#include <algorithm>
#include <stdexcept>

namespace qnu {

RateConstraintSet::RateConstraintSet(const NetworkSpec& net)
    : num_nodes_(net.num_nodes()), pairs_(all_pairs(net.num_nodes())) {
  const std::size_t M = num_nodes_;
  flows_.reserve(pairs_.size() * (M - 2));
  for (const NodePair& p : pairs_)
    for (NodeId c = 0; c < M; ++c)
      if (!p.contains(c)) flows_.emplace_back(p, c);

  rows_.assign(pairs_.size(), {});
  rhs_.resize(pairs_.size());
  for (std::size_t k = 0; k < pairs_.size(); ++k) rhs_[k] = net.rate(pairs_[k]);

  for (std::size_t j = 0; j < flows_.size(); ++j) {
    const auto& [produced, c] = flows_[j];
    const double q = net.swap_efficiency(c);
    if (q != 0.0) rows_[pair_index(produced)].push_back({j, q});
    // The swap at c eats one (a,c) and one (b,c) pair.
    rows_[pair_index(NodePair(produced.lo(), c))].push_back({j, -1.0});
    rows_[pair_index(NodePair(produced.hi(), c))].push_back({j, -1.0});
  }
}

std::size_t RateConstraintSet::pair_index(const NodePair& p) const {
  if (p.hi() >= num_nodes_) throw std::out_of_range("pair outside network");
  const std::size_t a = p.lo(), b = p.hi(), M = num_nodes_;
  // Row-major offset of (a,b) among pairs with lo < hi.
  return a * (2 * M - a - 1) / 2 + (b - a - 1);
}

std::size_t RateConstraintSet::flow_index(const NodePair& produced, NodeId swap_node) const {
  if (produced.contains(swap_node) || swap_node >= num_nodes_)
    throw std::invalid_argument("flow_index: swap node must differ from both endpoints");
  std::size_t slot = swap_node;
  if (swap_node > produced.lo()) --slot;
  if (swap_node > produced.hi()) --slot;
  return pair_index(produced) * (num_nodes_ - 2) + slot;
}

lp::Index RateConstraintSet::append_to(lp::LinearProgram<double>& lp, lp::Index pair_offset,
                                       lp::Index flow_offset) const {
  const lp::Index first = lp.num_rows();
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    std::vector<lp::Term<double>> terms;
    terms.reserve(rows_[k].size() + 1);
    if (pair_offset >= 0) terms.push_back({pair_offset + static_cast<lp::Index>(k), 1.0});
    for (const auto& t : rows_[k])
      terms.push_back({flow_offset + static_cast<lp::Index>(t.flow), -t.coefficient});
    lp.add_row(std::move(terms), lp::Sense::LessEqual, rhs_[k]);
  }
  return first;
}

RateConstraintSet build_rate_constraints(const NetworkSpec& net) { return RateConstraintSet(net); }

double noswap_utility(const NetworkSpec& net, const UtilityModel& u) {
  u.validate();
  const auto d = optimal_depth(2, net.epsilon_eff(), u);
  if (!d) return 0.0;
  const double per_link = volume(2, *d, u) / demand_coefficient(2, *d);
  double total = 0.0;
  for (const auto& [pair, f] : net.links()) total += f * per_link;
  return total;
}

FeasibilityResult check_feasible(const NetworkSpec& net, const RateVector& rates, double tol) {
  for (const auto& [pair, r] : rates) {
    if (pair.hi() >= net.num_nodes()) throw std::invalid_argument("check_feasible: unknown node");
    if (!(r >= 0.0)) throw std::invalid_argument("check_feasible: rates must be >= 0");
  }
  const RateConstraintSet region(net);
  lp::LinearProgram<double> lp;
  // Prefer the witness with the least total swapping.
  for (std::size_t j = 0; j < region.num_flows(); ++j) lp.add_variable(-1.0);
  for (std::size_t k = 0; k < region.num_rows(); ++k) {
    const auto it = rates.find(region.pairs()[k]);
    const double r = it == rates.end() ? 0.0 : it->second;
    std::vector<lp::Term<double>> terms;
    for (const auto& t : region.row_terms(k))
      terms.push_back({static_cast<lp::Index>(t.flow), -t.coefficient});
    lp.add_row(std::move(terms), lp::Sense::LessEqual, region.no_swap_rate(k) - r + tol);
  }

  const auto sol = lp::solve(lp);
  FeasibilityResult out;
  out.solver_status = sol.status;
  switch (sol.status) {
    case lp::Status::Optimal: out.status = Feasibility::Feasible; break;
    case lp::Status::Infeasible: out.status = Feasibility::Infeasible; return out;
    // Flows are bounded by the objective, so anything else is a solver fault.
    default: out.status = Feasibility::SolverFailure; return out;
  }
  for (std::size_t j = 0; j < region.num_flows(); ++j) {
    if (sol.primal[j] <= 0.0) continue;
    const auto& [produced, c] = region.flows()[j];
    out.witness.push_back(SwapFlow{produced, c, sol.primal[j]});
  }
  return out;
}

RateVector lemma1_transform(const RateVector& rates, NodeId l, NodeId k, NodeId j, double r) {
  if (!(l < k && k < j)) throw std::invalid_argument("lemma1_transform: need l < k < j");
  if (!(r >= 0.0)) throw std::invalid_argument("lemma1_transform: r must be >= 0");
  const NodePair outer(l, j);
  const auto it = rates.find(outer);
  const double r_lj = it == rates.end() ? 0.0 : it->second;
  if (r > r_lj) throw std::invalid_argument("lemma1_transform: r exceeds r_lj");
  if (r == 0.0) return rates;
  RateVector out = rates;
  out[outer] = r_lj - r;
  out[NodePair(l, k)] += r;
  out[NodePair(k, j)] += r;
  return out;
}

}  // namespace qnu
