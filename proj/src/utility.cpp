#include "qnu/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qnu {

EntanglementGraph::EntanglementGraph(std::size_t num_nodes, RateVector rates, double threshold)
    : num_nodes_(num_nodes), rates_(std::move(rates)), threshold_(threshold) {
  for (const auto& [pair, r] : rates_)
    if (pair.hi() >= num_nodes_) throw std::invalid_argument("entanglement graph: unknown node");
}

double EntanglementGraph::rate(const NodePair& p) const {
  const auto it = rates_.find(p);
  return it == rates_.end() ? 0.0 : it->second;
}

std::vector<NodePair> EntanglementGraph::support() const {
  std::vector<NodePair> edges;
  for (const auto& [pair, r] : rates_)
    if (r > threshold_) edges.push_back(pair);
  return edges;
}

bool EntanglementGraph::connected() const {
  std::vector<std::size_t> parent(num_nodes_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  std::size_t components = num_nodes_;
  for (const NodePair& e : support()) {
    const auto a = find(e.lo()), b = find(e.hi());
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components <= 1;
}

double EntanglementGraph::max_rate() const {
  double m = 0.0;
  for (const auto& [pair, r] : rates_) m = std::max(m, r);
  return m;
}

double UtilityResult::ratio() const {
  if (noswap_baseline == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return u_comp / noswap_baseline;
}

AssembledProblem assemble(const NetworkSpec& net, std::span<const TaskSpec> tasks,
                          const UtilityModel& u) {
  u.validate();
  AssembledProblem out{lp::LinearProgram<double>{}, RateConstraintSet(net), tasks.size()};
  auto& lp = out.lp;
  const auto& region = out.region;

  for (const TaskSpec& t : tasks) {
    std::string name = "p";
    for (NodeId v : t.coalition.members()) name += "_" + std::to_string(v);
    lp.add_variable(t.volume_coefficient, 0.0, lp::LinearProgram<double>::kInf, std::move(name));
  }
  for (const NodePair& p : region.pairs())
    lp.add_variable(0.0, 0.0, lp::LinearProgram<double>::kInf,
                    "r_" + std::to_string(p.lo()) + "_" + std::to_string(p.hi()));
  for (const auto& [produced, c] : region.flows())
    lp.add_variable(0.0, 0.0, lp::LinearProgram<double>::kInf,
                    "w_" + std::to_string(c) + "_" + std::to_string(produced.lo()) + "_" +
                        std::to_string(produced.hi()));

  // Demand rows: r_ab - Σ_i coef_i p_i [a,b ∈ M_i] = 0.
  std::vector<std::vector<lp::Term<double>>> demand(region.num_rows());
  for (std::size_t k = 0; k < region.num_rows(); ++k)
    demand[k].push_back({out.pair_var(k), 1.0});
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& members = tasks[i].coalition.members();
    for (std::size_t x = 0; x < members.size(); ++x)
      for (std::size_t y = x + 1; y < members.size(); ++y) {
        const std::size_t k = region.pair_index(NodePair(members[x], members[y]));
        demand[k].push_back({out.task_var(i), -tasks[i].demand_coefficient});
      }
  }
  for (auto& row : demand) lp.add_row(std::move(row), lp::Sense::Equal, 0.0);

  region.append_to(lp, out.pair_var(0), out.flow_var(0));
  return out;
}

UtilityResult solve_tasks(const NetworkSpec& net, std::vector<TaskSpec> tasks,
                          const UtilityModel& u, const ComputeOptions& opts) {
  const AssembledProblem problem = assemble(net, tasks, u);
  const auto sol = lp::solve(problem.lp, opts.tolerances);

  UtilityResult result;
  result.solver.status = sol.status;
  result.solver.iterations = sol.iterations;
  result.solver.num_variables = static_cast<std::size_t>(problem.lp.num_variables());
  result.solver.num_rows = static_cast<std::size_t>(problem.lp.num_rows());
  if (!sol.optimal())
    throw SolverError(sol.status, std::string("utility LP not solved: ") + lp::to_string(sol.status));
  result.solver.objective = sol.objective;
  result.solver.max_residual = lp::verify(problem.lp, sol).max_row_residual;

  result.tasks.reserve(tasks.size());
  RateVector consumed;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    double p = sol.primal[problem.task_var(i)];
    if (p <= opts.threshold) p = 0.0;
    result.u_comp += tasks[i].volume_coefficient * p;
    if (p > 0.0) {
      const auto& members = tasks[i].coalition.members();
      for (std::size_t x = 0; x < members.size(); ++x)
        for (std::size_t y = x + 1; y < members.size(); ++y)
          consumed[NodePair(members[x], members[y])] += tasks[i].demand_coefficient * p;
    }
    result.tasks.push_back(TaskRate{std::move(tasks[i]), p});
  }
  result.entanglement_graph = EntanglementGraph(net.num_nodes(), std::move(consumed), opts.threshold);

  for (std::size_t j = 0; j < problem.region.num_flows(); ++j) {
    const double w = sol.primal[problem.flow_var(j)];
    if (w <= opts.threshold) continue;
    const auto& [produced, c] = problem.region.flows()[j];
    result.flows.push_back(SwapFlow{produced, c, w});
  }
  result.noswap_baseline = noswap_utility(net, u);
  return result;
}

UtilityResult compute_utility(const NetworkSpec& net, const UtilityModel& u,
                              const ComputeOptions& opts) {
  const auto coalitions = enumerate_coalitions(net, opts.enumeration);
  return solve_tasks(net, build_tasks(net, coalitions, u), u, opts);
}

std::size_t max_active_coalition_size(const UtilityResult& result, double threshold) {
  std::size_t best = 0;
  for (const auto& t : result.tasks)
    if (t.rate > threshold) best = std::max(best, t.task.size());
  return best;
}

double prop2_lower_bound(std::size_t M, double q, double beta) {
  if (M < 2) throw std::invalid_argument("prop2_lower_bound: need M >= 2");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("prop2_lower_bound: need q in (0,1]");
  if (!(beta > 1.0)) throw std::invalid_argument("prop2_lower_bound: need beta > 1");
  const double m = static_cast<double>(M);
  const double numerator = std::pow(m, std::log2(q));
  const double denominator = (1.0 + q) * m * m * m * (m - 1.0) * (m - 1.0) / 4.0;
  return m + std::log(numerator / denominator) / std::log(beta);
}

std::optional<std::size_t> prop3_upper_bound(double epsilon_eff) {
  if (!(epsilon_eff >= 0.0)) throw std::invalid_argument("prop3_upper_bound: need epsilon >= 0");
  return error_size_cap(epsilon_eff);
}

double prop4_lower_bound(std::size_t M, double q, double beta, double epsilon_eff) {
  if (!(epsilon_eff > 0.0)) throw std::invalid_argument("prop4_lower_bound: need epsilon > 0");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("prop4_lower_bound: need q in (0,1]");
  if (!(beta > 1.0)) throw std::invalid_argument("prop4_lower_bound: need beta > 1");
  const std::size_t cap = *error_size_cap(epsilon_eff);
  if (cap < 2) throw std::invalid_argument("prop4_lower_bound: floor(1/sqrt(eps)) < 2");
  if (M < cap) throw std::invalid_argument("prop4_lower_bound: need M >= floor(1/sqrt(eps))");
  const double m = static_cast<double>(cap);
  const double blocks = static_cast<double>(M / cap);
  const double numerator = 4.0 * std::pow(m, std::log2(q)) * blocks;
  const double denominator =
      (1.0 + q) * m * m * m * (m - 1.0) * (2.0 * static_cast<double>(M) - m + 1.0);
  return m + std::log(numerator / denominator) / std::log(beta);
}

}  // namespace qnu
