#pragma once

// Network utility for distributed computing: assemble the task-allocation
// linear program over the rate region, solve it, and report allocations,
// consumed entanglement and the coalition-size bounds for repeater chains.

#include "qnu/lp.hpp"
#include "qnu/netmodel.hpp"
#include "qnu/rate_region.hpp"
#include "qnu/tasks.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace qnu {

inline constexpr double kActiveRateThreshold = 1e-8;

class EntanglementGraph {
 public:
  EntanglementGraph(std::size_t num_nodes, RateVector rates,
                    double threshold = kActiveRateThreshold);

  std::size_t num_nodes() const { return num_nodes_; }
  const RateVector& rates() const { return rates_; }
  double threshold() const { return threshold_; }
  double rate(const NodePair& p) const;

  /// Pairs whose rate exceeds the threshold.
  std::vector<NodePair> support() const;
  /// Whether the support edges connect every node.
  bool connected() const;
  bool complete() const { return support().size() == num_nodes_ * (num_nodes_ - 1) / 2; }
  double max_rate() const;

 private:
  std::size_t num_nodes_;
  RateVector rates_;
  double threshold_;
};

struct TaskRate {
  TaskSpec task;
  double rate;
};

struct SolverDiagnostics {
  lp::Status status = lp::Status::NumericalFailure;
  lp::Index iterations = 0;
  double max_residual = 0.0;
  double objective = 0.0;
  std::size_t num_variables = 0;
  std::size_t num_rows = 0;
};

struct UtilityResult {
  double u_comp = 0.0;
  double noswap_baseline = 0.0;
  /// Every candidate task, with rates at or below the threshold set to zero.
  std::vector<TaskRate> tasks;
  EntanglementGraph entanglement_graph{2, {}};
  std::vector<SwapFlow> flows;
  SolverDiagnostics solver;

  /// u_comp / noswap_baseline; NaN when the baseline is zero.
  double ratio() const;
};

/// Column layout of the assembled program: [tasks | pair rates | swap flows].
struct AssembledProblem {
  lp::LinearProgram<double> lp;
  RateConstraintSet region;
  std::size_t num_tasks = 0;

  lp::Index task_var(std::size_t i) const { return static_cast<lp::Index>(i); }
  lp::Index pair_var(std::size_t k) const { return static_cast<lp::Index>(num_tasks + k); }
  lp::Index flow_var(std::size_t j) const {
    return static_cast<lp::Index>(num_tasks + region.num_rows() + j);
  }
};

AssembledProblem assemble(const NetworkSpec& net, std::span<const TaskSpec> tasks,
                          const UtilityModel& u);

struct ComputeOptions {
  EnumerationOptions enumeration;
  double threshold = kActiveRateThreshold;
  lp::Tolerances<double> tolerances;
};

class SolverError : public std::runtime_error {
 public:
  SolverError(lp::Status status, const std::string& what)
      : std::runtime_error(what), status_(status) {}
  lp::Status status() const { return status_; }

 private:
  lp::Status status_;
};

/// Solves an already-built task list; throws SolverError unless optimal.
UtilityResult solve_tasks(const NetworkSpec& net, std::vector<TaskSpec> tasks,
                          const UtilityModel& u, const ComputeOptions& opts = {});

/// enumerate → build_tasks → assemble → solve → extract.
UtilityResult compute_utility(const NetworkSpec& net, const UtilityModel& u,
                              const ComputeOptions& opts = {});

/// Size of the largest coalition with rate above `threshold`; 0 if none.
std::size_t max_active_coalition_size(const UtilityResult& result,
                                      double threshold = kActiveRateThreshold);

/// M + log_β[M^{log₂ q} / ((1+q) M³ (M-1)² / 4)]; may be negative.
double prop2_lower_bound(std::size_t M, double q, double beta);

/// ⌊1/√ε_eff⌋; nullopt stands for "unbounded" at ε_eff = 0.
std::optional<std::size_t> prop3_upper_bound(double epsilon_eff);

/// m + log_β[4 m^{log₂ q} ⌊M/m⌋ / ((1+q) m³ (m-1)(2M-m+1))], m = ⌊1/√ε_eff⌋.
double prop4_lower_bound(std::size_t M, double q, double beta, double epsilon_eff);

}  // namespace qnu
