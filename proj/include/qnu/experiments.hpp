#pragma once

// Parameter sweeps over repeater chains and dumbbells, plot-ready exports and
// the coalition-size bounds table.

#include "qnu/utility.hpp"

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace qnu {

struct ChainSweepConfig {
  std::vector<std::size_t> sizes;
  double link_rate = 0.6;
  double swap_efficiency = 0.9;
  std::vector<double> betas{1.5, 2.0, 3.0};
  std::vector<double> epsilons{0.0, 0.01};
  std::optional<double> taper_v0;
  ComputeOptions compute;
  unsigned jobs = 1;

  void validate() const;
};

struct ChainRow {
  std::size_t nodes = 0;
  double beta = 0.0;
  double epsilon = 0.0;
  double u_comp = 0.0;
  double noswap = 0.0;
  double ratio = 0.0;
  std::size_t max_coalition = 0;
  double max_residual = 0.0;
  /// Solver status name, or "error" for failures outside the solver.
  std::string status = "optimal";
  /// Empty when the solve succeeded.
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Rows ordered by β, then ε, then chain length, whatever the job count.
std::vector<ChainRow> run_chain_sweep(const ChainSweepConfig& cfg);
void write_chain_csv(std::span<const ChainRow> rows, std::ostream& os);

struct DumbbellSweepConfig {
  std::size_t side = 3;
  double spoke_rate = 0.6;
  std::vector<double> bar_ratios;
  double swap_efficiency = 0.9;
  std::vector<double> betas{2.0};
  std::vector<double> epsilons{0.0, 0.01};
  std::optional<double> taper_v0;
  ComputeOptions compute;
  unsigned jobs = 1;

  void validate() const;
};

struct DumbbellRow {
  std::size_t side = 0;
  double bar_ratio = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double u_comp = 0.0;
  double noswap = 0.0;
  double u_ratio = 0.0;
  std::size_t max_coalition = 0;
  double max_residual = 0.0;
  std::string status = "optimal";
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Rows ordered by β, then ε, then bar/spoke ratio in grid order.
std::vector<DumbbellRow> run_dumbbell_sweep(const DumbbellSweepConfig& cfg);
void write_dumbbell_csv(std::span<const DumbbellRow> rows, std::ostream& os);

/// `count` points from `lo` to `hi` inclusive, evenly spaced in log scale.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Graphviz description with nodes 0..M-1 pinned on a circle and each
/// support edge shaded by its rate relative to the largest rate.
void export_entanglement_dot(const UtilityResult& result, std::ostream& os);
void export_entanglement_dot(const UtilityResult& result, const std::filesystem::path& path);

/// Results document: U_comp, baseline, ratio, active tasks, entanglement
/// graph and solver status, as pretty-printed JSON.
std::string results_json(const UtilityResult& result);

struct BoundsReport {
  std::size_t nodes = 0;
  double swap_efficiency = 0.0;
  double beta = 0.0;
  double epsilon = 0.0;
  double prop2_lower = 0.0;
  /// Absent when ε_eff = 0 (no cap).
  std::optional<std::size_t> prop3_upper;
  /// Absent unless ε_eff > 0 and M ≥ ⌊1/√ε_eff⌋ ≥ 2.
  std::optional<double> prop4_lower;
};

BoundsReport bounds_report(std::size_t nodes, double swap_efficiency, double beta, double epsilon);
void write_bounds_text(const BoundsReport& report, std::ostream& os);
std::string bounds_json(const BoundsReport& report);

}  // namespace qnu
