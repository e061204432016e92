#include "qnu/experiments.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace qnu {

namespace {

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto end = std::to_chars(buf, buf + sizeof buf, v).ptr;
  return std::string(buf, end);
}

// Runs job(i) for i in [0, count) on up to `jobs` threads. Each job writes
// only its own slot, so results come back in index order.
void run_indexed(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& job) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < jobs; ++t)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
}

void check_common(std::span<const double> betas, std::span<const double> epsilons) {
  if (betas.empty()) throw std::invalid_argument("sweep: beta list is empty");
  if (epsilons.empty()) throw std::invalid_argument("sweep: epsilon list is empty");
  for (double b : betas)
    if (!(b > 1.0)) throw std::invalid_argument("sweep: beta must be > 1");
  for (double e : epsilons)
    if (!(e >= 0.0)) throw std::invalid_argument("sweep: epsilon must be >= 0");
}

}  // namespace

void ChainSweepConfig::validate() const {
  if (sizes.empty()) throw std::invalid_argument("chain sweep: no chain lengths");
  for (auto m : sizes)
    if (m < 2) throw std::invalid_argument("chain sweep: chain length must be >= 2");
  if (!(link_rate > 0.0)) throw std::invalid_argument("chain sweep: link rate must be > 0");
  if (!(swap_efficiency >= 0.0 && swap_efficiency <= 1.0))
    throw std::invalid_argument("chain sweep: swap efficiency outside [0,1]");
  check_common(betas, epsilons);
}

std::vector<ChainRow> run_chain_sweep(const ChainSweepConfig& cfg) {
  cfg.validate();
  std::vector<ChainRow> rows;
  for (double beta : cfg.betas)
    for (double eps : cfg.epsilons)
      for (auto m : cfg.sizes) {
        ChainRow row;
        row.nodes = m;
        row.beta = beta;
        row.epsilon = eps;
        rows.push_back(row);
      }

  run_indexed(rows.size(), cfg.jobs, [&](std::size_t i) {
    ChainRow& row = rows[i];
    try {
      const auto net = make_chain(row.nodes, cfg.link_rate, cfg.swap_efficiency, row.epsilon);
      const UtilityModel u{row.beta, cfg.taper_v0};
      const auto result = compute_utility(net, u, cfg.compute);
      row.u_comp = result.u_comp;
      row.noswap = result.noswap_baseline;
      row.ratio = result.ratio();
      row.max_coalition = max_active_coalition_size(result, cfg.compute.threshold);
      row.max_residual = result.solver.max_residual;
    } catch (const SolverError& e) {
      row.status = lp::to_string(e.status());
      row.error = e.what();
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
  });
  return rows;
}

void write_chain_csv(std::span<const ChainRow> rows, std::ostream& os) {
  os << "nodes,beta,epsilon,u_comp,noswap,ratio,max_coalition,status\n";
  for (const auto& r : rows) {
    os << r.nodes << ',' << fmt_double(r.beta) << ',' << fmt_double(r.epsilon) << ','
       << fmt_double(r.u_comp) << ',' << fmt_double(r.noswap) << ',' << fmt_double(r.ratio) << ','
       << r.max_coalition << ',' << r.status << '\n';
  }
}

void DumbbellSweepConfig::validate() const {
  if (side < 1) throw std::invalid_argument("dumbbell sweep: side must be >= 1");
  if (bar_ratios.empty()) throw std::invalid_argument("dumbbell sweep: empty ratio grid");
  for (double r : bar_ratios)
    if (!(r > 0.0)) throw std::invalid_argument("dumbbell sweep: ratios must be > 0");
  if (!(spoke_rate > 0.0)) throw std::invalid_argument("dumbbell sweep: spoke rate must be > 0");
  if (!(swap_efficiency >= 0.0 && swap_efficiency <= 1.0))
    throw std::invalid_argument("dumbbell sweep: swap efficiency outside [0,1]");
  check_common(betas, epsilons);
}

std::vector<DumbbellRow> run_dumbbell_sweep(const DumbbellSweepConfig& cfg) {
  cfg.validate();
  std::vector<DumbbellRow> rows;
  for (double beta : cfg.betas)
    for (double eps : cfg.epsilons)
      for (double ratio : cfg.bar_ratios) {
        DumbbellRow row;
        row.side = cfg.side;
        row.bar_ratio = ratio;
        row.beta = beta;
        row.epsilon = eps;
        rows.push_back(row);
      }

  run_indexed(rows.size(), cfg.jobs, [&](std::size_t i) {
    DumbbellRow& row = rows[i];
    try {
      const auto net = make_dumbbell(cfg.side, cfg.spoke_rate, cfg.spoke_rate * row.bar_ratio,
                                     cfg.swap_efficiency, row.epsilon);
      const UtilityModel u{row.beta, cfg.taper_v0};
      const auto result = compute_utility(net, u, cfg.compute);
      row.u_comp = result.u_comp;
      row.noswap = result.noswap_baseline;
      row.u_ratio = result.ratio();
      row.max_coalition = max_active_coalition_size(result, cfg.compute.threshold);
      row.max_residual = result.solver.max_residual;
    } catch (const SolverError& e) {
      row.status = lp::to_string(e.status());
      row.error = e.what();
    } catch (const std::exception& e) {
      row.status = "error";
      row.error = e.what();
    }
  });
  return rows;
}

void write_dumbbell_csv(std::span<const DumbbellRow> rows, std::ostream& os) {
  os << "side,bar_ratio,beta,epsilon,u_comp,noswap,u_ratio,max_coalition,status\n";
  for (const auto& r : rows) {
    os << r.side << ',' << fmt_double(r.bar_ratio) << ',' << fmt_double(r.beta) << ','
       << fmt_double(r.epsilon) << ',' << fmt_double(r.u_comp) << ',' << fmt_double(r.noswap)
       << ',' << fmt_double(r.u_ratio) << ',' << r.max_coalition << ',' << r.status << '\n';
  }
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw std::invalid_argument("log_spaced: need 0 < lo <= hi");
  if (count == 0) throw std::invalid_argument("log_spaced: count must be positive");
  if (count == 1) return {lo};
  std::vector<double> out(count);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void export_entanglement_dot(const UtilityResult& result, std::ostream& os) {
  const auto& graph = result.entanglement_graph;
  const std::size_t M = graph.num_nodes();
  const double radius = std::max(1.5, 0.35 * static_cast<double>(M));
  const double peak = graph.max_rate();
  os << "graph entanglement {\n"
     << "  layout=neato;\n"
     << "  node [shape=circle, fontsize=10];\n";
  for (std::size_t v = 0; v < M; ++v) {
    // Node 0 at twelve o'clock, increasing clockwise.
    const double angle = std::numbers::pi / 2 - 2 * std::numbers::pi * static_cast<double>(v) /
                                                    static_cast<double>(M);
    char pos[64];
    std::snprintf(pos, sizeof pos, "%.4f,%.4f", radius * std::cos(angle),
                  radius * std::sin(angle));
    os << "  " << v << " [pos=\"" << pos << "!\"];\n";
  }
  for (const NodePair& e : graph.support()) {
    const double rate = graph.rate(e);
    const double intensity = peak > 0.0 ? rate / peak : 0.0;
    const int gray = static_cast<int>(std::lround(255.0 * (1.0 - intensity)));
    char color[8];
    std::snprintf(color, sizeof color, "#%02x%02x%02x", gray, gray, gray);
    os << "  " << e.lo() << " -- " << e.hi() << " [rate=" << fmt_double(rate)
       << ", intensity=" << fmt_double(intensity) << ", color=\"" << color << "\"];\n";
  }
  os << "}\n";
}

void export_entanglement_dot(const UtilityResult& result, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  export_entanglement_dot(result, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string results_json(const UtilityResult& result) {
  using nlohmann::json;
  json tasks = json::array();
  for (const auto& t : result.tasks) {
    if (t.rate <= 0.0) continue;
    const double value = t.task.volume_coefficient * t.rate;
    tasks.push_back({{"members", t.task.coalition.members()},
                     {"depth", t.task.depth},
                     {"rate", t.rate},
                     {"utility_share", result.u_comp > 0.0 ? value / result.u_comp : 0.0}});
  }
  json graph = json::array();
  for (const NodePair& e : result.entanglement_graph.support())
    graph.push_back({{"a", e.lo()}, {"b", e.hi()}, {"rate", result.entanglement_graph.rate(e)}});
  const double ratio = result.ratio();
  json doc = {
      {"U_comp", result.u_comp},
      {"noswap_baseline", result.noswap_baseline},
      {"ratio", std::isnan(ratio) ? json(nullptr) : json(ratio)},
      {"num_nodes", result.entanglement_graph.num_nodes()},
      {"max_coalition", max_active_coalition_size(result, result.entanglement_graph.threshold())},
      {"tasks", tasks},
      {"entanglement_graph", graph},
      {"solver",
       {{"status", lp::to_string(result.solver.status)},
        {"iterations", result.solver.iterations},
        {"max_residual", result.solver.max_residual},
        {"variables", result.solver.num_variables},
        {"rows", result.solver.num_rows}}},
  };
  return doc.dump(2);
}

BoundsReport bounds_report(std::size_t nodes, double swap_efficiency, double beta,
                           double epsilon) {
  BoundsReport r;
  r.nodes = nodes;
  r.swap_efficiency = swap_efficiency;
  r.beta = beta;
  r.epsilon = epsilon;
  r.prop2_lower = prop2_lower_bound(nodes, swap_efficiency, beta);
  r.prop3_upper = prop3_upper_bound(epsilon);
  if (r.prop3_upper && *r.prop3_upper >= 2 && nodes >= *r.prop3_upper)
    r.prop4_lower = prop4_lower_bound(nodes, swap_efficiency, beta, epsilon);
  return r;
}

void write_bounds_text(const BoundsReport& r, std::ostream& os) {
  os << "nodes            " << r.nodes << '\n'
     << "swap efficiency  " << fmt_double(r.swap_efficiency) << '\n'
     << "beta             " << fmt_double(r.beta) << '\n'
     << "epsilon_eff      " << fmt_double(r.epsilon) << '\n'
     << "largest coalition, lower bound (eps = 0)      " << fmt_double(r.prop2_lower)
     << (r.prop2_lower < 2.0 ? "  (vacuous)" : "") << '\n'
     << "largest coalition, upper bound (eps > 0)      "
     << (r.prop3_upper ? std::to_string(*r.prop3_upper) : std::string("unbounded")) << '\n'
     << "largest coalition, lower bound (eps > 0)      ";
  if (r.prop4_lower)
    os << fmt_double(*r.prop4_lower) << (*r.prop4_lower < 2.0 ? "  (vacuous)" : "") << '\n';
  else
    os << "n/a\n";
}

std::string bounds_json(const BoundsReport& r) {
  using nlohmann::json;
  json doc = {{"nodes", r.nodes},
              {"swap_efficiency", r.swap_efficiency},
              {"beta", r.beta},
              {"epsilon_eff", r.epsilon},
              {"prop2_lower_bound", r.prop2_lower},
              {"prop3_upper_bound", r.prop3_upper ? json(*r.prop3_upper) : json(nullptr)},
              {"prop4_lower_bound", r.prop4_lower ? json(*r.prop4_lower) : json(nullptr)}};
  return doc.dump(2);
}

}  // namespace qnu
