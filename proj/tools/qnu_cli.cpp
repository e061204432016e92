// qnu: command-line driver for single solves, parameter sweeps, bounds and
// entanglement-graph export.

#include "qnu/experiments.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

using namespace qnu;

constexpr int kSolverFailure = 1;
constexpr int kUsageError = 2;

struct ModelFlags {
  double swap_eff = 0.9;
  std::vector<double> beta{2.0};
  std::vector<double> eps{0.0};
  std::optional<double> taper_v0;
  std::string mode = "connected";
  bool no_prune = false;
  bool force = false;
  double threshold = kActiveRateThreshold;
  long max_iterations = 0;

  void attach(CLI::App* app, bool lists) {
    app->add_option("--swap-eff", swap_eff, "Swap efficiency q of every node")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    auto* b = app->add_option("--beta", beta, lists ? "Volume bases (list)" : "Volume base")
                  ->capture_default_str();
    auto* e = app->add_option("--eps", eps, lists ? "Gate error values (list)" : "Gate error")
                  ->capture_default_str();
    if (lists) {
      b->delimiter(',');
      e->delimiter(',');
    } else {
      b->expected(1);
      e->expected(1);
    }
    app->add_option("--taper-v0", taper_v0, "Replace volume v by v/(1+v/v0)");
    app->add_option("--mode", mode, "Coalition enumeration")
        ->check(CLI::IsMember({"connected", "all"}))
        ->capture_default_str();
    app->add_flag("--no-prune", no_prune, "Do not cap coalition size at floor(1/sqrt(eps))");
    app->add_flag("--force", force, "Allow --mode all on more than 20 nodes");
    app->add_option("--threshold", threshold, "Rates at or below this count as zero")
        ->capture_default_str();
    app->add_option("--max-iterations", max_iterations, "Simplex iteration limit (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
  }

  UtilityModel model(double b) const {
    UtilityModel u{b, taper_v0};
    u.validate();
    return u;
  }

  ComputeOptions compute() const {
    ComputeOptions opts;
    opts.enumeration.mode = mode == "all" ? EnumerationMode::All : EnumerationMode::Connected;
    opts.enumeration.prune = !no_prune;
    opts.enumeration.force = force;
    opts.threshold = threshold;
    opts.tolerances.max_iterations = max_iterations;
    return opts;
  }
};

struct OutputFlags {
  std::string out;
  std::string csv;
  std::string dot;
  std::string save_network;

  void attach(CLI::App* app) {
    app->add_option("--out", out, "Write the results document here instead of stdout");
    app->add_option("--csv", csv, "Also write the active tasks as CSV");
    app->add_option("--dot", dot, "Also write the entanglement graph as Graphviz");
    app->add_option("--save-network", save_network, "Save the solved network as JSON");
  }
};

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::string tasks_csv(const UtilityResult& r) {
  std::ostringstream os;
  os.precision(17);
  os << "members,size,depth,rate,utility\n";
  for (const auto& t : r.tasks) {
    if (t.rate <= 0.0) continue;
    const auto& m = t.task.coalition.members();
    for (std::size_t i = 0; i < m.size(); ++i) os << (i ? " " : "") << m[i];
    os << ',' << t.task.size() << ',' << t.task.depth << ',' << t.rate << ','
       << t.task.volume_coefficient * t.rate << '\n';
  }
  return os.str();
}

int solve_and_report(const NetworkSpec& net, const ModelFlags& model, const OutputFlags& output) {
  if (!output.save_network.empty()) save_network(net, output.save_network);
  UtilityResult result;
  try {
    result = compute_utility(net, model.model(model.beta.front()), model.compute());
  } catch (const SolverError& e) {
    std::cerr << "qnu: " << e.what() << '\n';
    return kSolverFailure;
  }
  write_text(output.out, results_json(result) + "\n");
  if (!output.csv.empty()) write_text(output.csv, tasks_csv(result));
  if (!output.dot.empty()) export_entanglement_dot(result, output.dot);
  return 0;
}

// "2:16" expands to 2..16; plain numbers pass through.
std::vector<std::size_t> expand_sizes(const std::vector<std::string>& specs) {
  std::vector<std::size_t> sizes;
  for (const auto& s : specs) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
      sizes.push_back(std::stoul(s));
      continue;
    }
    const auto lo = std::stoul(s.substr(0, colon)), hi = std::stoul(s.substr(colon + 1));
    if (hi < lo) throw std::invalid_argument("empty range " + s);
    for (auto m = lo; m <= hi; ++m) sizes.push_back(m);
  }
  return sizes;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum network utility for distributed computing"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  // chain
  auto* chain = app.add_subcommand("chain", "Solve one homogeneous repeater chain");
  std::size_t chain_nodes = 8;
  double link_rate = 0.6;
  ModelFlags chain_model;
  OutputFlags chain_out;
  chain->add_option("--nodes", chain_nodes, "Chain length M")->check(CLI::Range(2, 1000))
      ->capture_default_str();
  chain->add_option("--link-rate", link_rate, "Rate of every link")->capture_default_str();
  chain_model.attach(chain, false);
  chain_out.attach(chain);

  // dumbbell
  auto* dumbbell = app.add_subcommand("dumbbell", "Solve one dumbbell network");
  std::size_t side = 3;
  double spoke_rate = 0.6, bar_rate = 0.6;
  ModelFlags dumbbell_model;
  OutputFlags dumbbell_out;
  dumbbell->add_option("--side", side, "Spokes per hub")->check(CLI::Range(1, 500))
      ->capture_default_str();
  dumbbell->add_option("--spoke-rate", spoke_rate, "Rate of every spoke")->capture_default_str();
  dumbbell->add_option("--bar-rate", bar_rate, "Rate of the hub-to-hub bar")->capture_default_str();
  dumbbell_model.attach(dumbbell, false);
  dumbbell_out.attach(dumbbell);

  // solve
  auto* solve = app.add_subcommand("solve", "Solve a network read from a JSON file");
  std::string network_file;
  ModelFlags solve_model;
  OutputFlags solve_out;
  solve->add_option("--network", network_file, "Network JSON file")->required();
  solve_model.attach(solve, false);
  solve->get_option("--eps")->description("Override the file's epsilon_eff");
  solve->get_option("--swap-eff")->description("Override every node's swap efficiency");
  solve_out.attach(solve);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Parameter sweeps written as CSV");
  sweep->require_subcommand(1);
  auto* sweep_chain = sweep->add_subcommand("chain", "Sweep chain length");
  std::vector<std::string> sweep_sizes{"2:16"};
  double sweep_link = 0.6;
  ModelFlags sweep_chain_model;
  sweep_chain_model.beta = {1.5, 2.0, 3.0};
  sweep_chain_model.eps = {0.0, 0.01};
  std::string sweep_chain_csv;
  unsigned sweep_chain_jobs = 1;
  sweep_chain->add_option("--nodes", sweep_sizes, "Chain lengths; a:b is a range")
      ->delimiter(',')
      ->capture_default_str();
  sweep_chain->add_option("--link-rate", sweep_link, "Rate of every link")->capture_default_str();
  sweep_chain_model.attach(sweep_chain, true);
  sweep_chain->add_option("--csv,--out", sweep_chain_csv, "CSV destination (default stdout)");
  sweep_chain->add_option("--jobs", sweep_chain_jobs, "Worker threads")->capture_default_str();

  auto* sweep_dumbbell = sweep->add_subcommand("dumbbell", "Sweep bar-to-spoke rate ratio");
  std::size_t sweep_side = 3;
  double sweep_spoke = 0.6;
  std::vector<double> ratios;
  ModelFlags sweep_dumbbell_model;
  sweep_dumbbell_model.eps = {0.0, 0.01};
  std::string sweep_dumbbell_csv;
  unsigned sweep_dumbbell_jobs = 1;
  sweep_dumbbell->add_option("--side", sweep_side, "Spokes per hub")->capture_default_str();
  sweep_dumbbell->add_option("--spoke-rate", sweep_spoke, "Rate of every spoke")
      ->capture_default_str();
  sweep_dumbbell->add_option("--ratios", ratios,
                             "Bar/spoke ratios (default: 25 log-spaced values 0.1..1e4)")
      ->delimiter(',');
  sweep_dumbbell_model.attach(sweep_dumbbell, true);
  sweep_dumbbell->add_option("--csv,--out", sweep_dumbbell_csv, "CSV destination (default stdout)");
  sweep_dumbbell->add_option("--jobs", sweep_dumbbell_jobs, "Worker threads")->capture_default_str();

  // bounds
  auto* bounds = app.add_subcommand("bounds", "Coalition-size bounds for a homogeneous chain");
  std::size_t bounds_nodes = 20;
  double bounds_q = 0.9, bounds_beta = 2.0, bounds_eps = 0.01;
  std::string bounds_out;
  bool bounds_as_json = false;
  bounds->add_option("--nodes", bounds_nodes, "Chain length M")->capture_default_str();
  bounds->add_option("--swap-eff", bounds_q, "Swap efficiency q")->capture_default_str();
  bounds->add_option("--beta", bounds_beta, "Volume base")->capture_default_str();
  bounds->add_option("--eps", bounds_eps, "Gate error")->capture_default_str();
  bounds->add_option("--out", bounds_out, "Destination (default stdout)");
  bounds->add_flag("--json", bounds_as_json, "Emit JSON instead of text");

  // export-dot
  auto* dot = app.add_subcommand("export-dot", "Solve and write the entanglement graph");
  std::string dot_network;
  std::size_t dot_nodes = 0, dot_side = 0;
  double dot_link = 0.6, dot_spoke = 0.6, dot_bar = 0.6;
  ModelFlags dot_model;
  std::string dot_out;
  auto* dot_net_opt = dot->add_option("--network", dot_network, "Network JSON file");
  auto* dot_nodes_opt = dot->add_option("--nodes", dot_nodes, "Use a chain of this length");
  auto* dot_side_opt = dot->add_option("--side", dot_side, "Use a dumbbell with this many spokes");
  dot_net_opt->excludes(dot_nodes_opt)->excludes(dot_side_opt);
  dot_nodes_opt->excludes(dot_side_opt);
  dot->add_option("--link-rate", dot_link, "Chain link rate")->capture_default_str();
  dot->add_option("--spoke-rate", dot_spoke, "Dumbbell spoke rate")->capture_default_str();
  dot->add_option("--bar-rate", dot_bar, "Dumbbell bar rate")->capture_default_str();
  dot_model.attach(dot, false);
  dot->add_option("--out", dot_out, "Destination (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kUsageError;
  }

  try {
    if (chain->parsed()) {
      const auto net = make_chain(chain_nodes, link_rate, chain_model.swap_eff, chain_model.eps.front());
      return solve_and_report(net, chain_model, chain_out);
    }
    if (dumbbell->parsed()) {
      const auto net = make_dumbbell(side, spoke_rate, bar_rate, dumbbell_model.swap_eff,
                                     dumbbell_model.eps.front());
      return solve_and_report(net, dumbbell_model, dumbbell_out);
    }
    if (solve->parsed()) {
      auto net = load_network(network_file);
      if (solve->count("--eps")) net = net.with_epsilon(solve_model.eps.front());
      if (solve->count("--swap-eff")) net = net.with_swap_efficiency(solve_model.swap_eff);
      return solve_and_report(net, solve_model, solve_out);
    }
    if (sweep_chain->parsed()) {
      ChainSweepConfig cfg;
      cfg.sizes = expand_sizes(sweep_sizes);
      cfg.link_rate = sweep_link;
      cfg.swap_efficiency = sweep_chain_model.swap_eff;
      cfg.betas = sweep_chain_model.beta;
      cfg.epsilons = sweep_chain_model.eps;
      cfg.taper_v0 = sweep_chain_model.taper_v0;
      cfg.compute = sweep_chain_model.compute();
      cfg.jobs = sweep_chain_jobs;
      const auto rows = run_chain_sweep(cfg);
      std::ostringstream os;
      write_chain_csv(rows, os);
      write_text(sweep_chain_csv, os.str());
      for (const auto& r : rows)
        if (!r.ok()) std::cerr << "qnu: M=" << r.nodes << " beta=" << r.beta << " eps=" << r.epsilon
                               << ": " << r.error << '\n';
      return 0;
    }
    if (sweep_dumbbell->parsed()) {
      DumbbellSweepConfig cfg;
      cfg.side = sweep_side;
      cfg.spoke_rate = sweep_spoke;
      cfg.bar_ratios = ratios.empty() ? log_spaced(0.1, 1e4, 25) : ratios;
      cfg.swap_efficiency = sweep_dumbbell_model.swap_eff;
      cfg.betas = sweep_dumbbell_model.beta;
      cfg.epsilons = sweep_dumbbell_model.eps;
      cfg.taper_v0 = sweep_dumbbell_model.taper_v0;
      cfg.compute = sweep_dumbbell_model.compute();
      cfg.jobs = sweep_dumbbell_jobs;
      const auto rows = run_dumbbell_sweep(cfg);
      std::ostringstream os;
      write_dumbbell_csv(rows, os);
      write_text(sweep_dumbbell_csv, os.str());
      for (const auto& r : rows)
        if (!r.ok()) std::cerr << "qnu: ratio=" << r.bar_ratio << " beta=" << r.beta
                               << " eps=" << r.epsilon << ": " << r.error << '\n';
      return 0;
    }
    if (bounds->parsed()) {
      const auto report = bounds_report(bounds_nodes, bounds_q, bounds_beta, bounds_eps);
      if (bounds_as_json) {
        write_text(bounds_out, bounds_json(report) + "\n");
      } else {
        std::ostringstream os;
        write_bounds_text(report, os);
        write_text(bounds_out, os.str());
      }
      return 0;
    }
    if (dot->parsed()) {
      std::optional<NetworkSpec> net;
      const double eps = dot_model.eps.front();
      if (!dot_network.empty()) {
        net = load_network(dot_network);
        if (dot->count("--eps")) net = net->with_epsilon(eps);
      } else if (dot_side > 0) {
        net = make_dumbbell(dot_side, dot_spoke, dot_bar, dot_model.swap_eff, eps);
      } else if (dot_nodes > 0) {
        net = make_chain(dot_nodes, dot_link, dot_model.swap_eff, eps);
      } else {
        throw std::invalid_argument("export-dot needs --network, --nodes or --side");
      }
      UtilityResult result;
      try {
        result = compute_utility(*net, dot_model.model(dot_model.beta.front()), dot_model.compute());
      } catch (const SolverError& e) {
        std::cerr << "qnu: " << e.what() << '\n';
        return kSolverFailure;
      }
      std::ostringstream os;
      export_entanglement_dot(result, os);
      write_text(dot_out, os.str());
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "qnu: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
