// Acceptance suite: one line per criterion, nonzero exit if any fails.

#include "qnu/experiments.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

using namespace qnu;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

UtilityResult chain(std::size_t M, double eps, double beta = 2.0,
                    EnumerationMode mode = EnumerationMode::Connected) {
  ComputeOptions opts;
  opts.enumeration.mode = mode;
  return compute_utility(make_chain(M, 0.6, 0.9, eps), UtilityModel{beta, std::nullopt}, opts);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void size_cap(Outcome& out) {
  const auto t0 = Clock::now();
  std::size_t largest = 0;
  for (std::size_t M = 11; M <= 16; ++M) {
    const auto s = max_active_coalition_size(chain(M, 0.01));
    largest = std::max(largest, s);
    out.require(s <= 10, "M=" + std::to_string(M) + " max coalition " + std::to_string(s));
  }
  const double t = seconds_since(t0);
  out.require(t < 30.0, "runtime " + num(t) + " s");
  out.detail << "largest active coalition " << largest << " over M=11..16, " << num(t) << " s";
}

void full_connectivity(Outcome& out) {
  for (std::size_t M = 8; M <= 10; ++M) {
    const auto r = chain(M, 0.01);
    const auto edges = r.entanglement_graph.support().size();
    out.require(edges == M * (M - 1) / 2,
                "M=" + std::to_string(M) + " support " + std::to_string(edges));
    out.detail << "M=" << M << ": " << edges << "/" << M * (M - 1) / 2 << " pairs; ";
  }
}

void enumeration_oracle(Outcome& out) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (std::size_t M = 3; M <= 6; ++M)
    for (double eps : {0.0, 0.01}) {
      const double a = chain(M, eps).u_comp;
      const double b = chain(M, eps, 2.0, EnumerationMode::All).u_comp;
      worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
      out.require(rel_close(a, b, 1e-6), "M=" + std::to_string(M) + " eps=" + num(eps) +
                                             ": " + num(a) + " vs " + num(b));
    }
  const double t = seconds_since(t0);
  out.require(t < 60.0, "runtime " + num(t) + " s");
  out.detail << "max relative gap " << num(worst) << ", " << num(t) << " s";
}

// Discretised search over the three-node chain's allocations (step 0.01):
// task rates p01, p12, p012 and the three swap flows.
double chain3_brute_force() {
  const double f = 0.6, q = 0.9, h = 0.01;
  double best = 0.0;
  for (int a = 0; a <= 30; ++a)
    for (int b = 0; b <= 60; ++b)
      for (int c = 0; c <= 60; ++c)
        for (int d = 0; d <= 60; ++d) {
          const double p012 = a * h, w1 = b * h, w0 = c * h, w2 = d * h;
          if (2 * p012 > q * w1 - w0 - w2 + 1e-12) continue;
          const double left01 = f + q * w2 - w1 - w0 - 2 * p012;
          const double left12 = f + q * w0 - w1 - w2 - 2 * p012;
          if (left01 < -1e-12 || left12 < -1e-12) continue;
          best = std::max(best, 8 * p012 + std::max(0.0, left01) + std::max(0.0, left12));
        }
  return best;
}

void closed_forms(Outcome& out) {
  const double u2 = chain(2, 0.0).u_comp;
  out.require(std::abs(u2 - 0.6) <= 1e-8, "M=2 U=" + num(u2));
  const double oracle = chain3_brute_force();
  out.require(std::abs(oracle - 1.2) <= 1e-9, "brute force " + num(oracle));
  const auto r3 = chain(3, 0.0);
  out.require(std::abs(r3.u_comp - 1.2) <= 1e-7, "M=3 U=" + num(r3.u_comp));
  for (const auto& t : r3.tasks)
    if (t.task.size() == 3) out.require(t.rate <= kActiveRateThreshold, "3-node task active");
  out.detail << "M=2 U=" << num(u2) << "; M=3 U=" << num(r3.u_comp) << " (brute force "
             << num(oracle) << "), max coalition " << max_active_coalition_size(r3);
}

void baseline_identities(Outcome& out) {
  std::mt19937 rng(20240601);
  double slack = std::numeric_limits<double>::infinity(), zero_gap = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto net = testing::random_network(rng, 2, 8);
    const UtilityModel u{1.5 + (trial % 4) * 0.5, std::nullopt};
    const auto r = compute_utility(net, u);
    slack = std::min(slack, r.u_comp - r.noswap_baseline);
    out.require(r.u_comp >= r.noswap_baseline - 1e-9, "case " + std::to_string(trial));
    // Without swaps only physically linked coalitions run; with no triangles
    // that leaves just the two-node tasks of the baseline.
    const auto flat =
        compute_utility(testing::random_network(rng, 2, 8, true).with_swap_efficiency(0.0), u);
    zero_gap = std::max(zero_gap, std::abs(flat.u_comp - flat.noswap_baseline));
    out.require(std::abs(flat.u_comp - flat.noswap_baseline) <= 1e-9,
                "q=0 case " + std::to_string(trial));
  }
  out.detail << "min U-baseline " << num(slack) << " over 50 networks; q=0 max gap "
             << num(zero_gap) << " over 50 triangle-free networks";
}

void homogeneity_monotonicity(Outcome& out) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = testing::random_network(rng, 3, 7);
    const double base = compute_utility(net, UtilityModel{}).u_comp;
    for (double lambda : {0.25, 3.0, 40.0}) {
      const double scaled = compute_utility(net.scaled_rates(lambda), UtilityModel{}).u_comp;
      out.require(rel_close(scaled, lambda * base, 1e-6), "scaling by " + num(lambda));
    }
  }
  int checks = 0;
  for (std::size_t M = 2; M <= 14; ++M) {
    double previous = -1.0;
    for (double beta : {1.5, 2.0, 2.5, 3.0}) {
      const double u = chain(M, 0.01, beta).u_comp;
      out.require(u >= previous - 1e-9 * std::max(1.0, u), "beta order at M=" + std::to_string(M));
      previous = u;
      ++checks;
    }
    previous = std::numeric_limits<double>::infinity();
    for (double eps : {0.0, 0.005, 0.01, 0.02, 0.05}) {
      const double u = chain(M, eps).u_comp;
      out.require(u <= previous + 1e-9 * std::max(1.0, u), "eps order at M=" + std::to_string(M));
      previous = u;
      ++checks;
    }
  }
  for (double eps : {0.0, 0.01}) {
    double previous = 0.0;
    for (std::size_t M = 2; M <= 14; ++M) {
      const double u = chain(M, eps).u_comp;
      out.require(u >= previous - 1e-9 * std::max(1.0, u),
                  "length order at M=" + std::to_string(M) + " eps=" + num(eps));
      previous = u;
      ++checks;
    }
  }
  out.detail << "30 scaling checks, " << checks << " monotonicity points";
}

void diversion_closure(Outcome& out) {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int nontrivial = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t M = 4 + trial % 3;
    const auto net = make_chain(M, 0.6, 0.9, 0.0);
    const RateConstraintSet region(net);

    // Random region point: a random sequence of swaps, each spending part of
    // what two pairs have left, then a random share of each pair's capacity.
    std::vector<double> cap(region.num_rows());
    for (std::size_t k = 0; k < region.num_rows(); ++k) cap[k] = region.no_swap_rate(k);
    for (int step = 0; step < 300; ++step) {
      const NodeId a = rng() % M, c = rng() % M, b = rng() % M;
      if (a == b || a == c || b == c) continue;
      const std::size_t ac = region.pair_index(NodePair(a, c)), cb = region.pair_index(NodePair(c, b));
      const double x = 0.5 * unit(rng) * std::min(cap[ac], cap[cb]);
      cap[ac] -= x;
      cap[cb] -= x;
      cap[region.pair_index(NodePair(a, b))] += net.swap_efficiency(c) * x;
    }
    RateVector R;
    for (std::size_t k = 0; k < region.num_rows(); ++k) R[region.pairs()[k]] = cap[k] * unit(rng);
    out.require(check_feasible(net, R).feasible(), "generated point infeasible");

    NodeId l = rng() % M, k = rng() % M, j = rng() % M;
    while (!(l < k && k < j)) {
      l = rng() % M;
      k = rng() % M;
      j = rng() % M;
    }
    const double r = unit(rng) * R[NodePair(l, j)];
    nontrivial += r > 0.0;
    const auto moved = lemma1_transform(R, l, k, j, r);
    out.require(check_feasible(net, moved).feasible(), "trial " + std::to_string(trial));
  }
  out.require(nontrivial >= 50, "only " + std::to_string(nontrivial) + " transforms move rate");
  out.detail << "100 transforms, " << nontrivial << " with r > 0";
}

void dumbbell_asymptotics(Outcome& out) {
  DumbbellSweepConfig cfg;
  cfg.side = 3;
  cfg.spoke_rate = 0.6;
  cfg.betas = {2.0};
  cfg.epsilons = {0.0};
  cfg.bar_ratios = log_spaced(0.1, 1e4, 25);
  const auto rows = run_dumbbell_sweep(cfg);
  std::vector<double> ratio;
  for (const auto& r : rows) {
    out.require(r.ok(), "row failed: " + r.error);
    ratio.push_back(r.u_ratio);
  }
  const auto peak = std::max_element(ratio.begin(), ratio.end());
  out.require(std::abs(ratio.back() - 1.0) <= 0.1, "U_ratio at 1e4 = " + num(ratio.back()));
  out.require(peak != ratio.begin() && peak != ratio.end() - 1, "peak at an endpoint");
  out.require(*peak > ratio.front() && *peak > ratio.back(), "no interior rise");
  out.detail << "U_ratio " << num(ratio.front()) << " -> peak " << num(*peak) << " at bar/spoke "
             << num(rows[peak - ratio.begin()].bar_ratio) << " -> " << num(ratio.back())
             << " at 1e4";
}

void small_dumbbells(Outcome& out) {
  for (std::size_t side = 1; side <= 4; ++side) {
    const double clean = compute_utility(make_dumbbell(side, 0.6, 0.6, 0.9, 0.0), UtilityModel{}).u_comp;
    const double noisy =
        compute_utility(make_dumbbell(side, 0.6, 0.6, 0.9, 0.01), UtilityModel{}).u_comp;
    out.require(rel_close(clean, noisy, 1e-6), "side " + std::to_string(side));
    out.detail << "side " << side << ": " << num(clean) << " / " << num(noisy) << "; ";
  }
}

void bound_sandwich(Outcome& out) {
  const auto upper = prop3_upper_bound(0.01);
  out.require(upper == 10u, "upper bound != 10");
  for (std::size_t M : {12, 16, 20}) {
    const double lower = prop4_lower_bound(M, 0.9, 2.0, 0.01);
    const auto size = max_active_coalition_size(chain(M, 0.01));
    out.require(lower - 1 <= static_cast<double>(size) && size <= *upper,
                "M=" + std::to_string(M));
    out.detail << "M=" << M << ": lower " << num(lower) << (lower < 2 ? " (vacuous)" : "")
               << ", size " << size << " <= " << *upper << "; ";
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {"size cap: chains M=11..16 at eps=0.01 keep coalitions <= 10", size_cap},
      {"full connectivity: chains M=8..10 at eps=0.01 use every pair", full_connectivity},
      {"enumeration: connected == all on chains M=3..6", enumeration_oracle},
      {"closed forms: M=2 gives 0.6, M=3 gives 1.2 (brute-force confirmed)", closed_forms},
      {"baseline: U >= no-swap on 50 random networks, equal when q=0 (triangle-free)", baseline_identities},
      {"homogeneity and monotonicity in beta, eps, M", homogeneity_monotonicity},
      {"diversion: diverted rate vectors stay feasible", diversion_closure},
      {"dumbbell: U_ratio rises, falls, ends within 0.1 of 1", dumbbell_asymptotics},
      {"small dumbbells: eps=0.01 matches perfect gates", small_dumbbells},
      {"bound sandwich: chains M=12,16,20 at eps=0.01", bound_sandwich},
  };

  int failures = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome out;
    const auto t0 = Clock::now();
    try {
      c.run(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "exception: " << e.what();
    }
    failures += !out.pass;
    std::printf("[PRIMARY] AC%02d %s  %s  (%.2f s) %s\n", index, out.pass ? "PASS" : "FAIL", c.name,
                seconds_since(t0), out.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%d criteria passed\n", index - failures, index);
  return failures == 0 ? 0 : 1;
}
