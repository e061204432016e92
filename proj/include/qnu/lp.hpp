#pragma once

// Sparse linear programs and a deterministic bounded revised simplex solver.
//
// Problems are stated as
//
//   maximize    c^T x
//   subject to  a_i^T x  (<= | = | >=)  b_i     for every row i
//               l <= x <= u
//
// The solver appends one logical column per row, optional phase-one
// artificials, and runs a two-phase primal simplex with an explicit dense
// basis inverse that is refactored periodically through Eigen's partial
// pivoting LU. Everything is templated on the scalar type; `double` is the
// only instantiation exercised by the rest of the library.

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#ifdef QNU_LP_TRACE
#include <cstdio>
#define QNU_LP_LOG(...) std::fprintf(stderr, __VA_ARGS__)
#else
#define QNU_LP_LOG(...) ((void)0)
#endif

namespace qnu::lp {

using Index = std::ptrdiff_t;

enum class Sense { LessEqual, Equal, GreaterEqual };

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NumericalFailure: return "numerical_failure";
  }
  return "unknown";
}

template <typename Scalar>
struct Term {
  Index index;
  Scalar coefficient;
};

template <typename Scalar>
struct Row {
  std::vector<Term<Scalar>> terms;
  Sense sense;
  Scalar rhs;
};

template <typename Scalar = double>
class LinearProgram {
 public:
  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  LinearProgram() = default;
  explicit LinearProgram(Index num_variables) { resize(num_variables); }

  /// Appends a variable and returns its index. Bounds default to [0, inf).
  Index add_variable(Scalar objective = Scalar(0), Scalar lower = Scalar(0),
                     Scalar upper = kInf, std::string name = {}) {
    check_variable(objective, lower, upper);
    const Index j = num_variables();
    objective_.push_back(objective);
    lower_.push_back(lower);
    upper_.push_back(upper);
    names_.push_back(std::move(name));
    return j;
  }

  void set_objective(Index j, Scalar c) {
    check_index(j);
    check_variable(c, lower_[j], upper_[j]);
    objective_[j] = c;
  }

  void set_bounds(Index j, Scalar lower, Scalar upper) {
    check_index(j);
    check_variable(objective_[j], lower, upper);
    lower_[j] = lower;
    upper_[j] = upper;
  }

  void set_name(Index j, std::string name) {
    check_index(j);
    names_[j] = std::move(name);
  }

  /// Duplicate indices within one row are summed.
  Index add_row(std::vector<Term<Scalar>> terms, Sense sense, Scalar rhs) {
    for (const auto& t : terms) {
      check_index(t.index);
      if (!std::isfinite(static_cast<double>(t.coefficient)))
        throw std::invalid_argument("lp: non-finite row coefficient");
    }
    if (!std::isfinite(static_cast<double>(rhs)))
      throw std::invalid_argument("lp: non-finite right-hand side");
    rows_.push_back(Row<Scalar>{std::move(terms), sense, rhs});
    return static_cast<Index>(rows_.size()) - 1;
  }

  Index num_variables() const { return static_cast<Index>(objective_.size()); }
  Index num_rows() const { return static_cast<Index>(rows_.size()); }

  const std::vector<Scalar>& objective() const { return objective_; }
  const std::vector<Scalar>& lower() const { return lower_; }
  const std::vector<Scalar>& upper() const { return upper_; }
  const std::vector<Row<Scalar>>& rows() const { return rows_; }
  const Row<Scalar>& row(Index i) const { return rows_.at(static_cast<std::size_t>(i)); }

  std::string name(Index j) const {
    check_index(j);
    if (!names_[j].empty()) return names_[j];
    return "x" + std::to_string(j);
  }

 private:
  void resize(Index n) {
    if (n < 0) throw std::invalid_argument("lp: negative variable count");
    objective_.assign(n, Scalar(0));
    lower_.assign(n, Scalar(0));
    upper_.assign(n, kInf);
    names_.assign(n, {});
  }

  void check_index(Index j) const {
    if (j < 0 || j >= num_variables())
      throw std::out_of_range("lp: variable index out of range");
  }

  static void check_variable(Scalar c, Scalar lower, Scalar upper) {
    if (std::isnan(static_cast<double>(lower)) || std::isnan(static_cast<double>(upper)) ||
        lower > upper || lower == kInf || upper == -kInf)
      throw std::invalid_argument("lp: inconsistent variable bounds");
    if (!std::isfinite(static_cast<double>(c)))
      throw std::invalid_argument("lp: non-finite objective coefficient");
  }

  std::vector<Scalar> objective_;
  std::vector<Scalar> lower_;
  std::vector<Scalar> upper_;
  std::vector<std::string> names_;
  std::vector<Row<Scalar>> rows_;
};

template <typename Scalar = double>
struct Tolerances {
  /// Absolute row residual / bound violation accepted in a returned optimum.
  Scalar primal = Scalar(1e-9);
  /// Bound slack used inside the Harris ratio test; must stay below `primal`.
  Scalar harris = Scalar(1e-11);
  /// Reduced-cost threshold, relative to the largest objective coefficient.
  Scalar optimality = Scalar(1e-10);
  /// Smallest admissible pivot magnitude.
  Scalar pivot = Scalar(1e-9);
  /// Relative size of the random bound relaxation used against degeneracy;
  /// zero disables it. The relaxation is removed before returning.
  Scalar perturbation = Scalar(1e-7);
  Index refactor_interval = 64;
  /// Consecutive degenerate pivots before switching to Bland's rule.
  Index degenerate_limit = 50;
  /// Zero means "derive from the problem size".
  Index max_iterations = 0;
};

template <typename Scalar = double>
struct Solution {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Status status = Status::NumericalFailure;
  Scalar objective = Scalar(0);
  Vector primal;
  Index iterations = 0;

  bool optimal() const { return status == Status::Optimal; }
};

template <typename Scalar = double>
struct ResidualReport {
  Scalar max_row_residual = Scalar(0);
  Index worst_row = -1;
  Scalar max_bound_violation = Scalar(0);
  Index worst_variable = -1;
  Scalar objective = Scalar(0);

  bool feasible(Scalar tol) const {
    return max_row_residual <= tol && max_bound_violation <= tol;
  }
};

/// Independent recomputation of row residuals, bound violations and the
/// objective for a candidate point. Touches nothing inside the solver.
template <typename Scalar>
ResidualReport<Scalar> verify(const LinearProgram<Scalar>& lp,
                              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  if (x.size() != lp.num_variables())
    throw std::invalid_argument("lp::verify: dimension mismatch");
  ResidualReport<Scalar> report;
  for (Index i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.row(i);
    Scalar activity(0);
    for (const auto& t : row.terms) activity += t.coefficient * x[t.index];
    Scalar residual(0);
    switch (row.sense) {
      case Sense::LessEqual: residual = std::max(Scalar(0), activity - row.rhs); break;
      case Sense::GreaterEqual: residual = std::max(Scalar(0), row.rhs - activity); break;
      case Sense::Equal: residual = std::abs(activity - row.rhs); break;
    }
    if (residual > report.max_row_residual) {
      report.max_row_residual = residual;
      report.worst_row = i;
    }
  }
  for (Index j = 0; j < lp.num_variables(); ++j) {
    const Scalar v = std::max({Scalar(0), lp.lower()[j] - x[j], x[j] - lp.upper()[j]});
    if (v > report.max_bound_violation) {
      report.max_bound_violation = v;
      report.worst_variable = j;
    }
    report.objective += lp.objective()[j] * x[j];
  }
  return report;
}

template <typename Scalar>
ResidualReport<Scalar> verify(const LinearProgram<Scalar>& lp, const Solution<Scalar>& sol) {
  return verify(lp, sol.primal);
}

namespace detail {

template <typename Scalar>
class RevisedSimplex {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor>;

  RevisedSimplex(const LinearProgram<Scalar>& lp, const Tolerances<Scalar>& tol)
      : lp_(lp), tol_(tol), m_(lp.num_rows()), n_(lp.num_variables()) {}

  Solution<Scalar> run() {
    Solution<Scalar> out;
    setup();
    if (num_artificials_ > 0) {
      if (iterate(/*phase_one=*/true) != Status::Optimal) return finish(out, Status::NumericalFailure);
      Scalar infeasibility(0);
      for (Index j = first_artificial_; j < total_; ++j) infeasibility += x_[j];
      const Scalar scale = std::max(Scalar(1), rhs_scale_);
      if (infeasibility > tol_.primal * scale) return finish(out, Status::Infeasible);
      for (Index j = first_artificial_; j < total_; ++j) {
        upper_[j] = Scalar(0);
        if (!is_basic_[j]) x_[j] = Scalar(0);
      }
    }
    set_phase_two_costs();
    const Status phase2 = iterate(/*phase_one=*/false);
    if (phase2 != Status::Optimal) return finish(out, phase2);
    if (perturbed_) {
      // The basis stays dual feasible when the true bounds come back; the
      // dual simplex repairs whatever primal infeasibility that leaves.
      remove_perturbation();
      const Status cleanup = dual_iterate();
      if (cleanup != Status::Optimal) return finish(out, cleanup);
      const Status polish = iterate(/*phase_one=*/false);
      if (polish != Status::Optimal) return finish(out, polish);
    }
    return finish(out, Status::Optimal);
  }

 private:
  enum class Bound : std::uint8_t { Lower, Upper, Free, Basic };

  void setup() {
    // Column layout: [structural | logical | artificial].
    std::vector<Eigen::Triplet<Scalar>> triplets;
    b_.resize(m_);
    rhs_scale_ = Scalar(0);
    for (Index i = 0; i < m_; ++i) {
      const auto& row = lp_.row(i);
      for (const auto& t : row.terms)
        if (t.coefficient != Scalar(0)) triplets.emplace_back(i, t.index, t.coefficient);
      b_[i] = row.rhs;
      rhs_scale_ = std::max(rhs_scale_, std::abs(row.rhs));
    }
    lower_.assign(lp_.lower().begin(), lp_.lower().end());
    upper_.assign(lp_.upper().begin(), lp_.upper().end());
    for (Index i = 0; i < m_; ++i) {
      triplets.emplace_back(i, n_ + i, Scalar(1));
      switch (lp_.row(i).sense) {
        case Sense::LessEqual: lower_.push_back(0); upper_.push_back(kInf); break;
        case Sense::GreaterEqual: lower_.push_back(-kInf); upper_.push_back(0); break;
        case Sense::Equal: lower_.push_back(0); upper_.push_back(0); break;
      }
    }
    perturb_bounds();

    // Nonbasic structurals start at a finite bound (or zero when free).
    x_.assign(n_ + m_, Scalar(0));
    state_.assign(n_ + m_, Bound::Lower);
    for (Index j = 0; j < n_; ++j) {
      if (std::isfinite(static_cast<double>(lower_[j]))) {
        x_[j] = lower_[j];
        state_[j] = Bound::Lower;
      } else if (std::isfinite(static_cast<double>(upper_[j]))) {
        x_[j] = upper_[j];
        state_[j] = Bound::Upper;
      } else {
        x_[j] = Scalar(0);
        state_[j] = Bound::Free;
      }
    }
    Vector activity = Vector::Zero(m_);
    for (const auto& t : triplets)
      if (t.col() < n_) activity[t.row()] += t.value() * x_[t.col()];

    basis_.assign(m_, -1);
    first_artificial_ = n_ + m_;
    num_artificials_ = 0;
    for (Index i = 0; i < m_; ++i) {
      const Index s = n_ + i;
      const Scalar v = b_[i] - activity[i];
      if (v >= lower_[s] - tol_.harris && v <= upper_[s] + tol_.harris) {
        x_[s] = std::clamp(v, lower_[s], upper_[s]);
        basis_[i] = s;
        state_[s] = Bound::Basic;
        continue;
      }
      // Logical parks at the bound nearest to v; an artificial absorbs the rest.
      const bool below = v < lower_[s];
      x_[s] = below ? lower_[s] : upper_[s];
      state_[s] = below ? Bound::Lower : Bound::Upper;
      const Scalar residual = v - x_[s];
      const Index a = first_artificial_ + num_artificials_++;
      triplets.emplace_back(i, a, residual > 0 ? Scalar(1) : Scalar(-1));
      lower_.push_back(0);
      upper_.push_back(kInf);
      x_.push_back(std::abs(residual));
      state_.push_back(Bound::Basic);
      basis_[i] = a;
    }
    total_ = n_ + m_ + num_artificials_;
    A_.resize(m_, total_);
    A_.setFromTriplets(triplets.begin(), triplets.end());
    A_.makeCompressed();
    is_basic_.assign(total_, false);
    for (Index i = 0; i < m_; ++i) is_basic_[basis_[i]] = true;

    cost_.assign(total_, Scalar(0));
    for (Index j = first_artificial_; j < total_; ++j) cost_[j] = Scalar(1);
    cost_scale_ = Scalar(1);
  }

  // Relax every finite bound outward by a small pseudo-random amount so that
  // ties in the ratio test become unlikely. Seeded, hence reproducible.
  void perturb_bounds() {
    orig_lower_ = lower_;
    orig_upper_ = upper_;
    perturbed_ = tol_.perturbation > Scalar(0);
    if (!perturbed_) return;
    std::mt19937_64 rng(0x5eed1e55u);
    const auto unit = [&rng] { return Scalar(static_cast<double>(rng() >> 11) * 0x1.0p-53); };
    for (std::size_t j = 0; j < lower_.size(); ++j) {
      if (std::isfinite(static_cast<double>(lower_[j])))
        lower_[j] -= tol_.perturbation * (Scalar(1) + std::abs(lower_[j])) * (Scalar(1) + unit());
      if (std::isfinite(static_cast<double>(upper_[j])))
        upper_[j] += tol_.perturbation * (Scalar(1) + std::abs(upper_[j])) * (Scalar(1) + unit());
    }
  }

  void remove_perturbation() {
    std::copy(orig_lower_.begin(), orig_lower_.end(), lower_.begin());
    std::copy(orig_upper_.begin(), orig_upper_.end(), upper_.begin());
    for (Index j = 0; j < total_; ++j) {
      if (is_basic_[j]) continue;
      switch (state_[j]) {
        case Bound::Lower: x_[j] = lower_[j]; break;
        case Bound::Upper: x_[j] = upper_[j]; break;
        default: break;
      }
    }
    perturbed_ = false;
  }

  void set_phase_two_costs() {
    Scalar cmax(0);
    for (Index j = 0; j < n_; ++j) cmax = std::max(cmax, std::abs(lp_.objective()[j]));
    cost_scale_ = cmax > Scalar(0) ? cmax : Scalar(1);
    std::fill(cost_.begin(), cost_.end(), Scalar(0));
    for (Index j = 0; j < n_; ++j) cost_[j] = -lp_.objective()[j] / cost_scale_;
  }

  bool refactor() {
    Matrix B = Matrix::Zero(m_, m_);
    for (Index i = 0; i < m_; ++i)
      for (typename Sparse::InnerIterator it(A_, basis_[i]); it; ++it) B(it.row(), i) = it.value();
    Eigen::PartialPivLU<Matrix> lu(B);
    // Reject near-singular bases rather than propagating garbage.
    const Scalar diag_min = m_ > 0 ? lu.matrixLU().diagonal().cwiseAbs().minCoeff() : Scalar(1);
    if (m_ > 0 && !(diag_min > std::numeric_limits<Scalar>::epsilon() * 16)) {
      QNU_LP_LOG("lp: singular basis (min |u_ii| = %g) at iteration %td\n",
                 static_cast<double>(diag_min), iterations_);
      return false;
    }
    Binv_ = lu.inverse();

    Vector rhs = b_;
    for (Index j = 0; j < total_; ++j) {
      if (is_basic_[j] || x_[j] == Scalar(0)) continue;
      for (typename Sparse::InnerIterator it(A_, j); it; ++it) rhs[it.row()] -= it.value() * x_[j];
    }
    const Vector xb = Binv_ * rhs;
    for (Index i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    since_refactor_ = 0;
    return true;
  }

  Scalar column_dot(Index j, const Vector& v) const {
    Scalar s(0);
    for (typename Sparse::InnerIterator it(A_, j); it; ++it) s += it.value() * v[it.row()];
    return s;
  }

  Scalar reduced_cost(Index j, const Vector& y) const { return cost_[j] - column_dot(j, y); }

  bool eligible(Index j, Scalar d) const {
    if (is_basic_[j] || lower_[j] == upper_[j]) return false;
    switch (state_[j]) {
      case Bound::Lower: return d < -tol_.optimality;
      case Bound::Upper: return d > tol_.optimality;
      case Bound::Free: return std::abs(d) > tol_.optimality;
      case Bound::Basic: return false;
    }
    return false;
  }

  Index price(const Vector& y, bool bland) const {
    Index best = -1;
    Scalar best_score(0);
    for (Index j = 0; j < total_; ++j) {
      if (is_basic_[j]) continue;
      const Scalar d = reduced_cost(j, y);
      if (!eligible(j, d)) continue;
      if (bland) return j;
      if (std::abs(d) > best_score) {
        best_score = std::abs(d);
        best = j;
      }
    }
    return best;
  }

  // A step counts as progress only if it moves the (scaled) objective by a
  // meaningful amount; Bland's rule stays on until such a step happens.
  void track_progress(Scalar gain, Index& degenerate_run, bool& bland) const {
    if (gain > kProgressFloor) {
      degenerate_run = 0;
      bland = false;
    } else if (++degenerate_run >= tol_.degenerate_limit) {
      bland = true;
    }
  }

  static constexpr Scalar kProgressFloor = Scalar(1e-12);

  Status iterate(bool phase_one) {
    const Index limit =
        tol_.max_iterations > 0 ? tol_.max_iterations : 50 * (m_ + total_) + 1000;
    if (!refactor()) return Status::NumericalFailure;
    Index degenerate_run = 0;
    bool bland = false;
    bool verified_optimal = false;
    Vector cb(m_);
    Vector alpha(m_);

    for (;;) {
      if (iterations_ >= limit) {
        QNU_LP_LOG("lp: iteration limit %td reached\n", limit);
        return Status::NumericalFailure;
      }
      if (since_refactor_ >= tol_.refactor_interval && !refactor()) return Status::NumericalFailure;

      for (Index i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      const Vector y = Binv_.transpose() * cb;
      const Index enter = price(y, bland);
#ifdef QNU_LP_TRACE
      if (iterations_ % 500 == 0) {
        Scalar obj(0);
        for (Index j = 0; j < total_; ++j) obj += cost_[j] * x_[j];
        QNU_LP_LOG("lp: it %td obj %.12g bland %d degen %td enter %td\n", iterations_,
                   static_cast<double>(obj), int(bland), degenerate_run, enter);
      }
#endif
      if (enter < 0) {
        // Confirm against a fresh factorization before declaring optimality.
        if (verified_optimal || since_refactor_ == 0) break;
        if (!refactor()) return Status::NumericalFailure;
        verified_optimal = true;
        continue;
      }
      verified_optimal = false;
      const Scalar d = reduced_cost(enter, y);
      const Scalar dir = (state_[enter] == Bound::Free) ? (d < 0 ? Scalar(1) : Scalar(-1))
                         : (state_[enter] == Bound::Lower ? Scalar(1) : Scalar(-1));

      alpha.setZero();
      for (typename Sparse::InnerIterator it(A_, enter); it; ++it)
        alpha.noalias() += it.value() * Binv_.col(it.row());

      // Basic variable i moves at rate -dir * alpha[i] per unit step. The
      // distance to the blocking bound is clamped at zero so that values a
      // hair outside their bounds count as degenerate rather than negative.
      const auto blocking = [&](Index i, Scalar& gap, Scalar& mag, bool& to_upper) {
        const Scalar rate = -dir * alpha[i];
        const Index v = basis_[i];
        if (rate < -tol_.pivot && std::isfinite(static_cast<double>(lower_[v]))) {
          gap = std::max(Scalar(0), x_[v] - lower_[v]);
          to_upper = false;
        } else if (rate > tol_.pivot && std::isfinite(static_cast<double>(upper_[v]))) {
          gap = std::max(Scalar(0), upper_[v] - x_[v]);
          to_upper = true;
        } else {
          return false;
        }
        mag = std::abs(rate);
        return true;
      };

      // Harris pass one: largest step keeping every basic within relaxed bounds.
      const Scalar range = upper_[enter] - lower_[enter];
      Scalar theta_max = std::isfinite(static_cast<double>(range)) ? range : kInf;
      Scalar gap, mag;
      bool to_upper;
      for (Index i = 0; i < m_; ++i)
        if (blocking(i, gap, mag, to_upper)) theta_max = std::min(theta_max, (gap + tol_.harris) / mag);
      if (!std::isfinite(static_cast<double>(theta_max))) {
        return phase_one ? Status::NumericalFailure : Status::Unbounded;
      }

      // Pass two: among rows blocking within theta_max take the largest pivot,
      // or under Bland's rule the smallest variable index.
      Index leave = -1;
      Scalar leave_ratio(0);
      Scalar best_pivot(0);
      bool leave_to_upper = false;
      for (Index i = 0; i < m_; ++i) {
        if (!blocking(i, gap, mag, to_upper)) continue;
        const Scalar ratio = gap / mag;
        if (ratio > theta_max) continue;
        const bool take = leave < 0 || (bland ? basis_[i] < basis_[leave] : mag > best_pivot);
        if (take) {
          leave = i;
          leave_ratio = ratio;
          best_pivot = mag;
          leave_to_upper = to_upper;
        }
      }
      ++iterations_;
      if (leave < 0 || (std::isfinite(static_cast<double>(range)) && range <= leave_ratio)) {
        // Bound flip of the entering variable; the basis is unchanged.
        if (!std::isfinite(static_cast<double>(range))) {
          QNU_LP_LOG("lp: no leaving row and no finite bound flip\n");
          return Status::NumericalFailure;
        }
        const Scalar step = dir * range;
        state_[enter] = dir > 0 ? Bound::Upper : Bound::Lower;
        x_[enter] = dir > 0 ? upper_[enter] : lower_[enter];
        for (Index i = 0; i < m_; ++i) x_[basis_[i]] -= step * alpha[i];
        track_progress(std::abs(d * range), degenerate_run, bland);
        continue;
      }

      const Scalar theta = std::max(Scalar(0), leave_ratio);
      const Scalar step = dir * theta;
      for (Index i = 0; i < m_; ++i) x_[basis_[i]] -= step * alpha[i];
      x_[enter] += step;
      replace_basic(leave, enter, leave_to_upper, alpha);

      track_progress(std::abs(d * theta), degenerate_run, bland);
    }

    if (!refactor()) return Status::NumericalFailure;
    for (Index i = 0; i < m_; ++i) {
      const Index v = basis_[i];
      if (x_[v] < lower_[v] - tol_.primal || x_[v] > upper_[v] + tol_.primal) {
        QNU_LP_LOG("lp: basic variable %td off its bounds by %g\n", v,
                   static_cast<double>(std::max(lower_[v] - x_[v], x_[v] - upper_[v])));
        return Status::NumericalFailure;
      }
    }
    return Status::Optimal;
  }

  // Basic variable in row `leave` exits at its lower or upper bound and
  // `enter` takes its place; B^-1 gets a product-form update.
  void replace_basic(Index leave, Index enter, bool to_upper, Vector& alpha) {
    const Index out = basis_[leave];
    x_[out] = to_upper ? upper_[out] : lower_[out];
    state_[out] = (lower_[out] == upper_[out]) ? Bound::Lower
                  : (to_upper ? Bound::Upper : Bound::Lower);
    is_basic_[out] = false;
    is_basic_[enter] = true;
    state_[enter] = Bound::Basic;
    basis_[leave] = enter;

    const Scalar pivot = alpha[leave];
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> pivot_row = Binv_.row(leave) / pivot;
    alpha[leave] -= Scalar(1);
    Binv_.noalias() -= alpha * pivot_row;
    Binv_.row(leave) = pivot_row;
    ++since_refactor_;
  }

  // Bounded dual simplex from a dual feasible basis: repeatedly drive the
  // most infeasible basic variable to its violated bound.
  Status dual_iterate() {
    const Index limit =
        tol_.max_iterations > 0 ? tol_.max_iterations : 50 * (m_ + total_) + 1000;
    if (!refactor()) return Status::NumericalFailure;
    const Scalar feasibility = tol_.harris * 10;
    Vector cb(m_);
    Vector alpha(m_);
    for (;;) {
      if (since_refactor_ >= tol_.refactor_interval && !refactor()) return Status::NumericalFailure;
      Index leave = -1;
      Scalar worst = feasibility;
      for (Index i = 0; i < m_; ++i) {
        const Index v = basis_[i];
        const Scalar violation = std::max(lower_[v] - x_[v], x_[v] - upper_[v]);
        if (violation > worst) {
          worst = violation;
          leave = i;
        }
      }
      if (leave < 0) return Status::Optimal;
      if (iterations_ >= limit) {
        QNU_LP_LOG("lp: iteration limit %td reached in dual cleanup\n", limit);
        return Status::NumericalFailure;
      }
      const Index v = basis_[leave];
      const bool below = x_[v] < lower_[v];
      const Scalar target = below ? lower_[v] : upper_[v];
      const Scalar sign = below ? Scalar(1) : Scalar(-1);

      for (Index i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
      const Vector y = Binv_.transpose() * cb;
      const Vector rho = Binv_.row(leave).transpose();

      // Raising x_j by t moves x_v by -a_j t. A candidate must push x_v
      // toward its bound in a direction x_j is allowed to move.
      const auto candidate = [&](Index j, Scalar& ratio, Scalar& mag) {
        if (is_basic_[j] || lower_[j] == upper_[j]) return false;
        const Scalar a = column_dot(j, rho);
        const Scalar g = -sign * a;
        const Scalar d = reduced_cost(j, y);
        Scalar slack;
        if (g > tol_.pivot && (state_[j] == Bound::Lower || state_[j] == Bound::Free))
          slack = state_[j] == Bound::Free ? std::abs(d) : std::max(Scalar(0), d);
        else if (g < -tol_.pivot && (state_[j] == Bound::Upper || state_[j] == Bound::Free))
          slack = state_[j] == Bound::Free ? std::abs(d) : std::max(Scalar(0), -d);
        else
          return false;
        mag = std::abs(a);
        ratio = slack / mag;
        return true;
      };

      Scalar ratio_max = kInf;
      Scalar ratio, mag;
      for (Index j = 0; j < total_; ++j)
        if (candidate(j, ratio, mag)) ratio_max = std::min(ratio_max, ratio + tol_.optimality / mag);
      if (!std::isfinite(static_cast<double>(ratio_max))) return Status::Infeasible;
      Index enter = -1;
      Scalar best(0);
      for (Index j = 0; j < total_; ++j)
        if (candidate(j, ratio, mag) && ratio <= ratio_max && mag > best) {
          best = mag;
          enter = j;
        }

      alpha.setZero();
      for (typename Sparse::InnerIterator it(A_, enter); it; ++it)
        alpha.noalias() += it.value() * Binv_.col(it.row());
      const Scalar t = (x_[v] - target) / alpha[leave];
      for (Index i = 0; i < m_; ++i) x_[basis_[i]] -= t * alpha[i];
      x_[enter] += t;
      ++iterations_;
      replace_basic(leave, enter, !below, alpha);
    }
  }

  Solution<Scalar>& finish(Solution<Scalar>& out, Status status) {
    out.status = status;
    out.iterations = iterations_;
    out.primal = Vector::Zero(n_);
    if (status != Status::Optimal) return out;
    for (Index j = 0; j < n_; ++j) {
      // Snap basic values that sit within tolerance of a bound.
      Scalar v = x_[j];
      if (v < lower_[j]) v = lower_[j];
      if (v > upper_[j]) v = upper_[j];
      out.primal[j] = v;
    }
    const auto report = verify(lp_, out.primal);
    out.objective = report.objective;
    if (!report.feasible(tol_.primal)) {
      QNU_LP_LOG("lp: verification failed, row residual %g (row %td), bound violation %g\n",
                 static_cast<double>(report.max_row_residual), report.worst_row,
                 static_cast<double>(report.max_bound_violation));
      out.status = Status::NumericalFailure;
    }
    return out;
  }

  static constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  const LinearProgram<Scalar>& lp_;
  Tolerances<Scalar> tol_;
  Index m_;
  Index n_;
  Index total_ = 0;
  Index first_artificial_ = 0;
  Index num_artificials_ = 0;
  Scalar rhs_scale_ = Scalar(0);
  Scalar cost_scale_ = Scalar(1);

  Sparse A_;
  Vector b_;
  std::vector<Scalar> lower_, upper_, cost_, x_;
  std::vector<Scalar> orig_lower_, orig_upper_;
  bool perturbed_ = false;
  std::vector<Bound> state_;
  std::vector<bool> is_basic_;
  std::vector<Index> basis_;
  Matrix Binv_;
  Index since_refactor_ = 0;
  Index iterations_ = 0;
};

}  // namespace detail

template <typename Scalar>
Solution<Scalar> solve(const LinearProgram<Scalar>& lp,
                       const Tolerances<Scalar>& tol = Tolerances<Scalar>{}) {
  return detail::RevisedSimplex<Scalar>(lp, tol).run();
}

/// Writes the problem in CPLEX LP text form for cross-checking with
/// external solvers.
template <typename Scalar>
void write_lp_text(const LinearProgram<Scalar>& lp, std::ostream& os) {
  auto write_terms = [&](const auto& coefficient_index_pairs) {
    bool first = true;
    for (const auto& [j, c] : coefficient_index_pairs) {
      if (c == Scalar(0)) continue;
      os << (c < 0 ? (first ? "-" : " - ") : (first ? "" : " + "));
      os << static_cast<double>(std::abs(c)) << ' ' << lp.name(j);
      first = false;
    }
    if (first) os << "0 " << lp.name(0);
  };
  const auto prec = os.precision(17);
  os << "\\ generated by qnu\nMaximize\n obj: ";
  std::vector<std::pair<Index, Scalar>> obj;
  for (Index j = 0; j < lp.num_variables(); ++j) obj.emplace_back(j, lp.objective()[j]);
  write_terms(obj);
  os << "\nSubject To\n";
  for (Index i = 0; i < lp.num_rows(); ++i) {
    const auto& row = lp.row(i);
    std::vector<std::pair<Index, Scalar>> terms;
    for (const auto& t : row.terms) terms.emplace_back(t.index, t.coefficient);
    os << " c" << i << ": ";
    write_terms(terms);
    os << (row.sense == Sense::LessEqual ? " <= " : row.sense == Sense::Equal ? " = " : " >= ")
       << static_cast<double>(row.rhs) << '\n';
  }
  os << "Bounds\n";
  for (Index j = 0; j < lp.num_variables(); ++j) {
    const double lo = static_cast<double>(lp.lower()[j]);
    const double hi = static_cast<double>(lp.upper()[j]);
    if (std::isinf(lo) && std::isinf(hi)) {
      os << ' ' << lp.name(j) << " free\n";
    } else if (lo == 0.0 && std::isinf(hi)) {
      continue;
    } else {
      os << ' ';
      if (std::isinf(lo)) os << "-inf"; else os << lo;
      os << " <= " << lp.name(j) << " <= ";
      if (std::isinf(hi)) os << "+inf"; else os << hi;
      os << '\n';
    }
  }
  os << "End\n";
  os.precision(prec);
}

}  // namespace qnu::lp
