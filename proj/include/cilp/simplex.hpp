#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "cilp/lp.hpp"

namespace cilp {

/// Two-phase revised simplex on the standard form {A x = b, x ≥ 0}.
///
/// Range rows become one slack (upper side) and/or one surplus (lower side)
/// each; rows are scaled to unit max coefficient and sign-normalized to b ≥ 0.
/// Rows whose slack enters with a positive coefficient start with the slack
/// basic, the rest get an artificial. Pricing is Dantzig's rule with a
/// Harris-style two-pass ratio test; after a run of degenerate pivots the
/// solver switches to Bland's rule until the objective moves again. The basis
/// inverse is kept dense, updated by rank-one eta steps and recomputed from an
/// LU factorization every `refactor_interval` pivots.
///
/// No state is shared between solve() calls, and every choice is made by a
/// fixed rule, so repeated solves of one LP are bit-identical.
class RevisedSimplex final : public LpSolver {
 public:
  struct Options {
    Tolerances tol;
    std::size_t refactor_interval = 50;
    std::size_t max_iterations = 0;  ///< 0: 50 * (rows + columns) + 1000
    std::size_t bland_trigger = 50;  ///< consecutive degenerate pivots before Bland's rule
  };

  RevisedSimplex() = default;
  explicit RevisedSimplex(Options options) : options_(options) {}

  const Options& options() const { return options_; }
  std::string name() const override { return "embedded-revised-simplex"; }

  LpSolution solve(const LinearProgram& lp) const override {
    lp.validate();
    Engine engine(lp, options_);
    return engine.run();
  }

 private:
  enum class ColumnKind : std::uint8_t { structural, slack, artificial };
  enum class PhaseStatus { optimal, unbounded, iteration_limit, singular };

  class Engine {
   public:
    Engine(const LinearProgram& lp, const Options& options) : lp_(lp), opt_(options) { build_standard_form(); }

    LpSolution run() {
      LpSolution out;
      out.primal.assign(lp_.n_vars, 0.0);
      if (!initialize_basis()) {
        out.status = LpStatus::numerical_failure;
        return out;
      }

      const bool need_phase1 = std::any_of(basis_.begin(), basis_.end(),
                                           [&](std::size_t j) { return kind_[j] == ColumnKind::artificial; });
      if (need_phase1) {
        std::vector<double> phase1_cost(ncols_, 0.0);
        for (std::size_t j = 0; j < ncols_; ++j)
          if (kind_[j] == ColumnKind::artificial) phase1_cost[j] = 1.0;
        const PhaseStatus st = iterate(phase1_cost, /*allow_artificial=*/true);
        out.iterations = iterations_;
        if (st == PhaseStatus::iteration_limit || st == PhaseStatus::singular) {
          out.status = LpStatus::numerical_failure;
          return out;
        }
        if (!refactor()) {
          out.status = LpStatus::numerical_failure;
          return out;
        }
        double infeasibility = 0;
        for (std::size_t i = 0; i < m_; ++i)
          if (kind_[basis_[i]] == ColumnKind::artificial) infeasibility += std::max(0.0, x_basic_(i));
        if (infeasibility > phase1_threshold()) {
          out.status = LpStatus::infeasible;
          return out;
        }
        if (!drive_out_artificials()) {
          out.status = LpStatus::numerical_failure;
          return out;
        }
      }

      const PhaseStatus st = iterate(cost_, /*allow_artificial=*/false);
      out.iterations = iterations_;
      if (st == PhaseStatus::unbounded) {
        out.status = LpStatus::unbounded;
        return out;
      }
      if (st != PhaseStatus::optimal || !refactor() || !dual_cleanup(cost_)) {
        out.status = LpStatus::numerical_failure;
        return out;
      }

      for (std::size_t i = 0; i < m_; ++i) {
        const std::size_t j = basis_[i];
        if (kind_[j] != ColumnKind::structural) continue;
        double v = x_basic_(i);
        if (v < 0 && v > -opt_.tol.feasibility) v = 0;
        out.primal[j] = v;
      }
      out.max_residual = max_residual(lp_, out.primal);
      out.objective = objective_value(lp_, out.primal);
      out.status = out.max_residual <= opt_.tol.feasibility ? LpStatus::optimal : LpStatus::numerical_failure;
      return out;
    }

   private:
    struct StdRow {
      SparseRow entries;
      double rhs = 0;
      std::optional<double> slack_sign;  // +1 slack, -1 surplus
    };

    void build_standard_form() {
      std::vector<StdRow> rows;
      for (const auto& e : lp_.equalities) rows.push_back({e.row, e.rhs, std::nullopt});
      for (const auto& r : lp_.ranges) {
        const bool lo = std::isfinite(r.lower), hi = std::isfinite(r.upper);
        if (lo && hi && r.lower == r.upper) {
          rows.push_back({r.row, r.upper, std::nullopt});
          continue;
        }
        if (hi) rows.push_back({r.row, r.upper, 1.0});
        if (lo) rows.push_back({r.row, r.lower, -1.0});
      }
      m_ = rows.size();
      n_struct_ = lp_.n_vars;

      columns_.assign(n_struct_, {});
      kind_.assign(n_struct_, ColumnKind::structural);
      b_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
      initial_basis_.assign(m_, 0);
      std::vector<std::pair<std::size_t, double>> pending;  // (row, coefficient) of slack/artificial columns

      for (std::size_t i = 0; i < m_; ++i) {
        const StdRow& row = rows[i];
        double scale = 0;
        for (const auto& [j, a] : row.entries) scale = std::max(scale, std::abs(a));
        scale = scale > 0 ? 1.0 / scale : 1.0;
        double sign = row.rhs * scale < 0 ? -1.0 : 1.0;
        for (const auto& [j, a] : row.entries)
          if (a != 0) columns_[j].emplace_back(i, sign * scale * a);
        b_(static_cast<Eigen::Index>(i)) = sign * scale * row.rhs;

        if (row.slack_sign) {
          const double coeff = sign * *row.slack_sign;
          columns_.push_back({{i, coeff}});
          kind_.push_back(ColumnKind::slack);
          if (coeff > 0) {
            initial_basis_[i] = columns_.size() - 1;
            continue;
          }
        }
        columns_.push_back({{i, 1.0}});
        kind_.push_back(ColumnKind::artificial);
        initial_basis_[i] = columns_.size() - 1;
      }
      ncols_ = columns_.size();
      cost_.assign(ncols_, 0.0);
      const double flip = lp_.sense == Sense::maximize ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_struct_; ++j) cost_[j] = flip * lp_.objective[j];
      cost_scale_ = 1.0;
      for (double c : cost_) cost_scale_ = std::max(cost_scale_, std::abs(c));
      b_scale_ = std::max(1.0, b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0);
      max_iterations_ = opt_.max_iterations ? opt_.max_iterations : 50 * (m_ + ncols_) + 1000;
    }

    bool initialize_basis() {
      basis_ = initial_basis_;
      position_.assign(ncols_, -1);
      for (std::size_t i = 0; i < m_; ++i) position_[basis_[i]] = static_cast<std::int64_t>(i);
      return refactor();
    }

    double phase1_threshold() const { return 1e-8 * b_scale_; }

    /// Recomputes the basis inverse and basic values from scratch.
    bool refactor() {
      const auto m = static_cast<Eigen::Index>(m_);
      if (m == 0) {
        binv_.resize(0, 0);
        x_basic_.resize(0);
        since_refactor_ = 0;
        return true;
      }
      Eigen::MatrixXd basis_matrix = Eigen::MatrixXd::Zero(m, m);
      for (std::size_t i = 0; i < m_; ++i)
        for (const auto& [row, a] : columns_[basis_[i]])
          basis_matrix(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(i)) = a;
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis_matrix);
      if (!(lu.rcond() > 1e-14)) return false;
      binv_ = lu.inverse();
      x_basic_ = binv_ * b_;
      // One step of iterative refinement on the basic solution.
      Eigen::VectorXd resid = b_ - basis_matrix * x_basic_;
      x_basic_ += binv_ * resid;
      since_refactor_ = 0;
      return true;
    }

    Eigen::VectorXd column_image(std::size_t j) const {
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m_));
      for (const auto& [row, a] : columns_[j]) alpha += a * binv_.col(static_cast<Eigen::Index>(row));
      return alpha;
    }

    double reduced_cost(const std::vector<double>& cost, const Eigen::VectorXd& y, std::size_t j) const {
      double d = cost[j];
      for (const auto& [row, a] : columns_[j]) d -= y(static_cast<Eigen::Index>(row)) * a;
      return d;
    }

    void pivot(std::size_t entering, std::size_t leave_row, const Eigen::VectorXd& alpha, double theta) {
      const auto p = static_cast<Eigen::Index>(leave_row);
      x_basic_ -= theta * alpha;
      x_basic_(p) = theta;
      const double pivot_value = alpha(p);
      binv_.row(p) /= pivot_value;
      Eigen::VectorXd eta = alpha;
      eta(p) = 0;
      binv_.noalias() -= eta * binv_.row(p);

      position_[basis_[leave_row]] = -1;
      basis_[leave_row] = entering;
      position_[entering] = static_cast<std::int64_t>(leave_row);
      ++iterations_;
      ++since_refactor_;
    }

    PhaseStatus iterate(const std::vector<double>& cost, bool allow_artificial) {
      const double dual_tol = 1e-9 * cost_scale_;
      const double primal_tol = 1e-9;
      std::size_t degenerate_run = 0;
      bool bland = false;
      Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));

      while (true) {
        if (iterations_ >= max_iterations_) return PhaseStatus::iteration_limit;
        if (since_refactor_ >= opt_.refactor_interval && !refactor()) return PhaseStatus::singular;

        for (std::size_t i = 0; i < m_; ++i) cb(static_cast<Eigen::Index>(i)) = cost[basis_[i]];
        const Eigen::VectorXd y = binv_.transpose() * cb;

        std::optional<std::size_t> entering;
        double best = -dual_tol;
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (position_[j] >= 0) continue;
          if (kind_[j] == ColumnKind::artificial && !allow_artificial) continue;
          const double d = reduced_cost(cost, y, j);
          if (bland) {
            if (d < -dual_tol) {
              entering = j;
              best = d;
              break;
            }
          } else if (d < best) {
            best = d;
            entering = j;
          }
        }
        if (!entering) return PhaseStatus::optimal;

        const Eigen::VectorXd alpha = column_image(*entering);
        const double alpha_max = m_ ? alpha.cwiseAbs().maxCoeff() : 0.0;
        const double pivot_tol = std::max(opt_.tol.pivot, 1e-9 * alpha_max);

        std::optional<std::size_t> leave;
        if (!bland) {
          double theta_max = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < m_; ++i) {
            const double a = alpha(static_cast<Eigen::Index>(i));
            if (a > pivot_tol)
              theta_max = std::min(theta_max, (std::max(0.0, x_basic_(static_cast<Eigen::Index>(i))) + primal_tol) / a);
          }
          double best_alpha = 0;
          for (std::size_t i = 0; i < m_; ++i) {
            const double a = alpha(static_cast<Eigen::Index>(i));
            if (a <= pivot_tol) continue;
            const double ratio = std::max(0.0, x_basic_(static_cast<Eigen::Index>(i))) / a;
            if (ratio <= theta_max && a > best_alpha) {
              best_alpha = a;
              leave = i;
            }
          }
        } else {
          double theta_min = std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < m_; ++i) {
            const double a = alpha(static_cast<Eigen::Index>(i));
            if (a > pivot_tol)
              theta_min = std::min(theta_min, std::max(0.0, x_basic_(static_cast<Eigen::Index>(i))) / a);
          }
          const double tie = 1e-12 * (1.0 + theta_min);
          for (std::size_t i = 0; i < m_; ++i) {
            const double a = alpha(static_cast<Eigen::Index>(i));
            if (a <= pivot_tol) continue;
            const double ratio = std::max(0.0, x_basic_(static_cast<Eigen::Index>(i))) / a;
            if (ratio <= theta_min + tie && (!leave || basis_[i] < basis_[*leave])) leave = i;
          }
        }
        if (!leave) return PhaseStatus::unbounded;

        const auto p = static_cast<Eigen::Index>(*leave);
        const double theta = std::max(0.0, x_basic_(p)) / alpha(p);
        pivot(*entering, *leave, alpha, theta);

        if (theta * -best <= 1e-14 * cost_scale_) {
          if (++degenerate_run >= opt_.bland_trigger) bland = true;
        } else {
          degenerate_run = 0;
          bland = false;
        }
      }
    }

    /// The Harris ratio test lets basic values drift below zero by up to the
    /// primal tolerance. At the phase 2 optimum the basis is dual feasible,
    /// so dual simplex pivots remove that drift without losing optimality.
    bool dual_cleanup(const std::vector<double>& cost) {
      constexpr double kDrift = 1e-12;
      const std::size_t limit = 10 * (m_ + 10);
      Eigen::VectorXd cb(static_cast<Eigen::Index>(m_));
      for (std::size_t step = 0; step < limit; ++step) {
        if (since_refactor_ >= opt_.refactor_interval && !refactor()) return false;
        std::optional<std::size_t> leave;
        double worst = -kDrift;
        for (std::size_t i = 0; i < m_; ++i) {
          if (kind_[basis_[i]] == ColumnKind::artificial) continue;
          if (x_basic_(static_cast<Eigen::Index>(i)) < worst) {
            worst = x_basic_(static_cast<Eigen::Index>(i));
            leave = i;
          }
        }
        if (!leave) return true;

        for (std::size_t i = 0; i < m_; ++i) cb(static_cast<Eigen::Index>(i)) = cost[basis_[i]];
        const Eigen::VectorXd y = binv_.transpose() * cb;
        const auto row = binv_.row(static_cast<Eigen::Index>(*leave));
        std::optional<std::size_t> entering;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (position_[j] >= 0 || kind_[j] == ColumnKind::artificial) continue;
          double a = 0;
          for (const auto& [r, v] : columns_[j]) a += row(static_cast<Eigen::Index>(r)) * v;
          if (a >= -opt_.tol.pivot) continue;
          const double ratio = std::max(0.0, reduced_cost(cost, y, j)) / -a;
          if (ratio < best_ratio) {
            best_ratio = ratio;
            entering = j;
          }
        }
        // No dual ratio: the drift cannot be removed; leave it to the
        // residual gate.
        if (!entering) return true;
        const Eigen::VectorXd alpha = column_image(*entering);
        const auto p = static_cast<Eigen::Index>(*leave);
        pivot(*entering, *leave, alpha, x_basic_(p) / alpha(p));
      }
      return refactor();
    }

    /// After phase 1, pivots zero-valued artificials out of the basis where a
    /// non-artificial column can replace them. Rows where none can are
    /// redundant; their artificial stays basic at zero.
    bool drive_out_artificials() {
      for (std::size_t i = 0; i < m_; ++i) {
        if (kind_[basis_[i]] != ColumnKind::artificial) continue;
        const auto row = binv_.row(static_cast<Eigen::Index>(i));
        std::optional<std::size_t> best;
        double best_value = 1e-9;
        for (std::size_t j = 0; j < ncols_; ++j) {
          if (position_[j] >= 0 || kind_[j] == ColumnKind::artificial) continue;
          double v = 0;
          for (const auto& [r, a] : columns_[j]) v += row(static_cast<Eigen::Index>(r)) * a;
          if (std::abs(v) > best_value) {
            best_value = std::abs(v);
            best = j;
          }
        }
        if (!best) continue;
        const Eigen::VectorXd alpha = column_image(*best);
        const double theta = x_basic_(static_cast<Eigen::Index>(i)) / alpha(static_cast<Eigen::Index>(i));
        pivot(*best, i, alpha, theta);
      }
      return refactor();
    }

    const LinearProgram& lp_;
    const Options& opt_;

    std::size_t m_ = 0, n_struct_ = 0, ncols_ = 0;
    std::vector<SparseRow> columns_;  // column j as (row, coefficient)
    std::vector<ColumnKind> kind_;
    std::vector<double> cost_;
    double cost_scale_ = 1, b_scale_ = 1;
    Eigen::VectorXd b_;
    std::vector<std::size_t> initial_basis_;

    std::vector<std::size_t> basis_;
    std::vector<std::int64_t> position_;
    Eigen::MatrixXd binv_;
    Eigen::VectorXd x_basic_;
    std::size_t iterations_ = 0, since_refactor_ = 0, max_iterations_ = 0;
  };

  Options options_;
};

/// Solves with the embedded simplex at default options.
inline LpSolution solve(const LinearProgram& lp) { return RevisedSimplex{}.solve(lp); }

}  // namespace cilp
