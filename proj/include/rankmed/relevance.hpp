#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "rankmed/error.hpp"

namespace rankmed {

/// Extended weights W_hat (d x c): the first d-1 rows weight the features,
/// the last row is the bias.
class WeightMatrix {
 public:
  explicit WeightMatrix(Eigen::MatrixXd w_hat) : w_hat_(std::move(w_hat)) {
    if (w_hat_.rows() < 2 || w_hat_.cols() < 1) throw DomainError("weight matrix needs at least 2 rows and 1 column");
    if (!w_hat_.allFinite()) throw DomainError("weight matrix contains non-finite values");
  }

  const Eigen::MatrixXd& extended() const noexcept { return w_hat_; }
  auto weights() const { return w_hat_.topRows(w_hat_.rows() - 1); }
  auto bias_row() const { return w_hat_.row(w_hat_.rows() - 1); }
  std::size_t features() const noexcept { return static_cast<std::size_t>(w_hat_.rows() - 1); }
  std::size_t classes() const noexcept { return static_cast<std::size_t>(w_hat_.cols()); }

 private:
  Eigen::MatrixXd w_hat_;
};

struct SolverConfig {
  double gamma = 1.0;
  int max_iters = 200;
  double rel_tol = 1e-7;
  double eps = 1e-10;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("gamma must be finite and > 0");
    if (max_iters < 1) throw DomainError("max_iters must be >= 1");
    if (!(rel_tol > 0.0)) throw DomainError("rel_tol must be > 0");
    if (!(eps > 0.0)) throw DomainError("eps must be > 0");
  }
};

struct SolveReport {
  std::vector<double> objective_trace;  // [0] is the initial point
  int iterations = 0;
  bool converged = false;
};

struct SolveResult {
  WeightMatrix weights;
  SolveReport report;
};

namespace detail {

inline void check_design(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y) {
  if (x.cols() != y.cols())
    throw DomainError("X has " + std::to_string(x.cols()) + " columns, Y has " + std::to_string(y.cols()));
  if (x.rows() < 1 || x.cols() < 1 || y.rows() < 1) throw DomainError("empty design");
  if (!x.allFinite() || !y.allFinite()) throw DomainError("design contains non-finite values");
}

}  // namespace detail

/// sum_i |W_hat^T x_i - y_i|_2 + gamma * sum_j |w_hat_j|_2
inline double objective(const Eigen::Ref<const Eigen::MatrixXd>& w_hat, const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& y, double gamma) {
  if (w_hat.rows() != x.rows() || w_hat.cols() != y.rows() || x.cols() != y.cols())
    throw DomainError("dimension mismatch in objective");
  return (w_hat.transpose() * x - y).colwise().norm().sum() + gamma * w_hat.rowwise().norm().sum();
}

inline double objective(const WeightMatrix& w, const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::MatrixXd>& y, double gamma) {
  return objective(w.extended(), x, y, gamma);
}

/// Minimizes the joint l2,1 objective by iteratively reweighted least squares.
///
/// Each step solves
///   (X D_rho^-1 X^T + gamma D_nu^-1) W = X D_rho^-1 Y^T,
/// D_rho = diag(2 max(|W^T x_i - y_i|, eps)), D_nu = diag(2 max(|w_j|, eps)),
/// which never increases the objective. The start point is ridge regression
/// with instance i weighted by 1/|y_i| (plain ridge for one-hot targets), so
/// rescaling every instance and gamma by a common factor leaves the iterates
/// unchanged.
inline SolveResult solve_l21(const Eigen::Ref<const Eigen::MatrixXd>& x, const Eigen::Ref<const Eigen::MatrixXd>& y,
                             const SolverConfig& config = {}) {
  config.validate();
  detail::check_design(x, y);
  if (x.rows() < 2) throw DomainError("design needs at least one feature row plus the bias row");

  // Each step is a weighted ridge problem. Solving it as a stacked least
  // squares system by QR, instead of forming the normal equations, avoids
  // squaring the condition number once residuals and rows hit the eps floor.
  const Eigen::Index d = x.rows();
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd a(n + d, d);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n + d, y.rows());
  const auto weighted_ridge = [&](const Eigen::VectorXd& instance_weight, const Eigen::VectorXd& row_weight) {
    const Eigen::VectorXd root = instance_weight.cwiseSqrt();
    a.topRows(n) = root.asDiagonal() * x.transpose();
    a.bottomRows(d) = row_weight.cwiseSqrt().asDiagonal();
    b.topRows(n) = root.asDiagonal() * y.transpose();
    return Eigen::MatrixXd(Eigen::ColPivHouseholderQR<Eigen::MatrixXd>(a).solve(b));
  };

  Eigen::VectorXd target_weight = y.colwise().norm().transpose();
  for (Eigen::Index i = 0; i < target_weight.size(); ++i)
    target_weight(i) = target_weight(i) > 0.0 ? 1.0 / target_weight(i) : 1.0;
  Eigen::MatrixXd w = weighted_ridge(target_weight, Eigen::VectorXd::Constant(d, config.gamma));

  double f = objective(w, x, y, config.gamma);
  SolveReport report;
  report.objective_trace.push_back(f);
  Eigen::MatrixXd best = w;
  double best_f = f;

  for (int it = 1; it <= config.max_iters; ++it) {
    const Eigen::VectorXd rho =
        (w.transpose() * x - y).colwise().norm().transpose().cwiseMax(config.eps);
    const Eigen::VectorXd nu = w.rowwise().norm().cwiseMax(config.eps);

    w = weighted_ridge(0.5 * rho.cwiseInverse(), config.gamma * 0.5 * nu.cwiseInverse());

    const double f_next = objective(w, x, y, config.gamma);
    report.objective_trace.push_back(f_next);
    report.iterations = it;
    if (f_next < best_f) {
      best_f = f_next;
      best = w;
    }
    if (std::abs(f - f_next) <= config.rel_tol * std::max(f, std::numeric_limits<double>::min())) {
      report.converged = true;
      break;
    }
    f = f_next;
  }
  return SolveResult{WeightMatrix(std::move(best)), std::move(report)};
}

struct RelevanceScores {
  Eigen::MatrixXd per_class;  // m x c, |W_jl|
  Eigen::VectorXd total;      // m, |w_j|_2
};

/// Per-class magnitudes and total row norms of W; the bias row is excluded.
inline RelevanceScores relevance_scores(const WeightMatrix& w) {
  return RelevanceScores{w.weights().cwiseAbs(), w.weights().rowwise().norm()};
}

struct RankedFeature {
  std::size_t index;
  double score;
};

/// Descending by score; equal scores keep ascending index order.
inline std::vector<RankedFeature> rank_features(const Eigen::Ref<const Eigen::VectorXd>& total) {
  if (!total.allFinite()) throw DomainError("relevance scores must be finite");
  std::vector<RankedFeature> out;
  out.reserve(static_cast<std::size_t>(total.size()));
  for (Eigen::Index j = 0; j < total.size(); ++j) out.push_back({static_cast<std::size_t>(j), total(j)});
  std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) { return a.score > b.score; });
  return out;
}

}  // namespace rankmed
