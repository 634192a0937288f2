#pragma once

// Independent reference solver for the joint l2,1 problem
//   min_W sum_i |W^T x_i - y_i|_2 + gamma sum_j |w_j|_2
// by restarted subgradient descent: epochs of normalized subgradient steps
// with a constant step that shrinks geometrically, each epoch restarting
// from the best point so far. Test oracle only; shares no code with the
// library solver.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>

namespace rankmed::testing {

/// Elementwise evaluation of the objective with explicit loops.
inline double l21_objective_loops(const Eigen::MatrixXd& w, const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                                  double gamma) {
  const Eigen::Index d = x.rows(), n = x.cols(), c = y.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double ss = 0.0;
    for (Eigen::Index l = 0; l < c; ++l) {
      double pred = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) pred += w(j, l) * x(j, i);
      const double r = pred - y(l, i);
      ss += r * r;
    }
    total += std::sqrt(ss);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    double ss = 0.0;
    for (Eigen::Index l = 0; l < c; ++l) ss += w(j, l) * w(j, l);
    total += gamma * std::sqrt(ss);
  }
  return total;
}

struct OracleResult {
  Eigen::MatrixXd w;
  double value;
};

inline OracleResult subgradient_oracle(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double gamma,
                                       int epochs = 40, int steps_per_epoch = 5000, double initial_step = 0.5,
                                       double shrink = 0.7) {
  const Eigen::Index d = x.rows(), n = x.cols(), c = y.rows();
  Eigen::MatrixXd best = Eigen::MatrixXd::Zero(d, c);
  double best_value = l21_objective_loops(best, x, y, gamma);
  Eigen::MatrixXd w(d, c), grad(d, c), resid(c, n);
  double step = initial_step;
  for (int e = 0; e < epochs; ++e) {
    w = best;
    for (int t = 0; t < steps_per_epoch; ++t) {
      resid.noalias() = w.transpose() * x;
      resid -= y;
      grad.setZero();
      double data = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = resid.col(i).norm();
        data += norm;
        if (norm > 0.0) grad.noalias() += x.col(i) * (resid.col(i).transpose() / norm);
      }
      double reg = 0.0;
      for (Eigen::Index j = 0; j < d; ++j) {
        const double norm = w.row(j).norm();
        reg += norm;
        if (norm > 0.0) grad.row(j) += gamma * w.row(j) / norm;
      }
      const double value = data + gamma * reg;
      if (value < best_value) {
        best_value = value;
        best = w;
      }
      const double gnorm = grad.norm();
      if (gnorm == 0.0) break;
      w -= (step / gnorm) * grad;
    }
    const double last = l21_objective_loops(w, x, y, gamma);
    if (last < best_value) {
      best_value = last;
      best = w;
    }
    step *= shrink;
  }
  return {best, l21_objective_loops(best, x, y, gamma)};
}

}  // namespace rankmed::testing
