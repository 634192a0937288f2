#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <utility>

#include "rankmed/dataset.hpp"
#include "rankmed/error.hpp"
#include "rankmed/feature_matrix.hpp"

namespace rankmed {

/// Standardization moments and per-instance occurrence weights.
///
/// Class-balanced moments average the per-class moments with equal weight
/// per class, so a class contributes the same amount however many instances
/// it has:
///
///   mu_j    = (1/c) sum_l mean_{i in l} f_ji
///   sigma_j = sqrt( (1/c) sum_l mean_{i in l} (f_ji - mu_j)^2 )
///   scale_i = n / (c * n_l(i))
struct CompensationStats {
  Eigen::VectorXd mu;
  Eigen::VectorXd sigma;
  Eigen::VectorXd scale;
};

namespace detail {

inline void require_positive_sigma(const FeatureMatrix& f, const Eigen::VectorXd& sigma) {
  for (std::size_t j = 0; j < f.features(); ++j) {
    const auto row = f.row(j);
    if (!(sigma(static_cast<Eigen::Index>(j)) > 0.0) || row.minCoeff() == row.maxCoeff())
      throw ZeroDeviationError(f.name(j));
  }
}

/// Weighted mean and deviation of every row: mu = sum_i omega_i f_i,
/// sigma^2 = sum_i omega_i (f_i - mu)^2, with weights summing to one.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> weighted_moments(const FeatureMatrix& f,
                                                                    const Eigen::VectorXd& omega) {
  const auto& x = f.values();
  Eigen::VectorXd mu = x * omega;
  Eigen::VectorXd var = (x.colwise() - mu).array().square().matrix() * omega;
  return {std::move(mu), var.cwiseSqrt()};
}

}  // namespace detail

/// Instance i carries weight 1/(c n_l(i)), so every class sums to 1/c.
/// With equal class sizes c n_l = n and the result is bit-identical to
/// plain_stats.
inline CompensationStats class_balanced_stats(const FeatureMatrix& f, const LabelVector& labels) {
  if (labels.size() != f.instances())
    throw DomainError("label count " + std::to_string(labels.size()) + " does not match instance count " +
                      std::to_string(f.instances()));
  const auto n = static_cast<Eigen::Index>(f.instances());
  const double c = static_cast<double>(labels.classes());
  const auto& counts = labels.class_counts();

  Eigen::VectorXd omega(n);
  Eigen::VectorXd scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double class_mass = c * static_cast<double>(counts[labels.code(static_cast<std::size_t>(i))]);
    omega(i) = 1.0 / class_mass;
    scale(i) = static_cast<double>(n) / class_mass;
  }
  auto [mu, sigma] = detail::weighted_moments(f, omega);
  CompensationStats out{std::move(mu), std::move(sigma), std::move(scale)};
  detail::require_positive_sigma(f, out.sigma);
  return out;
}

/// Ordinary mean and population standard deviation; unit instance weights.
inline CompensationStats plain_stats(const FeatureMatrix& f) {
  const auto n = static_cast<Eigen::Index>(f.instances());
  auto [mu, sigma] = detail::weighted_moments(f, Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n)));
  CompensationStats out{std::move(mu), std::move(sigma), Eigen::VectorXd::Ones(n)};
  detail::require_positive_sigma(f, out.sigma);
  return out;
}

/// f_ji <- (f_ji - mu_j) / sigma_j
inline FeatureMatrix apply_zscore(const FeatureMatrix& f, const CompensationStats& stats) {
  if (stats.mu.size() != static_cast<Eigen::Index>(f.features()) || stats.sigma.size() != stats.mu.size())
    throw DomainError("standardization statistics do not match the feature count");
  Eigen::MatrixXd z = (f.values().colwise() - stats.mu).array().colwise() / stats.sigma.array();
  return FeatureMatrix(std::move(z), f.names());
}

/// Regression inputs: X (d x n, all-one row appended below F) and Y (c x n).
struct Design {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
};

inline Design build_design(const FeatureMatrix& f, const LabelVector& labels) {
  if (labels.size() != f.instances()) throw DomainError("label count does not match instance count");
  const auto m = static_cast<Eigen::Index>(f.features());
  Eigen::MatrixXd x(m + 1, f.values().cols());
  x.topRows(m) = f.values();
  x.row(m).setOnes();
  return Design{std::move(x), one_hot(labels)};
}

/// Scales column i of both X and Y by scale_i; the bias row is scaled too.
/// Solving the plain l2,1 problem on the result solves the
/// occurrence-weighted problem on the unscaled design.
inline Design build_compensated_design(const FeatureMatrix& normalized, const LabelVector& labels,
                                       const CompensationStats& stats) {
  Design d = build_design(normalized, labels);
  if (stats.scale.size() != d.x.cols()) throw DomainError("scale factors do not match the instance count");
  d.x = d.x * stats.scale.asDiagonal();
  d.y = d.y * stats.scale.asDiagonal();
  return d;
}

/// (n/c) sum_l (1/n_l) sum_{i in l} |W^T x_i - y_i| + gamma sum_j |w_j|,
/// evaluated on the unscaled design.
inline double compensated_objective(const Eigen::Ref<const Eigen::MatrixXd>& w_hat,
                                    const Eigen::Ref<const Eigen::MatrixXd>& x,
                                    const Eigen::Ref<const Eigen::MatrixXd>& y, const LabelVector& labels,
                                    double gamma) {
  if (w_hat.rows() != x.rows() || w_hat.cols() != y.rows() || x.cols() != y.cols() ||
      static_cast<std::size_t>(x.cols()) != labels.size())
    throw DomainError("dimension mismatch in compensated objective");
  const double n = static_cast<double>(labels.size());
  const double c = static_cast<double>(labels.classes());
  Eigen::VectorXd per_class = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(labels.classes()));
  for (Eigen::Index i = 0; i < x.cols(); ++i)
    per_class(static_cast<Eigen::Index>(labels.code(static_cast<std::size_t>(i)))) +=
        (w_hat.transpose() * x.col(i) - y.col(i)).norm();
  double data = 0.0;
  for (Eigen::Index l = 0; l < per_class.size(); ++l)
    data += per_class(l) / static_cast<double>(labels.class_counts()[static_cast<std::size_t>(l)]);
  return n / c * data + gamma * w_hat.rowwise().norm().sum();
}

}  // namespace rankmed
