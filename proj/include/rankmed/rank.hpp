#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "rankmed/error.hpp"
#include "rankmed/feature_matrix.hpp"

namespace rankmed {

/// max(rows, cols) * machine epsilon: relative to the largest singular value.
inline double default_rank_tolerance(std::size_t rows, std::size_t cols) {
  return static_cast<double>(std::max(rows, cols)) * std::numeric_limits<double>::epsilon();
}

/// Floor for the incremental residual test. A residual of an exactly dependent
/// row carries rounding error that grows with the conditioning of the basis,
/// so the tracker cannot use the bare SVD default on small matrices.
inline constexpr double kResidualToleranceFloor = 1e-10;

inline double default_residual_tolerance(std::size_t rows, std::size_t cols) {
  return std::max(kResidualToleranceFloor, default_rank_tolerance(rows, cols));
}

namespace detail {

inline Eigen::VectorXd singular_values(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() == 0 || m.cols() == 0) throw DomainError("rank of an empty matrix is undefined");
  if (!m.allFinite()) throw DomainError("matrix contains non-finite values");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues();
}

}  // namespace detail

/// Number of singular values strictly greater than tol * sigma_max.
/// tol <= 0 selects default_rank_tolerance.
inline std::size_t numerical_rank(const Eigen::Ref<const Eigen::MatrixXd>& m, double tol = 0.0) {
  const Eigen::VectorXd sv = detail::singular_values(m);
  if (tol <= 0.0)
    tol = default_rank_tolerance(static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()));
  const double sigma_max = sv.size() > 0 ? sv(0) : 0.0;
  if (sigma_max <= 0.0) return 0;
  const double cutoff = tol * sigma_max;
  return static_cast<std::size_t>((sv.array() > cutoff).count());
}

enum class Verdict { independent, dependent };

/// Orthonormal basis of the rows accepted so far. Each candidate row is
/// projected out with modified Gram-Schmidt plus one reorthogonalization
/// pass; it is independent when the residual exceeds tol * |row|.
class RankTracker {
 public:
  RankTracker(std::size_t dimension, double tol) : dimension_(dimension), tol_(tol) {
    if (dimension < 1) throw DomainError("rank tracker dimension must be at least 1");
    if (!(tol >= 0.0) || !std::isfinite(tol)) throw DomainError("rank tracker tolerance must be finite and >= 0");
  }

  /// Tests `row` against the current span without changing the tracker.
  Verdict classify(const Eigen::Ref<const Eigen::VectorXd>& row) const {
    return project(row).verdict;
  }

  /// Appends the normalized residual of `row` when it is independent.
  /// On `dependent` the tracker is left untouched.
  Verdict try_extend(const Eigen::Ref<const Eigen::VectorXd>& row) {
    Projection p = project(row);
    if (p.verdict == Verdict::independent) basis_.push_back(p.residual / p.residual_norm);
    return p.verdict;
  }

  std::size_t rank() const noexcept { return basis_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  double tolerance() const noexcept { return tol_; }
  const std::vector<Eigen::VectorXd>& basis() const noexcept { return basis_; }

 private:
  std::size_t dimension_;
  double tol_;
  std::vector<Eigen::VectorXd> basis_;

  struct Projection {
    Verdict verdict = Verdict::dependent;
    Eigen::VectorXd residual;
    double residual_norm = 0.0;
  };

  Projection project(const Eigen::Ref<const Eigen::VectorXd>& row) const {
    if (static_cast<std::size_t>(row.size()) != dimension_)
      throw DomainError("row has length " + std::to_string(row.size()) + ", tracker dimension is " +
                        std::to_string(dimension_));
    if (!row.allFinite()) throw DomainError("row contains non-finite values");

    Projection p;
    const double row_norm = row.norm();
    if (row_norm == 0.0 || basis_.size() == dimension_) return p;

    p.residual = row;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis_) p.residual -= q.dot(p.residual) * q;
    p.residual_norm = p.residual.norm();
    if (p.residual_norm > tol_ * row_norm) p.verdict = Verdict::independent;
    return p;
  }
};

struct EigenSpectrum {
  std::vector<double> eigenvalues;  // descending
  std::size_t effective_rank = 0;
  double threshold = 0.0;           // relative to the largest eigenvalue
};

/// Eigenvalues of F F^T / n, obtained as squared singular values of F / sqrt(n).
/// threshold <= 0 selects default_rank_tolerance squared, so that
/// effective_rank agrees with numerical_rank at its default.
inline EigenSpectrum eigen_spectrum(const FeatureMatrix& f, double threshold = 0.0) {
  if (threshold >= 1.0) throw DomainError("eigenvalue threshold must lie in [0, 1)");
  const auto& values = f.values();
  const Eigen::VectorXd sv =
      detail::singular_values(values / std::sqrt(static_cast<double>(f.instances())));

  EigenSpectrum out;
  out.threshold = threshold > 0.0 ? threshold : std::pow(default_rank_tolerance(f.features(), f.instances()), 2);
  out.eigenvalues.reserve(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index i = 0; i < sv.size(); ++i) out.eigenvalues.push_back(std::max(0.0, sv(i) * sv(i)));
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());

  const double lambda_max = out.eigenvalues.empty() ? 0.0 : out.eigenvalues.front();
  if (lambda_max > 0.0) {
    const double cutoff = out.threshold * lambda_max;
    out.effective_rank = static_cast<std::size_t>(
        std::count_if(out.eigenvalues.begin(), out.eigenvalues.end(), [&](double v) { return v > cutoff; }));
  }
  return out;
}

}  // namespace rankmed
