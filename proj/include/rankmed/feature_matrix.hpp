#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "rankmed/error.hpp"

namespace rankmed {

/// Feature-major data matrix: row j holds feature j across all instances,
/// column i holds instance i. Feature indices are 0-based in the API and
/// 1-based in every report.
class FeatureMatrix {
 public:
  FeatureMatrix(Eigen::MatrixXd values, std::vector<std::string> names)
      : values_(std::move(values)), names_(std::move(names)) {
    validate();
  }

  /// Names default to f1..fm.
  explicit FeatureMatrix(Eigen::MatrixXd values)
      : FeatureMatrix(values, default_names(static_cast<std::size_t>(values.rows()))) {}

  std::size_t features() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t instances() const noexcept { return static_cast<std::size_t>(values_.cols()); }

  const Eigen::MatrixXd& values() const noexcept { return values_; }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const std::string& name(std::size_t j) const { return names_.at(j); }

  auto row(std::size_t j) const { return values_.row(static_cast<Eigen::Index>(j)); }

  /// Rows listed in `subset`, in that order.
  FeatureMatrix select(std::span<const std::size_t> subset) const {
    if (subset.empty()) throw DomainError("feature subset is empty");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(subset.size()), values_.cols());
    std::vector<std::string> out_names;
    out_names.reserve(subset.size());
    for (std::size_t r = 0; r < subset.size(); ++r) {
      if (subset[r] >= features()) throw DomainError("feature index out of range");
      out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(subset[r]));
      out_names.push_back(names_[subset[r]]);
    }
    return FeatureMatrix(std::move(out), std::move(out_names));
  }

  static std::vector<std::string> default_names(std::size_t m) {
    std::vector<std::string> names;
    names.reserve(m);
    for (std::size_t j = 0; j < m; ++j) names.push_back("f" + std::to_string(j + 1));
    return names;
  }

 private:
  void validate() const {
    if (values_.rows() < 1 || values_.cols() < 1)
      throw DomainError("feature matrix must have at least one feature and one instance");
    if (!values_.allFinite()) throw DomainError("feature matrix contains non-finite values");
    if (names_.size() != features())
      throw DomainError("expected " + std::to_string(features()) + " feature names, got " +
                        std::to_string(names_.size()));
    std::unordered_set<std::string> seen;
    for (const auto& n : names_)
      if (!seen.insert(n).second) throw DomainError("duplicate feature name '" + n + "'");
  }

  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
};

}  // namespace rankmed
