#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "rankmed/compensation.hpp"
#include "rankmed/dataset.hpp"
#include "rankmed/redundancy.hpp"
#include "rankmed/relevance.hpp"

namespace rankmed {

/// Clusters on the raw rows (dependency is scale-invariant per row), then
/// picks medoids by Euclidean distance between z-scored rows.
inline ClusterPartition find_medoids(const FeatureMatrix& raw, double tol = 0.0) {
  auto partition = cluster_features(raw, tol);
  const auto z = apply_zscore(raw, plain_stats(raw));
  return select_medoids(std::move(partition), z);
}

struct RelevanceRun {
  std::vector<std::size_t> features;  // rows of the full matrix that were scored
  bool compensated = true;
  CompensationStats stats;
  WeightMatrix weights;
  SolveReport report;
  RelevanceScores scores;
};

/// Standardizes the selected rows (class-balanced when compensating), builds
/// the design (occurrence-scaled when compensating) and solves the l2,1 problem.
inline RelevanceRun run_relevance(const FeatureMatrix& raw, const LabelVector& labels,
                                  std::span<const std::size_t> subset, bool compensate,
                                  const SolverConfig& config = {}) {
  if (labels.classes() < 2) throw DomainError("relevance analysis needs at least two classes");
  const auto f = raw.select(subset);
  auto stats = compensate ? class_balanced_stats(f, labels) : plain_stats(f);
  const auto z = apply_zscore(f, stats);
  const auto design = compensate ? build_compensated_design(z, labels, stats) : build_design(z, labels);
  auto solved = solve_l21(design.x, design.y, config);
  auto scores = relevance_scores(solved.weights);
  return RelevanceRun{{subset.begin(), subset.end()}, compensate, std::move(stats), std::move(solved.weights),
                      std::move(solved.report), std::move(scores)};
}

/// Removes the `drop` entries of `features` with the lowest scores
/// (ties: the higher index goes first) and returns the rest ascending.
inline std::vector<std::size_t> drop_lowest(std::span<const std::size_t> features,
                                            const Eigen::Ref<const Eigen::VectorXd>& scores, std::size_t drop) {
  if (static_cast<Eigen::Index>(features.size()) != scores.size())
    throw DomainError("score count does not match feature count");
  if (drop >= features.size())
    throw DomainError("cannot drop " + std::to_string(drop) + " of " + std::to_string(features.size()) + " features");
  const auto ranking = rank_features(scores);
  std::vector<std::size_t> kept;
  for (std::size_t r = 0; r < ranking.size() - drop; ++r) kept.push_back(features[ranking[r].index]);
  std::sort(kept.begin(), kept.end());
  return kept;
}

}  // namespace rankmed
