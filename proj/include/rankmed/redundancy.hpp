#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "rankmed/error.hpp"
#include "rankmed/feature_matrix.hpp"
#include "rankmed/rank.hpp"

namespace rankmed {

struct ClusterPartition {
  std::vector<std::vector<std::size_t>> clusters;  // members ascending; clusters in discovery order
  std::vector<std::size_t> seeds;                  // first member assigned to each cluster
  std::vector<std::size_t> medoids;                // empty until select_medoids
  std::size_t rank_checks = 0;
  double tolerance = 0.0;

  std::size_t k() const noexcept { return clusters.size(); }
  bool has_medoids() const noexcept { return !clusters.empty() && medoids.size() == clusters.size(); }
};

/// Upper bound on dependency tests in the clustering phase: m(m-1)/2.
inline constexpr std::size_t rank_check_bound(std::size_t m) noexcept { return m * (m - 1) / 2; }

/// Partitions features into linear-dependency clusters.
///
/// A single RankTracker accumulates the seeds of all clusters and is never
/// reset. Each pass seeds a new cluster with the lowest-index unassigned
/// non-zero feature, then tests every other unassigned feature (ascending
/// index) against the span of all seeds so far. Dependent features join the
/// new cluster; independent ones wait for a later pass. Zero rows are
/// dependent on any span and so join the first cluster. k equals the
/// tracker's final rank.
///
/// tol <= 0 selects default_residual_tolerance.
inline ClusterPartition cluster_features(const FeatureMatrix& f, double tol = 0.0) {
  const std::size_t m = f.features();
  if (tol <= 0.0) tol = default_residual_tolerance(m, f.instances());
  if (f.values().isZero(0.0)) throw DomainError("feature matrix is all zeros; it spans no direction");

  RankTracker tracker(f.instances(), tol);
  std::vector<std::size_t> unassigned(m);
  for (std::size_t j = 0; j < m; ++j) unassigned[j] = j;

  ClusterPartition out;
  out.tolerance = tol;
  while (!unassigned.empty()) {
    // Zero rows are absorbed in the first pass, so a non-zero seed always exists.
    const auto seed_it = std::find_if(unassigned.begin(), unassigned.end(),
                                      [&](std::size_t j) { return !f.row(j).isZero(0.0); });
    if (seed_it == unassigned.end()) throw std::logic_error("cluster_features: no seed available");
    const std::size_t seed = *seed_it;
    unassigned.erase(seed_it);

    // Every unassigned row was found independent of the current span in the
    // previous pass, so the seed always extends it.
    if (tracker.try_extend(f.row(seed).transpose()) != Verdict::independent)
      throw std::logic_error("cluster_features: seed " + std::to_string(seed + 1) +
                             " is dependent on earlier seeds");

    std::vector<std::size_t> members{seed};
    std::vector<std::size_t> remaining;
    for (std::size_t j : unassigned) {
      ++out.rank_checks;
      if (tracker.classify(f.row(j).transpose()) == Verdict::dependent)
        members.push_back(j);
      else
        remaining.push_back(j);
    }
    std::sort(members.begin(), members.end());
    out.clusters.push_back(std::move(members));
    out.seeds.push_back(seed);
    unassigned = std::move(remaining);
  }

  if (out.rank_checks > rank_check_bound(m))
    throw std::logic_error("cluster_features: " + std::to_string(out.rank_checks) +
                           " dependency tests exceed the bound m(m-1)/2 = " + std::to_string(rank_check_bound(m)));
  return out;
}

/// Euclidean distance between feature rows i and j.
inline double pairwise_distance(const FeatureMatrix& f, std::size_t i, std::size_t j) {
  if (i >= f.features() || j >= f.features()) throw DomainError("feature index out of range");
  return (f.row(i) - f.row(j)).norm();
}

/// Picks one medoid per cluster: the member with the smallest sum of
/// distances to the other members (ties to the lowest index). Two-member
/// clusters take the lower index; singletons take their sole member.
inline ClusterPartition select_medoids(ClusterPartition partition, const FeatureMatrix& f) {
  if (partition.clusters.empty()) throw DomainError("partition has no clusters");
  partition.medoids.clear();
  for (const auto& members : partition.clusters) {
    if (members.empty()) throw DomainError("partition contains an empty cluster");
    for (auto j : members)
      if (j >= f.features()) throw DomainError("cluster member out of range");
    if (members.size() <= 2) {
      partition.medoids.push_back(*std::min_element(members.begin(), members.end()));
      continue;
    }
    std::size_t best = members.front();
    double best_sum = std::numeric_limits<double>::infinity();
    for (auto a : members) {
      double sum = 0.0;
      for (auto b : members)
        if (a != b) sum += pairwise_distance(f, a, b);
      if (sum < best_sum || (sum == best_sum && a < best)) {
        best_sum = sum;
        best = a;
      }
    }
    partition.medoids.push_back(best);
  }
  return partition;
}

/// Medoid indices, ascending.
inline std::vector<std::size_t> select_features(const ClusterPartition& partition) {
  if (!partition.has_medoids()) throw DomainError("medoids have not been selected");
  std::vector<std::size_t> out = partition.medoids;
  std::sort(out.begin(), out.end());
  return out;
}

/// Rank of the medoid rows under the partition's tolerance. Below k means
/// some chosen medoid did not carry its seed's independent direction.
inline std::size_t medoid_rank(const ClusterPartition& partition, const FeatureMatrix& f) {
  RankTracker tracker(f.instances(), partition.tolerance);
  for (auto j : select_features(partition)) tracker.try_extend(f.row(j).transpose());
  return tracker.rank();
}

}  // namespace rankmed
