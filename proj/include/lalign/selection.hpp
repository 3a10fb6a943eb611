#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lalign/spd.hpp"

namespace lalign {

/// Symmetric, zero-diagonal matrix of pairwise distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(Matrix entries);

  std::size_t size() const { return static_cast<std::size_t>(d_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Matrix& entries() const { return d_; }

 private:
  Matrix d_;
};

/// Riemannian distances over all unordered pairs, parallelized over pairs.
/// Bitwise identical to pairwise_distances_serial.
DistanceMatrix pairwise_distances(std::span<const SpdMatrix> covs);
DistanceMatrix pairwise_distances_serial(std::span<const SpdMatrix> covs);

struct KMedoidsOptions {
  std::uint64_t seed = 0;
  /// Extra SWAP runs from seeded random initial medoid sets. The lowest-cost
  /// result wins; ties keep the BUILD-initialized run.
  int restarts = 0;
};

struct KMedoidsResult {
  std::vector<std::size_t> medoids;  // ascending
  std::vector<std::size_t> assignment;  // per point: index into `medoids`
  double cost = 0.0;  // sum_i min_m d(i, m)
  std::vector<double> cost_trace;  // cost after BUILD, then after each applied swap
};

/// PAM: greedy BUILD followed by best-improvement SWAP passes until no single
/// medoid/non-medoid exchange lowers the cost. Ties go to the smallest index.
/// Throws KTooLarge unless 1 <= k <= n.
KMedoidsResult k_medoids(const DistanceMatrix& d, std::size_t k, const KMedoidsOptions& options = {});

/// Total cost of a medoid set.
double medoid_cost(const DistanceMatrix& d, std::span<const std::size_t> medoids);

}  // namespace lalign
