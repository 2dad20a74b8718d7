#pragma once

#include "crlm/core.hpp"

#include <cstddef>
#include <cstdint>

namespace crlm {

/// Execution knobs that never change results.
struct ScanOptions {
  /// Worker threads for the per-candidate loss scan. 1 uses the symmetric
  /// single-threaded scan; >1 splits candidates across threads. Both produce
  /// identical sums.
  unsigned threads = 1;
  /// crlm caches the within-radius neighbour pairs of the first scan and
  /// reuses them for later iterations while the pair count stays under this
  /// budget; past it, every iteration rescans the remaining points.
  std::size_t neighbor_pair_budget = std::size_t{20'000'000};
};

/// Total loss of every active point used as a center, restricted to the
/// active points. Entry t belongs to active[t]. `active` must be ascending.
std::vector<double> candidate_losses(const DataMatrix& data, const IndexSet& active,
                                     const LossConfig& cfg, const ScanOptions& opts = {});

/// One-cluster robust loss minimisation over the active rows.
///
/// The seed is the active row with the smallest total loss (lowest row index
/// on ties). Members are the active rows strictly inside the radius
/// sigma_max * sqrt(dG) around the seed; the estimate is their mean and
/// spread, or (seed, sigma_max) for a lone member.
ClusterEstimate ocrlm(const DataMatrix& data, const IndexSet& active, const LossConfig& cfg,
                      const ScanOptions& opts = {});

/// All rows active.
ClusterEstimate ocrlm(const DataMatrix& data, const LossConfig& cfg, const ScanOptions& opts = {});

/// Repeated ocrlm with removal of each extracted cluster. Stops, discarding
/// the last estimate, as soon as a cluster has at most `min_cluster_size`
/// members.
ClusteringResult crlm(const DataMatrix& data, std::size_t k_max, const LossConfig& cfg,
                      std::size_t min_cluster_size = 1, const ScanOptions& opts = {});

/// Lloyd's k-means with D^2-weighted (k-means++) seeding. Deterministic for a
/// given seed. Every row gets a label in 1..k.
ClusteringResult kmeans_pp(const DataMatrix& data, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter = 300);

/// Sum over clusters of squared distances to their centers.
double within_cluster_ss(const DataMatrix& data, const ClusteringResult& result);

}  // namespace crlm
