#pragma once

#include "crlm/clustering.hpp"
#include "crlm/core.hpp"

#include <cstdint>
#include <vector>

namespace crlm {

struct SigmaEstimateOptions {
  double quantile = 0.05;  // fraction of the shortest pairwise distances kept
  /// Histogram bins over the low-distance regime; 0 picks the width by the
  /// Freedman-Diaconis rule on log distances.
  std::size_t bins = 0;
  /// Above this many pairs, this many random pairs are drawn instead.
  std::size_t max_pairs = std::size_t{20'000'000};
  std::uint64_t seed = 0;      // only used when subsampling
  double peak_fraction = 0.05; // minimum peak height, relative to the low regime
  /// Retained distances above the largest multiplicative gap of at least this
  /// factor are dropped before histogramming (they come from pairs that
  /// involve background points or different clusters).
  double gap_factor = 2.0;
};

struct SigmaHistogram {
  std::vector<double> bin_centers;  // in sigma units, ascending
  std::vector<std::size_t> counts;
};

struct SigmaEstimate {
  std::vector<double> peaks;  // ascending
  SigmaHistogram histogram;
  std::size_t pairs_used = 0;
  bool subsampled = false;
  std::size_t retained = 0;    // distances kept by the quantile
  std::size_t low_regime = 0;  // of those, below the gap cut
  double cut = 0.0;            // largest kept value, sigma units
};

/// Peaks of the histogram of the shortest pairwise distances divided by sqrt(2d).
/// Pairs of a N(mu, s^2 I) cluster sit near s after that scaling.
SigmaEstimate estimate_sigmas(const DataMatrix& data, const SigmaEstimateOptions& opts = {});

/// Number of clusters crlm extracts (with k_max = k_cap) before the first one
/// with at most `min_cluster_size` members. 0 for empty data.
std::size_t estimate_k(const DataMatrix& data, const LossConfig& cfg, std::size_t k_cap,
                       std::size_t min_cluster_size = 1, const ScanOptions& opts = {});

inline constexpr double kDefaultSigmaMaxFactor = 2.2;

/// factor * max(estimates). Throws on an empty list.
double suggest_sigma_max(const std::vector<double>& sigma_estimates,
                         double factor = kDefaultSigmaMaxFactor);

}  // namespace crlm
