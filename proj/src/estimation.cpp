#include "crlm/estimation.hpp"

#include "crlm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crlm {

namespace {

constexpr double kZeroGuard = 1e-12;
constexpr std::size_t kMinBelowGap = 10;

// All pairwise distances through the Gram identity on centered data, in row blocks.
std::vector<double> all_pair_distances(const DataMatrix& data) {
  const std::size_t n = data.rows();
  const std::size_t d = data.dim();
  const Matrix x = data.values().rowwise() - data.values().colwise().mean();
  const Vector sq = x.rowwise().squaredNorm();
  std::vector<double> out;
  out.reserve(n * (n - 1) / 2);
  constexpr std::size_t kBlock = 256;
  for (std::size_t a = 0; a < n; a += kBlock) {
    const std::size_t b = std::min(n, a + kBlock);
    const auto rows = static_cast<Eigen::Index>(b - a);
    const auto rest = static_cast<Eigen::Index>(n - a);
    const Matrix gram = x.middleRows(static_cast<Eigen::Index>(a), rows) *
                        x.middleRows(static_cast<Eigen::Index>(a), rest).transpose();
    for (std::size_t i = a; i < b; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double ni = sq(static_cast<Eigen::Index>(i));
        const double nj = sq(static_cast<Eigen::Index>(j));
        double d2 = ni + nj - 2.0 * gram(static_cast<Eigen::Index>(i - a), static_cast<Eigen::Index>(j - a));
        // Cancellation makes near-coincident pairs unreliable; redo them exactly.
        if (d2 < 1e-8 * (ni + nj)) d2 = squared_distance(data.row(i).data(), data.row(j).data(), d);
        out.push_back(std::sqrt(std::max(d2, 0.0)));
      }
    }
  }
  return out;
}

std::vector<double> sampled_pair_distances(const DataMatrix& data, std::size_t count, std::uint64_t seed) {
  const std::size_t n = data.rows();
  const std::size_t d = data.dim();
  Rng rng(seed);
  std::vector<double> out(count);
  for (auto& v : out) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    auto j = static_cast<std::size_t>(rng.below(n - 1));
    if (j >= i) ++j;
    v = std::sqrt(squared_distance(data.row(i).data(), data.row(j).data(), d));
  }
  return out;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

SigmaEstimate estimate_sigmas(const DataMatrix& data, const SigmaEstimateOptions& opts) {
  const std::size_t n = data.rows();
  if (n < 2) throw std::invalid_argument("estimate_sigmas: need at least 2 observations");
  if (!(opts.quantile > 0.0 && opts.quantile <= 1.0)) {
    throw std::invalid_argument("estimate_sigmas: quantile must be in (0, 1]");
  }
  if (opts.max_pairs == 0) throw std::invalid_argument("estimate_sigmas: max_pairs must be >= 1");

  SigmaEstimate est;
  const double total_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  std::vector<double> dist;
  if (total_pairs > static_cast<double>(opts.max_pairs)) {
    est.subsampled = true;
    dist = sampled_pair_distances(data, opts.max_pairs, opts.seed);
  } else {
    dist = all_pair_distances(data);
  }
  est.pairs_used = dist.size();

  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(opts.quantile * static_cast<double>(dist.size()))));
  std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep - 1), dist.end());
  dist.resize(keep);
  std::sort(dist.begin(), dist.end());
  est.retained = keep;

  const double norm = std::sqrt(2.0 * static_cast<double>(data.dim()));
  std::vector<double> vals;
  vals.reserve(keep);
  for (double v : dist) {
    if (v >= kZeroGuard) vals.push_back(v / norm);
  }
  if (vals.empty()) return est;

  // Cut at the widest multiplicative gap when it is pronounced.
  std::size_t low = vals.size();
  double best_ratio = 1.0;
  for (std::size_t i = kMinBelowGap; i < vals.size(); ++i) {
    const double ratio = vals[i] / vals[i - 1];
    if (ratio > best_ratio) {
      best_ratio = ratio;
      low = i;
    }
  }
  if (best_ratio < opts.gap_factor) low = vals.size();
  vals.resize(low);
  est.low_regime = low;
  est.cut = vals.back();

  std::vector<double> logs(vals.size());
  std::transform(vals.begin(), vals.end(), logs.begin(), [](double v) { return std::log(v); });
  const double lo = logs.front();
  const double hi = logs.back();
  std::size_t bins = opts.bins;
  if (bins == 0) {
    const double iqr = quantile_sorted(logs, 0.75) - quantile_sorted(logs, 0.25);
    const double width = 2.0 * iqr / std::cbrt(static_cast<double>(logs.size()));
    bins = width > 0.0 ? static_cast<std::size_t>(std::ceil((hi - lo) / width))
                       : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(logs.size()))));
    bins = std::clamp<std::size_t>(bins, 1, 1000);
  }
  const double width = hi > lo ? (hi - lo) / static_cast<double>(bins) : 1.0;
  auto bin_of = [&](double l) {
    return std::min(bins - 1, static_cast<std::size_t>((l - lo) / width));
  };

  std::vector<std::size_t> counts(bins, 0);
  for (double l : logs) ++counts[bin_of(l)];
  est.histogram.counts = counts;
  for (std::size_t b = 0; b < bins; ++b) {
    est.histogram.bin_centers.push_back(std::exp(lo + (static_cast<double>(b) + 0.5) * width));
  }

  const double min_height = opts.peak_fraction * static_cast<double>(logs.size());
  for (std::size_t b = 0; b < bins; ++b) {
    const std::size_t left = b > 0 ? counts[b - 1] : 0;
    const std::size_t right = b + 1 < bins ? counts[b + 1] : 0;
    if (counts[b] <= left || counts[b] <= right) continue;
    if (static_cast<double>(counts[b]) < min_height) continue;
    // Centroid of the peak bin and its neighbours.
    double sum = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const std::size_t bi = bin_of(logs[i]);
      if (bi + 1 >= b && bi <= b + 1) {
        sum += vals[i];
        ++m;
      }
    }
    est.peaks.push_back(sum / static_cast<double>(m));
  }
  return est;
}

std::size_t estimate_k(const DataMatrix& data, const LossConfig& cfg, std::size_t k_cap,
                       std::size_t min_cluster_size, const ScanOptions& opts) {
  if (k_cap == 0) throw std::invalid_argument("estimate_k: k_cap must be >= 1");
  if (data.empty()) return 0;
  return crlm(data, k_cap, cfg, min_cluster_size, opts).clusters.size();
}

double suggest_sigma_max(const std::vector<double>& sigma_estimates, double factor) {
  if (sigma_estimates.empty()) throw std::invalid_argument("suggest_sigma_max: no estimates");
  if (!(factor > 0.0)) throw std::invalid_argument("suggest_sigma_max: factor must be > 0");
  return factor * *std::max_element(sigma_estimates.begin(), sigma_estimates.end());
}

}  // namespace crlm
