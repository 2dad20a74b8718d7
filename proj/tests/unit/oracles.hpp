// Reference implementations used only by the tests. They are written
// independently of the library (long double, brute force) on purpose.
#pragma once

#include "crlm/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

namespace oracle {

inline long double sq_norm(const std::vector<long double>& v) {
  long double s = 0;
  for (auto x : v) s += x * x;
  return s;
}

inline long double loss(const std::vector<long double>& x, long double sigma, long double g) {
  const long double d = static_cast<long double>(x.size());
  return std::min(sq_norm(x) / (d * sigma * sigma) - g, 0.0L);
}

inline long double total_loss(const crlm::DataMatrix& data, const std::vector<std::size_t>& rows,
                              std::size_t center_row, long double sigma, long double g) {
  long double sum = 0;
  for (auto i : rows) {
    std::vector<long double> diff(data.dim());
    for (std::size_t c = 0; c < data.dim(); ++c) diff[c] = static_cast<long double>(data.values()(i, c)) - data.values()(center_row, c);
    sum += loss(diff, sigma, g);
  }
  return sum;
}

inline long double dist_sq(const crlm::DataMatrix& data, std::size_t a, std::size_t b) {
  long double s = 0;
  for (std::size_t c = 0; c < data.dim(); ++c) {
    const long double t = static_cast<long double>(data.values()(a, c)) - data.values()(b, c);
    s += t * t;
  }
  return s;
}

// Fraction of pairs with (same truth) == (same prediction), enumerated directly.
inline double rand_index(const std::vector<int>& t, const std::vector<int>& p) {
  std::uint64_t agree = 0, all = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      ++all;
      if ((t[i] == t[j]) == (p[i] == p[j])) ++agree;
    }
  }
  return all ? static_cast<double>(agree) / static_cast<double>(all) : 1.0;
}

// One-vs-rest F1 of true cluster j against predicted label q.
inline double f1(const std::vector<int>& t, const std::vector<int>& p, int j, int q) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool truth = t[i] == j, pred = p[i] == q;
    tp += truth && pred;
    fp += !truth && pred;
    fn += truth && !pred;
  }
  return tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Best mean F1 over injective maps {1..k} -> candidate labels, by enumeration.
inline double f_measure(const std::vector<int>& t, const std::vector<int>& p, int k, std::vector<int> candidates) {
  while (static_cast<int>(candidates.size()) < k) candidates.push_back(-1000 - static_cast<int>(candidates.size()));
  std::sort(candidates.begin(), candidates.end());
  double best = 0;
  std::vector<int> perm = candidates;
  do {
    double s = 0;
    for (int j = 1; j <= k; ++j) s += f1(t, p, j, perm[static_cast<std::size_t>(j - 1)]);
    best = std::max(best, s / k);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Kolmogorov-Smirnov statistic of a sample against a continuous CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double dmax = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    dmax = std::max({dmax, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return dmax;
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double std_error(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace oracle
