#pragma once

#include "crlm/core.hpp"

#include <span>
#include <vector>

namespace crlm {

/// Fraction of the n(n-1)/2 pairs on which the two labelings agree about
/// "same group". Computed from the contingency table. Returns 1 for n < 2.
double rand_index(std::span<const int> truth, std::span<const int> pred);

/// O(n^2) pair counter; kept as an independent reference for rand_index.
double rand_index_pairs(std::span<const int> truth, std::span<const int> pred);

/// Mean one-vs-rest F1 over the true clusters 1..k, after matching each true
/// cluster to a distinct predicted label so that the summed F1 is largest
/// (exhaustive for small problems, Hungarian otherwise). Predicted label 0 is
/// treated as "unclustered" and never matched unless `match_zero` is set, in
/// which case every predicted label is a candidate; this covers algorithms
/// with two unordered output labels.
double f_measure_avg(std::span<const int> truth, std::span<const int> pred, int k,
                     bool match_zero = false);

/// Sum over predicted groups of their largest overlap with a true group, / n.
double purity(std::span<const int> truth, std::span<const int> pred);

struct CenterError {
  double value = 0.0;         // (1/k) sum ||mu_j - mu_hat_pi(j)|| at the best matching
  bool unmatched = false;     // fewer estimates than true means; each missing one costs ||mu_j||
  bool no_estimates = false;  // value is +inf
};

/// true_means: k x d, estimates: m x d.
CenterError mean_center_error(const Matrix& true_means, const Matrix& estimates);

/// Maximum-weight assignment of rows to distinct columns for a rows <= cols
/// matrix. Returns the column of each row.
std::vector<std::size_t> max_weight_assignment(const Matrix& weights);

}  // namespace crlm
