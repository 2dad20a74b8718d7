#include "crlm/eval.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace crlm {

namespace {

void check_lengths(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw std::invalid_argument("labelings have different lengths");
}

// Maps arbitrary labels to 0..m-1 in ascending label order.
std::vector<std::size_t> compress(std::span<const int> labels, std::vector<int>* values = nullptr) {
  std::map<int, std::size_t> ids;
  for (int l : labels) ids.emplace(l, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ids) {
    id = next++;
    if (values) values->push_back(label);
  }
  std::vector<std::size_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = ids.at(labels[i]);
  return out;
}

std::uint64_t pairs(std::uint64_t m) { return m * (m - (m > 0 ? 1 : 0)) / 2; }

// Best injective row->column mapping by enumeration; `better(a, b)` orders totals.
template <typename Better>
std::vector<std::size_t> enumerate_assignment(const Matrix& w, Better better) {
  const std::size_t rows = static_cast<std::size_t>(w.rows());
  const std::size_t cols = static_cast<std::size_t>(w.cols());
  std::vector<std::size_t> current(rows), best(rows);
  std::vector<char> used(cols, 0);
  bool have = false;
  double best_total = 0.0;
  auto rec = [&](auto&& self, std::size_t r, double total) -> void {
    if (r == rows) {
      if (!have || better(total, best_total)) {
        have = true;
        best_total = total;
        best = current;
      }
      return;
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      current[r] = c;
      self(self, r + 1, total + w(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      used[c] = 0;
    }
  };
  rec(rec, 0, 0.0);
  return best;
}

// Minimum-cost assignment (Hungarian with potentials), rows <= cols.
std::vector<std::size_t> min_cost_assignment(const Matrix& cost) {
  const std::size_t n = static_cast<std::size_t>(cost.rows());
  const std::size_t m = static_cast<std::size_t>(cost.cols());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur =
            cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assign(n, 0);
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] != 0) assign[p[j] - 1] = j - 1;
  }
  return assign;
}

bool small_enough_to_enumerate(const Matrix& w) { return w.rows() <= 8 && w.cols() <= 8; }

}  // namespace

std::vector<std::size_t> max_weight_assignment(const Matrix& weights) {
  if (weights.rows() > weights.cols()) throw std::invalid_argument("assignment needs rows <= cols");
  if (weights.rows() == 0) return {};
  if (small_enough_to_enumerate(weights)) {
    return enumerate_assignment(weights, [](double a, double b) { return a > b; });
  }
  const Matrix cost = Matrix::Constant(weights.rows(), weights.cols(), weights.maxCoeff()) - weights;
  return min_cost_assignment(cost);
}

double rand_index(std::span<const int> truth, std::span<const int> pred) {
  check_lengths(truth, pred);
  const std::uint64_t n = truth.size();
  if (n < 2) return 1.0;
  const auto t = compress(truth);
  const auto p = compress(pred);
  std::map<std::pair<std::size_t, std::size_t>, std::uint64_t> cells;
  std::vector<std::uint64_t> rows(*std::max_element(t.begin(), t.end()) + 1, 0);
  std::vector<std::uint64_t> cols(*std::max_element(p.begin(), p.end()) + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    ++cells[{t[i], p[i]}];
    ++rows[t[i]];
    ++cols[p[i]];
  }
  std::uint64_t same_both = 0, same_truth = 0, same_pred = 0;
  for (const auto& [key, c] : cells) same_both += pairs(c);
  for (auto c : rows) same_truth += pairs(c);
  for (auto c : cols) same_pred += pairs(c);
  const std::uint64_t total = pairs(n);
  // agreements = pairs together in both + pairs apart in both
  const std::uint64_t agree = total + 2 * same_both - same_truth - same_pred;
  return static_cast<double>(agree) / static_cast<double>(total);
}

double rand_index_pairs(std::span<const int> truth, std::span<const int> pred) {
  check_lengths(truth, pred);
  const std::size_t n = truth.size();
  if (n < 2) return 1.0;
  std::uint64_t agree = 0, total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      agree += ((truth[i] == truth[j]) == (pred[i] == pred[j])) ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

double f_measure_avg(std::span<const int> truth, std::span<const int> pred, int k, bool match_zero) {
  check_lengths(truth, pred);
  if (k < 1) throw std::invalid_argument("f_measure_avg: k must be >= 1");
  for (int l : truth) {
    if (l < 0 || l > k) throw std::invalid_argument("f_measure_avg: truth label outside 0..k");
  }
  std::vector<int> pred_values;
  const auto p = compress(pred, &pred_values);
  std::vector<std::size_t> candidates;  // compressed ids that may be matched
  for (std::size_t id = 0; id < pred_values.size(); ++id) {
    if (match_zero || pred_values[id] != 0) candidates.push_back(id);
  }
  std::vector<std::size_t> column(pred_values.size(), candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) column[candidates[c]] = c;

  const std::size_t kk = static_cast<std::size_t>(k);
  const std::size_t cols = std::max(kk, candidates.size());
  Matrix overlap = Matrix::Zero(static_cast<Eigen::Index>(kk), static_cast<Eigen::Index>(cols));
  std::vector<double> truth_size(kk, 0.0), pred_size(cols, 0.0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const std::size_t c = column[p[i]];
    if (c < candidates.size()) pred_size[c] += 1.0;
    if (truth[i] == 0) continue;
    const std::size_t j = static_cast<std::size_t>(truth[i] - 1);
    truth_size[j] += 1.0;
    if (c < candidates.size()) overlap(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) += 1.0;
  }
  Matrix f1 = Matrix::Zero(overlap.rows(), overlap.cols());
  for (std::size_t j = 0; j < kk; ++j) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double denom = truth_size[j] + pred_size[c];
      if (denom > 0.0) {
        f1(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) =
            2.0 * overlap(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) / denom;
      }
    }
  }
  const auto match = max_weight_assignment(f1);
  double sum = 0.0;
  for (std::size_t j = 0; j < kk; ++j) sum += f1(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(match[j]));
  return sum / static_cast<double>(k);
}

double purity(std::span<const int> truth, std::span<const int> pred) {
  check_lengths(truth, pred);
  if (truth.empty()) return 1.0;
  const auto t = compress(truth);
  const auto p = compress(pred);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> cells;
  for (std::size_t i = 0; i < t.size(); ++i) ++cells[{p[i], t[i]}];
  std::vector<std::size_t> best(*std::max_element(p.begin(), p.end()) + 1, 0);
  for (const auto& [key, c] : cells) best[key.first] = std::max(best[key.first], c);
  const std::size_t sum = std::accumulate(best.begin(), best.end(), std::size_t{0});
  return static_cast<double>(sum) / static_cast<double>(t.size());
}

CenterError mean_center_error(const Matrix& true_means, const Matrix& estimates) {
  if (true_means.rows() == 0) throw std::invalid_argument("mean_center_error: no true means");
  CenterError out;
  if (estimates.rows() == 0) {
    out.no_estimates = true;
    out.unmatched = true;
    out.value = std::numeric_limits<double>::infinity();
    return out;
  }
  if (true_means.cols() != estimates.cols()) throw std::invalid_argument("mean_center_error: dimension mismatch");
  const Eigen::Index k = true_means.rows();
  const Eigen::Index m = estimates.rows();
  const Eigen::Index cols = std::max(k, m);
  // Columns >= m stand for "no estimate" and cost the norm of the true mean.
  Matrix cost(k, cols);
  for (Eigen::Index j = 0; j < k; ++j) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      cost(j, c) = c < m ? (true_means.row(j) - estimates.row(c)).norm() : true_means.row(j).norm();
    }
  }
  std::vector<std::size_t> match;
  if (small_enough_to_enumerate(cost)) {
    match = enumerate_assignment(cost, [](double a, double b) { return a < b; });
  } else {
    match = min_cost_assignment(cost);
  }
  double sum = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    const auto c = static_cast<Eigen::Index>(match[static_cast<std::size_t>(j)]);
    sum += cost(j, c);
    if (c >= m) out.unmatched = true;
  }
  out.value = sum / static_cast<double>(k);
  return out;
}

}  // namespace crlm
