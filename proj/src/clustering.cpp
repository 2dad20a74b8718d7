#include "crlm/clustering.hpp"

#include "crlm/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace crlm {

namespace {

// Coordinates checked before touching the full row. Most far-apart pairs
// exceed R^2 within this prefix.
constexpr std::size_t kPrefix = 8;
constexpr std::size_t kBlock = 512;

struct NeighborPair {
  std::uint32_t a;
  std::uint32_t b;
  double sq;
};

struct PairSink {
  std::vector<NeighborPair> pairs;
  std::size_t budget = 0;
  bool overflow = false;

  void add(std::size_t a, std::size_t b, double sq) {
    if (overflow) return;
    if (pairs.size() >= budget) {
      overflow = true;
      pairs.clear();
      pairs.shrink_to_fit();
      return;
    }
    pairs.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b), sq});
  }
};

// Coordinate-major copy of the first few coordinates of the active rows, so
// the prefix distances for a block of rows vectorise.
class PrefixTable {
 public:
  PrefixTable(const DataMatrix& data, const IndexSet& active)
      : m_(active.size()), p_(std::min(kPrefix, data.dim())), v_(p_ * m_) {
    for (std::size_t t = 0; t < m_; ++t) {
      auto r = data.row(active[t]);
      for (std::size_t c = 0; c < p_; ++c) v_[c * m_ + t] = r[c];
    }
  }
  std::size_t width() const { return p_; }
  const double* coord(std::size_t c) const { return v_.data() + c * m_; }

 private:
  std::size_t m_;
  std::size_t p_;
  std::vector<double> v_;
};

// Squared distances from `q` to active rows [lo, hi), written to acc[0..hi-lo).
// Entries >= r2 are final and the rest are completed over the full row, in the
// same coordinate order as squared_distance().
template <typename OnHit>
void scan_block(const DataMatrix& data, const IndexSet& active, const PrefixTable& prefix,
                const double* q, std::size_t lo, std::size_t hi, double r2, double* acc,
                OnHit&& on_hit) {
  const std::size_t d = data.dim();
  const std::size_t p = prefix.width();
  const std::size_t len = hi - lo;
  std::fill(acc, acc + len, 0.0);
  for (std::size_t c = 0; c < p; ++c) {
    const double* col = prefix.coord(c) + lo;
    const double qc = q[c];
    for (std::size_t u = 0; u < len; ++u) {
      const double diff = col[u] - qc;
      acc[u] += diff * diff;
    }
  }
  for (std::size_t u = 0; u < len; ++u) {
    double s = acc[u];
    if (s >= r2) continue;
    if (p < d) {
      const double* x = data.row(active[lo + u]).data();
      for (std::size_t c = p; c < d; ++c) {
        const double diff = x[c] - q[c];
        s += diff * diff;
      }
      if (s >= r2) continue;
    }
    on_hit(lo + u, s);
  }
}

// Symmetric single-threaded scan: each pair is evaluated once and credited to
// both endpoints. Contributions reach every total in ascending index order, so
// the sums equal the row-by-row definition bit for bit.
std::vector<double> symmetric_scan(const DataMatrix& data, const IndexSet& active,
                                   const LossConfig& cfg, PairSink* sink) {
  const std::size_t m = active.size();
  const std::size_t d = data.dim();
  const double scale = cfg.scale(d);
  const double r2 = cfg.radius_sq(d);
  const double self_loss = loss_from_squared_norm(0.0, scale, cfg.g, r2);
  PrefixTable prefix(data, active);
  std::vector<double> totals(m, 0.0);
  std::vector<double> acc(kBlock);
  for (std::size_t t = 0; t < m; ++t) {
    const double* q = data.row(active[t]).data();
    totals[t] += self_loss;
    for (std::size_t lo = t + 1; lo < m; lo += kBlock) {
      const std::size_t hi = std::min(m, lo + kBlock);
      scan_block(data, active, prefix, q, lo, hi, r2, acc.data(), [&](std::size_t u, double s) {
        const double l = loss_from_squared_norm(s, scale, cfg.g, r2);
        totals[t] += l;
        totals[u] += l;
        if (sink) sink->add(t, u, s);
      });
    }
  }
  return totals;
}

std::vector<double> threaded_scan(const DataMatrix& data, const IndexSet& active,
                                  const LossConfig& cfg, unsigned threads) {
  const std::size_t m = active.size();
  const std::size_t d = data.dim();
  const double scale = cfg.scale(d);
  const double r2 = cfg.radius_sq(d);
  PrefixTable prefix(data, active);
  std::vector<double> totals(m, 0.0);
  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(kBlock);
    for (std::size_t t = begin; t < end; ++t) {
      const double* q = data.row(active[t]).data();
      double total = 0.0;
      for (std::size_t lo = 0; lo < m; lo += kBlock) {
        const std::size_t hi = std::min(m, lo + kBlock);
        scan_block(data, active, prefix, q, lo, hi, r2, acc.data(), [&](std::size_t, double s) {
          total += loss_from_squared_norm(s, scale, cfg.g, r2);
        });
      }
      totals[t] = total;
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(threads, m);
  // Interleaved chunks balance the dense and sparse parts of the data.
  const std::size_t chunk = std::max<std::size_t>(1, m / (n_threads * 8));
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  for (std::size_t b = 0; b < m; b += chunk) ranges.emplace_back(b, std::min(m, b + chunk));
  {
    std::vector<std::jthread> pool;
    pool.reserve(n_threads);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t r = w; r < ranges.size(); r += n_threads) {
          work(ranges[r].first, ranges[r].second);
        }
      });
    }
  }
  return totals;
}

void check_active(const DataMatrix& data, const IndexSet& active) {
  if (active.empty()) throw std::invalid_argument("ocrlm: empty active set");
  for (std::size_t t = 0; t < active.size(); ++t) {
    if (active[t] >= data.rows()) throw std::invalid_argument("ocrlm: active index out of range");
    if (t > 0 && active[t] <= active[t - 1]) {
      throw std::invalid_argument("ocrlm: active indices must be strictly ascending");
    }
  }
}

std::size_t argmin_lowest(const std::vector<double>& totals) {
  std::size_t best = 0;
  for (std::size_t t = 1; t < totals.size(); ++t) {
    if (totals[t] < totals[best]) best = t;
  }
  return best;
}

// Within-radius adjacency of all rows, each list ascending and including the
// row itself (squared distance 0).
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> index;
  std::vector<double> sq;

  Adjacency(std::size_t n, const std::vector<NeighborPair>& pairs) : offsets(n + 1, 0) {
    std::vector<std::size_t> degree(n, 1);
    for (const auto& p : pairs) {
      ++degree[p.a];
      ++degree[p.b];
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] = offsets[i] + degree[i];
    index.resize(offsets[n]);
    sq.resize(offsets[n]);
    std::vector<std::size_t> fill(offsets.begin(), offsets.end() - 1);
    std::vector<char> self_done(n, 0);
    auto put = [&](std::size_t row, std::size_t other, double s) {
      index[fill[row]] = static_cast<std::uint32_t>(other);
      sq[fill[row]] = s;
      ++fill[row];
    };
    // Pairs arrive ordered by their lower endpoint, so a row's lower
    // neighbours are all placed before its own upper ones.
    for (const auto& p : pairs) {
      if (!self_done[p.a]) {
        put(p.a, p.a, 0.0);
        self_done[p.a] = 1;
      }
      put(p.a, p.b, p.sq);
      put(p.b, p.a, p.sq);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!self_done[i]) put(i, i, 0.0);
    }
  }
};

}  // namespace

std::vector<double> candidate_losses(const DataMatrix& data, const IndexSet& active,
                                     const LossConfig& cfg, const ScanOptions& opts) {
  cfg.validate();
  check_active(data, active);
  if (opts.threads > 1) return threaded_scan(data, active, cfg, opts.threads);
  return symmetric_scan(data, active, cfg, nullptr);
}

ClusterEstimate ocrlm(const DataMatrix& data, const IndexSet& active, const LossConfig& cfg,
                      const ScanOptions& opts) {
  const auto totals = candidate_losses(data, active, cfg, opts);
  const std::size_t seed = active[argmin_lowest(totals)];
  const std::size_t d = data.dim();
  const double r2 = cfg.radius_sq(d);
  const double* q = data.row(seed).data();
  IndexSet members;
  for (auto i : active) {
    if (squared_distance(data.row(i).data(), q, d) < r2) members.push_back(i);
  }
  return estimate_cluster(data, std::move(members), cfg.sigma_max);
}

ClusterEstimate ocrlm(const DataMatrix& data, const LossConfig& cfg, const ScanOptions& opts) {
  IndexSet all(data.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return ocrlm(data, all, cfg, opts);
}

namespace {

ClusteringResult crlm_rescan(const DataMatrix& data, std::size_t k_max, const LossConfig& cfg,
                             std::size_t min_cluster_size, const ScanOptions& opts) {
  ClusteringResult result;
  result.assignment.assign(data.rows(), 0);
  IndexSet active(data.rows());
  std::iota(active.begin(), active.end(), std::size_t{0});
  for (std::size_t j = 1; j <= k_max && !active.empty(); ++j) {
    auto est = ocrlm(data, active, cfg, opts);
    if (est.members.size() <= min_cluster_size) {
      result.stopped_early = true;
      break;
    }
    for (auto i : est.members) result.assignment[i] = static_cast<int>(j);
    IndexSet rest;
    rest.reserve(active.size() - est.members.size());
    std::set_difference(active.begin(), active.end(), est.members.begin(), est.members.end(),
                        std::back_inserter(rest));
    active = std::move(rest);
    result.clusters.push_back(std::move(est));
  }
  return result;
}

}  // namespace

ClusteringResult crlm(const DataMatrix& data, std::size_t k_max, const LossConfig& cfg,
                      std::size_t min_cluster_size, const ScanOptions& opts) {
  cfg.validate();
  if (k_max == 0) throw std::invalid_argument("crlm: k_max must be >= 1");
  if (min_cluster_size == 0) throw std::invalid_argument("crlm: min_cluster_size must be >= 1");
  const std::size_t n = data.rows();
  if (n == 0) throw std::invalid_argument("crlm: no observations");
  if (k_max == 1 || n > std::numeric_limits<std::uint32_t>::max()) {
    return crlm_rescan(data, k_max, cfg, min_cluster_size, opts);
  }

  IndexSet all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  PairSink sink;
  sink.budget = opts.neighbor_pair_budget;
  std::vector<double> totals = symmetric_scan(data, all, cfg, &sink);
  if (sink.overflow) return crlm_rescan(data, k_max, cfg, min_cluster_size, opts);

  const Adjacency adj(n, sink.pairs);
  sink.pairs = {};
  const std::size_t d = data.dim();
  const double scale = cfg.scale(d);
  const double r2 = cfg.radius_sq(d);

  ClusteringResult result;
  result.assignment.assign(n, 0);
  std::vector<char> alive(n, 1);
  std::size_t remaining = n;
  for (std::size_t j = 1; j <= k_max && remaining > 0; ++j) {
    if (j > 1) {
      // Same terms, same ascending order as a fresh scan of the survivors.
      for (std::size_t i = 0; i < n; ++i) {
        if (!alive[i]) continue;
        double total = 0.0;
        for (std::size_t e = adj.offsets[i]; e < adj.offsets[i + 1]; ++e) {
          if (alive[adj.index[e]]) total += loss_from_squared_norm(adj.sq[e], scale, cfg.g, r2);
        }
        totals[i] = total;
      }
    }
    std::size_t seed = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i] && (seed == n || totals[i] < totals[seed])) seed = i;
    }
    IndexSet members;
    for (std::size_t e = adj.offsets[seed]; e < adj.offsets[seed + 1]; ++e) {
      if (alive[adj.index[e]]) members.push_back(adj.index[e]);
    }
    if (members.size() <= min_cluster_size) {
      result.stopped_early = true;
      break;
    }
    for (auto i : members) {
      alive[i] = 0;
      result.assignment[i] = static_cast<int>(j);
    }
    remaining -= members.size();
    result.clusters.push_back(estimate_cluster(data, std::move(members), cfg.sigma_max));
  }
  return result;
}

ClusteringResult kmeans_pp(const DataMatrix& data, std::size_t k, std::uint64_t seed,
                           std::size_t max_iter) {
  const std::size_t n = data.rows();
  const std::size_t d = data.dim();
  if (k == 0) throw std::invalid_argument("kmeans_pp: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans_pp: k exceeds the number of rows");
  if (max_iter == 0) throw std::invalid_argument("kmeans_pp: max_iter must be >= 1");

  Rng rng(seed);
  Matrix centers(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  centers.row(0) = data.values().row(static_cast<Eigen::Index>(first));
  for (std::size_t c = 1; c <= k; ++c) {
    const double* prev = centers.row(static_cast<Eigen::Index>(c - 1)).data();
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], squared_distance(data.row(i).data(), prev, d));
      sum += nearest[i];
    }
    if (c == k) break;
    std::size_t pick = 0;
    if (sum > 0.0) {
      const double target = rng.uniform() * sum;
      double run = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        run += nearest[i];
        if (run > target && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      // Every row coincides with a chosen center.
      pick = static_cast<std::size_t>(rng.below(n));
    }
    centers.row(static_cast<Eigen::Index>(c)) = data.values().row(static_cast<Eigen::Index>(pick));
  }

  std::vector<std::size_t> label(n, k);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_sq = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double s =
            squared_distance(data.row(i).data(), centers.row(static_cast<Eigen::Index>(c)).data(), d);
        if (s < best_sq) {
          best_sq = s;
          best = c;
        }
      }
      if (label[i] != best) {
        label[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(label[i])) += data.values().row(static_cast<Eigen::Index>(i));
      ++counts[label[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.row(static_cast<Eigen::Index>(c)) =
            sums.row(static_cast<Eigen::Index>(c)) / static_cast<double>(counts[c]);
      }
    }
  }

  ClusteringResult result;
  result.assignment.resize(n);
  std::vector<IndexSet> members(k);
  for (std::size_t i = 0; i < n; ++i) {
    result.assignment[i] = static_cast<int>(label[i] + 1);
    members[label[i]].push_back(i);
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (members[c].empty()) {
      ClusterEstimate empty;
      empty.center = centers.row(static_cast<Eigen::Index>(c)).transpose();
      result.clusters.push_back(std::move(empty));
      continue;
    }
    result.clusters.push_back(estimate_cluster(data, std::move(members[c]), 0.0));
  }
  return result;
}

double within_cluster_ss(const DataMatrix& data, const ClusteringResult& result) {
  double ss = 0.0;
  for (const auto& c : result.clusters) {
    for (auto i : c.members) ss += squared_distance(data.row(i).data(), c.center.data(), data.dim());
  }
  return ss;
}

}  // namespace crlm
