#include "crlm/experiments.hpp"

#include "crlm/estimation.hpp"
#include "crlm/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace crlm {

unsigned thread_budget() {
  if (const char* env = std::getenv("CRLM_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1u, threads));
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

Matrix supervised_means(const DataMatrix& data, std::size_t k) {
  const auto& labels = data.labels();
  const auto d = static_cast<Eigen::Index>(data.dim());
  Matrix sums = Matrix::Zero(static_cast<Eigen::Index>(k), d);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (labels[i] < 1 || static_cast<std::size_t>(labels[i]) > k) continue;
    const auto j = static_cast<Eigen::Index>(labels[i] - 1);
    for (Eigen::Index c = 0; c < d; ++c) sums(j, c) += data.row(i)[static_cast<std::size_t>(c)];
    ++counts[static_cast<std::size_t>(j)];
  }
  Matrix out(static_cast<Eigen::Index>(std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; })), d);
  Eigen::Index r = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (counts[j] == 0) continue;
    out.row(r++) = sums.row(static_cast<Eigen::Index>(j)) / static_cast<double>(counts[j]);
  }
  return out;
}

Matrix centers_of(const ClusteringResult& r, std::size_t d) {
  Matrix out(static_cast<Eigen::Index>(r.clusters.size()), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < r.clusters.size(); ++j) {
    out.row(static_cast<Eigen::Index>(j)) = r.clusters[j].center.transpose();
  }
  return out;
}

std::string algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kCrlm: return "crlm";
    case Algorithm::kKmeansPP: return "kmeans++";
    case Algorithm::kSupervised: return "supervised";
  }
  return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "crlm") return Algorithm::kCrlm;
  if (name == "kmeans++" || name == "kmeanspp") return Algorithm::kKmeansPP;
  if (name == "supervised") return Algorithm::kSupervised;
  throw std::invalid_argument("unknown algorithm: " + name);
}

std::vector<ConvergenceRow> run_convergence(const ConvergenceRequest& req) {
  req.spec.validate();
  req.cfg.validate();
  const std::size_t k_max = req.k_max ? req.k_max : req.spec.k;
  const std::size_t per_run = req.algorithms.size();
  std::vector<ConvergenceRow> rows(req.n_grid.size() * req.seeds.size() * per_run);
  parallel_for(req.n_grid.size() * req.seeds.size(), req.threads, [&](std::size_t task) {
    const std::size_t n = req.n_grid[task / req.seeds.size()];
    const std::uint64_t seed = req.seeds[task % req.seeds.size()];
    const DataMatrix data = sample_gmmub(req.spec, n, seed);
    for (std::size_t a = 0; a < per_run; ++a) {
      ConvergenceRow& row = rows[task * per_run + a];
      row.n = static_cast<double>(n);
      row.seed = seed;
      row.algorithm = req.algorithms[a];
      Matrix est;
      switch (row.algorithm) {
        case Algorithm::kCrlm:
          est = data.empty() ? Matrix(0, static_cast<Eigen::Index>(req.spec.d))
                             : centers_of(crlm(data, k_max, req.cfg), data.dim());
          break;
        case Algorithm::kKmeansPP:
          est = data.rows() < req.spec.k ? Matrix(0, static_cast<Eigen::Index>(req.spec.d))
                                         : centers_of(kmeans_pp(data, req.spec.k, seed), data.dim());
          break;
        case Algorithm::kSupervised:
          est = supervised_means(data, req.spec.k);
          break;
      }
      const CenterError err = mean_center_error(req.spec.means, est);
      row.error = err.value;
      row.unmatched = err.unmatched;
    }
  });
  return rows;
}

std::vector<ConvergenceSummary> summarize_convergence(const std::vector<ConvergenceRow>& rows) {
  std::map<std::pair<double, int>, std::pair<double, std::size_t>> acc;
  std::map<std::pair<double, int>, std::size_t> unmatched;
  for (const auto& r : rows) {
    auto& [sum, count] = acc[{r.n, static_cast<int>(r.algorithm)}];
    sum += r.error;
    ++count;
    if (r.unmatched) ++unmatched[{r.n, static_cast<int>(r.algorithm)}];
  }
  std::vector<ConvergenceSummary> out;
  for (const auto& [key, v] : acc) {
    out.push_back({key.first, static_cast<Algorithm>(key.second), v.first / static_cast<double>(v.second),
                   unmatched[key]});
  }
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need >= 2 points");
  double mx = 0.0, my = 0.0;
  const auto m = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log10(x[i]) / m;
    my += std::log10(y[i]) / m;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log10(x[i]) - mx;
    sxy += dx * (std::log10(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

SigmaSweepResult run_sigma_sweep(const SigmaSweepRequest& req) {
  if (req.sigma_grid.empty()) throw std::invalid_argument("run_sigma_sweep: empty sigma grid");
  if (req.seeds.empty()) throw std::invalid_argument("run_sigma_sweep: no seeds");
  req.spec.validate();
  const std::size_t k_max = req.k_max ? req.k_max : req.spec.k;
  const std::size_t k = req.spec.k;

  std::vector<DataMatrix> samples(req.seeds.size());
  parallel_for(req.seeds.size(), req.threads,
               [&](std::size_t s) { samples[s] = sample_gmmub(req.spec, req.n, req.seeds[s]); });

  const std::size_t grid = req.sigma_grid.size();
  std::vector<double> f(grid * req.seeds.size()), ri(grid * req.seeds.size());
  parallel_for(grid * req.seeds.size(), req.threads, [&](std::size_t task) {
    const std::size_t g = task / req.seeds.size();
    const std::size_t s = task % req.seeds.size();
    const LossConfig cfg{req.g, req.sigma_grid[g]};
    const auto r = crlm(samples[s], k_max, cfg);
    const auto& truth = samples[s].labels();
    f[task] = f_measure_avg(truth, r.assignment, static_cast<int>(k));
    ri[task] = rand_index(truth, r.assignment);
  });

  RegionRequest region;
  region.spec = req.spec;
  region.n = static_cast<double>(req.n);
  region.g = req.g;
  region.prob_floor = req.prob_floor;
  region.axis = SweepAxis::kSampleSize;
  region.axis_values = {static_cast<double>(req.n)};

  SigmaSweepResult out;
  out.theory = feasible_sigma_region(region).front();
  for (std::size_t g = 0; g < grid; ++g) {
    SigmaSweepRow row;
    row.sigma_max = req.sigma_grid[g];
    row.min_f = 1.0;
    for (std::size_t s = 0; s < req.seeds.size(); ++s) {
      row.mean_f += f[g * req.seeds.size() + s];
      row.mean_rand += ri[g * req.seeds.size() + s];
      row.min_f = std::min(row.min_f, f[g * req.seeds.size() + s]);
    }
    row.mean_f /= static_cast<double>(req.seeds.size());
    row.mean_rand /= static_cast<double>(req.seeds.size());
    row.in_theory_region =
        !out.theory.empty && row.sigma_max >= out.theory.sigma_lo && row.sigma_max <= out.theory.sigma_hi;
    out.rows.push_back(row);
  }
  return out;
}

std::vector<KSweepRow> run_k_sweep(const GmmubSpec& spec, const LossConfig& cfg,
                                   const std::vector<std::size_t>& n_grid,
                                   const std::vector<std::uint64_t>& seeds, std::size_t k_cap,
                                   unsigned threads) {
  if (seeds.empty()) throw std::invalid_argument("run_k_sweep: no seeds");
  std::vector<std::size_t> khat(n_grid.size() * seeds.size());
  parallel_for(khat.size(), threads, [&](std::size_t task) {
    const DataMatrix data = sample_gmmub(spec, n_grid[task / seeds.size()], seeds[task % seeds.size()]);
    khat[task] = estimate_k(data, cfg, k_cap);
  });
  std::vector<KSweepRow> rows;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    KSweepRow row;
    row.n = n_grid[i];
    row.per_seed.assign(khat.begin() + static_cast<std::ptrdiff_t>(i * seeds.size()),
                        khat.begin() + static_cast<std::ptrdiff_t>((i + 1) * seeds.size()));
    double sum = 0.0;
    for (auto v : row.per_seed) sum += static_cast<double>(v);
    row.mean_k = sum / static_cast<double>(seeds.size());
    rows.push_back(row);
  }
  return rows;
}

}  // namespace crlm
