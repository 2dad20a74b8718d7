#pragma once

#include "crlm/clustering.hpp"
#include "crlm/datagen.hpp"
#include "crlm/theory.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace crlm {

/// Worker count: CRLM_THREADS if set to a positive integer, else the hardware
/// concurrency (at least 1).
unsigned thread_budget();

/// Calls fn(i) for i in [0, count) on up to `threads` workers. Callers write
/// to slot i only, so results do not depend on scheduling.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

/// Per-true-cluster sample means of labelled data (clusters with no sample are skipped).
Matrix supervised_means(const DataMatrix& data, std::size_t k);

/// Stack of the centers of a clustering result (m x d).
Matrix centers_of(const ClusteringResult& r, std::size_t d);

enum class Algorithm { kCrlm, kKmeansPP, kSupervised };
std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct ConvergenceRow {
  double n = 0.0;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::kCrlm;
  double error = 0.0;
  bool unmatched = false;
};

struct ConvergenceRequest {
  GmmubSpec spec;
  LossConfig cfg;
  std::vector<std::size_t> n_grid;
  std::vector<std::uint64_t> seeds;
  std::vector<Algorithm> algorithms{Algorithm::kCrlm, Algorithm::kKmeansPP, Algorithm::kSupervised};
  std::size_t k_max = 0;  // 0 means spec.k
  unsigned threads = 1;
};

/// Rows ordered by n, then seed, then algorithm as listed in the request.
std::vector<ConvergenceRow> run_convergence(const ConvergenceRequest& req);

struct ConvergenceSummary {
  double n = 0.0;
  Algorithm algorithm = Algorithm::kCrlm;
  double mean_error = 0.0;
  std::size_t unmatched_runs = 0;
};
std::vector<ConvergenceSummary> summarize_convergence(const std::vector<ConvergenceRow>& rows);

/// Least-squares slope of log10(y) against log10(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SigmaSweepRow {
  double sigma_max = 0.0;
  double mean_f = 0.0;
  double mean_rand = 0.0;
  double min_f = 0.0;
  bool in_theory_region = false;
};

struct SigmaSweepRequest {
  GmmubSpec spec;  // data are drawn from this spec for every sigma_max
  std::size_t n = 10'000;
  double g = 4.0;
  std::vector<double> sigma_grid;
  std::vector<std::uint64_t> seeds;
  std::size_t k_max = 0;  // 0 means spec.k
  double prob_floor = 0.99;
  unsigned threads = 1;
};

struct SigmaSweepResult {
  std::vector<SigmaSweepRow> rows;
  RegionRow theory;  // feasible sigma_max interval at the request's n
};

SigmaSweepResult run_sigma_sweep(const SigmaSweepRequest& req);

struct KSweepRow {
  std::size_t n = 0;
  double mean_k = 0.0;
  std::vector<std::size_t> per_seed;
};

/// Mean estimate_k over seeds for each n.
std::vector<KSweepRow> run_k_sweep(const GmmubSpec& spec, const LossConfig& cfg,
                                   const std::vector<std::size_t>& n_grid,
                                   const std::vector<std::uint64_t>& seeds, std::size_t k_cap,
                                   unsigned threads = 1);

}  // namespace crlm
