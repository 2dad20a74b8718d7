// Command-line front end: data generation, clustering, bounds and the
// experiment sweeps. Exit codes: 0 ok, 1 infeasible or flagged, 2 I/O or usage.
#include "crlm/clustering.hpp"
#include "crlm/datagen.hpp"
#include "crlm/estimation.hpp"
#include "crlm/eval.hpp"
#include "crlm/experiments.hpp"
#include "crlm/io.hpp"
#include "crlm/theory.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

using namespace crlm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kFlagged = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Spec flags shared by every command that simulates data.
struct SpecOptions {
  std::string spec_file;
  std::size_t k = 3;
  std::size_t d = 100;
  std::vector<double> sigmas{1.0, 2.0, 3.0};
  double pi = 0.01;
  std::optional<double> ball_scale;
  double sigma_max = 10.0;
  double g = 4.0;

  void add(CLI::App* app) {
    app->add_option("--spec", spec_file, "GMMUB spec JSON (a generate sidecar also works)");
    app->add_option("--k", k, "number of Gaussian clusters");
    app->add_option("--d", d, "dimension");
    app->add_option("--sigmas", sigmas, "cluster standard deviations")->delimiter(',');
    app->add_option("--pi", pi, "weight of each cluster");
    app->add_option("--D", ball_scale, "background ball scale (radius D sqrt(d))");
    app->add_option("--sigma-max", sigma_max, "loss bandwidth");
    app->add_option("--g", g, "loss truncation constant");
  }

  LossConfig loss() const {
    LossConfig cfg{g, sigma_max};
    cfg.validate();
    return cfg;
  }

  GmmubSpec build() const {
    if (!spec_file.empty()) {
      const json j = read_json(spec_file);
      return spec_from_json(j.contains("spec") ? j.at("spec") : j);
    }
    std::vector<double> s = sigmas;
    if (s.size() != k) {
      // One value broadcasts to every cluster; anything else must match k.
      if (s.size() != 1) throw UsageError("--sigmas needs 1 or k values");
      s.assign(k, s.front());
    }
    return default_experiment_spec(k, d, s, pi, loss(), ball_scale);
  }
};

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = base + i;
  return out;
}

void emit(const std::string& out, const json& j) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_json(out, j);
  }
}

// CSV with the resolved configuration as a leading '#' comment line.
void emit_csv(const std::string& out, const json& config, const std::string& body) {
  const std::string text = "# " + config.dump() + "\n" + body;
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

json header(const std::string& command) { return {{"schema_version", kSchemaVersion}, {"command", command}}; }

DataMatrix load_data(const std::string& path, const std::string& labels_path) {
  Matrix m = read_matrix_csv(path);
  if (labels_path.empty()) return DataMatrix(std::move(m));
  Labels labels = read_labels(labels_path);
  if (labels.size() != static_cast<std::size_t>(m.rows())) {
    throw IoError(labels_path + ": " + std::to_string(labels.size()) + " labels for " +
                  std::to_string(m.rows()) + " rows");
  }
  return DataMatrix(std::move(m), std::move(labels));
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust loss clustering for Gaussian mixtures on a uniform background"};
  app.require_subcommand(1);
  unsigned threads = thread_budget();

  // generate
  auto* gen = app.add_subcommand("generate", "sample a GMMUB data set");
  SpecOptions gen_spec;
  gen_spec.add(gen);
  std::size_t gen_n = 10'000;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "number of observations");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output prefix: writes PREFIX.csv, PREFIX.labels, PREFIX.json")->required();

  // cluster
  auto* clu = app.add_subcommand("cluster", "run CRLM on a CSV data file");
  std::string clu_data, clu_labels, clu_out;
  double clu_sigma = 0.0, clu_g = 4.0;
  std::size_t clu_kmax = 10, clu_min = 1;
  clu->add_option("data", clu_data, "data CSV")->required();
  clu->add_option("--labels", clu_labels, "ground-truth labels file; adds metrics");
  clu->add_option("--sigma-max", clu_sigma, "loss bandwidth")->required();
  clu->add_option("--g", clu_g, "loss truncation constant");
  clu->add_option("--k-max", clu_kmax, "maximum number of clusters");
  clu->add_option("--min-cluster-size", clu_min, "stop at clusters of at most this size");
  clu->add_option("--out", clu_out, "result JSON (default stdout)");

  // convergence
  auto* conv = app.add_subcommand("convergence", "mean center error vs n for several algorithms");
  SpecOptions conv_spec;
  conv_spec.add(conv);
  std::vector<double> conv_n{1e3, std::pow(10.0, 3.5), 1e4, std::pow(10.0, 4.5), 1e5};
  std::size_t conv_seeds = 20, conv_kmax = 0;
  std::uint64_t conv_seed = 0;
  std::vector<std::string> conv_alg{"crlm", "kmeans++", "supervised"};
  std::string conv_out, conv_runs;
  conv->add_option("--n", conv_n, "sample sizes")->delimiter(',');
  conv->add_option("--seeds", conv_seeds, "repetitions per n");
  conv->add_option("--seed", conv_seed, "first seed");
  conv->add_option("--algorithms", conv_alg, "crlm, kmeans++, supervised")->delimiter(',');
  conv->add_option("--k-max", conv_kmax, "CRLM cluster cap (default k)");
  conv->add_option("--out", conv_out, "summary CSV (default stdout)");
  conv->add_option("--runs-out", conv_runs, "per-run CSV");

  // sweep-sigma
  auto* sweep = app.add_subcommand("sweep-sigma", "F-measure and Rand index vs sigma_max");
  SpecOptions sweep_spec;
  sweep_spec.add(sweep);
  std::size_t sweep_n = 10'000, sweep_seeds = 20, sweep_kmax = 0;
  std::uint64_t sweep_seed = 0;
  std::vector<double> sweep_grid;
  double sweep_floor = 0.99;
  std::string sweep_out;
  sweep->add_option("--n", sweep_n, "number of observations");
  sweep->add_option("--seeds", sweep_seeds, "repetitions");
  sweep->add_option("--seed", sweep_seed, "first seed");
  sweep->add_option("--grid", sweep_grid, "sigma_max values")->delimiter(',')->required();
  sweep->add_option("--k-max", sweep_kmax, "CRLM cluster cap (default k)");
  sweep->add_option("--prob-floor", sweep_floor, "theorem probability floor of the theory region");
  sweep->add_option("--out", sweep_out, "CSV (default stdout)");

  // sweep-k
  auto* ksw = app.add_subcommand("sweep-k", "estimated k vs n");
  SpecOptions ksw_spec;
  ksw_spec.add(ksw);
  std::vector<std::size_t> ksw_n{50, 100, 200, 400, 800, 1600, 3200};
  std::size_t ksw_seeds = 20, ksw_cap = 10;
  std::uint64_t ksw_seed = 0;
  std::string ksw_out;
  ksw->add_option("--n", ksw_n, "sample sizes")->delimiter(',');
  ksw->add_option("--seeds", ksw_seeds, "repetitions");
  ksw->add_option("--seed", ksw_seed, "first seed");
  ksw->add_option("--k-max", ksw_cap, "cluster cap");
  ksw->add_option("--out", ksw_out, "CSV (default stdout)");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "theoretical probability bounds");
  SpecOptions bnd_spec;
  bnd_spec.add(bnd);
  double bnd_n = 1e4;
  std::string bnd_out;
  bnd->add_option("--n", bnd_n, "sample size (any positive real)");
  bnd->add_option("--out", bnd_out, "JSON (default stdout)");

  // region
  auto* reg = app.add_subcommand("region", "feasible sigma_max interval along d, n or G");
  SpecOptions reg_spec;
  reg_spec.add(reg);
  std::string reg_axis = "d", reg_out;
  std::vector<double> reg_values;
  double reg_n = 1e4, reg_floor = 0.99;
  reg->add_option("--axis", reg_axis, "d, n or G")->check(CLI::IsMember({"d", "n", "G"}));
  reg->add_option("--values", reg_values, "axis values")->delimiter(',')->required();
  reg->add_option("--n", reg_n, "sample size (when the axis is not n)");
  reg->add_option("--prob-floor", reg_floor, "theorem probability floor");
  reg->add_option("--out", reg_out, "CSV (default stdout)");

  // estimate
  auto* est = app.add_subcommand("estimate", "estimate cluster sigmas, sigma_max and k from data");
  std::string est_data, est_out, est_hist;
  SigmaEstimateOptions est_opts;
  double est_factor = kDefaultSigmaMaxFactor, est_g = 4.0;
  std::size_t est_cap = 10, est_min = 1;
  est->add_option("data", est_data, "data CSV")->required();
  est->add_option("--quantile", est_opts.quantile, "fraction of shortest distances kept");
  est->add_option("--bins", est_opts.bins, "histogram bins (0 = Freedman-Diaconis)");
  est->add_option("--seed", est_opts.seed, "seed for pair subsampling");
  est->add_option("--factor", est_factor, "sigma_max = factor * largest sigma");
  est->add_option("--g", est_g, "loss truncation constant");
  est->add_option("--k-max", est_cap, "cluster cap for k estimation");
  est->add_option("--min-cluster-size", est_min, "singleton-stop size");
  est->add_option("--histogram-out", est_hist, "histogram CSV");
  est->add_option("--out", est_out, "JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) {
      const GmmubSpec spec = gen_spec.build();
      const DataMatrix data = sample_gmmub(spec, gen_n, gen_seed);
      write_matrix_csv(gen_out + ".csv", data.values());
      write_labels(gen_out + ".labels", data.labels());
      json side = header("generate");
      side["seed"] = gen_seed;
      side["n"] = gen_n;
      side["spec"] = to_json(spec);
      side["loss"] = to_json(gen_spec.loss());
      write_json(gen_out + ".json", side);
      return kOk;
    }

    if (*clu) {
      if (!fs::exists(clu_data)) throw IoError("no such file: " + clu_data);
      const DataMatrix data = load_data(clu_data, clu_labels);
      if (data.empty()) throw UsageError("data file has no rows");
      const LossConfig cfg{clu_g, clu_sigma};
      cfg.validate();
      ScanOptions opts;
      opts.threads = threads;
      const ClusteringResult r = crlm::crlm(data, clu_kmax, cfg, clu_min, opts);
      json out = header("cluster");
      out["config"] = {{"data", clu_data}, {"loss", to_json(cfg)}, {"k_max", clu_kmax},
                       {"min_cluster_size", clu_min}};
      out["result"] = to_json(r);
      if (data.has_labels()) {
        const int k = std::max(1, data.max_label());
        out["metrics"] = {{"f_measure", f_measure_avg(data.labels(), r.assignment, k)},
                          {"rand_index", rand_index(data.labels(), r.assignment)},
                          {"purity", purity(data.labels(), r.assignment)}};
      }
      emit(clu_out, out);
      return kOk;
    }

    if (*conv) {
      ConvergenceRequest req;
      req.spec = conv_spec.build();
      req.cfg = conv_spec.loss();
      for (double n : conv_n) {
        if (!(n >= 1.0)) throw UsageError("--n values must be >= 1");
        req.n_grid.push_back(static_cast<std::size_t>(std::llround(n)));
      }
      req.seeds = seed_list(conv_seed, conv_seeds);
      req.algorithms.clear();
      for (const auto& a : conv_alg) req.algorithms.push_back(algorithm_from_name(a));
      req.k_max = conv_kmax;
      req.threads = threads;
      const auto rows = run_convergence(req);
      json config = header("convergence");
      config["spec"] = to_json(req.spec);
      config["loss"] = to_json(req.cfg);
      config["seeds"] = req.seeds;
      config["k_max"] = conv_kmax ? conv_kmax : req.spec.k;
      std::ostringstream body;
      body << "algorithm,n,log10_n,mean_error,log10_mean_error,unmatched_runs\n";
      for (const auto& s : summarize_convergence(rows)) {
        body << algorithm_name(s.algorithm) << ',' << fmt(s.n) << ',' << fmt(std::log10(s.n)) << ','
             << fmt(s.mean_error) << ',' << fmt(std::log10(s.mean_error)) << ',' << s.unmatched_runs << '\n';
      }
      emit_csv(conv_out, config, body.str());
      if (!conv_runs.empty()) {
        std::ostringstream runs;
        runs << "algorithm,n,seed,error,unmatched\n";
        for (const auto& r : rows) {
          runs << algorithm_name(r.algorithm) << ',' << fmt(r.n) << ',' << r.seed << ',' << fmt(r.error) << ','
               << (r.unmatched ? 1 : 0) << '\n';
        }
        emit_csv(conv_runs, config, runs.str());
      }
      return kOk;
    }

    if (*sweep) {
      SigmaSweepRequest req;
      req.spec = sweep_spec.build();
      req.n = sweep_n;
      req.g = sweep_spec.g;
      req.sigma_grid = sweep_grid;
      req.seeds = seed_list(sweep_seed, sweep_seeds);
      req.k_max = sweep_kmax;
      req.prob_floor = sweep_floor;
      req.threads = threads;
      const auto res = run_sigma_sweep(req);
      json config = header("sweep-sigma");
      config["spec"] = to_json(req.spec);
      config["n"] = req.n;
      config["G"] = req.g;
      config["seeds"] = req.seeds;
      config["theory"] = {{"empty", res.theory.empty}, {"sigma_lo", res.theory.sigma_lo},
                          {"sigma_hi", res.theory.sigma_hi}, {"limiting", res.theory.limiting},
                          {"prob_floor", req.prob_floor}};
      std::ostringstream body;
      body << "sigma_max,mean_f,mean_rand,min_f,in_theory_region\n";
      for (const auto& r : res.rows) {
        body << fmt(r.sigma_max) << ',' << fmt(r.mean_f) << ',' << fmt(r.mean_rand) << ',' << fmt(r.min_f) << ','
             << (r.in_theory_region ? 1 : 0) << '\n';
      }
      emit_csv(sweep_out, config, body.str());
      return kOk;
    }

    if (*ksw) {
      const GmmubSpec spec = ksw_spec.build();
      const auto seeds = seed_list(ksw_seed, ksw_seeds);
      const auto rows = run_k_sweep(spec, ksw_spec.loss(), ksw_n, seeds, ksw_cap, threads);
      json config = header("sweep-k");
      config["spec"] = to_json(spec);
      config["loss"] = to_json(ksw_spec.loss());
      config["seeds"] = seeds;
      config["k_max"] = ksw_cap;
      std::ostringstream body;
      body << "n,mean_k\n";
      for (const auto& r : rows) body << r.n << ',' << fmt(r.mean_k) << '\n';
      emit_csv(ksw_out, config, body.str());
      return kOk;
    }

    if (*bnd) {
      const GmmubSpec spec = bnd_spec.build();
      const LossConfig cfg = bnd_spec.loss();
      const BoundReport rep = bound_report(spec, cfg, bnd_n);
      json out = header("bounds");
      out["spec"] = to_json(spec);
      out["loss"] = to_json(cfg);
      out["n"] = bnd_n;
      out["report"] = to_json(rep);
      emit(bnd_out, out);
      const auto& a = rep.assumptions;
      const bool feasible = a.a1 && a.a3 && (spec.k < 2 || a.a2) && !rep.prob_thm2.condition_violated;
      return feasible ? kOk : kFlagged;
    }

    if (*reg) {
      RegionRequest req;
      req.spec = reg_spec.build();
      req.n = reg_n;
      req.g = reg_spec.g;
      req.prob_floor = reg_floor;
      req.axis = reg_axis == "d" ? SweepAxis::kDimension : reg_axis == "n" ? SweepAxis::kSampleSize : SweepAxis::kG;
      req.axis_values = reg_values;
      const auto rows = feasible_sigma_region(req);
      json config = header("region");
      config["spec"] = to_json(req.spec);
      config["axis"] = reg_axis;
      config["n"] = req.n;
      config["G"] = req.g;
      config["prob_floor"] = req.prob_floor;
      emit_csv(reg_out, config, region_csv(rows));
      return kOk;
    }

    if (*est) {
      if (!fs::exists(est_data)) throw IoError("no such file: " + est_data);
      const DataMatrix data(read_matrix_csv(est_data));
      const SigmaEstimate s = estimate_sigmas(data, est_opts);
      json out = header("estimate");
      out["config"] = {{"data", est_data},          {"quantile", est_opts.quantile}, {"bins", est_opts.bins},
                       {"seed", est_opts.seed},      {"factor", est_factor},          {"G", est_g},
                       {"k_max", est_cap},           {"min_cluster_size", est_min},
                       {"max_pairs", est_opts.max_pairs}};
      out["sigmas"] = s.peaks;
      out["pairs_used"] = s.pairs_used;
      out["subsampled"] = s.subsampled;
      if (!est_hist.empty()) write_text(est_hist, histogram_csv(s.histogram));
      if (s.peaks.empty()) {
        out["suggested_sigma_max"] = nullptr;
        out["k_hat"] = nullptr;
        emit(est_out, out);
        return kFlagged;
      }
      const double sigma_max = suggest_sigma_max(s.peaks, est_factor);
      ScanOptions opts;
      opts.threads = threads;
      out["suggested_sigma_max"] = sigma_max;
      out["k_hat"] = estimate_k(data, LossConfig{est_g, sigma_max}, est_cap, est_min, opts);
      emit(est_out, out);
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
