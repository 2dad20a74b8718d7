#include "crlm/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace crlm {

namespace {

ProbabilityBound combine(std::vector<double> log_terms) {
  ProbabilityBound b;
  double sum = 0.0;
  for (double lt : log_terms) sum += std::exp(lt);
  b.raw = 1.0 - sum;
  b.clamped = !(b.raw >= 0.0 && b.raw <= 1.0);
  b.value = std::clamp(b.raw, 0.0, 1.0);
  if (std::isnan(b.raw)) b.value = 0.0;
  b.log_terms = std::move(log_terms);
  return b;
}

ProbabilityBound violated() {
  ProbabilityBound b;
  b.condition_violated = true;
  b.clamped = true;
  b.raw = 0.0;
  b.value = 0.0;
  return b;
}

void check_n(double n) {
  if (!(n >= 1.0) || !std::isfinite(n)) throw std::invalid_argument("sample size must be >= 1 and finite");
}

double dim(const GmmubSpec& spec) { return static_cast<double>(spec.d); }

// ln((2 sigma_max sqrt(G) / D)^d)
double log_pair_volume_ratio(const GmmubSpec& spec, const LossConfig& cfg) {
  return dim(spec) * std::log(2.0 * cfg.sigma_max * std::sqrt(cfg.g) / spec.ball_scale);
}

double log_chi_tail(const GmmubSpec& spec, const LossConfig& cfg) {
  return -dim(spec) * (cfg.g - 1.0) * (cfg.g - 1.0) / 8.0;
}

// min_j W_j and whether every W_j > 0.
std::pair<double, bool> min_margin(const GmmubSpec& spec, const LossConfig& cfg) {
  double w_min = std::numeric_limits<double>::infinity();
  bool ok = spec.k > 0;
  for (std::size_t j = 1; j <= spec.k; ++j) {
    const double w = margin_w(spec, cfg, j);
    ok = ok && w > 0.0;
    w_min = std::min(w_min, w);
  }
  return {w_min, ok};
}

void check_cluster(const GmmubSpec& spec, std::size_t j) {
  if (j < 1 || j > spec.k) throw std::invalid_argument("cluster index must be in 1..k");
}

}  // namespace

double log_volume_ratio(const GmmubSpec& spec, const LossConfig& cfg) {
  return dim(spec) * std::log(cfg.sigma_max * std::sqrt(cfg.g) / spec.ball_scale);
}

double margin_w(const GmmubSpec& spec, const LossConfig& cfg, std::size_t j) {
  check_cluster(spec, j);
  const double g = cfg.g;
  const double s2 = spec.sigmas[j - 1] * spec.sigmas[j - 1] / (cfg.sigma_max * cfg.sigma_max);
  const double positive = spec.weights[j - 1] * (g - (1.0 + g) * s2);
  const double background =
      spec.background_weight() * std::exp(log_volume_ratio(spec, cfg)) * g / (dim(spec) / 2.0 + 1.0);
  return positive - background;
}

std::optional<double> weight_threshold(const GmmubSpec& spec, const LossConfig& cfg, std::size_t j) {
  check_cluster(spec, j);
  const double g = cfg.g;
  const double s2 = spec.sigmas[j - 1] * spec.sigmas[j - 1] / (cfg.sigma_max * cfg.sigma_max);
  const double a = g - (1.0 + g) * s2;
  if (!(a > 0.0)) return std::nullopt;
  const double t = g / (dim(spec) / 2.0 + 1.0) * std::exp(log_volume_ratio(spec, cfg));
  const double free_mass = spec.weights[j - 1] + spec.background_weight();
  return free_mass * t / (a + t);
}

ProbabilityBound conditions_prob(const GmmubSpec& spec, const LossConfig& cfg, double n) {
  check_n(n);
  const double ln_n = std::log(n);
  const double k = static_cast<double>(spec.k);
  std::vector<double> terms{std::log(2.0) + ln_n + log_chi_tail(spec, cfg)};
  if (spec.k > 0) terms.push_back(ln_n + std::log(k) + log_pair_volume_ratio(spec, cfg));
  return combine(std::move(terms));
}

ProbabilityBound success_prob_thm1(const GmmubSpec& spec, const LossConfig& cfg, double n) {
  check_n(n);
  if (spec.k != 1) throw std::invalid_argument("success_prob_thm1: needs exactly one cluster");
  const double w = margin_w(spec, cfg, 1);
  if (!(w > 0.0)) return violated();
  const double ln_n = std::log(n);
  const double g = cfg.g;
  return combine({std::log(2.0) + ln_n - n * w * w / (2.0 * g * g),
                  std::log(2.0) + ln_n + log_chi_tail(spec, cfg),
                  ln_n + log_pair_volume_ratio(spec, cfg)});
}

ProbabilityBound success_prob_thm2(const GmmubSpec& spec, const LossConfig& cfg, double n) {
  check_n(n);
  const auto [w_min, ok] = min_margin(spec, cfg);
  if (!ok) return violated();
  const double ln_n = std::log(n);
  const double ln_k = std::log(static_cast<double>(spec.k));
  const double g = cfg.g;
  return combine({std::log(2.0) + ln_n + ln_k - n * w_min * w_min / (2.0 * g * g),
                  ln_n + ln_k + log_pair_volume_ratio(spec, cfg),
                  std::log(2.0) + ln_n + log_chi_tail(spec, cfg)});
}

MeanAccuracyBound success_prob_cor1(const GmmubSpec& spec, const LossConfig& cfg, double n) {
  check_n(n);
  MeanAccuracyBound out;
  if (spec.k == 0) throw std::invalid_argument("success_prob_cor1: needs at least one cluster");
  const double max_s2 = std::pow(*std::max_element(spec.sigmas.begin(), spec.sigmas.end()), 2);
  const double min_pi = *std::min_element(spec.weights.begin(), spec.weights.end() - 1);
  out.radius_sq = 4.0 * dim(spec) * max_s2 / (n * min_pi);

  const auto [w_min, ok] = min_margin(spec, cfg);
  if (!ok) {
    out.prob = violated();
    return out;
  }
  const double ln_n = std::log(n);
  const double ln_k = std::log(static_cast<double>(spec.k));
  const double g = cfg.g;
  std::vector<double> terms;
  terms.push_back(std::log(2.0) + ln_n + ln_k - n * w_min * w_min / (2.0 * g * g));
  for (std::size_t j = 0; j < spec.k; ++j) {
    const double ratio =
        2.0 * spec.weights[j] * max_s2 / (spec.sigmas[j] * spec.sigmas[j] * min_pi) - 1.0;
    terms.push_back(std::log(2.0) - dim(spec) / 8.0 * ratio * ratio);
  }
  for (std::size_t j = 0; j < spec.k; ++j) {
    terms.push_back(-n * spec.weights[j] * spec.weights[j] / 2.0);
  }
  terms.push_back(ln_n + ln_k + log_pair_volume_ratio(spec, cfg));
  terms.push_back(std::log(2.0) + ln_n + log_chi_tail(spec, cfg));
  out.prob = combine(std::move(terms));
  return out;
}

LargeSampleRegime large_sample_regime(const GmmubSpec& spec, const LossConfig& cfg) {
  LargeSampleRegime r;
  r.c = std::min((cfg.g - 1.0) * (cfg.g - 1.0) / 8.0,
                 std::log(spec.ball_scale / (2.0 * cfg.sigma_max * std::sqrt(cfg.g))));
  r.log_n_max = r.c * dim(spec) / 2.0;
  return r;
}

std::optional<double> min_n_for_cor1(const GmmubSpec& spec, const LossConfig& cfg, double target,
                                     double log_n_cap) {
  auto ok = [&](double ln_n) { return success_prob_cor1(spec, cfg, std::exp(ln_n)).prob.value >= target; };
  constexpr double kStep = 0.05;
  double prev = 0.0;
  if (ok(0.0)) return 1.0;
  for (double ln_n = kStep; ln_n <= log_n_cap; ln_n += kStep) {
    if (ok(ln_n)) {
      double lo = prev, hi = ln_n;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
      }
      return std::exp(hi);
    }
    prev = ln_n;
  }
  return std::nullopt;
}

double uniform_loss_mean(std::size_t d, double g) {
  if (d == 0) throw std::invalid_argument("uniform_loss_mean: d must be >= 1");
  return -g / (static_cast<double>(d) / 2.0 + 1.0);
}

double gaussian_loss_mean_bound(double sigma_1, double sigma_max, double g) {
  return sigma_1 * sigma_1 / (sigma_max * sigma_max) - g;
}

BoundReport bound_report(const GmmubSpec& spec, const LossConfig& cfg, double n) {
  cfg.validate();
  spec.validate();
  BoundReport r;
  for (std::size_t j = 1; j <= spec.k; ++j) {
    r.w_values.push_back(margin_w(spec, cfg, j));
    r.weight_thresholds.push_back(weight_threshold(spec, cfg, j));
  }
  r.prob_prop1 = conditions_prob(spec, cfg, n);
  if (spec.k == 1) r.prob_thm1 = success_prob_thm1(spec, cfg, n);
  if (spec.k > 0) {
    r.prob_thm2 = success_prob_thm2(spec, cfg, n);
    auto cor1 = success_prob_cor1(spec, cfg, n);
    r.prob_cor1 = std::move(cor1.prob);
    r.cor1_radius_sq = cor1.radius_sq;
  }
  r.cor2_c = large_sample_regime(spec, cfg).c;
  r.assumptions = check_assumptions(spec, cfg);
  return r;
}

std::string first_failing_constraint(const GmmubSpec& spec, const LossConfig& cfg, double n,
                                     double prob_floor) {
  const auto rep = check_assumptions(spec, cfg);
  if (!rep.a3) return "A3";
  if (!rep.a1) return "A1";
  if (spec.k > 1 && !rep.a2) return "A2";
  if (!min_margin(spec, cfg).second) return "weight";
  const auto prob = spec.k == 1 ? success_prob_thm1(spec, cfg, n) : success_prob_thm2(spec, cfg, n);
  if (!(prob.value >= prob_floor)) return "theorem";
  return "";
}

GmmubSpec rescale_dimension(const GmmubSpec& spec, std::size_t d) {
  if (d == 0) throw std::invalid_argument("rescale_dimension: d must be >= 1");
  GmmubSpec out = spec;
  out.d = d;
  out.means = Matrix::Zero(static_cast<Eigen::Index>(spec.k), static_cast<Eigen::Index>(d));
  const double stretch = std::sqrt(static_cast<double>(d) / static_cast<double>(spec.d));
  for (std::size_t j = 0; j < spec.k; ++j) {
    for (std::size_t c = 0; c < spec.d; ++c) {
      const double v = spec.means(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c));
      if (v == 0.0) continue;
      if (c >= d) throw std::invalid_argument("rescale_dimension: mean uses a dropped coordinate");
      out.means(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = v * stretch;
    }
  }
  return out;
}

std::vector<RegionRow> feasible_sigma_region(const RegionRequest& req) {
  if (req.axis_values.empty()) throw std::invalid_argument("feasible_sigma_region: empty axis grid");
  req.spec.validate();
  if (req.spec.k == 0) throw std::invalid_argument("feasible_sigma_region: needs at least one cluster");
  const double max_sigma = *std::max_element(req.spec.sigmas.begin(), req.spec.sigmas.end());

  std::vector<RegionRow> rows;
  for (double axis_value : req.axis_values) {
    GmmubSpec spec = req.spec;
    double n = req.n;
    double g = req.g;
    switch (req.axis) {
      case SweepAxis::kDimension:
        spec = rescale_dimension(req.spec, static_cast<std::size_t>(std::llround(axis_value)));
        break;
      case SweepAxis::kSampleSize:
        n = axis_value;
        break;
      case SweepAxis::kG:
        g = axis_value;
        break;
    }
    LossConfig cfg{g, 1.0};
    cfg.validate();

    std::vector<double> grid = req.sigma_grid;
    if (grid.empty()) {
      const double lo = max_sigma;
      const double hi = std::max(spec.ball_scale / std::sqrt(g), 4.0 * max_sigma);
      constexpr int kPoints = 200;
      for (int i = 0; i < kPoints; ++i) {
        grid.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (kPoints - 1)));
      }
    }
    if (!std::is_sorted(grid.begin(), grid.end())) {
      throw std::invalid_argument("feasible_sigma_region: sigma grid must be ascending");
    }
    auto failing = [&](double sigma) {
      LossConfig c{g, sigma};
      return first_failing_constraint(spec, c, n, req.prob_floor);
    };
    auto refine = [&](double feasible, double infeasible) {
      while (std::abs(infeasible - feasible) > req.refine_rel_width * feasible) {
        const double mid = 0.5 * (feasible + infeasible);
        (failing(mid).empty() ? feasible : infeasible) = mid;
      }
      return std::pair{feasible, infeasible};
    };

    RegionRow row;
    row.axis_value = axis_value;
    std::vector<std::string> names;
    names.reserve(grid.size());
    for (double s : grid) names.push_back(failing(s));
    std::size_t first = grid.size();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (names[i].empty()) {
        first = i;
        break;
      }
    }
    if (first == grid.size()) {
      row.limiting = "A3";
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (names[i] != "A3") {
          row.limiting = names[i];
          break;
        }
      }
      rows.push_back(row);
      continue;
    }
    std::size_t last = first;
    while (last + 1 < grid.size() && names[last + 1].empty()) ++last;
    row.empty = false;
    row.sigma_lo = first == 0 ? grid[0] : refine(grid[first], grid[first - 1]).first;
    if (last + 1 == grid.size()) {
      row.sigma_hi = grid[last];
      row.limiting = "grid";
    } else {
      const auto [ok, bad] = refine(grid[last], grid[last + 1]);
      row.sigma_hi = ok;
      row.limiting = failing(bad);
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace crlm
