#include "crlm/datagen.hpp"

#include "crlm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace crlm {

namespace {

constexpr std::uint64_t kComponentStream = 0;

// Fills `out` with a uniform point in the ball of the given radius.
void draw_in_ball(Rng& rng, double radius, std::span<double> out) {
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto& v : out) {
      v = rng.normal();
      sq += v * v;
    }
  } while (sq == 0.0);
  const double d = static_cast<double>(out.size());
  const double r = radius * std::pow(rng.uniform(), 1.0 / d) / std::sqrt(sq);
  for (auto& v : out) v *= r;
}

}  // namespace

double GmmubSpec::ball_radius() const { return ball_scale * std::sqrt(static_cast<double>(d)); }

void GmmubSpec::validate() const {
  if (d == 0) throw std::invalid_argument("GmmubSpec: d must be >= 1");
  if (!(ball_scale > 0.0) || !std::isfinite(ball_scale)) {
    throw std::invalid_argument("GmmubSpec: D must be positive");
  }
  if (weights.size() != k + 1) throw std::invalid_argument("GmmubSpec: need k + 1 weights");
  if (sigmas.size() != k) throw std::invalid_argument("GmmubSpec: need k sigmas");
  if (static_cast<std::size_t>(means.rows()) != k || (k > 0 && static_cast<std::size_t>(means.cols()) != d)) {
    throw std::invalid_argument("GmmubSpec: means must be k x d");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("GmmubSpec: weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("GmmubSpec: weights must sum to 1");
  for (double s : sigmas) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("GmmubSpec: sigmas must be > 0");
  }
  if (!means.allFinite()) throw std::invalid_argument("GmmubSpec: non-finite mean");
  for (std::size_t j = 0; j < k; ++j) {
    if (means.row(static_cast<Eigen::Index>(j)).norm() > ball_radius()) {
      throw std::invalid_argument("GmmubSpec: mean " + std::to_string(j + 1) + " lies outside the ball");
    }
  }
}

GmmubSpec default_experiment_spec(std::size_t k, std::size_t d, std::vector<double> sigmas,
                                  double cluster_weight, const LossConfig& cfg,
                                  std::optional<double> ball_scale) {
  cfg.validate();
  if (d == 0) throw std::invalid_argument("default_experiment_spec: d must be >= 1");
  if (k > 2 * d) throw std::invalid_argument("default_experiment_spec: k must be <= 2d");
  if (sigmas.size() != k) throw std::invalid_argument("default_experiment_spec: need k sigmas");
  if (!(cluster_weight >= 0.0) || cluster_weight * static_cast<double>(k) > 1.0) {
    throw std::invalid_argument("default_experiment_spec: cluster weights exceed 1");
  }
  const double dd = static_cast<double>(d);
  const double sep = 2.0 * cfg.sigma_max * std::sqrt(dd * cfg.g);  // A2 threshold
  // a lone cluster sits at the origin, several are pushed apart along axes
  const double offset = k > 1 ? 2.0 * sep / std::sqrt(2.0) : 0.0;

  GmmubSpec spec;
  spec.k = k;
  spec.d = d;
  spec.sigmas = std::move(sigmas);
  spec.weights.assign(k, cluster_weight);
  spec.weights.push_back(1.0 - cluster_weight * static_cast<double>(k));
  spec.means = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < k; ++j) {
    const double sign = (j < d) ? 1.0 : -1.0;
    spec.means(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j % d)) = sign * offset;
  }
  const double a1_first = 2.0 * cfg.sigma_max * std::sqrt(cfg.g);
  const double a1_second = (offset + sep) / std::sqrt(dd);
  spec.ball_scale = ball_scale.value_or(2.0 * std::max(a1_first, a1_second));
  spec.validate();
  return spec;
}

DataMatrix sample_uniform_ball(std::size_t count, std::size_t d, double radius, std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("sample_uniform_ball: d must be >= 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("sample_uniform_ball: radius must be > 0");
  }
  Matrix m(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(d));
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    draw_in_ball(rng, radius, {m.data() + i * d, d});
  }
  return DataMatrix(std::move(m));
}

DataMatrix sample_gmmub(const GmmubSpec& spec, std::size_t n, std::uint64_t seed) {
  spec.validate();
  const std::size_t k = spec.k;
  const std::size_t d = spec.d;
  Rng pick = Rng::substream(seed, kComponentStream);
  std::vector<Rng> streams;
  streams.reserve(k + 1);
  // Stream j + 1 for cluster j; the background uses a fixed id far from the
  // cluster ids so it does not move when k changes.
  for (std::size_t j = 0; j < k; ++j) streams.push_back(Rng::substream(seed, j + 1));
  streams.push_back(Rng::substream(seed, 0xB6C0FFEEULL));

  std::vector<double> cumulative(k + 1);
  std::partial_sum(spec.weights.begin(), spec.weights.end(), cumulative.begin());

  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Labels labels(n);
  const double radius = spec.ball_radius();
  for (std::size_t i = 0; i < n; ++i) {
    const double u = pick.uniform() * cumulative.back();
    std::size_t comp = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
    comp = std::min(comp, k);
    double* row = m.data() + i * d;
    if (comp == k) {
      draw_in_ball(streams[k], radius, {row, d});
      labels[i] = 0;
    } else {
      Rng& rng = streams[comp];
      const double s = spec.sigmas[comp];
      for (std::size_t c = 0; c < d; ++c) {
        row[c] = spec.means(static_cast<Eigen::Index>(comp), static_cast<Eigen::Index>(c)) + s * rng.normal();
      }
      labels[i] = static_cast<int>(comp + 1);
    }
  }
  return DataMatrix(std::move(m), std::move(labels));
}

AssumptionReport check_assumptions(const GmmubSpec& spec, const LossConfig& cfg) {
  cfg.validate();
  spec.validate();
  AssumptionReport rep;
  const double dd = static_cast<double>(spec.d);
  const double sqrt_dg = std::sqrt(dd * cfg.g);
  const double two_r = 2.0 * cfg.sigma_max * sqrt_dg;
  auto add = [&](std::string name, double lhs, double rhs) {
    Clause c{std::move(name), lhs > rhs, lhs - rhs};
    rep.clauses.push_back(c);
    return c.holds;
  };

  rep.a1 = add("A1:D", spec.ball_scale, 2.0 * cfg.sigma_max * std::sqrt(cfg.g));
  for (std::size_t j = 0; j < spec.k; ++j) {
    const double norm = spec.means.row(static_cast<Eigen::Index>(j)).norm();
    rep.a1 = add("A1:mu" + std::to_string(j + 1), spec.ball_radius(), norm + two_r) && rep.a1;
  }
  rep.a2 = true;
  for (std::size_t l = 0; l < spec.k; ++l) {
    for (std::size_t j = l + 1; j < spec.k; ++j) {
      const double dist =
          (spec.means.row(static_cast<Eigen::Index>(l)) - spec.means.row(static_cast<Eigen::Index>(j))).norm();
      rep.a2 = add("A2:mu" + std::to_string(l + 1) + ",mu" + std::to_string(j + 1), dist, two_r) && rep.a2;
    }
  }
  rep.a3 = true;
  for (std::size_t j = 0; j < spec.k; ++j) {
    rep.a3 = add("A3:sigma" + std::to_string(j + 1), cfg.sigma_max, 2.0 * spec.sigmas[j]) && rep.a3;
  }
  return rep;
}

AssumptionReport check_conditions(const DataMatrix& data, const GmmubSpec& spec,
                                  const LossConfig& cfg) {
  if (!data.has_labels()) throw std::invalid_argument("check_conditions: data has no labels");
  if (data.dim() != spec.d) throw std::invalid_argument("check_conditions: dimension mismatch");
  AssumptionReport rep = check_assumptions(spec, cfg);
  const auto& labels = data.labels();
  const std::size_t d = data.dim();
  const double dg = static_cast<double>(d) * cfg.g;

  IndexSet pos, neg;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) > spec.k) {
      throw std::invalid_argument("check_conditions: label outside 0..k");
    }
    (labels[i] == 0 ? neg : pos).push_back(i);
  }

  double min_sq = std::numeric_limits<double>::infinity();
  for (auto a : neg) {
    for (auto b : pos) min_sq = std::min(min_sq, squared_distance(data.row(a).data(), data.row(b).data(), d));
  }
  rep.c1_min_distance = std::sqrt(min_sq);
  rep.c1 = min_sq >= cfg.radius_sq(d);

  bool c2 = true;
  double worst = 0.0;
  for (auto i : pos) {
    const std::size_t j = static_cast<std::size_t>(labels[i] - 1);
    const double sq = squared_distance(data.row(i).data(), spec.means.row(static_cast<Eigen::Index>(j)).data(), d);
    const double lim = spec.sigmas[j] * spec.sigmas[j] * dg;
    c2 = c2 && (sq < lim);
    worst = std::max(worst, std::sqrt(sq / lim));
  }
  rep.c2 = c2;
  rep.c2_max_ratio = worst;
  return rep;
}

}  // namespace crlm
