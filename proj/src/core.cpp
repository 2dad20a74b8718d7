#include "crlm/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace crlm {

namespace {

void require_finite(const Matrix& m) {
  if (!m.allFinite()) throw std::invalid_argument("DataMatrix: non-finite entry");
}

}  // namespace

DataMatrix::DataMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.cols() < 1) throw std::invalid_argument("DataMatrix: dimension must be >= 1");
  require_finite(values_);
}

DataMatrix::DataMatrix(Matrix values, Labels labels) : DataMatrix(std::move(values)) {
  if (labels.size() != rows()) {
    throw std::invalid_argument("DataMatrix: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(rows()) + " rows");
  }
  if (std::any_of(labels.begin(), labels.end(), [](int l) { return l < 0; })) {
    throw std::invalid_argument("DataMatrix: labels must be >= 0");
  }
  labels_ = std::move(labels);
}

const Labels& DataMatrix::labels() const {
  if (!labels_) throw std::invalid_argument("DataMatrix: no labels attached");
  return *labels_;
}

int DataMatrix::max_label() const {
  if (!labels_ || labels_->empty()) return 0;
  return *std::max_element(labels_->begin(), labels_->end());
}

DataMatrix DataMatrix::select(const IndexSet& rows) const {
  Matrix out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t] >= this->rows()) throw std::out_of_range("DataMatrix::select: row index");
    out.row(static_cast<Eigen::Index>(t)) = values_.row(static_cast<Eigen::Index>(rows[t]));
  }
  if (!labels_) return DataMatrix(std::move(out));
  Labels l;
  l.reserve(rows.size());
  for (auto r : rows) l.push_back((*labels_)[r]);
  return DataMatrix(std::move(out), std::move(l));
}

void LossConfig::validate() const {
  if (!std::isfinite(g) || !(g > 1.0)) throw std::invalid_argument("LossConfig: G must be > 1");
  if (!std::isfinite(sigma_max) || !(sigma_max > 0.0)) {
    throw std::invalid_argument("LossConfig: sigma_max must be > 0");
  }
}

double LossConfig::radius(std::size_t d) const { return std::sqrt(radius_sq(d)); }

double robust_loss(std::span<const double> x, const LossConfig& cfg) {
  cfg.validate();
  if (x.empty()) throw std::invalid_argument("robust_loss: empty vector");
  double s = 0.0;
  for (double v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("robust_loss: non-finite input");
    s += v * v;
  }
  return loss_from_squared_norm(s, cfg.scale(x.size()), cfg.g, cfg.radius_sq(x.size()));
}

double total_loss(const DataMatrix& data, std::span<const double> center, const LossConfig& cfg) {
  cfg.validate();
  const std::size_t d = data.dim();
  if (center.size() != d) {
    throw std::invalid_argument("total_loss: center has length " + std::to_string(center.size()) +
                                ", data has dimension " + std::to_string(d));
  }
  const double scale = cfg.scale(d);
  const double r2 = cfg.radius_sq(d);
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    // x_i - center, same operand order as the clustering scan.
    total += loss_from_squared_norm(squared_distance(data.row(i).data(), center.data(), d), scale,
                                    cfg.g, r2);
  }
  return total;
}

ClusterEstimate estimate_cluster(const DataMatrix& data, IndexSet members, double fallback_sigma) {
  if (members.empty()) throw std::invalid_argument("estimate_cluster: no members");
  const std::size_t d = data.dim();
  ClusterEstimate est;
  est.center = Vector::Zero(static_cast<Eigen::Index>(d));
  if (members.size() == 1) {
    auto r = data.row(members.front());
    for (std::size_t c = 0; c < d; ++c) est.center[static_cast<Eigen::Index>(c)] = r[c];
    est.sigma_hat = fallback_sigma;
    est.members = std::move(members);
    return est;
  }
  for (auto i : members) {
    auto r = data.row(i);
    for (std::size_t c = 0; c < d; ++c) est.center[static_cast<Eigen::Index>(c)] += r[c];
  }
  const double m = static_cast<double>(members.size());
  est.center /= m;
  double ss = 0.0;
  for (auto i : members) ss += squared_distance(data.row(i).data(), est.center.data(), d);
  est.sigma_hat = std::sqrt(ss / (static_cast<double>(d) * (m - 1.0)));
  est.members = std::move(members);
  return est;
}

}  // namespace crlm
