#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace crlm {

/// Row-major so that one observation is a contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Labels = std::vector<int>;
using IndexSet = std::vector<std::size_t>;

/// n x d observations with optional ground truth (0 = background, 1..k = cluster id).
///
/// An empty matrix (n = 0) is allowed so that generators can emit zero rows;
/// operations that need observations check for it themselves.
class DataMatrix {
 public:
  DataMatrix() = default;
  explicit DataMatrix(Matrix values);
  DataMatrix(Matrix values, Labels labels);

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(values_.cols()); }
  bool empty() const { return values_.rows() == 0; }

  const Matrix& values() const { return values_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dim(), dim()};
  }

  bool has_labels() const { return labels_.has_value(); }
  const Labels& labels() const;
  /// Largest label present, 0 when unlabeled or empty.
  int max_label() const;

  DataMatrix select(const IndexSet& rows) const;

 private:
  Matrix values_;
  std::optional<Labels> labels_;
};

/// Hyperparameters of the truncated quadratic loss.
struct LossConfig {
  double g = 4.0;
  double sigma_max = 1.0;

  /// Throws std::invalid_argument unless g > 1 and sigma_max > 0 (both finite).
  void validate() const;

  /// d * sigma_max^2, the normaliser of the squared norm.
  double scale(std::size_t d) const { return static_cast<double>(d) * sigma_max * sigma_max; }
  /// R^2 = d * G * sigma_max^2. Points with squared distance >= this contribute 0.
  double radius_sq(std::size_t d) const { return scale(d) * g; }
  double radius(std::size_t d) const;
};

/// Loss evaluated from a precomputed squared norm. `scale` and `radius_sq`
/// come from LossConfig for the data dimension.
inline double loss_from_squared_norm(double sq_norm, double scale, double g, double radius_sq) {
  if (sq_norm >= radius_sq) return 0.0;
  const double v = sq_norm / scale - g;
  return v < 0.0 ? v : 0.0;
}

/// Left-to-right sum of (a_c - b_c)^2. Every loss in the library goes through
/// this summation order so results agree bitwise between code paths.
inline double squared_distance(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t c = 0; c < d; ++c) {
    const double diff = a[c] - b[c];
    s += diff * diff;
  }
  return s;
}

/// min(|x|^2 / (d sigma_max^2) - G, 0).
double robust_loss(std::span<const double> x, const LossConfig& cfg);

/// Sum over rows of robust_loss(x_i - center), accumulated in row order.
double total_loss(const DataMatrix& data, std::span<const double> center, const LossConfig& cfg);

struct ClusterEstimate {
  Vector center;
  double sigma_hat = 0.0;
  IndexSet members;  // ascending row indices into the input DataMatrix
};

struct ClusteringResult {
  std::vector<ClusterEstimate> clusters;
  Labels assignment;  // 0 = unclustered, j = cluster extracted at iteration j
  bool stopped_early = false;
};

/// Mean and Alg.-1 style spread of the given rows: sigma^2 = sum |x - mean|^2 / (d (m - 1)).
/// A single member yields sigma_hat = fallback_sigma and center = that row.
ClusterEstimate estimate_cluster(const DataMatrix& data, IndexSet members, double fallback_sigma);

}  // namespace crlm
