#pragma once

#include "crlm/core.hpp"
#include "crlm/datagen.hpp"

#include <optional>
#include <string>
#include <vector>

namespace crlm {

/// A lower bound of the form 1 - sum(terms), each term kept as its natural
/// logarithm so that nothing under- or overflows before the final sum.
struct ProbabilityBound {
  double value = 0.0;               // clamped to [0, 1]
  double raw = 0.0;                 // 1 - sum(exp(log_terms)), may be negative or -inf
  bool clamped = false;             // raw was outside [0, 1]
  bool condition_violated = false;  // weight condition failed, value forced to 0
  std::vector<double> log_terms;
};

/// ln((sigma_max sqrt(G) / D)^d), the log of the ball-volume ratio.
double log_volume_ratio(const GmmubSpec& spec, const LossConfig& cfg);

/// W_j = pi_j (G - (1+G) sigma_j^2 / sigma_max^2) - pi_{k+1} (sigma_max sqrt(G)/D)^d G/(d/2+1).
/// j is 1-based.
double margin_w(const GmmubSpec& spec, const LossConfig& cfg, std::size_t j);

/// Smallest pi_j with W_j > 0 when the background weight absorbs the change
/// (pi_{k+1} = 1 - sum of the other cluster weights - pi_j). For k = 1 this is
/// t / ((G - (1+G) sigma_1^2/sigma_max^2) + t) with t = (G/(d/2+1)) (sigma_max sqrt(G)/D)^d.
/// Returns nullopt when G <= (1+G) sigma_j^2 / sigma_max^2 (no weight suffices).
std::optional<double> weight_threshold(const GmmubSpec& spec, const LossConfig& cfg, std::size_t j);

/// 1 - 2n e^{-d(G-1)^2/8} - nk (2 sigma_max sqrt(G)/D)^d: probability that C1 and C2 hold.
ProbabilityBound conditions_prob(const GmmubSpec& spec, const LossConfig& cfg, double n);

/// Single-cluster guarantee for OCRLM. Requires k = 1.
ProbabilityBound success_prob_thm1(const GmmubSpec& spec, const LossConfig& cfg, double n);

/// Multi-cluster guarantee for CRLM.
ProbabilityBound success_prob_thm2(const GmmubSpec& spec, const LossConfig& cfg, double n);

struct MeanAccuracyBound {
  ProbabilityBound prob;
  double radius_sq = 0.0;  // 4 d max_j sigma_j^2 / (n min_j pi_j)
};

/// Probability that every estimated mean lies within sqrt(radius_sq) of its true mean.
MeanAccuracyBound success_prob_cor1(const GmmubSpec& spec, const LossConfig& cfg, double n);

/// c = min((G-1)^2/8, ln(D / (2 sigma_max sqrt(G)))). The mean-accuracy bound
/// tends to 1 for sample sizes with c d > 2 ln n, i.e. ln n < c d / 2.
struct LargeSampleRegime {
  double c = 0.0;
  double log_n_max = 0.0;  // c d / 2
};
LargeSampleRegime large_sample_regime(const GmmubSpec& spec, const LossConfig& cfg);

/// Smallest n (searched on a log grid and refined by bisection in ln n) at which
/// success_prob_cor1 reaches `target`, or nullopt if it never does below e^log_n_cap.
std::optional<double> min_n_for_cor1(const GmmubSpec& spec, const LossConfig& cfg, double target,
                                     double log_n_cap);

/// -G / (d/2 + 1): mean loss of a point uniform in the loss support.
double uniform_loss_mean(std::size_t d, double g);
/// sigma_1^2 / sigma_max^2 - G: upper bound on the mean loss of a Gaussian point.
double gaussian_loss_mean_bound(double sigma_1, double sigma_max, double g);

struct BoundReport {
  std::vector<double> w_values;
  std::vector<std::optional<double>> weight_thresholds;
  ProbabilityBound prob_prop1;
  std::optional<ProbabilityBound> prob_thm1;  // k = 1 only
  ProbabilityBound prob_thm2;
  ProbabilityBound prob_cor1;
  double cor1_radius_sq = 0.0;
  double cor2_c = 0.0;
  AssumptionReport assumptions;
};

BoundReport bound_report(const GmmubSpec& spec, const LossConfig& cfg, double n);

enum class SweepAxis { kDimension, kSampleSize, kG };

struct RegionRequest {
  GmmubSpec spec;
  double n = 1e4;
  double g = 4.0;
  double prob_floor = 0.99;
  SweepAxis axis = SweepAxis::kDimension;
  std::vector<double> axis_values;
  /// sigma_max candidates; empty selects 200 log-spaced values.
  std::vector<double> sigma_grid;
  double refine_rel_width = 1e-3;
};

/// One sweep point. The interval is the sigma_max range where A3, A1, A2 (k > 1),
/// the weight condition and the theorem probability floor hold together.
struct RegionRow {
  double axis_value = 0.0;
  bool empty = true;
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  /// Constraint that ends the interval from above ("grid" if the grid ends
  /// first); for an empty row, the constraint that fails right above the A3 bound.
  std::string limiting;
};

/// Names: "A3", "A1", "A2", "weight", "theorem". Returns "" when all hold.
std::string first_failing_constraint(const GmmubSpec& spec, const LossConfig& cfg, double n,
                                     double prob_floor);

std::vector<RegionRow> feasible_sigma_region(const RegionRequest& req);

/// Spec with dimension `d`, means stretched by sqrt(d / spec.d) so that
/// per-coordinate geometry is preserved.
GmmubSpec rescale_dimension(const GmmubSpec& spec, std::size_t d);

}  // namespace crlm
