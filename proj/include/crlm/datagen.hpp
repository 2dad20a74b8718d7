#pragma once

#include "crlm/core.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crlm {

/// Gaussian mixture with a uniform background on the ball of radius D*sqrt(d).
struct GmmubSpec {
  std::size_t k = 0;
  std::size_t d = 0;
  double ball_scale = 0.0;      // D
  std::vector<double> weights;  // k + 1 entries, the last one is the background
  Matrix means;                 // k x d
  std::vector<double> sigmas;   // k entries

  double ball_radius() const;
  double background_weight() const { return weights.back(); }
  /// Throws std::invalid_argument if any invariant is violated.
  void validate() const;
};

/// k clusters on orthogonal axes at a common distance from the origin, chosen
/// so that A2 holds with a factor-2 margin (|mu_l - mu_j| = 4 sigma_max sqrt(dG)),
/// and D chosen so both A1 clauses hold with a factor-2 margin unless
/// `ball_scale` is given. Requires k <= 2d.
GmmubSpec default_experiment_spec(std::size_t k, std::size_t d, std::vector<double> sigmas,
                                  double cluster_weight, const LossConfig& cfg,
                                  std::optional<double> ball_scale = std::nullopt);

/// Uniform points in the closed d-ball (Muller: normalised Gaussian direction,
/// radius * U^(1/d)).
DataMatrix sample_uniform_ball(std::size_t count, std::size_t d, double radius, std::uint64_t seed);

/// n labelled draws. Row components come from one substream; each mixture
/// component draws its points from its own substream, so adding a cluster
/// leaves the draws of the others untouched.
DataMatrix sample_gmmub(const GmmubSpec& spec, std::size_t n, std::uint64_t seed);

struct Clause {
  std::string name;
  bool holds = false;
  double margin = 0.0;  // lhs - rhs of the strict inequality
};

struct AssumptionReport {
  bool a1 = false;
  bool a2 = false;
  bool a3 = false;
  std::vector<Clause> clauses;
  // Only set by check_conditions.
  std::optional<bool> c1;
  std::optional<bool> c2;
  double c1_min_distance = 0.0;  // closest negative/positive pair (inf if none)
  double c2_max_ratio = 0.0;     // max over positives of |x - mu_j| / (sigma_j sqrt(dG))
};

/// A1: D > 2 sigma_max sqrt(G) and D sqrt(d) > |mu_j| + 2 sigma_max sqrt(dG);
/// A2: |mu_l - mu_j| > 2 sigma_max sqrt(dG); A3: sigma_max > 2 sigma_j.
AssumptionReport check_assumptions(const GmmubSpec& spec, const LossConfig& cfg);

/// C1 (no negative closer than sigma_max sqrt(dG) to a positive) and C2
/// (every positive within sigma_j sqrt(dG) of its mean) on a labelled sample,
/// plus the A1-A3 clauses of the spec.
AssumptionReport check_conditions(const DataMatrix& data, const GmmubSpec& spec,
                                  const LossConfig& cfg);

}  // namespace crlm
