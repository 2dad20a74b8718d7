#include "crlm/core.hpp"
#include "crlm/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

using namespace crlm;

namespace {

DataMatrix rows_of(std::initializer_list<std::vector<double>> rows) {
  const auto d = rows.begin()->size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < d; ++c) m(i, static_cast<Eigen::Index>(c)) = r[c];
    ++i;
  }
  return DataMatrix(m);
}

}  // namespace

TEST_CASE("robust_loss at the origin is -G") {
  for (double s : {0.1, 1.0, 7.5}) {
    std::vector<double> x(5, 0.0);
    CHECK(robust_loss(x, LossConfig{4.0, s}) == -4.0);
  }
}

TEST_CASE("robust_loss is exactly zero on the support boundary") {
  // |x|^2 = d G sigma^2: d=4, sigma=0.5, G=4 gives 4.
  std::vector<double> x{1.0, 1.0, 1.0, 1.0};
  CHECK(robust_loss(x, LossConfig{4.0, 0.5}) == 0.0);
  std::vector<double> y{2.0};
  CHECK(robust_loss(y, LossConfig{4.0, 1.0}) == 0.0);
}

TEST_CASE("robust_loss direct arithmetic") {
  std::vector<double> x{1.0, 1.0};
  CHECK(robust_loss(x, LossConfig{4.0, 1.0}) == -3.0);
}

TEST_CASE("robust_loss rejects bad input") {
  std::vector<double> x{1.0, std::numeric_limits<double>::quiet_NaN()};
  CHECK_THROWS_AS(robust_loss(x, LossConfig{4.0, 1.0}), std::invalid_argument);
  std::vector<double> y{1.0};
  CHECK_THROWS_AS(robust_loss(y, LossConfig{1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(robust_loss(y, LossConfig{4.0, 0.0}), std::invalid_argument);
}

TEST_CASE("total_loss examples") {
  const LossConfig cfg{4.0, 1.0};
  std::vector<double> c{0.0, 0.0};
  // the center itself plus a point outside the support
  CHECK(total_loss(rows_of({{0, 0}, {10, 0}}), c, cfg) == -4.0);
  CHECK(total_loss(rows_of({{10, 0}, {0, -9}}), c, cfg) == 0.0);
  // squared distances 0, d sigma^2 = 2 and 2 d G sigma^2 = 16
  CHECK(total_loss(rows_of({{0, 0}, {1, 1}, {4, 0}}), c, cfg) == -7.0);
  std::vector<double> wrong{0.0};
  CHECK_THROWS_AS(total_loss(rows_of({{0, 0}}), wrong, cfg), std::invalid_argument);
}

TEST_CASE("robust_loss matches the long double oracle, is monotone and scale coupled") {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t d = 1 + rng.below(20);
    const double sigma = 0.1 + 5.0 * rng.uniform();
    const double g = 1.01 + 6.0 * rng.uniform();
    std::vector<double> x(d);
    std::vector<long double> xl(d);
    for (std::size_t c = 0; c < d; ++c) {
      x[c] = sigma * 1.5 * rng.normal();
      xl[c] = x[c];
    }
    const LossConfig cfg{g, sigma};
    const double l = robust_loss(x, cfg);
    CHECK(l == doctest::Approx(static_cast<double>(oracle::loss(xl, sigma, g))).epsilon(1e-12).scale(g));
    CHECK(l >= -g);
    CHECK(l <= 0.0);
    // scaling the point outward never lowers the loss
    std::vector<double> far = x;
    for (auto& v : far) v *= 1.0 + rng.uniform();
    CHECK(robust_loss(far, cfg) >= l - 1e-12);
    const double s = 0.01 + 100.0 * rng.uniform();
    std::vector<double> scaled = x;
    for (auto& v : scaled) v *= s;
    CHECK(robust_loss(scaled, LossConfig{g, sigma * s}) == doctest::Approx(l).epsilon(1e-12).scale(g));
  }
}

TEST_CASE("total_loss is row-permutation invariant") {
  Rng rng(5);
  Matrix m(60, 3);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  const DataMatrix data(m);
  Matrix p = m;
  for (Eigen::Index i = p.rows() - 1; i > 0; --i) p.row(i).swap(p.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)))));
  std::vector<double> c{0.1, -0.2, 0.3};
  const LossConfig cfg{4.0, 1.0};
  CHECK(total_loss(DataMatrix(p), c, cfg) == doctest::Approx(total_loss(data, c, cfg)).epsilon(1e-12));
}

TEST_CASE("DataMatrix validation") {
  CHECK_THROWS_AS(DataMatrix(Matrix(3, 0)), std::invalid_argument);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(DataMatrix{bad}, std::invalid_argument);
  CHECK_THROWS_AS(DataMatrix(Matrix::Zero(2, 2), Labels{0}), std::invalid_argument);
  CHECK_THROWS_AS(DataMatrix(Matrix::Zero(2, 2), Labels{0, -1}), std::invalid_argument);
  const DataMatrix ok(Matrix::Zero(2, 2), Labels{0, 3});
  CHECK(ok.max_label() == 3);
  CHECK_THROWS(DataMatrix(Matrix::Zero(2, 2)).labels());
  CHECK(DataMatrix(Matrix(0, 4)).empty());
}

TEST_CASE("estimate_cluster follows the one-cluster formulas") {
  const auto data = rows_of({{0, 0}, {0.1, 0}, {-0.1, 0}, {5, 5}});
  const auto est = estimate_cluster(data, {0, 1, 2}, 1.0);
  CHECK(est.center(0) == doctest::Approx(0.0));
  CHECK(est.sigma_hat * est.sigma_hat == doctest::Approx(0.005));
  const auto one = estimate_cluster(data, {3}, 2.5);
  CHECK(one.sigma_hat == 2.5);
  CHECK(one.center(0) == 5.0);
}
