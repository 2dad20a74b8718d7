#include "crlm/eval.hpp"
#include "crlm/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

using namespace crlm;

namespace {

std::vector<int> random_labels(Rng& rng, std::size_t n, int groups) {
  std::vector<int> v(n);
  for (auto& x : v) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(groups)));
  return v;
}

// Applies a random bijection to the nonzero labels of `pred` (0 stays 0).
std::vector<int> relabel(Rng& rng, const std::vector<int>& pred) {
  std::set<int> ids;
  for (int p : pred) if (p != 0) ids.insert(p);
  std::vector<int> from(ids.begin(), ids.end()), to = from;
  for (std::size_t i = to.size(); i > 1; --i) std::swap(to[i - 1], to[rng.below(i)]);
  // also move ids to fresh values so the test does not depend on the id range
  for (auto& t : to) t += 100;
  std::vector<int> out = pred;
  for (auto& p : out) {
    if (p == 0) continue;
    p = to[static_cast<std::size_t>(std::find(from.begin(), from.end(), p) - from.begin())];
  }
  return out;
}

}  // namespace

TEST_CASE("rand_index examples") {
  std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
  CHECK(rand_index(a, a) == 1.0);
  CHECK(rand_index(a, b) == doctest::Approx(2.0 / 6.0));
  CHECK(rand_index(std::vector<int>{0, 1, 2, 3}, std::vector<int>{7, 7, 7, 7}) == 0.0);
  CHECK_THROWS_AS(rand_index(a, std::vector<int>{1}), std::invalid_argument);
}

TEST_CASE("rand_index equals brute force exactly") {
  Rng rng(1);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = rng.below(120);
    const auto a = random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
    const auto b = random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
    CHECK(rand_index(a, b) == oracle::rand_index(a, b));
    CHECK(rand_index_pairs(a, b) == oracle::rand_index(a, b));
  }
}

TEST_CASE("f_measure examples") {
  std::vector<int> truth{0, 1, 1, 2, 2, 0};
  CHECK(f_measure_avg(truth, truth, 2) == 1.0);
  // 10 positives, 990 negatives, 5 true positives detected with no false positive
  std::vector<int> t(1000, 0), p(1000, 0);
  for (int i = 0; i < 10; ++i) t[static_cast<std::size_t>(i)] = 1;
  for (int i = 0; i < 5; ++i) p[static_cast<std::size_t>(i)] = 1;
  CHECK(f_measure_avg(t, p, 1) == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(f_measure_avg(std::vector<int>{3}, std::vector<int>{1}, 2), std::invalid_argument);
}

TEST_CASE("f_measure with two output labels takes the better of both mappings") {
  std::vector<int> t{1, 1, 1, 0, 0, 0, 0};
  std::vector<int> p{0, 0, 0, 1, 1, 1, 1};  // labels swapped
  CHECK(f_measure_avg(t, p, 1) == 0.0);
  CHECK(f_measure_avg(t, p, 1, true) == 1.0);
}

TEST_CASE("f_measure matches exhaustive enumeration and is relabeling invariant") {
  Rng rng(2);
  for (int t = 0; t < 300; ++t) {
    const int k = 1 + static_cast<int>(rng.below(4));
    const std::size_t n = 1 + rng.below(80);
    const auto truth = random_labels(rng, n, k + 1);
    const auto pred = random_labels(rng, n, 1 + static_cast<int>(rng.below(6)));
    std::set<int> cand;
    for (int q : pred) if (q != 0) cand.insert(q);
    const double expect = oracle::f_measure(truth, pred, k, std::vector<int>(cand.begin(), cand.end()));
    const double got = f_measure_avg(truth, pred, k);
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
    CHECK(f_measure_avg(truth, relabel(rng, pred), k) == doctest::Approx(got).epsilon(1e-12));
  }
}

TEST_CASE("Hungarian and enumeration agree on larger assignment problems") {
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const Eigen::Index rows = 9, cols = 9 + static_cast<Eigen::Index>(rng.below(2));
    Matrix w(rows, cols);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform();
    const auto got = max_weight_assignment(w);
    double total = 0;
    std::set<std::size_t> used;
    for (Eigen::Index r = 0; r < rows; ++r) {
      total += w(r, static_cast<Eigen::Index>(got[static_cast<std::size_t>(r)]));
      used.insert(got[static_cast<std::size_t>(r)]);
    }
    CHECK(used.size() == static_cast<std::size_t>(rows));
    // brute force over permutations of the columns
    std::vector<std::size_t> perm(static_cast<std::size_t>(cols));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = 0;
    do {
      double s = 0;
      for (Eigen::Index r = 0; r < rows; ++r) s += w(r, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(r)]));
      best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(total == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("purity examples") {
  std::vector<int> t{1, 1, 2, 2};
  CHECK(purity(t, t) == 1.0);
  CHECK(purity(t, std::vector<int>{1, 2, 3, 4}) == 1.0);
  CHECK(purity(t, std::vector<int>{5, 5, 5, 5}) == 0.5);
}

TEST_CASE("mean_center_error examples") {
  Matrix mu(2, 2);
  mu << 1, 2, 3, 4;
  CHECK(mean_center_error(mu, mu).value == 0.0);
  Matrix swapped(2, 2);
  swapped << 3, 4, 1, 2;
  CHECK(mean_center_error(mu, swapped).value == 0.0);
  Matrix one(1, 2);
  one << 3, 4;
  CHECK(mean_center_error(one, Matrix::Zero(1, 2)).value == 5.0);
  // one estimate for two means: the other mean costs its norm
  const auto e = mean_center_error(mu, one);
  CHECK(e.unmatched);
  CHECK(e.value == doctest::Approx(std::sqrt(5.0) / 2.0));
  const auto none = mean_center_error(mu, Matrix(0, 2));
  CHECK(none.no_estimates);
  CHECK(std::isinf(none.value));
  CHECK_THROWS_AS(mean_center_error(mu, Matrix::Zero(1, 3)), std::invalid_argument);
}

TEST_CASE("mean_center_error is invariant to estimate order") {
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.below(10));
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng.below(10));
    Matrix mu(k, 3), est(m, 3);
    for (Eigen::Index i = 0; i < mu.size(); ++i) mu.data()[i] = rng.normal();
    for (Eigen::Index i = 0; i < est.size(); ++i) est.data()[i] = rng.normal();
    Matrix perm = est;
    for (Eigen::Index i = m - 1; i > 0; --i) perm.row(i).swap(perm.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(i + 1)))));
    CHECK(mean_center_error(mu, perm).value == doctest::Approx(mean_center_error(mu, est).value).epsilon(1e-12));
  }
}

TEST_CASE("metrics stay in range") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(50);
    const auto a = random_labels(rng, n, 4);
    const auto b = random_labels(rng, n, 5);
    for (double v : {rand_index(a, b), purity(a, b), f_measure_avg(a, b, 3)}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}
