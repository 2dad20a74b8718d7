#include "crlm/datagen.hpp"
#include "crlm/io.hpp"
#include "crlm/rng.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>

using namespace crlm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "crlm_io_tests";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("matrix CSV round-trips bitwise") {
  Rng rng(3);
  Matrix m(40, 7);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(40)) - 20);
  m(0, 0) = -0.0;
  m(1, 1) = 5e-324;
  const auto p = scratch("m.csv");
  write_matrix_csv(p, m);
  const Matrix back = read_matrix_csv(p);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  CHECK(std::memcmp(back.data(), m.data(), static_cast<std::size_t>(m.size()) * sizeof(double)) == 0);
}

TEST_CASE("empty CSV gives an empty matrix") {
  const auto p = scratch("empty.csv");
  write_matrix_csv(p, Matrix(0, 5));
  CHECK(fs::file_size(p) == 0);
  CHECK(read_matrix_csv(p).rows() == 0);
}

TEST_CASE("CSV parse errors carry the line number") {
  const auto p = scratch("bad.csv");
  {
    std::ofstream out(p);
    out << "1,2,3\n4,5,6\n7,oops,9\n";
  }
  try {
    read_matrix_csv(p);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  {
    std::ofstream out(p);
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_matrix_csv(p), ParseError);
  CHECK_THROWS_AS(read_matrix_csv(scratch("does-not-exist.csv")), IoError);
}

TEST_CASE("labels round-trip") {
  const auto p = scratch("l.labels");
  Labels l{0, 3, 1, 0, 2};
  write_labels(p, l);
  CHECK(read_labels(p) == l);
  {
    std::ofstream out(p);
    out << "1\nx\n";
  }
  CHECK_THROWS_AS(read_labels(p), ParseError);
}

TEST_CASE("spec JSON round-trips") {
  const auto spec = default_experiment_spec(3, 6, {1, 2, 3}, 0.1, LossConfig{4.0, 2.0});
  const auto j = to_json(spec);
  const auto back = spec_from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.k == spec.k);
  CHECK(back.d == spec.d);
  CHECK(back.ball_scale == spec.ball_scale);
  CHECK(back.weights == spec.weights);
  CHECK(back.sigmas == spec.sigmas);
  CHECK(back.means == spec.means);
  auto broken = j;
  broken["weights"] = {0.5};
  CHECK_THROWS_AS(spec_from_json(broken), std::invalid_argument);
}

TEST_CASE("non-finite numbers survive JSON") {
  CHECK(std::isinf(number_from_json(json_number(-std::numeric_limits<double>::infinity()))));
  CHECK(std::isnan(number_from_json(json_number(std::nan("")))));
  CHECK(number_from_json(json_number(2.5)) == 2.5);
}

TEST_CASE("region and histogram CSV layout") {
  RegionRow a;
  a.axis_value = 10;
  a.limiting = "theorem";
  RegionRow b;
  b.axis_value = 20;
  b.empty = false;
  b.sigma_lo = 2;
  b.sigma_hi = 6.5;
  b.limiting = "A1";
  CHECK(region_csv({a, b}) == "axis_value,sigma_lo,sigma_hi,limiting_constraint\n10,,,theorem\n20,2,6.5,A1\n");
  SigmaHistogram h;
  h.bin_centers = {1.5};
  h.counts = {7};
  CHECK(histogram_csv(h) == "bin_center,count\n1.5,7\n");
}
