#include "crlm/clustering.hpp"
#include "crlm/io.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#ifdef CRLM_CLI_PATH

using namespace crlm;
namespace fs = std::filesystem;

namespace {

fs::path dir() {
  const auto d = fs::temp_directory_path() / "crlm_cli_tests";
  fs::create_directories(d);
  return d;
}

int run(const std::string& args, const std::string& stdout_file = "") {
  std::string cmd = std::string("\"") + CRLM_CLI_PATH + "\" " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > \"" + stdout_file + "\"";
  cmd += " 2> \"" + (dir() / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("generate writes data, labels and sidecar deterministically") {
  const auto a = (dir() / "a").string();
  const auto b = (dir() / "b").string();
  REQUIRE(run("generate --n 500 --seed 7 --out " + a) == 0);
  REQUIRE(run("generate --n 500 --seed 7 --out " + b) == 0);
  CHECK(slurp(a + ".csv") == slurp(b + ".csv"));
  CHECK(slurp(a + ".labels") == slurp(b + ".labels"));
  const auto side = read_json(a + ".json");
  CHECK(side["schema_version"] == kSchemaVersion);
  CHECK(side["spec"]["k"] == 3);
  CHECK(side["spec"]["sigmas"] == std::vector<double>{1, 2, 3});
  CHECK(side["spec"]["weights"][0] == 0.01);
  CHECK(side["loss"]["sigma_max"] == 10.0);
  CHECK(read_matrix_csv(a + ".csv").rows() == 500);

  const auto e = (dir() / "empty").string();
  REQUIRE(run("generate --n 0 --out " + e) == 0);
  CHECK(fs::file_size(e + ".csv") == 0);
}

TEST_CASE("cluster round-trips generated data") {
  const auto g = (dir() / "g").string();
  REQUIRE(run("generate --n 4000 --seed 3 --out " + g) == 0);
  const auto out = (dir() / "r.json").string();
  REQUIRE(run("cluster " + g + ".csv --labels " + g + ".labels --sigma-max 10 --k-max 10 --out " + out) == 0);
  const auto r = read_json(out);
  CHECK(r["metrics"]["f_measure"].get<double>() >= 0.99);
  CHECK(r["result"]["clusters"].size() == 3);
  CHECK(r["config"]["k_max"] == 10);

  // k-max = 1 equals a single ocrlm call
  REQUIRE(run("cluster " + g + ".csv --sigma-max 10 --k-max 1 --out " + out) == 0);
  const auto one = read_json(out);
  const auto est = ocrlm(DataMatrix(read_matrix_csv(g + ".csv")), LossConfig{4.0, 10.0});
  CHECK(one["result"]["clusters"][0]["members"].get<std::vector<std::size_t>>() == est.members);
  CHECK(one["result"]["clusters"][0]["sigma"].get<double>() == est.sigma_hat);
}

TEST_CASE("cluster reports I/O and parse errors with exit code 2") {
  CHECK(run("cluster " + (dir() / "missing.csv").string() + " --sigma-max 1") == 2);
  const auto bad = dir() / "bad.csv";
  {
    std::ofstream out(bad);
    out << "1,2\n3,4\n5,abc\n";
  }
  CHECK(run("cluster " + bad.string() + " --sigma-max 1") == 2);
  CHECK(slurp(dir() / "stderr.txt").find(":3:") != std::string::npos);
  CHECK(run("cluster") == 2);
  CHECK(run("no-such-command") == 2);
}

TEST_CASE("bounds command") {
  const auto out = (dir() / "b.json").string();
  const std::string ref = "--k 1 --d 500 --sigmas 1 --sigma-max 10 --D 100 --pi 0.01";
  REQUIRE(run("bounds " + ref + " --n 1e6 --out " + out) == 0);
  const auto j = read_json(out);
  CHECK(j["report"]["cor1"]["value"].get<double>() >= 0.9999);
  CHECK(j["report"]["thm1"]["value"].get<double>() >= 0.9999);
  CHECK(j["n"] == 1e6);
  REQUIRE(run("bounds " + ref + " --n 1e99 --out " + out) == 0);
  CHECK(read_json(out)["report"]["cor1"]["value"].get<double>() >= 0.9999);
  // A3 fails: flagged with exit code 1
  CHECK(run("bounds --k 1 --d 500 --sigmas 6 --sigma-max 10 --D 100") == 1);
}

TEST_CASE("estimate command") {
  const auto g = (dir() / "est").string();
  REQUIRE(run("generate --n 3000 --seed 1 --D 1000 --out " + g) == 0);
  const auto out = (dir() / "e.json").string();
  const auto hist = (dir() / "h.csv").string();
  REQUIRE(run("estimate " + g + ".csv --histogram-out " + hist + " --out " + out) == 0);
  const auto j = read_json(out);
  CHECK(j["k_hat"] == 3);
  CHECK(j["sigmas"].size() == 3);
  CHECK(j["config"]["factor"] == 2.2);
  CHECK(slurp(hist).rfind("bin_center,count\n", 0) == 0);
}

TEST_CASE("sweep, region and convergence commands write CSVs with the configuration") {
  const auto out = (dir() / "s.csv").string();
  REQUIRE(run("sweep-sigma --k 1 --d 20 --sigmas 1 --pi 0.1 --D 50 --sigma-max 5 --n 1000 --seeds 2 --grid 3,5 --out " + out) == 0);
  const auto text = slurp(out);
  CHECK(text.rfind("# {", 0) == 0);
  CHECK(text.find("sigma_max,mean_f,mean_rand,min_f,in_theory_region\n") != std::string::npos);
  CHECK(run("sweep-sigma --grid \"\" --out " + out) == 2);
  REQUIRE(run("region --k 1 --d 20 --sigmas 1 --pi 0.1 --D 50 --axis d --values 5,50 --out " + out) == 0);
  CHECK(slurp(out).find("axis_value,sigma_lo,sigma_hi,limiting_constraint\n5,,,theorem\n") != std::string::npos);
  REQUIRE(run("convergence --d 10 --n 300,600 --seeds 2 --out " + out) == 0);
  CHECK(slurp(out).find("crlm,300,") != std::string::npos);
}

#endif
