#include "crlm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace crlm {

using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

ParseError::ParseError(const std::string& file, std::size_t line_no, const std::string& what)
    : IoError(file + ":" + std::to_string(line_no) + ": " + what), line(line_no) {}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  std::string line;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    line.clear();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) line += ',';
      line += format_double(m(i, c));
    }
    line += '\n';
    out << line;
  }
  finish(out, path);
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    std::size_t count = 0;
    std::size_t pos = 0;
    while (true) {
      const auto comma = t.find(',', pos);
      const std::string field = trim(std::string_view(t).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      double v = 0.0;
      const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
        throw ParseError(path.string(), line_no, "field " + std::to_string(count + 1) + " is not a number: '" + field + "'");
      }
      if (!std::isfinite(v)) throw ParseError(path.string(), line_no, "non-finite value");
      values.push_back(v);
      ++count;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ParseError(path.string(), line_no,
                       "expected " + std::to_string(cols) + " fields, found " + std::to_string(count));
    }
    ++rows;
  }
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void write_labels(const std::filesystem::path& path, const Labels& labels) {
  auto out = open_out(path);
  for (int l : labels) out << l << '\n';
  finish(out, path);
}

Labels read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  Labels labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    int v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
      throw ParseError(path.string(), line_no, "not an integer label: '" + t + "'");
    }
    labels.push_back(v);
  }
  return labels;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  finish(out, path);
}

json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json json_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const json& j) {
  if (j.is_number()) return j.get<double>();
  const auto s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw std::invalid_argument("not a number: " + s);
}

namespace {

json row_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

json to_json(const GmmubSpec& spec) {
  json means = json::array();
  for (Eigen::Index j = 0; j < spec.means.rows(); ++j) means.push_back(row_json(spec.means.row(j).transpose()));
  return {{"k", spec.k},         {"d", spec.d},         {"D", spec.ball_scale},
          {"weights", spec.weights}, {"sigmas", spec.sigmas}, {"means", means}};
}

GmmubSpec spec_from_json(const json& j) {
  GmmubSpec spec;
  try {
    spec.k = j.at("k").get<std::size_t>();
    spec.d = j.at("d").get<std::size_t>();
    spec.ball_scale = j.at("D").get<double>();
    spec.weights = j.at("weights").get<std::vector<double>>();
    spec.sigmas = j.at("sigmas").get<std::vector<double>>();
    const auto& means = j.at("means");
    spec.means = Matrix::Zero(static_cast<Eigen::Index>(spec.k), static_cast<Eigen::Index>(spec.d));
    if (means.size() != spec.k) throw std::invalid_argument("spec: need k mean vectors");
    for (std::size_t r = 0; r < spec.k; ++r) {
      const auto row = means.at(r).get<std::vector<double>>();
      if (row.size() != spec.d) throw std::invalid_argument("spec: mean has wrong length");
      for (std::size_t c = 0; c < spec.d; ++c) {
        spec.means(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

json to_json(const LossConfig& cfg) { return {{"G", cfg.g}, {"sigma_max", cfg.sigma_max}}; }

json to_json(const ClusteringResult& r) {
  json clusters = json::array();
  for (const auto& c : r.clusters) {
    clusters.push_back({{"center", row_json(c.center)}, {"sigma", c.sigma_hat}, {"members", c.members}});
  }
  return {{"clusters", clusters}, {"assignment", r.assignment}, {"stopped_early", r.stopped_early}};
}

json to_json(const ProbabilityBound& b) {
  json terms = json::array();
  for (double t : b.log_terms) terms.push_back(json_number(t));
  return {{"value", b.value},
          {"raw", json_number(b.raw)},
          {"clamped", b.clamped},
          {"condition_violated", b.condition_violated},
          {"log_terms", terms}};
}

json to_json(const AssumptionReport& r) {
  json clauses = json::array();
  for (const auto& c : r.clauses) clauses.push_back({{"name", c.name}, {"holds", c.holds}, {"margin", c.margin}});
  json j = {{"A1", r.a1}, {"A2", r.a2}, {"A3", r.a3}, {"clauses", clauses}};
  if (r.c1) {
    j["C1"] = *r.c1;
    j["C1_min_distance"] = json_number(r.c1_min_distance);
  }
  if (r.c2) {
    j["C2"] = *r.c2;
    j["C2_max_ratio"] = r.c2_max_ratio;
  }
  return j;
}

json to_json(const BoundReport& r) {
  json thresholds = json::array();
  for (const auto& t : r.weight_thresholds) thresholds.push_back(t ? json(*t) : json(nullptr));
  json j = {{"W", r.w_values},
            {"weight_thresholds", thresholds},
            {"prop1", to_json(r.prob_prop1)},
            {"thm2", to_json(r.prob_thm2)},
            {"cor1", to_json(r.prob_cor1)},
            {"cor1_radius_sq", r.cor1_radius_sq},
            {"cor2_c", r.cor2_c},
            {"assumptions", to_json(r.assumptions)}};
  j["thm1"] = r.prob_thm1 ? to_json(*r.prob_thm1) : json(nullptr);
  return j;
}

std::string region_csv(const std::vector<RegionRow>& rows) {
  std::ostringstream out;
  out << "axis_value,sigma_lo,sigma_hi,limiting_constraint\n";
  for (const auto& r : rows) {
    out << format_double(r.axis_value) << ',';
    if (r.empty) {
      out << ",,";
    } else {
      out << format_double(r.sigma_lo) << ',' << format_double(r.sigma_hi) << ',';
    }
    out << r.limiting << '\n';
  }
  return out.str();
}

std::string histogram_csv(const SigmaHistogram& h) {
  std::ostringstream out;
  out << "bin_center,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    out << format_double(h.bin_centers[b]) << ',' << h.counts[b] << '\n';
  }
  return out.str();
}

}  // namespace crlm
