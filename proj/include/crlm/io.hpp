#pragma once

#include "crlm/core.hpp"
#include "crlm/datagen.hpp"
#include "crlm/estimation.hpp"
#include "crlm/theory.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace crlm {

inline constexpr int kSchemaVersion = 1;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed input; the message names the file and 1-based line.
struct ParseError : IoError {
  ParseError(const std::string& file, std::size_t line, const std::string& what);
  std::size_t line;
};

/// One row per observation, comma separated, no header, shortest round-trip
/// decimal representation with '.' regardless of locale.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
/// Empty file gives a 0 x 0 matrix. Every row must have the same column count.
Matrix read_matrix_csv(const std::filesystem::path& path);

void write_labels(const std::filesystem::path& path, const Labels& labels);
Labels read_labels(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Non-finite values become the strings "inf", "-inf", "nan".
nlohmann::json json_number(double v);
double number_from_json(const nlohmann::json& j);

nlohmann::json to_json(const GmmubSpec& spec);
GmmubSpec spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const LossConfig& cfg);
nlohmann::json to_json(const ClusteringResult& r);
nlohmann::json to_json(const ProbabilityBound& b);
nlohmann::json to_json(const AssumptionReport& r);
nlohmann::json to_json(const BoundReport& r);

std::string region_csv(const std::vector<RegionRow>& rows);
std::string histogram_csv(const SigmaHistogram& h);

}  // namespace crlm
