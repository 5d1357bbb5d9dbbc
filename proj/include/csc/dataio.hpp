#pragma once

#include "csc/dataset.hpp"
#include "csc/dictlearn.hpp"
#include "csc/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace csc {

namespace fs = std::filesystem;

inline constexpr const char* kFormatVersion = "1";

// ---------------------------------------------------------------------------
// Matrices: CSV, one row per line, comma-separated, no header, LF endings,
// shortest round-trip decimal representation.

void write_matrix(const Matrix& m, const fs::path& path);
/// Throws ParseError (with line number) for ragged rows, bad tokens,
/// non-finite values or an empty file; MissingArtifactError if absent.
Matrix read_matrix(const fs::path& path);
Matrix parse_matrix(const std::string& text);
std::string format_matrix(const Matrix& m);

// ---------------------------------------------------------------------------
// Datasets

struct DatasetManifest {
  std::string format_version = kFormatVersion;
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  Eigen::Index n = 0;
  std::size_t G = 0;
  std::vector<std::string> x_files;  // relative to the manifest directory
  std::vector<std::string> y_files;
  std::vector<std::string> truth_b_files;
  std::vector<std::string> truth_dictionary_files;
  std::vector<std::vector<std::size_t>> truth_supports;
  std::string test_manifest;  // optional, relative
  nlohmann::json provenance = nlohmann::json::object();

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

struct LoadedDataset {
  DatasetManifest manifest;
  fs::path manifest_path;
  GroupedDataset data;
  std::optional<GroundTruth> truth;

  bool has_test() const { return !manifest.test_manifest.empty(); }
  fs::path test_manifest_path() const;
};

/// Writes X_###.csv / Y_###.csv (plus truth/ and test/ when given) and
/// manifest.json into dir; returns the manifest path.
fs::path save_dataset(const GroupedDataset& dataset, const fs::path& dir, const GroundTruth* truth = nullptr,
                      const GroupedDataset* test = nullptr,
                      const nlohmann::json& provenance = nlohmann::json::object());

/// Loads and validates every declared shape; errors name the group.
LoadedDataset load_dataset_full(const fs::path& manifest_path);
GroupedDataset load_dataset(const fs::path& manifest_path);

// ---------------------------------------------------------------------------
// Model archives: model.json referencing CSV files in the same directory.

nlohmann::json config_to_json(const CscConfig& config);
CscConfig config_from_json(const nlohmann::json& j);

void save_model(const CscModel& model, const FitDiagnostics& diagnostics, const fs::path& dir);

struct LoadedModel {
  CscModel model;
  FitDiagnostics diagnostics;
};
LoadedModel load_model(const fs::path& dir);

/// Tidy long-format diagnostics: alternation,series,index,value.
std::string format_diagnostics_csv(const FitDiagnostics& diagnostics);
FitDiagnostics parse_diagnostics_csv(const std::string& text);

/// Separate-regression archive (kind "rrr").
void save_rrr_model(const std::vector<Matrix>& estimates, const std::vector<double>& radii,
                    const nlohmann::json& config, const fs::path& dir);

/// Per-group regression matrices from either archive kind.
std::vector<Matrix> load_estimates(const fs::path& dir);
/// "csc" or "rrr".
std::string archive_kind(const fs::path& dir);

// ---------------------------------------------------------------------------

struct RunRecord {
  std::vector<std::string> command_line;
  nlohmann::json config = nlohmann::json::object();
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  std::vector<std::string> outputs;
  std::string library_version;
};

void write_run_record(const RunRecord& record, const fs::path& dir);

std::string read_text(const fs::path& path);
void write_text(const std::string& text, const fs::path& path);

}  // namespace csc
