// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "augmincer/domain.hpp"
#include "augmincer/econometrics.hpp"
#include "augmincer/errors.hpp"
#include "augmincer/index_builder.hpp"
#include "augmincer/scoring.hpp"
#include "augmincer/synthetic.hpp"

namespace augmincer::config {

/// Input files. Relative paths resolve against the config file's directory;
/// empty means not supplied.
struct Paths {
  std::string workers;       // raw worker microdata
  std::string tasks;         // task statements to score
  std::string scores;        // task score file
  std::string indices;       // occupation index file
  std::string cells;         // adoption cells (indicators, optional d_raw/d_std)
  std::string largefirm;     // sector_code,occgroup_code,largefirm_share
  std::string crosswalk_ab;  // from_code,to_code[,weight]
  std::string crosswalk_bc;
  std::string employment;    // occupation_code,employment
  std::string external;      // comma-separated two-column occupation_code,score files
  std::string second_rater;  // task score file from an independent rater
  std::string analysis;      // analysis table; overrides the one built from workers
  std::string prompt;        // prompt template file
};

struct IndexSection {
  IndexVariant variant = IndexVariant::kImportanceWeighted;
  bool standardize = true;
  bool employment_weighted = false;  // weights standardization by paths.employment
  std::size_t occgroup_digits = 2;
  DTransform d_transform = DTransform::kStd;
};

struct ModelSection {
  std::vector<std::string> estimators = {"progressive", "quantile", "oaxaca"};
  std::vector<std::string> specs = {"M1", "M2", "M3", "M4", "M5", "M6"};
  CovarianceType covariance = CovarianceType::kHC1;
  std::string weights;        // empty: unweighted
  std::string sector_field = "sector";
  std::string terms;          // custom single spec; empty uses the ladder
  std::string filter;         // applied to the custom spec
  std::string fixed_effects;  // applied to the custom spec
  std::string base_spec = "M4";  // quantile, 2SLS, Oaxaca and robustness base
  std::vector<double> quantiles = {0.10, 0.25, 0.50, 0.75, 0.90};
  std::string oaxaca_group = "formal";  // 0/1 field; group A is 1
  econ::OaxacaReference oaxaca_reference = econ::OaxacaReference::kA;
  std::vector<std::string> iv_endogenous = {"d", "ahc:d", "sub:d"};
  std::vector<std::string> iv_instruments;  // empty disables 2SLS
};

struct RobustnessSection {
  std::vector<std::string> analyses = {"placebo", "jackknife", "heterogeneity", "triple", "weighted"};
  std::size_t n_perm = 199;
  std::vector<std::string> splits = {"formality", "gender", "age", "education"};
  std::string term = "ahc:d";
};

struct ScoringSection {
  std::string backend = "mock";  // mock | http
  std::size_t parallelism = 4;
  int max_attempts = 3;
  int backoff_ms = 1000;
  scoring::MockConfig mock;
  scoring::HttpConfig http;
};

struct SimulationSection {
  synth::EconomyParams economy;
  std::size_t recovery_seeds = 0;  // 0 skips the recovery harness
  std::size_t placebo_permutations = 0;
};

struct ReportSection {
  bool svg = false;
};

struct Config {
  std::filesystem::path base_dir;  // directory of the config file
  std::optional<std::uint64_t> seed;
  WorkerSchema schema = WorkerSchema::defaults();
  Paths paths;
  IndexSection index;
  DProxyWeights d_proxy;
  ModelSection model;
  RobustnessSection robustness;
  ScoringSection scoring;
  SimulationSection simulation;
  ReportSection report;

  /// Informational messages, e.g. which sections fell back to defaults.
  std::vector<std::string> notes;
  /// Effective values of every key, for the run manifest.
  nlohmann::ordered_json snapshot;

  /// Resolved path for a paths key, or nullopt when unset.
  std::optional<std::filesystem::path> path(std::string_view key) const;
  /// Resolved path, or ValidationError naming `paths.<key>`.
  std::filesystem::path require_path(std::string_view key) const;
  /// Comma-separated paths of a key, each resolved; empty when unset.
  std::vector<std::filesystem::path> path_list(std::string_view key) const;
};

/// Raised for every problem found in a config file at once.
class ConfigError : public ValidationError {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// INI-style text: `[section]` headers, `key = value` lines, `#` or `;`
/// comments (whole-line, or inline after whitespace). Lists are comma-separated. Unknown sections or keys, type
/// mismatches and constraint violations are all collected into one
/// ConfigError. Absent sections take defaults and are noted.
Config parse_config(std::string_view text, const std::filesystem::path& base_dir = {});

/// Reads `path`; IoError if it cannot be read.
Config load_config(const std::filesystem::path& path);

/// Defaults only (no file).
Config default_config();

}  // namespace augmincer::config
