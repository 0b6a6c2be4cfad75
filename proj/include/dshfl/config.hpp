#pragma once

#include "dshfl/constants.hpp"
#include "dshfl/data.hpp"
#include "dshfl/engine.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace dshfl {

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kLogistic;
  double regularization = 0.0;
  /// Quadratic Hessian diagonal; empty means identity.
  std::vector<double> hessian_diag;
};

struct DataConfig {
  enum class Source { kSynthetic, kCsv };
  Source source = Source::kSynthetic;
  std::filesystem::path path;
  SyntheticSpec synthetic;
  PartitionMode partition = PartitionMode::kIid;
  double skew = 0.0;
  double test_fraction = 0.2;
  /// Fixes the dataset across run seeds when set.
  std::optional<std::uint64_t> seed;
};

struct BoundsConfig {
  /// Replaces the measured f(x^{U+1}) in the loss-gap terms.
  std::optional<double> loss_lower_bound;
  std::optional<double> L;
  std::optional<double> G;
  std::optional<double> sigma;
  std::size_t probe_points = 4;
  std::size_t probe_batches = 32;
  double probe_scale = 1.0;
};

struct ExperimentConfig {
  Topology topology;
  ObjectiveConfig objective;
  DataConfig data;
  HyperParams train;
  BoundsConfig bounds;
  std::size_t metric_cadence = 1;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output = "runs";
};

struct ConfigIssue {
  std::string path;
  std::string message;
};

/// Thrown with every schema problem found, each tagged with its key path
/// (e.g. `sync.s`, `delay.group[1].rate`).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Canonical JSON form; parse_config(to_json(c)) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace dshfl
