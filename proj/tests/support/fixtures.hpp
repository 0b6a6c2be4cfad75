#pragma once

#include "dshfl/config.hpp"
#include "dshfl/engine.hpp"

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>

namespace fixtures {

inline dshfl::ClientDataset client(std::initializer_list<std::initializer_list<double>> rows,
                                   std::vector<int> labels = {}) {
  dshfl::ClientDataset c;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.begin()->size());
  c.features.resize(n, d);
  Eigen::Index r = 0;
  for (const auto& row : rows) {
    Eigen::Index col = 0;
    for (const double v : row) c.features(r, col++) = v;
    ++r;
  }
  c.labels = labels.empty() ? std::vector<int>(rows.size(), 0) : std::move(labels);
  return c;
}

/// Random dataset of `n` rows and `d` features, labels in {0, 1}.
inline dshfl::ClientDataset random_client(Eigen::Index n, Eigen::Index d, dshfl::RngStream& rng) {
  dshfl::ClientDataset c;
  c.features.resize(n, d);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index col = 0; col < d; ++col) c.features(r, col) = rng.normal();
  for (Eigen::Index r = 0; r < n; ++r) c.labels.push_back(static_cast<int>(rng.below(2)));
  return c;
}

inline dshfl::GroupedData random_groups(std::span<const std::size_t> sizes, Eigen::Index rows, Eigen::Index d,
                                        dshfl::RngStream& rng) {
  dshfl::GroupedData data(sizes.size());
  for (std::size_t g = 0; g < sizes.size(); ++g)
    for (std::size_t k = 0; k < sizes[g]; ++k) data[g].push_back(random_client(rows, d, rng));
  return data;
}

inline dshfl::Topology topology(std::vector<std::size_t> sizes, dshfl::ShiftedExponential local,
                                dshfl::ShiftedExponential global) {
  dshfl::Topology t;
  for (const auto n : sizes) t.groups.push_back({n, local, std::nullopt});
  t.global_delay = global;
  return t;
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "dshfl_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Two groups of 10 clients, c1 = c2 = 1, c_g = 5, S = 5.
inline nlohmann::json minimal_config() {
  return nlohmann::json::parse(R"({
    "topology": {"groups": [{"clients": 10}, {"clients": 10}]},
    "delay": {"group": [{"shift": 1, "rate": 10}, {"shift": 1, "rate": 10}],
              "global": {"shift": 5, "rate": 10}},
    "sync": {"mode": "fixed", "s": 5},
    "objective": {"kind": "logistic", "classes": 2, "regularization": 0.001},
    "data": {"samples": 800, "features": 4, "separation": 1.5, "bias": true},
    "train": {"alpha": 0.05, "T": 60, "batch": 8},
    "seeds": [1, 2]
  })");
}

}  // namespace fixtures
