#pragma once

#include "dshfl/objective.hpp"
#include "dshfl/rng.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace dshfl {

/// All samples before they are dealt to clients.
struct LabeledPool {
  Matrix<double> features;
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
};

/// Gaussian-mixture generator: class k has a center drawn from
/// N(0, separation^2 I); samples are center + N(0, noise^2 I). Labels are
/// uniform over the classes. `bias_feature` appends a constant 1 column.
struct SyntheticSpec {
  Eigen::Index features = 2;
  int classes = 2;
  std::size_t samples = 1000;
  double separation = 1.0;
  double noise = 1.0;
  bool bias_feature = false;
};

LabeledPool generate_synthetic(const SyntheticSpec& spec, RngStream& rng);

/// Reads `feature_0,...,feature_{p-1},label` with a header row.
LabeledPool read_csv(const std::filesystem::path& path);

/// Splits off a uniformly random `fraction` of the pool. Returns {train, test}.
std::pair<LabeledPool, LabeledPool> split_holdout(const LabeledPool& pool, double fraction,
                                                  RngStream& rng);

enum class PartitionMode { kIid, kLabelSkew };

/// Sample indices per client, [group][client].
struct Assignment {
  std::vector<std::vector<std::vector<std::size_t>>> clients;
};

/// Labels are split into contiguous blocks, one per group (label l's home
/// group is floor(l * groups / classes)). Each sample goes to its label's
/// home group with probability `skew`, otherwise to a group drawn with
/// probability proportional to the group's client count. Inside a group the
/// samples are shuffled and dealt round-robin to clients.
///
/// skew = 0 is iid; skew = 1 gives every group a disjoint label set.
/// kIid ignores `skew`.
Assignment partition(const LabeledPool& pool, std::span<const std::size_t> group_sizes,
                     PartitionMode mode, double skew, RngStream& rng);

GroupedData materialize(const LabeledPool& pool, const Assignment& assignment);

}  // namespace dshfl
