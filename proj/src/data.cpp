#include "dshfl/data.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace dshfl {

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, RngStream& rng) {
  // Fisher-Yates with our own index draw so the permutation is the same on
  // every standard library.
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(idx[i - 1], idx[j]);
  }
}

LabeledPool subset(const LabeledPool& pool, std::span<const std::size_t> rows) {
  LabeledPool out;
  out.num_classes = pool.num_classes;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), pool.features.cols());
  out.labels.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = pool.features.row(static_cast<Eigen::Index>(rows[r]));
    out.labels.push_back(pool.labels[rows[r]]);
  }
  return out;
}

}  // namespace

LabeledPool generate_synthetic(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.features < 1) throw std::invalid_argument("generate_synthetic: features must be >= 1");
  if (spec.classes < 1) throw std::invalid_argument("generate_synthetic: classes must be >= 1");
  if (spec.samples == 0) throw std::invalid_argument("generate_synthetic: samples must be >= 1");

  Matrix<double> centers(spec.classes, spec.features);
  for (Eigen::Index k = 0; k < centers.rows(); ++k)
    for (Eigen::Index c = 0; c < centers.cols(); ++c) centers(k, c) = spec.separation * rng.normal();

  const Eigen::Index cols = spec.features + (spec.bias_feature ? 1 : 0);
  LabeledPool pool;
  pool.num_classes = spec.classes;
  pool.features.resize(static_cast<Eigen::Index>(spec.samples), cols);
  pool.labels.resize(spec.samples);
  for (std::size_t j = 0; j < spec.samples; ++j) {
    const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.classes)));
    pool.labels[j] = label;
    const auto row = static_cast<Eigen::Index>(j);
    for (Eigen::Index c = 0; c < spec.features; ++c)
      pool.features(row, c) = centers(label, c) + spec.noise * rng.normal();
    if (spec.bias_feature) pool.features(row, spec.features) = 1.0;
  }
  return pool;
}

LabeledPool read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("dataset " + path.string() + " is empty");

  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header.back() != "label") {
    throw std::runtime_error("dataset header must be feature_0..feature_{p-1},label");
  }
  const std::size_t p = header.size() - 1;
  for (std::size_t c = 0; c < p; ++c) {
    if (header[c] != "feature_" + std::to_string(c)) {
      throw std::runtime_error("dataset header column " + std::to_string(c) + " must be feature_" +
                               std::to_string(c));
    }
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        if (col < p) values.push_back(std::stod(cell));
        else if (col == p) labels.push_back(std::stoi(cell));
      } catch (const std::exception&) {
        throw std::runtime_error("dataset line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      ++col;
    }
    if (col != p + 1) {
      throw std::runtime_error("dataset line " + std::to_string(lineno) + ": expected " +
                               std::to_string(p + 1) + " columns");
    }
    if (labels.back() < 0) throw std::runtime_error("dataset line " + std::to_string(lineno) + ": negative label");
  }
  if (labels.empty()) throw std::runtime_error("dataset " + path.string() + " has no samples");

  LabeledPool pool;
  pool.features = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(labels.size()), static_cast<Eigen::Index>(p));
  pool.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  pool.labels = std::move(labels);
  return pool;
}

std::pair<LabeledPool, LabeledPool> split_holdout(const LabeledPool& pool, double fraction,
                                                  RngStream& rng) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw std::invalid_argument("holdout fraction must be in [0, 1)");
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  shuffle_indices(idx, rng);
  const auto n_test = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(pool.size())));
  std::span<const std::size_t> all(idx);
  auto test = subset(pool, all.first(n_test));
  auto train = subset(pool, all.subspan(n_test));
  return {std::move(train), std::move(test)};
}

Assignment partition(const LabeledPool& pool, std::span<const std::size_t> group_sizes,
                     PartitionMode mode, double skew, RngStream& rng) {
  if (!(skew >= 0.0 && skew <= 1.0)) throw std::invalid_argument("skew must lie in [0, 1]");
  if (group_sizes.empty()) throw std::invalid_argument("partition: no groups");
  if (pool.num_classes < 1) throw std::invalid_argument("partition: pool has no classes");
  const std::size_t total = std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
  if (std::any_of(group_sizes.begin(), group_sizes.end(), [](std::size_t n) { return n == 0; })) {
    throw std::invalid_argument("partition: every group needs >= 1 client");
  }
  if (mode == PartitionMode::kIid) skew = 0.0;

  const std::size_t groups = group_sizes.size();
  std::vector<double> cumulative(groups);
  std::size_t running = 0;
  for (std::size_t i = 0; i < groups; ++i) {
    running += group_sizes[i];
    cumulative[i] = static_cast<double>(running) / static_cast<double>(total);
  }

  std::vector<std::vector<std::size_t>> by_group(groups);
  for (std::size_t j = 0; j < pool.size(); ++j) {
    const double coin = rng.uniform();
    const double pick = rng.uniform();
    std::size_t g = 0;
    if (coin < skew) {
      g = static_cast<std::size_t>(pool.labels[j]) * groups / static_cast<std::size_t>(pool.num_classes);
    } else {
      g = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), pick) -
                                   cumulative.begin());
      g = std::min(g, groups - 1);
    }
    by_group[g].push_back(j);
  }

  Assignment out;
  out.clients.resize(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    if (by_group[g].size() < group_sizes[g]) {
      throw std::invalid_argument("partition: group " + std::to_string(g) + " received " +
                                  std::to_string(by_group[g].size()) + " samples for " +
                                  std::to_string(group_sizes[g]) + " clients");
    }
    shuffle_indices(by_group[g], rng);
    out.clients[g].resize(group_sizes[g]);
    for (std::size_t r = 0; r < by_group[g].size(); ++r) {
      out.clients[g][r % group_sizes[g]].push_back(by_group[g][r]);
    }
  }
  return out;
}

GroupedData materialize(const LabeledPool& pool, const Assignment& assignment) {
  GroupedData data(assignment.clients.size());
  for (std::size_t g = 0; g < assignment.clients.size(); ++g) {
    for (std::size_t k = 0; k < assignment.clients[g].size(); ++k) {
      auto sub = subset(pool, assignment.clients[g][k]);
      ClientDataset ds;
      ds.features = std::move(sub.features);
      ds.labels = std::move(sub.labels);
      ds.owner = {static_cast<int>(g), static_cast<int>(k)};
      data[g].push_back(std::move(ds));
    }
  }
  return data;
}

}  // namespace dshfl
