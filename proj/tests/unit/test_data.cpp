#include "dshfl/data.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <fstream>
#include <numeric>
#include <set>

using namespace dshfl;

namespace {

LabeledPool pool(std::size_t n, int classes, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.features = 3;
  spec.classes = classes;
  spec.samples = n;
  RngStream rng(seed);
  return generate_synthetic(spec, rng);
}

std::vector<double> histogram(const LabeledPool& p, const std::vector<std::size_t>& idx) {
  std::vector<double> h(static_cast<std::size_t>(p.num_classes), 0.0);
  for (const auto j : idx) h[static_cast<std::size_t>(p.labels[j])] += 1.0;
  for (auto& v : h) v /= static_cast<double>(idx.size());
  return h;
}

std::vector<std::size_t> group_indices(const Assignment& a, std::size_t g) {
  std::vector<std::size_t> out;
  for (const auto& c : a.clients[g]) out.insert(out.end(), c.begin(), c.end());
  return out;
}

}  // namespace

TEST_SUITE("data") {

TEST_CASE("synthetic pool has the requested shape") {
  const auto p = pool(500, 4, 1);
  CHECK(p.features.rows() == 500);
  CHECK(p.features.cols() == 3);
  CHECK(p.num_classes == 4);
  for (const int y : p.labels) CHECK((y >= 0 && y < 4));
}

TEST_CASE("skew 0 keeps every group's label histogram near the global one") {
  const auto p = pool(200000, 10, 2);
  const std::vector<std::size_t> sizes{5, 25};
  RngStream rng(3);
  const auto a = partition(p, sizes, PartitionMode::kLabelSkew, 0.0, rng);
  std::vector<std::size_t> all(p.size());
  std::iota(all.begin(), all.end(), 0);
  const auto global = histogram(p, all);
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    const auto h = histogram(p, group_indices(a, g));
    for (std::size_t l = 0; l < h.size(); ++l) CHECK(std::abs(h[l] - global[l]) <= 0.05 * global[l]);
  }
}

TEST_CASE("skew 1 with 2 groups and 10 labels gives disjoint 5-label sets") {
  const auto p = pool(3000, 10, 4);
  const std::vector<std::size_t> sizes{3, 3};
  RngStream rng(5);
  const auto a = partition(p, sizes, PartitionMode::kLabelSkew, 1.0, rng);
  std::set<int> labels[2];
  for (std::size_t g = 0; g < 2; ++g)
    for (const auto j : group_indices(a, g)) labels[g].insert(p.labels[j]);
  CHECK(labels[0] == std::set<int>{0, 1, 2, 3, 4});
  CHECK(labels[1] == std::set<int>{5, 6, 7, 8, 9});
}

TEST_CASE("partition is deterministic and covers every sample once") {
  const auto p = pool(1000, 3, 6);
  const std::vector<std::size_t> sizes{2, 4};
  RngStream r1(9), r2(9);
  const auto a = partition(p, sizes, PartitionMode::kLabelSkew, 0.5, r1);
  const auto b = partition(p, sizes, PartitionMode::kLabelSkew, 0.5, r2);
  CHECK(a.clients == b.clients);
  std::vector<int> seen(p.size(), 0);
  for (const auto& g : a.clients)
    for (const auto& c : g) {
      CHECK(!c.empty());
      for (const auto j : c) ++seen[j];
    }
  for (const int s : seen) CHECK(s == 1);
}

TEST_CASE("skew outside [0, 1] is rejected") {
  const auto p = pool(100, 2, 1);
  const std::vector<std::size_t> sizes{1, 1};
  RngStream rng(1);
  CHECK_THROWS_AS(partition(p, sizes, PartitionMode::kLabelSkew, 1.5, rng), std::invalid_argument);
  CHECK_THROWS_AS(partition(p, sizes, PartitionMode::kLabelSkew, -0.1, rng), std::invalid_argument);
}

TEST_CASE("materialize tags owners and keeps rows") {
  const auto p = pool(60, 2, 7);
  const std::vector<std::size_t> sizes{2, 1};
  RngStream rng(2);
  const auto a = partition(p, sizes, PartitionMode::kIid, 0.0, rng);
  const auto data = materialize(p, a);
  REQUIRE(data.size() == 2);
  CHECK(data[1][0].owner.group == 1);
  std::size_t total = 0;
  for (const auto& g : data)
    for (const auto& c : g) total += c.size();
  CHECK(total == 60);
}

TEST_CASE("csv import reads features and labels") {
  const auto dir = fixtures::scratch("csv");
  {
    std::ofstream out(dir / "ok.csv");
    out << "feature_0,feature_1,label\n0.5,-1,1\n2,3,0\n";
  }
  const auto p = read_csv(dir / "ok.csv");
  CHECK(p.size() == 2);
  CHECK(p.features(0, 1) == -1.0);
  CHECK(p.labels[0] == 1);
  CHECK(p.num_classes == 2);

  {
    std::ofstream out(dir / "bad.csv");
    out << "x,y,label\n1,2,0\n";
  }
  CHECK_THROWS(read_csv(dir / "bad.csv"));
  {
    std::ofstream out(dir / "ragged.csv");
    out << "feature_0,feature_1,label\n1,0\n";
  }
  CHECK_THROWS(read_csv(dir / "ragged.csv"));
}

TEST_CASE("holdout split is disjoint and sized") {
  const auto p = pool(1000, 2, 8);
  RngStream rng(4);
  const auto [train, test] = split_holdout(p, 0.2, rng);
  CHECK(test.size() == 200);
  CHECK(train.size() == 800);
}

}
