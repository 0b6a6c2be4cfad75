#include "dshfl/config.hpp"

#include "fixtures.hpp"

#include <doctest.h>

using namespace dshfl;
using nlohmann::json;

namespace {

std::vector<std::string> paths_of(const json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    std::vector<std::string> out;
    for (const auto& i : e.issues()) out.push_back(i.path);
    return out;
  }
  return {};
}

bool has(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("minimal two-group config parses") {
  const auto c = parse_config(fixtures::minimal_config());
  REQUIRE(c.topology.groups.size() == 2);
  CHECK(c.topology.groups[0].num_clients == 10);
  CHECK(c.topology.groups[1].delay.shift == 1.0);
  CHECK(c.topology.groups[1].delay.rate == 10.0);
  CHECK(c.topology.global_delay.shift == 5.0);
  CHECK(std::get<FixedSync>(c.train.sync).s == 5.0);
  CHECK(c.seeds == std::vector<std::uint64_t>{1, 2});
}

TEST_CASE("negative S names sync.s") {
  auto doc = fixtures::minimal_config();
  doc["sync"]["s"] = -1;
  CHECK(has(paths_of(doc), "sync.s"));
}

TEST_CASE("missing topology.groups is listed") {
  auto doc = fixtures::minimal_config();
  doc["topology"].erase("groups");
  CHECK(has(paths_of(doc), "topology.groups"));
}

TEST_CASE("unknown keys fail closed with their path") {
  auto doc = fixtures::minimal_config();
  doc["train"]["lr"] = 0.1;
  doc["delay"]["group"][1]["scale"] = 3;
  const auto p = paths_of(doc);
  CHECK(has(p, "train.lr"));
  CHECK(has(p, "delay.group[1].scale"));
}

TEST_CASE("type mismatches and constraint violations are all reported") {
  auto doc = fixtures::minimal_config();
  doc["train"]["alpha"] = "fast";
  doc["delay"]["group"][0]["rate"] = 0;
  doc["data"]["skew"] = 2;
  const auto p = paths_of(doc);
  CHECK(has(p, "train.alpha"));
  CHECK(has(p, "delay.group[0].rate"));
  CHECK(has(p, "data.skew"));
}

TEST_CASE("delay list must match the group count") {
  auto doc = fixtures::minimal_config();
  doc["delay"]["group"].erase(1);
  CHECK(has(paths_of(doc), "delay.group"));
}

TEST_CASE("ramp schedules and deterministic delays") {
  auto doc = fixtures::minimal_config();
  doc["sync"] = json::parse(R"({"mode": "ramp", "ramp": {"start": 1, "end": 5, "step": 1}})");
  doc["delay"]["global"] = json::parse(R"({"shift": 2, "rate": "inf"})");
  const auto c = parse_config(doc);
  const auto& r = std::get<RampSync>(c.train.sync);
  CHECK(r.start == 1.0);
  CHECK(r.end == 5.0);
  CHECK(c.topology.global_delay.is_deterministic());

  doc["sync"]["ramp"]["end"] = 0.5;
  CHECK(has(paths_of(doc), "sync.ramp.end"));
}

TEST_CASE("round trip through to_json") {
  const auto c = parse_config(fixtures::minimal_config());
  const auto again = parse_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
}

TEST_CASE("parse from a file with comments") {
  const auto dir = fixtures::scratch("config");
  {
    std::ofstream out(dir / "c.json");
    out << "// two groups\n" << fixtures::minimal_config().dump(2);
  }
  CHECK(parse_config(dir / "c.json").topology.groups.size() == 2);
  CHECK_THROWS(parse_config(dir / "missing.json"));
}

}
