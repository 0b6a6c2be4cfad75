#include "dshfl/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace dshfl {

using nlohmann::json;

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid config:";
  for (const auto& i : issues) out += "\n  " + i.path + ": " + i.message;
  return out;
}

/// Walks a JSON object, recording every problem instead of stopping at the
/// first one. Keys that are never read are reported as unknown.
class Reader {
 public:
  explicit Reader(std::vector<ConfigIssue>& issues) : issues_(issues) {}

  void error(const std::string& path, const std::string& msg) { issues_.push_back({path, msg}); }

  const json* object(const json& parent, const std::string& base, const std::string& key, bool required) {
    const json* v = find(parent, key);
    const auto path = join(base, key);
    if (!v) {
      if (required) error(path, "required key is missing");
      return nullptr;
    }
    if (!v->is_object()) {
      error(path, "expected an object");
      return nullptr;
    }
    return v;
  }

  const json* array(const json& parent, const std::string& base, const std::string& key, bool required) {
    const json* v = find(parent, key);
    const auto path = join(base, key);
    if (!v) {
      if (required) error(path, "required key is missing");
      return nullptr;
    }
    if (!v->is_array()) {
      error(path, "expected an array");
      return nullptr;
    }
    return v;
  }

  std::optional<double> number(const json& parent, const std::string& base, const std::string& key,
                               bool required, bool allow_inf = false) {
    const json* v = find(parent, key);
    const auto path = join(base, key);
    if (!v || v->is_null()) {
      if (required) error(path, "required key is missing");
      return std::nullopt;
    }
    if (allow_inf && v->is_string() && v->get<std::string>() == "inf") {
      return std::numeric_limits<double>::infinity();
    }
    if (!v->is_number()) {
      error(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
      return std::nullopt;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      error(path, "must be finite");
      return std::nullopt;
    }
    return d;
  }

  std::optional<std::int64_t> integer(const json& parent, const std::string& base, const std::string& key,
                                      bool required) {
    const json* v = find(parent, key);
    const auto path = join(base, key);
    if (!v || v->is_null()) {
      if (required) error(path, "required key is missing");
      return std::nullopt;
    }
    if (!v->is_number_integer()) {
      error(path, "expected an integer");
      return std::nullopt;
    }
    return v->get<std::int64_t>();
  }

  std::optional<std::string> string(const json& parent, const std::string& base, const std::string& key,
                                    bool required) {
    const json* v = find(parent, key);
    const auto path = join(base, key);
    if (!v || v->is_null()) {
      if (required) error(path, "required key is missing");
      return std::nullopt;
    }
    if (!v->is_string()) {
      error(path, "expected a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const json& parent, const std::string& base, const std::string& key) {
    const json* v = find(parent, key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) {
      error(join(base, key), "expected true or false");
      return std::nullopt;
    }
    return v->get<bool>();
  }

  /// Reports keys of `obj` outside `allowed`.
  void closed(const json& obj, const std::string& base, std::initializer_list<const char*> allowed) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items()) {
      if (!ok.count(key)) error(join(base, key), "unknown key");
    }
  }

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

 private:
  static const json* find(const json& parent, const std::string& key) {
    if (!parent.is_object()) return nullptr;
    const auto it = parent.find(key);
    return it == parent.end() ? nullptr : &*it;
  }

  std::vector<ConfigIssue>& issues_;
};

ShiftedExponential read_delay(Reader& r, const json& obj, const std::string& path) {
  r.closed(obj, path, {"shift", "rate"});
  ShiftedExponential d;
  if (auto v = r.number(obj, path, "shift", true)) {
    if (*v < 0) r.error(path + ".shift", "must be >= 0");
    d.shift = *v;
  }
  if (auto v = r.number(obj, path, "rate", false, true)) {
    if (!(*v > 0)) r.error(path + ".rate", "must be > 0");
    d.rate = *v;
  }
  if (d.is_deterministic() && d.shift <= 0) r.error(path + ".shift", "deterministic delays need shift > 0");
  return d;
}

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig parse_config(const json& doc) {
  std::vector<ConfigIssue> issues;
  Reader r(issues);
  ExperimentConfig c;
  if (!doc.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"<root>", "expected an object"}});
  r.closed(doc, "", {"topology", "delay", "sync", "objective", "data", "train", "bounds", "metrics",
                     "seeds", "output"});

  // topology
  std::size_t groups = 0;
  if (const json* topo = r.object(doc, "", "topology", true)) {
    r.closed(*topo, "topology", {"groups"});
    if (const json* arr = r.array(*topo, "topology", "groups", true)) {
      if (arr->empty()) r.error("topology.groups", "needs at least one group");
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto path = "topology.groups[" + std::to_string(i) + "]";
        const json& g = (*arr)[i];
        if (!g.is_object()) {
          r.error(path, "expected an object");
          continue;
        }
        r.closed(g, path, {"clients"});
        GroupSpec spec;
        if (auto n = r.integer(g, path, "clients", true)) {
          if (*n < 1) r.error(path + ".clients", "must be >= 1");
          else spec.num_clients = static_cast<std::size_t>(*n);
        }
        c.topology.groups.push_back(spec);
      }
      groups = arr->size();
    }
  }

  // delay
  if (const json* delay = r.object(doc, "", "delay", true)) {
    r.closed(*delay, "delay", {"group", "global"});
    if (const json* arr = r.array(*delay, "delay", "group", true)) {
      if (groups && arr->size() != groups) {
        r.error("delay.group", "expected " + std::to_string(groups) + " entries (one per group), got " +
                                   std::to_string(arr->size()));
      }
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const auto path = "delay.group[" + std::to_string(i) + "]";
        if (!(*arr)[i].is_object()) {
          r.error(path, "expected an object");
          continue;
        }
        const auto d = read_delay(r, (*arr)[i], path);
        if (i < c.topology.groups.size()) c.topology.groups[i].delay = d;
      }
    }
    if (const json* g = r.object(*delay, "delay", "global", true)) {
      c.topology.global_delay = read_delay(r, *g, "delay.global");
    }
  }

  // sync
  if (const json* sync = r.object(doc, "", "sync", true)) {
    r.closed(*sync, "sync", {"mode", "s", "ramp"});
    const auto mode = r.string(*sync, "sync", "mode", false).value_or("fixed");
    if (mode == "fixed") {
      if (sync->contains("ramp")) r.error("sync.ramp", "only valid with sync.mode = ramp");
      if (auto s = r.number(*sync, "sync", "s", true)) {
        if (*s < 0) r.error("sync.s", "must be >= 0");
        c.train.sync = FixedSync{*s};
      }
    } else if (mode == "ramp") {
      if (sync->contains("s")) r.error("sync.s", "only valid with sync.mode = fixed");
      if (const json* ramp = r.object(*sync, "sync", "ramp", true)) {
        r.closed(*ramp, "sync.ramp", {"start", "end", "step"});
        RampSync rs;
        if (auto v = r.number(*ramp, "sync.ramp", "start", true)) rs.start = *v;
        if (auto v = r.number(*ramp, "sync.ramp", "end", true)) rs.end = *v;
        if (auto v = r.number(*ramp, "sync.ramp", "step", true)) rs.step = *v;
        if (rs.start < 0) r.error("sync.ramp.start", "must be >= 0");
        if (rs.end < rs.start) r.error("sync.ramp.end", "must be >= sync.ramp.start");
        if (rs.step < 0) r.error("sync.ramp.step", "must be >= 0");
        c.train.sync = rs;
      }
    } else {
      r.error("sync.mode", "must be \"fixed\" or \"ramp\"");
    }
  }

  // objective
  int classes = 2;
  if (const json* obj = r.object(doc, "", "objective", true)) {
    r.closed(*obj, "objective", {"kind", "classes", "regularization", "hessian_diag"});
    const auto kind = r.string(*obj, "objective", "kind", true);
    if (kind == "quadratic") c.objective.kind = ObjectiveKind::kQuadratic;
    else if (kind == "logistic") c.objective.kind = ObjectiveKind::kLogistic;
    else if (kind) r.error("objective.kind", "must be \"quadratic\" or \"logistic\"");
    if (auto n = r.integer(*obj, "objective", "classes", false)) {
      if (*n < 1) r.error("objective.classes", "must be >= 1");
      else classes = static_cast<int>(*n);
    }
    if (c.objective.kind == ObjectiveKind::kLogistic && classes < 2) {
      r.error("objective.classes", "logistic objectives need >= 2 classes");
    }
    if (auto v = r.number(*obj, "objective", "regularization", false)) {
      if (*v < 0) r.error("objective.regularization", "must be >= 0");
      c.objective.regularization = *v;
    }
    if (const json* h = r.array(*obj, "objective", "hessian_diag", false)) {
      if (c.objective.kind != ObjectiveKind::kQuadratic) {
        r.error("objective.hessian_diag", "only valid for quadratic objectives");
      }
      for (std::size_t i = 0; i < h->size(); ++i) {
        const auto path = "objective.hessian_diag[" + std::to_string(i) + "]";
        if (!(*h)[i].is_number() || !((*h)[i].get<double>() >= 0)) r.error(path, "expected a number >= 0");
        else c.objective.hessian_diag.push_back((*h)[i].get<double>());
      }
    }
  }

  // data
  if (const json* data = r.object(doc, "", "data", true)) {
    r.closed(*data, "data", {"source", "path", "samples", "features", "separation", "noise", "bias",
                             "partition", "skew", "test_fraction", "seed"});
    const auto source = r.string(*data, "data", "source", false).value_or("synthetic");
    if (source == "synthetic") {
      c.data.source = DataConfig::Source::kSynthetic;
      if (data->contains("path")) r.error("data.path", "only valid with data.source = csv");
    } else if (source == "csv") {
      c.data.source = DataConfig::Source::kCsv;
      if (auto p = r.string(*data, "data", "path", true)) c.data.path = *p;
    } else {
      r.error("data.source", "must be \"synthetic\" or \"csv\"");
    }
    auto& syn = c.data.synthetic;
    syn.classes = classes;
    if (auto n = r.integer(*data, "data", "samples", false)) {
      if (*n < 1) r.error("data.samples", "must be >= 1");
      else syn.samples = static_cast<std::size_t>(*n);
    }
    if (auto n = r.integer(*data, "data", "features", false)) {
      if (*n < 1) r.error("data.features", "must be >= 1");
      else syn.features = static_cast<Eigen::Index>(*n);
    }
    if (auto v = r.number(*data, "data", "separation", false)) {
      if (*v < 0) r.error("data.separation", "must be >= 0");
      syn.separation = *v;
    }
    if (auto v = r.number(*data, "data", "noise", false)) {
      if (*v < 0) r.error("data.noise", "must be >= 0");
      syn.noise = *v;
    }
    if (auto b = r.boolean(*data, "data", "bias")) syn.bias_feature = *b;
    const auto partition = r.string(*data, "data", "partition", false).value_or("iid");
    if (partition == "iid") c.data.partition = PartitionMode::kIid;
    else if (partition == "label-skew") c.data.partition = PartitionMode::kLabelSkew;
    else r.error("data.partition", "must be \"iid\" or \"label-skew\"");
    if (auto v = r.number(*data, "data", "skew", false)) {
      if (*v < 0 || *v > 1) r.error("data.skew", "must lie in [0, 1]");
      c.data.skew = *v;
    }
    if (auto v = r.number(*data, "data", "test_fraction", false)) {
      if (*v < 0 || *v >= 1) r.error("data.test_fraction", "must lie in [0, 1)");
      c.data.test_fraction = *v;
    }
    if (auto n = r.integer(*data, "data", "seed", false)) {
      if (*n < 0) r.error("data.seed", "must be >= 0");
      else c.data.seed = static_cast<std::uint64_t>(*n);
    }
  }
  if (c.objective.kind == ObjectiveKind::kQuadratic && !c.objective.hessian_diag.empty() &&
      c.data.source == DataConfig::Source::kSynthetic &&
      static_cast<Eigen::Index>(c.objective.hessian_diag.size()) != c.data.synthetic.features) {
    r.error("objective.hessian_diag", "length must equal data.features");
  }

  // train
  if (const json* train = r.object(doc, "", "train", true)) {
    r.closed(*train, "train", {"alpha", "T", "clip", "batch", "init", "init_scale"});
    if (auto v = r.number(*train, "train", "alpha", true)) {
      if (!(*v > 0)) r.error("train.alpha", "must be > 0");
      c.train.learning_rate = *v;
    }
    if (auto v = r.number(*train, "train", "T", true)) {
      if (!(*v > 0)) r.error("train.T", "must be > 0");
      c.train.system_time = *v;
    }
    if (auto v = r.number(*train, "train", "clip", false)) {
      if (!(*v > 0)) r.error("train.clip", "must be > 0 (omit or null to disable)");
      c.train.clip = *v;
    }
    if (train->contains("batch")) {
      const json& b = (*train)["batch"];
      if (b.is_string() && b.get<std::string>() == "full") {
        c.train.batch = MinibatchSpec::full();
      } else if (b.is_number_integer() && b.get<std::int64_t>() >= 1) {
        c.train.batch = {static_cast<std::size_t>(b.get<std::int64_t>()), false};
      } else {
        r.error("train.batch", "expected an integer >= 1 or \"full\"");
      }
    }
    const auto init = r.string(*train, "train", "init", false).value_or("gaussian");
    if (init == "gaussian") c.train.init = InitMode::kGaussian;
    else if (init == "zeros") c.train.init = InitMode::kZeros;
    else r.error("train.init", "must be \"gaussian\" or \"zeros\"");
    if (auto v = r.number(*train, "train", "init_scale", false)) {
      if (*v < 0) r.error("train.init_scale", "must be >= 0");
      c.train.init_scale = *v;
    }
  }

  // bounds
  if (const json* b = r.object(doc, "", "bounds", false)) {
    r.closed(*b, "bounds", {"loss_lower_bound", "L", "G", "sigma", "probe"});
    c.bounds.loss_lower_bound = r.number(*b, "bounds", "loss_lower_bound", false);
    c.bounds.L = r.number(*b, "bounds", "L", false);
    c.bounds.G = r.number(*b, "bounds", "G", false);
    c.bounds.sigma = r.number(*b, "bounds", "sigma", false);
    if (c.bounds.L && !(*c.bounds.L > 0)) r.error("bounds.L", "must be > 0");
    if (c.bounds.G && !(*c.bounds.G > 0)) r.error("bounds.G", "must be > 0");
    if (c.bounds.sigma && !(*c.bounds.sigma >= 0)) r.error("bounds.sigma", "must be >= 0");
    if (const json* p = r.object(*b, "bounds", "probe", false)) {
      r.closed(*p, "bounds.probe", {"points", "batches", "scale"});
      if (auto n = r.integer(*p, "bounds.probe", "points", false)) {
        if (*n < 1) r.error("bounds.probe.points", "must be >= 1");
        else c.bounds.probe_points = static_cast<std::size_t>(*n);
      }
      if (auto n = r.integer(*p, "bounds.probe", "batches", false)) {
        if (*n < 1) r.error("bounds.probe.batches", "must be >= 1");
        else c.bounds.probe_batches = static_cast<std::size_t>(*n);
      }
      if (auto v = r.number(*p, "bounds.probe", "scale", false)) {
        if (*v < 0) r.error("bounds.probe.scale", "must be >= 0");
        c.bounds.probe_scale = *v;
      }
    }
  }

  if (const json* m = r.object(doc, "", "metrics", false)) {
    r.closed(*m, "metrics", {"cadence"});
    if (auto n = r.integer(*m, "metrics", "cadence", false)) {
      if (*n < 1) r.error("metrics.cadence", "must be >= 1");
      else c.metric_cadence = static_cast<std::size_t>(*n);
    }
  }

  if (const json* seeds = r.array(doc, "", "seeds", false)) {
    c.seeds.clear();
    if (seeds->empty()) r.error("seeds", "needs at least one seed");
    for (std::size_t i = 0; i < seeds->size(); ++i) {
      const json& s = (*seeds)[i];
      if (!s.is_number_integer() || s.get<std::int64_t>() < 0) {
        r.error("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
      } else {
        c.seeds.push_back(s.get<std::uint64_t>());
      }
    }
  }
  if (auto out = r.string(doc, "", "output", false)) c.output = *out;

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({{"<file>", "cannot open " + path.string()}});
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError({{"<file>", std::string("JSON syntax error: ") + e.what()}});
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  auto rate = [](double r) -> json {
    if (r == std::numeric_limits<double>::infinity()) return "inf";
    return r;
  };
  json doc;
  json groups = json::array();
  json delays = json::array();
  for (const auto& g : c.topology.groups) {
    groups.push_back({{"clients", g.num_clients}});
    delays.push_back({{"shift", g.delay.shift}, {"rate", rate(g.delay.rate)}});
  }
  doc["topology"] = {{"groups", groups}};
  doc["delay"] = {{"group", delays},
                  {"global", {{"shift", c.topology.global_delay.shift}, {"rate", rate(c.topology.global_delay.rate)}}}};
  if (const auto* f = std::get_if<FixedSync>(&c.train.sync)) {
    doc["sync"] = {{"mode", "fixed"}, {"s", f->s}};
  } else {
    const auto& rs = std::get<RampSync>(c.train.sync);
    doc["sync"] = {{"mode", "ramp"}, {"ramp", {{"start", rs.start}, {"end", rs.end}, {"step", rs.step}}}};
  }
  doc["objective"] = {{"kind", to_string(c.objective.kind)},
                      {"classes", c.data.synthetic.classes},
                      {"regularization", c.objective.regularization}};
  if (!c.objective.hessian_diag.empty()) doc["objective"]["hessian_diag"] = c.objective.hessian_diag;
  const auto& s = c.data.synthetic;
  doc["data"] = {{"source", c.data.source == DataConfig::Source::kCsv ? "csv" : "synthetic"},
                 {"samples", s.samples},
                 {"features", s.features},
                 {"separation", s.separation},
                 {"noise", s.noise},
                 {"bias", s.bias_feature},
                 {"partition", c.data.partition == PartitionMode::kIid ? "iid" : "label-skew"},
                 {"skew", c.data.skew},
                 {"test_fraction", c.data.test_fraction}};
  if (c.data.source == DataConfig::Source::kCsv) doc["data"]["path"] = c.data.path.string();
  if (c.data.seed) doc["data"]["seed"] = *c.data.seed;
  doc["train"] = {{"alpha", c.train.learning_rate},
                  {"T", c.train.system_time},
                  {"init", c.train.init == InitMode::kZeros ? "zeros" : "gaussian"},
                  {"init_scale", c.train.init_scale}};
  if (c.train.clip) doc["train"]["clip"] = *c.train.clip;
  if (c.train.batch.full_pass) doc["train"]["batch"] = "full";
  else doc["train"]["batch"] = c.train.batch.batch_size;
  json bounds = {{"probe",
                  {{"points", c.bounds.probe_points}, {"batches", c.bounds.probe_batches}, {"scale", c.bounds.probe_scale}}}};
  if (c.bounds.loss_lower_bound) bounds["loss_lower_bound"] = *c.bounds.loss_lower_bound;
  if (c.bounds.L) bounds["L"] = *c.bounds.L;
  if (c.bounds.G) bounds["G"] = *c.bounds.G;
  if (c.bounds.sigma) bounds["sigma"] = *c.bounds.sigma;
  doc["bounds"] = bounds;
  doc["metrics"] = {{"cadence", c.metric_cadence}};
  doc["seeds"] = c.seeds;
  doc["output"] = c.output.string();
  return doc;
}

}  // namespace dshfl
