#include "dshfl/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace dshfl {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(part);
  return parts;
}

std::ofstream open_csv(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

template <typename Fn>
void header_series(std::ostream& out, const char* prefix, std::size_t groups, Fn&&) {
  for (std::size_t i = 0; i < groups; ++i) out << ',' << prefix << (i + 1);
}

}  // namespace

PreparedRun prepare_run(const ExperimentConfig& config, std::uint64_t seed) {
  PreparedRun p;
  p.topology = config.topology;
  p.hp = config.train;
  p.topology.validate();
  p.hp.validate();

  const std::uint64_t data_seed = config.data.seed.value_or(seed);
  LabeledPool pool;
  if (config.data.source == DataConfig::Source::kCsv) {
    pool = read_csv(config.data.path);
  } else {
    RngStream rng(data_seed, {StreamPurpose::kData, 0, 0, 0, 0});
    pool = generate_synthetic(config.data.synthetic, rng);
  }
  const bool logistic = config.objective.kind == ObjectiveKind::kLogistic;
  if (logistic && pool.num_classes > config.data.synthetic.classes) {
    throw std::invalid_argument("dataset has " + std::to_string(pool.num_classes) +
                                " labels but objective.classes = " +
                                std::to_string(config.data.synthetic.classes));
  }
  pool.num_classes = std::max(pool.num_classes, config.data.synthetic.classes);

  LabeledPool train_pool;
  if (logistic && config.data.test_fraction > 0.0) {
    RngStream rng(data_seed, {StreamPurpose::kHoldout, 0, 0, 0, 0});
    std::tie(train_pool, p.test) = split_holdout(pool, config.data.test_fraction, rng);
  } else {
    train_pool = std::move(pool);
    p.test.num_classes = train_pool.num_classes;
    p.test.features.resize(0, train_pool.features.cols());
  }

  RngStream part_rng(data_seed, {StreamPurpose::kPartition, 0, 0, 0, 0});
  const auto sizes = p.topology.group_sizes();
  p.train = materialize(train_pool, partition(train_pool, sizes, config.data.partition, config.data.skew, part_rng));

  const auto dim = train_pool.features.cols();
  if (logistic) {
    p.objective = Objective::logistic(config.data.synthetic.classes, dim, config.objective.regularization);
  } else {
    Matrix<double> h = Matrix<double>::Identity(dim, dim);
    if (!config.objective.hessian_diag.empty()) {
      if (static_cast<Eigen::Index>(config.objective.hessian_diag.size()) != dim) {
        throw std::invalid_argument("objective.hessian_diag length must equal the feature count");
      }
      h = Eigen::Map<const Vector<double>>(config.objective.hessian_diag.data(), dim).asDiagonal();
    }
    p.objective = Objective::quadratic(h, config.objective.regularization);
  }

  ProbeSpec probe;
  probe.points = config.bounds.probe_points;
  probe.batches = config.bounds.probe_batches;
  probe.scale = config.bounds.probe_scale;
  probe.batch = p.hp.batch;
  probe.clip = p.hp.clip;
  probe.seed = seed;
  p.constants = estimate_constants(p.objective, p.train, probe);
  if (config.bounds.L) {
    p.constants.L = *config.bounds.L;
    p.constants.L_source = Provenance::kUserSupplied;
  }
  if (config.bounds.G) {
    p.constants.G = *config.bounds.G;
    p.constants.G_source = Provenance::kUserSupplied;
  }
  if (config.bounds.sigma) {
    p.constants.sigma = *config.bounds.sigma;
    p.constants.sigma_source = Provenance::kUserSupplied;
  }
  return p;
}

RunOutcome execute_run(const PreparedRun& p, const ExperimentConfig& config, std::uint64_t seed) {
  SimulationOptions options;
  options.smoothness = p.constants.L;
  options.metric_cadence = config.metric_cadence;
  options.warn = [](const std::string& msg) { std::cerr << "warning: " << msg << '\n'; };

  RunOutcome run;
  run.seed = seed;
  run.constants = p.constants;
  run.learning_rate = p.hp.learning_rate;
  run.simulation = run_simulation(p.topology, p.objective, p.train, p.hp, seed, options);

  const auto& sim = run.simulation;
  const auto sizes = p.topology.group_sizes();
  const bool logistic = p.objective.kind() == ObjectiveKind::kLogistic;
  const bool has_test = logistic && p.test.size() > 0;
  auto acc = [&](const ModelVector& x) {
    return has_test ? accuracy(p.objective, p.test.features, p.test.labels, x) : kNaN;
  };

  IterationHistory history;
  run.metrics.reserve(sim.rounds.size());
  for (std::size_t r = 0; r < sim.rounds.size(); ++r) {
    const auto& rec = sim.rounds[r];
    history.push_round(rec.iterations);
    RoundMetrics m;
    for (std::size_t i = 0; i < rec.group_models.size(); ++i) {
      m.group_loss.push_back(group_loss(p.objective, p.train[i], rec.group_models[i]));
      m.group_accuracy.push_back(acc(rec.group_models[i]));
      m.lemma1.push_back(lemma1_deviation_bound(rec.iterations[i], sizes, p.hp.learning_rate, p.constants.G).total);
    }
    const bool next_known = r + 1 < sim.rounds.size() && !std::isnan(sim.rounds[r + 1].global_loss);
    m.post_loss = next_known ? sim.rounds[r + 1].global_loss
                             : (r + 1 == sim.rounds.size() ? sim.final_loss
                                                           : global_loss(p.objective, p.train, rec.next_model));
    m.post_accuracy = acc(rec.next_model);
    run.metrics.push_back(std::move(m));
  }
  run.final_accuracy = acc(sim.final_model);

  const double floor = config.bounds.loss_lower_bound.value_or(sim.final_loss);
  run.loss_gap = sim.initial_loss - floor;
  const BoundParams params{p.hp.learning_rate, p.constants.L, p.constants.G, p.constants.sigma};
  run.theorem2 = theorem2_global_bound(params, sizes, history, run.loss_gap);
  const auto& last = sim.rounds.back();
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double start = group_loss(p.objective, p.train[i], sim.initial_model);
    const double end = config.bounds.loss_lower_bound.value_or(group_loss(p.objective, p.train[i], last.group_models[i]));
    run.theorem1.push_back(theorem1_group_bound(params, sizes, i, history, start - end));
  }
  return run;
}

RunOutcome execute_run(const ExperimentConfig& config, std::uint64_t seed) {
  return execute_run(prepare_run(config, seed), config, seed);
}

void write_rounds_csv(std::ostream& out, const RunOutcome& run) {
  const auto& rounds = run.simulation.rounds;
  const std::size_t n = rounds.empty() ? 0 : rounds.front().iterations.size();
  out << "u,wall_clock";
  for (const char* prefix : {"t_g"}) header_series(out, prefix, n, 0);
  out << ",f_global,grad_norm_sq";
  for (const char* prefix : {"loss_g", "acc_g", "dev_g", "lemma1_g"}) header_series(out, prefix, n, 0);
  out << '\n';
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const auto& rec = rounds[r];
    const auto& m = run.metrics[r];
    out << rec.round << ',' << num(rec.wall_clock);
    for (const auto t : rec.iterations) out << ',' << t;
    out << ',' << num(rec.global_loss) << ',' << num(rec.grad_norm_sq);
    for (const auto v : m.group_loss) out << ',' << num(v);
    for (const auto v : m.group_accuracy) out << ',' << num(v);
    for (const auto v : rec.deviation) out << ',' << num(v);
    for (const auto v : m.lemma1) out << ',' << num(v);
    out << '\n';
  }
}

void write_bounds_csv(std::ostream& out, const RunOutcome& run) {
  const auto& b = run.theorem2;
  out << "seed,U,alpha,L,G,sigma,L_source,G_source,sigma_source,kappa,loss_gap,premise_violated";
  for (const auto& t : b.terms) out << ',' << t.name;
  out << ",t2_total\n";
  out << run.seed << ',' << b.rounds << ',' << num(b.params.alpha) << ',' << num(b.params.L) << ','
      << num(b.params.G) << ',' << num(b.params.sigma) << ',' << to_string(run.constants.L_source) << ','
      << to_string(run.constants.G_source) << ',' << to_string(run.constants.sigma_source) << ','
      << num(kappa(b.group_sizes)) << ',' << num(b.loss_gap) << ',' << (b.premise_violated ? 1 : 0);
  for (const auto& t : b.terms) out << ',' << num(t.value);
  out << ',' << num(b.total) << '\n';
}

void write_summary_csv(std::ostream& out, const RunOutcome& run) {
  const auto& sim = run.simulation;
  const std::size_t n = run.theorem1.size();
  out << "status,seed,U,wall_clock,f_initial,f_final,grad_norm_sq_final,acc_final,alpha,t2_total";
  header_series(out, "t1_total_g", n, 0);
  out << ",error\n";
  out << "ok," << run.seed << ',' << sim.num_rounds() << ',' << num(sim.rounds.back().wall_clock) << ','
      << num(sim.initial_loss) << ',' << num(sim.final_loss) << ',' << num(sim.final_grad_norm_sq) << ','
      << num(run.final_accuracy) << ',' << num(run.learning_rate) << ',' << num(run.theorem2.total);
  for (const auto& t1 : run.theorem1) out << ',' << num(t1.total);
  out << ",\n";
}

void write_events_csv(std::ostream& out, const RunOutcome& run) {
  out << "kind,u,group,iteration,delay,clock\n";
  for (const auto& e : run.simulation.events) {
    if (e.kind == EventKind::kLocalIteration) {
      out << "local," << e.round << ',' << (e.group + 1) << ',' << e.iteration << ',' << num(e.delay) << ','
          << num(e.clock) << '\n';
    } else {
      out << "global," << e.round << ",,," << num(e.delay) << ',' << num(e.clock) << '\n';
    }
  }
}

RunOutcome run_experiment(const ExperimentConfig& config, std::uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  try {
    auto run = execute_run(config, seed);
    auto rounds = open_csv(dir / "rounds.csv");
    write_rounds_csv(rounds, run);
    auto bounds = open_csv(dir / "bounds.csv");
    write_bounds_csv(bounds, run);
    auto events = open_csv(dir / "events.csv");
    write_events_csv(events, run);
    auto summary = open_csv(dir / "summary.csv");
    write_summary_csv(summary, run);
    return run;
  } catch (const std::exception& e) {
    auto summary = open_csv(dir / "summary.csv");
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    summary << "status,seed,error\nfailed," << seed << ',' << msg << '\n';
    throw;
  }
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "s" || name == "sync") return SweepAxis::kSync;
  if (name == "cg" || name == "global_shift") return SweepAxis::kGlobalShift;
  if (name == "association") return SweepAxis::kAssociation;
  if (name == "schedule") return SweepAxis::kSchedule;
  throw std::invalid_argument("unknown sweep axis '" + name + "' (s, cg, association, schedule)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::kSync: return "s";
    case SweepAxis::kGlobalShift: return "cg";
    case SweepAxis::kAssociation: return "association";
    case SweepAxis::kSchedule: return "schedule";
  }
  return "unknown";
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& config, SweepAxis axis, const std::string& value) {
  ExperimentConfig c = config;
  switch (axis) {
    case SweepAxis::kSync: {
      const double s = parse_double(value);
      if (s < 0) throw std::invalid_argument("sync time must be >= 0");
      c.train.sync = FixedSync{s};
      break;
    }
    case SweepAxis::kGlobalShift: {
      const double cg = parse_double(value);
      if (cg < 0) throw std::invalid_argument("global shift must be >= 0");
      c.topology.global_delay.shift = cg;
      break;
    }
    case SweepAxis::kAssociation: {
      const auto parts = split(value, ':');
      if (parts.size() != c.topology.groups.size()) {
        throw std::invalid_argument("association '" + value + "' needs " + std::to_string(c.topology.groups.size()) +
                                    " client counts");
      }
      for (std::size_t i = 0; i < parts.size(); ++i) {
        const double n = parse_double(parts[i]);
        if (n < 1 || n != std::floor(n)) throw std::invalid_argument("client counts must be integers >= 1");
        c.topology.groups[i].num_clients = static_cast<std::size_t>(n);
      }
      break;
    }
    case SweepAxis::kSchedule: {
      const auto parts = split(value, ':');
      if (parts.size() == 2 && parts[0] == "fixed") {
        c.train.sync = FixedSync{parse_double(parts[1])};
      } else if (parts.size() == 4 && parts[0] == "ramp") {
        c.train.sync = RampSync{parse_double(parts[1]), parse_double(parts[2]), parse_double(parts[3])};
      } else {
        throw std::invalid_argument("schedule '" + value + "' must be fixed:S or ramp:start:end:step");
      }
      validate(c.train.sync);
      break;
    }
  }
  c.topology.validate();
  return c;
}

SweepPointSummary summarize_point(const std::string& value, std::span<const SweepRow> rows) {
  SweepPointSummary s;
  s.value = value;
  std::vector<double> losses, accs;
  for (const auto& r : rows) {
    if (r.value != value) continue;
    ++s.runs;
    if (!r.ok) {
      ++s.failed;
      continue;
    }
    losses.push_back(r.final_loss);
    accs.push_back(r.final_accuracy);
  }
  auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
    if (v.empty()) {
      mean = se = kNaN;
      return;
    }
    mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() < 2) {
      se = kNaN;
      return;
    }
    double ss = 0.0;
    for (const auto x : v) ss += (x - mean) * (x - mean);
    se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  };
  mean_se(losses, s.mean_loss, s.se_loss);
  mean_se(accs, s.mean_accuracy, s.se_accuracy);
  return s;
}

SweepResult run_sweep(const ExperimentConfig& config, const SweepSpec& sweep, const fs::path& out,
                      unsigned threads) {
  if (sweep.values.empty()) throw std::invalid_argument("sweep needs at least one value");
  const auto seeds = sweep.seeds.empty() ? config.seeds : sweep.seeds;
  if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");

  // Malformed values are config errors, not failed runs.
  std::vector<ExperimentConfig> configs;
  for (const auto& v : sweep.values) configs.push_back(apply_sweep_value(config, sweep.axis, v));

  SweepResult result;
  result.axis = sweep.axis;
  result.rows.resize(sweep.values.size() * seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t job = next++; job < result.rows.size(); job = next++) {
      const std::size_t p = job / seeds.size();
      const std::size_t s = job % seeds.size();
      auto& row = result.rows[job];
      row.value = sweep.values[p];
      row.seed = seeds[s];
      const auto dir = out / ("point_" + std::to_string(p)) / ("seed_" + std::to_string(seeds[s]));
      try {
        const auto run = run_experiment(configs[p], seeds[s], dir);
        row.ok = true;
        row.rounds = run.simulation.num_rounds();
        row.wall_clock = run.simulation.rounds.back().wall_clock;
        row.final_loss = run.simulation.final_loss;
        row.final_accuracy = run.final_accuracy;
      } catch (const std::exception& e) {
        row.ok = false;
        row.error = e.what();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                                     static_cast<unsigned>(result.rows.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
  }

  for (const auto& v : sweep.values) result.points.push_back(summarize_point(v, result.rows));

  fs::create_directories(out);
  auto rows = open_csv(out / "sweep.csv");
  rows << "axis,value,seed,status,U,wall_clock,final_loss,final_accuracy,error\n";
  for (const auto& r : result.rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    rows << to_string(sweep.axis) << ',' << r.value << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ','
         << r.rounds << ',' << num(r.wall_clock) << ',' << num(r.final_loss) << ',' << num(r.final_accuracy) << ','
         << err << '\n';
  }
  auto summary = open_csv(out / "sweep_summary.csv");
  summary << "axis,value,runs,failed,mean_loss,se_loss,mean_accuracy,se_accuracy\n";
  for (const auto& s : result.points) {
    summary << to_string(sweep.axis) << ',' << s.value << ',' << s.runs << ',' << s.failed << ','
            << num(s.mean_loss) << ',' << num(s.se_loss) << ',' << num(s.mean_accuracy) << ','
            << num(s.se_accuracy) << '\n';
  }
  return result;
}

std::vector<FairnessRow> fairness_experiment(const ExperimentConfig& config, const fs::path& out) {
  std::vector<FairnessRow> rows;
  for (const auto seed : config.seeds) {
    const auto prepared = prepare_run(config, seed);
    const auto joint = execute_run(prepared, config, seed);
    const auto& last = joint.metrics.back();
    const auto& last_rec = joint.simulation.rounds.back();
    for (std::size_t i = 0; i < prepared.topology.groups.size(); ++i) {
      rows.push_back({seed, i, prepared.topology.groups[i].num_clients, "hfl", last.group_accuracy[i],
                      last.group_loss[i]});
      (void)last_rec;
    }
    for (std::size_t i = 0; i < prepared.topology.groups.size(); ++i) {
      PreparedRun alone = prepared;
      alone.topology.groups = {prepared.topology.groups[i]};
      alone.topology.groups[0].stream_id = i;
      alone.train = {prepared.train[i]};
      const auto run = execute_run(alone, config, seed);
      const auto& m = run.metrics.back();
      rows.push_back({seed, i, prepared.topology.groups[i].num_clients, "isolated", m.group_accuracy[0],
                      m.group_loss[0]});
    }
  }
  fs::create_directories(out);
  auto csv = open_csv(out / "fairness.csv");
  csv << "seed,group,clients,regime,accuracy,loss\n";
  for (const auto& r : rows) {
    csv << r.seed << ',' << (r.group + 1) << ',' << r.clients << ',' << r.regime << ',' << num(r.accuracy) << ','
        << num(r.loss) << '\n';
  }
  return rows;
}

std::vector<SchedulePoint> schedule_experiment(const ExperimentConfig& config, const RampSync& ramp,
                                               const fs::path& out) {
  validate(SyncSchedule{ramp});
  std::vector<SchedulePoint> points;
  for (const auto seed : config.seeds) {
    for (const auto* variant : {"fixed", "ramp"}) {
      ExperimentConfig c = config;
      if (std::string(variant) == "fixed") c.train.sync = FixedSync{ramp.end};
      else c.train.sync = ramp;
      const auto run = execute_run(c, seed);
      for (std::size_t r = 0; r < run.simulation.rounds.size(); ++r) {
        const auto& rec = run.simulation.rounds[r];
        points.push_back({variant, seed, rec.round, rec.wall_clock, rec.sync_time, run.metrics[r].post_loss,
                          run.metrics[r].post_accuracy});
      }
    }
  }
  fs::create_directories(out);
  auto csv = open_csv(out / "schedule.csv");
  csv << "variant,seed,u,wall_clock,sync_time,loss,accuracy\n";
  for (const auto& p : points) {
    csv << p.variant << ',' << p.seed << ',' << p.round << ',' << num(p.wall_clock) << ',' << num(p.sync_time)
        << ',' << num(p.loss) << ',' << num(p.accuracy) << '\n';
  }
  return points;
}

}  // namespace dshfl
