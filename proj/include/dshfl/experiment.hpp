#pragma once

#include "dshfl/bounds.hpp"
#include "dshfl/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dshfl {

/// Everything a single run needs, built from a config and a seed.
struct PreparedRun {
  Objective objective = Objective::logistic(2, 1);
  GroupedData train;
  LabeledPool test;
  Topology topology;
  HyperParams hp;
  SmoothnessConstants constants;
};

PreparedRun prepare_run(const ExperimentConfig& config, std::uint64_t seed);

/// Per-round telemetry derived from the engine's snapshots.
struct RoundMetrics {
  std::vector<double> group_loss;      // f_i(x_i^{u,t_i^u})
  std::vector<double> group_accuracy;  // held-out accuracy of x_i^{u,t_i^u}
  std::vector<double> lemma1;          // deviation bound at the realized t_i^u
  double post_loss = 0.0;              // f(x^{u+1})
  double post_accuracy = 0.0;          // held-out accuracy of x^{u+1}
};

struct RunOutcome {
  std::uint64_t seed = 0;
  SimulationResult simulation;
  std::vector<RoundMetrics> metrics;
  SmoothnessConstants constants;
  double learning_rate = 0.0;
  double loss_gap = 0.0;
  BoundReport theorem2;
  std::vector<BoundReport> theorem1;
  double final_accuracy = 0.0;
};

/// Runs the engine and evaluates telemetry and bounds. Nothing is written.
RunOutcome execute_run(const PreparedRun& prepared, const ExperimentConfig& config,
                       std::uint64_t seed);
RunOutcome execute_run(const ExperimentConfig& config, std::uint64_t seed);

/// Column order of rounds.csv:
/// u,wall_clock,t_g1..t_gN,f_global,grad_norm_sq,loss_g1..loss_gN,
/// acc_g1..acc_gN,dev_g1..dev_gN,lemma1_g1..lemma1_gN
void write_rounds_csv(std::ostream& out, const RunOutcome& run);
void write_bounds_csv(std::ostream& out, const RunOutcome& run);
void write_summary_csv(std::ostream& out, const RunOutcome& run);
/// kind,u,group,iteration,delay,clock; group is empty for global rounds.
void write_events_csv(std::ostream& out, const RunOutcome& run);

/// Runs one seed and writes rounds.csv, bounds.csv, summary.csv and
/// events.csv into `dir`. On failure summary.csv carries status=failed and
/// the error, and the exception is rethrown.
RunOutcome run_experiment(const ExperimentConfig& config, std::uint64_t seed,
                          const std::filesystem::path& dir);

enum class SweepAxis { kSync, kGlobalShift, kAssociation, kSchedule };

SweepAxis parse_axis(const std::string& name);
std::string to_string(SweepAxis axis);

/// Values are strings in the CLI form of their axis: "5" for sync and
/// global shift, "5:25" for client association, "fixed:5" or
/// "ramp:1:5:1" for schedules.
struct SweepSpec {
  SweepAxis axis = SweepAxis::kSync;
  std::vector<std::string> values;
  std::vector<std::uint64_t> seeds;
};

/// Copy of `config` with one axis value applied. Throws on a malformed value.
ExperimentConfig apply_sweep_value(const ExperimentConfig& config, SweepAxis axis,
                                   const std::string& value);

struct SweepRow {
  std::string value;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t rounds = 0;
  double wall_clock = 0.0;
  double final_loss = 0.0;
  double final_accuracy = 0.0;
};

struct SweepPointSummary {
  std::string value;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double mean_loss = 0.0;
  double se_loss = 0.0;
  double mean_accuracy = 0.0;
  double se_accuracy = 0.0;
};

struct SweepResult {
  SweepAxis axis = SweepAxis::kSync;
  std::vector<SweepRow> rows;
  std::vector<SweepPointSummary> points;
};

/// Runs every (value, seed) pair, each into out/point_<p>/seed_<s>, on up to
/// `threads` workers (0 = hardware concurrency), then writes sweep.csv (one
/// row per point x seed) and sweep_summary.csv (mean and standard error per
/// point). Failed runs are recorded and skipped in the aggregates.
SweepResult run_sweep(const ExperimentConfig& config, const SweepSpec& sweep,
                      const std::filesystem::path& out, unsigned threads = 0);

SweepPointSummary summarize_point(const std::string& value, std::span<const SweepRow> rows);

struct FairnessRow {
  std::uint64_t seed = 0;
  std::size_t group = 0;
  std::size_t clients = 0;
  std::string regime;  // "isolated" or "hfl"
  double accuracy = 0.0;
  double loss = 0.0;
};

/// For every seed: the joint run, and each group run alone (its own clients
/// and data, same delays, S and T, same stream keys). Reports each group's
/// final local model on the shared held-out set. Writes fairness.csv.
std::vector<FairnessRow> fairness_experiment(const ExperimentConfig& config,
                                             const std::filesystem::path& out);

struct SchedulePoint {
  std::string variant;  // "fixed" or "ramp"
  std::uint64_t seed = 0;
  std::size_t round = 0;
  double wall_clock = 0.0;
  double sync_time = 0.0;
  double loss = 0.0;
  double accuracy = 0.0;
};

/// Paired runs (same seeds) with S fixed at ramp.end versus the ramp.
/// Writes schedule.csv with post-aggregation loss and accuracy against wall
/// clock for both variants.
std::vector<SchedulePoint> schedule_experiment(const ExperimentConfig& config, const RampSync& ramp,
                                               const std::filesystem::path& out);

}  // namespace dshfl
