#pragma once

#include "dshfl/aggregation.hpp"
#include "dshfl/delay.hpp"
#include "dshfl/objective.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace dshfl {

struct GroupSpec {
  std::size_t num_clients = 1;
  ShiftedExponential delay;
  /// Group index used in rng stream keys. Defaults to the group's position;
  /// set it when running a subset of groups that must replay the streams
  /// they would see in the full topology.
  std::optional<std::size_t> stream_id;
};

struct Topology {
  std::vector<GroupSpec> groups;
  ShiftedExponential global_delay;

  std::vector<std::size_t> group_sizes() const;
  std::size_t total_clients() const;
  void validate() const;
};

enum class InitMode { kZeros, kGaussian };

struct HyperParams {
  double learning_rate = 0.01;
  SyncSchedule sync = FixedSync{5.0};
  double system_time = 100.0;
  std::optional<double> clip;
  MinibatchSpec batch;
  InitMode init = InitMode::kGaussian;
  double init_scale = 0.01;

  void validate() const;
};

enum class EventKind { kLocalIteration, kGlobalRound };

/// One append-only log entry. Local iterations carry the group's running
/// elapsed time in `clock`; global rounds carry the cumulative wall clock.
struct Event {
  EventKind kind = EventKind::kLocalIteration;
  std::size_t round = 0;
  int group = -1;
  std::size_t iteration = 0;
  double delay = 0.0;
  double clock = 0.0;
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(std::size_t round, const std::string& what)
      : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}
  std::size_t round() const { return round_; }

 private:
  std::size_t round_;
};

/// x - alpha * g~(x) for one client, with optional clipping of g~.
ModelVector local_sgd_step(const ModelVector& x_lps, const Objective& obj,
                           const ClientDataset& client, double alpha, const MinibatchSpec& batch,
                           std::optional<double> clip, RngStream& rng,
                           ModelVector* gradient_out = nullptr);

struct GroupRoundContext {
  std::uint64_t seed = 0;
  std::size_t stream_id = 0;
  std::size_t round = 1;
  double learning_rate = 0.01;
  MinibatchSpec batch;
  std::optional<double> clip;
  ShiftedExponential delay;
  bool keep_trail = false;
  std::vector<Event>* events = nullptr;
};

struct GroupRoundResult {
  ModelVector final_model;
  std::size_t iterations = 0;
  double elapsed = 0.0;
  std::vector<double> delays;
  /// Sum over iterations and clients of the (clipped) stochastic gradients.
  ModelVector gradient_sum;
  /// LPS models x_i^{u,0..t} when `keep_trail` is set.
  std::vector<ModelVector> trail;
};

/// Local phase of one group in one global round: starting from x^u, every
/// client steps from the shared LPS model, the LPS averages, and this
/// repeats until the group's accumulated delay reaches S.
///
/// Streams: delays come from (kLocalDelay, group, round) and client k's
/// minibatches from (kMinibatch, group, k, round), so the i-th delay of a
/// round does not depend on S.
GroupRoundResult run_group_round(const Objective& obj, std::span<const ClientDataset> clients,
                                 const ModelVector& start, double sync_time,
                                 const GroupRoundContext& ctx);

struct RoundRecord {
  std::size_t round = 0;
  double sync_time = 0.0;
  std::vector<std::size_t> iterations;
  std::vector<double> local_elapsed;
  double syncing_period = 0.0;
  double global_delay = 0.0;
  double wall_clock = 0.0;
  /// f(x^u) and ||grad f(x^u)||^2 at the model broadcast at round start.
  double global_loss = 0.0;
  double grad_norm_sq = 0.0;
  std::vector<double> deviation;
  /// Snapshots (kept when SimulationOptions::keep_snapshots).
  ModelVector start_model;
  ModelVector next_model;
  std::vector<ModelVector> group_models;
};

struct SimulationResult {
  std::vector<RoundRecord> rounds;
  ModelVector initial_model;
  ModelVector final_model;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  double final_grad_norm_sq = 0.0;
  std::vector<Event> events;

  std::size_t num_rounds() const { return rounds.size(); }
};

struct SimulationOptions {
  bool keep_snapshots = true;
  bool record_events = true;
  bool track_metrics = true;
  /// Global loss and gradient norm are computed every `metric_cadence`
  /// rounds (starting with round 1); other rounds record NaN.
  std::size_t metric_cadence = 1;
  /// When set, a learning rate above 1/L triggers `warn`.
  std::optional<double> smoothness;
  std::function<void(const std::string&)> warn;
  /// Optional starting model; overrides HyperParams::init.
  std::optional<ModelVector> initial_model;
};

ModelVector initial_model(const HyperParams& hp, Eigen::Index dimension, std::uint64_t seed);

/// Runs global rounds until the cumulative wall clock (syncing period plus
/// global delay per round) reaches T. The crossing round is completed and
/// kept, so U = min{m : clock_m >= T}.
SimulationResult run_simulation(const Topology& topology, const Objective& obj,
                                const GroupedData& data, const HyperParams& hp,
                                std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace dshfl
