#include "dshfl/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

namespace dshfl {

std::vector<std::size_t> Topology::group_sizes() const {
  std::vector<std::size_t> sizes;
  sizes.reserve(groups.size());
  for (const auto& g : groups) sizes.push_back(g.num_clients);
  return sizes;
}

std::size_t Topology::total_clients() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.num_clients;
  return n;
}

void Topology::validate() const {
  if (groups.empty()) throw std::invalid_argument("topology needs at least one group");
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (groups[i].num_clients == 0) {
      throw std::invalid_argument("group " + std::to_string(i) + " has no clients");
    }
    groups[i].delay.validate();
  }
  global_delay.validate();
}

void HyperParams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be > 0");
  if (!(system_time > 0.0) || !std::isfinite(system_time)) throw std::invalid_argument("system time T must be > 0");
  if (clip && !(*clip > 0.0)) throw std::invalid_argument("clipping level must be > 0");
  if (!batch.full_pass && batch.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (!(init_scale >= 0.0)) throw std::invalid_argument("init scale must be >= 0");
  dshfl::validate(sync);
}

ModelVector local_sgd_step(const ModelVector& x_lps, const Objective& obj,
                           const ClientDataset& client, double alpha, const MinibatchSpec& batch,
                           std::optional<double> clip, RngStream& rng, ModelVector* gradient_out) {
  ModelVector g = stochastic_gradient(obj, client, x_lps, batch, rng);
  if (!g.allFinite()) throw std::domain_error("non-finite stochastic gradient");
  if (clip) g = clip_gradient(g, *clip);
  ModelVector next = x_lps - alpha * g;
  if (!next.allFinite()) throw std::domain_error("non-finite model after SGD step");
  if (gradient_out) *gradient_out = std::move(g);
  return next;
}

GroupRoundResult run_group_round(const Objective& obj, std::span<const ClientDataset> clients,
                                 const ModelVector& start, double sync_time,
                                 const GroupRoundContext& ctx) {
  if (clients.empty()) throw std::invalid_argument("run_group_round: group has no clients");

  RngStream delay_rng(ctx.seed, {StreamPurpose::kLocalDelay, ctx.stream_id, 0, ctx.round, 0});
  std::vector<RngStream> client_rngs;
  client_rngs.reserve(clients.size());
  for (std::size_t k = 0; k < clients.size(); ++k) {
    client_rngs.emplace_back(ctx.seed, StreamKey{StreamPurpose::kMinibatch, ctx.stream_id, k, ctx.round, 0});
  }

  GroupRoundResult out;
  out.gradient_sum = ModelVector::Zero(start.size());
  if (ctx.keep_trail) out.trail.push_back(start);

  ModelVector lps = start;
  std::vector<ModelVector> client_models(clients.size());
  ModelVector g;
  auto step = [&]() {
    const double tau = sample_delay(ctx.delay, delay_rng);
    for (std::size_t k = 0; k < clients.size(); ++k) {
      client_models[k] = local_sgd_step(lps, obj, clients[k], ctx.learning_rate, ctx.batch, ctx.clip,
                                        client_rngs[k], &g);
      out.gradient_sum += g;
    }
    lps = local_aggregate<double>(client_models);
    if (ctx.keep_trail) out.trail.push_back(lps);
    if (ctx.events) {
      ctx.events->push_back({EventKind::kLocalIteration, ctx.round, static_cast<int>(ctx.stream_id),
                             out.delays.size() + 1, tau, out.elapsed + tau});
    }
    out.delays.push_back(tau);
    out.elapsed += tau;
    return tau;
  };
  const auto count = count_local_iterations(step, sync_time);
  out.iterations = count.iterations;
  out.elapsed = count.elapsed;
  out.final_model = std::move(lps);
  return out;
}

ModelVector initial_model(const HyperParams& hp, Eigen::Index dimension, std::uint64_t seed) {
  ModelVector x = ModelVector::Zero(dimension);
  if (hp.init == InitMode::kGaussian) {
    RngStream rng(seed, {StreamPurpose::kInit, 0, 0, 0, 0});
    for (Eigen::Index c = 0; c < dimension; ++c) x(c) = hp.init_scale * rng.normal();
  }
  return x;
}

SimulationResult run_simulation(const Topology& topology, const Objective& obj,
                                const GroupedData& data, const HyperParams& hp,
                                std::uint64_t seed, const SimulationOptions& options) {
  topology.validate();
  hp.validate();
  if (data.size() != topology.groups.size()) {
    throw std::invalid_argument("run_simulation: data has " + std::to_string(data.size()) +
                                " groups, topology has " + std::to_string(topology.groups.size()));
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != topology.groups[i].num_clients) {
      throw std::invalid_argument("run_simulation: group " + std::to_string(i) + " has " +
                                  std::to_string(data[i].size()) + " datasets for " +
                                  std::to_string(topology.groups[i].num_clients) + " clients");
    }
  }
  if (options.smoothness && hp.learning_rate > 1.0 / *options.smoothness) {
    std::ostringstream os;
    os << "learning rate " << hp.learning_rate << " exceeds 1/L = " << 1.0 / *options.smoothness;
    const std::string msg = os.str();
    if (options.warn) options.warn(msg);
    else std::cerr << "warning: " << msg << '\n';
  }

  const auto sizes = topology.group_sizes();
  SimulationResult result;
  result.initial_model = options.initial_model ? *options.initial_model
                                               : initial_model(hp, obj.dimension(), seed);
  if (result.initial_model.size() != obj.dimension()) {
    throw std::invalid_argument("run_simulation: initial model has the wrong dimension");
  }
  if (options.track_metrics) result.initial_loss = global_loss(obj, data, result.initial_model);

  ModelVector x = result.initial_model;
  double clock = 0.0;
  std::size_t u = 0;
  while (clock < hp.system_time) {
    ++u;
    RoundRecord rec;
    rec.round = u;
    rec.sync_time = sync_time_for_round(hp.sync, u);
    rec.global_loss = std::numeric_limits<double>::quiet_NaN();
    rec.grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
    try {
      if (options.track_metrics && (u - 1) % std::max<std::size_t>(options.metric_cadence, 1) == 0) {
        rec.global_loss = global_loss(obj, data, x);
        rec.grad_norm_sq = global_gradient(obj, data, x).squaredNorm();
      }
      std::vector<ModelVector> uploads;
      std::vector<ModelVector> finals;
      uploads.reserve(data.size());
      finals.reserve(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) {
        GroupRoundContext ctx;
        ctx.seed = seed;
        ctx.stream_id = topology.groups[i].stream_id.value_or(i);
        ctx.round = u;
        ctx.learning_rate = hp.learning_rate;
        ctx.batch = hp.batch;
        ctx.clip = hp.clip;
        ctx.delay = topology.groups[i].delay;
        ctx.events = options.record_events ? &result.events : nullptr;
        auto group = run_group_round(obj, data[i], x, rec.sync_time, ctx);
        uploads.push_back(make_upload(x, group.final_model, group.iterations));
        rec.iterations.push_back(group.iterations);
        rec.local_elapsed.push_back(group.elapsed);
        finals.push_back(std::move(group.final_model));
      }
      ModelVector next = global_aggregate<double>(x, uploads, sizes);
      if (!next.allFinite()) throw std::domain_error("non-finite global model");

      RngStream global_rng(seed, {StreamPurpose::kGlobalDelay, 0, 0, u, 0});
      rec.global_delay = sample_delay(topology.global_delay, global_rng);
      rec.syncing_period = *std::max_element(rec.local_elapsed.begin(), rec.local_elapsed.end());
      clock += rec.syncing_period + rec.global_delay;
      rec.wall_clock = clock;
      rec.deviation = measure_deviation<double>(next, finals);
      if (options.record_events) {
        result.events.push_back({EventKind::kGlobalRound, u, -1, 0, rec.global_delay, clock});
      }
      if (options.keep_snapshots) {
        rec.start_model = x;
        rec.next_model = next;
        rec.group_models = std::move(finals);
      }
      x = std::move(next);
    } catch (const SimulationError&) {
      throw;
    } catch (const std::domain_error& e) {
      throw SimulationError(u, e.what());
    }
    result.rounds.push_back(std::move(rec));
  }

  result.final_model = x;
  if (options.track_metrics) {
    result.final_loss = global_loss(obj, data, x);
    result.final_grad_norm_sq = global_gradient(obj, data, x).squaredNorm();
  }
  return result;
}

}  // namespace dshfl
