#include "dshfl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dshfl {

namespace {

struct SizeSums {
  double groups = 0.0;   // |N_g|
  double total = 0.0;    // sum |N_i|
  double squares = 0.0;  // sum |N_i|^2
};

SizeSums size_sums(std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw std::invalid_argument("bounds: no groups");
  SizeSums s;
  s.groups = static_cast<double>(sizes.size());
  for (const auto n : sizes) {
    if (n == 0) throw std::invalid_argument("bounds: empty group");
    s.total += static_cast<double>(n);
    s.squares += static_cast<double>(n) * static_cast<double>(n);
  }
  return s;
}

void check_params(const BoundParams& p) {
  if (!(p.alpha > 0.0)) throw std::invalid_argument("bounds: alpha must be > 0");
  if (!(p.L > 0.0)) throw std::invalid_argument("bounds: L must be > 0");
  if (!(p.G > 0.0)) throw std::invalid_argument("bounds: G must be > 0");
  if (!(p.sigma >= 0.0)) throw std::invalid_argument("bounds: sigma must be >= 0");
}

BoundReport make_report(std::string name, const BoundParams& params,
                        std::span<const std::size_t> sizes, std::size_t rounds, double loss_gap) {
  BoundReport r;
  r.name = std::move(name);
  r.params = params;
  r.group_sizes.assign(sizes.begin(), sizes.end());
  r.rounds = rounds;
  r.loss_gap = loss_gap;
  r.premise_violated = params.alpha > 1.0 / params.L;
  return r;
}

void finish(BoundReport& r) {
  r.total = 0.0;
  for (const auto& t : r.terms) r.total += t.value;
}

}  // namespace

IterationHistory::IterationHistory(std::vector<std::vector<std::size_t>> rows) : rows_(std::move(rows)) {
  for (const auto& row : rows_) {
    if (row.size() != rows_.front().size()) throw std::invalid_argument("IterationHistory: ragged rows");
    for (const auto t : row)
      if (t < 1) throw std::invalid_argument("IterationHistory: iteration counts must be >= 1");
  }
}

IterationHistory IterationHistory::constant(std::span<const std::size_t> per_group, std::size_t rounds) {
  return IterationHistory(std::vector<std::vector<std::size_t>>(
      rounds, std::vector<std::size_t>(per_group.begin(), per_group.end())));
}

void IterationHistory::push_round(std::vector<std::size_t> counts) {
  if (!rows_.empty() && counts.size() != rows_.front().size()) {
    throw std::invalid_argument("IterationHistory: group count changed");
  }
  for (const auto t : counts)
    if (t < 1) throw std::invalid_argument("IterationHistory: iteration counts must be >= 1");
  rows_.push_back(std::move(counts));
}

std::size_t IterationHistory::at(std::size_t u, std::size_t group) const {
  if (u == 0) return 0;
  if (u > rows_.size() || group >= groups()) throw std::out_of_range("IterationHistory: missing entry");
  return rows_[u - 1][group];
}

double kappa(std::span<const std::size_t> group_sizes) {
  const auto s = size_sums(group_sizes);
  return s.groups * s.squares / (s.total * s.total);
}

double sum_of_squares_below(std::size_t t) {
  if (t == 0) return 0.0;
  const double n = static_cast<double>(t);
  return (n - 1.0) * n * (2.0 * n - 1.0) / 6.0;
}

DeviationBound lemma1_deviation_bound(std::size_t t, std::span<const std::size_t> group_sizes,
                                      double alpha, double G) {
  if (t < 1) throw std::invalid_argument("lemma1_deviation_bound: t must be >= 1");
  const double k = kappa(group_sizes);
  const double scale = 2.0 * alpha * alpha * G * G;
  DeviationBound b;
  b.group_term = scale * static_cast<double>(t) * static_cast<double>(t);
  b.all_groups_term = scale * k;
  b.total = b.group_term + b.all_groups_term;
  return b;
}

BoundReport theorem1_group_bound(const BoundParams& params, std::span<const std::size_t> group_sizes,
                                 std::size_t group, const IterationHistory& history,
                                 double loss_gap) {
  check_params(params);
  if (history.rounds() == 0) throw std::invalid_argument("theorem1_group_bound: empty history");
  if (group >= group_sizes.size() || history.groups() != group_sizes.size()) {
    throw std::invalid_argument("theorem1_group_bound: group index or history shape mismatch");
  }
  const double k = kappa(group_sizes);
  const std::size_t U = history.rounds();
  double iterations = 0.0;
  for (std::size_t u = 1; u <= U; ++u) iterations += static_cast<double>(history.at(u, group));
  double earlier_squares = 0.0;
  for (std::size_t u = 1; u + 1 <= U; ++u) {
    const double t = static_cast<double>(history.at(u, group));
    earlier_squares += t * t;
  }

  const auto& [alpha, L, G, sigma] = params;
  const double n_i = static_cast<double>(group_sizes[group]);
  const double G2 = G * G;

  auto r = make_report("theorem1_group", params, group_sizes, U, loss_gap);
  r.group = group;
  r.history = history;
  r.terms = {
      {"loss_gap", 2.0 / (alpha * iterations) * loss_gap},
      {"noise", alpha * L * sigma * sigma / n_i},
      {"drift", (1.0 / (alpha * iterations) + 2.0 * (L + 1.0) * k * alpha / iterations) *
                    static_cast<double>(U - 1) * G2},
      {"iterations", 2.0 * (L + 1.0) * alpha / iterations * earlier_squares * G2},
  };
  finish(r);
  return r;
}

BoundReport theorem2_global_bound(const BoundParams& params, std::span<const std::size_t> group_sizes,
                                  const IterationHistory& history, double loss_gap) {
  check_params(params);
  if (history.rounds() == 0) throw std::invalid_argument("theorem2_global_bound: empty history");
  if (history.groups() != group_sizes.size()) {
    throw std::invalid_argument("theorem2_global_bound: history does not cover every group");
  }
  const auto s = size_sums(group_sizes);
  const auto& [alpha, L, G, sigma] = params;
  const std::size_t U = history.rounds();
  const double a2L2 = alpha * alpha * L * L;
  const double N2 = s.total * s.total;

  double previous = 0.0;
  double within = 0.0;
  for (std::size_t u = 1; u <= U; ++u) {
    for (std::size_t i = 0; i < group_sizes.size(); ++i) {
      const double n = static_cast<double>(group_sizes[i]);
      const double t_prev = static_cast<double>(history.at(u - 1, i));
      const std::size_t t = history.at(u, i);
      previous += n * n * t_prev * t_prev;
      within += n * n * sum_of_squares_below(t) / static_cast<double>(t);
    }
  }
  const double inv_U = 1.0 / static_cast<double>(U);

  auto r = make_report("theorem2_global", params, group_sizes, U, loss_gap);
  r.history = history;
  r.terms = {
      {"t2_term1", 2.0 / alpha * inv_U * loss_gap},
      {"t2_term2", alpha * L * s.groups * s.squares * sigma * sigma / N2},
      {"t2_term3", inv_U * 12.0 * a2L2 * s.groups / N2 * previous},
      {"t2_term4", 12.0 * a2L2 * G * G * s.groups * s.groups / (N2 * N2) * s.squares * s.squares},
      {"t2_term5", inv_U * 4.0 * a2L2 * G * G * s.groups / N2 * within},
  };
  finish(r);
  return r;
}

std::size_t t_max(double sync_time, double min_delay) {
  if (!(min_delay > 0.0)) throw std::invalid_argument("t_max: minimum delay must be > 0");
  if (!(sync_time >= 0.0)) throw std::invalid_argument("t_max: S must be >= 0");
  const double q = std::ceil(sync_time / min_delay);
  return std::max<std::size_t>(1, static_cast<std::size_t>(q));
}

double corollary_rate(std::size_t rounds, double L) {
  if (rounds < 1) throw std::invalid_argument("corollary_rate: U must be >= 1");
  if (!(L > 0.0)) throw std::invalid_argument("corollary_rate: L must be > 0");
  return std::min(1.0 / std::sqrt(static_cast<double>(rounds)), 1.0 / L);
}

namespace {

void check_corollary(const CorollaryInputs& in) {
  if (in.t_max.size() != in.group_sizes.size()) throw std::invalid_argument("corollary: t_max per group required");
  if (in.rounds < 1) throw std::invalid_argument("corollary: U must be >= 1");
  for (const auto t : in.t_max)
    if (t < 1) throw std::invalid_argument("corollary: t_max must be >= 1");
}

}  // namespace

BoundReport corollary_bound(const CorollaryInputs& in) {
  check_corollary(in);
  const BoundParams params{in.alpha.value_or(corollary_rate(in.rounds, in.L)), in.L, in.G, in.sigma};
  check_params(params);
  const auto s = size_sums(in.group_sizes);
  const auto& [alpha, L, G, sigma] = params;
  const double a2L2 = alpha * alpha * L * L;
  const double N2 = s.total * s.total;
  const double U = static_cast<double>(in.rounds);

  double squares_tmax = 0.0;
  double squares_within = 0.0;
  for (std::size_t i = 0; i < in.group_sizes.size(); ++i) {
    const double n = static_cast<double>(in.group_sizes[i]);
    const double t = static_cast<double>(in.t_max[i]);
    squares_tmax += n * n * t * t;
    squares_within += n * n * (t - 1.0) * (2.0 * t - 1.0) / 6.0;
  }

  auto r = make_report("corollary", params, in.group_sizes, in.rounds, in.loss_gap);
  r.terms = {
      {"t2_term1", 2.0 / (alpha * U) * in.loss_gap},
      {"t2_term2", alpha * L * s.groups * s.squares * sigma * sigma / N2},
      // Round 1 has no predecessor, so only U - 1 rounds carry t_max^2.
      {"t2_term3", (U - 1.0) / U * 12.0 * a2L2 * s.groups / N2 * squares_tmax},
      {"t2_term4", 12.0 * a2L2 * G * G * s.groups * s.groups / (N2 * N2) * s.squares * s.squares},
      {"t2_term5", 4.0 * a2L2 * G * G * s.groups / N2 * squares_within},
  };
  finish(r);
  return r;
}

BoundReport corollary_envelope(const CorollaryInputs& in) {
  check_corollary(in);
  if (!(in.L > 0.0) || !(in.G > 0.0) || !(in.sigma >= 0.0)) throw std::invalid_argument("corollary: bad constants");
  const auto s = size_sums(in.group_sizes);
  const double L = in.L;
  const double G2 = in.G * in.G;
  const double N2 = s.total * s.total;
  const double U = static_cast<double>(in.rounds);
  const double root = std::sqrt(U);
  double squares_tmax = 0.0;
  for (std::size_t i = 0; i < in.group_sizes.size(); ++i) {
    const double n = static_cast<double>(in.group_sizes[i]);
    const double t = static_cast<double>(in.t_max[i]);
    squares_tmax += n * n * t * t;
  }
  const BoundParams params{1.0 / root, L, in.G, in.sigma};
  auto r = make_report("corollary_envelope", params, in.group_sizes, in.rounds, in.loss_gap);
  r.terms = {
      {"loss_gap", 2.0 / root * in.loss_gap},
      {"noise", 1.0 / root * L * s.groups * s.squares * in.sigma * in.sigma / N2},
      {"previous_iterations", 1.0 / U * 12.0 * L * L * s.groups / N2 * squares_tmax},
      {"within_round", 1.0 / U * 4.0 * L * L * G2 * s.groups / N2 * squares_tmax / 3.0},
      {"imbalance", 1.0 / U * 12.0 * L * L * G2 * s.groups * s.groups / (N2 * N2) * s.squares * s.squares},
  };
  finish(r);
  return r;
}

}  // namespace dshfl
