#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dshfl {

/// Realized local-iteration counts t_i^u, rounds 1..U by groups.
class IterationHistory {
 public:
  IterationHistory() = default;
  explicit IterationHistory(std::vector<std::vector<std::size_t>> rows);

  /// History where every round of group i ran `per_group[i]` iterations.
  static IterationHistory constant(std::span<const std::size_t> per_group, std::size_t rounds);

  void push_round(std::vector<std::size_t> counts);

  std::size_t rounds() const { return rows_.size(); }
  std::size_t groups() const { return rows_.empty() ? 0 : rows_.front().size(); }
  /// t_i^u for u in 1..U. u = 0 returns 0 (no round precedes the first).
  std::size_t at(std::size_t u, std::size_t group) const;

 private:
  std::vector<std::vector<std::size_t>> rows_;
};

struct BoundParams {
  double alpha = 0.0;
  double L = 1.0;
  double G = 1.0;
  double sigma = 0.0;
};

struct BoundTerm {
  std::string name;
  double value = 0.0;
};

struct BoundReport {
  std::string name;
  BoundParams params;
  std::vector<std::size_t> group_sizes;
  std::optional<std::size_t> group;
  std::size_t rounds = 0;
  double loss_gap = 0.0;
  IterationHistory history;
  std::vector<BoundTerm> terms;
  double total = 0.0;
  /// alpha > 1/L: the bound was evaluated outside its premise.
  bool premise_violated = false;

  double term(std::size_t index) const { return terms.at(index).value; }
};

/// |N_g| * sum_j |N_j|^2 / (sum_i |N_i|)^2. At least 1, equal to 1 iff all
/// groups have the same size.
double kappa(std::span<const std::size_t> group_sizes);

/// sum_{l=0}^{t-1} l^2 = (t-1) t (2t-1) / 6.
double sum_of_squares_below(std::size_t t);

struct DeviationBound {
  double group_term = 0.0;
  double all_groups_term = 0.0;
  double total = 0.0;
};

/// Upper bound on E||x^{u+1} - x_i^{u,t}||^2: 2 alpha^2 (t^2 + kappa) G^2,
/// split into group i's term 2 alpha^2 t^2 G^2 and the all-groups term
/// 2 alpha^2 kappa G^2.
DeviationBound lemma1_deviation_bound(std::size_t t, std::span<const std::size_t> group_sizes,
                                      double alpha, double G);

/// Per-group bound on the iteration-averaged ||grad f_i||^2 of group
/// `group`, four terms: loss gap, noise, (U-1)-scaled drift, sum of
/// squared iteration counts over rounds 1..U-1.
BoundReport theorem1_group_bound(const BoundParams& params, std::span<const std::size_t> group_sizes,
                                 std::size_t group, const IterationHistory& history,
                                 double loss_gap);

/// Bound on (1/U) sum_u ||grad f(x^u)||^2, five terms: loss gap, noise,
/// previous-round iteration counts (t_i^0 = 0), group imbalance, and the
/// within-round sum of l^2. The third term carries no G^2 factor.
BoundReport theorem2_global_bound(const BoundParams& params, std::span<const std::size_t> group_sizes,
                                  const IterationHistory& history, double loss_gap);

/// Maximum iteration count max(1, ceil(S / c)) under a minimum delay c.
std::size_t t_max(double sync_time, double min_delay);

/// min(1/sqrt(U), 1/L).
double corollary_rate(std::size_t rounds, double L);

struct CorollaryInputs {
  double L = 1.0;
  double G = 1.0;
  double sigma = 0.0;
  std::vector<std::size_t> group_sizes;
  std::vector<std::size_t> t_max;
  std::size_t rounds = 1;
  double loss_gap = 0.0;
  /// Defaults to corollary_rate(rounds, L).
  std::optional<double> alpha;
};

/// The global bound with every t_i^u replaced by t_i^max, evaluated in
/// closed form (no per-round loop).
BoundReport corollary_bound(const CorollaryInputs& inputs);

/// The O(1/sqrt(U)) envelope after substituting alpha <= 1/sqrt(U): the
/// first two terms scale as 1/sqrt(U), the remaining three as 1/U.
BoundReport corollary_envelope(const CorollaryInputs& inputs);

}  // namespace dshfl
