#pragma once

#include "dshfl/rng.hpp"

#include <concepts>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

namespace dshfl {

/// Delay c + Exp(rate). An infinite rate is the deterministic limit (always
/// exactly c), kept for tests and calibrated experiments.
struct ShiftedExponential {
  double shift = 0.0;
  double rate = 10.0;

  static ShiftedExponential deterministic(double value) {
    return {value, std::numeric_limits<double>::infinity()};
  }
  bool is_deterministic() const { return rate == std::numeric_limits<double>::infinity(); }
  double mean() const { return is_deterministic() ? shift : shift + 1.0 / rate; }
  void validate() const;
};

double sample_delay(const ShiftedExponential& dist, RngStream& rng);

struct FixedSync {
  double s = 0.0;
};

/// S_u = min(start + (u - 1) * step, end).
struct RampSync {
  double start = 0.0;
  double end = 0.0;
  double step = 0.0;
};

using SyncSchedule = std::variant<FixedSync, RampSync>;

void validate(const SyncSchedule& schedule);

/// Sync time of global round u (1-based).
double sync_time_for_round(const SyncSchedule& schedule, std::size_t u);

struct IterationCount {
  std::size_t iterations = 0;
  double elapsed = 0.0;
  std::vector<double> samples;
};

/// Draws delays until their running sum reaches `sync_time`:
/// t = min{n >= 1 : tau_1 + ... + tau_n >= S}. The crossing iteration is
/// included, so elapsed >= S, and S = 0 still performs one iteration.
template <typename DelaySource>
  requires std::invocable<DelaySource&> &&
           std::convertible_to<std::invoke_result_t<DelaySource&>, double>
IterationCount count_local_iterations(DelaySource&& next_delay, double sync_time) {
  if (!(sync_time >= 0.0)) throw std::invalid_argument("count_local_iterations: S must be >= 0");
  IterationCount out;
  do {
    const double tau = next_delay();
    if (!(tau > 0.0) || tau == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("count_local_iterations: delays must be positive and finite");
    }
    out.samples.push_back(tau);
    out.elapsed += tau;
    ++out.iterations;
  } while (out.elapsed < sync_time);
  return out;
}

}  // namespace dshfl
