#include "dshfl/delay.hpp"

#include <algorithm>
#include <cmath>

namespace dshfl {

void ShiftedExponential::validate() const {
  if (!(shift >= 0.0) || !std::isfinite(shift)) throw std::invalid_argument("delay shift must be finite and >= 0");
  if (!(rate > 0.0)) throw std::invalid_argument("delay rate must be > 0");
  if (is_deterministic() && shift == 0.0) throw std::invalid_argument("deterministic delay must be > 0");
}

double sample_delay(const ShiftedExponential& dist, RngStream& rng) {
  if (dist.is_deterministic()) return dist.shift;
  // Inverse CDF on (0, 1]: never yields log(0).
  const double u = 1.0 - rng.uniform();
  return dist.shift - std::log(u) / dist.rate;
}

void validate(const SyncSchedule& schedule) {
  if (const auto* f = std::get_if<FixedSync>(&schedule)) {
    if (!(f->s >= 0.0) || !std::isfinite(f->s)) throw std::invalid_argument("sync time S must be finite and >= 0");
    return;
  }
  const auto& r = std::get<RampSync>(schedule);
  if (!(r.start >= 0.0) || !std::isfinite(r.end)) throw std::invalid_argument("ramp start must be >= 0 and end finite");
  if (!(r.end >= r.start)) throw std::invalid_argument("ramp end must be >= ramp start");
  if (!(r.step >= 0.0)) throw std::invalid_argument("ramp step must be >= 0");
}

double sync_time_for_round(const SyncSchedule& schedule, std::size_t u) {
  if (u < 1) throw std::invalid_argument("sync_time_for_round: rounds are 1-based");
  if (const auto* f = std::get_if<FixedSync>(&schedule)) return f->s;
  const auto& r = std::get<RampSync>(schedule);
  return std::min(r.start + static_cast<double>(u - 1) * r.step, r.end);
}

}  // namespace dshfl
