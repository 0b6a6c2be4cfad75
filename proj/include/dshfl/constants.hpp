#pragma once

#include "dshfl/objective.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace dshfl {

enum class Provenance { kExact, kEstimated, kUserSupplied };

std::string to_string(Provenance p);

/// Smoothness L, gradient bound G and noise level sigma of the client losses.
struct SmoothnessConstants {
  double L = 1.0;
  double G = 1.0;
  double sigma = 0.0;
  Provenance L_source = Provenance::kEstimated;
  Provenance G_source = Provenance::kEstimated;
  Provenance sigma_source = Provenance::kEstimated;
};

/// Where and how hard estimate_constants probes. Points are x0 plus
/// N(0, scale^2 I) offsets; the first probe is x0 itself.
struct ProbeSpec {
  std::size_t points = 8;
  std::size_t batches = 64;
  double scale = 1.0;
  MinibatchSpec batch;
  std::optional<double> clip;
  std::uint64_t seed = 0;
  std::optional<ModelVector> center;
};

/// Largest eigenvalue of a symmetric PSD matrix by power iteration. Stops
/// when successive Rayleigh quotients differ by less than `tolerance`
/// (relative).
double largest_eigenvalue(const Matrix<double>& m, double tolerance = 1e-8,
                          std::size_t max_iterations = 100000);

/// L: exact for quadratics (largest Hessian eigenvalue plus regularization);
/// for logistic the upper bound c * max ||a||^2 + reg with c = 1/4 for the
/// binary model and c = 1/2 for softmax.
/// G: the clip level if clipping is on, else the largest observed
/// stochastic-gradient norm.
/// sigma: the largest per-client, per-point standard deviation
/// sqrt(mean ||g~ - grad F||^2) over the probe batches.
SmoothnessConstants estimate_constants(const Objective& obj, const GroupedData& data,
                                       const ProbeSpec& probe);

}  // namespace dshfl
