#include "dshfl/constants.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dshfl {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::kExact: return "exact";
    case Provenance::kEstimated: return "estimated";
    case Provenance::kUserSupplied: return "user-supplied";
  }
  return "unknown";
}

double largest_eigenvalue(const Matrix<double>& m, double tolerance, std::size_t max_iterations) {
  if (m.rows() == 0 || m.rows() != m.cols()) throw std::invalid_argument("largest_eigenvalue: square matrix required");
  // Deterministic start with every eigen-direction represented generically.
  Vector<double> v(m.rows());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = 1.0 + 0.1 * static_cast<double>(i);
  v.normalize();
  double previous = v.dot(m * v);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    Vector<double> w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    const double rayleigh = v.dot(m * v);
    if (std::abs(rayleigh - previous) <= tolerance * std::max(1.0, std::abs(rayleigh))) return rayleigh;
    previous = rayleigh;
  }
  return previous;
}

SmoothnessConstants estimate_constants(const Objective& obj, const GroupedData& data,
                                       const ProbeSpec& probe) {
  if (probe.points == 0 || probe.batches == 0) {
    throw std::invalid_argument("estimate_constants: probe spec needs >= 1 point and >= 1 batch");
  }
  if (probe.clip && !(*probe.clip > 0.0)) throw std::invalid_argument("estimate_constants: clip must be positive");

  SmoothnessConstants out;
  if (obj.kind() == ObjectiveKind::kQuadratic) {
    out.L = largest_eigenvalue(obj.hessian()) + obj.regularization();
    out.L_source = Provenance::kExact;
  } else {
    double max_sq = 0.0;
    for (const auto& group : data)
      for (const auto& client : group)
        if (client.size() > 0) max_sq = std::max(max_sq, client.features.rowwise().squaredNorm().maxCoeff());
    const double curvature = obj.num_classes() == 2 ? 0.25 : 0.5;
    out.L = curvature * max_sq + obj.regularization();
    out.L_source = Provenance::kEstimated;
  }
  if (!(out.L > 0.0)) out.L = obj.regularization() > 0.0 ? obj.regularization() : 1e-12;

  RngStream points_rng(probe.seed, {StreamPurpose::kProbe, 0, 0, 0, 0});
  const ModelVector center = probe.center ? *probe.center : ModelVector::Zero(obj.dimension());
  double max_norm = 0.0;
  double max_sigma = 0.0;
  for (std::size_t p = 0; p < probe.points; ++p) {
    ModelVector x = center;
    if (p > 0)
      for (Eigen::Index c = 0; c < x.size(); ++c) x(c) += probe.scale * points_rng.normal();
    for (std::size_t g = 0; g < data.size(); ++g) {
      for (std::size_t k = 0; k < data[g].size(); ++k) {
        const auto& client = data[g][k];
        const ModelVector exact = full_gradient(obj, client, x);
        RngStream rng(probe.seed, {StreamPurpose::kProbe, g + 1, k, p, 1});
        double sq_dev = 0.0;
        for (std::size_t b = 0; b < probe.batches; ++b) {
          ModelVector g_tilde = stochastic_gradient(obj, client, x, probe.batch, rng);
          sq_dev += (g_tilde - exact).squaredNorm();
          if (probe.clip) g_tilde = clip_gradient(g_tilde, *probe.clip);
          max_norm = std::max(max_norm, g_tilde.norm());
        }
        max_sigma = std::max(max_sigma, std::sqrt(sq_dev / static_cast<double>(probe.batches)));
      }
    }
  }
  if (probe.clip) {
    out.G = *probe.clip;
    out.G_source = Provenance::kUserSupplied;
  } else {
    out.G = max_norm > 0.0 ? max_norm : 1e-12;
    out.G_source = Provenance::kEstimated;
  }
  out.sigma = max_sigma;
  out.sigma_source = Provenance::kEstimated;
  return out;
}

}  // namespace dshfl
