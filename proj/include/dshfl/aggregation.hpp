#pragma once

#include "dshfl/linalg.hpp"

#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace dshfl {

/// LPS aggregation: unweighted mean of the client models.
template <typename Scalar>
Vector<Scalar> local_aggregate(std::span<const Vector<Scalar>> models) {
  if (models.empty()) throw std::invalid_argument("local_aggregate: no client models");
  Vector<Scalar> sum = models.front();
  for (std::size_t k = 1; k < models.size(); ++k) {
    if (models[k].size() != sum.size()) throw std::invalid_argument("local_aggregate: dimension mismatch");
    sum += models[k];
  }
  return sum / static_cast<Scalar>(models.size());
}

/// Bias-corrected upload (x_final - x_init) / t.
template <typename DerivedA, typename DerivedB>
Vector<typename DerivedA::Scalar> make_upload(const Eigen::MatrixBase<DerivedA>& x_init,
                                              const Eigen::MatrixBase<DerivedB>& x_final,
                                              std::size_t iterations) {
  if (iterations == 0) throw std::invalid_argument("make_upload: at least one local iteration required");
  if (x_init.size() != x_final.size()) throw std::invalid_argument("make_upload: dimension mismatch");
  return (x_final - x_init) / static_cast<typename DerivedA::Scalar>(iterations);
}

/// GPS update x + sum_i (|N_i| / sum_j |N_j|) upload_i.
template <typename Scalar>
Vector<Scalar> global_aggregate(const Vector<Scalar>& x, std::span<const Vector<Scalar>> uploads,
                                std::span<const std::size_t> group_sizes) {
  if (uploads.size() != group_sizes.size()) {
    throw std::invalid_argument("global_aggregate: expected one upload per group (" +
                                std::to_string(group_sizes.size()) + "), got " +
                                std::to_string(uploads.size()));
  }
  const auto total = std::accumulate(group_sizes.begin(), group_sizes.end(), std::size_t{0});
  if (total == 0) throw std::invalid_argument("global_aggregate: no clients");
  Vector<Scalar> next = x;
  for (std::size_t i = 0; i < uploads.size(); ++i) {
    if (uploads[i].size() != x.size()) throw std::invalid_argument("global_aggregate: dimension mismatch");
    next += (static_cast<Scalar>(group_sizes[i]) / static_cast<Scalar>(total)) * uploads[i];
  }
  return next;
}

/// ||x^{u+1} - x_i^{u,t_i}||^2 for every group.
template <typename Scalar>
std::vector<Scalar> measure_deviation(const Vector<Scalar>& next_global,
                                      std::span<const Vector<Scalar>> group_models) {
  std::vector<Scalar> out;
  out.reserve(group_models.size());
  for (const auto& m : group_models) {
    if (m.size() != next_global.size()) throw std::invalid_argument("measure_deviation: dimension mismatch");
    out.push_back((next_global - m).squaredNorm());
  }
  return out;
}

}  // namespace dshfl
