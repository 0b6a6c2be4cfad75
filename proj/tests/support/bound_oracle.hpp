#pragma once

// Brute-force bound evaluation: explicit loops, no closed forms, iteration
// counts as a plain [round][group] table.

#include <cmath>
#include <cstddef>
#include <vector>

namespace bound_oracle {

using Table = std::vector<std::vector<std::size_t>>;

struct Inputs {
  double alpha, L, G, sigma, gap;
  std::vector<std::size_t> sizes;
  Table t;  // t[u-1][i]
};

inline double total(const std::vector<std::size_t>& n) {
  double s = 0.0;
  for (const auto v : n) s += static_cast<double>(v);
  return s;
}

inline double sq_sum(const std::vector<std::size_t>& n) {
  double s = 0.0;
  for (const auto v : n) s += static_cast<double>(v) * static_cast<double>(v);
  return s;
}

inline double kappa(const std::vector<std::size_t>& n) {
  const double N = total(n);
  return static_cast<double>(n.size()) / (N * N) * sq_sum(n);
}

inline double sum_l2(std::size_t t) {
  double s = 0.0;
  for (std::size_t l = 0; l < t; ++l) s += static_cast<double>(l) * static_cast<double>(l);
  return s;
}

inline std::vector<double> theorem1(const Inputs& in, std::size_t i) {
  const std::size_t U = in.t.size();
  double St = 0.0;
  for (std::size_t u = 0; u < U; ++u) St += static_cast<double>(in.t[u][i]);
  double sq = 0.0;
  for (std::size_t u = 0; u + 1 < U; ++u) sq += std::pow(static_cast<double>(in.t[u][i]), 2);
  const double G2 = in.G * in.G;
  const double k = kappa(in.sizes);
  return {
      2.0 / (in.alpha * St) * in.gap,
      in.alpha * in.L * in.sigma * in.sigma / static_cast<double>(in.sizes[i]),
      (1.0 / (in.alpha * St) + 2.0 * (in.L + 1.0) * k * in.alpha / St) * static_cast<double>(U - 1) * G2,
      2.0 * (in.L + 1.0) * in.alpha / St * sq * G2,
  };
}

inline std::vector<double> theorem2(const Inputs& in) {
  const std::size_t U = in.t.size();
  const double N = total(in.sizes);
  const double Ng = static_cast<double>(in.sizes.size());
  const double a = in.alpha, L = in.L, G = in.G;
  double t3 = 0.0, t5 = 0.0;
  for (std::size_t u = 1; u <= U; ++u) {
    double inner3 = 0.0, inner5 = 0.0;
    for (std::size_t i = 0; i < in.sizes.size(); ++i) {
      const double n = static_cast<double>(in.sizes[i]);
      const double prev = u == 1 ? 0.0 : static_cast<double>(in.t[u - 2][i]);
      inner3 += n * n * prev * prev;
      const std::size_t t = in.t[u - 1][i];
      inner5 += n * n * (1.0 / static_cast<double>(t)) * sum_l2(t);
    }
    t3 += 12.0 * a * a * L * L * Ng / (N * N) * inner3;
    t5 += 4.0 * a * a * L * L * G * G * Ng / (N * N) * inner5;
  }
  const double q = sq_sum(in.sizes);
  return {
      2.0 / a / static_cast<double>(U) * in.gap,
      a * L * Ng * q * in.sigma * in.sigma / (N * N),
      t3 / static_cast<double>(U),
      12.0 * a * a * L * L * G * G * Ng * Ng / std::pow(N, 4) * q * q,
      t5 / static_cast<double>(U),
  };
}

}  // namespace bound_oracle
