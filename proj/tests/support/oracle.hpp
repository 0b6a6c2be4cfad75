#pragma once

// Straight-line transcription of the training loop on plain std::vector
// state. Shares only the random-stream addressing and minibatch index draws
// with the library; gradients, delays, aggregation and the clock are
// recomputed here with raw loops.

#include "dshfl/objective.hpp"
#include "dshfl/rng.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

struct Delay {
  double shift = 1.0;
  double rate = std::numeric_limits<double>::infinity();
};

struct Problem {
  bool logistic = false;        // binary logistic; otherwise quadratic
  std::vector<Vec> hessian;     // quadratic only
  double reg = 0.0;
  // data[g][k] = rows of (features, label)
  std::vector<std::vector<std::vector<Vec>>> features;
  std::vector<std::vector<std::vector<int>>> labels;
};

struct Settings {
  std::vector<Delay> group_delay;
  Delay global_delay;
  double alpha = 0.1;
  double S = 1.0;
  double T = 1.0;
  std::optional<double> clip;
  std::size_t batch = 0;  // 0 = full pass
  std::uint64_t seed = 1;
  Vec x1;
};

struct Round {
  std::vector<std::size_t> t;
  std::vector<Vec> group_final;
  Vec next;
  double clock = 0.0;
};

inline Vec sample_gradient(const Problem& p, const Vec& a, int y, const Vec& x) {
  const std::size_t d = x.size();
  Vec g(d, 0.0);
  if (p.logistic) {
    double z = 0.0;
    for (std::size_t c = 0; c < d; ++c) z += a[c] * x[c];
    const double s = 1.0 / (1.0 + std::exp(-z));
    for (std::size_t c = 0; c < d; ++c) g[c] = (s - (y == 1 ? 1.0 : 0.0)) * a[c];
  } else {
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) g[r] += p.hessian[r][c] * (x[c] - a[c]);
  }
  return g;
}

inline Vec client_gradient(const Problem& p, std::size_t g, std::size_t k, const Vec& x,
                           std::size_t batch, dshfl::RngStream& rng) {
  const auto& rows = p.features[g][k];
  std::vector<std::size_t> idx;
  if (batch == 0) {
    for (std::size_t j = 0; j < rows.size(); ++j) idx.push_back(j);
  } else {
    idx = dshfl::draw_minibatch(rows.size(), batch, rng);
  }
  Vec out(x.size(), 0.0);
  for (const auto j : idx) {
    const Vec s = sample_gradient(p, rows[j], p.labels[g][k][j], x);
    for (std::size_t c = 0; c < x.size(); ++c) out[c] += s[c];
  }
  for (std::size_t c = 0; c < x.size(); ++c) out[c] = out[c] / static_cast<double>(idx.size()) + p.reg * x[c];
  return out;
}

inline double draw(const Delay& d, dshfl::RngStream& rng) {
  if (d.rate == std::numeric_limits<double>::infinity()) return d.shift;
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return d.shift - std::log(1.0 - u) / d.rate;
}

inline Problem from_library(const dshfl::Objective& obj, const dshfl::GroupedData& data) {
  Problem p;
  p.logistic = obj.kind() == dshfl::ObjectiveKind::kLogistic;
  p.reg = obj.regularization();
  if (!p.logistic) {
    const auto& h = obj.hessian();
    p.hessian.assign(static_cast<std::size_t>(h.rows()), Vec(static_cast<std::size_t>(h.cols())));
    for (Eigen::Index r = 0; r < h.rows(); ++r)
      for (Eigen::Index c = 0; c < h.cols(); ++c) p.hessian[r][c] = h(r, c);
  }
  p.features.resize(data.size());
  p.labels.resize(data.size());
  for (std::size_t g = 0; g < data.size(); ++g)
    for (const auto& client : data[g]) {
      std::vector<Vec> rows;
      for (Eigen::Index r = 0; r < client.features.rows(); ++r) {
        Vec row;
        for (Eigen::Index c = 0; c < client.features.cols(); ++c) row.push_back(client.features(r, c));
        rows.push_back(std::move(row));
      }
      p.features[g].push_back(std::move(rows));
      p.labels[g].push_back(client.labels);
    }
  return p;
}

inline std::vector<Round> run(const Problem& p, const Settings& s) {
  using dshfl::StreamPurpose;
  const std::size_t groups = p.features.size();
  double total = 0.0;
  for (std::size_t g = 0; g < groups; ++g) total += static_cast<double>(p.features[g].size());

  std::vector<Round> rounds;
  Vec x = s.x1;
  double clock = 0.0;
  for (std::size_t u = 1; clock < s.T; ++u) {
    Round rec;
    Vec next = x;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t clients = p.features[g].size();
      dshfl::RngStream delay_rng(s.seed, {StreamPurpose::kLocalDelay, g, 0, u, 0});
      std::vector<dshfl::RngStream> client_rng;
      for (std::size_t k = 0; k < clients; ++k) client_rng.emplace_back(s.seed, dshfl::StreamKey{StreamPurpose::kMinibatch, g, k, u, 0});

      Vec lps = x;
      double elapsed = 0.0;
      std::size_t t = 0;
      while (true) {
        const double tau = draw(s.group_delay[g], delay_rng);
        Vec sum(x.size(), 0.0);
        for (std::size_t k = 0; k < clients; ++k) {
          Vec grad = client_gradient(p, g, k, lps, s.batch, client_rng[k]);
          if (s.clip) {
            double n2 = 0.0;
            for (const double v : grad) n2 += v * v;
            const double n = std::sqrt(n2);
            if (n > *s.clip)
              for (double& v : grad) v *= *s.clip / n;
          }
          for (std::size_t c = 0; c < x.size(); ++c) sum[c] += lps[c] - s.alpha * grad[c];
        }
        for (std::size_t c = 0; c < x.size(); ++c) lps[c] = sum[c] / static_cast<double>(clients);
        elapsed += tau;
        ++t;
        if (elapsed >= s.S) break;
      }
      rec.t.push_back(t);
      rec.group_final.push_back(lps);
      rec.clock = std::max(rec.clock, elapsed);
      const double w = static_cast<double>(clients) / total;
      for (std::size_t c = 0; c < x.size(); ++c) next[c] += w * (lps[c] - x[c]) / static_cast<double>(t);
    }
    dshfl::RngStream global_rng(s.seed, {StreamPurpose::kGlobalDelay, 0, 0, u, 0});
    clock += rec.clock + draw(s.global_delay, global_rng);
    rec.clock = clock;
    rec.next = next;
    x = next;
    rounds.push_back(std::move(rec));
  }
  return rounds;
}

}  // namespace oracle
