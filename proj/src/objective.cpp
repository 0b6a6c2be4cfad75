#include "dshfl/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dshfl {

namespace {

// log(1 + e^z) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  return kind == ObjectiveKind::kQuadratic ? "quadratic" : "logistic";
}

Objective Objective::quadratic(Matrix<double> hessian, double regularization) {
  if (hessian.rows() == 0 || hessian.rows() != hessian.cols()) {
    throw std::invalid_argument("quadratic objective: hessian must be square and non-empty");
  }
  if (!hessian.allFinite() || !hessian.isApprox(hessian.transpose(), 1e-12)) {
    throw std::invalid_argument("quadratic objective: hessian must be finite and symmetric");
  }
  if (!(regularization >= 0.0)) throw std::invalid_argument("regularization must be >= 0");
  Objective obj;
  obj.kind_ = ObjectiveKind::kQuadratic;
  obj.dimension_ = hessian.rows();
  obj.features_ = hessian.rows();
  obj.regularization_ = regularization;
  obj.hessian_ = std::move(hessian);
  return obj;
}

Objective Objective::logistic(int num_classes, Eigen::Index num_features, double regularization) {
  if (num_classes < 2) throw std::invalid_argument("logistic objective: need >= 2 classes");
  if (num_features < 1) throw std::invalid_argument("logistic objective: need >= 1 feature");
  if (!(regularization >= 0.0)) throw std::invalid_argument("regularization must be >= 0");
  Objective obj;
  obj.kind_ = ObjectiveKind::kLogistic;
  obj.classes_ = num_classes;
  obj.features_ = num_features;
  obj.dimension_ = num_classes == 2 ? num_features : num_features * num_classes;
  obj.regularization_ = regularization;
  return obj;
}

void Objective::check(const ClientDataset& data, const ModelVector& x) const {
  if (x.size() != dimension_) {
    throw std::invalid_argument("dimension mismatch: model has " + std::to_string(x.size()) +
                                " entries, objective expects " + std::to_string(dimension_));
  }
  if (data.feature_dim() != features_) {
    throw std::invalid_argument("dimension mismatch: dataset has " +
                                std::to_string(data.feature_dim()) + " features, objective expects " +
                                std::to_string(features_));
  }
  if (static_cast<std::size_t>(data.features.rows()) != data.labels.size()) {
    throw std::invalid_argument("dataset rows and labels disagree");
  }
}

double Objective::sample_loss(const ClientDataset& data, Eigen::Index row,
                              const ModelVector& x) const {
  const auto a = data.features.row(row).transpose();
  if (kind_ == ObjectiveKind::kQuadratic) {
    const Vector<double> diff = x - a;
    return 0.5 * diff.dot(hessian_ * diff);
  }
  const int y = data.labels[static_cast<std::size_t>(row)];
  if (classes_ == 2) {
    const double z = a.dot(x);
    return softplus(z) - (y == 1 ? z : 0.0);
  }
  const auto weights = x.reshaped(features_, classes_);
  const Vector<double> logits = weights.transpose() * a;
  const double top = logits.maxCoeff();
  const double lse = top + std::log((logits.array() - top).exp().sum());
  return lse - logits(y);
}

void Objective::accumulate_sample_gradient(const ClientDataset& data, Eigen::Index row,
                                           const ModelVector& x, ModelVector& out) const {
  const auto a = data.features.row(row).transpose();
  if (kind_ == ObjectiveKind::kQuadratic) {
    out.noalias() += hessian_ * (x - a);
    return;
  }
  const int y = data.labels[static_cast<std::size_t>(row)];
  if (classes_ == 2) {
    out += (sigmoid(a.dot(x)) - (y == 1 ? 1.0 : 0.0)) * a;
    return;
  }
  const auto weights = x.reshaped(features_, classes_);
  Vector<double> probs = weights.transpose() * a;
  probs = (probs.array() - probs.maxCoeff()).exp();
  probs /= probs.sum();
  probs(y) -= 1.0;
  auto grad = out.reshaped(features_, classes_);
  grad.noalias() += a * probs.transpose();
}

int Objective::predict(const Eigen::Ref<const Vector<double>>& features,
                       const ModelVector& x) const {
  if (kind_ != ObjectiveKind::kLogistic) throw std::logic_error("predict: logistic objectives only");
  if (classes_ == 2) return features.dot(x) >= 0.0 ? 1 : 0;
  const Vector<double> logits = x.reshaped(features_, classes_).transpose() * features;
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

double loss(const Objective& obj, const ClientDataset& data, const ModelVector& x) {
  obj.check(data, x);
  if (data.size() == 0) throw std::invalid_argument("loss: empty dataset");
  double total = 0.0;
  for (Eigen::Index j = 0; j < data.features.rows(); ++j) total += obj.sample_loss(data, j, x);
  return total / static_cast<double>(data.size()) + 0.5 * obj.regularization() * x.squaredNorm();
}

ModelVector full_gradient(const Objective& obj, const ClientDataset& data, const ModelVector& x) {
  obj.check(data, x);
  if (data.size() == 0) throw std::invalid_argument("full_gradient: empty dataset");
  ModelVector g = ModelVector::Zero(x.size());
  for (Eigen::Index j = 0; j < data.features.rows(); ++j) obj.accumulate_sample_gradient(data, j, x, g);
  g /= static_cast<double>(data.size());
  g += obj.regularization() * x;
  return g;
}

std::vector<std::size_t> draw_minibatch(std::size_t dataset_size, std::size_t batch_size,
                                        RngStream& rng) {
  if (dataset_size == 0) throw std::invalid_argument("draw_minibatch: empty dataset");
  if (batch_size == 0) throw std::invalid_argument("draw_minibatch: batch size must be >= 1");
  std::vector<std::size_t> rows(batch_size);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.below(dataset_size));
  return rows;
}

ModelVector stochastic_gradient(const Objective& obj, const ClientDataset& data,
                                const ModelVector& x, const MinibatchSpec& batch,
                                RngStream& rng) {
  if (data.size() == 0) throw std::invalid_argument("stochastic_gradient: empty dataset");
  if (batch.full_pass) return full_gradient(obj, data, x);
  obj.check(data, x);
  const auto rows = draw_minibatch(data.size(), batch.batch_size, rng);
  ModelVector g = ModelVector::Zero(x.size());
  for (const auto r : rows) obj.accumulate_sample_gradient(data, static_cast<Eigen::Index>(r), x, g);
  g /= static_cast<double>(rows.size());
  g += obj.regularization() * x;
  return g;
}

double group_loss(const Objective& obj, std::span<const ClientDataset> clients,
                  const ModelVector& x) {
  if (clients.empty()) throw std::invalid_argument("group_loss: group has no clients");
  double total = 0.0;
  for (const auto& c : clients) total += loss(obj, c, x);
  return total / static_cast<double>(clients.size());
}

ModelVector group_gradient(const Objective& obj, std::span<const ClientDataset> clients,
                           const ModelVector& x) {
  if (clients.empty()) throw std::invalid_argument("group_gradient: group has no clients");
  ModelVector g = ModelVector::Zero(x.size());
  for (const auto& c : clients) g += full_gradient(obj, c, x);
  return g / static_cast<double>(clients.size());
}

double global_loss(const Objective& obj, const GroupedData& data, const ModelVector& x) {
  double total = 0.0;
  std::size_t clients = 0;
  for (const auto& group : data) {
    for (const auto& c : group) total += loss(obj, c, x);
    clients += group.size();
  }
  if (clients == 0) throw std::invalid_argument("global_loss: no clients");
  return total / static_cast<double>(clients);
}

ModelVector global_gradient(const Objective& obj, const GroupedData& data, const ModelVector& x) {
  ModelVector g = ModelVector::Zero(x.size());
  std::size_t clients = 0;
  for (const auto& group : data) {
    for (const auto& c : group) g += full_gradient(obj, c, x);
    clients += group.size();
  }
  if (clients == 0) throw std::invalid_argument("global_gradient: no clients");
  return g / static_cast<double>(clients);
}

double accuracy(const Objective& obj, const Matrix<double>& features, std::span<const int> labels,
                const ModelVector& x) {
  if (features.rows() == 0) return 0.0;
  std::size_t correct = 0;
  for (Eigen::Index j = 0; j < features.rows(); ++j) {
    if (obj.predict(features.row(j).transpose(), x) == labels[static_cast<std::size_t>(j)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(features.rows());
}

}  // namespace dshfl
