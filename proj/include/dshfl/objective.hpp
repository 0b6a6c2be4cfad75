#pragma once

#include "dshfl/linalg.hpp"
#include "dshfl/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dshfl {

struct ClientId {
  int group = 0;
  int client = 0;
};

/// Samples held by one client. Rows of `features` are samples.
struct ClientDataset {
  Matrix<double> features;
  std::vector<int> labels;
  ClientId owner;

  std::size_t size() const { return labels.size(); }
  Eigen::Index feature_dim() const { return features.cols(); }
};

/// Datasets of every client, indexed [group][client].
using GroupedData = std::vector<std::vector<ClientDataset>>;

enum class ObjectiveKind { kQuadratic, kLogistic };

std::string to_string(ObjectiveKind kind);

/// Minibatches are drawn uniformly with replacement. `full_pass` replaces
/// sampling with one deterministic pass over the whole dataset.
struct MinibatchSpec {
  std::size_t batch_size = 1;
  bool full_pass = false;

  static MinibatchSpec full() { return {0, true}; }
};

/// Per-client empirical loss F(x) = mean_j l(x; sample_j) + reg/2 ||x||^2.
///
/// Quadratic: l(x; z) = 1/2 (x - z)^T A (x - z), with A symmetric PSD and z
/// the sample's feature row; the model dimension equals the feature count.
///
/// Logistic with 2 classes: binary cross-entropy on sigmoid(a^T x), d = p.
/// Logistic with C > 2 classes: softmax regression, x is the column-major
/// flattening of a p x C weight matrix, d = p * C.
class Objective {
 public:
  static Objective quadratic(Matrix<double> hessian, double regularization = 0.0);
  static Objective logistic(int num_classes, Eigen::Index num_features,
                            double regularization = 0.0);

  ObjectiveKind kind() const { return kind_; }
  Eigen::Index dimension() const { return dimension_; }
  Eigen::Index feature_dim() const { return features_; }
  int num_classes() const { return classes_; }
  double regularization() const { return regularization_; }
  /// Quadratic only.
  const Matrix<double>& hessian() const { return hessian_; }

  double sample_loss(const ClientDataset& data, Eigen::Index row, const ModelVector& x) const;
  /// out += gradient of the j-th sample's loss (without regularization).
  void accumulate_sample_gradient(const ClientDataset& data, Eigen::Index row,
                                  const ModelVector& x, ModelVector& out) const;
  /// Predicted class of one sample. Logistic only.
  int predict(const Eigen::Ref<const Vector<double>>& features, const ModelVector& x) const;

  void check(const ClientDataset& data, const ModelVector& x) const;

 private:
  Objective() = default;

  ObjectiveKind kind_ = ObjectiveKind::kQuadratic;
  Eigen::Index dimension_ = 0;
  Eigen::Index features_ = 0;
  int classes_ = 0;
  double regularization_ = 0.0;
  Matrix<double> hessian_;
};

/// F_{i,k}(x) of one client.
double loss(const Objective& obj, const ClientDataset& data, const ModelVector& x);

/// Exact gradient of the client empirical loss.
ModelVector full_gradient(const Objective& obj, const ClientDataset& data, const ModelVector& x);

/// Sample indices of one minibatch, uniform with replacement.
std::vector<std::size_t> draw_minibatch(std::size_t dataset_size, std::size_t batch_size,
                                        RngStream& rng);

/// Unbiased minibatch gradient estimate.
ModelVector stochastic_gradient(const Objective& obj, const ClientDataset& data,
                                const ModelVector& x, const MinibatchSpec& batch,
                                RngStream& rng);

/// f_i(x): unweighted mean of the client losses of one group.
double group_loss(const Objective& obj, std::span<const ClientDataset> clients,
                  const ModelVector& x);
ModelVector group_gradient(const Objective& obj, std::span<const ClientDataset> clients,
                           const ModelVector& x);

/// f(x): mean of F_{i,k} over every client of every group.
double global_loss(const Objective& obj, const GroupedData& data, const ModelVector& x);
ModelVector global_gradient(const Objective& obj, const GroupedData& data,
                            const ModelVector& x);

/// Fraction of rows classified correctly. Logistic only.
double accuracy(const Objective& obj, const Matrix<double>& features,
                std::span<const int> labels, const ModelVector& x);

}  // namespace dshfl
