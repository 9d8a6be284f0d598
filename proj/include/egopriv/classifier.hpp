#pragma once

#include "egopriv/data.hpp"
#include "egopriv/optim.hpp"
#include "egopriv/pooling.hpp"
#include "egopriv/random.hpp"
#include "egopriv/train.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace egopriv {

struct ProbabilityPrediction {
  std::string clip_id;
  Attribute attribute = Attribute::Gender;
  Eigen::VectorXd probs;

  // Hard prediction; ties go to the lowest class index.
  int argmax() const;
};

int argmax_lowest(const Eigen::VectorXd& v);

// One affine layer plus softmax over the pooled clip embedding.
// Flat parameter layout: [score vector (Attention only)] [W (classes x dim, column-major)] [b].
class ClassifierHead {
 public:
  ClassifierHead() = default;
  ClassifierHead(Attribute attribute, View view, std::size_t input_dim, Pooling pooling,
                 Eigen::VectorXd params);

  static ClassifierHead initialize(Attribute attribute, View view, std::size_t input_dim, Pooling pooling,
                                   Rng& rng);
  static ClassifierHead zeros(Attribute attribute, View view, std::size_t input_dim, Pooling pooling);

  Attribute attribute() const { return attribute_; }
  View view() const { return view_; }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t classes() const { return classes_; }
  Pooling pooling() const { return pooling_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  Eigen::VectorXd score_vector() const;
  Eigen::MatrixXd weight() const;
  Eigen::VectorXd bias() const;

  Eigen::VectorXd logits(const Eigen::MatrixXd& frames) const;
  Eigen::VectorXd probabilities(const Eigen::MatrixXd& frames) const;

  // Cross-entropy -log p(label) and its gradient w.r.t. the parameters (accumulated).
  double cross_entropy(const Eigen::MatrixXd& frames, int label, Eigen::VectorXd* grad = nullptr) const;

  // Cross-entropy of the frames scaled row-wise by `mask`, and dL/dmask.
  double masked_cross_entropy(const Eigen::MatrixXd& frames, const Eigen::VectorXd& mask, int label,
                              Eigen::VectorXd* grad_mask = nullptr) const;

 private:
  Attribute attribute_ = Attribute::Gender;
  View view_ = View::Ego;
  std::size_t input_dim_ = 0;
  std::size_t classes_ = 0;
  Pooling pooling_ = Pooling::Mean;
  Eigen::VectorXd params_;
};

struct ClassifierConfig {
  std::size_t steps = 300;
  std::size_t batch_size = 8;
  double learning_rate = 1e-5;
  std::uint64_t seed = 0;
  Pooling pooling = Pooling::Mean;
  std::size_t frames = kDefaultFrames;
  AdamWConfig adamw;
};

struct TrainedClassifier {
  ClassifierHead head;
  std::vector<LossPoint> loss_curve;
};

// Cross-entropy training on the train-split clips of `view` labelled for `attribute`.
TrainedClassifier train_classifier(const Dataset& dataset, Attribute attribute, View view,
                                   const ClassifierConfig& config);

ProbabilityPrediction predict(const ClassifierHead& head, const Dataset& dataset, const ClipRecord& clip,
                              std::size_t frames = kDefaultFrames);

}  // namespace egopriv
