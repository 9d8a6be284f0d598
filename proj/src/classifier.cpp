#include "egopriv/classifier.hpp"

#include "egopriv/error.hpp"

#include <cmath>
#include <numeric>
#include <set>

namespace egopriv {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int argmax_lowest(const VectorXd& v) {
  require(v.size() > 0, ErrorCode::EmptyInput, "argmax of an empty vector");
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

int ProbabilityPrediction::argmax() const { return argmax_lowest(probs); }

namespace {

std::size_t classifier_param_count(std::size_t input_dim, std::size_t classes, Pooling pooling) {
  return classes * (input_dim + 1) + (pooling == Pooling::Attention ? input_dim : 0);
}

VectorXd softmax(const VectorXd& logits) {
  VectorXd e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

}  // namespace

ClassifierHead::ClassifierHead(Attribute attribute, View view, std::size_t input_dim, Pooling pooling,
                               VectorXd params)
    : attribute_(attribute), view_(view), input_dim_(input_dim), classes_(class_count(attribute)),
      pooling_(pooling), params_(std::move(params)) {
  require(input_dim_ > 0, ErrorCode::InvalidArgument, "classifier input_dim must be positive");
  require(static_cast<std::size_t>(params_.size()) == classifier_param_count(input_dim_, classes_, pooling_),
          ErrorCode::DimensionMismatch, "classifier parameter vector has the wrong size");
  require(params_.allFinite(), ErrorCode::NumericError, "classifier weights must be finite");
}

ClassifierHead ClassifierHead::initialize(Attribute attribute, View view, std::size_t input_dim,
                                          Pooling pooling, Rng& rng) {
  const std::size_t n = classifier_param_count(input_dim, class_count(attribute), pooling);
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  VectorXd p(static_cast<Index>(n));
  for (Index i = 0; i < p.size(); ++i) p(i) = rng.uniform(-bound, bound);
  return ClassifierHead(attribute, view, input_dim, pooling, std::move(p));
}

ClassifierHead ClassifierHead::zeros(Attribute attribute, View view, std::size_t input_dim, Pooling pooling) {
  const std::size_t n = classifier_param_count(input_dim, class_count(attribute), pooling);
  return ClassifierHead(attribute, view, input_dim, pooling, VectorXd::Zero(static_cast<Index>(n)));
}

VectorXd ClassifierHead::score_vector() const {
  if (pooling_ != Pooling::Attention) return VectorXd();
  return params_.head(static_cast<Index>(input_dim_));
}

MatrixXd ClassifierHead::weight() const {
  const Index offset = pooling_ == Pooling::Attention ? static_cast<Index>(input_dim_) : 0;
  return Map<const MatrixXd>(params_.data() + offset, static_cast<Index>(classes_), static_cast<Index>(input_dim_));
}

VectorXd ClassifierHead::bias() const { return params_.tail(static_cast<Index>(classes_)); }

VectorXd ClassifierHead::logits(const MatrixXd& frames) const {
  require(static_cast<std::size_t>(frames.cols()) == input_dim_, ErrorCode::DimensionMismatch,
          "frame dim does not match classifier input_dim");
  return weight() * pool_frames(frames, pooling_, score_vector()) + bias();
}

VectorXd ClassifierHead::probabilities(const MatrixXd& frames) const { return softmax(logits(frames)); }

double ClassifierHead::cross_entropy(const MatrixXd& frames, int label, VectorXd* grad) const {
  require(label >= 0 && static_cast<std::size_t>(label) < classes_, ErrorCode::InvalidLabel, "label out of range");
  require(static_cast<std::size_t>(frames.cols()) == input_dim_, ErrorCode::DimensionMismatch,
          "frame dim does not match classifier input_dim");
  VectorXd weights;
  const VectorXd score = score_vector();
  const VectorXd pooled = pool_frames(frames, pooling_, score, &weights);
  const MatrixXd w = weight();
  const VectorXd q = softmax(w * pooled + bias());
  const double loss = -std::log(q(label));
  if (grad) {
    VectorXd gl = q;
    gl(label) -= 1.0;
    const Index offset = pooling_ == Pooling::Attention ? static_cast<Index>(input_dim_) : 0;
    const Index c = static_cast<Index>(classes_), d = static_cast<Index>(input_dim_);
    Map<MatrixXd>(grad->data() + offset, c, d) += gl * pooled.transpose();
    grad->tail(c) += gl;
    if (pooling_ == Pooling::Attention) {
      PoolGradient pg = pool_frames_backward(frames, pooling_, score, weights, w.transpose() * gl, false);
      grad->head(d) += pg.score;
    }
  }
  return loss;
}

double ClassifierHead::masked_cross_entropy(const MatrixXd& frames, const VectorXd& mask, int label,
                                            VectorXd* grad_mask) const {
  require(mask.size() == frames.rows(), ErrorCode::DimensionMismatch, "mask must have one entry per unit");
  require(label >= 0 && static_cast<std::size_t>(label) < classes_, ErrorCode::InvalidLabel, "label out of range");
  const MatrixXd masked = mask.asDiagonal() * frames;
  VectorXd weights;
  const VectorXd score = score_vector();
  const VectorXd pooled = pool_frames(masked, pooling_, score, &weights);
  const MatrixXd w = weight();
  const VectorXd q = softmax(w * pooled + bias());
  const double loss = -std::log(q(label));
  require(std::isfinite(loss), ErrorCode::NumericError, "masked prediction loss is not finite");
  if (grad_mask) {
    VectorXd gl = q;
    gl(label) -= 1.0;
    PoolGradient pg = pool_frames_backward(masked, pooling_, score, weights, w.transpose() * gl, true);
    *grad_mask = (pg.frames.array() * frames.array()).rowwise().sum();
  }
  return loss;
}

TrainedClassifier train_classifier(const Dataset& dataset, Attribute attribute, View view,
                                   const ClassifierConfig& config) {
  require(config.batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be positive");
  std::vector<const ClipRecord*> clips;
  std::set<int> seen;
  for (const ClipRecord* c : dataset.select(view, Split::Train)) {
    if (auto l = c->label(attribute)) {
      clips.push_back(c);
      seen.insert(*l);
    }
  }
  require(seen.size() >= 2, ErrorCode::InvalidArgument,
          "training set for " + std::string(to_string(attribute)) + " has fewer than two classes");

  Rng rng(config.seed);
  TrainedClassifier out;
  out.head = ClassifierHead::initialize(attribute, view, dataset.table(view).dim(), config.pooling, rng);

  std::vector<MatrixXd> frames;
  std::vector<int> labels;
  frames.reserve(clips.size());
  for (const ClipRecord* c : clips) {
    frames.push_back(subsample_frames(dataset.frames(c->clip_id), config.frames));
    labels.push_back(*c->label(attribute));
  }

  AdamW opt(out.head.params().size(), config.adamw);
  std::vector<std::size_t> order(clips.size());
  const std::size_t batch = std::min(config.batch_size, clips.size());
  for (std::size_t step = 0; step < config.steps; ++step) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch; ++i) std::swap(order[i], order[i + rng.below(order.size() - i)]);
    VectorXd grad = VectorXd::Zero(out.head.params().size());
    double loss = 0.0;
    for (std::size_t i = 0; i < batch; ++i) loss += out.head.cross_entropy(frames[order[i]], labels[order[i]], &grad);
    grad /= static_cast<double>(batch);
    loss /= static_cast<double>(batch);
    const double lr = cosine_lr(config.learning_rate, step, config.steps);
    opt.step(out.head.params(), grad, lr);
    out.loss_curve.push_back({step + 1, loss, lr});
  }
  return out;
}

ProbabilityPrediction predict(const ClassifierHead& head, const Dataset& dataset, const ClipRecord& clip,
                              std::size_t frames) {
  ProbabilityPrediction p;
  p.clip_id = clip.clip_id;
  p.attribute = head.attribute();
  p.probs = head.probabilities(subsample_frames(dataset.table(clip.view).at(clip.clip_id), frames));
  return p;
}

}  // namespace egopriv
