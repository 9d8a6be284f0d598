#include "egopriv/head.hpp"

#include "egopriv/error.hpp"

#include <cmath>
#include <string>

namespace egopriv {

using Eigen::Index;
using Eigen::Map;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(Architecture a) { return a == Architecture::Linear ? "Linear" : "OneHiddenMLP"; }

Architecture parse_architecture(std::string_view s) {
  if (s == "Linear" || s == "linear") return Architecture::Linear;
  if (s == "OneHiddenMLP" || s == "mlp") return Architecture::OneHiddenMLP;
  fail(ErrorCode::InvalidArgument, "unknown architecture '" + std::string(s) + "'");
}

ProjectionHead::Layout ProjectionHead::layout(const HeadShape& s) {
  require(s.input_dim > 0 && s.output_dim > 0, ErrorCode::InvalidArgument, "head dims must be positive");
  const bool mlp = s.architecture == Architecture::OneHiddenMLP;
  require(!mlp || s.hidden_dim > 0, ErrorCode::InvalidArgument, "MLP head needs hidden_dim > 0");
  Layout l;
  std::size_t at = 0;
  l.score = at;
  if (s.pooling == Pooling::Attention) at += s.input_dim;
  l.rows1 = mlp ? s.hidden_dim : s.output_dim;
  l.w1 = at;
  at += l.rows1 * s.input_dim;
  l.b1 = at;
  at += l.rows1;
  if (mlp) {
    l.w2 = at;
    at += s.output_dim * s.hidden_dim;
    l.b2 = at;
    at += s.output_dim;
  }
  l.total = at;
  return l;
}

std::size_t parameter_count(const HeadShape& shape) {
  const bool mlp = shape.architecture == Architecture::OneHiddenMLP;
  const std::size_t rows1 = mlp ? shape.hidden_dim : shape.output_dim;
  std::size_t n = rows1 * (shape.input_dim + 1);
  if (mlp) n += shape.output_dim * (shape.hidden_dim + 1);
  if (shape.pooling == Pooling::Attention) n += shape.input_dim;
  return n;
}

ProjectionHead::ProjectionHead(HeadShape shape, VectorXd params)
    : shape_(shape), layout_(layout(shape)), params_(std::move(params)) {
  require(static_cast<std::size_t>(params_.size()) == layout_.total, ErrorCode::DimensionMismatch,
          "head parameter vector has " + std::to_string(params_.size()) + " entries, expected " +
              std::to_string(layout_.total));
  require(params_.allFinite(), ErrorCode::NumericError, "head weights must be finite");
}

ProjectionHead ProjectionHead::initialize(const HeadShape& shape, Rng& rng) {
  const Layout l = layout(shape);
  VectorXd p(l.total);
  auto fill = [&](std::size_t offset, std::size_t count, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i) p(static_cast<Index>(offset + i)) = rng.uniform(-bound, bound);
  };
  if (shape.pooling == Pooling::Attention) fill(l.score, shape.input_dim, shape.input_dim);
  fill(l.w1, l.rows1 * shape.input_dim, shape.input_dim);
  fill(l.b1, l.rows1, shape.input_dim);
  if (shape.architecture == Architecture::OneHiddenMLP) {
    fill(l.w2, shape.output_dim * shape.hidden_dim, shape.hidden_dim);
    fill(l.b2, shape.output_dim, shape.hidden_dim);
  }
  return ProjectionHead(shape, std::move(p));
}

VectorXd ProjectionHead::score_vector() const {
  if (shape_.pooling != Pooling::Attention) return VectorXd();
  return params_.segment(static_cast<Index>(layout_.score), static_cast<Index>(shape_.input_dim));
}

VectorXd ProjectionHead::pool(const MatrixXd& frames) const {
  require(static_cast<std::size_t>(frames.cols()) == shape_.input_dim, ErrorCode::DimensionMismatch,
          "frame dim " + std::to_string(frames.cols()) + " does not match head input_dim " +
              std::to_string(shape_.input_dim));
  return pool_frames(frames, shape_.pooling, score_vector());
}

VectorXd ProjectionHead::embed(const MatrixXd& frames) const {
  Trace t;
  return forward(frames, t);
}

VectorXd ProjectionHead::forward(const MatrixXd& frames, Trace& t) const {
  require(static_cast<std::size_t>(frames.cols()) == shape_.input_dim, ErrorCode::DimensionMismatch,
          "frame dim " + std::to_string(frames.cols()) + " does not match head input_dim " +
              std::to_string(shape_.input_dim));
  const Index in = static_cast<Index>(shape_.input_dim);
  const Index rows1 = static_cast<Index>(layout_.rows1);
  t.frames = frames;
  t.pooled = pool_frames(frames, shape_.pooling, score_vector(), &t.pool_weights);

  Map<const MatrixXd> w1(params_.data() + layout_.w1, rows1, in);
  Map<const VectorXd> b1(params_.data() + layout_.b1, rows1);
  VectorXd a1 = w1 * t.pooled + b1;
  if (shape_.architecture == Architecture::OneHiddenMLP) {
    const Index out = static_cast<Index>(shape_.output_dim);
    Map<const MatrixXd> w2(params_.data() + layout_.w2, out, rows1);
    Map<const VectorXd> b2(params_.data() + layout_.b2, out);
    t.hidden = a1.array().tanh();
    t.output = w2 * t.hidden + b2;
  } else {
    t.output = std::move(a1);
  }
  const double norm = t.output.norm();
  require(norm > 0.0 && std::isfinite(norm), ErrorCode::NumericError, "head output has zero or non-finite norm");
  t.z = t.output / norm;
  return t.z;
}

void ProjectionHead::backward(const Trace& t, const VectorXd& grad_z, VectorXd& grad) const {
  const Index in = static_cast<Index>(shape_.input_dim);
  const Index rows1 = static_cast<Index>(layout_.rows1);

  // z = y / |y|  =>  dL/dy = (g - z <z, g>) / |y|
  const VectorXd gy = (grad_z - t.z * t.z.dot(grad_z)) / t.output.norm();

  VectorXd ga1;
  if (shape_.architecture == Architecture::OneHiddenMLP) {
    const Index out = static_cast<Index>(shape_.output_dim);
    Map<const MatrixXd> w2(params_.data() + layout_.w2, out, rows1);
    Map<MatrixXd>(grad.data() + layout_.w2, out, rows1) += gy * t.hidden.transpose();
    Map<VectorXd>(grad.data() + layout_.b2, out) += gy;
    ga1 = (w2.transpose() * gy).array() * (1.0 - t.hidden.array().square());
  } else {
    ga1 = gy;
  }
  Map<const MatrixXd> w1(params_.data() + layout_.w1, rows1, in);
  Map<MatrixXd>(grad.data() + layout_.w1, rows1, in) += ga1 * t.pooled.transpose();
  Map<VectorXd>(grad.data() + layout_.b1, rows1) += ga1;

  if (shape_.pooling == Pooling::Attention) {
    const VectorXd gp = w1.transpose() * ga1;
    PoolGradient pg = pool_frames_backward(t.frames, shape_.pooling, score_vector(), t.pool_weights, gp, false);
    grad.segment(static_cast<Index>(layout_.score), in) += pg.score;
  }
}

}  // namespace egopriv
