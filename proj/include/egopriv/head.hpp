#pragma once

#include "egopriv/pooling.hpp"
#include "egopriv/random.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>

namespace egopriv {

enum class Architecture { Linear, OneHiddenMLP };

std::string_view to_string(Architecture a);
Architecture parse_architecture(std::string_view s);

struct HeadShape {
  Architecture architecture = Architecture::Linear;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;  // OneHiddenMLP only
  std::size_t output_dim = 0;
  Pooling pooling = Pooling::Mean;

  bool operator==(const HeadShape&) const = default;
};

std::size_t parameter_count(const HeadShape& shape);

// Projection g (or g') from frame embeddings to the joint space:
// pool -> Linear | (affine, tanh, affine) -> L2 normalize.
//
// Parameters live in one flat vector:
//   [attention score vector (input_dim), Attention pooling only]
//   [W1 (rows x input_dim, column-major)] [b1]
//   [W2 (output_dim x hidden_dim, column-major)] [b2]   OneHiddenMLP only
// where rows is output_dim for Linear and hidden_dim for OneHiddenMLP.
class ProjectionHead {
 public:
  ProjectionHead() = default;
  ProjectionHead(HeadShape shape, Eigen::VectorXd params);

  // Uniform in +-1/sqrt(fan_in) for every tensor.
  static ProjectionHead initialize(const HeadShape& shape, Rng& rng);

  const HeadShape& shape() const { return shape_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }

  Eigen::VectorXd pool(const Eigen::MatrixXd& frames) const;
  Eigen::VectorXd score_vector() const;

  // Unit-norm embedding of a clip.
  Eigen::VectorXd embed(const Eigen::MatrixXd& frames) const;

  struct Trace {
    Eigen::MatrixXd frames;
    Eigen::VectorXd pool_weights;
    Eigen::VectorXd pooled;
    Eigen::VectorXd hidden;  // tanh activations, MLP only
    Eigen::VectorXd output;  // pre-normalization
    Eigen::VectorXd z;       // normalized
  };

  Eigen::VectorXd forward(const Eigen::MatrixXd& frames, Trace& trace) const;

  // Adds dL/dparams to `grad` given dL/dz.
  void backward(const Trace& trace, const Eigen::VectorXd& grad_z, Eigen::VectorXd& grad) const;

 private:
  struct Layout {
    std::size_t score = 0, w1 = 0, b1 = 0, w2 = 0, b2 = 0, rows1 = 0, total = 0;
  };
  static Layout layout(const HeadShape& shape);

  HeadShape shape_;
  Layout layout_;
  Eigen::VectorXd params_;
};

}  // namespace egopriv
