#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace egopriv {

enum class Pooling { Mean, Attention };

std::string_view to_string(Pooling p);
Pooling parse_pooling(std::string_view s);

// Temporal pooling of a frames x dim matrix into one clip vector.
//   Mean:      arithmetic mean of the rows
//   Attention: softmax over scores s_t = <score_vec, frame_t>, convex combination of rows
// `weights_out`, when given, receives the per-frame pooling weights.
Eigen::VectorXd pool_frames(const Eigen::MatrixXd& frames, Pooling pooling,
                            const Eigen::VectorXd& score_vec, Eigen::VectorXd* weights_out = nullptr);

struct PoolGradient {
  Eigen::VectorXd score;   // d/d score_vec; empty for Mean
  Eigen::MatrixXd frames;  // d/d frames; empty unless requested
};

// Backward pass of pool_frames; `weights` are the forward pooling weights.
PoolGradient pool_frames_backward(const Eigen::MatrixXd& frames, Pooling pooling,
                                  const Eigen::VectorXd& score_vec, const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& grad_pooled, bool want_frames);

}  // namespace egopriv
