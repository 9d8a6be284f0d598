#include "egopriv/pooling.hpp"

#include "egopriv/error.hpp"

#include <string>

namespace egopriv {

std::string_view to_string(Pooling p) { return p == Pooling::Mean ? "Mean" : "Attention"; }

Pooling parse_pooling(std::string_view s) {
  if (s == "Mean" || s == "mean") return Pooling::Mean;
  if (s == "Attention" || s == "attention") return Pooling::Attention;
  fail(ErrorCode::InvalidArgument, "unknown pooling '" + std::string(s) + "'");
}

Eigen::VectorXd pool_frames(const Eigen::MatrixXd& frames, Pooling pooling,
                            const Eigen::VectorXd& score_vec, Eigen::VectorXd* weights_out) {
  require(frames.rows() > 0, ErrorCode::InvalidArgument, "pooling needs at least one frame");
  const Eigen::Index t = frames.rows();
  Eigen::VectorXd w;
  if (pooling == Pooling::Mean) {
    w = Eigen::VectorXd::Constant(t, 1.0 / static_cast<double>(t));
  } else {
    require(score_vec.size() == frames.cols(), ErrorCode::DimensionMismatch,
            "attention score vector does not match frame dim");
    Eigen::VectorXd s = frames * score_vec;
    w = (s.array() - s.maxCoeff()).exp();
    w /= w.sum();
  }
  Eigen::VectorXd pooled = frames.transpose() * w;
  if (weights_out) *weights_out = std::move(w);
  return pooled;
}

PoolGradient pool_frames_backward(const Eigen::MatrixXd& frames, Pooling pooling,
                                  const Eigen::VectorXd& score_vec, const Eigen::VectorXd& weights,
                                  const Eigen::VectorXd& grad_pooled, bool want_frames) {
  PoolGradient g;
  if (pooling == Pooling::Mean) {
    if (want_frames) g.frames = weights * grad_pooled.transpose();
    return g;
  }
  // dL/dw_t = <g, f_t>;  dL/ds_t = w_t (dL/dw_t - sum_u w_u dL/dw_u)
  const Eigen::VectorXd gw = frames * grad_pooled;
  const Eigen::VectorXd gs = (weights.array() * (gw.array() - weights.dot(gw))).matrix();
  g.score = frames.transpose() * gs;
  if (want_frames) g.frames = weights * grad_pooled.transpose() + gs * score_vec.transpose();
  return g;
}

}  // namespace egopriv
