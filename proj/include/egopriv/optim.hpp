#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <numbers>

namespace egopriv {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Learning rate at `step` (0-based) of `total` under cosine decay to zero.
inline double cosine_lr(double base_lr, std::size_t step, std::size_t total) {
  if (total == 0) return base_lr;
  const double progress = static_cast<double>(step) / static_cast<double>(total);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

// Adam with decoupled weight decay.
class AdamW {
 public:
  AdamW(Eigen::Index n_params, AdamWConfig config = {})
      : config_(config), m_(Eigen::VectorXd::Zero(n_params)), v_(Eigen::VectorXd::Zero(n_params)) {}

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad, double lr) {
    ++t_;
    m_ = config_.beta1 * m_ + (1.0 - config_.beta1) * grad;
    v_ = config_.beta2 * v_ + (1.0 - config_.beta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    params.array() -= lr * ((m_.array() / c1) / ((v_.array() / c2).sqrt() + config_.eps) +
                            config_.weight_decay * params.array());
  }

  std::size_t steps_taken() const { return t_; }

 private:
  AdamWConfig config_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  std::size_t t_ = 0;
};

}  // namespace egopriv
