#include "egopriv/supcon.hpp"

#include "egopriv/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace egopriv {

std::string_view to_string(DenominatorMode m) { return m == DenominatorMode::Standard ? "Standard" : "Literal"; }

DenominatorMode parse_denominator_mode(std::string_view s) {
  if (s == "Standard" || s == "standard") return DenominatorMode::Standard;
  if (s == "Literal" || s == "literal") return DenominatorMode::Literal;
  fail(ErrorCode::InvalidArgument, "unknown denominator mode '" + std::string(s) + "'");
}

namespace {

double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

SimilarityLoss supcon_from_similarities(const Eigen::MatrixXd& sim, const IndexSets& positives,
                                        const IndexSets& negatives, double tau, DenominatorMode mode) {
  require(tau > 0.0, ErrorCode::InvalidArgument, "temperature must be positive");
  const auto n_anchor = static_cast<std::size_t>(sim.rows());
  const auto n_pool = static_cast<std::size_t>(sim.cols());
  require(positives.size() == n_anchor && negatives.size() == n_anchor, ErrorCode::DimensionMismatch,
          "positive/negative sets must have one entry per anchor");

  SimilarityLoss out;
  out.grad_sim = Eigen::MatrixXd::Zero(sim.rows(), sim.cols());
  std::vector<char> in_negatives(n_pool);

  for (std::size_t i = 0; i < n_anchor; ++i) {
    const auto& pos = positives[i];
    const auto& neg = negatives[i];
    require(!pos.empty(), ErrorCode::EmptyInput, "anchor " + std::to_string(i) + " has an empty positive set");
    require(!neg.empty(), ErrorCode::EmptyInput, "anchor " + std::to_string(i) + " has an empty negative set");
    const auto row = static_cast<Eigen::Index>(i);

    std::fill(in_negatives.begin(), in_negatives.end(), 0);
    double lse_neg = -std::numeric_limits<double>::infinity();
    for (std::size_t j : neg) {
      require(j < n_pool, ErrorCode::InvalidArgument, "negative index out of range");
      if (in_negatives[j]) continue;
      in_negatives[j] = 1;
      lse_neg = log_add_exp(lse_neg, sim(row, static_cast<Eigen::Index>(j)) / tau);
    }

    const double inv_p = 1.0 / static_cast<double>(pos.size());
    for (std::size_t k : pos) {
      require(k < n_pool, ErrorCode::InvalidArgument, "positive index out of range");
      const double logit_k = sim(row, static_cast<Eigen::Index>(k)) / tau;
      double lse = lse_neg;
      const bool add_k = mode == DenominatorMode::Standard && !in_negatives[k];
      if (add_k) lse = log_add_exp(lse, logit_k);
      out.loss -= inv_p * (logit_k - lse);

      // d(-term)/ds_ij = (softmax_j [j in Den] - [j == k]) / tau, scaled by 1/|P(i)|
      const double c = inv_p / tau;
      for (std::size_t j = 0; j < n_pool; ++j) {
        if (!in_negatives[j]) continue;
        const auto col = static_cast<Eigen::Index>(j);
        out.grad_sim(row, col) += c * std::exp(sim(row, col) / tau - lse);
      }
      const auto col = static_cast<Eigen::Index>(k);
      if (add_k) out.grad_sim(row, col) += c * std::exp(logit_k - lse);
      out.grad_sim(row, col) -= c;
    }
  }
  require(std::isfinite(out.loss), ErrorCode::NumericError, "contrastive loss is not finite");
  return out;
}

SupConResult supcon_loss(const Eigen::MatrixXd& z_ego, const Eigen::MatrixXd& z_exo_pool,
                         const IndexSets& positives, const IndexSets& negatives, double tau,
                         DenominatorMode mode) {
  require(z_ego.cols() == z_exo_pool.cols(), ErrorCode::DimensionMismatch,
          "ego and exo embeddings must share one dimension");
  const Eigen::MatrixXd sim = z_ego * z_exo_pool.transpose();
  SimilarityLoss s = supcon_from_similarities(sim, positives, negatives, tau, mode);
  SupConResult out;
  out.loss = s.loss;
  out.grad_ego = s.grad_sim * z_exo_pool;
  out.grad_exo = s.grad_sim.transpose() * z_ego;
  return out;
}

}  // namespace egopriv
