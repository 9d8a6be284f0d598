#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string_view>
#include <vector>

namespace egopriv {

// Standard: denominator over {k} u N(i). Literal: denominator over N(i) only,
// which is unbounded below and kept for reproducing the printed objective.
enum class DenominatorMode { Standard, Literal };

std::string_view to_string(DenominatorMode m);
DenominatorMode parse_denominator_mode(std::string_view s);

// positives[i] / negatives[i] index rows of the exo pool for anchor i.
using IndexSets = std::vector<std::vector<std::size_t>>;

struct SimilarityLoss {
  double loss = 0.0;
  Eigen::MatrixXd grad_sim;  // anchors x pool
};

// Supervised contrastive loss given the anchor x pool similarity matrix:
//   L = -sum_i 1/|P(i)| sum_{k in P(i)} log( exp(s_ik/tau) / sum_{j in Den(i,k)} exp(s_ij/tau) )
SimilarityLoss supcon_from_similarities(const Eigen::MatrixXd& sim, const IndexSets& positives,
                                        const IndexSets& negatives, double tau, DenominatorMode mode);

struct SupConResult {
  double loss = 0.0;
  Eigen::MatrixXd grad_ego;  // anchors x dim
  Eigen::MatrixXd grad_exo;  // pool x dim
};

// Same loss on unit-norm embeddings (one per row); s_ij = <z_ego_i, z_exo_j>.
SupConResult supcon_loss(const Eigen::MatrixXd& z_ego, const Eigen::MatrixXd& z_exo_pool,
                         const IndexSets& positives, const IndexSets& negatives, double tau,
                         DenominatorMode mode = DenominatorMode::Standard);

}  // namespace egopriv
