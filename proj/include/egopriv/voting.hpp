#pragma once

#include "egopriv/classifier.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string_view>
#include <vector>

namespace egopriv {

enum class Aggregator { HardVote, SoftVote };
// Uniform: every voter weighs 1/(M+1). FixedHalf: the ego voter weighs 0.5 and
// the M support voters share the other half equally.
enum class WeightScheme { Uniform, FixedHalf };

std::string_view to_string(Aggregator a);
std::string_view to_string(WeightScheme w);
Aggregator parse_aggregator(std::string_view s);
WeightScheme parse_weight_scheme(std::string_view s);

// Majority over the voters' argmax classes. Ties go to the class of the voter at
// `ego_index` when it is among the tied classes, otherwise to the lowest class index.
int hard_vote(const std::vector<Eigen::VectorXd>& probs, std::optional<std::size_t> ego_index = 0);
int hard_vote(const std::vector<ProbabilityPrediction>& predictions, std::optional<std::size_t> ego_index = 0);

// argmax_c sum_i w_i p_i(c), ties to the lowest class index. Sums that agree to
// 1e-12 of the larger one count as tied, so rationally equal totals reached by
// different rounding paths still resolve to the lowest class.
int soft_vote(const std::vector<Eigen::VectorXd>& probs, const std::vector<double>& weights);
int soft_vote(const std::vector<ProbabilityPrediction>& predictions, const std::vector<double>& weights);

int vote_argmax(const Eigen::VectorXd& totals);

// Weighted sum of the distributions renormalized by the weight total.
Eigen::VectorXd soft_vote_distribution(const std::vector<Eigen::VectorXd>& probs, const std::vector<double>& weights);

// Weights for one ego voter (first) followed by `support` exo voters.
std::vector<double> voting_weights(WeightScheme scheme, std::size_t support);

}  // namespace egopriv
