#include "egopriv/voting.hpp"

#include "egopriv/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace egopriv {

using Eigen::Index;
using Eigen::VectorXd;

std::string_view to_string(Aggregator a) { return a == Aggregator::HardVote ? "hard" : "soft"; }
std::string_view to_string(WeightScheme w) { return w == WeightScheme::Uniform ? "uniform" : "half"; }

Aggregator parse_aggregator(std::string_view s) {
  if (s == "hard" || s == "HardVote") return Aggregator::HardVote;
  if (s == "soft" || s == "SoftVote") return Aggregator::SoftVote;
  fail(ErrorCode::InvalidArgument, "unknown aggregator '" + std::string(s) + "'");
}

WeightScheme parse_weight_scheme(std::string_view s) {
  if (s == "uniform" || s == "Uniform") return WeightScheme::Uniform;
  if (s == "half" || s == "FixedHalf") return WeightScheme::FixedHalf;
  fail(ErrorCode::InvalidArgument, "unknown weight scheme '" + std::string(s) + "'");
}

namespace {

Index check_shared_classes(const std::vector<VectorXd>& probs) {
  require(!probs.empty(), ErrorCode::EmptyInput, "voting over no predictions");
  const Index c = probs.front().size();
  require(c > 0, ErrorCode::EmptyInput, "predictions have no classes");
  for (const auto& p : probs) {
    require(p.size() == c, ErrorCode::DimensionMismatch, "voters disagree on the class set");
  }
  return c;
}

std::vector<VectorXd> probs_of(const std::vector<ProbabilityPrediction>& predictions) {
  std::vector<VectorXd> out;
  out.reserve(predictions.size());
  for (const auto& p : predictions) out.push_back(p.probs);
  return out;
}

}  // namespace

int hard_vote(const std::vector<VectorXd>& probs, std::optional<std::size_t> ego_index) {
  const Index c = check_shared_classes(probs);
  require(!ego_index || *ego_index < probs.size(), ErrorCode::InvalidArgument, "ego index out of range");
  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (const auto& p : probs) ++counts[static_cast<std::size_t>(argmax_lowest(p))];
  std::size_t top = 0;
  for (std::size_t n : counts) top = std::max(top, n);
  if (ego_index) {
    const int ego_class = argmax_lowest(probs[*ego_index]);
    if (counts[static_cast<std::size_t>(ego_class)] == top) return ego_class;
  }
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] == top) return static_cast<int>(k);
  }
  return 0;
}

int hard_vote(const std::vector<ProbabilityPrediction>& predictions, std::optional<std::size_t> ego_index) {
  return hard_vote(probs_of(predictions), ego_index);
}

namespace {

VectorXd weighted_sum(const std::vector<VectorXd>& probs, const std::vector<double>& weights, double* total_out) {
  const Index c = check_shared_classes(probs);
  require(weights.size() == probs.size(), ErrorCode::DimensionMismatch, "one weight per voter required");
  double total = 0.0;
  for (double w : weights) {
    require(w >= 0.0, ErrorCode::InvalidArgument, "voting weights must be nonnegative");
    total += w;
  }
  require(total > 0.0, ErrorCode::InvalidArgument, "voting weights are all zero");
  VectorXd sum = VectorXd::Zero(c);
  for (std::size_t i = 0; i < probs.size(); ++i) sum += weights[i] * probs[i];
  if (total_out) *total_out = total;
  return sum;
}

}  // namespace

VectorXd soft_vote_distribution(const std::vector<VectorXd>& probs, const std::vector<double>& weights) {
  double total = 0.0;
  VectorXd sum = weighted_sum(probs, weights, &total);
  return sum / total;
}

int vote_argmax(const VectorXd& totals) {
  require(totals.size() > 0, ErrorCode::EmptyInput, "argmax of an empty vector");
  Index best = 0;
  for (Index i = 1; i < totals.size(); ++i) {
    const double scale = std::max(std::abs(totals(i)), std::abs(totals(best)));
    if (totals(i) - totals(best) > 1e-12 * scale) best = i;
  }
  return static_cast<int>(best);
}

int soft_vote(const std::vector<VectorXd>& probs, const std::vector<double>& weights) {
  return vote_argmax(weighted_sum(probs, weights, nullptr));
}

int soft_vote(const std::vector<ProbabilityPrediction>& predictions, const std::vector<double>& weights) {
  return soft_vote(probs_of(predictions), weights);
}

std::vector<double> voting_weights(WeightScheme scheme, std::size_t support) {
  if (support == 0) return {1.0};
  std::vector<double> w(support + 1);
  if (scheme == WeightScheme::Uniform) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(support + 1));
  } else {
    w[0] = 0.5;
    std::fill(w.begin() + 1, w.end(), 0.5 / static_cast<double>(support));
  }
  return w;
}

}  // namespace egopriv
