#pragma once

#include "egopriv/classifier.hpp"
#include "egopriv/data.hpp"
#include "egopriv/metrics.hpp"
#include "egopriv/retrieval.hpp"
#include "egopriv/train.hpp"
#include "egopriv/voting.hpp"

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace egopriv {

// Source of f(x) / f'(x): a probability vector over the attribute's classes.
using PredictFn = std::function<Eigen::VectorXd(const Dataset&, const ClipRecord&)>;

PredictFn classifier_predictor(const ClassifierHead& head, std::size_t frames = kDefaultFrames);
// Precomputed predictions (e.g. a foundation model's zero-shot outputs) keyed by clip id.
PredictFn table_predictor(std::map<std::string, Eigen::VectorXd> table);

struct RaaConfig {
  std::size_t m = 3;
  Aggregator aggregator = Aggregator::SoftVote;
  WeightScheme weight_scheme = WeightScheme::Uniform;
  // Trained ego->exo heads. Null with zero_shot_retriever set ranks raw embeddings.
  const TrainedEmbedding* retriever = nullptr;
  bool zero_shot_retriever = false;
  std::size_t frames = kDefaultFrames;
};

struct RaaResult {
  int predicted = 0;
  Eigen::VectorXd distribution;  // aggregated vote distribution
  std::vector<std::string> support;
};

// Combines the ego prediction with the support predictions.
// Soft: weighted sum of distributions. Hard: majority of argmaxes with the ego
// voter as tie-breaker; the distribution is the one-hot of the winner.
RaaResult aggregate_predictions(const Eigen::VectorXd& ego_probs, const std::vector<Eigen::VectorXd>& support_probs,
                                Aggregator aggregator, const std::vector<double>& weights);

// Retrieve-then-predict over a fixed exo pool. The pool gallery and the exo
// predictions of every pool clip are computed once at construction.
class RaaAttack {
 public:
  RaaAttack(const Dataset& pool_dataset, std::vector<const ClipRecord*> pool_clips, const RaaConfig& config,
            PredictFn exo_predict);

  std::size_t pool_size() const { return gallery_.size(); }
  const RaaConfig& config() const { return config_; }

  // Top-M pool clips for an ego query.
  std::vector<std::string> retrieve(const Dataset& query_dataset, const ClipRecord& query, std::size_t m) const;

  RaaResult attack(const Dataset& query_dataset, const ClipRecord& query, const Eigen::VectorXd& ego_probs) const;
  RaaResult attack(const Dataset& query_dataset, const ClipRecord& query, const Eigen::VectorXd& ego_probs,
                   std::size_t m, Aggregator aggregator, WeightScheme scheme) const;

  const Eigen::VectorXd& exo_prediction(const std::string& clip_id) const;

 private:
  RaaConfig config_;
  Embedder embedder_;
  Gallery gallery_;
  std::map<std::string, Eigen::VectorXd> exo_probs_;
};

// Single-query convenience form; builds the pool state on every call.
RaaResult raa_attack(const Dataset& dataset, const ClipRecord& query, const RaaConfig& config,
                     const std::vector<const ClipRecord*>& exo_pool, const PredictFn& ego_predict,
                     const PredictFn& exo_predict);

struct IdentityEnsemble {
  std::map<std::string, int> predicted;  // identity -> class
  MetricReport accuracy;                 // one vote per identity
};

// Capability 4: one aggregated prediction per wearer from all of their videos.
// Hard vote has no privileged voter (ties to the lowest class); soft vote is uniform.
IdentityEnsemble identity_level_ensemble(const std::map<std::string, std::vector<Eigen::VectorXd>>& by_identity,
                                         Aggregator aggregator, const std::map<std::string, int>& labels);

struct AttackRow {
  Attribute attribute = Attribute::Gender;
  std::string capability;     // e.g. "1", "2+3", "2+3+4"
  std::string view;           // ego, exo
  std::size_t m = 0;
  std::string aggregator;     // none, hard, soft
  std::string weight_scheme;  // none, uniform, half
  double accuracy = 0.0;
  double delta = 0.0;         // accuracy - ego-only baseline
  std::size_t n = 0;
};

struct AttackSetup {
  const Dataset* dataset = nullptr;
  Attribute attribute = Attribute::Gender;
  int capability = 1;  // 1 zero-shot, 2 fine-tuned
  bool per_identity = false;
  PredictFn ego_predict;
  PredictFn exo_predict;
  const TrainedEmbedding* retriever = nullptr;  // required for capability 2 RAA
  const Dataset* pool_dataset = nullptr;        // default: test exo clips of `dataset`
  std::size_t frames = kDefaultFrames;
};

struct VotingChoice {
  Aggregator aggregator = Aggregator::SoftVote;
  WeightScheme weight_scheme = WeightScheme::Uniform;
};

struct SweepSpec {
  std::vector<std::size_t> ms{3};
  std::vector<VotingChoice> voting{VotingChoice{}};
};

// Accuracy of the ego-only attack (view ego) and of the exo classifier on test exo clips (view exo).
std::vector<AttackRow> baseline_rows(const AttackSetup& setup);

// One RAA row per (M, voting choice); delta is measured against the ego-only baseline.
std::vector<AttackRow> attack_sweep(const AttackSetup& setup, const SweepSpec& sweep);

std::string attack_rows_csv(const std::vector<AttackRow>& rows);

}  // namespace egopriv
