#include "egopriv/attack.hpp"

#include "egopriv/error.hpp"

#include <algorithm>
#include <cstdio>

namespace egopriv {

using Eigen::VectorXd;

PredictFn classifier_predictor(const ClassifierHead& head, std::size_t frames) {
  return [head, frames](const Dataset& dataset, const ClipRecord& clip) {
    return predict(head, dataset, clip, frames).probs;
  };
}

PredictFn table_predictor(std::map<std::string, VectorXd> table) {
  return [table = std::move(table)](const Dataset&, const ClipRecord& clip) {
    auto it = table.find(clip.clip_id);
    require(it != table.end(), ErrorCode::MissingEmbedding, "no prediction for clip '" + clip.clip_id + "'");
    return it->second;
  };
}

RaaResult aggregate_predictions(const VectorXd& ego_probs, const std::vector<VectorXd>& support_probs,
                                Aggregator aggregator, const std::vector<double>& weights) {
  std::vector<VectorXd> voters;
  voters.reserve(support_probs.size() + 1);
  voters.push_back(ego_probs);
  voters.insert(voters.end(), support_probs.begin(), support_probs.end());

  RaaResult r;
  if (aggregator == Aggregator::SoftVote) {
    r.predicted = soft_vote(voters, weights);
    r.distribution = soft_vote_distribution(voters, weights);
  } else {
    r.predicted = hard_vote(voters, 0);
    r.distribution = VectorXd::Zero(ego_probs.size());
    r.distribution(r.predicted) = 1.0;
  }
  return r;
}

namespace {

Embedder retriever_embedder(const RaaConfig& config) {
  Embedder e;
  e.frames = config.frames;
  if (config.retriever) {
    require(config.retriever->steps > 0 || config.zero_shot_retriever, ErrorCode::InvalidArgument,
            "untrained retriever: embedding heads have zero training steps");
    e.ego_head = &config.retriever->ego_head;
    e.exo_head = &config.retriever->exo_head;
  } else {
    require(config.zero_shot_retriever, ErrorCode::InvalidArgument,
            "untrained retriever: no embedding heads supplied");
  }
  return e;
}

}  // namespace

RaaAttack::RaaAttack(const Dataset& pool_dataset, std::vector<const ClipRecord*> pool_clips, const RaaConfig& config,
                     PredictFn exo_predict)
    : config_(config), embedder_(retriever_embedder(config)) {
  require(!pool_clips.empty(), ErrorCode::EmptyInput, "empty exocentric retrieval pool");
  for (const ClipRecord* c : pool_clips) {
    require(c->view == View::Exo, ErrorCode::InvalidArgument, "retrieval pool clip '" + c->clip_id + "' is not Exo");
    exo_probs_.emplace(c->clip_id, exo_predict(pool_dataset, *c));
  }
  gallery_ = build_gallery(pool_dataset, pool_clips, embedder_);
}

std::vector<std::string> RaaAttack::retrieve(const Dataset& query_dataset, const ClipRecord& query,
                                             std::size_t m) const {
  if (m == 0) return {};
  require(m <= gallery_.size(), ErrorCode::InvalidArgument,
          "M=" + std::to_string(m) + " exceeds the retrieval pool size " + std::to_string(gallery_.size()));
  const Ranking r = rank_gallery(query.clip_id, embedder_.embed(query_dataset, query), gallery_, {}, m);
  std::vector<std::string> ids;
  ids.reserve(m);
  for (const auto& c : r.candidates) ids.push_back(c.clip_id);
  return ids;
}

const VectorXd& RaaAttack::exo_prediction(const std::string& clip_id) const {
  auto it = exo_probs_.find(clip_id);
  require(it != exo_probs_.end(), ErrorCode::InvalidArgument, "clip '" + clip_id + "' is not in the pool");
  return it->second;
}

RaaResult RaaAttack::attack(const Dataset& query_dataset, const ClipRecord& query, const VectorXd& ego_probs) const {
  return attack(query_dataset, query, ego_probs, config_.m, config_.aggregator, config_.weight_scheme);
}

RaaResult RaaAttack::attack(const Dataset& query_dataset, const ClipRecord& query, const VectorXd& ego_probs,
                            std::size_t m, Aggregator aggregator, WeightScheme scheme) const {
  std::vector<std::string> support = retrieve(query_dataset, query, m);
  std::vector<VectorXd> support_probs;
  support_probs.reserve(support.size());
  for (const auto& id : support) support_probs.push_back(exo_prediction(id));
  RaaResult r = aggregate_predictions(ego_probs, support_probs, aggregator, voting_weights(scheme, m));
  r.support = std::move(support);
  return r;
}

RaaResult raa_attack(const Dataset& dataset, const ClipRecord& query, const RaaConfig& config,
                     const std::vector<const ClipRecord*>& exo_pool, const PredictFn& ego_predict,
                     const PredictFn& exo_predict) {
  RaaAttack engine(dataset, exo_pool, config, exo_predict);
  return engine.attack(dataset, query, ego_predict(dataset, query));
}

IdentityEnsemble identity_level_ensemble(const std::map<std::string, std::vector<VectorXd>>& by_identity,
                                         Aggregator aggregator, const std::map<std::string, int>& labels) {
  require(!by_identity.empty(), ErrorCode::EmptyInput, "identity ensemble over no identities");
  IdentityEnsemble out;
  std::map<std::string, Label> predicted_labels, true_labels;
  for (const auto& [identity, group] : by_identity) {
    require(!group.empty(), ErrorCode::EmptyInput, "identity '" + identity + "' has no predictions");
    int cls = 0;
    if (aggregator == Aggregator::HardVote) {
      cls = hard_vote(group, std::nullopt);
    } else {
      cls = soft_vote(group, std::vector<double>(group.size(), 1.0));
    }
    out.predicted.emplace(identity, cls);
    auto it = labels.find(identity);
    require(it != labels.end(), ErrorCode::MissingField, "no label for identity '" + identity + "'");
    predicted_labels.emplace(identity, std::to_string(cls));
    true_labels.emplace(identity, std::to_string(it->second));
  }
  out.accuracy = accuracy(predicted_labels, true_labels);
  out.accuracy.metric_name = "identity_accuracy";
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

struct Query {
  const ClipRecord* clip;
  int label;
  VectorXd ego_probs;
};

std::vector<const ClipRecord*> labelled(const Dataset& d, View view, Attribute attribute) {
  std::vector<const ClipRecord*> out;
  for (const ClipRecord* c : d.select(view, Split::Test)) {
    if (c->label(attribute)) out.push_back(c);
  }
  require(!out.empty(), ErrorCode::EmptyInput,
          "no labelled " + std::string(to_string(view)) + " test clips for " + std::string(to_string(attribute)));
  return out;
}

// Accuracy of per-clip distributions, optionally collapsed to one vote per identity.
std::pair<double, std::size_t> score(const std::vector<const ClipRecord*>& clips, const std::vector<VectorXd>& dists,
                                     Attribute attribute, bool per_identity, Aggregator aggregator) {
  if (!per_identity) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < clips.size(); ++i) correct += vote_argmax(dists[i]) == *clips[i]->label(attribute);
    return {static_cast<double>(correct) / static_cast<double>(clips.size()), clips.size()};
  }
  std::map<std::string, std::vector<VectorXd>> groups;
  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    groups[clips[i]->identity_id].push_back(dists[i]);
    labels[clips[i]->identity_id] = *clips[i]->label(attribute);
  }
  IdentityEnsemble e = identity_level_ensemble(groups, aggregator, labels);
  return {e.accuracy.value, e.accuracy.n_evaluated};
}

std::string capability_tag(const AttackSetup& s, bool raa) {
  std::string tag = std::to_string(s.capability);
  if (raa) tag += "+3";
  if (s.per_identity) tag += "+4";
  return tag;
}

void check_setup(const AttackSetup& s) {
  require(s.dataset != nullptr, ErrorCode::InvalidArgument, "attack needs a dataset");
  require(s.capability == 1 || s.capability == 2, ErrorCode::InvalidArgument, "capability must be 1 or 2");
  require(static_cast<bool>(s.ego_predict), ErrorCode::InvalidArgument, "missing prerequisite head: ego classifier");
}

}  // namespace

std::vector<AttackRow> baseline_rows(const AttackSetup& setup) {
  check_setup(setup);
  const Dataset& d = *setup.dataset;
  std::vector<AttackRow> rows;

  const auto ego_clips = labelled(d, View::Ego, setup.attribute);
  std::vector<VectorXd> ego;
  for (const ClipRecord* c : ego_clips) ego.push_back(setup.ego_predict(d, *c));
  auto [ego_acc, ego_n] = score(ego_clips, ego, setup.attribute, setup.per_identity, Aggregator::SoftVote);
  rows.push_back({setup.attribute, capability_tag(setup, false), "ego", 0, "none", "none", ego_acc, 0.0, ego_n});

  if (setup.exo_predict) {
    const auto exo_clips = labelled(d, View::Exo, setup.attribute);
    std::vector<VectorXd> exo;
    for (const ClipRecord* c : exo_clips) exo.push_back(setup.exo_predict(d, *c));
    auto [exo_acc, exo_n] = score(exo_clips, exo, setup.attribute, setup.per_identity, Aggregator::SoftVote);
    rows.push_back({setup.attribute, capability_tag(setup, false), "exo", 0, "none", "none", exo_acc,
                    exo_acc - ego_acc, exo_n});
  }
  return rows;
}

std::vector<AttackRow> attack_sweep(const AttackSetup& setup, const SweepSpec& sweep) {
  check_setup(setup);
  require(static_cast<bool>(setup.exo_predict), ErrorCode::InvalidArgument,
          "missing prerequisite head: exo classifier");
  require(setup.capability == 1 || setup.retriever != nullptr, ErrorCode::InvalidArgument,
          "missing prerequisite head: capability 2 RAA needs trained retrieval heads");
  const Dataset& d = *setup.dataset;
  const Dataset& pool_ds = setup.pool_dataset ? *setup.pool_dataset : d;
  const auto pool = setup.pool_dataset ? pool_ds.select(View::Exo) : d.select(View::Exo, Split::Test);

  RaaConfig cfg;
  cfg.retriever = setup.retriever;
  cfg.zero_shot_retriever = setup.capability == 1 && setup.retriever == nullptr;
  cfg.frames = setup.frames;
  RaaAttack engine(pool_ds, pool, cfg, setup.exo_predict);

  const auto clips = labelled(d, View::Ego, setup.attribute);
  std::vector<VectorXd> ego;
  ego.reserve(clips.size());
  for (const ClipRecord* c : clips) ego.push_back(setup.ego_predict(d, *c));

  // Ranking once at the largest M; smaller supports are prefixes of it.
  std::size_t max_m = 0;
  for (std::size_t m : sweep.ms) max_m = std::max(max_m, m);
  std::vector<std::vector<std::string>> support(clips.size());
  for (std::size_t i = 0; i < clips.size(); ++i) support[i] = engine.retrieve(d, *clips[i], max_m);

  std::vector<AttackRow> rows;
  for (std::size_t m : sweep.ms) {
    for (const VotingChoice& v : sweep.voting) {
      const std::vector<double> weights = voting_weights(v.weight_scheme, m);
      std::vector<VectorXd> dists;
      dists.reserve(clips.size());
      for (std::size_t i = 0; i < clips.size(); ++i) {
        std::vector<VectorXd> sp;
        for (std::size_t j = 0; j < m; ++j) sp.push_back(engine.exo_prediction(support[i][j]));
        dists.push_back(aggregate_predictions(ego[i], sp, v.aggregator, weights).distribution);
      }
      auto [acc, n] = score(clips, dists, setup.attribute, setup.per_identity, v.aggregator);
      auto [base, base_n] = score(clips, ego, setup.attribute, setup.per_identity, v.aggregator);
      (void)base_n;
      rows.push_back({setup.attribute, capability_tag(setup, true), "ego", m, std::string(to_string(v.aggregator)),
                      v.aggregator == Aggregator::HardVote ? "none" : std::string(to_string(v.weight_scheme)), acc,
                      acc - base, n});
    }
  }
  return rows;
}

std::string attack_rows_csv(const std::vector<AttackRow>& rows) {
  std::string out = "attribute,capability,view,M,aggregator,weight_scheme,accuracy,delta,n\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%zu,%s,%s,%.4f,%.4f,%zu\n", std::string(to_string(r.attribute)).c_str(),
                  r.capability.c_str(), r.view.c_str(), r.m, r.aggregator.c_str(), r.weight_scheme.c_str(),
                  round4(r.accuracy), round4(r.delta), r.n);
    out += buf;
  }
  return out;
}

}  // namespace egopriv
