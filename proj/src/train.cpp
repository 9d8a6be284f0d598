#include "egopriv/train.hpp"

#include "egopriv/error.hpp"
#include "egopriv/log.hpp"

#include <cstdio>
#include <map>
#include <numeric>

namespace egopriv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(PositiveMode m) { return m == PositiveMode::Individual ? "Individual" : "Situational"; }

PositiveMode parse_positive_mode(std::string_view s) {
  if (s == "Individual" || s == "individual") return PositiveMode::Individual;
  if (s == "Situational" || s == "situational") return PositiveMode::Situational;
  fail(ErrorCode::InvalidArgument, "unknown positive mode '" + std::string(s) + "'");
}

void TrainConfig::validate() const {
  require(temperature > 0.0, ErrorCode::InvalidArgument, "temperature must be positive");
  require(batch_size >= 2, ErrorCode::InvalidArgument, "batch_size must be at least 2");
  require(learning_rate >= 0.0, ErrorCode::InvalidArgument, "learning_rate must be nonnegative");
  require(output_dim > 0, ErrorCode::InvalidArgument, "output_dim must be positive");
  require(architecture != Architecture::OneHiddenMLP || hidden_dim > 0, ErrorCode::InvalidArgument,
          "hidden_dim must be positive for the MLP head");
}

void NegativeCache::push(std::string clip_id, VectorXd z) {
  if (capacity_ == 0) return;
  if (entries_.size() == capacity_) entries_.pop_front();
  entries_.push_back({std::move(clip_id), std::move(z)});
}

BatchLoss contrastive_batch_loss(const ProjectionHead& ego_head, const ProjectionHead& exo_head,
                                 const ContrastiveBatch& batch, double tau, DenominatorMode mode) {
  const std::size_t n_ego = batch.ego_frames.size();
  const std::size_t n_exo = batch.exo_frames.size();
  const Index dim = static_cast<Index>(ego_head.shape().output_dim);
  require(exo_head.shape().output_dim == ego_head.shape().output_dim, ErrorCode::DimensionMismatch,
          "ego and exo heads must share an output dim");
  require(batch.cached.size() == 0 || batch.cached.cols() == dim, ErrorCode::DimensionMismatch,
          "cached features do not match the joint dim");

  std::vector<ProjectionHead::Trace> ego_traces(n_ego), exo_traces(n_exo);
  MatrixXd z_ego(static_cast<Index>(n_ego), dim);
  const Index n_cached = batch.cached.rows();
  MatrixXd pool(static_cast<Index>(n_exo) + n_cached, dim);
  for (std::size_t i = 0; i < n_ego; ++i) {
    z_ego.row(static_cast<Index>(i)) = ego_head.forward(batch.ego_frames[i], ego_traces[i]).transpose();
  }
  for (std::size_t j = 0; j < n_exo; ++j) {
    pool.row(static_cast<Index>(j)) = exo_head.forward(batch.exo_frames[j], exo_traces[j]).transpose();
  }
  if (n_cached > 0) pool.bottomRows(n_cached) = batch.cached;

  SupConResult r = supcon_loss(z_ego, pool, batch.positives, batch.negatives, tau, mode);

  BatchLoss out;
  out.loss = r.loss;
  out.grad_ego = VectorXd::Zero(ego_head.params().size());
  out.grad_exo = VectorXd::Zero(exo_head.params().size());
  for (std::size_t i = 0; i < n_ego; ++i) {
    ego_head.backward(ego_traces[i], r.grad_ego.row(static_cast<Index>(i)).transpose(), out.grad_ego);
  }
  // Cached rows are constants: their gradient rows are dropped here.
  for (std::size_t j = 0; j < n_exo; ++j) {
    exo_head.backward(exo_traces[j], r.grad_exo.row(static_cast<Index>(j)).transpose(), out.grad_exo);
  }
  out.z_exo = pool.topRows(static_cast<Index>(n_exo));
  return out;
}

namespace {

constexpr std::uint64_t kSamplerStream = 0x9E3779B97F4A7C15ULL;

const std::string& link_key(const ClipRecord& c, PositiveMode mode) {
  return mode == PositiveMode::Individual ? c.identity_id : c.take_id;
}

}  // namespace

TrainedEmbedding initial_heads(const Dataset& dataset, const TrainConfig& config) {
  config.validate();
  Rng rng(config.seed);
  TrainedEmbedding out;
  HeadShape ego_shape{config.architecture, dataset.ego().dim(), config.hidden_dim, config.output_dim, config.pooling};
  HeadShape exo_shape = ego_shape;
  exo_shape.input_dim = dataset.exo().dim();
  out.ego_head = ProjectionHead::initialize(ego_shape, rng);
  out.exo_head = ProjectionHead::initialize(exo_shape, rng);
  return out;
}

TrainedEmbedding train_embedding(const Dataset& dataset, const TrainConfig& config) {
  TrainedEmbedding out = initial_heads(dataset, config);
  const PositiveMode mode = config.positive_mode;

  // Anchors: train ego clips with at least one linked train exo clip.
  std::map<std::string, std::vector<const ClipRecord*>> exo_by_key;
  for (const ClipRecord* c : dataset.select(View::Exo, Split::Train)) exo_by_key[link_key(*c, mode)].push_back(c);
  std::vector<const ClipRecord*> anchors;
  for (const ClipRecord* c : dataset.select(View::Ego, Split::Train)) {
    if (exo_by_key.count(link_key(*c, mode))) anchors.push_back(c);
  }
  require(!anchors.empty(), ErrorCode::EmptyInput, "no ego-exo positive links in the train split");
  if (config.steps == 0) return out;

  std::map<std::string, MatrixXd> frames;
  auto frames_of = [&](const ClipRecord& c) -> const MatrixXd& {
    auto it = frames.find(c.clip_id);
    if (it == frames.end()) {
      it = frames.emplace(c.clip_id, subsample_frames(dataset.frames(c.clip_id), config.frames)).first;
    }
    return it->second;
  };

  Rng sampler(config.seed ^ kSamplerStream);
  AdamW ego_opt(out.ego_head.params().size(), config.adamw);
  AdamW exo_opt(out.exo_head.params().size(), config.adamw);
  NegativeCache cache(config.cache_capacity);
  std::vector<std::size_t> order(anchors.size());
  const std::size_t batch_size = std::min(config.batch_size, anchors.size());

  for (std::size_t step = 0; step < config.steps; ++step) {
    // Partial Fisher-Yates draw of batch_size distinct anchors.
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch_size; ++i) {
      std::swap(order[i], order[i + sampler.below(order.size() - i)]);
    }

    ContrastiveBatch batch;
    std::vector<const std::string*> anchor_keys, pool_keys;
    std::vector<std::string> paired_ids;
    for (std::size_t i = 0; i < batch_size; ++i) {
      const ClipRecord& anchor = *anchors[order[i]];
      const auto& candidates = exo_by_key.at(link_key(anchor, mode));
      const ClipRecord& paired = *candidates[sampler.below(candidates.size())];
      batch.ego_frames.push_back(frames_of(anchor));
      batch.exo_frames.push_back(frames_of(paired));
      paired_ids.push_back(paired.clip_id);
      anchor_keys.push_back(&link_key(anchor, mode));
      pool_keys.push_back(&link_key(paired, mode));
    }
    if (cache.size() > 0) {
      batch.cached.resize(static_cast<Index>(cache.size()), static_cast<Index>(config.output_dim));
      Index r = 0;
      for (const auto& e : cache.entries()) {
        batch.cached.row(r++) = e.z.transpose();
        pool_keys.push_back(&link_key(dataset.clip(e.clip_id), mode));
      }
    }

    // Anchors whose negative set would be empty are left out of this step.
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < batch_size; ++i) {
      std::vector<std::size_t> pos, neg;
      for (std::size_t j = 0; j < pool_keys.size(); ++j) {
        const bool linked = *pool_keys[j] == *anchor_keys[i];
        if (linked) pos.push_back(j);
        const bool negative = config.denominator_mode == DenominatorMode::Standard ? !linked : j != i;
        if (negative) neg.push_back(j);
      }
      if (neg.empty()) continue;
      batch.positives.push_back(std::move(pos));
      batch.negatives.push_back(std::move(neg));
      kept.push_back(i);
    }

    const double lr = cosine_lr(config.learning_rate, step, config.steps);
    double loss = 0.0;
    if (!kept.empty()) {
      ContrastiveBatch active;
      active.exo_frames = batch.exo_frames;
      active.cached = batch.cached;
      for (std::size_t k = 0; k < kept.size(); ++k) active.ego_frames.push_back(batch.ego_frames[kept[k]]);
      active.positives = std::move(batch.positives);
      active.negatives = std::move(batch.negatives);

      BatchLoss bl = contrastive_batch_loss(out.ego_head, out.exo_head, active, config.temperature,
                                            config.denominator_mode);
      loss = bl.loss;
      ego_opt.step(out.ego_head.params(), bl.grad_ego, lr);
      exo_opt.step(out.exo_head.params(), bl.grad_exo, lr);
      for (std::size_t j = 0; j < batch_size; ++j) {
        cache.push(paired_ids[j], bl.z_exo.row(static_cast<Index>(j)).transpose());
      }
    } else {
      log_message(LogLevel::Debug, "step " + std::to_string(step + 1) + ": no anchor with negatives, skipped");
    }
    out.loss_curve.push_back({step + 1, loss, lr});
  }
  out.steps = config.steps;
  return out;
}

std::string loss_curve_csv(const std::vector<LossPoint>& curve) {
  std::string out = "step,loss,lr\n";
  char buf[96];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%zu,%.10g,%.10g\n", p.step, p.loss, p.lr);
    out += buf;
  }
  return out;
}

}  // namespace egopriv
