#pragma once

#include "egopriv/data.hpp"
#include "egopriv/head.hpp"
#include "egopriv/optim.hpp"
#include "egopriv/supcon.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <vector>

namespace egopriv {

// Which exo clips count as positives of an ego anchor:
// Individual - every exo clip of the same wearer; Situational - exo clips of the same take.
enum class PositiveMode { Individual, Situational };

std::string_view to_string(PositiveMode m);
PositiveMode parse_positive_mode(std::string_view s);

struct TrainConfig {
  double temperature = 0.07;
  std::size_t batch_size = 8;
  double learning_rate = 1e-5;
  std::size_t steps = 0;
  std::size_t cache_capacity = 4096;
  std::uint64_t seed = 0;
  PositiveMode positive_mode = PositiveMode::Individual;
  DenominatorMode denominator_mode = DenominatorMode::Standard;
  AdamWConfig adamw;

  Architecture architecture = Architecture::Linear;
  std::size_t output_dim = 128;
  std::size_t hidden_dim = 256;
  Pooling pooling = Pooling::Mean;
  std::size_t frames = kDefaultFrames;

  void validate() const;
};

// FIFO queue of detached exo features from earlier steps.
class NegativeCache {
 public:
  struct Entry {
    std::string clip_id;
    Eigen::VectorXd z;
  };

  explicit NegativeCache(std::size_t capacity) : capacity_(capacity) {}

  void push(std::string clip_id, Eigen::VectorXd z);
  std::size_t size() const { return entries_.size(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Entry>& entries() const { return entries_; }

 private:
  std::size_t capacity_;
  std::deque<Entry> entries_;
};

// One contrastive minibatch. Pool rows are the in-batch exo clips (which receive
// gradient) followed by the cached features (which do not).
struct ContrastiveBatch {
  std::vector<Eigen::MatrixXd> ego_frames;
  std::vector<Eigen::MatrixXd> exo_frames;
  Eigen::MatrixXd cached;  // rows of unit vectors, may be empty
  IndexSets positives;
  IndexSets negatives;
};

struct BatchLoss {
  double loss = 0.0;
  Eigen::VectorXd grad_ego;  // w.r.t. ego head params
  Eigen::VectorXd grad_exo;  // w.r.t. exo head params
  Eigen::MatrixXd z_exo;     // in-batch exo embeddings, one per row
};

BatchLoss contrastive_batch_loss(const ProjectionHead& ego_head, const ProjectionHead& exo_head,
                                 const ContrastiveBatch& batch, double tau, DenominatorMode mode);

struct LossPoint {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainedEmbedding {
  ProjectionHead ego_head;
  ProjectionHead exo_head;
  std::size_t steps = 0;
  std::vector<LossPoint> loss_curve;
};

// Heads at their seeded initialization, exactly as train_embedding starts.
TrainedEmbedding initial_heads(const Dataset& dataset, const TrainConfig& config);

TrainedEmbedding train_embedding(const Dataset& dataset, const TrainConfig& config);

std::string loss_curve_csv(const std::vector<LossPoint>& curve);

}  // namespace egopriv
