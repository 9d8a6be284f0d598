#include "egopriv/error.hpp"
#include "egopriv/supcon.hpp"
#include "egopriv/train.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace egopriv;
using egopriv::testing::max_gradient_error;
using egopriv::testing::random_matrix;
using egopriv::testing::random_unit_rows;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Straight transcription of the objective, one log term at a time.
double naive_supcon(const MatrixXd& ego, const MatrixXd& pool, const IndexSets& pos, const IndexSets& neg, double tau,
                    DenominatorMode mode) {
  double total = 0.0;
  for (std::size_t i = 0; i < pos.size(); ++i) {
    double term = 0.0;
    for (std::size_t k : pos[i]) {
      const double num = std::exp(ego.row(i).dot(pool.row(k)) / tau);
      double den = mode == DenominatorMode::Standard ? num : 0.0;
      for (std::size_t j : neg[i]) den += std::exp(ego.row(i).dot(pool.row(j)) / tau);
      term += std::log(num / den);
    }
    total -= term / static_cast<double>(pos[i].size());
  }
  return total;
}

}  // namespace

TEST(SupCon, UniformSimilaritiesGiveLogThree) {
  MatrixXd sim = MatrixXd::Constant(1, 3, 0.25);
  auto r = supcon_from_similarities(sim, {{0}}, {{1, 2}}, 1.0, DenominatorMode::Standard);
  EXPECT_NEAR(r.loss, std::log(3.0), 1e-12);
}

TEST(SupCon, SaturatedPositiveHasNearZeroLoss) {
  MatrixXd sim(1, 3);
  sim << 1.0, -1.0, -1.0;
  auto r = supcon_from_similarities(sim, {{0}}, {{1, 2}}, 0.07, DenominatorMode::Standard);
  EXPECT_LT(r.loss, 1e-6);
  EXPECT_GE(r.loss, 0.0);
}

TEST(SupCon, MatchesNaiveFormula) {
  Rng rng(11);
  const MatrixXd ego = random_unit_rows(rng, 8, 6);
  const MatrixXd pool = random_unit_rows(rng, 16, 6);
  IndexSets pos(8), neg(8);
  for (std::size_t i = 0; i < 8; ++i) {
    for (std::size_t j = 0; j < 16; ++j) (j % 8 == i ? pos[i] : neg[i]).push_back(j);
  }
  for (auto mode : {DenominatorMode::Standard, DenominatorMode::Literal}) {
    auto r = supcon_loss(ego, pool, pos, neg, 0.5, mode);
    EXPECT_NEAR(r.loss, naive_supcon(ego, pool, pos, neg, 0.5, mode), 1e-10);
  }
}

TEST(SupCon, SimilarityGradientMatchesFiniteDifferences) {
  Rng rng(5);
  const MatrixXd sim = random_matrix(rng, 3, 6, 0.5);
  IndexSets pos{{0, 1}, {2}, {3, 4}}, neg{{2, 3, 4, 5}, {0, 1, 5}, {0, 5}};
  for (auto mode : {DenominatorMode::Standard, DenominatorMode::Literal}) {
    auto r = supcon_from_similarities(sim, pos, neg, 0.3, mode);
    auto f = [&](const VectorXd& x) {
      return supcon_from_similarities(Eigen::Map<const MatrixXd>(x.data(), 3, 6), pos, neg, 0.3, mode).loss;
    };
    VectorXd x = Eigen::Map<const VectorXd>(sim.data(), sim.size());
    VectorXd g = Eigen::Map<const VectorXd>(r.grad_sim.data(), r.grad_sim.size());
    EXPECT_LT(max_gradient_error(f, x, g), 1e-6);
  }
}

TEST(SupCon, GradientSignsInStandardMode) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd sim = random_matrix(rng, 2, 5, 0.6);
    IndexSets pos{{0, 1}, {2}}, neg{{2, 3, 4}, {0, 1, 3, 4}};
    auto r = supcon_from_similarities(sim, pos, neg, 0.2, DenominatorMode::Standard);
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (std::size_t k : pos[i]) EXPECT_LT(r.grad_sim(i, k), 0.0);
      for (std::size_t j : neg[i]) EXPECT_GT(r.grad_sim(i, j), 0.0);
    }
  }
}

TEST(SupCon, InvariantToAnchorOrder) {
  Rng rng(3);
  const MatrixXd ego = random_unit_rows(rng, 4, 5);
  const MatrixXd pool = random_unit_rows(rng, 7, 5);
  IndexSets pos{{0}, {1, 2}, {3}, {4}}, neg{{3, 4, 5, 6}, {0, 5, 6}, {0, 1, 2}, {5, 6}};
  const double base = supcon_loss(ego, pool, pos, neg, 0.1).loss;
  MatrixXd ego_rev = ego.colwise().reverse();
  IndexSets pos_rev(pos.rbegin(), pos.rend()), neg_rev(neg.rbegin(), neg.rend());
  EXPECT_NEAR(supcon_loss(ego_rev, pool, pos_rev, neg_rev, 0.1).loss, base, 1e-12);
}

TEST(SupCon, RejectsEmptySetsAndBadTemperature) {
  MatrixXd sim = MatrixXd::Zero(1, 3);
  EXPECT_THROW(supcon_from_similarities(sim, {{}}, {{1}}, 1.0, DenominatorMode::Standard), Error);
  EXPECT_THROW(supcon_from_similarities(sim, {{0}}, {{}}, 1.0, DenominatorMode::Standard), Error);
  EXPECT_THROW(supcon_from_similarities(sim, {{0}}, {{1}}, 0.0, DenominatorMode::Standard), Error);
  EXPECT_THROW(supcon_from_similarities(sim, {{0}}, {{1}}, -1.0, DenominatorMode::Standard), Error);
}

// Finite differences through pooling, projection and normalization for every head parameter.
class HeadGradient : public ::testing::TestWithParam<std::tuple<Pooling, DenominatorMode, Architecture>> {};

TEST_P(HeadGradient, MatchesCentralDifferences) {
  const auto [pooling, mode, arch] = GetParam();
  Rng rng(17);
  const std::size_t in_dim = 6, out_dim = 5, frames = 3, batch = 3;
  HeadShape shape{arch, in_dim, 4, out_dim, pooling};
  ProjectionHead ego = ProjectionHead::initialize(shape, rng);
  ProjectionHead exo = ProjectionHead::initialize(shape, rng);
  ego.params() *= 3.0;  // push attention scores away from uniform
  exo.params() *= 3.0;

  ContrastiveBatch b;
  for (std::size_t i = 0; i < batch; ++i) {
    b.ego_frames.push_back(random_matrix(rng, frames, in_dim));
    b.exo_frames.push_back(random_matrix(rng, frames, in_dim));
  }
  b.cached = random_unit_rows(rng, 2, out_dim);
  b.positives = {{0, 1}, {1}, {2, 3}};
  b.negatives = {{2, 3, 4}, {0, 2, 3, 4}, {0, 1, 4}};

  const double tau = 0.5;
  BatchLoss bl = contrastive_batch_loss(ego, exo, b, tau, mode);

  auto ego_loss = [&](const VectorXd& p) {
    ProjectionHead h(shape, p);
    return contrastive_batch_loss(h, exo, b, tau, mode).loss;
  };
  auto exo_loss = [&](const VectorXd& p) {
    ProjectionHead h(shape, p);
    return contrastive_batch_loss(ego, h, b, tau, mode).loss;
  };
  EXPECT_LT(max_gradient_error(ego_loss, ego.params(), bl.grad_ego), 1e-4);
  EXPECT_LT(max_gradient_error(exo_loss, exo.params(), bl.grad_exo), 1e-4);
}

INSTANTIATE_TEST_SUITE_P(AllModes, HeadGradient,
                         ::testing::Combine(::testing::Values(Pooling::Mean, Pooling::Attention),
                                            ::testing::Values(DenominatorMode::Standard, DenominatorMode::Literal),
                                            ::testing::Values(Architecture::Linear, Architecture::OneHiddenMLP)));
