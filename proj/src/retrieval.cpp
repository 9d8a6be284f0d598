#include "egopriv/retrieval.hpp"

#include "egopriv/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace egopriv {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double cosine_similarity(const VectorXd& u, const VectorXd& v) {
  require(u.size() == v.size(), ErrorCode::DimensionMismatch, "cosine of vectors with different dims");
  const double nu = u.norm(), nv = v.norm();
  require(nu > 0.0 && nv > 0.0, ErrorCode::NumericError, "cosine similarity of a zero vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

Gallery::Gallery(std::vector<std::string> ids, const MatrixXd& vectors) : ids_(std::move(ids)), unit_(vectors) {
  require(static_cast<Index>(ids_.size()) == vectors.rows(), ErrorCode::DimensionMismatch,
          "gallery ids and vectors differ in count");
  for (Index r = 0; r < unit_.rows(); ++r) {
    const double n = unit_.row(r).norm();
    require(n > 0.0, ErrorCode::NumericError, "zero vector for gallery clip '" + ids_[r] + "'");
    unit_.row(r) /= n;
  }
}

Ranking rank_gallery(const std::string& query_id, const VectorXd& query, const Gallery& gallery,
                     const std::set<std::string>& exclude, std::optional<std::size_t> top_k) {
  require(query.size() == gallery.unit_rows().cols() || gallery.size() == 0, ErrorCode::DimensionMismatch,
          "query dim does not match gallery dim");
  const double qn = query.norm();
  require(qn > 0.0, ErrorCode::NumericError, "zero query vector for '" + query_id + "'");
  const VectorXd scores = gallery.unit_rows() * (query / qn);

  std::vector<std::size_t> idx;
  idx.reserve(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    if (!exclude.count(gallery.ids()[i])) idx.push_back(i);
  }
  require(!idx.empty(), ErrorCode::EmptyInput, "empty gallery for query '" + query_id + "'");

  const auto& ids = gallery.ids();
  auto before = [&](std::size_t a, std::size_t b) {
    const double sa = scores(static_cast<Index>(a)), sb = scores(static_cast<Index>(b));
    if (sa != sb) return sa > sb;
    return ids[a] < ids[b];
  };
  std::size_t keep = idx.size();
  if (top_k && *top_k < keep) {
    keep = *top_k;
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(keep), idx.end(), before);
  } else {
    std::sort(idx.begin(), idx.end(), before);
  }

  Ranking r;
  r.query_id = query_id;
  r.truncation_k = top_k;
  r.candidates.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    r.candidates.push_back({ids[idx[i]], std::clamp(scores(static_cast<Index>(idx[i])), -1.0, 1.0)});
  }
  return r;
}

VectorXd Embedder::embed(const Dataset& dataset, const ClipRecord& clip) const {
  const MatrixXd frames_d = subsample_frames(dataset.frames(clip.clip_id), frames);
  if (!has_heads()) return pool_frames(frames_d, Pooling::Mean, VectorXd());
  const ProjectionHead& head = clip.view == View::Ego ? *ego_head : *exo_head;
  return head.embed(frames_d);
}

Gallery build_gallery(const Dataset& dataset, const std::vector<const ClipRecord*>& clips,
                      const Embedder& embedder) {
  std::vector<std::string> ids;
  ids.reserve(clips.size());
  MatrixXd vectors;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    VectorXd v = embedder.embed(dataset, *clips[i]);
    if (i == 0) vectors.resize(static_cast<Index>(clips.size()), v.size());
    vectors.row(static_cast<Index>(i)) = v.transpose();
    ids.push_back(clips[i]->clip_id);
  }
  return Gallery(std::move(ids), vectors);
}

RetrievalRun run_retrieval_task(const Dataset& dataset, RetrievalTask task, const Embedder& embedder,
                                const RetrievalOptions& options) {
  const GalleryScope& scope = options.scope;
  const View gview = gallery_view(task, scope);
  const bool same_gallery = gview == View::Ego;
  if (embedder.has_heads() && !same_gallery) {
    require(embedder.ego_head->shape().output_dim == embedder.exo_head->shape().output_dim,
            ErrorCode::DimensionMismatch, "ego and exo heads do not share a joint space");
  }
  if (!embedder.has_heads() && !same_gallery) {
    require(dataset.ego().dim() == dataset.exo().dim(), ErrorCode::DimensionMismatch,
            "ego and exo embeddings differ in dim; cross-view retrieval needs projection heads");
  }

  const auto queries = dataset.select(View::Ego, scope.split);
  require(!queries.empty(), ErrorCode::EmptyInput, "no ego queries in scope");
  const Gallery gallery = build_gallery(dataset, dataset.select(gview, scope.split), embedder);

  RetrievalRun run;
  for (const ClipRecord* q : queries) {
    auto positives = positive_set(dataset, task, q->clip_id, scope);
    if (task == RetrievalTask::Moment) {
      require(!positives.empty(), ErrorCode::EmptyInput,
              "take '" + q->take_id + "' of query '" + q->clip_id + "' has no synchronized exo clip");
    }
    if (positives.empty()) ++run.n_empty_positive;
    std::set<std::string> exclude;
    if (same_gallery) exclude.insert(q->clip_id);
    run.rankings.emplace(q->clip_id, rank_gallery(q->clip_id, embedder.embed(dataset, *q), gallery, exclude,
                                                  options.top_k));
    run.positives.emplace(q->clip_id, std::move(positives));
  }
  return run;
}

std::string rankings_jsonl(const std::map<std::string, Ranking>& rankings) {
  std::string out;
  for (const auto& [query, r] : rankings) {
    nlohmann::json line;
    line["query"] = query;
    line["candidates"] = nlohmann::json::array();
    for (const auto& c : r.candidates) line["candidates"].push_back({{"id", c.clip_id}, {"score", c.score}});
    out += line.dump();
    out += '\n';
  }
  return out;
}

}  // namespace egopriv
