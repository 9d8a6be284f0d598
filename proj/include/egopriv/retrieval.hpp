#pragma once

#include "egopriv/data.hpp"
#include "egopriv/head.hpp"
#include "egopriv/ranking.hpp"

#include <Eigen/Dense>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace egopriv {

double cosine_similarity(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

// Candidate clips with their pooled vectors scaled to unit norm, one per row.
class Gallery {
 public:
  Gallery() = default;
  Gallery(std::vector<std::string> ids, const Eigen::MatrixXd& vectors);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Eigen::MatrixXd& unit_rows() const { return unit_; }

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd unit_;
};

// Exact cosine ranking of the gallery against one query vector, excluding
// `exclude`. With top_k set only the best top_k are kept; that prefix is
// identical to the full sort's prefix.
Ranking rank_gallery(const std::string& query_id, const Eigen::VectorXd& query, const Gallery& gallery,
                     const std::set<std::string>& exclude = {},
                     std::optional<std::size_t> top_k = std::nullopt);

// Maps clips into the retrieval space. Without heads (zero-shot) the raw
// frame embeddings are mean pooled; with heads each clip goes through the head
// of its own view.
struct Embedder {
  const ProjectionHead* ego_head = nullptr;
  const ProjectionHead* exo_head = nullptr;
  std::size_t frames = kDefaultFrames;

  bool has_heads() const { return ego_head && exo_head; }
  Eigen::VectorXd embed(const Dataset& dataset, const ClipRecord& clip) const;
};

Gallery build_gallery(const Dataset& dataset, const std::vector<const ClipRecord*>& clips,
                      const Embedder& embedder);

struct RetrievalOptions {
  GalleryScope scope{Split::Test, View::Ego};
  std::optional<std::size_t> top_k;
};

struct RetrievalRun {
  std::map<std::string, Ranking> rankings;
  std::map<std::string, std::set<std::string>> positives;
  std::size_t n_empty_positive = 0;
};

// One ranking per ego query in scope; same-gallery tasks exclude the query itself.
RetrievalRun run_retrieval_task(const Dataset& dataset, RetrievalTask task, const Embedder& embedder,
                                const RetrievalOptions& options = {});

// JSON lines: {"query": id, "candidates": [{"id": .., "score": ..}, ...]}
std::string rankings_jsonl(const std::map<std::string, Ranking>& rankings);

}  // namespace egopriv
