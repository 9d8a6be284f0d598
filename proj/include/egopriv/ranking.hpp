#pragma once

#include <optional>
#include <string>
#include <vector>

namespace egopriv {

struct ScoredCandidate {
  std::string clip_id;
  double score = 0.0;

  bool operator==(const ScoredCandidate&) const = default;
};

// Candidates of one query in descending score order, ties by ascending clip id.
struct Ranking {
  std::string query_id;
  std::vector<ScoredCandidate> candidates;
  std::optional<std::size_t> truncation_k;

  bool operator==(const Ranking&) const = default;
};

}  // namespace egopriv
