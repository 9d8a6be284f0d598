#include "egopriv/metrics.hpp"

#include "egopriv/error.hpp"

#include <cmath>

namespace egopriv {

MetricReport accuracy(const std::map<std::string, Label>& predictions,
                      const std::map<std::string, Label>& labels) {
  require(!predictions.empty(), ErrorCode::EmptyInput, "accuracy over an empty evaluation set");
  std::size_t correct = 0;
  for (const auto& [clip, predicted] : predictions) {
    auto it = labels.find(clip);
    require(it != labels.end(), ErrorCode::MissingField, "no label for predicted clip '" + clip + "'");
    if (it->second == predicted) ++correct;
  }
  MetricReport r;
  r.metric_name = "accuracy";
  r.n_evaluated = predictions.size();
  r.value = static_cast<double>(correct) / static_cast<double>(predictions.size());
  return r;
}

MetricReport hit_rate_at_k(const std::map<std::string, Ranking>& rankings,
                           const std::map<std::string, std::set<std::string>>& positives,
                           std::size_t k) {
  require(k > 0, ErrorCode::InvalidArgument, "k must be positive");
  MetricReport r;
  r.metric_name = "hr@" + std::to_string(k);
  r.parameters["k"] = std::to_string(k);
  std::size_t hits = 0;
  for (const auto& [query, ranking] : rankings) {
    auto pit = positives.find(query);
    if (pit == positives.end() || pit->second.empty()) {
      ++r.n_excluded;
      continue;
    }
    require(ranking.candidates.size() >= k, ErrorCode::InvalidArgument,
            "k=" + std::to_string(k) + " exceeds gallery size " +
                std::to_string(ranking.candidates.size()) + " for query '" + query + "'");
    ++r.n_evaluated;
    for (std::size_t i = 0; i < k; ++i) {
      if (pit->second.count(ranking.candidates[i].clip_id)) {
        ++hits;
        break;
      }
    }
  }
  require(r.n_evaluated > 0, ErrorCode::EmptyInput, "no query with a nonempty positive set");
  r.value = static_cast<double>(hits) / static_cast<double>(r.n_evaluated);
  return r;
}

double chance_hit_rate(std::size_t gallery_size, std::size_t positives_per_query, std::size_t k) {
  const std::size_t n = gallery_size, p = positives_per_query;
  require(p > 0 && p <= n && k > 0 && k <= n, ErrorCode::InvalidArgument,
          "chance_hit_rate needs 0 < p <= N and 0 < k <= N");
  // C(N-p, k) / C(N, k) = prod_{i<k} (N-p-i) / (N-i)
  double miss = 1.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (n - p < i + 1) return 1.0;
    miss *= static_cast<double>(n - p - i) / static_cast<double>(n - i);
  }
  return 1.0 - miss;
}

Label majority_label(const std::vector<Label>& labels) {
  require(!labels.empty(), ErrorCode::EmptyInput, "majority of an empty label set");
  std::map<Label, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  // std::map iterates in lexicographic order, so strict '>' keeps the smallest on ties.
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return best->first;
}

MetricReport prior_accuracy(const std::vector<Label>& train_labels, const std::vector<Label>& test_labels) {
  require(!train_labels.empty(), ErrorCode::EmptyInput, "prior_accuracy needs a nonempty train set");
  require(!test_labels.empty(), ErrorCode::EmptyInput, "prior_accuracy needs a nonempty test set");
  const Label majority = majority_label(train_labels);
  std::size_t correct = 0;
  for (const auto& l : test_labels) correct += (l == majority);
  MetricReport r;
  r.metric_name = "prior_accuracy";
  r.value = static_cast<double>(correct) / static_cast<double>(test_labels.size());
  r.n_evaluated = test_labels.size();
  r.parameters["majority"] = majority;
  return r;
}

MetricReport attribute_consistency_at_k(const std::map<std::string, Ranking>& rankings,
                                        const std::map<std::string, Label>& attribute_of,
                                        std::size_t k) {
  require(k > 0, ErrorCode::InvalidArgument, "k must be positive");
  require(!rankings.empty(), ErrorCode::EmptyInput, "attribute consistency over no rankings");
  auto attr = [&](const std::string& clip) -> const Label& {
    auto it = attribute_of.find(clip);
    require(it != attribute_of.end(), ErrorCode::MissingField, "missing attribute for clip '" + clip + "'");
    return it->second;
  };
  std::size_t hits = 0;
  for (const auto& [query, ranking] : rankings) {
    require(ranking.candidates.size() >= k, ErrorCode::InvalidArgument,
            "k exceeds gallery size for query '" + query + "'");
    const Label& target = attr(query);
    bool hit = false;
    for (std::size_t i = 0; i < k; ++i) hit |= attr(ranking.candidates[i].clip_id) == target;
    hits += hit;
  }
  MetricReport r;
  r.metric_name = "attribute_consistency@" + std::to_string(k);
  r.parameters["k"] = std::to_string(k);
  r.n_evaluated = rankings.size();
  r.value = static_cast<double>(hits) / static_cast<double>(rankings.size());
  return r;
}

// Adding 0.0 folds -0.0 into 0.0.
double round4(double v) { return std::round(v * 1e4) / 1e4 + 0.0; }

}  // namespace egopriv
