#pragma once

#include "egopriv/ranking.hpp"

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace egopriv {

using Label = std::string;

struct MetricReport {
  std::string metric_name;
  double value = 0.0;
  std::size_t n_evaluated = 0;
  std::size_t n_excluded = 0;
  std::map<std::string, std::string> parameters;
};

// Fraction of predicted clips whose prediction equals the label.
MetricReport accuracy(const std::map<std::string, Label>& predictions,
                      const std::map<std::string, Label>& labels);

// Fraction of queries whose top-k candidates contain a positive. Queries with an
// empty (or absent) positive set are excluded and counted in n_excluded.
MetricReport hit_rate_at_k(const std::map<std::string, Ranking>& rankings,
                           const std::map<std::string, std::set<std::string>>& positives,
                           std::size_t k);

// Probability that a uniformly random size-k subset of N items hits one of p positives.
double chance_hit_rate(std::size_t gallery_size, std::size_t positives_per_query, std::size_t k);

// Majority class of the training labels (ties to the lexicographically smallest
// label), scored against the test labels.
MetricReport prior_accuracy(const std::vector<Label>& train_labels,
                            const std::vector<Label>& test_labels);
Label majority_label(const std::vector<Label>& labels);

// Fraction of queries with at least one top-k candidate sharing the query's attribute.
MetricReport attribute_consistency_at_k(const std::map<std::string, Ranking>& rankings,
                                        const std::map<std::string, Label>& attribute_of,
                                        std::size_t k);

// Rounds to the 4 decimal places used in serialized reports.
double round4(double v);

}  // namespace egopriv
