#include "egopriv/explain.hpp"

#include "egopriv/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>

namespace egopriv {

using Eigen::Index;
using Eigen::VectorXd;

MaskTrace progressive_mask(const ClassifierHead& head, const Eigen::MatrixXd& units, int label,
                           const MaskConfig& config) {
  const auto n_units = static_cast<std::size_t>(units.rows());
  require(n_units > 0, ErrorCode::EmptyInput, "progressive masking needs at least one unit");
  require(config.units_per_round > 0 && config.units_per_round <= n_units, ErrorCode::InvalidArgument,
          "units_per_round must be in [1, unit count]");
  require(config.step_size > 0.0, ErrorCode::InvalidArgument, "mask step size must be positive");

  MaskTrace trace;
  trace.threshold = config.threshold;
  VectorXd hard = VectorXd::Ones(units.rows());
  std::vector<char> masked(n_units, 0);

  trace.initial_loss = head.masked_cross_entropy(units, hard, label);
  if (trace.initial_loss >= config.threshold) {
    trace.reached_threshold = true;
    trace.stop_round = 0;
    return trace;
  }

  for (std::size_t round = 1; round <= config.rounds; ++round) {
    VectorXd mask = hard;
    VectorXd grad;
    for (std::size_t s = 0; s < config.steps_per_round; ++s) {
      head.masked_cross_entropy(units, mask, label, &grad);
      mask += config.step_size * grad;
      for (std::size_t t = 0; t < n_units; ++t) {
        const auto i = static_cast<Index>(t);
        mask(i) = masked[t] ? 0.0 : std::clamp(mask(i), 0.0, 1.0);
      }
    }

    const std::size_t live = static_cast<std::size_t>(std::count(masked.begin(), masked.end(), 0));
    const std::size_t take = std::min(config.units_per_round, live);
    for (std::size_t k = 0; k < take; ++k) {
      std::size_t best = n_units;
      double best_disp = -1.0;
      for (std::size_t t = 0; t < n_units; ++t) {
        if (masked[t]) continue;
        const double disp = 1.0 - mask(static_cast<Index>(t));
        if (disp > best_disp) {
          best_disp = disp;
          best = t;
        }
      }
      masked[best] = 1;
      hard(static_cast<Index>(best)) = 0.0;
      trace.units.push_back(best);
    }

    const double loss = head.masked_cross_entropy(units, hard, label);
    trace.losses.push_back(loss);
    trace.masks.push_back(mask);
    if (loss >= config.threshold) {
      trace.reached_threshold = true;
      trace.stop_round = round;
      return trace;
    }
    if (trace.units.size() == n_units) break;
  }
  trace.stop_round = config.rounds;
  return trace;
}

std::string mask_trace_json(const MaskTrace& trace) {
  nlohmann::json j;
  j["units"] = trace.units;
  j["losses"] = trace.losses;
  j["initial_loss"] = trace.initial_loss;
  j["stop_round"] = trace.stop_round;
  j["reached_threshold"] = trace.reached_threshold;
  j["threshold"] = trace.threshold;
  return j.dump(2) + "\n";
}

std::string mask_snapshots_csv(const MaskTrace& trace) {
  std::string out = "round,unit,mask\n";
  char buf[96];
  for (std::size_t r = 0; r < trace.masks.size(); ++r) {
    for (Index u = 0; u < trace.masks[r].size(); ++u) {
      std::snprintf(buf, sizeof buf, "%zu,%td,%.6f\n", r + 1, u, trace.masks[r](u));
      out += buf;
    }
  }
  return out;
}

}  // namespace egopriv
