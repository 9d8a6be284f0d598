#pragma once

#include "egopriv/classifier.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace egopriv {

struct MaskConfig {
  std::size_t rounds = 4;
  std::size_t units_per_round = 1;
  double threshold = 1.0;
  double step_size = 0.1;
  std::size_t steps_per_round = 20;
};

struct MaskTrace {
  std::vector<std::size_t> units;  // masked unit indices in masking order
  std::vector<double> losses;      // loss with the hard mask after each round
  double initial_loss = 0.0;
  std::size_t stop_round = 0;      // == rounds when the threshold was never reached
  bool reached_threshold = false;
  double threshold = 0.0;
  std::vector<Eigen::VectorXd> masks;  // continuous mask at the end of each round
};

// Progressive masking of the units (rows) of `units` for the prediction of `label`.
// Each round starts from the current hard mask (1 for live units, 0 for masked),
// runs gradient ascent on the continuous mask against the cross-entropy of `label`
// (clamped to [0, 1]), then permanently zeroes the units_per_round live units whose
// mask moved furthest from 1 (ties to the lowest index). Stops once the hard-mask
// loss reaches the threshold.
MaskTrace progressive_mask(const ClassifierHead& head, const Eigen::MatrixXd& units, int label,
                           const MaskConfig& config);

// {"units": [...], "losses": [...], "stop_round": n, ...}
std::string mask_trace_json(const MaskTrace& trace);
// round,unit,mask rows for external heat-map rendering.
std::string mask_snapshots_csv(const MaskTrace& trace);

}  // namespace egopriv
