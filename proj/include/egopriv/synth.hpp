#pragma once

#include "egopriv/data.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace egopriv {

// Latent-factor benchmark. Every clip frame is
//   identity_w*u_id + sum_a attribute_w[a]*u_{a,class} + scene_w*u_scene
//   + take_w*u_take + view_w*u_view + noise[view]*N(0, I)
// with u_* independent random unit directions in `dim` dimensions.
struct SynthConfig {
  std::uint64_t seed = 0;
  std::size_t n_identities = 100;
  std::size_t takes_per_identity = 4;
  std::size_t exo_per_take = 2;
  std::size_t frames = kDefaultFrames;
  std::size_t n_scenes = 8;
  std::size_t dim = 32;
  double test_fraction = 0.3;

  std::vector<double> gender_prior{0.5, 0.5};
  std::vector<double> race_prior{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::vector<double> age_prior{1.0 / 3, 1.0 / 3, 1.0 / 3};

  double identity_w = 1.0;
  double gender_w = 0.5;
  double race_w = 0.5;
  double age_w = 0.5;
  double scene_w = 0.0;
  double take_w = 0.0;
  double view_w = 0.0;
  double noise_ego = 0.1;
  double noise_exo = 0.1;

  const std::vector<double>& prior(Attribute a) const;
  double attribute_w(Attribute a) const;
  void validate() const;
};

// JSON form: {"seed", "n_identities", ..., "priors": {"gender": [...]},
//  "weights": {"identity", "gender", "race", "age", "scene", "take", "view"},
//  "noise": {"ego", "exo"}}. "seed" is mandatory; other fields default.
SynthConfig parse_synth_config(const std::string& json_text);
std::string synth_config_json(const SynthConfig& config);

// Train/test split is by identity: no wearer appears in both.
Dataset generate(const SynthConfig& config);

}  // namespace egopriv
