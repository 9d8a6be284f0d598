#pragma once

#include "egopriv/data.hpp"
#include "egopriv/random.hpp"
#include "egopriv/synth.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

namespace egopriv::testing {

inline Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  }
  return m;
}

inline Eigen::VectorXd random_unit(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd v = random_matrix(rng, dim, 1);
  return v / v.norm();
}

inline Eigen::MatrixXd random_unit_rows(Rng& rng, Eigen::Index rows, Eigen::Index dim) {
  Eigen::MatrixXd m(rows, dim);
  for (Eigen::Index i = 0; i < rows; ++i) m.row(i) = random_unit(rng, dim).transpose();
  return m;
}

// |a - n| / max(|a|, |n|, floor). The floor keeps parameters whose true
// gradient is ~0 from turning round-off into a huge ratio.
inline double relative_error(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Largest relative error between `analytic` and central differences of f at x.
inline double max_gradient_error(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                 const Eigen::VectorXd& analytic, double h = 1e-5) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double orig = x(i);
    x(i) = orig + h;
    const double up = f(x);
    x(i) = orig - h;
    const double down = f(x);
    x(i) = orig;
    worst = std::max(worst, relative_error(analytic(i), (up - down) / (2 * h)));
  }
  return worst;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("egopriv_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline SynthConfig small_synth(std::uint64_t seed = 0) {
  SynthConfig c;
  c.seed = seed;
  c.n_identities = 12;
  c.takes_per_identity = 2;
  c.exo_per_take = 2;
  c.frames = 4;
  c.n_scenes = 3;
  c.dim = 8;
  return c;
}

}  // namespace egopriv::testing
