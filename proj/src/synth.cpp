#include "egopriv/synth.hpp"

#include "egopriv/error.hpp"
#include "egopriv/random.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

namespace egopriv {

using Eigen::Index;
using Eigen::VectorXd;
using nlohmann::json;

const std::vector<double>& SynthConfig::prior(Attribute a) const {
  switch (a) {
    case Attribute::Gender: return gender_prior;
    case Attribute::Race: return race_prior;
    case Attribute::Age: return age_prior;
  }
  return gender_prior;
}

double SynthConfig::attribute_w(Attribute a) const {
  switch (a) {
    case Attribute::Gender: return gender_w;
    case Attribute::Race: return race_w;
    case Attribute::Age: return age_w;
  }
  return 0.0;
}

void SynthConfig::validate() const {
  require(n_identities > 0 && takes_per_identity > 0 && frames > 0 && dim > 0, ErrorCode::InvalidArgument,
          "synth counts must be positive");
  require(n_scenes > 0, ErrorCode::InvalidArgument, "synth needs at least one scene");
  require(test_fraction >= 0.0 && test_fraction <= 1.0, ErrorCode::InvalidArgument,
          "test_fraction must be in [0, 1]");
  for (double w : {identity_w, gender_w, race_w, age_w, scene_w, take_w, view_w, noise_ego, noise_exo}) {
    require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidArgument, "synth weights and noise must be >= 0");
  }
  for (Attribute a : kAllAttributes) {
    const auto& p = prior(a);
    require(p.size() == class_count(a), ErrorCode::InvalidArgument,
            std::string(to_string(a)) + " prior needs one entry per class");
    double sum = 0.0;
    for (double v : p) {
      require(v >= 0.0, ErrorCode::InvalidArgument, "priors must be nonnegative");
      sum += v;
    }
    require(std::abs(sum - 1.0) <= 1e-9, ErrorCode::InvalidArgument,
            std::string(to_string(a)) + " prior does not sum to 1");
  }
}

SynthConfig parse_synth_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedFile, std::string("synth config is not valid JSON: ") + e.what());
  }
  require(j.is_object(), ErrorCode::MalformedFile, "synth config must be a JSON object");
  require(j.contains("seed") && j["seed"].is_number_unsigned(), ErrorCode::MissingField,
          "synth config needs an explicit nonnegative integer 'seed'");
  SynthConfig c;
  try {
    c.seed = j["seed"].get<std::uint64_t>();
    c.n_identities = j.value("n_identities", c.n_identities);
    c.takes_per_identity = j.value("takes_per_identity", c.takes_per_identity);
    c.exo_per_take = j.value("exo_per_take", c.exo_per_take);
    c.frames = j.value("frames", c.frames);
    c.n_scenes = j.value("n_scenes", c.n_scenes);
    c.dim = j.value("dim", c.dim);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    if (j.contains("priors")) {
      const json& p = j["priors"];
      c.gender_prior = p.value("gender", c.gender_prior);
      c.race_prior = p.value("race", c.race_prior);
      c.age_prior = p.value("age", c.age_prior);
    }
    if (j.contains("weights")) {
      const json& w = j["weights"];
      c.identity_w = w.value("identity", c.identity_w);
      c.gender_w = w.value("gender", c.gender_w);
      c.race_w = w.value("race", c.race_w);
      c.age_w = w.value("age", c.age_w);
      c.scene_w = w.value("scene", c.scene_w);
      c.take_w = w.value("take", c.take_w);
      c.view_w = w.value("view", c.view_w);
    }
    if (j.contains("noise")) {
      c.noise_ego = j["noise"].value("ego", c.noise_ego);
      c.noise_exo = j["noise"].value("exo", c.noise_exo);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedFile, std::string("bad synth config field: ") + e.what());
  }
  c.validate();
  return c;
}

std::string synth_config_json(const SynthConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["n_identities"] = c.n_identities;
  j["takes_per_identity"] = c.takes_per_identity;
  j["exo_per_take"] = c.exo_per_take;
  j["frames"] = c.frames;
  j["n_scenes"] = c.n_scenes;
  j["dim"] = c.dim;
  j["test_fraction"] = c.test_fraction;
  j["priors"] = {{"gender", c.gender_prior}, {"race", c.race_prior}, {"age", c.age_prior}};
  j["weights"] = {{"identity", c.identity_w}, {"gender", c.gender_w}, {"race", c.race_w}, {"age", c.age_w},
                  {"scene", c.scene_w},       {"take", c.take_w},     {"view", c.view_w}};
  j["noise"] = {{"ego", c.noise_ego}, {"exo", c.noise_exo}};
  return j.dump(2);
}

namespace {

VectorXd unit_direction(Rng& rng, std::size_t dim) {
  VectorXd v(static_cast<Index>(dim));
  do {
    for (Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

std::string padded(const char* prefix, std::size_t value, int width) {
  std::string digits_text = std::to_string(value);
  if (static_cast<int>(digits_text.size()) < width) digits_text.insert(0, width - digits_text.size(), '0');
  return prefix + digits_text;
}

int digits(std::size_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

Dataset generate(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const std::size_t dim = config.dim;

  std::vector<VectorXd> identity_dirs, scene_dirs;
  for (std::size_t i = 0; i < config.n_identities; ++i) identity_dirs.push_back(unit_direction(rng, dim));
  std::vector<std::vector<VectorXd>> class_dirs;
  for (Attribute a : kAllAttributes) {
    std::vector<VectorXd> dirs;
    for (std::size_t k = 0; k < class_count(a); ++k) dirs.push_back(unit_direction(rng, dim));
    class_dirs.push_back(std::move(dirs));
  }
  for (std::size_t s = 0; s < config.n_scenes; ++s) scene_dirs.push_back(unit_direction(rng, dim));
  const VectorXd view_dir[2] = {unit_direction(rng, dim), unit_direction(rng, dim)};

  struct Person {
    int gender, race, age;
    Split split;
  };
  std::vector<Person> people(config.n_identities);
  for (auto& p : people) {
    p.gender = static_cast<int>(rng.categorical(config.gender_prior));
    p.race = static_cast<int>(rng.categorical(config.race_prior));
    p.age = static_cast<int>(rng.categorical(config.age_prior));
    p.split = Split::Train;
  }
  std::vector<std::size_t> order(config.n_identities);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order.begin(), order.end());
  const auto n_test = static_cast<std::size_t>(std::llround(config.test_fraction * static_cast<double>(config.n_identities)));
  for (std::size_t i = 0; i < n_test; ++i) people[order[i]].split = Split::Test;

  const int id_width = digits(config.n_identities - 1);
  const int take_width = digits(config.takes_per_identity - 1);
  const int scene_width = digits(config.n_scenes - 1);

  std::vector<ClipRecord> clips;
  EmbeddingTable ego(dim), exo(dim);
  auto emit = [&](ClipRecord rec, const VectorXd& base, double noise) {
    FrameMatrix frames(static_cast<Index>(config.frames), static_cast<Index>(dim));
    for (Index r = 0; r < frames.rows(); ++r) {
      for (Index k = 0; k < frames.cols(); ++k) frames(r, k) = static_cast<float>(base(k) + noise * rng.normal());
    }
    rec.frame_count = static_cast<std::uint32_t>(config.frames);
    (rec.view == View::Ego ? ego : exo).insert(rec.clip_id, std::move(frames));
    clips.push_back(std::move(rec));
  };

  for (std::size_t i = 0; i < config.n_identities; ++i) {
    const Person& p = people[i];
    const std::string identity = padded("p", i, id_width);
    VectorXd person = config.identity_w * identity_dirs[i] + config.gender_w * class_dirs[0][p.gender] +
                      config.race_w * class_dirs[1][p.race] + config.age_w * class_dirs[2][p.age];
    for (std::size_t t = 0; t < config.takes_per_identity; ++t) {
      const std::size_t scene = static_cast<std::size_t>(rng.below(config.n_scenes));
      const VectorXd take_dir = unit_direction(rng, dim);
      const VectorXd shared = person + config.scene_w * scene_dirs[scene] + config.take_w * take_dir;

      ClipRecord rec;
      rec.identity_id = identity;
      rec.take_id = identity + padded("_t", t, take_width);
      rec.scene_id = padded("s", scene, scene_width);
      rec.gender = static_cast<Gender>(p.gender);
      rec.race = static_cast<Race>(p.race);
      rec.age = static_cast<Age>(p.age);
      rec.split = p.split;

      ClipRecord e = rec;
      e.clip_id = rec.take_id + "_ego";
      e.view = View::Ego;
      emit(std::move(e), shared + config.view_w * view_dir[0], config.noise_ego);
      for (std::size_t x = 0; x < config.exo_per_take; ++x) {
        ClipRecord o = rec;
        o.clip_id = rec.take_id + "_exo" + std::to_string(x);
        o.view = View::Exo;
        emit(std::move(o), shared + config.view_w * view_dir[1], config.noise_exo);
      }
    }
  }

  std::string provenance = "synth\n" + synth_config_json(config) + "\n";
  return Dataset(std::move(clips), std::move(ego), std::move(exo), std::move(provenance));
}

}  // namespace egopriv
