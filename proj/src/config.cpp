#include "egopriv/config.hpp"

#include "egopriv/error.hpp"

#include <json.hpp>

namespace egopriv {

using nlohmann::json;

namespace {

json parse_object(const std::string& text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedFile, std::string(what) + " config is not valid JSON: " + e.what());
  }
  require(j.is_object(), ErrorCode::MalformedFile, std::string(what) + " config must be a JSON object");
  return j;
}

template <typename T>
void take(const json& j, const char* key, T& field) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      field = it->get<T>();
    } catch (const json::exception&) {
      fail(ErrorCode::MalformedFile, std::string("config field '") + key + "' has the wrong type");
    }
  }
}

std::string take_str(const json& j, const char* key, std::string fallback) {
  take(j, key, fallback);
  return fallback;
}

}  // namespace

std::string train_config_json(const TrainConfig& c) {
  const json j = {{"temperature", c.temperature},
                 {"batch_size", c.batch_size},
                 {"learning_rate", c.learning_rate},
                 {"weight_decay", c.adamw.weight_decay},
                 {"steps", c.steps},
                 {"cache_capacity", c.cache_capacity},
                 {"seed", c.seed},
                 {"positive_mode", std::string(to_string(c.positive_mode))},
                 {"denominator_mode", std::string(to_string(c.denominator_mode))},
                 {"architecture", std::string(to_string(c.architecture))},
                 {"output_dim", c.output_dim},
                 {"hidden_dim", c.hidden_dim},
                 {"pooling", std::string(to_string(c.pooling))},
                 {"frames", c.frames}};
  return j.dump();
}

void apply_train_config(const std::string& text, TrainConfig& c) {
  const json j = parse_object(text, "training");
  take(j, "temperature", c.temperature);
  take(j, "batch_size", c.batch_size);
  take(j, "learning_rate", c.learning_rate);
  take(j, "weight_decay", c.adamw.weight_decay);
  take(j, "steps", c.steps);
  take(j, "cache_capacity", c.cache_capacity);
  take(j, "seed", c.seed);
  c.positive_mode = parse_positive_mode(take_str(j, "positive_mode", std::string(to_string(c.positive_mode))));
  c.denominator_mode =
      parse_denominator_mode(take_str(j, "denominator_mode", std::string(to_string(c.denominator_mode))));
  c.architecture = parse_architecture(take_str(j, "architecture", std::string(to_string(c.architecture))));
  take(j, "output_dim", c.output_dim);
  take(j, "hidden_dim", c.hidden_dim);
  c.pooling = parse_pooling(take_str(j, "pooling", std::string(to_string(c.pooling))));
  take(j, "frames", c.frames);
}

std::string classifier_config_json(const ClassifierConfig& c) {
  const json j = {{"steps", c.steps},
                 {"batch_size", c.batch_size},
                 {"learning_rate", c.learning_rate},
                 {"weight_decay", c.adamw.weight_decay},
                 {"seed", c.seed},
                 {"pooling", std::string(to_string(c.pooling))},
                 {"frames", c.frames}};
  return j.dump();
}

void apply_classifier_config(const std::string& text, ClassifierConfig& c) {
  const json j = parse_object(text, "classifier");
  take(j, "steps", c.steps);
  take(j, "batch_size", c.batch_size);
  take(j, "learning_rate", c.learning_rate);
  take(j, "weight_decay", c.adamw.weight_decay);
  take(j, "seed", c.seed);
  c.pooling = parse_pooling(take_str(j, "pooling", std::string(to_string(c.pooling))));
  take(j, "frames", c.frames);
}

}  // namespace egopriv
