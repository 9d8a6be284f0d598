#pragma once

#include "egopriv/classifier.hpp"
#include "egopriv/train.hpp"

#include <string>

namespace egopriv {

// JSON objects with the config field names; absent keys keep the current values.
void apply_train_config(const std::string& json_text, TrainConfig& config);
std::string train_config_json(const TrainConfig& config);

void apply_classifier_config(const std::string& json_text, ClassifierConfig& config);
std::string classifier_config_json(const ClassifierConfig& config);

}  // namespace egopriv
