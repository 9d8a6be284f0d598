#pragma once

#include "egopriv/classifier.hpp"
#include "egopriv/train.hpp"

#include <filesystem>
#include <string>

namespace egopriv {

// Checkpoint layout: "EGOCKPT1", u32 header length, JSON header, then every
// parameter vector as little-endian f64, in header order.
//
// `meta` is an optional JSON object echoed into the header (training config).
void save_embedding_checkpoint(const TrainedEmbedding& heads, const std::filesystem::path& path,
                               const std::string& meta = "{}");
TrainedEmbedding load_embedding_checkpoint(const std::filesystem::path& path);

void save_classifier_checkpoint(const ClassifierHead& head, std::size_t steps, const std::filesystem::path& path,
                                const std::string& meta = "{}");
ClassifierHead load_classifier_checkpoint(const std::filesystem::path& path);

// Kind recorded in a checkpoint header: "embedding" or "classifier".
std::string checkpoint_kind(const std::filesystem::path& path);

}  // namespace egopriv
