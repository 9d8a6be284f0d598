#include "egopriv/checkpoint.hpp"

#include "egopriv/error.hpp"
#include "egopriv/io.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>

namespace egopriv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'G', 'O', 'C', 'K', 'P', 'T', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int s = 0; s < 64; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

double get_f64(const std::string& bytes, std::size_t pos) {
  std::uint64_t v = 0;
  for (int s = 0; s < 64; s += 8) v |= std::uint64_t(std::uint8_t(bytes[pos + s / 8])) << s;
  return std::bit_cast<double>(v);
}

json parse_meta(const std::string& meta) {
  json j;
  try {
    j = json::parse(meta);
  } catch (const json::parse_error&) {
    fail(ErrorCode::InvalidArgument, "checkpoint meta must be JSON");
  }
  require(j.is_object(), ErrorCode::InvalidArgument, "checkpoint meta must be a JSON object");
  return j;
}

void write_checkpoint(const fs::path& path, json header, const std::vector<const Eigen::VectorXd*>& blobs) {
  std::size_t offset = 0;
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    header["tensors"][i]["offset"] = offset;
    header["tensors"][i]["n_params"] = blobs[i]->size();
    offset += static_cast<std::size_t>(blobs[i]->size());
  }
  const std::string text = header.dump();
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(text.size()));
  out += text;
  for (const Eigen::VectorXd* b : blobs) {
    for (Eigen::Index i = 0; i < b->size(); ++i) put_f64(out, (*b)(i));
  }
  write_bytes(path, out);
}

struct Loaded {
  json header;
  std::vector<Eigen::VectorXd> tensors;
};

Loaded read_checkpoint(const fs::path& path) {
  const std::string bytes = read_bytes(path);
  require(bytes.size() >= 12 && std::memcmp(bytes.data(), kMagic, sizeof kMagic) == 0, ErrorCode::MalformedFile,
          "malformed header: " + path.string() + " is not a checkpoint");
  std::uint32_t len = 0;
  for (int s = 0; s < 32; s += 8) len |= std::uint32_t(std::uint8_t(bytes[8 + s / 8])) << s;
  require(bytes.size() >= 12 + std::size_t{len}, ErrorCode::MalformedFile, "malformed header: truncated");
  Loaded out;
  try {
    out.header = json::parse(bytes.substr(12, len));
  } catch (const json::parse_error&) {
    fail(ErrorCode::MalformedFile, "malformed header: checkpoint header is not JSON");
  }
  const std::size_t base = 12 + len;
  const std::size_t n_doubles = (bytes.size() - base) / 8;
  require((bytes.size() - base) % 8 == 0, ErrorCode::MalformedFile, "checkpoint blob is not a whole number of f64");
  require(out.header.contains("tensors") && out.header["tensors"].is_array(), ErrorCode::MalformedFile,
          "malformed header: no tensors");
  for (const json& t : out.header["tensors"]) {
    const std::size_t offset = t.at("offset").get<std::size_t>();
    const std::size_t n = t.at("n_params").get<std::size_t>();
    require(offset + n <= n_doubles, ErrorCode::MalformedFile, "checkpoint blob shorter than its header");
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = get_f64(bytes, base + 8 * (offset + i));
    out.tensors.push_back(std::move(v));
  }
  return out;
}

json head_json(const ProjectionHead& h, const char* role) {
  const HeadShape& s = h.shape();
  return {{"role", role},
          {"architecture", std::string(to_string(s.architecture))},
          {"input_dim", s.input_dim},
          {"hidden_dim", s.hidden_dim},
          {"output_dim", s.output_dim},
          {"pooling", std::string(to_string(s.pooling))}};
}

ProjectionHead head_from(const json& t, Eigen::VectorXd params) {
  HeadShape s;
  s.architecture = parse_architecture(t.at("architecture").get<std::string>());
  s.input_dim = t.at("input_dim").get<std::size_t>();
  s.hidden_dim = t.at("hidden_dim").get<std::size_t>();
  s.output_dim = t.at("output_dim").get<std::size_t>();
  s.pooling = parse_pooling(t.at("pooling").get<std::string>());
  return ProjectionHead(s, std::move(params));
}

template <typename F>
auto guarded(const fs::path& path, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedFile, "malformed header in " + path.string() + ": " + e.what());
  }
}

}  // namespace

void save_embedding_checkpoint(const TrainedEmbedding& heads, const fs::path& path, const std::string& meta) {
  json header;
  header["kind"] = "embedding";
  header["step"] = heads.steps;
  header["meta"] = parse_meta(meta);
  header["tensors"] = json::array({head_json(heads.ego_head, "ego"), head_json(heads.exo_head, "exo")});
  write_checkpoint(path, header, {&heads.ego_head.params(), &heads.exo_head.params()});
}

TrainedEmbedding load_embedding_checkpoint(const fs::path& path) {
  Loaded l = read_checkpoint(path);
  return guarded(path, [&] {
    require(l.header.at("kind") == "embedding", ErrorCode::MalformedFile,
            path.string() + " is not an embedding checkpoint");
    require(l.tensors.size() == 2, ErrorCode::MalformedFile, "embedding checkpoint needs two heads");
    TrainedEmbedding out;
    out.ego_head = head_from(l.header["tensors"][0], std::move(l.tensors[0]));
    out.exo_head = head_from(l.header["tensors"][1], std::move(l.tensors[1]));
    out.steps = l.header.at("step").get<std::size_t>();
    return out;
  });
}

void save_classifier_checkpoint(const ClassifierHead& head, std::size_t steps, const fs::path& path,
                                const std::string& meta) {
  json header;
  header["kind"] = "classifier";
  header["step"] = steps;
  header["meta"] = parse_meta(meta);
  header["tensors"] = json::array({json{{"role", "classifier"},
                                        {"attribute", std::string(to_string(head.attribute()))},
                                        {"view", std::string(to_string(head.view()))},
                                        {"input_dim", head.input_dim()},
                                        {"classes", class_names(head.attribute())},
                                        {"pooling", std::string(to_string(head.pooling()))}}});
  write_checkpoint(path, header, {&head.params()});
}

ClassifierHead load_classifier_checkpoint(const fs::path& path) {
  Loaded l = read_checkpoint(path);
  return guarded(path, [&] {
    require(l.header.at("kind") == "classifier", ErrorCode::MalformedFile,
            path.string() + " is not a classifier checkpoint");
    require(l.tensors.size() == 1, ErrorCode::MalformedFile, "classifier checkpoint needs one tensor");
    const json& t = l.header["tensors"][0];
    return ClassifierHead(parse_attribute(t.at("attribute").get<std::string>()),
                          parse_view(t.at("view").get<std::string>()), t.at("input_dim").get<std::size_t>(),
                          parse_pooling(t.at("pooling").get<std::string>()), std::move(l.tensors[0]));
  });
}

std::string checkpoint_kind(const fs::path& path) {
  Loaded l = read_checkpoint(path);
  return guarded(path, [&] { return l.header.at("kind").get<std::string>(); });
}

}  // namespace egopriv
