#include "egopriv/data.hpp"
#include "egopriv/io.hpp"

#include "egopriv/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace egopriv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N>& names, const char* what) {
  for (std::size_t i = 0; i < N; ++i) {
    if (names[i] == s) return static_cast<E>(i);
  }
  fail(ErrorCode::InvalidLabel, std::string(what) + " label outside the enum: '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 2> kViewNames{"Ego", "Exo"};
constexpr std::array<std::string_view, 2> kSplitNames{"Train", "Test"};
constexpr std::array<std::string_view, 3> kAttributeNames{"Gender", "Race", "Age"};
constexpr std::array<std::string_view, 2> kGenderNames{"Female", "Male"};
constexpr std::array<std::string_view, 3> kRaceNames{"Asian", "Black", "White"};
constexpr std::array<std::string_view, 3> kAgeNames{"Young", "MiddleAged", "Senior"};
constexpr std::array<std::string_view, 4> kTaskNames{"EgoToEgoIdentity", "EgoToExoIdentity",
                                                     "Scene", "Moment"};

constexpr char kMagic[8] = {'E', 'G', 'O', 'P', 'R', 'I', 'V', '1'};

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(std::string bytes) : bytes_(std::move(bytes)) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int s = 0; s < 32; s += 8) v |= std::uint32_t(std::uint8_t(bytes_[pos_++])) << s;
    return v;
  }
  std::uint16_t u16() {
    std::uint16_t v = std::uint8_t(bytes_[pos_]) | (std::uint16_t(std::uint8_t(bytes_[pos_ + 1])) << 8);
    pos_ += 2;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::Io, "short write to " + path.string());
}

}  // namespace

std::string_view to_string(View v) { return kViewNames[static_cast<int>(v)]; }
std::string_view to_string(Split s) { return kSplitNames[static_cast<int>(s)]; }
std::string_view to_string(Attribute a) { return kAttributeNames[static_cast<int>(a)]; }
std::string_view to_string(Gender g) { return kGenderNames[static_cast<int>(g)]; }
std::string_view to_string(Race r) { return kRaceNames[static_cast<int>(r)]; }
std::string_view to_string(Age a) { return kAgeNames[static_cast<int>(a)]; }
std::string_view to_string(RetrievalTask t) { return kTaskNames[static_cast<int>(t)]; }

View parse_view(std::string_view s) {
  if (s == "ego") return View::Ego;
  if (s == "exo") return View::Exo;
  return parse_enum<View>(s, kViewNames, "view");
}
Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  return parse_enum<Split>(s, kSplitNames, "split");
}
Attribute parse_attribute(std::string_view s) {
  if (s == "gender") return Attribute::Gender;
  if (s == "race") return Attribute::Race;
  if (s == "age") return Attribute::Age;
  return parse_enum<Attribute>(s, kAttributeNames, "attribute");
}
Gender parse_gender(std::string_view s) { return parse_enum<Gender>(s, kGenderNames, "gender"); }
Race parse_race(std::string_view s) { return parse_enum<Race>(s, kRaceNames, "race"); }
Age parse_age(std::string_view s) { return parse_enum<Age>(s, kAgeNames, "age"); }

RetrievalTask parse_task(std::string_view s) {
  if (s == "ego2ego") return RetrievalTask::EgoToEgoIdentity;
  if (s == "ego2exo") return RetrievalTask::EgoToExoIdentity;
  if (s == "scene") return RetrievalTask::Scene;
  if (s == "moment") return RetrievalTask::Moment;
  for (std::size_t i = 0; i < kTaskNames.size(); ++i) {
    if (kTaskNames[i] == s) return static_cast<RetrievalTask>(i);
  }
  fail(ErrorCode::InvalidArgument, "unknown retrieval task '" + std::string(s) + "'");
}

const std::vector<std::string>& class_names(Attribute a) {
  static const std::vector<std::string> gender{"Female", "Male"};
  static const std::vector<std::string> race{"Asian", "Black", "White"};
  static const std::vector<std::string> age{"Young", "MiddleAged", "Senior"};
  switch (a) {
    case Attribute::Gender: return gender;
    case Attribute::Race: return race;
    case Attribute::Age: return age;
  }
  return gender;
}

std::size_t class_count(Attribute a) { return class_names(a).size(); }

int class_index(Attribute a, std::string_view name) {
  const auto& names = class_names(a);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  fail(ErrorCode::InvalidLabel, std::string(to_string(a)) + " label outside the enum: '" +
                                    std::string(name) + "'");
}

std::optional<int> ClipRecord::label(Attribute a) const {
  switch (a) {
    case Attribute::Gender:
      if (gender) return static_cast<int>(*gender);
      break;
    case Attribute::Race:
      if (race) return static_cast<int>(*race);
      break;
    case Attribute::Age:
      if (age) return static_cast<int>(*age);
      break;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// EmbeddingTable

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  require(dim > 0, ErrorCode::InvalidArgument, "embedding dim must be positive");
}

void EmbeddingTable::insert(const std::string& clip_id, FrameMatrix frames) {
  require(dim_ > 0, ErrorCode::InvalidArgument, "embedding table has no dimension");
  require(static_cast<std::size_t>(frames.cols()) == dim_, ErrorCode::DimensionMismatch,
          "dimension mismatch for clip '" + clip_id + "': " + std::to_string(frames.cols()) +
              " columns, table dim " + std::to_string(dim_));
  require(frames.rows() > 0, ErrorCode::InvalidArgument, "clip '" + clip_id + "' has no frames");
  require(!rows_.count(clip_id), ErrorCode::InvalidArgument,
          "duplicate clip '" + clip_id + "' in embedding table");
  rows_.emplace(clip_id, std::move(frames));
}

const FrameMatrix& EmbeddingTable::at(const std::string& clip_id) const {
  auto it = rows_.find(clip_id);
  require(it != rows_.end(), ErrorCode::MissingEmbedding, "missing embedding for clip '" + clip_id + "'");
  return it->second;
}

bool EmbeddingTable::normalized() const {
  for (const auto& [id, frames] : rows_) {
    for (Eigen::Index r = 0; r < frames.rows(); ++r) {
      if (std::abs(frames.row(r).cast<double>().norm() - 1.0) > 1e-5) return false;
    }
  }
  return !rows_.empty();
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  if (dim_ != other.dim_ || rows_.size() != other.rows_.size()) return false;
  auto it = other.rows_.begin();
  for (const auto& [id, frames] : rows_) {
    if (id != it->first || frames.rows() != it->second.rows() || frames != it->second) return false;
    ++it;
  }
  return true;
}

EmbeddingTable read_embeddings(const fs::path& path) {
  ByteReader in(read_file(path));
  require(in.has(16), ErrorCode::MalformedFile, "malformed header in " + path.string());
  const std::string magic = in.str(8);
  require(std::memcmp(magic.data(), kMagic, 8) == 0, ErrorCode::MalformedFile,
          "malformed header in " + path.string() + ": bad magic");
  const std::uint32_t n_clips = in.u32();
  const std::uint32_t dim = in.u32();
  require(dim > 0, ErrorCode::MalformedFile, "malformed header in " + path.string() + ": dim 0");

  const std::string layout_error = "dimension mismatch in " + path.string() +
                                   ": payload does not match header dim " + std::to_string(dim);
  EmbeddingTable table(dim);
  for (std::uint32_t c = 0; c < n_clips; ++c) {
    require(in.has(2), ErrorCode::DimensionMismatch, layout_error);
    const std::uint16_t id_len = in.u16();
    require(id_len > 0 && in.has(id_len + 4u), ErrorCode::DimensionMismatch, layout_error);
    std::string id = in.str(id_len);
    const std::uint32_t frame_count = in.u32();
    require(frame_count > 0, ErrorCode::DimensionMismatch, layout_error);
    const std::uint64_t n_floats = std::uint64_t(frame_count) * dim;
    require(in.remaining() / 4 >= n_floats, ErrorCode::DimensionMismatch, layout_error);
    FrameMatrix frames(frame_count, dim);
    for (std::uint32_t r = 0; r < frame_count; ++r) {
      for (std::uint32_t k = 0; k < dim; ++k) frames(r, k) = in.f32();
    }
    require(!table.contains(id), ErrorCode::MalformedFile,
            "duplicate clip '" + id + "' in " + path.string());
    table.insert(id, std::move(frames));
  }
  require(in.remaining() == 0, ErrorCode::DimensionMismatch, layout_error);
  return table;
}

void write_embeddings(const EmbeddingTable& table, const fs::path& path) {
  std::string out(kMagic, kMagic + 8);
  put_u32(out, static_cast<std::uint32_t>(table.size()));
  put_u32(out, static_cast<std::uint32_t>(table.dim()));
  for (const auto& [id, frames] : table.rows()) {
    require(id.size() <= 0xFFFF, ErrorCode::InvalidArgument, "clip id too long: " + id);
    put_u16(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    put_u32(out, static_cast<std::uint32_t>(frames.rows()));
    for (Eigen::Index r = 0; r < frames.rows(); ++r) {
      for (Eigen::Index k = 0; k < frames.cols(); ++k) put_u32(out, std::bit_cast<std::uint32_t>(frames(r, k)));
    }
  }
  write_file(path, out);
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

std::string required_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  require(it != obj.end() && it->is_string(), ErrorCode::MissingField,
          std::string("manifest record missing string field '") + key + "'");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  require(it->is_string(), ErrorCode::MalformedFile, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

ClipRecord clip_from_json(const json& obj) {
  require(obj.is_object(), ErrorCode::MalformedFile, "manifest entries must be objects");
  ClipRecord c;
  c.clip_id = required_string(obj, "clip_id");
  require(!c.clip_id.empty(), ErrorCode::MissingField, "empty clip_id");
  c.view = parse_enum<View>(required_string(obj, "view"), kViewNames, "view");
  c.identity_id = required_string(obj, "identity_id");
  c.take_id = required_string(obj, "take_id");
  c.scene_id = optional_string(obj, "scene_id");
  if (auto g = optional_string(obj, "gender")) c.gender = parse_gender(*g);
  if (auto r = optional_string(obj, "race")) c.race = parse_race(*r);
  if (auto a = optional_string(obj, "age")) c.age = parse_age(*a);
  c.split = parse_enum<Split>(required_string(obj, "split"), kSplitNames, "split");
  auto fc = obj.find("frame_count");
  require(fc != obj.end() && fc->is_number_integer() && fc->get<std::int64_t>() > 0,
          ErrorCode::MissingField, "clip '" + c.clip_id + "' needs a positive frame_count");
  c.frame_count = fc->get<std::uint32_t>();
  return c;
}

json clip_to_json(const ClipRecord& c) {
  json obj;
  obj["clip_id"] = c.clip_id;
  obj["view"] = to_string(c.view);
  obj["identity_id"] = c.identity_id;
  obj["take_id"] = c.take_id;
  obj["scene_id"] = c.scene_id ? json(*c.scene_id) : json(nullptr);
  obj["gender"] = c.gender ? json(to_string(*c.gender)) : json(nullptr);
  obj["race"] = c.race ? json(to_string(*c.race)) : json(nullptr);
  obj["age"] = c.age ? json(to_string(*c.age)) : json(nullptr);
  obj["split"] = to_string(c.split);
  obj["frame_count"] = c.frame_count;
  return obj;
}

}  // namespace

std::vector<ClipRecord> read_manifest(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::MalformedFile, "manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  require(doc.is_array(), ErrorCode::MalformedFile, "manifest must be a JSON array");
  std::vector<ClipRecord> clips;
  clips.reserve(doc.size());
  for (const auto& obj : doc) clips.push_back(clip_from_json(obj));
  return clips;
}

void write_manifest(const std::vector<ClipRecord>& clips, const fs::path& path) {
  json doc = json::array();
  for (const auto& c : clips) doc.push_back(clip_to_json(c));
  write_file(path, doc.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(std::vector<ClipRecord> clips, EmbeddingTable ego, EmbeddingTable exo,
                 std::string provenance)
    : clips_(std::move(clips)), ego_(std::move(ego)), exo_(std::move(exo)),
      provenance_(std::move(provenance)) {
  struct Demographics {
    std::optional<Gender> gender;
    std::optional<Race> race;
    std::optional<Age> age;
  };
  std::unordered_map<std::string, Demographics> by_identity;
  std::size_t n_ego = 0, n_exo = 0;

  for (std::size_t i = 0; i < clips_.size(); ++i) {
    const ClipRecord& c = clips_[i];
    require(index_.emplace(c.clip_id, i).second, ErrorCode::InvalidArgument,
            "duplicate clip_id '" + c.clip_id + "'");
    const EmbeddingTable& t = table(c.view);
    require(t.contains(c.clip_id), ErrorCode::MissingEmbedding,
            "missing embedding for clip '" + c.clip_id + "'");
    require(t.at(c.clip_id).rows() == static_cast<Eigen::Index>(c.frame_count),
            ErrorCode::DimensionMismatch,
            "frame_count of clip '" + c.clip_id + "' does not match its embedding rows");
    (c.view == View::Ego ? n_ego : n_exo)++;

    auto [it, inserted] = by_identity.try_emplace(c.identity_id, Demographics{c.gender, c.race, c.age});
    if (!inserted) {
      Demographics& d = it->second;
      auto merge = [&](auto& known, const auto& value, const char* what) {
        if (!value) return;
        if (known) {
          require(*known == *value, ErrorCode::InvalidLabel,
                  std::string("inconsistent ") + what + " labels for identity '" + c.identity_id + "'");
        } else {
          known = value;
        }
      };
      merge(d.gender, c.gender, "gender");
      merge(d.race, c.race, "race");
      merge(d.age, c.age, "age");
    }
  }

  auto check_table = [&](const EmbeddingTable& t, View v, std::size_t expected) {
    if (t.size() == expected) return;
    for (const auto& [id, frames] : t.rows()) {
      auto it = index_.find(id);
      require(it != index_.end() && clips_[it->second].view == v, ErrorCode::InvalidArgument,
              "unknown clip '" + id + "' in " + std::string(to_string(v)) + " embedding file");
    }
  };
  check_table(ego_, View::Ego, n_ego);
  check_table(exo_, View::Exo, n_exo);
}

const ClipRecord& Dataset::clip(const std::string& clip_id) const {
  auto it = index_.find(clip_id);
  require(it != index_.end(), ErrorCode::InvalidArgument, "unknown clip '" + clip_id + "'");
  return clips_[it->second];
}

const FrameMatrix& Dataset::frames(const std::string& clip_id) const {
  return table(clip(clip_id).view).at(clip_id);
}

std::vector<const ClipRecord*> Dataset::select(View view, std::optional<Split> split) const {
  std::vector<const ClipRecord*> out;
  for (const auto& c : clips_) {
    if (c.view == view && (!split || c.split == *split)) out.push_back(&c);
  }
  return out;
}

bool Dataset::operator==(const Dataset& other) const {
  return clips_ == other.clips_ && ego_ == other.ego_ && exo_ == other.exo_ &&
         provenance_ == other.provenance_;
}

Dataset ingest(const fs::path& manifest_path, const fs::path& ego_emb_path,
               const fs::path& exo_emb_path) {
  auto clips = read_manifest(manifest_path);
  auto ego = read_embeddings(ego_emb_path);
  auto exo = read_embeddings(exo_emb_path);
  return Dataset(std::move(clips), std::move(ego), std::move(exo));
}

Dataset load_bundle(const fs::path& dir) {
  auto clips = read_manifest(dir / "manifest.json");
  auto ego = read_embeddings(dir / "ego.emb");
  auto exo = read_embeddings(dir / "exo.emb");
  std::string provenance;
  if (fs::exists(dir / "provenance.txt")) provenance = read_file(dir / "provenance.txt");
  return Dataset(std::move(clips), std::move(ego), std::move(exo), std::move(provenance));
}

void save_bundle(const Dataset& dataset, const fs::path& dir) {
  fs::create_directories(dir);
  write_manifest(dataset.clips(), dir / "manifest.json");
  write_embeddings(dataset.ego(), dir / "ego.emb");
  write_embeddings(dataset.exo(), dir / "exo.emb");
  if (!dataset.provenance().empty()) write_file(dir / "provenance.txt", dataset.provenance());
}

// ---------------------------------------------------------------------------
// Positive sets

View gallery_view(RetrievalTask task, const GalleryScope& scope) {
  switch (task) {
    case RetrievalTask::EgoToEgoIdentity: return View::Ego;
    case RetrievalTask::EgoToExoIdentity: return View::Exo;
    case RetrievalTask::Scene: return scope.scene_gallery;
    case RetrievalTask::Moment: return View::Exo;
  }
  return View::Exo;
}

std::set<std::string> positive_set(const Dataset& dataset, RetrievalTask task,
                                   const std::string& query_clip, const GalleryScope& scope) {
  const ClipRecord& q = dataset.clip(query_clip);
  require(q.view == View::Ego, ErrorCode::InvalidArgument, "query '" + query_clip + "' is not an Ego clip");
  if (task == RetrievalTask::Scene) {
    require(q.scene_id.has_value(), ErrorCode::MissingField,
            "query '" + query_clip + "' has no scene_id for Scene retrieval");
  }
  const View gview = gallery_view(task, scope);
  std::set<std::string> out;
  for (const ClipRecord* c : dataset.select(gview, scope.split)) {
    if (c->clip_id == q.clip_id) continue;
    bool hit = false;
    switch (task) {
      case RetrievalTask::EgoToEgoIdentity:
      case RetrievalTask::EgoToExoIdentity: hit = c->identity_id == q.identity_id; break;
      case RetrievalTask::Scene: hit = c->scene_id == q.scene_id; break;
      case RetrievalTask::Moment: hit = c->take_id == q.take_id; break;
    }
    if (hit) out.insert(c->clip_id);
  }
  return out;
}

Eigen::MatrixXd subsample_frames(const FrameMatrix& frames, std::size_t max_frames) {
  const auto n = static_cast<std::size_t>(frames.rows());
  if (max_frames == 0 || n <= max_frames) return frames.cast<double>();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(max_frames), frames.cols());
  for (std::size_t i = 0; i < max_frames; ++i) {
    // Centre of the i-th of max_frames equal segments.
    const std::size_t src = ((2 * i + 1) * n) / (2 * max_frames);
    out.row(static_cast<Eigen::Index>(i)) = frames.row(static_cast<Eigen::Index>(src)).cast<double>();
  }
  return out;
}

std::string read_bytes(const fs::path& path) { return read_file(path); }
void write_bytes(const fs::path& path, const std::string& bytes) { write_file(path, bytes); }

}  // namespace egopriv
